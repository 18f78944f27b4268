#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace tbcnn {

enum class TreeKind { kConstituency, kDependency };

struct TreeNode {
  // Present on words: every dependency node, constituency leaves.
  std::optional<std::string> word;
  std::optional<std::size_t> embedding_index;
  std::vector<std::size_t> children;
  std::optional<std::size_t> parent;
  // Relation to the governing word; dependency non-root nodes only.
  std::optional<std::string> relation;
  // Integer class tag on a constituent (treebank sentiment tags).
  std::optional<std::size_t> label;
  // Constituent category text, e.g. "NP"; "@" marks binarization nodes.
  std::string category;
  bool auxiliary = false;
  // 1-based word position; 0 for constituency non-leaves.
  std::size_t position = 0;
  // 1 at the root, parent's depth + 1 below.
  std::size_t depth = 0;

  bool is_leaf() const { return children.empty(); }
};

// A parse of one sentence. Nodes are addressed by index.
struct ParseTree {
  TreeKind kind = TreeKind::kDependency;
  std::vector<TreeNode> nodes;
  std::size_t root = 0;
  std::optional<std::size_t> sentence_label;

  std::size_t size() const { return nodes.size(); }
  // Number of words (n): dependency nodes or constituency leaves.
  std::size_t word_count() const;
  // Maximum depth over all nodes (d).
  std::size_t max_depth() const;
  // Node indices of the words in sentence order.
  std::vector<std::size_t> words_in_order() const;
  // Space-joined words in sentence order.
  std::string text() const;
};

// Recomputes parent links, depths and (for constituency) leaf positions from
// the child lists and root.
void recompute_structure(ParseTree& tree);

// Throws StructureError if any tree invariant is violated.
void validate(const ParseTree& tree);

}  // namespace tbcnn
