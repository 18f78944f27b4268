#include "tbcnn/tree.hpp"

#include <algorithm>
#include <string>

#include "tbcnn/error.hpp"

namespace tbcnn {

std::size_t ParseTree::word_count() const {
  return static_cast<std::size_t>(std::count_if(
      nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.word.has_value(); }));
}

std::size_t ParseTree::max_depth() const {
  std::size_t d = 0;
  for (const auto& n : nodes) d = std::max(d, n.depth);
  return d;
}

std::vector<std::size_t> ParseTree::words_in_order() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].word) out.push_back(i);
  }
  std::stable_sort(out.begin(), out.end(), [this](std::size_t a, std::size_t b) {
    return nodes[a].position < nodes[b].position;
  });
  return out;
}

std::string ParseTree::text() const {
  std::string out;
  for (const std::size_t i : words_in_order()) {
    if (!out.empty()) out += ' ';
    out += *nodes[i].word;
  }
  return out;
}

void recompute_structure(ParseTree& tree) {
  for (auto& n : tree.nodes) {
    n.parent.reset();
    n.depth = 0;
  }
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    for (const std::size_t c : tree.nodes[i].children) {
      if (c >= tree.nodes.size()) {
        throw StructureError("child index " + std::to_string(c) + " out of range");
      }
      if (tree.nodes[c].parent) {
        throw StructureError("node " + std::to_string(c) + " has two parents");
      }
      tree.nodes[c].parent = i;
    }
  }
  if (tree.root >= tree.nodes.size()) throw StructureError("root out of range");
  std::size_t next_position = 1;
  std::size_t visited = 0;
  // Explicit stack; children pushed in reverse so they pop left to right.
  std::vector<std::size_t> stack{tree.root};
  tree.nodes[tree.root].depth = 1;
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    if (++visited > tree.nodes.size()) throw StructureError("cycle in child links");
    auto& node = tree.nodes[i];
    if (tree.kind == TreeKind::kConstituency) {
      node.position = node.word ? next_position++ : 0;
    }
    for (auto it = node.children.rbegin(); it != node.children.rend(); ++it) {
      tree.nodes[*it].depth = node.depth + 1;
      stack.push_back(*it);
    }
  }
  if (visited != tree.nodes.size()) {
    throw StructureError("tree has " + std::to_string(tree.nodes.size() - visited) +
                         " nodes unreachable from the root");
  }
}

void validate(const ParseTree& tree) {
  const std::size_t n = tree.nodes.size();
  if (n == 0) throw StructureError("empty tree");
  if (tree.root >= n) throw StructureError("root out of range");
  if (tree.nodes[tree.root].parent) throw StructureError("root has a parent");
  std::vector<int> parents(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (const std::size_t c : tree.nodes[i].children) {
      if (c >= n) throw StructureError("child index out of range");
      if (tree.nodes[c].parent != i) {
        throw StructureError("parent link of node " + std::to_string(c) +
                             " disagrees with child list");
      }
      ++parents[c];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const int expected = i == tree.root ? 0 : 1;
    if (parents[i] != expected) {
      throw StructureError("node " + std::to_string(i) + " has " +
                           std::to_string(parents[i]) + " parents");
    }
  }
  // With one parent per non-root node, reachability rules out cycles.
  std::vector<std::size_t> stack{tree.root};
  std::size_t seen = 0;
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    if (++seen > n) throw StructureError("cycle in child links");
    const auto& node = tree.nodes[i];
    const std::size_t expected_depth =
        i == tree.root ? 1 : tree.nodes[*node.parent].depth + 1;
    if (node.depth != expected_depth) {
      throw StructureError("node " + std::to_string(i) + " has depth " +
                           std::to_string(node.depth) + ", expected " +
                           std::to_string(expected_depth));
    }
    for (const std::size_t c : node.children) stack.push_back(c);
  }
  if (seen != n) throw StructureError("unreachable nodes");

  if (tree.kind == TreeKind::kDependency) {
    std::vector<bool> taken(n + 1, false);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& node = tree.nodes[i];
      if (!node.word) throw StructureError("dependency node without a word");
      if (node.position < 1 || node.position > n || taken[node.position]) {
        throw StructureError("word positions are not a permutation of 1..n");
      }
      taken[node.position] = true;
      if (node.relation.has_value() == (i == tree.root)) {
        throw StructureError("relation must be present exactly on non-root nodes");
      }
    }
  } else {
    for (const auto& node : tree.nodes) {
      if (node.is_leaf() != node.word.has_value()) {
        throw StructureError("constituency words must sit exactly on leaves");
      }
      if (node.children.size() > 2) {
        throw StructureError("constituency node with more than two children");
      }
    }
  }
}

}  // namespace tbcnn
