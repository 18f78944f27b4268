#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tbcnn/tree.hpp"

namespace tbcnn {

// Parses one bracketed tree, e.g. "(3 (2 I) (3 (3 loved) (2 it)))".
// Preterminals "(TAG word)" become word leaves; integer labels become class
// tags. Nodes with more than two children are binarized right-branching.
ParseTree parse_constituency(std::string_view text);

// Parses one CoNLL-X block (tab-separated; id, form, ..., head, deprel).
ParseTree parse_dependency(std::string_view block);

// Inverse of the parsers above, up to whitespace.
std::string to_bracketed(const ParseTree& tree);
std::string to_conll(const ParseTree& tree);

// Every tagged constituent as its own sample rooted at that constituent.
std::vector<ParseTree> subsentence_samples(const ParseTree& tree);

std::vector<ParseTree> read_constituency(std::istream& in);
std::vector<ParseTree> read_dependency(std::istream& in);
// File variants prefix errors with the path.
std::vector<ParseTree> read_constituency_file(const std::filesystem::path& path);
std::vector<ParseTree> read_dependency_file(const std::filesystem::path& path);

// One "LABEL<TAB>sentence-id" line per sentence; sentence-id is the 1-based
// ordinal of the tree in its corpus file.
struct LabelRecord {
  std::string label;
  std::size_t sentence_id = 0;
};
std::vector<LabelRecord> read_labels(std::istream& in);
std::vector<LabelRecord> read_labels_file(const std::filesystem::path& path);

// Maps label names to dense class indices. All-integer label sets keep their
// numeric values (0..max); otherwise names are sorted lexicographically.
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(std::vector<std::string> names);
  static LabelSet from_labels(std::span<const std::string> labels);
  static LabelSet numeric(std::size_t count);

  std::optional<std::size_t> index_of(std::string_view name) const;
  const std::string& name(std::size_t index) const { return names_.at(index); }
  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Sets sentence_label on every tree. Each tree must receive exactly one label.
void apply_labels(std::span<ParseTree> trees, std::span<const LabelRecord> labels,
                  const LabelSet& set);

// Relation -> weight slot. The most frequent relations get dedicated slots,
// everything else shares the final slot.
class DepTypeInventory {
 public:
  static constexpr std::size_t kMaxDedicated = 15;

  DepTypeInventory() = default;
  explicit DepTypeInventory(std::vector<std::string> dedicated);

  std::size_t slot_of(std::string_view relation) const;
  std::size_t shared_slot() const { return dedicated_.size(); }
  std::size_t slot_count() const { return dedicated_.size() + 1; }
  const std::vector<std::string>& dedicated() const { return dedicated_; }

 private:
  std::vector<std::string> dedicated_;
  std::unordered_map<std::string, std::size_t> slots_;
};

// Ties in frequency go to the lexicographically smaller relation.
DepTypeInventory build_dep_inventory(std::span<const ParseTree> corpus);

}  // namespace tbcnn
