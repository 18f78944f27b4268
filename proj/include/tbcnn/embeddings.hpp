#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tbcnn/tensor.hpp"
#include "tbcnn/tree.hpp"

namespace tbcnn {

inline constexpr std::string_view kUnkToken = "<unk>";

class Vocabulary {
 public:
  Vocabulary() = default;
  // UNK is appended after the given tokens.
  explicit Vocabulary(std::vector<std::string> tokens);

  // Exact match, then lowercased, then UNK.
  std::size_t lookup(std::string_view token) const;
  bool contains(std::string_view token) const;
  std::size_t unk() const { return unk_; }
  std::size_t size() const { return tokens_.size(); }
  const std::string& token(std::size_t i) const { return tokens_.at(i); }
  // All tokens including the trailing UNK.
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t unk_ = 0;
};

// One row per vocabulary entry.
struct EmbeddingTable {
  Parameter vectors{"embeddings", Matrix(), false};

  std::size_t dim() const { return vectors.value.cols(); }
  std::size_t rows() const { return vectors.value.rows(); }
  Vector row(std::size_t i) const;
};

// Seed used for the UNK row drawn at load time.
inline constexpr std::uint64_t kUnkSeed = 0x5eed0001;

// word2vec text format: "count dim" header, then "token v1 ... v_dim".
std::pair<Vocabulary, EmbeddingTable> load_embeddings(std::istream& in);
std::pair<Vocabulary, EmbeddingTable> load_embeddings_file(
    const std::filesystem::path& path);

// Vocabulary of every word in the corpus (sorted) with vectors drawn
// uniformly from [-0.5, 0.5]; for runs without pretrained embeddings.
std::pair<Vocabulary, EmbeddingTable> random_embeddings(
    std::span<const ParseTree> corpus, std::size_t dim, std::uint64_t seed);

// Fills TreeNode::embedding_index for every word.
void index_words(ParseTree& tree, const Vocabulary& vocab);

}  // namespace tbcnn
