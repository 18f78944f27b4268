#include "tbcnn/embeddings.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "tbcnn/error.hpp"
#include "tbcnn/rng.hpp"

namespace tbcnn {

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string_view> fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

Vector unk_row(std::size_t dim) {
  Rng rng(kUnkSeed);
  Vector v(dim);
  for (std::size_t i = 0; i < dim; ++i) v[i] = uniform(rng, -0.01, 0.01);
  return v;
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], i).second) {
      throw DataError("duplicate vocabulary token '" + tokens_[i] + "'");
    }
  }
  unk_ = tokens_.size();
  tokens_.emplace_back(kUnkToken);
}

std::size_t Vocabulary::lookup(std::string_view token) const {
  if (const auto it = index_.find(std::string(token)); it != index_.end()) {
    return it->second;
  }
  if (const auto it = index_.find(lowercase(token)); it != index_.end()) {
    return it->second;
  }
  return unk_;
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.contains(std::string(token));
}

Vector EmbeddingTable::row(std::size_t i) const {
  const auto r = vectors.value.row(i);
  return Vector(std::vector<double>(r.begin(), r.end()));
}

std::pair<Vocabulary, EmbeddingTable> load_embeddings(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("missing \"count dim\" header", 1);
  const auto header = fields(line);
  std::size_t count = 0;
  std::size_t dim = 0;
  const auto parse_size = [](std::string_view s, std::size_t& out) {
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && end == s.data() + s.size();
  };
  if (header.size() != 2 || !parse_size(header[0], count) ||
      !parse_size(header[1], dim) || dim == 0) {
    throw FormatError("header must be \"count dim\" with positive dim", 1);
  }
  std::vector<std::string> tokens;
  std::vector<double> data;
  tokens.reserve(count);
  data.reserve((count + 1) * dim);
  std::size_t line_no = 1;
  while (tokens.size() < count && std::getline(in, line)) {
    ++line_no;
    const auto cols = fields(line);
    if (cols.empty()) continue;
    if (cols.size() != dim + 1) {
      throw FormatError("expected token and " + std::to_string(dim) +
                            " values, found " + std::to_string(cols.size()) + " fields",
                        line_no);
    }
    tokens.emplace_back(cols[0]);
    for (std::size_t k = 1; k <= dim; ++k) {
      double v = 0.0;
      // from_chars for double is missing from older libstdc++; strtod instead.
      const std::string text(cols[k]);
      char* end = nullptr;
      v = std::strtod(text.c_str(), &end);
      if (end != text.c_str() + text.size() || !std::isfinite(v)) {
        throw FormatError("value '" + text + "' is not a finite number", line_no);
      }
      data.push_back(v);
    }
  }
  if (tokens.size() != count) {
    throw FormatError("header announces " + std::to_string(count) +
                          " vectors but the file has " + std::to_string(tokens.size()),
                      line_no);
  }
  const Vector unk = unk_row(dim);
  data.insert(data.end(), unk.values().begin(), unk.values().end());
  Vocabulary vocab(std::move(tokens));
  EmbeddingTable table;
  table.vectors.value = Matrix(vocab.size(), dim, std::move(data));
  return {std::move(vocab), std::move(table)};
}

std::pair<Vocabulary, EmbeddingTable> load_embeddings_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open file");
  try {
    return load_embeddings(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::pair<Vocabulary, EmbeddingTable> random_embeddings(
    std::span<const ParseTree> corpus, std::size_t dim, std::uint64_t seed) {
  std::set<std::string> words;
  for (const auto& tree : corpus) {
    for (const auto& node : tree.nodes) {
      if (node.word) words.insert(*node.word);
    }
  }
  Vocabulary vocab(std::vector<std::string>(words.begin(), words.end()));
  Rng rng(seed);
  EmbeddingTable table;
  table.vectors.value = Matrix::uniform(vocab.size(), dim, 0.5, rng);
  const Vector unk = unk_row(dim);
  std::copy(unk.values().begin(), unk.values().end(),
            table.vectors.value.row(vocab.unk()).begin());
  return {std::move(vocab), std::move(table)};
}

void index_words(ParseTree& tree, const Vocabulary& vocab) {
  for (auto& node : tree.nodes) {
    if (node.word) node.embedding_index = vocab.lookup(*node.word);
  }
}

}  // namespace tbcnn
