#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tbcnn/model.hpp"
#include "tbcnn/trainer.hpp"
#include "tbcnn/rng.hpp"
#include "tbcnn/tree.hpp"

namespace tbcnn::testing {

// Heads are 0-based parent indices; the root has head == n.
std::string conll_text(const std::vector<std::string>& words,
                       const std::vector<std::size_t>& heads,
                       const std::vector<std::string>& relations);

// Random recursive dependency tree over `words` (in sentence order).
ParseTree random_dependency_tree(Rng& rng, const std::vector<std::string>& words,
                                 const std::vector<std::string>& relations);

// Random binary bracketing over `words`; every node gets tag `label`. With
// `unary`, some leaves are wrapped in an extra unary constituent.
ParseTree random_constituency_tree(Rng& rng, const std::vector<std::string>& words,
                                   std::size_t label, bool unary = false);

std::vector<std::string> random_words(Rng& rng, std::size_t n,
                                      const std::vector<std::string>& pool);

// Three classes, each sentence holding exactly one cue word of its class
// among fillers. Both tree kinds describe the same sentences.
struct ToyCorpus {
  std::vector<ParseTree> constituency;
  std::vector<ParseTree> dependency;
  std::vector<std::string> cue_of;  // cue word of each sentence
};
ToyCorpus toy_corpus(std::size_t n, std::uint64_t seed);
bool is_cue_word(const std::string& word);

// Two classes over dependency trees with the same word multiset and random
// positions: class 1 iff the word "ka" governs the word "zu".
struct StructuralTask {
  std::vector<ParseTree> train;
  std::vector<ParseTree> test;
};
StructuralTask structural_task(std::size_t n_train, std::size_t n_test, std::uint64_t seed);
inline constexpr const char* kGovernor = "ka";
inline constexpr const char* kDependent = "zu";

// Model over `corpus` with random embeddings; composition parameters are
// random (constituency) and not pretrained.
Model make_model(const std::vector<ParseTree>& corpus, const ModelShape& shape,
                 std::uint64_t seed);

// Small-scale regime for the toy corpora: sentiment-style dropout and l2
// with n_c = 32, n_h = 16, batch 5 and a fixed learning rate.
TrainConfig toy_config(Variant v);

struct Fitted {
  Model model;
  TrainReport report;
};
// Random embeddings from `train`, composition pretraining for constituency
// models, then SGD. `valid` may be empty, in which case `train` is used.
Fitted fit(const std::vector<ParseTree>& train, const std::vector<ParseTree>& valid,
           const TrainConfig& config, std::size_t classes);

std::vector<Vector> random_vectors(Rng& rng, std::size_t count, std::size_t dim,
                                   double bound = 1.0);

}  // namespace tbcnn::testing
