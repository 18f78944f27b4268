#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tbcnn/embeddings.hpp"
#include "tbcnn/tape.hpp"
#include "tbcnn/tensor.hpp"
#include "tbcnn/tree.hpp"

namespace tbcnn {

// p = tanh(W_comp [c1; c2] + b_comp); reconstruction tanh(W_rec p + b_rec).
struct CompositionParams {
  Parameter comp_w{"rae.comp_w", Matrix()};
  Parameter comp_b{"rae.comp_b", Matrix(), false};
  Parameter rec_w{"rae.rec_w", Matrix()};
  Parameter rec_b{"rae.rec_b", Matrix(), false};

  static CompositionParams zeros(std::size_t n_e);
  static CompositionParams init(std::size_t n_e, Rng& rng);

  std::size_t dim() const { return comp_w.value.rows(); }
  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;
};

struct RaeConfig {
  double learning_rate = 0.01;
  std::size_t batch_size = 100;
  std::size_t max_epochs = 30;
  double holdout_fraction = 0.1;
  std::uint64_t seed = 1;
};

struct RaeReport {
  // Index 0 is the held-out loss before any update.
  std::vector<double> heldout_loss;
  std::size_t best_epoch = 0;
  double initial_loss() const { return heldout_loss.front(); }
  double best_loss() const { return heldout_loss[best_epoch]; }
};

Vector compose(const Vector& c1, const Vector& c2, const CompositionParams& params);

// Per-node vectors: leaves take their embedding row, inner nodes compose
// their children bottom-up. A unary node composes its child with zeros.
std::vector<Vector> annotate(const ParseTree& tree, const CompositionParams& params,
                             const Vocabulary& vocab, const EmbeddingTable& table);

// Mean reconstruction error per inner node over the given trees.
double reconstruction_loss(std::span<const ParseTree> trees,
                           const CompositionParams& params, const Vocabulary& vocab,
                           const EmbeddingTable& table);

// Records the summed reconstruction error of one tree on the tape; `inner`
// receives the number of inner nodes.
Var record_reconstruction(Tape& tape, const ParseTree& tree,
                          const CompositionParams& params, const Vocabulary& vocab,
                          const EmbeddingTable& table, std::size_t& inner);

// Minibatch SGD on the reconstruction loss starting from `params`. Returns
// the parameters from the epoch with the lowest held-out loss (epoch 0 is
// the starting point). With fewer than two trees the held-out set is the
// training set.
CompositionParams pretrain(std::span<const ParseTree> corpus, const Vocabulary& vocab,
                           const EmbeddingTable& table, CompositionParams params,
                           const RaeConfig& config, RaeReport* report = nullptr);

}  // namespace tbcnn
