#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tbcnn/classifier_head.hpp"
#include "tbcnn/corpus_io.hpp"
#include "tbcnn/embeddings.hpp"
#include "tbcnn/pooling.hpp"
#include "tbcnn/rae.hpp"
#include "tbcnn/tape.hpp"
#include "tbcnn/tree_conv.hpp"

namespace tbcnn {

// kBagOfEmbeddings is the flat baseline: word vectors are pooled directly,
// without tree convolution, into the same head.
enum class Variant { kConstituency, kDependency, kBagOfEmbeddings };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view s);
std::string_view to_string(PoolingStrategy p);
PoolingStrategy parse_pooling(std::string_view s);
TreeKind tree_kind(Variant v);

struct ModelShape {
  Variant variant = Variant::kDependency;
  std::size_t n_e = 300;
  std::size_t n_c = 300;
  std::size_t n_h = 200;
  std::size_t num_classes = 5;
  PoolingStrategy pooling = PoolingStrategy::kKSlot;
  std::size_t k = 2;
  double alpha = kDefaultAlpha;

  std::size_t slot_count() const;
  // Width of one pooled slot: n_c, or n_e for the bag baseline.
  std::size_t feature_dim() const;
};

// Throws ConfigError on zero sizes or a pooling strategy the variant's tree
// kind cannot use.
void validate(const ModelShape& shape);

struct ForwardOptions {
  bool train_embeddings = false;
  double dropout_embedding = 0.0;
  double dropout_hidden = 0.0;
  // Null means evaluation mode: no dropout.
  Rng* rng = nullptr;
  // Precomputed node vectors (see Model::input_vectors). When empty they are
  // computed from the current parameters.
  std::span<const Vector> inputs = {};
};

class Model {
 public:
  Model() = default;
  // Initialises window and head weights from `rng`; biases start at zero.
  Model(const ModelShape& shape, Vocabulary vocab, EmbeddingTable embeddings,
        DepTypeInventory inventory, CompositionParams rae, LabelSet labels, Rng& rng);

  const ModelShape& shape() const { return shape_; }
  const Vocabulary& vocab() const { return vocab_; }
  const EmbeddingTable& embeddings() const { return embeddings_; }
  const DepTypeInventory& inventory() const { return inventory_; }
  const CompositionParams& rae() const { return rae_; }
  const CWindowParams& c_window() const { return c_window_; }
  const DWindowParams& d_window() const { return d_window_; }
  const HeadParams& head() const { return head_; }
  const LabelSet& labels() const { return labels_; }

  // Every array of the active variant in a fixed order.
  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  Parameter* find_parameter(std::string_view name);
  // Weight matrices under the l2 penalty.
  std::vector<const Parameter*> regularized() const;
  // Composition parameters never receive gradients from classification.
  bool is_frozen(const Parameter& p) const;
  bool is_embedding(const Parameter& p) const { return &p == &embeddings_.vectors; }

  // Convolution inputs: embeddings for words, composed vectors for
  // constituency inner nodes.
  std::vector<Vector> input_vectors(const ParseTree& tree) const;
  FeatureMap features(const ParseTree& tree) const;
  FeatureMap features(const ParseTree& tree, std::span<const Vector> inputs) const;
  SlotAssignment slots(const ParseTree& tree) const;
  PredictionOutput predict(const ParseTree& tree) const;

  Var record_logits(Tape& tape, const ParseTree& tree, const ForwardOptions& opts) const;
  // Cross-entropy of one sample (no l2 term).
  Var record_loss(Tape& tape, const ParseTree& tree, std::size_t gold,
                  const ForwardOptions& opts) const;
  // lambda * sum of squared regularized weights.
  Var record_l2(Tape& tape, double lambda) const;

 private:
  void check_tree(const ParseTree& tree) const;

  ModelShape shape_;
  Vocabulary vocab_;
  EmbeddingTable embeddings_;
  DepTypeInventory inventory_;
  CompositionParams rae_;
  CWindowParams c_window_;
  DWindowParams d_window_;
  HeadParams head_;
  LabelSet labels_;
};

}  // namespace tbcnn
