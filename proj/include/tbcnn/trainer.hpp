#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "tbcnn/model.hpp"
#include "tbcnn/rae.hpp"
#include "tbcnn/tree.hpp"

namespace tbcnn {

struct TrainConfig {
  Variant variant = Variant::kDependency;
  std::size_t n_e = 300;
  std::size_t n_c = 300;
  std::size_t n_h = 200;
  std::size_t batch_size = 200;
  double learning_rate = 0.01;
  double lambda = 1e-5;
  double dropout_hidden = 0.5;
  double dropout_embedding = 0.4;
  std::size_t max_epochs = 30;
  PoolingStrategy pooling = PoolingStrategy::kKSlot;
  std::size_t k = 2;
  double alpha = kDefaultAlpha;
  bool train_embeddings = true;
  std::uint64_t seed = 1;
  // Halve the learning rate after this many epochs without a validation
  // improvement; 0 keeps it fixed.
  std::size_t lr_patience = 2;
  RaeConfig rae;

  // Sentiment regime: 2-slot (d) or 3-slot (c) pooling, embeddings tuned.
  static TrainConfig sentiment(Variant v);
  // Question-classification regime: small layers, frozen embeddings.
  static TrainConfig question_classification(Variant v);
};

PoolingStrategy default_pooling(Variant v);

// Throws ConfigError naming the offending field.
void validate(const TrainConfig& config);

ModelShape shape_of(const TrainConfig& config, std::size_t num_classes);

// One training or evaluation example; `tree` must outlive the sample.
struct Sample {
  const ParseTree* tree = nullptr;
  std::size_t label = 0;
};

// Root-labeled sentences. Throws DataError on a tree without a label.
std::vector<Sample> whole_sentences(std::span<const ParseTree> trees);
// Every tagged constituent of every tree, whole sentences included.
std::vector<ParseTree> expand_subsentences(std::span<const ParseTree> trees);

struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_accuracy = 0.0;
  double learning_rate = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  std::size_t best_epoch = 0;
  double best_val_accuracy = 0.0;
  double wall_seconds = 0.0;
};

double accuracy(const Model& model, std::span<const Sample> samples);

// Minibatch SGD on `model` in place. On return the model holds the
// parameters of the best validation epoch. Progress lines go to `log`.
TrainReport train(Model& model, std::span<const Sample> train_set,
                  std::span<const Sample> validation, const TrainConfig& config,
                  std::ostream* log = nullptr);

// Length buckets: bucket b covers lengths in (edges[b-1], edges[b]]; the
// final bucket is open-ended.
class LengthBuckets {
 public:
  explicit LengthBuckets(std::vector<std::size_t> upper_edges);
  // `groups` buckets of width `granularity`, the shortest and longest merged
  // into tails: <= 2g, (2g, 3g], ..., > g * groups.
  static LengthBuckets standard(std::size_t granularity = 5, std::size_t groups = 7);
  std::size_t count() const { return edges_.size() + 1; }
  std::size_t bucket_of(std::size_t length) const;
  std::string label(std::size_t bucket) const;

 private:
  std::vector<std::size_t> edges_;
};

struct BucketAccuracy {
  std::string range;
  std::size_t total = 0;
  std::size_t correct = 0;
  // Absent when the bucket is empty.
  std::optional<double> accuracy;
};

struct EvalReport {
  std::size_t total = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  // Samples excluded from the metric (neutral gold under binary transfer).
  std::size_t skipped = 0;
  std::vector<BucketAccuracy> buckets;
};

EvalReport evaluate(const Model& model, std::span<const Sample> samples,
                    const LengthBuckets& buckets);
// 5-class model scored on binary gold: labels 0-1 are negative, 3-4
// positive, 2 is skipped.
EvalReport evaluate_binary(const Model& model, std::span<const Sample> samples,
                           const LengthBuckets& buckets);
void print_report(std::ostream& out, const EvalReport& report);

struct GradCheckOptions {
  double epsilon = 1e-5;
  double lambda = 0.0;
  bool train_embeddings = true;
  std::uint64_t seed = 1;
  // Above this many scalars a random fraction is checked instead.
  std::size_t sample_threshold = 10000;
  double sample_fraction = 0.01;
  // Test hook: perturbs every analytic gradient before comparison.
  bool corrupt = false;
};

struct GradCheckGroup {
  std::string name;
  std::size_t checked = 0;
  double max_rel_error = 0.0;
  double max_abs_analytic = 0.0;
  // Frozen groups are reported with their analytic gradient only.
  bool frozen = false;
};

struct GradCheckReport {
  std::vector<GradCheckGroup> groups;
  double max_rel_error = 0.0;
  bool passed(double tol) const { return max_rel_error < tol; }
};

double relative_error(double analytic, double numeric);

// Central differences of cross-entropy + lambda * l2 on one sample with
// dropout off. Parameters are restored afterwards.
GradCheckReport gradient_check(Model& model, const ParseTree& tree, std::size_t gold,
                               const GradCheckOptions& options);

}  // namespace tbcnn
