#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tbcnn/pooling.hpp"
#include "tbcnn/rng.hpp"
#include "tbcnn/tape.hpp"
#include "tbcnn/tensor.hpp"

namespace tbcnn {

// Fully connected ReLU hidden layer followed by a softmax output layer.
struct HeadParams {
  Parameter hidden_w{"head.hidden_w", Matrix()};
  Parameter hidden_b{"head.hidden_b", Matrix(), false};
  Parameter output_w{"head.output_w", Matrix()};
  Parameter output_b{"head.output_b", Matrix(), false};

  static HeadParams init(std::size_t input_width, std::size_t n_h, std::size_t classes,
                         Rng& rng);
  std::size_t input_width() const { return hidden_w.value.cols(); }
  std::size_t classes() const { return output_w.value.rows(); }
  std::vector<Parameter*> all();
};

enum class DropoutMode { kTrain, kEval };

// Inverted dropout masks for the head: applied to the pooled input and to the
// hidden activations. An absent mask means no dropout.
struct HeadMasks {
  const Vector* input = nullptr;
  const Vector* hidden = nullptr;
};

struct PredictionOutput {
  Vector probabilities;
  std::size_t predicted = 0;
};

struct LossValue {
  double cross_entropy = 0.0;
  double l2_term = 0.0;
  double total = 0.0;
  // The gold probability underflowed and was clamped before the log.
  bool clamped = false;
};

inline constexpr double kProbabilityFloor = 1e-12;

// Lowest index wins ties.
std::size_t argmax(const Vector& v);

PredictionOutput forward(const PooledVector& pooled, const HeadParams& params,
                         const HeadMasks& masks = {});

double l2_penalty(std::span<const Parameter* const> weights, double lambda);

LossValue loss(const PredictionOutput& pred, std::size_t gold,
               std::span<const Parameter* const> weights, double lambda);

// Class order: strongly negative, negative, neutral, positive, strongly
// positive. Neutral mass is discarded and the rest renormalised.
struct BinaryTransfer {
  PredictionOutput output;
  // All non-neutral mass was zero; reported as a negative tie.
  bool degenerate = false;
};
BinaryTransfer transfer_5_to_2(const Vector& probabilities);

// Train mode: each entry is 0 with probability `rate`, else 1 / (1 - rate).
// Eval mode: all ones.
Vector dropout_mask(std::size_t dim, double rate, DropoutMode mode, Rng& rng);

// Records the head on a tape and returns the logits.
Var record_head(Tape& tape, Var pooled, const HeadParams& params,
                const HeadMasks& masks = {});

}  // namespace tbcnn
