#include "tbcnn/classifier_head.hpp"

#include <cmath>

#include "tbcnn/error.hpp"

namespace tbcnn {

namespace {

Vector masked(const Vector& x, const Vector* mask) {
  if (mask == nullptr) return x;
  if (mask->dim() != x.dim()) throw ShapeError("dropout mask width mismatch");
  Vector out(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) out[i] = x[i] * (*mask)[i];
  return out;
}

}  // namespace

HeadParams HeadParams::init(std::size_t input_width, std::size_t n_h,
                            std::size_t classes, Rng& rng) {
  HeadParams p;
  p.hidden_w.value = Matrix::glorot(n_h, input_width, rng);
  p.hidden_b.value = Matrix(n_h, 1);
  p.output_w.value = Matrix::glorot(classes, n_h, rng);
  p.output_b.value = Matrix(classes, 1);
  return p;
}

std::vector<Parameter*> HeadParams::all() {
  return {&hidden_w, &hidden_b, &output_w, &output_b};
}

std::size_t argmax(const Vector& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.dim(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

PredictionOutput forward(const PooledVector& pooled, const HeadParams& params,
                         const HeadMasks& masks) {
  const Vector input = masked(flatten(pooled), masks.input);
  if (input.dim() != params.input_width()) {
    throw ShapeError("head expects input width " + std::to_string(params.input_width()) +
                     ", got " + std::to_string(input.dim()));
  }
  Vector hidden = matvec(params.hidden_w.value, input);
  add_in_place(hidden, params.hidden_b.value.data());
  hidden = masked(relu(hidden), masks.hidden);
  Vector logits = matvec(params.output_w.value, hidden);
  add_in_place(logits, params.output_b.value.data());
  PredictionOutput out;
  out.probabilities = softmax(logits);
  out.predicted = argmax(out.probabilities);
  return out;
}

double l2_penalty(std::span<const Parameter* const> weights, double lambda) {
  double sum = 0.0;
  for (const Parameter* p : weights) {
    for (const double v : p->value.data()) sum += v * v;
  }
  return lambda * sum;
}

LossValue loss(const PredictionOutput& pred, std::size_t gold,
               std::span<const Parameter* const> weights, double lambda) {
  if (gold >= pred.probabilities.dim()) {
    throw ContractError("gold class " + std::to_string(gold) + " out of range");
  }
  LossValue v;
  const double p = pred.probabilities[gold];
  v.clamped = p < kProbabilityFloor;
  v.cross_entropy = -std::log(v.clamped ? kProbabilityFloor : p);
  v.l2_term = l2_penalty(weights, lambda);
  v.total = v.cross_entropy + v.l2_term;
  return v;
}

BinaryTransfer transfer_5_to_2(const Vector& probabilities) {
  if (probabilities.dim() != 5) {
    throw ShapeError("binary transfer needs a 5-class distribution, got " +
                     std::to_string(probabilities.dim()) + " classes");
  }
  const double negative = probabilities[0] + probabilities[1];
  const double positive = probabilities[3] + probabilities[4];
  const double mass = negative + positive;
  BinaryTransfer t;
  if (mass <= 0.0) {
    t.degenerate = true;
    t.output.probabilities = Vector{0.5, 0.5};
    t.output.predicted = 0;
    return t;
  }
  t.output.probabilities = Vector{negative / mass, positive / mass};
  t.output.predicted = positive > negative ? 1 : 0;
  return t;
}

Vector dropout_mask(std::size_t dim, double rate, DropoutMode mode, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ConfigError("dropout rate must lie in [0, 1), got " + std::to_string(rate));
  }
  Vector mask(dim, 1.0);
  if (mode == DropoutMode::kEval || rate == 0.0) return mask;
  const double keep = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < dim; ++i) mask[i] = uniform01(rng) < rate ? 0.0 : keep;
  return mask;
}

Var record_head(Tape& tape, Var pooled, const HeadParams& params,
                const HeadMasks& masks) {
  Var input = masks.input ? tape.mul_const(pooled, *masks.input) : pooled;
  Var hidden = tape.relu(tape.add(tape.matvec(tape.param(params.hidden_w), input),
                                  tape.param(params.hidden_b)));
  if (masks.hidden) hidden = tape.mul_const(hidden, *masks.hidden);
  return tape.add(tape.matvec(tape.param(params.output_w), hidden),
                  tape.param(params.output_b));
}

}  // namespace tbcnn
