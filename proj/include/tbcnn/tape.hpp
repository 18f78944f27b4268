#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "tbcnn/tensor.hpp"

namespace tbcnn {

// Handle to a value recorded on a Tape.
struct Var {
  std::size_t index = 0;
};

// Accumulated d(loss)/d(parameter), keyed by parameter identity. Parameters
// that never reached the loss have no entry and read back as exact zeros.
class GradientMap {
 public:
  // Zero-initialised on first access.
  Matrix& accumulator(const Parameter& p);
  const Matrix* find(const Parameter& p) const;
  Matrix get(const Parameter& p) const;

  // Entry-wise sum; used to reduce per-sentence maps.
  void add(const GradientMap& other);
  void scale(double factor);
  bool empty() const { return grads_.empty(); }

 private:
  std::unordered_map<const Parameter*, Matrix> grads_;
};

// Records primitive operations during a forward pass so that backward() can
// replay them in reverse. Values are column vectors, except parameter leaves
// which keep their matrix shape. A Tape must not outlive the parameters it
// references.
class Tape {
 public:
  Var constant(const Vector& value);
  // Leaf bound to a parameter. Repeated calls return the same Var.
  Var param(const Parameter& p);
  // Row r of a parameter matrix, as a column vector (embedding lookup).
  Var row(const Parameter& table, std::size_t r);

  Var matvec(Var w, Var x);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var sum(std::span<const Var> terms);
  Var relu(Var x);
  Var tanh(Var x);
  Var concat(std::span<const Var> parts);
  // Element-wise product with a constant (dropout masks).
  Var mul_const(Var x, const Vector& mask);
  Var scale(Var x, double factor);
  // out[d] = sources[winners[d]][d]
  Var gather(std::span<const Var> sources, std::span<const std::size_t> winners);
  // Scalar sum of squared entries.
  Var squared_norm(Var x);
  // Scalar -log softmax(logits)[gold]; the probability is clamped at 1e-12.
  Var softmax_cross_entropy(Var logits, std::size_t gold);

  std::span<const double> value(Var v) const;
  Vector vector_value(Var v) const;
  double scalar(Var v) const;
  std::size_t rows(Var v) const { return nodes_[v.index].rows; }
  std::size_t cols(Var v) const { return nodes_[v.index].cols; }
  std::size_t size() const { return nodes_.size(); }

 private:
  friend GradientMap backward(Tape& tape, Var loss);

  struct Node {
    std::size_t rows = 0;
    std::size_t cols = 1;
    std::vector<double> value;
    const Parameter* param = nullptr;
    bool requires_grad = false;
    std::vector<double> grad;
    std::function<void(Tape&, GradientMap&)> backward;
  };

  Var push(Node node);
  const double* data(std::size_t i) const;
  std::vector<double>& grad(std::size_t i) { return nodes_[i].grad; }
  bool needs(Var v) const { return nodes_[v.index].requires_grad; }
  void check_vector(Var v, const char* op) const;

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_nodes_;
};

// Reverse sweep from a scalar loss. Each recorded operation is visited once.
GradientMap backward(Tape& tape, Var loss);

}  // namespace tbcnn
