#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "tbcnn/rng.hpp"

namespace tbcnn {

class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t dim, double fill = 0.0) : data_(dim, fill) {}
  Vector(std::initializer_list<double> values) : data_(values) {}
  explicit Vector(std::vector<double> values) : data_(std::move(values)) {}

  std::size_t dim() const { return data_.size(); }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  bool operator==(const Vector&) const = default;

 private:
  std::vector<double> data_;
};

// Dense row-major matrix of 64-bit floats.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  // Entries drawn uniformly from [-bound, bound].
  static Matrix uniform(std::size_t rows, std::size_t cols, double bound,
                        Rng& rng);
  // Variance-preserving init: bound = sqrt(6 / (fan_in + fan_out)).
  static Matrix glorot(std::size_t rows, std::size_t cols, Rng& rng);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  // Copies an n x 1 matrix into a Vector.
  Vector as_vector() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// A named trainable array. Biases are stored as n x 1 matrices.
struct Parameter {
  std::string name;
  Matrix value;
  // Participates in the l2 penalty (weight matrices only).
  bool regularized = true;
};

Vector matvec(const Matrix& w, const Vector& x);
Vector relu(const Vector& x);
Vector elementwise_tanh(const Vector& x);
// Max-subtracted softmax.
Vector softmax(const Vector& logits);
Vector concat(std::span<const Vector> parts);

void add_in_place(Vector& acc, const Vector& x);
void add_in_place(Vector& acc, std::span<const double> x);

}  // namespace tbcnn
