#include "tbcnn/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "tbcnn/error.hpp"

namespace tbcnn {

namespace {

std::string shape_of(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ShapeError("matrix " + std::to_string(rows) + "x" +
                     std::to_string(cols) + " given " +
                     std::to_string(data_.size()) + " entries");
  }
}

Matrix Matrix::uniform(std::size_t rows, std::size_t cols, double bound,
                       Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.data_) v = tbcnn::uniform(rng, -bound, bound);
  return m;
}

Matrix Matrix::glorot(std::size_t rows, std::size_t cols, Rng& rng) {
  return uniform(rows, cols,
                 std::sqrt(6.0 / static_cast<double>(rows + cols)), rng);
}

Vector Matrix::as_vector() const {
  if (cols_ != 1) throw ShapeError("as_vector on " + shape_of(*this));
  return Vector(data_);
}

Vector matvec(const Matrix& w, const Vector& x) {
  if (w.cols() != x.dim()) {
    throw ShapeError("matvec: matrix " + shape_of(w) + " times vector of dim " +
                     std::to_string(x.dim()));
  }
  Vector out(w.rows());
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const auto row = w.row(r);
    double acc = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) acc += row[c] * x[c];
    out[r] = acc;
  }
  return out;
}

Vector relu(const Vector& x) {
  Vector out(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
  return out;
}

Vector elementwise_tanh(const Vector& x) {
  Vector out(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) out[i] = std::tanh(x[i]);
  return out;
}

Vector softmax(const Vector& logits) {
  if (logits.dim() == 0) throw ShapeError("softmax of an empty vector");
  const auto values = logits.data();
  const double peak = *std::max_element(values.begin(), values.end());
  Vector out(logits.dim());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.dim(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    total += out[i];
  }
  for (std::size_t i = 0; i < out.dim(); ++i) out[i] /= total;
  return out;
}

Vector concat(std::span<const Vector> parts) {
  std::vector<double> data;
  for (const auto& p : parts) {
    data.insert(data.end(), p.values().begin(), p.values().end());
  }
  return Vector(std::move(data));
}

void add_in_place(Vector& acc, std::span<const double> x) {
  if (acc.dim() != x.size()) {
    throw ShapeError("add: dims " + std::to_string(acc.dim()) + " and " +
                     std::to_string(x.size()));
  }
  for (std::size_t i = 0; i < x.size(); ++i) acc[i] += x[i];
}

void add_in_place(Vector& acc, const Vector& x) { add_in_place(acc, x.data()); }

}  // namespace tbcnn
