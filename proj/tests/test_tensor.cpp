#include <cmath>
#include <gtest/gtest.h>

#include "tbcnn/error.hpp"
#include "tbcnn/tensor.hpp"

namespace tbcnn {
namespace {

TEST(Tensor, MatvecMatchesHandComputation) {
  const Matrix w(2, 3, {1, 2, 3, 4, 5, 6});
  const Vector x{1, -1, 2};
  const Vector y = matvec(w, x);
  EXPECT_EQ(y, (Vector{5, 11}));
}

TEST(Tensor, MatvecRejectsMismatchedShapes) {
  const Matrix w(2, 3);
  EXPECT_THROW(matvec(w, Vector(2)), ShapeError);
}

TEST(Tensor, MatrixRejectsWrongDataLength) {
  EXPECT_THROW(Matrix(2, 2, std::vector<double>{1, 2, 3}), ShapeError);
}

TEST(Tensor, ReluZeroesNegativesAndZero) {
  EXPECT_EQ(relu(Vector{-1, 0, 2.5}), (Vector{0, 0, 2.5}));
}

TEST(Tensor, SoftmaxIsStableForLargeLogits) {
  const Vector p = softmax(Vector{1000, 1000, 999});
  const double e = std::exp(-1.0);
  EXPECT_NEAR(p[0], 1.0 / (2.0 + e), 1e-15);
  EXPECT_NEAR(p[2], e / (2.0 + e), 1e-15);
  EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-15);
}

TEST(Tensor, ConcatPreservesOrder) {
  const std::vector<Vector> parts{Vector{1, 2}, Vector{}, Vector{3}};
  EXPECT_EQ(concat(parts), (Vector{1, 2, 3}));
}

TEST(Tensor, AddInPlaceChecksDimension) {
  Vector acc{1, 1};
  add_in_place(acc, Vector{2, 3});
  EXPECT_EQ(acc, (Vector{3, 4}));
  EXPECT_THROW(add_in_place(acc, Vector{1}), ShapeError);
}

TEST(Tensor, GlorotStaysWithinBound) {
  Rng rng(3);
  const Matrix m = Matrix::glorot(30, 20, rng);
  const double bound = std::sqrt(6.0 / 50.0);
  double lo = 0.0, hi = 0.0;
  for (const double v : m.data()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  EXPECT_LE(hi, bound);
  EXPECT_GE(lo, -bound);
  EXPECT_GT(hi, 0.8 * bound);
}

TEST(Tensor, SeededInitIsReproducible) {
  Rng a(9), b(9);
  EXPECT_EQ(Matrix::uniform(4, 4, 0.5, a), Matrix::uniform(4, 4, 0.5, b));
}

TEST(Rng, UniformIndexCoversRange) {
  Rng rng(1);
  std::vector<int> seen(7, 0);
  for (int i = 0; i < 700; ++i) ++seen[uniform_index(rng, 7)];
  for (const int c : seen) EXPECT_GT(c, 50);
}

TEST(Rng, ShuffleIsAPermutation) {
  Rng rng(5);
  std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7};
  shuffle(std::span<int>(v), rng);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, (std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7}));
}

}  // namespace
}  // namespace tbcnn
