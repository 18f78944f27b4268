#include <cmath>
#include <functional>
#include <gtest/gtest.h>

#include "support/oracles.hpp"
#include "tbcnn/error.hpp"
#include "tbcnn/tape.hpp"

namespace tbcnn {
namespace {

using testing::central_difference;

Parameter random_param(const char* name, std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  return {name, Matrix::uniform(rows, cols, 1.0, rng)};
}

// Compares backward() against central differences for every entry of every
// parameter.
void expect_gradients(std::vector<Parameter*> params, const std::function<Var(Tape&)>& build) {
  Tape tape;
  const Var loss = build(tape);
  const GradientMap grads = backward(tape, loss);
  const auto f = [&] {
    Tape t;
    return t.scalar(build(t));
  };
  for (Parameter* p : params) {
    const Matrix analytic = grads.get(*p);
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double numeric = central_difference(f, p->value.data()[i], 1e-6);
      EXPECT_NEAR(analytic.data()[i], numeric, 1e-7) << p->name << "[" << i << "]";
    }
  }
}

TEST(Tape, MatvecAddTanhChain) {
  Parameter w = random_param("w", 3, 4, 1);
  Parameter b = random_param("b", 3, 1, 2);
  const Vector x{0.3, -0.2, 0.9, 0.1};
  expect_gradients({&w, &b}, [&](Tape& t) {
    const Var h = t.tanh(t.add(t.matvec(t.param(w), t.constant(x)), t.param(b)));
    return t.squared_norm(h);
  });
}

TEST(Tape, ReluSubAndScale) {
  Parameter w = random_param("w", 5, 2, 3);
  const Vector x{1.0, -0.5};
  const Vector shift{0.1, 0.2, -0.1, 0.0, 0.3};
  expect_gradients({&w}, [&](Tape& t) {
    const Var h = t.relu(t.sub(t.matvec(t.param(w), t.constant(x)), t.constant(shift)));
    return t.scale(t.squared_norm(h), 0.5);
  });
}

TEST(Tape, RowGatherConcatAndCrossEntropy) {
  Parameter table = random_param("table", 4, 3, 4);
  Parameter out = random_param("out", 2, 6, 5);
  expect_gradients({&table, &out}, [&](Tape& t) {
    const std::vector<Var> rows{t.row(table, 0), t.row(table, 2), t.row(table, 3)};
    const std::vector<std::size_t> winners{1, 0, 2};
    const Var g = t.gather(rows, winners);
    const std::vector<Var> parts{g, t.row(table, 1)};
    const Var joined = t.concat(parts);
    const Vector mask{2.0, 0.0, 2.0, 2.0, 0.0, 2.0};
    return t.softmax_cross_entropy(t.matvec(t.param(out), t.mul_const(joined, mask)), 1);
  });
}

TEST(Tape, SumOfTermsAndParameterReuse) {
  Parameter w = random_param("w", 2, 2, 6);
  expect_gradients({&w}, [&](Tape& t) {
    const Var x = t.constant(Vector{0.4, -0.7});
    const Var h1 = t.matvec(t.param(w), x);
    const Var h2 = t.matvec(t.param(w), t.tanh(h1));
    const std::vector<Var> terms{t.squared_norm(h1), t.squared_norm(h2), t.squared_norm(x)};
    return t.sum(terms);
  });
}

TEST(Tape, ParamReturnsSameVar) {
  Parameter w = random_param("w", 2, 2, 7);
  Tape t;
  EXPECT_EQ(t.param(w).index, t.param(w).index);
}

TEST(Tape, UnreachedParameterHasExactZeroGradient) {
  Parameter used = random_param("used", 1, 2, 8);
  Parameter unused = random_param("unused", 3, 3, 9);
  Tape t;
  t.param(unused);
  const Var loss = t.squared_norm(t.matvec(t.param(used), t.constant(Vector{1, 1})));
  const GradientMap g = backward(t, loss);
  const Matrix grad = g.get(unused);
  for (const double v : grad.data()) EXPECT_EQ(v, 0.0);
}

TEST(Tape, ReluGradientIsZeroAtZero) {
  Parameter p{"p", Matrix(1, 1, 0.0)};
  Tape t;
  const Var bias = t.row(p, 0);
  const Var loss = t.squared_norm(t.add(t.relu(bias), t.constant(Vector{1.0})));
  const GradientMap g = backward(t, loss);
  EXPECT_EQ(g.get(p).data()[0], 0.0);
}

TEST(Tape, CrossEntropyClampsTinyProbabilities) {
  Tape t;
  const Var loss = t.softmax_cross_entropy(t.constant(Vector{0.0, 2000.0}), 0);
  EXPECT_NEAR(t.scalar(loss), -std::log(1e-12), 1e-9);
}

TEST(Tape, ShapeErrorsAreReported) {
  Tape t;
  const Var a = t.constant(Vector{1, 2});
  const Var b = t.constant(Vector{1, 2, 3});
  EXPECT_THROW(t.add(a, b), ShapeError);
  EXPECT_THROW(t.softmax_cross_entropy(a, 2), ContractError);
}

TEST(GradientMap, AddAndScale) {
  Parameter p{"p", Matrix(1, 2)};
  GradientMap a, b;
  a.accumulator(p).data()[0] = 1.0;
  b.accumulator(p).data()[1] = 4.0;
  a.add(b);
  a.scale(0.5);
  EXPECT_EQ(a.get(p), Matrix(1, 2, {0.5, 2.0}));
}

}  // namespace
}  // namespace tbcnn
