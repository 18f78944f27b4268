#include "tbcnn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tbcnn/error.hpp"

namespace tbcnn {

Matrix& GradientMap::accumulator(const Parameter& p) {
  auto it = grads_.find(&p);
  if (it == grads_.end()) {
    it = grads_.emplace(&p, Matrix(p.value.rows(), p.value.cols())).first;
  }
  return it->second;
}

const Matrix* GradientMap::find(const Parameter& p) const {
  const auto it = grads_.find(&p);
  return it == grads_.end() ? nullptr : &it->second;
}

Matrix GradientMap::get(const Parameter& p) const {
  if (const Matrix* g = find(p)) return *g;
  return Matrix(p.value.rows(), p.value.cols());
}

void GradientMap::add(const GradientMap& other) {
  for (const auto& [param, g] : other.grads_) {
    auto acc = accumulator(*param).data();
    const auto src = g.data();
    for (std::size_t i = 0; i < src.size(); ++i) acc[i] += src[i];
  }
}

void GradientMap::scale(double factor) {
  for (auto& [param, g] : grads_) {
    for (double& v : g.data()) v *= factor;
  }
}

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{nodes_.size() - 1};
}

const double* Tape::data(std::size_t i) const {
  const Node& n = nodes_[i];
  return n.param != nullptr ? n.param->value.data().data() : n.value.data();
}

std::span<const double> Tape::value(Var v) const {
  const Node& n = nodes_[v.index];
  return {data(v.index), n.rows * n.cols};
}

Vector Tape::vector_value(Var v) const {
  const auto s = value(v);
  return Vector(std::vector<double>(s.begin(), s.end()));
}

double Tape::scalar(Var v) const {
  if (rows(v) != 1 || cols(v) != 1) {
    throw ContractError("tape value is not a scalar");
  }
  return value(v)[0];
}

void Tape::check_vector(Var v, const char* op) const {
  if (cols(v) != 1) {
    throw ShapeError(std::string(op) + ": operand is a " +
                     std::to_string(rows(v)) + "x" + std::to_string(cols(v)) +
                     " matrix, expected a vector");
  }
}

Var Tape::constant(const Vector& value) {
  Node n;
  n.rows = value.dim();
  n.value = value.values();
  return push(std::move(n));
}

Var Tape::param(const Parameter& p) {
  if (const auto it = param_nodes_.find(&p); it != param_nodes_.end()) {
    return Var{it->second};
  }
  Node n;
  n.rows = p.value.rows();
  n.cols = p.value.cols();
  n.param = &p;
  n.requires_grad = true;
  const Var v = push(std::move(n));
  param_nodes_.emplace(&p, v.index);
  return v;
}

Var Tape::row(const Parameter& table, std::size_t r) {
  if (r >= table.value.rows()) {
    throw ShapeError("row " + std::to_string(r) + " out of range for " +
                     table.name);
  }
  Node n;
  n.rows = table.value.cols();
  const auto src = table.value.row(r);
  n.value.assign(src.begin(), src.end());
  n.requires_grad = true;
  const std::size_t self = nodes_.size();
  const Parameter* tp = &table;
  n.backward = [self, tp, r](Tape& t, GradientMap& gm) {
    auto dst = gm.accumulator(*tp).row(r);
    const auto& g = t.grad(self);
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
  };
  return push(std::move(n));
}

Var Tape::matvec(Var w, Var x) {
  check_vector(x, "matvec");
  const std::size_t R = rows(w);
  const std::size_t C = cols(w);
  if (C != rows(x)) {
    throw ShapeError("matvec: matrix " + std::to_string(R) + "x" +
                     std::to_string(C) + " times vector of dim " +
                     std::to_string(rows(x)));
  }
  Node n;
  n.rows = R;
  n.value.assign(R, 0.0);
  const double* W = data(w.index);
  const double* X = data(x.index);
  for (std::size_t r = 0; r < R; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < C; ++c) acc += W[r * C + c] * X[c];
    n.value[r] = acc;
  }
  n.requires_grad = needs(w) || needs(x);
  const std::size_t self = nodes_.size();
  n.backward = [self, w, x, R, C](Tape& t, GradientMap&) {
    const auto& g = t.grad(self);
    const double* W = t.data(w.index);
    const double* X = t.data(x.index);
    if (t.needs(w)) {
      auto& gw = t.grad(w.index);
      for (std::size_t r = 0; r < R; ++r) {
        if (g[r] == 0.0) continue;
        for (std::size_t c = 0; c < C; ++c) gw[r * C + c] += g[r] * X[c];
      }
    }
    if (t.needs(x)) {
      auto& gx = t.grad(x.index);
      for (std::size_t r = 0; r < R; ++r) {
        if (g[r] == 0.0) continue;
        for (std::size_t c = 0; c < C; ++c) gx[c] += W[r * C + c] * g[r];
      }
    }
  };
  return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
  const Var terms[] = {a, b};
  return sum(terms);
}

Var Tape::sub(Var a, Var b) {
  check_vector(a, "sub");
  check_vector(b, "sub");
  if (rows(a) != rows(b)) {
    throw ShapeError("sub: dims " + std::to_string(rows(a)) + " and " +
                     std::to_string(rows(b)));
  }
  Node n;
  n.rows = rows(a);
  n.value.resize(n.rows);
  const double* A = data(a.index);
  const double* B = data(b.index);
  for (std::size_t i = 0; i < n.rows; ++i) n.value[i] = A[i] - B[i];
  n.requires_grad = needs(a) || needs(b);
  const std::size_t self = nodes_.size();
  n.backward = [self, a, b](Tape& t, GradientMap&) {
    const auto& g = t.grad(self);
    if (t.needs(a)) {
      auto& ga = t.grad(a.index);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (t.needs(b)) {
      auto& gb = t.grad(b.index);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  };
  return push(std::move(n));
}

Var Tape::sum(std::span<const Var> terms) {
  if (terms.empty()) throw ContractError("sum of zero terms");
  const std::size_t R = rows(terms[0]);
  const std::size_t C = cols(terms[0]);
  Node n;
  n.rows = R;
  n.cols = C;
  n.value.assign(R * C, 0.0);
  for (const Var v : terms) {
    if (rows(v) != R || cols(v) != C) {
      throw ShapeError("sum: mismatched operand shapes " + std::to_string(R) +
                       "x" + std::to_string(C) + " and " +
                       std::to_string(rows(v)) + "x" + std::to_string(cols(v)));
    }
    const double* V = data(v.index);
    for (std::size_t i = 0; i < R * C; ++i) n.value[i] += V[i];
    n.requires_grad = n.requires_grad || needs(v);
  }
  const std::size_t self = nodes_.size();
  n.backward = [self, operands = std::vector<Var>(terms.begin(), terms.end())](
                   Tape& t, GradientMap&) {
    const auto& g = t.grad(self);
    for (const Var v : operands) {
      if (!t.needs(v)) continue;
      auto& gv = t.grad(v.index);
      for (std::size_t i = 0; i < g.size(); ++i) gv[i] += g[i];
    }
  };
  return push(std::move(n));
}

Var Tape::relu(Var x) {
  check_vector(x, "relu");
  Node n;
  n.rows = rows(x);
  n.value.resize(n.rows);
  const double* X = data(x.index);
  for (std::size_t i = 0; i < n.rows; ++i) n.value[i] = X[i] > 0.0 ? X[i] : 0.0;
  n.requires_grad = needs(x);
  const std::size_t self = nodes_.size();
  n.backward = [self, x](Tape& t, GradientMap&) {
    const auto& g = t.grad(self);
    const double* X = t.data(x.index);
    auto& gx = t.grad(x.index);
    // Subgradient at exactly 0 is 0.
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (X[i] > 0.0) gx[i] += g[i];
    }
  };
  return push(std::move(n));
}

Var Tape::tanh(Var x) {
  check_vector(x, "tanh");
  Node n;
  n.rows = rows(x);
  n.value.resize(n.rows);
  const double* X = data(x.index);
  for (std::size_t i = 0; i < n.rows; ++i) n.value[i] = std::tanh(X[i]);
  n.requires_grad = needs(x);
  const std::size_t self = nodes_.size();
  n.backward = [self, x](Tape& t, GradientMap&) {
    const auto& g = t.grad(self);
    const double* Y = t.data(self);
    auto& gx = t.grad(x.index);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * (1.0 - Y[i] * Y[i]);
  };
  return push(std::move(n));
}

Var Tape::concat(std::span<const Var> parts) {
  Node n;
  std::vector<std::size_t> offsets;
  for (const Var v : parts) {
    check_vector(v, "concat");
    offsets.push_back(n.value.size());
    const auto s = value(v);
    n.value.insert(n.value.end(), s.begin(), s.end());
    n.requires_grad = n.requires_grad || needs(v);
  }
  n.rows = n.value.size();
  const std::size_t self = nodes_.size();
  n.backward = [self, operands = std::vector<Var>(parts.begin(), parts.end()),
                offsets = std::move(offsets)](Tape& t, GradientMap&) {
    const auto& g = t.grad(self);
    for (std::size_t k = 0; k < operands.size(); ++k) {
      if (!t.needs(operands[k])) continue;
      auto& gv = t.grad(operands[k].index);
      for (std::size_t i = 0; i < gv.size(); ++i) gv[i] += g[offsets[k] + i];
    }
  };
  return push(std::move(n));
}

Var Tape::mul_const(Var x, const Vector& mask) {
  check_vector(x, "mul_const");
  if (mask.dim() != rows(x)) {
    throw ShapeError("mul_const: mask dim " + std::to_string(mask.dim()) +
                     " vs operand dim " + std::to_string(rows(x)));
  }
  Node n;
  n.rows = rows(x);
  n.value.resize(n.rows);
  const double* X = data(x.index);
  for (std::size_t i = 0; i < n.rows; ++i) n.value[i] = X[i] * mask[i];
  n.requires_grad = needs(x);
  const std::size_t self = nodes_.size();
  n.backward = [self, x, mask](Tape& t, GradientMap&) {
    const auto& g = t.grad(self);
    auto& gx = t.grad(x.index);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * mask[i];
  };
  return push(std::move(n));
}

Var Tape::scale(Var x, double factor) {
  Node n;
  n.rows = rows(x);
  n.cols = cols(x);
  const auto s = value(x);
  n.value.resize(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) n.value[i] = s[i] * factor;
  n.requires_grad = needs(x);
  const std::size_t self = nodes_.size();
  n.backward = [self, x, factor](Tape& t, GradientMap&) {
    const auto& g = t.grad(self);
    auto& gx = t.grad(x.index);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * factor;
  };
  return push(std::move(n));
}

Var Tape::gather(std::span<const Var> sources,
                 std::span<const std::size_t> winners) {
  if (sources.empty()) throw ContractError("gather from zero sources");
  const std::size_t dim = winners.size();
  for (const Var v : sources) {
    check_vector(v, "gather");
    if (rows(v) != dim) {
      throw ShapeError("gather: source dim " + std::to_string(rows(v)) +
                       " vs " + std::to_string(dim) + " winners");
    }
  }
  Node n;
  n.rows = dim;
  n.value.resize(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    if (winners[d] >= sources.size()) {
      throw ContractError("gather: winner index out of range");
    }
    const Var src = sources[winners[d]];
    n.value[d] = data(src.index)[d];
    n.requires_grad = n.requires_grad || needs(src);
  }
  const std::size_t self = nodes_.size();
  n.backward = [self, operands = std::vector<Var>(sources.begin(), sources.end()),
                picks = std::vector<std::size_t>(winners.begin(), winners.end())](
                   Tape& t, GradientMap&) {
    const auto& g = t.grad(self);
    for (std::size_t d = 0; d < picks.size(); ++d) {
      const Var src = operands[picks[d]];
      if (t.needs(src)) t.grad(src.index)[d] += g[d];
    }
  };
  return push(std::move(n));
}

Var Tape::squared_norm(Var x) {
  Node n;
  n.rows = 1;
  double acc = 0.0;
  for (const double v : value(x)) acc += v * v;
  n.value = {acc};
  n.requires_grad = needs(x);
  const std::size_t self = nodes_.size();
  n.backward = [self, x](Tape& t, GradientMap&) {
    const double g = t.grad(self)[0];
    const auto s = t.value(x);
    auto& gx = t.grad(x.index);
    for (std::size_t i = 0; i < s.size(); ++i) gx[i] += 2.0 * s[i] * g;
  };
  return push(std::move(n));
}

Var Tape::softmax_cross_entropy(Var logits, std::size_t gold) {
  check_vector(logits, "softmax_cross_entropy");
  if (gold >= rows(logits)) {
    throw ContractError("gold class " + std::to_string(gold) +
                        " out of range for " + std::to_string(rows(logits)) +
                        " logits");
  }
  Vector probs = softmax(vector_value(logits));
  Node n;
  n.rows = 1;
  n.value = {-std::log(std::max(probs[gold], 1e-12))};
  n.requires_grad = needs(logits);
  const std::size_t self = nodes_.size();
  n.backward = [self, logits, gold, probs = std::move(probs)](Tape& t,
                                                              GradientMap&) {
    const double g = t.grad(self)[0];
    auto& gl = t.grad(logits.index);
    for (std::size_t i = 0; i < probs.dim(); ++i) {
      gl[i] += g * (probs[i] - (i == gold ? 1.0 : 0.0));
    }
  };
  return push(std::move(n));
}

GradientMap backward(Tape& tape, Var loss) {
  if (loss.index >= tape.nodes_.size()) {
    throw ContractError("loss is not recorded on this tape");
  }
  if (tape.rows(loss) != 1 || tape.cols(loss) != 1) {
    throw ContractError("backward: loss must be a scalar, got " +
                        std::to_string(tape.rows(loss)) + "x" +
                        std::to_string(tape.cols(loss)));
  }
  GradientMap grads;
  for (std::size_t i = 0; i <= loss.index; ++i) {
    auto& n = tape.nodes_[i];
    n.grad.assign(n.requires_grad ? n.rows * n.cols : 0, 0.0);
  }
  if (!tape.nodes_[loss.index].requires_grad) return grads;
  tape.nodes_[loss.index].grad[0] = 1.0;
  for (std::size_t i = loss.index + 1; i-- > 0;) {
    auto& n = tape.nodes_[i];
    if (n.requires_grad && n.backward) n.backward(tape, grads);
  }
  for (std::size_t i = 0; i <= loss.index; ++i) {
    const auto& n = tape.nodes_[i];
    if (n.param == nullptr) continue;
    auto acc = grads.accumulator(*n.param).data();
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += n.grad[k];
  }
  return grads;
}

}  // namespace tbcnn
