#include "support/oracles.hpp"

#include <algorithm>

namespace tbcnn::testing {

namespace {

void accumulate(std::vector<double>& z, const Matrix& w, const Vector& x) {
  const double* raw = w.data().data();
  for (std::size_t r = 0; r < w.rows(); ++r) {
    for (std::size_t c = 0; c < w.cols(); ++c) z[r] += raw[r * w.cols() + c] * x[c];
  }
}

void rectify(std::vector<double>& z, const Matrix& bias) {
  for (std::size_t r = 0; r < z.size(); ++r) {
    z[r] += bias.data()[r];
    if (z[r] < 0.0) z[r] = 0.0;
  }
}

std::size_t depth_of(const ParseTree& tree, std::size_t node) {
  std::size_t d = 1;
  while (tree.nodes[node].parent) {
    node = *tree.nodes[node].parent;
    ++d;
  }
  return d;
}

}  // namespace

std::vector<std::vector<double>> naive_convolve_c(const ParseTree& tree,
                                                  const std::vector<Vector>& inputs,
                                                  const CWindowParams& params) {
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    std::vector<double> z(params.parent.value.rows(), 0.0);
    accumulate(z, params.parent.value, inputs[i]);
    const auto& kids = tree.nodes[i].children;
    if (kids.size() >= 1) accumulate(z, params.left.value, inputs[kids[0]]);
    if (kids.size() == 2) accumulate(z, params.right.value, inputs[kids[1]]);
    rectify(z, params.bias.value);
    out.push_back(z);
  }
  return out;
}

std::vector<std::vector<double>> naive_convolve_d(const ParseTree& tree,
                                                  const std::vector<Vector>& inputs,
                                                  const DWindowParams& params,
                                                  const DepTypeInventory& inventory) {
  const auto& names = inventory.dedicated();
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    std::vector<double> z(params.parent.value.rows(), 0.0);
    accumulate(z, params.parent.value, inputs[i]);
    for (std::size_t c = 0; c < tree.nodes.size(); ++c) {
      if (tree.nodes[c].parent != i) continue;
      const auto it = std::find(names.begin(), names.end(), *tree.nodes[c].relation);
      const auto slot = static_cast<std::size_t>(it - names.begin());
      accumulate(z, params.relation[slot].value, inputs[c]);
    }
    rectify(z, params.bias.value);
    out.push_back(z);
  }
  return out;
}

NaivePool naive_pool(const std::vector<Vector>& features, const std::vector<std::size_t>& slots,
                     std::size_t slot_count) {
  const std::size_t dim = features.front().dim();
  NaivePool p;
  p.values.assign(slot_count, std::vector<double>(dim, 0.0));
  p.winners.assign(slot_count, std::vector<std::optional<std::size_t>>(dim));
  for (std::size_t s = 0; s < slot_count; ++s) {
    for (std::size_t d = 0; d < dim; ++d) {
      for (std::size_t n = 0; n < features.size(); ++n) {
        if (slots[n] != s) continue;
        if (!p.winners[s][d] || features[n][d] > p.values[s][d]) {
          p.values[s][d] = features[n][d];
          p.winners[s][d] = n;
        }
      }
    }
  }
  return p;
}

std::vector<std::size_t> naive_k_slot(const ParseTree& tree, std::size_t k) {
  const std::size_t n = tree.nodes.size();
  std::vector<std::size_t> out;
  for (const auto& node : tree.nodes) {
    std::size_t j = 0;
    while (!(node.position * k <= (j + 1) * n)) ++j;
    out.push_back(j);
  }
  return out;
}

std::vector<std::size_t> naive_three_slot(const ParseTree& tree, double alpha) {
  std::size_t max_depth = 0;
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    max_depth = std::max(max_depth, depth_of(tree, i));
  }
  std::vector<std::size_t> out;
  const auto& root_kids = tree.nodes[tree.root].children;
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    if (static_cast<double>(depth_of(tree, i)) < alpha * static_cast<double>(max_depth) ||
        i == tree.root) {
      out.push_back(0);
      continue;
    }
    std::size_t top = i;
    while (*tree.nodes[top].parent != tree.root) top = *tree.nodes[top].parent;
    out.push_back(top == root_kids[0] ? 1 : 2);
  }
  return out;
}

double central_difference(const std::function<double()>& f, double& x, double eps) {
  const double original = x;
  x = original + eps;
  const double plus = f();
  x = original - eps;
  const double minus = f();
  x = original;
  return (plus - minus) / (2.0 * eps);
}

}  // namespace tbcnn::testing
