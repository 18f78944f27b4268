#include "tbcnn/pooling.hpp"

#include "tbcnn/error.hpp"

namespace tbcnn {

SlotAssignment assign_global(const ParseTree& tree) {
  SlotAssignment a;
  a.strategy = PoolingStrategy::kGlobal;
  a.slot_of_node.assign(tree.size(), 0);
  a.slot_count = 1;
  return a;
}

SlotAssignment assign_three_slot(const ParseTree& tree, double alpha) {
  if (tree.kind != TreeKind::kConstituency) {
    throw ContractError("three-slot pooling needs a constituency tree");
  }
  SlotAssignment a;
  a.strategy = PoolingStrategy::kThreeSlot;
  a.alpha = alpha;
  a.slot_count = 3;
  a.slot_of_node.assign(tree.size(), kTop);
  const double threshold = alpha * static_cast<double>(tree.max_depth());
  const auto& root_kids = tree.nodes[tree.root].children;
  // Walk each root subtree, tagging deep nodes with that side.
  for (std::size_t side = 0; side < root_kids.size() && side < 2; ++side) {
    const std::size_t slot = side == 0 ? kLowerLeft : kLowerRight;
    std::vector<std::size_t> stack{root_kids[side]};
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      const auto& node = tree.nodes[i];
      if (!(static_cast<double>(node.depth) < threshold)) a.slot_of_node[i] = slot;
      for (const std::size_t c : node.children) stack.push_back(c);
    }
  }
  return a;
}

SlotAssignment assign_k_slot(const ParseTree& tree, std::size_t k, bool allow_empty) {
  if (tree.kind != TreeKind::kDependency) {
    throw ContractError("k-slot pooling needs a dependency tree");
  }
  const std::size_t n = tree.size();
  if (k == 0) throw ContractError("k-slot pooling needs k >= 1");
  if (k > n && !allow_empty) {
    throw ContractError("k-slot pooling with k = " + std::to_string(k) +
                        " exceeds sentence length " + std::to_string(n));
  }
  SlotAssignment a;
  a.strategy = PoolingStrategy::kKSlot;
  a.k = k;
  a.slot_count = k;
  a.slot_of_node.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t pos = tree.nodes[i].position;
    // Smallest j with pos <= j * n / k, i.e. ceil(pos * k / n); 1-based.
    const std::size_t j = (pos * k + n - 1) / n;
    a.slot_of_node[i] = j - 1;
  }
  return a;
}

SlotAssignment assign_slots(const ParseTree& tree, PoolingStrategy strategy,
                            std::size_t k, double alpha, bool allow_empty) {
  switch (strategy) {
    case PoolingStrategy::kGlobal:
      return assign_global(tree);
    case PoolingStrategy::kThreeSlot:
      return assign_three_slot(tree, alpha);
    case PoolingStrategy::kKSlot:
      return assign_k_slot(tree, k, allow_empty);
  }
  throw ContractError("unknown pooling strategy");
}

PoolResult pool(const FeatureMap& features, const SlotAssignment& assignment) {
  if (assignment.slot_of_node.size() != features.size()) {
    throw ShapeError("pool: assignment covers " +
                     std::to_string(assignment.slot_of_node.size()) + " nodes, feature map " +
                     std::to_string(features.size()));
  }
  if (features.empty()) throw ContractError("pool: empty feature map");
  const std::size_t dim = features.front().dim();
  PoolResult r;
  r.pooled.assign(assignment.slot_count, Vector(dim));
  r.provenance.assign(assignment.slot_count,
                      std::vector<std::optional<std::size_t>>(dim));
  for (std::size_t node = 0; node < features.size(); ++node) {
    const Vector& f = features[node];
    if (f.dim() != dim) throw ShapeError("pool: ragged feature map");
    const std::size_t s = assignment.slot_of_node[node];
    auto& winners = r.provenance[s];
    for (std::size_t d = 0; d < dim; ++d) {
      // Strict > keeps the lowest index on ties.
      if (!winners[d] || f[d] > r.pooled[s][d]) {
        winners[d] = node;
        r.pooled[s][d] = f[d];
      }
    }
  }
  return r;
}

Vector flatten(const PooledVector& pooled) { return concat(pooled); }

}  // namespace tbcnn
