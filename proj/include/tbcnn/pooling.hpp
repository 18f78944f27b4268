#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "tbcnn/tensor.hpp"
#include "tbcnn/tree.hpp"
#include "tbcnn/tree_conv.hpp"

namespace tbcnn {

enum class PoolingStrategy { kGlobal, kThreeSlot, kKSlot };

// Slot ids used by three-slot pooling.
enum ThreeSlot : std::size_t { kTop = 0, kLowerLeft = 1, kLowerRight = 2 };

inline constexpr double kDefaultAlpha = 0.6;

struct SlotAssignment {
  PoolingStrategy strategy = PoolingStrategy::kGlobal;
  std::vector<std::size_t> slot_of_node;
  std::size_t slot_count = 1;
  double alpha = kDefaultAlpha;
  std::size_t k = 1;
};

using PooledVector = std::vector<Vector>;
// [slot][dimension] -> winning node; empty slots have no winners.
using PoolProvenance = std::vector<std::vector<std::optional<std::size_t>>>;

struct PoolResult {
  PooledVector pooled;
  PoolProvenance provenance;
};

SlotAssignment assign_global(const ParseTree& tree);

// Nodes shallower than alpha * d go to TOP; deeper nodes split by which child
// subtree of the root they sit in. The root is always TOP.
SlotAssignment assign_three_slot(const ParseTree& tree, double alpha = kDefaultAlpha);

// Word i goes to the lowest slot j with i <= j * n / k. When allow_empty is
// false, k > n is a contract error; otherwise trailing slots stay empty.
SlotAssignment assign_k_slot(const ParseTree& tree, std::size_t k,
                             bool allow_empty = false);

SlotAssignment assign_slots(const ParseTree& tree, PoolingStrategy strategy,
                            std::size_t k, double alpha, bool allow_empty = false);

// Dimension-wise max per slot; argmax ties go to the lowest node index and
// empty slots pool to zeros.
PoolResult pool(const FeatureMap& features, const SlotAssignment& assignment);

// Concatenated slots, slot 0 first.
Vector flatten(const PooledVector& pooled);

}  // namespace tbcnn
