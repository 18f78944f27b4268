#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "tbcnn/corpus_io.hpp"
#include "tbcnn/rng.hpp"
#include "tbcnn/tape.hpp"
#include "tbcnn/tensor.hpp"
#include "tbcnn/tree.hpp"

namespace tbcnn {

// Depth-2 window over a binarized constituency tree: parent, left, right.
struct CWindowParams {
  Parameter parent{"conv.c.parent", Matrix()};
  Parameter left{"conv.c.left", Matrix()};
  Parameter right{"conv.c.right", Matrix()};
  Parameter bias{"conv.c.bias", Matrix(), false};

  static CWindowParams init(std::size_t n_e, std::size_t n_c, Rng& rng);
  std::size_t n_c() const { return parent.value.rows(); }
  std::vector<Parameter*> all();
};

// Depth-2 window over a dependency tree; child weights are chosen by the
// child's relation slot rather than its position.
struct DWindowParams {
  Parameter parent{"conv.d.parent", Matrix()};
  std::vector<Parameter> relation;  // one per inventory slot, SHARED last
  Parameter bias{"conv.d.bias", Matrix(), false};

  static DWindowParams init(std::size_t n_e, std::size_t n_c, std::size_t slots,
                            Rng& rng);
  std::size_t n_c() const { return parent.value.rows(); }
  std::vector<Parameter*> all();
};

// One feature vector per tree node, aligned with node indices.
using FeatureMap = std::vector<Vector>;

struct DepChild {
  const Vector* vector;
  std::string_view relation;
};

// A null child pointer stands for an absent child (zero vector).
Vector conv_window_c(const Vector& p, const Vector* cl, const Vector* cr,
                     const CWindowParams& params);
Vector conv_window_d(const Vector& p, std::span<const DepChild> children,
                     const DWindowParams& params, const DepTypeInventory& inventory);

FeatureMap convolve(const ParseTree& tree, std::span<const Vector> node_vectors,
                    const CWindowParams& params);
FeatureMap convolve(const ParseTree& tree, std::span<const Vector> node_vectors,
                    const DWindowParams& params, const DepTypeInventory& inventory);

// Same windows recorded on a tape for back-propagation.
std::vector<Var> convolve(Tape& tape, const ParseTree& tree, std::span<const Var> inputs,
                          const CWindowParams& params);
std::vector<Var> convolve(Tape& tape, const ParseTree& tree, std::span<const Var> inputs,
                          const DWindowParams& params, const DepTypeInventory& inventory);

}  // namespace tbcnn
