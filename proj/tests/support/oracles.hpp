#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "tbcnn/corpus_io.hpp"
#include "tbcnn/tree.hpp"
#include "tbcnn/tree_conv.hpp"

namespace tbcnn::testing {

// Reference implementations written with plain loops over raw storage, kept
// independent of the library code they check.

std::vector<std::vector<double>> naive_convolve_c(const ParseTree& tree,
                                                  const std::vector<Vector>& inputs,
                                                  const CWindowParams& params);
std::vector<std::vector<double>> naive_convolve_d(const ParseTree& tree,
                                                  const std::vector<Vector>& inputs,
                                                  const DWindowParams& params,
                                                  const DepTypeInventory& inventory);

struct NaivePool {
  std::vector<std::vector<double>> values;  // [slot][dim]
  std::vector<std::vector<std::optional<std::size_t>>> winners;
};
NaivePool naive_pool(const std::vector<Vector>& features, const std::vector<std::size_t>& slots,
                     std::size_t slot_count);

// Slot j (0-based) holds positions in ((j) n / k, (j + 1) n / k].
std::vector<std::size_t> naive_k_slot(const ParseTree& tree, std::size_t k);
std::vector<std::size_t> naive_three_slot(const ParseTree& tree, double alpha);

double central_difference(const std::function<double()>& f, double& x, double eps);

}  // namespace tbcnn::testing
