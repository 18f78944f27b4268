#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "tbcnn/pooling.hpp"
#include "tbcnn/tree.hpp"

namespace tbcnn {

// Share of pooled dimensions won by each node, kept as integer counts so the
// fractions sum to exactly one.
struct NodeFractionMap {
  std::vector<std::size_t> wins;
  // Credited (slot, dimension) pairs; empty slots credit nobody.
  std::size_t total = 0;

  double fraction(std::size_t node) const;
  std::vector<double> fractions() const;
  std::size_t size() const { return wins.size(); }
};

NodeFractionMap fractions(const PoolProvenance& provenance, const ParseTree& tree);

// Text shown for a node: its word, or the words it spans for an inner
// constituency node.
std::string node_text(const ParseTree& tree, std::size_t node);

// Graph nodes are labeled "text (0.24)" and filled with a saturation equal to
// the fraction; dependency edges carry their relation.
std::string emit_dot(const ParseTree& tree, const NodeFractionMap& fractions);

// Nested objects: id, text, word, category, relation, wins, fraction,
// children; plus kind, total and root at the top level.
std::string emit_json(const ParseTree& tree, const NodeFractionMap& fractions);

// Recovers the fraction map from emit_json output.
NodeFractionMap read_fraction_json(std::string_view text);

}  // namespace tbcnn
