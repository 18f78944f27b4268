#include "tbcnn/tree_conv.hpp"

#include <cstdio>

#include "tbcnn/error.hpp"

namespace tbcnn {

namespace {

void check_inputs(const ParseTree& tree, std::size_t count) {
  if (count != tree.size()) {
    throw ShapeError("convolve: " + std::to_string(count) + " node vectors for a " +
                     std::to_string(tree.size()) + "-node tree");
  }
}

void require(const ParseTree& tree, TreeKind kind) {
  if (tree.kind != kind) {
    throw ContractError(kind == TreeKind::kConstituency
                            ? "constituency window applied to a dependency tree"
                            : "dependency window applied to a constituency tree");
  }
}

void add_term(Vector& acc, const Matrix& w, const Vector& x) {
  add_in_place(acc, matvec(w, x));
}

std::string slot_name(std::size_t slot, std::size_t shared) {
  if (slot == shared) return "conv.d.rel.shared";
  char buf[32];
  std::snprintf(buf, sizeof buf, "conv.d.rel.%02zu", slot);
  return buf;
}

}  // namespace

CWindowParams CWindowParams::init(std::size_t n_e, std::size_t n_c, Rng& rng) {
  CWindowParams p;
  p.parent.value = Matrix::glorot(n_c, n_e, rng);
  p.left.value = Matrix::glorot(n_c, n_e, rng);
  p.right.value = Matrix::glorot(n_c, n_e, rng);
  p.bias.value = Matrix(n_c, 1);
  return p;
}

std::vector<Parameter*> CWindowParams::all() { return {&parent, &left, &right, &bias}; }

DWindowParams DWindowParams::init(std::size_t n_e, std::size_t n_c, std::size_t slots,
                                  Rng& rng) {
  DWindowParams p;
  p.parent.value = Matrix::glorot(n_c, n_e, rng);
  for (std::size_t s = 0; s < slots; ++s) {
    p.relation.push_back({slot_name(s, slots - 1), Matrix::glorot(n_c, n_e, rng)});
  }
  p.bias.value = Matrix(n_c, 1);
  return p;
}

std::vector<Parameter*> DWindowParams::all() {
  std::vector<Parameter*> out{&parent};
  for (auto& r : relation) out.push_back(&r);
  out.push_back(&bias);
  return out;
}

Vector conv_window_c(const Vector& p, const Vector* cl, const Vector* cr,
                     const CWindowParams& params) {
  Vector z = matvec(params.parent.value, p);
  if (cl != nullptr) add_term(z, params.left.value, *cl);
  if (cr != nullptr) add_term(z, params.right.value, *cr);
  add_in_place(z, params.bias.value.data());
  return relu(z);
}

Vector conv_window_d(const Vector& p, std::span<const DepChild> children,
                     const DWindowParams& params, const DepTypeInventory& inventory) {
  if (params.relation.size() != inventory.slot_count()) {
    throw ShapeError("dependency window has " + std::to_string(params.relation.size()) +
                     " relation matrices for " + std::to_string(inventory.slot_count()) +
                     " inventory slots");
  }
  Vector z = matvec(params.parent.value, p);
  for (const auto& child : children) {
    add_term(z, params.relation[inventory.slot_of(child.relation)].value, *child.vector);
  }
  add_in_place(z, params.bias.value.data());
  return relu(z);
}

FeatureMap convolve(const ParseTree& tree, std::span<const Vector> node_vectors,
                    const CWindowParams& params) {
  require(tree, TreeKind::kConstituency);
  check_inputs(tree, node_vectors.size());
  FeatureMap out(tree.size());
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const auto& kids = tree.nodes[i].children;
    const Vector* cl = kids.size() > 0 ? &node_vectors[kids[0]] : nullptr;
    const Vector* cr = kids.size() > 1 ? &node_vectors[kids[1]] : nullptr;
    out[i] = conv_window_c(node_vectors[i], cl, cr, params);
  }
  return out;
}

FeatureMap convolve(const ParseTree& tree, std::span<const Vector> node_vectors,
                    const DWindowParams& params, const DepTypeInventory& inventory) {
  require(tree, TreeKind::kDependency);
  check_inputs(tree, node_vectors.size());
  FeatureMap out(tree.size());
  std::vector<DepChild> children;
  for (std::size_t i = 0; i < tree.size(); ++i) {
    children.clear();
    for (const std::size_t c : tree.nodes[i].children) {
      children.push_back({&node_vectors[c], *tree.nodes[c].relation});
    }
    out[i] = conv_window_d(node_vectors[i], children, params, inventory);
  }
  return out;
}

std::vector<Var> convolve(Tape& tape, const ParseTree& tree, std::span<const Var> inputs,
                          const CWindowParams& params) {
  require(tree, TreeKind::kConstituency);
  check_inputs(tree, inputs.size());
  const Var wp = tape.param(params.parent);
  const Var wl = tape.param(params.left);
  const Var wr = tape.param(params.right);
  const Var b = tape.param(params.bias);
  std::vector<Var> out(tree.size());
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const auto& kids = tree.nodes[i].children;
    std::vector<Var> terms{tape.matvec(wp, inputs[i])};
    if (kids.size() > 0) terms.push_back(tape.matvec(wl, inputs[kids[0]]));
    if (kids.size() > 1) terms.push_back(tape.matvec(wr, inputs[kids[1]]));
    terms.push_back(b);
    out[i] = tape.relu(tape.sum(terms));
  }
  return out;
}

std::vector<Var> convolve(Tape& tape, const ParseTree& tree, std::span<const Var> inputs,
                          const DWindowParams& params, const DepTypeInventory& inventory) {
  require(tree, TreeKind::kDependency);
  check_inputs(tree, inputs.size());
  if (params.relation.size() != inventory.slot_count()) {
    throw ShapeError("dependency window/inventory slot count mismatch");
  }
  const Var wp = tape.param(params.parent);
  const Var b = tape.param(params.bias);
  std::vector<Var> out(tree.size());
  for (std::size_t i = 0; i < tree.size(); ++i) {
    std::vector<Var> terms{tape.matvec(wp, inputs[i])};
    for (const std::size_t c : tree.nodes[i].children) {
      const auto& w = params.relation[inventory.slot_of(*tree.nodes[c].relation)];
      terms.push_back(tape.matvec(tape.param(w), inputs[c]));
    }
    terms.push_back(b);
    out[i] = tape.relu(tape.sum(terms));
  }
  return out;
}

}  // namespace tbcnn
