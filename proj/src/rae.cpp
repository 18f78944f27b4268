#include "tbcnn/rae.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tbcnn/error.hpp"
#include "tbcnn/rng.hpp"

namespace tbcnn {

namespace {

void require_constituency(const ParseTree& tree) {
  if (tree.kind != TreeKind::kConstituency) {
    throw ContractError("recursive composition needs constituency trees");
  }
}

Vector leaf_vector(const TreeNode& node, const Vocabulary& vocab,
                   const EmbeddingTable& table) {
  return table.row(node.embedding_index.value_or(vocab.lookup(*node.word)));
}

// Post-order visit (children before parents).
std::vector<std::size_t> post_order(const ParseTree& tree) {
  std::vector<std::size_t> order;
  std::vector<std::pair<std::size_t, bool>> stack{{tree.root, false}};
  while (!stack.empty()) {
    auto [i, expanded] = stack.back();
    stack.pop_back();
    if (expanded) {
      order.push_back(i);
      continue;
    }
    stack.emplace_back(i, true);
    const auto& kids = tree.nodes[i].children;
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.emplace_back(*it, false);
  }
  return order;
}

std::size_t count_inner(std::span<const ParseTree> trees) {
  std::size_t n = 0;
  for (const auto& t : trees) {
    for (const auto& node : t.nodes) n += node.is_leaf() ? 0 : 1;
  }
  return n;
}

void sgd_step(CompositionParams& params, const GradientMap& grads, double lr) {
  for (Parameter* p : params.all()) {
    const Matrix* g = grads.find(*p);
    if (g == nullptr) continue;
    auto w = p->value.data();
    const auto gd = g->data();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * gd[i];
  }
}

}  // namespace

CompositionParams CompositionParams::zeros(std::size_t n_e) {
  CompositionParams p;
  p.comp_w.value = Matrix(n_e, 2 * n_e);
  p.comp_b.value = Matrix(n_e, 1);
  p.rec_w.value = Matrix(2 * n_e, n_e);
  p.rec_b.value = Matrix(2 * n_e, 1);
  return p;
}

CompositionParams CompositionParams::init(std::size_t n_e, Rng& rng) {
  CompositionParams p = zeros(n_e);
  p.comp_w.value = Matrix::glorot(n_e, 2 * n_e, rng);
  p.rec_w.value = Matrix::glorot(2 * n_e, n_e, rng);
  return p;
}

std::vector<Parameter*> CompositionParams::all() {
  return {&comp_w, &comp_b, &rec_w, &rec_b};
}

std::vector<const Parameter*> CompositionParams::all() const {
  return {&comp_w, &comp_b, &rec_w, &rec_b};
}

Vector compose(const Vector& c1, const Vector& c2, const CompositionParams& params) {
  const std::size_t n_e = params.dim();
  if (c1.dim() != n_e || c2.dim() != n_e) {
    throw ShapeError("compose: children of dims " + std::to_string(c1.dim()) + " and " +
                     std::to_string(c2.dim()) + ", expected " + std::to_string(n_e));
  }
  const Vector both[] = {c1, c2};
  Vector z = matvec(params.comp_w.value, concat(both));
  add_in_place(z, params.comp_b.value.data());
  return elementwise_tanh(z);
}

std::vector<Vector> annotate(const ParseTree& tree, const CompositionParams& params,
                             const Vocabulary& vocab, const EmbeddingTable& table) {
  require_constituency(tree);
  std::vector<Vector> out(tree.size());
  const Vector zero(params.dim());
  for (const std::size_t i : post_order(tree)) {
    const auto& node = tree.nodes[i];
    if (node.is_leaf()) {
      out[i] = leaf_vector(node, vocab, table);
    } else {
      const Vector& left = out[node.children[0]];
      const Vector& right = node.children.size() > 1 ? out[node.children[1]] : zero;
      out[i] = compose(left, right, params);
    }
  }
  return out;
}

Var record_reconstruction(Tape& tape, const ParseTree& tree,
                          const CompositionParams& params, const Vocabulary& vocab,
                          const EmbeddingTable& table, std::size_t& inner) {
  require_constituency(tree);
  const Var comp_w = tape.param(params.comp_w);
  const Var comp_b = tape.param(params.comp_b);
  const Var rec_w = tape.param(params.rec_w);
  const Var rec_b = tape.param(params.rec_b);
  const Var zero = tape.constant(Vector(params.dim()));
  std::vector<Var> vars(tree.size());
  std::vector<Var> errors;
  for (const std::size_t i : post_order(tree)) {
    const auto& node = tree.nodes[i];
    if (node.is_leaf()) {
      vars[i] = tape.constant(leaf_vector(node, vocab, table));
      continue;
    }
    const Var kids[] = {vars[node.children[0]],
                        node.children.size() > 1 ? vars[node.children[1]] : zero};
    const Var joined = tape.concat(kids);
    vars[i] = tape.tanh(tape.add(tape.matvec(comp_w, joined), comp_b));
    const Var rebuilt = tape.tanh(tape.add(tape.matvec(rec_w, vars[i]), rec_b));
    errors.push_back(tape.squared_norm(tape.sub(joined, rebuilt)));
  }
  inner = errors.size();
  if (errors.empty()) return tape.constant(Vector{0.0});
  return tape.sum(errors);
}

double reconstruction_loss(std::span<const ParseTree> trees,
                           const CompositionParams& params, const Vocabulary& vocab,
                           const EmbeddingTable& table) {
  double total = 0.0;
  std::size_t inner = 0;
  for (const auto& tree : trees) {
    Tape tape;
    std::size_t n = 0;
    total += tape.scalar(record_reconstruction(tape, tree, params, vocab, table, n));
    inner += n;
  }
  return inner == 0 ? 0.0 : total / static_cast<double>(inner);
}

CompositionParams pretrain(std::span<const ParseTree> corpus, const Vocabulary& vocab,
                           const EmbeddingTable& table, CompositionParams params,
                           const RaeConfig& config, RaeReport* report) {
  if (count_inner(corpus) == 0) {
    throw ContractError("RAE pretraining needs at least one non-leaf node");
  }
  if (config.batch_size == 0) throw ConfigError("rae batch_size must be positive");
  Rng rng(config.seed);
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  shuffle(std::span(order), rng);

  std::size_t holdout = static_cast<std::size_t>(
      std::floor(config.holdout_fraction * static_cast<double>(corpus.size())));
  if (corpus.size() >= 2) holdout = std::clamp<std::size_t>(holdout, 1, corpus.size() - 1);
  std::vector<ParseTree> heldout;
  std::vector<std::size_t> train_ids;
  if (corpus.size() < 2) {
    train_ids = order;
    heldout.assign(corpus.begin(), corpus.end());
  } else {
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (i < holdout) {
        heldout.push_back(corpus[order[i]]);
      } else {
        train_ids.push_back(order[i]);
      }
    }
    if (count_inner(heldout) == 0) heldout.assign(corpus.begin(), corpus.end());
  }

  RaeReport local;
  RaeReport& rep = report != nullptr ? *report : local;
  rep = RaeReport{};
  rep.heldout_loss.push_back(reconstruction_loss(heldout, params, vocab, table));
  CompositionParams best = params;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle(std::span(train_ids), rng);
    for (std::size_t start = 0; start < train_ids.size(); start += config.batch_size) {
      const std::size_t end = std::min(start + config.batch_size, train_ids.size());
      GradientMap batch;
      std::size_t inner = 0;
      for (std::size_t b = start; b < end; ++b) {
        Tape tape;
        std::size_t n = 0;
        const Var loss =
            record_reconstruction(tape, corpus[train_ids[b]], params, vocab, table, n);
        inner += n;
        if (n > 0) batch.add(backward(tape, loss));
      }
      if (inner == 0) continue;
      batch.scale(1.0 / static_cast<double>(inner));
      sgd_step(params, batch, config.learning_rate);
    }
    rep.heldout_loss.push_back(reconstruction_loss(heldout, params, vocab, table));
    if (rep.heldout_loss.back() < rep.best_loss()) {
      rep.best_epoch = epoch;
      best = params;
    }
  }
  return best;
}

}  // namespace tbcnn
