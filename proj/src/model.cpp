#include "tbcnn/model.hpp"

#include "tbcnn/error.hpp"

namespace tbcnn {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::kConstituency:
      return "c";
    case Variant::kDependency:
      return "d";
    case Variant::kBagOfEmbeddings:
      return "bag";
  }
  return "?";
}

Variant parse_variant(std::string_view s) {
  if (s == "c") return Variant::kConstituency;
  if (s == "d") return Variant::kDependency;
  if (s == "bag") return Variant::kBagOfEmbeddings;
  throw ConfigError("unknown variant '" + std::string(s) + "' (expected c, d or bag)");
}

std::string_view to_string(PoolingStrategy p) {
  switch (p) {
    case PoolingStrategy::kGlobal:
      return "global";
    case PoolingStrategy::kThreeSlot:
      return "3slot";
    case PoolingStrategy::kKSlot:
      return "kslot";
  }
  return "?";
}

PoolingStrategy parse_pooling(std::string_view s) {
  if (s == "global") return PoolingStrategy::kGlobal;
  if (s == "3slot") return PoolingStrategy::kThreeSlot;
  if (s == "kslot") return PoolingStrategy::kKSlot;
  throw ConfigError("unknown pooling '" + std::string(s) +
                    "' (expected global, 3slot or kslot)");
}

TreeKind tree_kind(Variant v) {
  return v == Variant::kConstituency ? TreeKind::kConstituency : TreeKind::kDependency;
}

std::size_t ModelShape::slot_count() const {
  switch (pooling) {
    case PoolingStrategy::kGlobal:
      return 1;
    case PoolingStrategy::kThreeSlot:
      return 3;
    case PoolingStrategy::kKSlot:
      return k;
  }
  return 1;
}

std::size_t ModelShape::feature_dim() const {
  return variant == Variant::kBagOfEmbeddings ? n_e : n_c;
}

void validate(const ModelShape& shape) {
  if (shape.n_e == 0 || shape.n_c == 0 || shape.n_h == 0) {
    throw ConfigError("n_e, n_c and n_h must be at least 1");
  }
  if (shape.num_classes < 2) throw ConfigError("need at least two classes");
  if (shape.pooling == PoolingStrategy::kKSlot && shape.k == 0) {
    throw ConfigError("k must be at least 1");
  }
  if (!(shape.alpha > 0.0 && shape.alpha <= 1.0)) {
    throw ConfigError("alpha must lie in (0, 1]");
  }
  const bool constituency = shape.variant == Variant::kConstituency;
  if (constituency && shape.pooling == PoolingStrategy::kKSlot) {
    throw ConfigError("k-slot pooling needs dependency trees; use global or 3slot");
  }
  if (!constituency && shape.pooling == PoolingStrategy::kThreeSlot) {
    throw ConfigError("3-slot pooling needs constituency trees; use global or kslot");
  }
}

Model::Model(const ModelShape& shape, Vocabulary vocab, EmbeddingTable embeddings,
             DepTypeInventory inventory, CompositionParams rae, LabelSet labels, Rng& rng)
    : shape_(shape),
      vocab_(std::move(vocab)),
      embeddings_(std::move(embeddings)),
      inventory_(std::move(inventory)),
      rae_(std::move(rae)),
      labels_(std::move(labels)) {
  validate(shape_);
  if (embeddings_.rows() != vocab_.size() || embeddings_.dim() != shape_.n_e) {
    throw ConfigError("embedding table is " + std::to_string(embeddings_.rows()) + "x" +
                      std::to_string(embeddings_.dim()) + ", expected " +
                      std::to_string(vocab_.size()) + "x" + std::to_string(shape_.n_e));
  }
  if (labels_.size() != shape_.num_classes) {
    throw ConfigError("label set has " + std::to_string(labels_.size()) +
                      " names for " + std::to_string(shape_.num_classes) + " classes");
  }
  switch (shape_.variant) {
    case Variant::kConstituency:
      if (rae_.dim() != shape_.n_e) {
        throw ConfigError("composition parameters do not match n_e");
      }
      c_window_ = CWindowParams::init(shape_.n_e, shape_.n_c, rng);
      break;
    case Variant::kDependency:
      d_window_ = DWindowParams::init(shape_.n_e, shape_.n_c, inventory_.slot_count(), rng);
      break;
    case Variant::kBagOfEmbeddings:
      break;
  }
  head_ = HeadParams::init(shape_.slot_count() * shape_.feature_dim(), shape_.n_h,
                           shape_.num_classes, rng);
}

std::vector<Parameter*> Model::parameters() {
  std::vector<Parameter*> out{&embeddings_.vectors};
  switch (shape_.variant) {
    case Variant::kConstituency:
      for (Parameter* p : rae_.all()) out.push_back(p);
      for (Parameter* p : c_window_.all()) out.push_back(p);
      break;
    case Variant::kDependency:
      for (Parameter* p : d_window_.all()) out.push_back(p);
      break;
    case Variant::kBagOfEmbeddings:
      break;
  }
  for (Parameter* p : head_.all()) out.push_back(p);
  return out;
}

std::vector<const Parameter*> Model::parameters() const {
  std::vector<const Parameter*> out;
  for (Parameter* p : const_cast<Model*>(this)->parameters()) out.push_back(p);
  return out;
}

Parameter* Model::find_parameter(std::string_view name) {
  for (Parameter* p : parameters()) {
    if (p->name == name) return p;
  }
  return nullptr;
}

std::vector<const Parameter*> Model::regularized() const {
  std::vector<const Parameter*> out;
  for (const Parameter* p : parameters()) {
    if (p->regularized && !is_frozen(*p) && !is_embedding(*p)) out.push_back(p);
  }
  return out;
}

bool Model::is_frozen(const Parameter& p) const {
  for (const Parameter* r : rae_.all()) {
    if (r == &p) return true;
  }
  return false;
}

void Model::check_tree(const ParseTree& tree) const {
  if (tree.kind != tree_kind(shape_.variant)) {
    throw ConfigError(std::string("variant ") + std::string(to_string(shape_.variant)) +
                      " cannot read " +
                      (tree.kind == TreeKind::kConstituency ? "constituency" : "dependency") +
                      " trees");
  }
}

std::vector<Vector> Model::input_vectors(const ParseTree& tree) const {
  check_tree(tree);
  if (shape_.variant == Variant::kConstituency) {
    return annotate(tree, rae_, vocab_, embeddings_);
  }
  std::vector<Vector> out;
  out.reserve(tree.size());
  for (const auto& node : tree.nodes) {
    out.push_back(embeddings_.row(node.embedding_index.value_or(vocab_.lookup(*node.word))));
  }
  return out;
}

FeatureMap Model::features(const ParseTree& tree) const {
  return features(tree, input_vectors(tree));
}

FeatureMap Model::features(const ParseTree& tree, std::span<const Vector> inputs) const {
  switch (shape_.variant) {
    case Variant::kConstituency:
      return convolve(tree, inputs, c_window_);
    case Variant::kDependency:
      return convolve(tree, inputs, d_window_, inventory_);
    case Variant::kBagOfEmbeddings:
      break;
  }
  return FeatureMap(inputs.begin(), inputs.end());
}

SlotAssignment Model::slots(const ParseTree& tree) const {
  // Sentences shorter than k leave their trailing slots empty.
  return assign_slots(tree, shape_.pooling, shape_.k, shape_.alpha, true);
}

PredictionOutput Model::predict(const ParseTree& tree) const {
  const FeatureMap f = features(tree);
  return forward(pool(f, slots(tree)).pooled, head_);
}

Var Model::record_logits(Tape& tape, const ParseTree& tree,
                         const ForwardOptions& opts) const {
  check_tree(tree);
  std::vector<Vector> computed;
  std::span<const Vector> values = opts.inputs;
  if (values.empty()) {
    computed = input_vectors(tree);
    values = computed;
  }
  if (values.size() != tree.size()) throw ShapeError("input vectors do not cover the tree");

  std::vector<Var> inputs(tree.size());
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const auto& node = tree.nodes[i];
    if (node.word && opts.train_embeddings) {
      inputs[i] = tape.row(embeddings_.vectors,
                           node.embedding_index.value_or(vocab_.lookup(*node.word)));
    } else {
      inputs[i] = tape.constant(values[i]);
    }
    if (opts.rng != nullptr && opts.dropout_embedding > 0.0) {
      inputs[i] = tape.mul_const(
          inputs[i], dropout_mask(shape_.n_e, opts.dropout_embedding, DropoutMode::kTrain,
                                  *opts.rng));
    }
  }

  std::vector<Var> features;
  switch (shape_.variant) {
    case Variant::kConstituency:
      features = convolve(tape, tree, inputs, c_window_);
      break;
    case Variant::kDependency:
      features = convolve(tape, tree, inputs, d_window_, inventory_);
      break;
    case Variant::kBagOfEmbeddings:
      features = inputs;
      break;
  }

  FeatureMap values_now;
  values_now.reserve(features.size());
  for (const Var f : features) values_now.push_back(tape.vector_value(f));
  const PoolResult pooled = pool(values_now, slots(tree));
  std::vector<Var> slot_vars;
  std::vector<std::size_t> winners;
  for (const auto& slot : pooled.provenance) {
    if (slot.empty() || !slot.front()) {
      slot_vars.push_back(tape.constant(Vector(shape_.feature_dim())));
      continue;
    }
    winners.clear();
    for (const auto& w : slot) winners.push_back(*w);
    slot_vars.push_back(tape.gather(features, winners));
  }
  const Var joined = tape.concat(slot_vars);

  HeadMasks masks;
  Vector input_mask;
  Vector hidden_mask;
  if (opts.rng != nullptr && opts.dropout_hidden > 0.0) {
    input_mask = dropout_mask(head_.input_width(), opts.dropout_hidden, DropoutMode::kTrain,
                              *opts.rng);
    hidden_mask = dropout_mask(shape_.n_h, opts.dropout_hidden, DropoutMode::kTrain,
                               *opts.rng);
    masks.input = &input_mask;
    masks.hidden = &hidden_mask;
  }
  return record_head(tape, joined, head_, masks);
}

Var Model::record_loss(Tape& tape, const ParseTree& tree, std::size_t gold,
                       const ForwardOptions& opts) const {
  return tape.softmax_cross_entropy(record_logits(tape, tree, opts), gold);
}

Var Model::record_l2(Tape& tape, double lambda) const {
  std::vector<Var> terms;
  for (const Parameter* p : regularized()) {
    terms.push_back(tape.squared_norm(tape.param(*p)));
  }
  if (terms.empty()) return tape.constant(Vector{0.0});
  return tape.scale(tape.sum(terms), lambda);
}

}  // namespace tbcnn
