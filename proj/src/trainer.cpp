#include "tbcnn/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <utility>
#include <unordered_set>

#include "tbcnn/corpus_io.hpp"
#include "tbcnn/error.hpp"

namespace tbcnn {

namespace {

constexpr std::uint64_t kDropoutStream = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kShuffleStream = 0x2545f4914f6cdd1dULL;

void check_rate(double rate, const char* name) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ConfigError(std::string(name) + " must lie in [0, 1), got " + std::to_string(rate));
  }
}

std::vector<Matrix> snapshot(Model& model) {
  std::vector<Matrix> out;
  for (const Parameter* p : model.parameters()) out.push_back(p->value);
  return out;
}

void restore(Model& model, const std::vector<Matrix>& saved) {
  const auto params = model.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = saved[i];
}

}  // namespace

TrainConfig TrainConfig::sentiment(Variant v) {
  TrainConfig c;
  c.variant = v;
  c.pooling = default_pooling(v);
  return c;
}

TrainConfig TrainConfig::question_classification(Variant v) {
  TrainConfig c;
  c.variant = v;
  c.pooling = default_pooling(v);
  c.n_c = 30;
  c.n_h = 25;
  c.dropout_embedding = 0.3;
  c.dropout_hidden = 0.05;
  c.train_embeddings = false;
  return c;
}

PoolingStrategy default_pooling(Variant v) {
  return v == Variant::kConstituency ? PoolingStrategy::kThreeSlot : PoolingStrategy::kKSlot;
}

void validate(const TrainConfig& config) {
  if (config.n_e == 0) throw ConfigError("n_e must be at least 1");
  if (config.n_c == 0) throw ConfigError("n_c must be at least 1");
  if (config.n_h == 0) throw ConfigError("n_h must be at least 1");
  if (config.batch_size == 0) throw ConfigError("batch_size must be at least 1");
  if (config.max_epochs == 0) throw ConfigError("max_epochs must be at least 1");
  if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
    throw ConfigError("learning_rate must be positive");
  }
  if (!(config.lambda >= 0.0) || !std::isfinite(config.lambda)) {
    throw ConfigError("lambda must be non-negative");
  }
  check_rate(config.dropout_hidden, "dropout_hidden");
  check_rate(config.dropout_embedding, "dropout_embedding");
  if (config.rae.batch_size == 0) throw ConfigError("rae batch_size must be at least 1");
  if (!(config.rae.learning_rate > 0.0)) throw ConfigError("rae learning_rate must be positive");
  check_rate(config.rae.holdout_fraction, "rae holdout");
  validate(shape_of(config, 2));
}

ModelShape shape_of(const TrainConfig& config, std::size_t num_classes) {
  ModelShape s;
  s.variant = config.variant;
  s.n_e = config.n_e;
  s.n_c = config.n_c;
  s.n_h = config.n_h;
  s.num_classes = num_classes;
  s.pooling = config.pooling;
  s.k = config.k;
  s.alpha = config.alpha;
  return s;
}

std::vector<Sample> whole_sentences(std::span<const ParseTree> trees) {
  std::vector<Sample> out;
  out.reserve(trees.size());
  for (std::size_t i = 0; i < trees.size(); ++i) {
    if (!trees[i].sentence_label) {
      throw DataError("sentence " + std::to_string(i + 1) + " has no label");
    }
    out.push_back({&trees[i], *trees[i].sentence_label});
  }
  return out;
}

std::vector<ParseTree> expand_subsentences(std::span<const ParseTree> trees) {
  std::vector<ParseTree> out;
  for (const auto& t : trees) {
    for (auto& s : subsentence_samples(t)) out.push_back(std::move(s));
  }
  return out;
}

double accuracy(const Model& model, std::span<const Sample> samples) {
  if (samples.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& s : samples) {
    if (model.predict(*s.tree).predicted == s.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

TrainReport train(Model& model, std::span<const Sample> train_set,
                  std::span<const Sample> validation, const TrainConfig& config,
                  std::ostream* log) {
  validate(config);
  if (train_set.empty()) throw ConfigError("training split is empty");
  if (validation.empty()) throw ConfigError("validation split is empty");
  const auto start = std::chrono::steady_clock::now();

  Rng shuffle_rng(config.seed ^ kShuffleStream);
  Rng dropout_rng(config.seed ^ kDropoutStream);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::unordered_set<const Parameter*> regularized;
  for (const Parameter* p : model.regularized()) regularized.insert(p);
  const auto weights = model.regularized();

  ForwardOptions opts;
  opts.train_embeddings = config.train_embeddings;
  opts.dropout_embedding = config.dropout_embedding;
  opts.dropout_hidden = config.dropout_hidden;
  opts.rng = &dropout_rng;

  TrainReport report;
  std::vector<Matrix> best;
  double lr = config.learning_rate;
  std::size_t stale = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle(std::span<std::size_t>(order), shuffle_rng);
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      GradientMap batch;
      for (std::size_t i = begin; i < end; ++i) {
        const Sample& s = train_set[order[i]];
        Tape tape;
        const Var l = model.record_loss(tape, *s.tree, s.label, opts);
        loss_sum += tape.scalar(l);
        batch.add(backward(tape, l));
      }
      batch.scale(1.0 / static_cast<double>(end - begin));
      for (Parameter* p : model.parameters()) {
        if (model.is_frozen(*p)) continue;
        if (model.is_embedding(*p) && !config.train_embeddings) continue;
        const Matrix* g = batch.find(*p);
        const bool decay = regularized.contains(p) && config.lambda > 0.0;
        if (g == nullptr && !decay) continue;
        auto w = p->value.data();
        for (std::size_t j = 0; j < w.size(); ++j) {
          double step = g != nullptr ? g->data()[j] : 0.0;
          if (decay) step += 2.0 * config.lambda * w[j];
          w[j] -= lr * step;
        }
      }
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.learning_rate = lr;
    stats.train_loss = loss_sum / static_cast<double>(train_set.size()) +
                       l2_penalty(weights, config.lambda);
    stats.val_accuracy = accuracy(model, validation);
    report.epochs.push_back(stats);
    if (log != nullptr) {
      char line[128];
      std::snprintf(line, sizeof line, "epoch %zu train_loss %.6f val_acc %.4f\n", epoch,
                    stats.train_loss, stats.val_accuracy);
      *log << line << std::flush;
    }

    if (best.empty() || stats.val_accuracy > report.best_val_accuracy) {
      best = snapshot(model);
      report.best_epoch = epoch;
      report.best_val_accuracy = stats.val_accuracy;
      stale = 0;
    } else if (config.lr_patience > 0 && ++stale >= config.lr_patience) {
      lr /= 2.0;
      stale = 0;
    }
  }

  restore(model, best);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

LengthBuckets::LengthBuckets(std::vector<std::size_t> upper_edges)
    : edges_(std::move(upper_edges)) {
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (edges_[i] <= edges_[i - 1]) throw ConfigError("bucket edges must increase");
  }
}

LengthBuckets LengthBuckets::standard(std::size_t granularity, std::size_t groups) {
  if (granularity == 0 || groups < 2) {
    throw ConfigError("length buckets need granularity >= 1 and at least 2 groups");
  }
  std::vector<std::size_t> edges;
  for (std::size_t m = 2; m < groups + 1; ++m) edges.push_back(granularity * m);
  return LengthBuckets(std::move(edges));
}

std::size_t LengthBuckets::bucket_of(std::size_t length) const {
  return static_cast<std::size_t>(
      std::lower_bound(edges_.begin(), edges_.end(), length) - edges_.begin());
}

std::string LengthBuckets::label(std::size_t bucket) const {
  if (edges_.empty()) return "all";
  if (bucket == 0) return "<=" + std::to_string(edges_.front());
  if (bucket >= edges_.size()) return ">=" + std::to_string(edges_.back() + 1);
  return std::to_string(edges_[bucket - 1] + 1) + "-" + std::to_string(edges_[bucket]);
}

namespace {

EvalReport tally(const LengthBuckets& buckets) {
  EvalReport r;
  for (std::size_t b = 0; b < buckets.count(); ++b) {
    BucketAccuracy acc;
    acc.range = buckets.label(b);
    r.buckets.push_back(acc);
  }
  return r;
}

void record(EvalReport& r, const LengthBuckets& buckets, std::size_t length, bool hit) {
  ++r.total;
  auto& b = r.buckets[buckets.bucket_of(length)];
  ++b.total;
  if (hit) {
    ++r.correct;
    ++b.correct;
  }
}

void finish(EvalReport& r) {
  r.accuracy = r.total == 0 ? 0.0 : static_cast<double>(r.correct) / static_cast<double>(r.total);
  for (auto& b : r.buckets) {
    if (b.total > 0) b.accuracy = static_cast<double>(b.correct) / static_cast<double>(b.total);
  }
}

}  // namespace

EvalReport evaluate(const Model& model, std::span<const Sample> samples,
                    const LengthBuckets& buckets) {
  EvalReport r = tally(buckets);
  for (const auto& s : samples) {
    record(r, buckets, s.tree->word_count(), model.predict(*s.tree).predicted == s.label);
  }
  finish(r);
  return r;
}

EvalReport evaluate_binary(const Model& model, std::span<const Sample> samples,
                           const LengthBuckets& buckets) {
  if (model.shape().num_classes != 5) {
    throw ConfigError("binary transfer needs a 5-class model, this one has " +
                      std::to_string(model.shape().num_classes) + " classes");
  }
  EvalReport r = tally(buckets);
  for (const auto& s : samples) {
    if (s.label > 4) throw DataError("gold label " + std::to_string(s.label) + " is not 0-4");
    if (s.label == 2) {
      ++r.skipped;
      continue;
    }
    const std::size_t gold = s.label < 2 ? 0 : 1;
    const auto t = transfer_5_to_2(model.predict(*s.tree).probabilities);
    record(r, buckets, s.tree->word_count(), t.output.predicted == gold);
  }
  finish(r);
  return r;
}

void print_report(std::ostream& out, const EvalReport& report) {
  char line[160];
  std::snprintf(line, sizeof line, "accuracy %.4f (%zu/%zu)\n", report.accuracy,
                report.correct, report.total);
  out << line;
  if (report.skipped > 0) out << "skipped " << report.skipped << " neutral\n";
  std::snprintf(line, sizeof line, "%-8s %8s %8s %9s\n", "length", "n", "correct", "accuracy");
  out << line;
  for (const auto& b : report.buckets) {
    if (b.accuracy) {
      std::snprintf(line, sizeof line, "%-8s %8zu %8zu %9.4f\n", b.range.c_str(), b.total,
                    b.correct, *b.accuracy);
    } else {
      std::snprintf(line, sizeof line, "%-8s %8zu %8zu %9s\n", b.range.c_str(), b.total,
                    b.correct, "-");
    }
    out << line;
  }
}

double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
  return std::fabs(analytic - numeric) / scale;
}

GradCheckReport gradient_check(Model& model, const ParseTree& tree, std::size_t gold,
                               const GradCheckOptions& options) {
  const std::vector<Vector> inputs = model.input_vectors(tree);
  ForwardOptions opts;
  opts.train_embeddings = options.train_embeddings;
  opts.inputs = inputs;

  auto record = [&](Tape& tape) {
    const Var ce = model.record_loss(tape, tree, gold, opts);
    if (options.lambda == 0.0) return ce;
    return tape.add(ce, model.record_l2(tape, options.lambda));
  };
  // The two terms are differenced separately: the penalty is orders of
  // magnitude below the cross-entropy and would otherwise be lost to rounding.
  auto objective = [&] {
    Tape tape;
    const double ce = tape.scalar(model.record_loss(tape, tree, gold, opts));
    if (options.lambda == 0.0) return std::pair{ce, 0.0};
    return std::pair{ce, tape.scalar(model.record_l2(tape, options.lambda))};
  };

  Tape tape;
  const GradientMap grads = backward(tape, record(tape));

  const auto params = model.parameters();
  auto frozen = [&](const Parameter& p) {
    return model.is_frozen(p) || (model.is_embedding(p) && !options.train_embeddings);
  };
  std::size_t total = 0;
  for (const Parameter* p : params) {
    if (!frozen(*p)) total += p->value.data().size();
  }
  const bool sampled = total > options.sample_threshold;
  Rng rng(options.seed);

  GradCheckReport report;
  for (Parameter* p : params) {
    GradCheckGroup group;
    group.name = p->name;
    group.frozen = frozen(*p);
    const Matrix analytic = grads.get(*p);
    for (const double a : analytic.data()) {
      group.max_abs_analytic = std::max(group.max_abs_analytic, std::fabs(a));
    }
    if (group.frozen) {
      report.groups.push_back(group);
      continue;
    }
    auto values = p->value.data();
    std::vector<std::size_t> entries(values.size());
    std::iota(entries.begin(), entries.end(), std::size_t{0});
    if (sampled) {
      shuffle(std::span<std::size_t>(entries), rng);
      const auto keep = static_cast<std::size_t>(
          std::ceil(options.sample_fraction * static_cast<double>(entries.size())));
      entries.resize(std::min(entries.size(), std::max<std::size_t>(keep, 1)));
    }
    for (const std::size_t j : entries) {
      const double original = values[j];
      values[j] = original + options.epsilon;
      const auto plus = objective();
      values[j] = original - options.epsilon;
      const auto minus = objective();
      values[j] = original;
      const double numeric = (plus.first - minus.first) / (2.0 * options.epsilon) +
                             (plus.second - minus.second) / (2.0 * options.epsilon);
      double a = analytic.data()[j];
      if (options.corrupt) a = a * 1.01 + 1e-3;
      group.max_rel_error = std::max(group.max_rel_error, relative_error(a, numeric));
      ++group.checked;
    }
    report.max_rel_error = std::max(report.max_rel_error, group.max_rel_error);
    report.groups.push_back(group);
  }
  return report;
}

}  // namespace tbcnn
