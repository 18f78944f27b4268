#include "tbcnn/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tbcnn/checkpoint.hpp"
#include "tbcnn/config.hpp"
#include "tbcnn/corpus_io.hpp"
#include "tbcnn/embeddings.hpp"
#include "tbcnn/error.hpp"
#include "tbcnn/trainer.hpp"
#include "tbcnn/viz.hpp"

namespace tbcnn {

namespace {

namespace fs = std::filesystem;

constexpr std::string_view kFixtureConstituency =
    "(3 (2 (2 the) (2 movie)) (3 (2 was) (3 (2 really) (4 good))))";
constexpr std::string_view kFixtureDependency =
    "1\tthe\t_\tDT\tDT\t_\t2\tdet\t_\t_\n"
    "2\tmovie\t_\tNN\tNN\t_\t5\tnsubj\t_\t_\n"
    "3\twas\t_\tVBD\tVBD\t_\t5\tcop\t_\t_\n"
    "4\treally\t_\tRB\tRB\t_\t5\tadvmod\t_\t_\n"
    "5\tgood\t_\tJJ\tJJ\t_\t0\troot\t_\t_\n";

std::string format(const char* fmt, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

// A flag that overrides one config field, kept as text so the config parser
// validates it.
struct Override {
  std::string section;
  std::string key;
  std::string value;
  CLI::Option* option = nullptr;
};

struct ConfigFlags {
  std::string config_path;
  std::string preset;
  bool freeze_embeddings = false;
  CLI::Option* freeze_option = nullptr;
  std::vector<std::unique_ptr<Override>> overrides;

  void add(CLI::App* app, const std::string& flag, std::string section, std::string key,
           const std::string& help) {
    auto o = std::make_unique<Override>();
    o->section = std::move(section);
    o->key = std::move(key);
    o->option = app->add_option(flag, o->value, help);
    overrides.push_back(std::move(o));
  }

  // Base values, then preset, config file and flags in that order. Pooling
  // follows the variant unless set explicitly.
  TrainConfig resolve(TrainConfig config) const {
    if (preset == "sentiment") {
      config = TrainConfig::sentiment(config.variant);
    } else if (preset == "qc") {
      config = TrainConfig::question_classification(config.variant);
    } else if (!preset.empty()) {
      throw ConfigError("unknown preset '" + preset + "' (expected sentiment or qc)");
    }
    std::set<std::string> assigned;
    if (!config_path.empty()) assigned = apply_config_file(config_path, config);
    for (const auto& o : overrides) {
      if (o->option->count() == 0) continue;
      set_option(config, o->section, o->key, o->value);
      assigned.insert(o->section + "." + o->key);
    }
    if (freeze_option != nullptr && freeze_option->count() > 0) config.train_embeddings = false;
    if (!assigned.contains("model.pooling")) config.pooling = default_pooling(config.variant);
    validate(config);
    return config;
  }

  bool assigned_on_command_line(std::string_view section, std::string_view key) const {
    for (const auto& o : overrides) {
      if (o->section == section && o->key == key && o->option->count() > 0) return true;
    }
    return false;
  }
};

void add_model_flags(CLI::App* app, ConfigFlags& flags) {
  app->add_option("--config", flags.config_path, "Configuration file");
  app->add_option("--preset", flags.preset, "Hyperparameter regime: sentiment or qc");
  flags.add(app, "--seed", "train", "seed", "Random seed");
  flags.add(app, "--variant", "model", "variant", "c, d or bag");
  flags.add(app, "--pooling", "model", "pooling", "global, 3slot or kslot");
  flags.add(app, "--k", "model", "k", "Slots for k-slot pooling");
  flags.add(app, "--alpha", "model", "alpha", "Depth threshold for 3-slot pooling");
  flags.add(app, "--n-e", "model", "n_e", "Embedding width");
  flags.add(app, "--n-c", "model", "n_c", "Convolution features");
  flags.add(app, "--n-h", "model", "n_h", "Hidden units");
}

void add_training_flags(CLI::App* app, ConfigFlags& flags) {
  flags.add(app, "--epochs", "train", "max_epochs", "Maximum epochs");
  flags.add(app, "--batch", "train", "batch_size", "Minibatch size");
  flags.add(app, "--lr", "train", "learning_rate", "Learning rate");
  flags.add(app, "--lambda", "train", "lambda", "l2 penalty weight");
  flags.add(app, "--dropout-hidden", "train", "dropout_hidden", "Hidden dropout rate");
  flags.add(app, "--dropout-embedding", "train", "dropout_embedding",
            "Embedding dropout rate");
  flags.add(app, "--lr-patience", "train", "lr_patience",
            "Epochs without improvement before halving the learning rate");
  flags.add(app, "--rae-epochs", "rae", "max_epochs", "Composition pretraining epochs");
  flags.add(app, "--rae-lr", "rae", "learning_rate", "Composition pretraining rate");
  flags.freeze_option =
      app->add_flag("--freeze-embeddings", flags.freeze_embeddings, "Keep embeddings fixed");
}

TreeKind sniff_kind(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    return line[first] == '(' ? TreeKind::kConstituency : TreeKind::kDependency;
  }
  throw DataError(path.string() + ": no trees");
}

const char* kind_name(TreeKind k) {
  return k == TreeKind::kConstituency ? "constituency" : "dependency";
}

std::vector<ParseTree> read_corpus(const fs::path& path, Variant variant) {
  const TreeKind kind = sniff_kind(path);
  if (kind != tree_kind(variant)) {
    throw ConfigError(path.string() + " holds " + kind_name(kind) + " trees but variant " +
                      std::string(to_string(variant)) + " needs " +
                      kind_name(tree_kind(variant)) + " trees");
  }
  return kind == TreeKind::kConstituency ? read_constituency_file(path)
                                         : read_dependency_file(path);
}

void attach_labels(std::vector<ParseTree>& trees, const std::string& labels_path,
                   const LabelSet& set) {
  if (labels_path.empty()) return;
  const auto records = read_labels_file(labels_path);
  try {
    apply_labels(trees, records, set);
  } catch (const DataError& e) {
    throw DataError(labels_path + ": " + e.what());
  }
}

void check_labels(std::span<const ParseTree> trees, const LabelSet& set,
                  const std::string& source) {
  for (std::size_t i = 0; i < trees.size(); ++i) {
    if (!trees[i].sentence_label) {
      throw DataError(source + ": sentence " + std::to_string(i + 1) + " has no label");
    }
    if (*trees[i].sentence_label >= set.size()) {
      throw DataError(source + ": sentence " + std::to_string(i + 1) + " has label " +
                      std::to_string(*trees[i].sentence_label) + " outside the " +
                      std::to_string(set.size()) + " model classes");
    }
  }
}

void index_all(std::span<ParseTree> trees, const Vocabulary& vocab) {
  for (auto& t : trees) index_words(t, vocab);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw DataError("cannot write " + path.string());
}

struct TrainArgs {
  ConfigFlags flags;
  std::string train_path;
  std::string labels_path;
  std::string valid_path;
  std::string valid_labels_path;
  std::string embeddings_path;
  std::string rae_path;
  std::string rae_out;
  std::string out_path;
  std::string report_path;
  std::size_t classes = 0;
  bool subsentences = false;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  TrainConfig config = a.flags.resolve(TrainConfig{});
  std::vector<ParseTree> train_trees = read_corpus(a.train_path, config.variant);

  LabelSet labels;
  if (!a.labels_path.empty()) {
    const auto records = read_labels_file(a.labels_path);
    std::vector<std::string> names;
    for (const auto& r : records) names.push_back(r.label);
    labels = LabelSet::from_labels(names);
    attach_labels(train_trees, a.labels_path, labels);
  } else {
    std::size_t top = 0;
    for (std::size_t i = 0; i < train_trees.size(); ++i) {
      if (!train_trees[i].sentence_label) {
        throw DataError(a.train_path + ": sentence " + std::to_string(i + 1) +
                        " has no label and no --labels file was given");
      }
      top = std::max(top, *train_trees[i].sentence_label);
    }
    labels = LabelSet::numeric(top + 1);
  }
  if (a.classes > 0) {
    if (a.classes < labels.size()) {
      throw ConfigError("--classes " + std::to_string(a.classes) + " is below the " +
                        std::to_string(labels.size()) + " labels in the corpus");
    }
    if (a.labels_path.empty() || labels.names() == LabelSet::numeric(labels.size()).names()) {
      labels = LabelSet::numeric(a.classes);
    }
  }

  std::vector<ParseTree> valid_trees;
  if (!a.valid_path.empty()) {
    valid_trees = read_corpus(a.valid_path, config.variant);
    attach_labels(valid_trees, a.valid_labels_path, labels);
    check_labels(valid_trees, labels, a.valid_path);
  }

  std::pair<Vocabulary, EmbeddingTable> emb;
  if (!a.embeddings_path.empty()) {
    emb = load_embeddings_file(a.embeddings_path);
    if (a.flags.assigned_on_command_line("model", "n_e") && config.n_e != emb.second.dim()) {
      throw ConfigError("--n-e " + std::to_string(config.n_e) + " conflicts with " +
                        std::to_string(emb.second.dim()) + "-d embeddings in " +
                        a.embeddings_path);
    }
    config.n_e = emb.second.dim();
  } else {
    emb = random_embeddings(train_trees, config.n_e, config.seed);
  }
  auto& [vocab, table] = emb;
  index_all(train_trees, vocab);
  index_all(valid_trees, vocab);

  DepTypeInventory inventory;
  if (config.variant != Variant::kConstituency) inventory = build_dep_inventory(train_trees);

  CompositionParams rae = CompositionParams::zeros(config.n_e);
  if (config.variant == Variant::kConstituency) {
    if (!a.rae_path.empty()) {
      rae = load_rae_file(a.rae_path);
      if (rae.dim() != config.n_e) {
        throw ConfigError(a.rae_path + " composes " + std::to_string(rae.dim()) +
                          "-d vectors, model uses n_e = " + std::to_string(config.n_e));
      }
    } else {
      Rng rng(config.rae.seed);
      RaeReport report;
      rae = pretrain(train_trees, vocab, table, CompositionParams::init(config.n_e, rng),
                     config.rae, &report);
      out << format("rae heldout_loss %.6f -> %.6f (epoch %zu)\n", report.initial_loss(),
                    report.best_loss(), report.best_epoch);
    }
    if (!a.rae_out.empty()) save_rae_file(a.rae_out, rae);
  }

  Rng init(config.seed);
  Model model(shape_of(config, labels.size()), vocab, table, inventory, rae, labels, init);

  std::vector<ParseTree> expanded;
  std::vector<Sample> train_set;
  if (a.subsentences) {
    if (config.variant != Variant::kConstituency) {
      throw ConfigError("--subsentences needs constituency trees");
    }
    expanded = expand_subsentences(train_trees);
    train_set = whole_sentences(expanded);
  } else {
    train_set = whole_sentences(train_trees);
  }
  const std::vector<Sample> valid_set =
      valid_trees.empty() ? whole_sentences(train_trees) : whole_sentences(valid_trees);
  for (const auto& s : train_set) {
    if (s.label >= labels.size()) throw DataError("training label out of range");
  }

  const TrainReport report = train(model, train_set, valid_set, config, &out);
  out << format("best_epoch %zu val_acc %.4f\n", report.best_epoch, report.best_val_accuracy);
  if (!a.out_path.empty()) {
    save_checkpoint_file(a.out_path, model, config);
    out << "saved " << a.out_path << '\n';
  }
  if (!a.report_path.empty()) {
    nlohmann::json j;
    j["epochs"] = nlohmann::json::array();
    for (const auto& e : report.epochs) {
      j["epochs"].push_back({{"epoch", e.epoch},
                             {"train_loss", e.train_loss},
                             {"val_accuracy", e.val_accuracy},
                             {"learning_rate", e.learning_rate}});
    }
    j["best_epoch"] = report.best_epoch;
    j["best_val_accuracy"] = report.best_val_accuracy;
    j["wall_seconds"] = report.wall_seconds;
    write_text(a.report_path, j.dump(2) + "\n");
  }
  return kExitOk;
}

struct EvalArgs {
  std::string model_path;
  std::string test_path;
  std::string labels_path;
  std::size_t granularity = 5;
  std::size_t groups = 7;
  bool binary = false;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint_file(a.model_path);
  const Model& model = ckpt.model;
  std::vector<ParseTree> trees = read_corpus(a.test_path, model.shape().variant);
  attach_labels(trees, a.labels_path, model.labels());
  check_labels(trees, model.labels(), a.test_path);
  index_all(trees, model.vocab());
  const auto samples = whole_sentences(trees);
  const auto buckets = LengthBuckets::standard(a.granularity, a.groups);
  print_report(out, evaluate(model, samples, buckets));
  if (a.binary) {
    out << "binary transfer\n";
    print_report(out, evaluate_binary(model, samples, buckets));
  }
  return kExitOk;
}

struct VisualizeArgs {
  std::string model_path;
  std::string corpus_path;
  std::string prefix = "tree";
  std::string pooling = "global";
  std::size_t k = 0;
  double alpha = 0.0;
};

int cmd_visualize(const VisualizeArgs& a, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint_file(a.model_path);
  const Model& model = ckpt.model;
  const PoolingStrategy strategy = parse_pooling(a.pooling);
  const Variant v = model.shape().variant;
  if (strategy == PoolingStrategy::kThreeSlot && v != Variant::kConstituency) {
    throw ConfigError("3-slot pooling needs constituency trees");
  }
  if (strategy == PoolingStrategy::kKSlot && v == Variant::kConstituency) {
    throw ConfigError("k-slot pooling needs dependency trees");
  }
  const std::size_t k = a.k > 0 ? a.k : model.shape().k;
  const double alpha = a.alpha > 0.0 ? a.alpha : model.shape().alpha;
  std::vector<ParseTree> trees = read_corpus(a.corpus_path, v);
  index_all(trees, model.vocab());
  for (std::size_t i = 0; i < trees.size(); ++i) {
    const ParseTree& tree = trees[i];
    const auto provenance =
        pool(model.features(tree), assign_slots(tree, strategy, k, alpha, true)).provenance;
    const NodeFractionMap f = fractions(provenance, tree);
    const std::string stem = a.prefix + "_" + std::to_string(i + 1);
    write_text(stem + ".dot", emit_dot(tree, f));
    write_text(stem + ".json", emit_json(tree, f));
    const auto top = static_cast<std::size_t>(
        std::max_element(f.wins.begin(), f.wins.end()) - f.wins.begin());
    out << format("%zu top \"%s\" %.2f\n", i + 1, node_text(tree, top).c_str(),
                  f.fraction(top));
  }
  out << "wrote " << trees.size() << " trees to " << a.prefix << "_*.{dot,json}\n";
  return kExitOk;
}

struct GradcheckArgs {
  ConfigFlags flags;
  std::string sentence_path;
  std::size_t classes = 5;
  double tol = 1e-4;
  bool corrupt = false;
};

int cmd_gradcheck(const GradcheckArgs& a, std::ostream& out) {
  TrainConfig base;
  base.n_e = base.n_c = base.n_h = 4;
  base.lambda = 0.0;
  base.dropout_hidden = base.dropout_embedding = 0.0;
  const TrainConfig config = a.flags.resolve(base);

  std::vector<ParseTree> trees;
  if (!a.sentence_path.empty()) {
    trees = read_corpus(a.sentence_path, config.variant);
    trees.resize(1);
  } else if (config.variant == Variant::kConstituency) {
    trees.push_back(parse_constituency(kFixtureConstituency));
  } else {
    trees.push_back(parse_dependency(kFixtureDependency));
  }
  const std::size_t gold = trees.front().sentence_label.value_or(0);
  if (gold >= a.classes) {
    throw ConfigError("sentence label " + std::to_string(gold) + " needs more than " +
                      std::to_string(a.classes) + " classes");
  }

  auto [vocab, table] = random_embeddings(trees, config.n_e, config.seed);
  index_all(trees, vocab);
  DepTypeInventory inventory;
  if (config.variant != Variant::kConstituency) inventory = build_dep_inventory(trees);
  Rng rng(config.seed);
  CompositionParams rae = CompositionParams::init(config.n_e, rng);
  Model model(shape_of(config, a.classes), vocab, table, inventory, rae,
              LabelSet::numeric(a.classes), rng);

  GradCheckOptions options;
  options.lambda = config.lambda;
  options.train_embeddings = config.train_embeddings;
  options.seed = config.seed;
  options.corrupt = a.corrupt;
  const GradCheckReport report = gradient_check(model, trees.front(), gold, options);
  for (const auto& g : report.groups) {
    if (g.frozen) {
      out << format("%-22s frozen   max|grad| %.3e\n", g.name.c_str(), g.max_abs_analytic);
    } else {
      out << format("%-22s n=%-6zu max_rel_error %.3e\n", g.name.c_str(), g.checked,
                    g.max_rel_error);
    }
  }
  const bool ok = report.passed(a.tol);
  out << format("max_rel_error %.3e tol %.1e %s\n", report.max_rel_error, a.tol,
                ok ? "PASS" : "FAIL");
  return ok ? kExitOk : kExitCheckFailed;
}

struct RaeArgs {
  ConfigFlags flags;
  std::string train_path;
  std::string embeddings_path;
  std::string out_path;
};

int cmd_pretrain_rae(const RaeArgs& a, std::ostream& out) {
  TrainConfig base;
  base.variant = Variant::kConstituency;
  TrainConfig config = a.flags.resolve(base);
  if (config.variant != Variant::kConstituency) {
    throw ConfigError("pretrain-rae needs variant c");
  }
  std::vector<ParseTree> trees = read_corpus(a.train_path, config.variant);
  auto [vocab, table] = a.embeddings_path.empty()
                            ? random_embeddings(trees, config.n_e, config.seed)
                            : load_embeddings_file(a.embeddings_path);
  index_all(trees, vocab);
  Rng rng(config.rae.seed);
  RaeReport report;
  const CompositionParams params = pretrain(
      trees, vocab, table, CompositionParams::init(table.dim(), rng), config.rae, &report);
  for (std::size_t e = 0; e < report.heldout_loss.size(); ++e) {
    out << format("rae_epoch %zu heldout_loss %.6f\n", e, report.heldout_loss[e]);
  }
  out << format("best_epoch %zu heldout_loss %.6f\n", report.best_epoch, report.best_loss());
  if (!a.out_path.empty()) {
    save_rae_file(a.out_path, params);
    out << "saved " << a.out_path << '\n';
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tree-based convolutional sentence classifier", "tbcnn"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train a model and write a checkpoint");
  add_model_flags(train_cmd, train_args.flags);
  add_training_flags(train_cmd, train_args.flags);
  train_cmd->add_option("--train", train_args.train_path, "Training corpus")->required();
  train_cmd->add_option("--labels", train_args.labels_path, "Labels for --train");
  train_cmd->add_option("--valid", train_args.valid_path, "Validation corpus");
  train_cmd->add_option("--valid-labels", train_args.valid_labels_path,
                        "Labels for --valid");
  train_cmd->add_option("--embeddings", train_args.embeddings_path,
                        "Pretrained embeddings (word2vec text format)");
  train_cmd->add_option("--rae", train_args.rae_path, "Pretrained composition parameters");
  train_cmd->add_option("--rae-out", train_args.rae_out, "Save composition parameters here");
  train_cmd->add_option("--classes", train_args.classes, "Number of classes");
  train_cmd->add_flag("--subsentences", train_args.subsentences,
                      "Train on every labeled constituent");
  train_cmd->add_option("--out", train_args.out_path, "Checkpoint path");
  train_cmd->add_option("--report", train_args.report_path, "Training report (JSON)");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Accuracy overall and by sentence length");
  eval_cmd->add_option("--model", eval_args.model_path, "Checkpoint")->required();
  eval_cmd->add_option("--test", eval_args.test_path, "Test corpus")->required();
  eval_cmd->add_option("--labels", eval_args.labels_path, "Labels for --test");
  eval_cmd->add_option("--buckets", eval_args.granularity, "Length bucket granularity");
  eval_cmd->add_option("--groups", eval_args.groups, "Number of length buckets");
  eval_cmd->add_flag("--binary", eval_args.binary,
                     "Also score a 5-class model on positive/negative");

  VisualizeArgs viz_args;
  auto* viz_cmd = app.add_subcommand("visualize", "Write pooling fractions as DOT and JSON");
  viz_cmd->add_option("--model", viz_args.model_path, "Checkpoint")->required();
  viz_cmd->add_option("--corpus", viz_args.corpus_path, "Sentences to show")->required();
  viz_cmd->add_option("--out", viz_args.prefix, "Output prefix");
  viz_cmd->add_option("--pooling", viz_args.pooling, "global, 3slot or kslot");
  viz_cmd->add_option("--k", viz_args.k, "Slots for k-slot pooling");
  viz_cmd->add_option("--alpha", viz_args.alpha, "Depth threshold for 3-slot pooling");

  GradcheckArgs grad_args;
  auto* grad_cmd =
      app.add_subcommand("gradcheck", "Compare analytic and finite-difference gradients");
  add_model_flags(grad_cmd, grad_args.flags);
  grad_args.flags.add(grad_cmd, "--lambda", "train", "lambda", "l2 penalty weight");
  grad_args.flags.freeze_option = grad_cmd->add_flag(
      "--freeze-embeddings", grad_args.flags.freeze_embeddings, "Keep embeddings fixed");
  grad_cmd->add_option("--sentence", grad_args.sentence_path,
                       "Corpus whose first tree is checked");
  grad_cmd->add_option("--classes", grad_args.classes, "Number of classes");
  grad_cmd->add_option("--tol", grad_args.tol, "Maximum relative error");
  grad_cmd->add_flag("--corrupt-gradient", grad_args.corrupt,
                     "Perturb analytic gradients (negative control)");

  RaeArgs rae_args;
  auto* rae_cmd = app.add_subcommand("pretrain-rae", "Pretrain composition parameters");
  add_model_flags(rae_cmd, rae_args.flags);
  add_training_flags(rae_cmd, rae_args.flags);
  rae_cmd->add_option("--train", rae_args.train_path, "Constituency corpus")->required();
  rae_cmd->add_option("--embeddings", rae_args.embeddings_path, "Pretrained embeddings");
  rae_cmd->add_option("--out", rae_args.out_path, "Output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(train_args, out);
    if (eval_cmd->parsed()) return cmd_eval(eval_args, out);
    if (viz_cmd->parsed()) return cmd_visualize(viz_args, out);
    if (grad_cmd->parsed()) return cmd_gradcheck(grad_args, out);
    if (rae_cmd->parsed()) return cmd_pretrain_rae(rae_args, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace tbcnn
