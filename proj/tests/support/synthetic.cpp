#include "support/synthetic.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "tbcnn/corpus_io.hpp"
#include "tbcnn/embeddings.hpp"
#include "tbcnn/rae.hpp"

namespace tbcnn::testing {

namespace {

const std::vector<std::string> kFillers = {"the", "a",  "film", "plot", "was",   "is",
                                           "very", "and", "it", "story", "cast", "with"};
const std::vector<std::vector<std::string>> kCues = {
    {"awful", "dull"}, {"plain", "okay"}, {"great", "superb"}};

std::string bracket(Rng& rng, const std::vector<std::string>& words, std::size_t lo,
                    std::size_t hi, const std::string& tag, bool unary) {
  if (hi - lo == 1) {
    const std::string leaf = "(" + tag + " " + words[lo] + ")";
    if (unary && uniform01(rng) < 0.3) return "(" + tag + " " + leaf + ")";
    return leaf;
  }
  const std::size_t mid = lo + 1 + uniform_index(rng, hi - lo - 1);
  return "(" + tag + " " + bracket(rng, words, lo, mid, tag, unary) + " " +
         bracket(rng, words, mid, hi, tag, unary) + ")";
}

std::vector<std::size_t> permutation(Rng& rng, std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(std::span<std::size_t>(order), rng);
  return order;
}

}  // namespace

std::string conll_text(const std::vector<std::string>& words,
                       const std::vector<std::size_t>& heads,
                       const std::vector<std::string>& relations) {
  std::ostringstream out;
  const std::size_t n = words.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t head = heads[i] == n ? 0 : heads[i] + 1;
    out << i + 1 << '\t' << words[i] << "\t_\tX\tX\t_\t" << head << '\t'
        << (heads[i] == n ? "root" : relations[i]) << "\t_\t_\n";
  }
  return out.str();
}

ParseTree random_dependency_tree(Rng& rng, const std::vector<std::string>& words,
                                 const std::vector<std::string>& relations) {
  const std::size_t n = words.size();
  const auto order = permutation(rng, n);
  std::vector<std::size_t> heads(n);
  std::vector<std::string> rels(n);
  heads[order[0]] = n;
  for (std::size_t i = 1; i < n; ++i) {
    heads[order[i]] = order[uniform_index(rng, i)];
    rels[order[i]] = relations[uniform_index(rng, relations.size())];
  }
  return parse_dependency(conll_text(words, heads, rels));
}

ParseTree random_constituency_tree(Rng& rng, const std::vector<std::string>& words,
                                   std::size_t label, bool unary) {
  return parse_constituency(bracket(rng, words, 0, words.size(), std::to_string(label), unary));
}

std::vector<std::string> random_words(Rng& rng, std::size_t n,
                                      const std::vector<std::string>& pool) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(pool[uniform_index(rng, pool.size())]);
  return out;
}

bool is_cue_word(const std::string& word) {
  for (const auto& group : kCues) {
    if (std::find(group.begin(), group.end(), word) != group.end()) return true;
  }
  return false;
}

ToyCorpus toy_corpus(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  const std::vector<std::string> relations = {"det", "nsubj", "amod", "dobj"};
  ToyCorpus c;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t label = i % 3;
    const std::size_t length = 4 + uniform_index(rng, 5);
    auto words = random_words(rng, length - 1, kFillers);
    const auto& cues = kCues[label];
    const std::string cue = cues[uniform_index(rng, cues.size())];
    words.insert(words.begin() + static_cast<std::ptrdiff_t>(uniform_index(rng, length)), cue);
    c.constituency.push_back(random_constituency_tree(rng, words, label));
    ParseTree d = random_dependency_tree(rng, words, relations);
    d.sentence_label = label;
    c.dependency.push_back(std::move(d));
    c.cue_of.push_back(cue);
  }
  return c;
}

StructuralTask structural_task(std::size_t n_train, std::size_t n_test, std::uint64_t seed) {
  Rng rng(seed);
  const std::vector<std::string> relations = {"dep", "mod"};
  auto make = [&](std::size_t label) {
    const std::size_t n = 6 + uniform_index(rng, 5);
    auto words = random_words(rng, n - 2, kFillers);
    words.push_back(kGovernor);
    words.push_back(kDependent);
    shuffle(std::span<std::string>(words), rng);
    const auto ka = static_cast<std::size_t>(
        std::find(words.begin(), words.end(), kGovernor) - words.begin());
    const auto zu = static_cast<std::size_t>(
        std::find(words.begin(), words.end(), kDependent) - words.begin());
    std::vector<std::size_t> heads(n);
    std::vector<std::string> rels(n);
    for (;;) {
      const auto order = permutation(rng, n);
      heads[order[0]] = n;
      bool ok = !(label == 1 && order[0] == zu);
      for (std::size_t i = 1; i < n && ok; ++i) {
        const std::size_t v = order[i];
        rels[v] = relations[uniform_index(rng, relations.size())];
        std::vector<std::size_t> choices(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(i));
        if (label == 1 && v == zu) {
          ok = std::find(choices.begin(), choices.end(), ka) != choices.end();
          heads[v] = ka;
          continue;
        }
        if (label == 0 && (v == zu || v == ka)) {
          const std::size_t banned = v == zu ? ka : zu;
          choices.erase(std::remove(choices.begin(), choices.end(), banned), choices.end());
        }
        if (choices.empty()) {
          ok = false;
          continue;
        }
        heads[v] = choices[uniform_index(rng, choices.size())];
      }
      if (ok) break;
    }
    ParseTree t = parse_dependency(conll_text(words, heads, rels));
    t.sentence_label = label;
    return t;
  };
  StructuralTask task;
  for (std::size_t i = 0; i < n_train; ++i) task.train.push_back(make(i % 2));
  for (std::size_t i = 0; i < n_test; ++i) task.test.push_back(make(i % 2));
  return task;
}

Model make_model(const std::vector<ParseTree>& corpus, const ModelShape& shape,
                 std::uint64_t seed) {
  auto [vocab, table] = random_embeddings(corpus, shape.n_e, seed);
  DepTypeInventory inventory;
  if (shape.variant != Variant::kConstituency) inventory = build_dep_inventory(corpus);
  Rng rng(seed);
  CompositionParams rae = CompositionParams::init(shape.n_e, rng);
  return Model(shape, std::move(vocab), std::move(table), std::move(inventory), std::move(rae),
               LabelSet::numeric(shape.num_classes), rng);
}

TrainConfig toy_config(Variant v) {
  TrainConfig c = TrainConfig::sentiment(v);
  c.n_e = 8;
  c.n_c = 32;
  c.n_h = 16;
  c.batch_size = 5;
  c.learning_rate = 0.1;
  c.lr_patience = 0;
  c.max_epochs = 200;
  return c;
}

Fitted fit(const std::vector<ParseTree>& train, const std::vector<ParseTree>& valid,
           const TrainConfig& config, std::size_t classes) {
  auto [vocab, table] = random_embeddings(train, config.n_e, config.seed);
  DepTypeInventory inventory;
  if (config.variant != Variant::kConstituency) inventory = build_dep_inventory(train);
  CompositionParams rae = CompositionParams::zeros(config.n_e);
  if (config.variant == Variant::kConstituency) {
    Rng rng(config.rae.seed);
    rae = pretrain(train, vocab, table, CompositionParams::init(config.n_e, rng), config.rae);
  }
  Rng init(config.seed);
  Fitted f{Model(shape_of(config, classes), std::move(vocab), std::move(table),
                 std::move(inventory), std::move(rae), LabelSet::numeric(classes), init),
           {}};
  const auto train_set = whole_sentences(train);
  const auto valid_set = valid.empty() ? train_set : whole_sentences(valid);
  f.report = tbcnn::train(f.model, train_set, valid_set, config);
  return f;
}

std::vector<Vector> random_vectors(Rng& rng, std::size_t count, std::size_t dim,
                                   double bound) {
  std::vector<Vector> out;
  for (std::size_t i = 0; i < count; ++i) {
    Vector v(dim);
    for (std::size_t d = 0; d < dim; ++d) v[d] = uniform(rng, -bound, bound);
    out.push_back(v);
  }
  return out;
}

}  // namespace tbcnn::testing
