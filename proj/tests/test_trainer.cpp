#include <gtest/gtest.h>
#include <sstream>

#include "support/synthetic.hpp"
#include "tbcnn/corpus_io.hpp"
#include "tbcnn/error.hpp"
#include "tbcnn/trainer.hpp"

namespace tbcnn {
namespace {

using testing::fit;
using testing::toy_config;

TEST(Config, PresetsAndValidation) {
  const TrainConfig s = TrainConfig::sentiment(Variant::kConstituency);
  EXPECT_EQ(s.pooling, PoolingStrategy::kThreeSlot);
  EXPECT_EQ(s.batch_size, 200u);
  EXPECT_DOUBLE_EQ(s.dropout_hidden, 0.5);
  EXPECT_DOUBLE_EQ(s.dropout_embedding, 0.4);
  const TrainConfig q = TrainConfig::question_classification(Variant::kDependency);
  EXPECT_EQ(q.pooling, PoolingStrategy::kKSlot);
  EXPECT_EQ(q.n_c, 30u);
  EXPECT_EQ(q.n_h, 25u);
  EXPECT_FALSE(q.train_embeddings);
  EXPECT_NO_THROW(validate(s));
  TrainConfig bad = s;
  bad.dropout_hidden = 1.0;
  EXPECT_THROW(validate(bad), ConfigError);
  bad = s;
  bad.learning_rate = 0.0;
  EXPECT_THROW(validate(bad), ConfigError);
  bad = s;
  bad.pooling = PoolingStrategy::kKSlot;
  EXPECT_THROW(validate(bad), ConfigError);
}

TEST(Samples, WholeSentencesNeedLabels) {
  std::vector<ParseTree> trees{parse_dependency("1\ta\t_\t_\t_\t_\t0\troot\t_\t_\n")};
  EXPECT_THROW(whole_sentences(trees), DataError);
  trees[0].sentence_label = 1;
  EXPECT_EQ(whole_sentences(trees).front().label, 1u);
  const std::vector<ParseTree> c{parse_constituency("(3 (2 a) (4 (2 b) (1 c)))")};
  EXPECT_EQ(expand_subsentences(c).size(), 5u);
}

TEST(Training, LossDecreasesAndBestEpochIsRestored) {
  const auto toy = testing::toy_corpus(30, 2);
  TrainConfig config = toy_config(Variant::kDependency);
  config.max_epochs = 15;
  std::ostringstream log;
  auto f = fit(toy.dependency, {}, config, 3);
  ASSERT_EQ(f.report.epochs.size(), 15u);
  EXPECT_LT(f.report.epochs.back().train_loss, f.report.epochs.front().train_loss);
  const auto samples = whole_sentences(toy.dependency);
  EXPECT_DOUBLE_EQ(accuracy(f.model, samples), f.report.best_val_accuracy);
  for (const auto& e : f.report.epochs) EXPECT_LE(e.val_accuracy, f.report.best_val_accuracy);
}

TEST(Training, LogsOneLinePerEpoch) {
  const auto toy = testing::toy_corpus(9, 3);
  TrainConfig config = toy_config(Variant::kDependency);
  config.max_epochs = 3;
  Model m = testing::make_model(toy.dependency, shape_of(config, 3), 1);
  const auto samples = whole_sentences(toy.dependency);
  std::ostringstream log;
  train(m, samples, samples, config, &log);
  std::istringstream lines(log.str());
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    EXPECT_EQ(line.rfind("epoch " + std::to_string(++n) + " train_loss ", 0), 0u) << line;
  }
  EXPECT_EQ(n, 3u);
}

TEST(Training, SeededRunsAreIdentical) {
  const auto toy = testing::toy_corpus(12, 4);
  TrainConfig config = toy_config(Variant::kConstituency);
  config.max_epochs = 4;
  const auto a = fit(toy.constituency, {}, config, 3);
  const auto b = fit(toy.constituency, {}, config, 3);
  const auto pa = a.model.parameters();
  const auto pb = b.model.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i]->value, pb[i]->value) << pa[i]->name;
  config.seed = 2;
  const auto c = fit(toy.constituency, {}, config, 3);
  EXPECT_NE(c.model.head().hidden_w.value, a.model.head().hidden_w.value);
}

TEST(Training, FrozenGroupsStayFixed) {
  const auto toy = testing::toy_corpus(12, 5);
  TrainConfig config = toy_config(Variant::kConstituency);
  config.max_epochs = 3;
  config.train_embeddings = false;
  Model m = testing::make_model(toy.constituency, shape_of(config, 3), 1);
  const Matrix emb = m.embeddings().vectors.value;
  const Matrix comp = m.rae().comp_w.value;
  const Matrix conv = m.c_window().parent.value;
  const auto samples = whole_sentences(toy.constituency);
  train(m, samples, samples, config);
  EXPECT_EQ(m.embeddings().vectors.value, emb);
  EXPECT_EQ(m.rae().comp_w.value, comp);
  EXPECT_NE(m.c_window().parent.value, conv);
}

TEST(Training, RejectsEmptySplits) {
  const auto toy = testing::toy_corpus(3, 6);
  TrainConfig config = toy_config(Variant::kDependency);
  Model m = testing::make_model(toy.dependency, shape_of(config, 3), 1);
  const auto samples = whole_sentences(toy.dependency);
  EXPECT_THROW(train(m, {}, samples, config), ConfigError);
  EXPECT_THROW(train(m, samples, {}, config), ConfigError);
}

TEST(Buckets, StandardEdgesAndLabels) {
  const LengthBuckets b = LengthBuckets::standard();
  ASSERT_EQ(b.count(), 7u);
  EXPECT_EQ(b.label(0), "<=10");
  EXPECT_EQ(b.label(1), "11-15");
  EXPECT_EQ(b.label(6), ">=36");
  EXPECT_EQ(b.bucket_of(1), 0u);
  EXPECT_EQ(b.bucket_of(10), 0u);
  EXPECT_EQ(b.bucket_of(11), 1u);
  EXPECT_EQ(b.bucket_of(35), 5u);
  EXPECT_EQ(b.bucket_of(36), 6u);
  EXPECT_EQ(b.bucket_of(500), 6u);
  EXPECT_THROW(LengthBuckets({5, 5}), ConfigError);
}

TEST(Evaluation, BucketsPartitionTheSamples) {
  const auto toy = testing::toy_corpus(20, 7);
  Model m = testing::make_model(toy.dependency, shape_of(toy_config(Variant::kDependency), 3), 1);
  const auto samples = whole_sentences(toy.dependency);
  const LengthBuckets buckets({4, 6});
  const EvalReport r = evaluate(m, samples, buckets);
  EXPECT_EQ(r.total, 20u);
  std::size_t total = 0, correct = 0;
  for (const auto& b : r.buckets) {
    total += b.total;
    correct += b.correct;
    EXPECT_EQ(b.accuracy.has_value(), b.total > 0);
  }
  EXPECT_EQ(total, r.total);
  EXPECT_EQ(correct, r.correct);
  EXPECT_DOUBLE_EQ(r.accuracy, accuracy(m, samples));
  std::ostringstream out;
  print_report(out, r);
  EXPECT_NE(out.str().find("<=4"), std::string::npos);
}

TEST(Evaluation, BinaryTransferSkipsNeutralGold) {
  std::vector<ParseTree> trees;
  for (std::size_t label = 0; label < 5; ++label) {
    trees.push_back(parse_constituency("(" + std::to_string(label) + " (2 a) (2 b))"));
  }
  TrainConfig config = toy_config(Variant::kConstituency);
  ModelShape shape = shape_of(config, 5);
  Model m = testing::make_model(trees, shape, 1);
  const auto samples = whole_sentences(trees);
  const EvalReport r = evaluate_binary(m, samples, LengthBuckets::standard());
  EXPECT_EQ(r.skipped, 1u);
  EXPECT_EQ(r.total, 4u);
  // Every sentence is the same, so exactly half the binary golds agree.
  EXPECT_EQ(r.correct, 2u);
  Model three = testing::make_model(trees, shape_of(config, 3), 1);
  EXPECT_THROW(evaluate_binary(three, samples, LengthBuckets::standard()), ConfigError);
}

TEST(GradCheck, PassesForEveryVariantAndCatchesCorruption) {
  const auto toy = testing::toy_corpus(3, 8);
  for (const Variant v : {Variant::kConstituency, Variant::kDependency, Variant::kBagOfEmbeddings}) {
    const auto& trees = v == Variant::kConstituency ? toy.constituency : toy.dependency;
    ModelShape shape;
    shape.variant = v;
    shape.n_e = shape.n_c = shape.n_h = 3;
    shape.num_classes = 3;
    shape.pooling = v == Variant::kConstituency ? PoolingStrategy::kThreeSlot : PoolingStrategy::kKSlot;
    Model m = testing::make_model(trees, shape, 2);
    GradCheckOptions opts;
    opts.lambda = 1e-3;
    const Matrix before = m.head().hidden_w.value;
    const auto r = gradient_check(m, trees[0], 1, opts);
    EXPECT_TRUE(r.passed(1e-4)) << to_string(v) << " " << r.max_rel_error;
    EXPECT_EQ(m.head().hidden_w.value, before);
    opts.corrupt = true;
    EXPECT_FALSE(gradient_check(m, trees[0], 1, opts).passed(1e-4));
  }
}

TEST(GradCheck, SamplesLargeModels) {
  const auto toy = testing::toy_corpus(3, 9);
  ModelShape shape;
  shape.n_e = 20;
  shape.n_c = 20;
  shape.n_h = 20;
  shape.num_classes = 3;
  Model m = testing::make_model(toy.dependency, shape, 1);
  GradCheckOptions opts;
  opts.sample_threshold = 100;
  opts.sample_fraction = 0.05;
  const auto r = gradient_check(m, toy.dependency[0], 0, opts);
  for (const auto& g : r.groups) {
    if (g.name == "head.hidden_w") EXPECT_EQ(g.checked, 40u);
  }
  EXPECT_TRUE(r.passed(1e-4)) << r.max_rel_error;
}

TEST(GradCheck, RelativeErrorFloor) {
  EXPECT_DOUBLE_EQ(relative_error(0.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(relative_error(2.0, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(relative_error(1e-10, 0.0), 1e-2);
}

}  // namespace
}  // namespace tbcnn
