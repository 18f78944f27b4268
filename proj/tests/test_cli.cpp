#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <gtest/gtest.h>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include "support/synthetic.hpp"
#include "tbcnn/checkpoint.hpp"
#include "tbcnn/cli.hpp"
#include "tbcnn/corpus_io.hpp"

namespace tbcnn {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "tbcnn");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("tbcnn_cli_" + std::to_string(getpid()));
    fs::create_directories(dir);
    const auto toy = testing::toy_corpus(12, 3);
    std::ofstream conll(dir / "toy.conll"), labels(dir / "toy.lbl"), trees(dir / "toy.txt");
    for (std::size_t i = 0; i < toy.dependency.size(); ++i) {
      conll << to_conll(toy.dependency[i]) << '\n';
      labels << "class" << *toy.dependency[i].sentence_label << '\t' << i + 1 << '\n';
      trees << to_bracketed(toy.constituency[i]) << '\n';
    }
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string path(const std::string& name) const { return (dir / name).string(); }

  std::vector<std::string> small_d() const {
    return {"train", "--variant", "d", "--train", path("toy.conll"), "--labels", path("toy.lbl"),
            "--n-e", "4", "--n-c", "6", "--n-h", "4", "--epochs", "2", "--batch", "4"};
  }

  fs::path dir;
};

TEST_F(Cli, TrainEvalAndVisualizeDependencyModel) {
  auto args = small_d();
  args.insert(args.end(), {"--out", path("d.ckpt"), "--report", path("report.json")});
  const Result train = run(args);
  ASSERT_EQ(train.code, kExitOk) << train.err;
  EXPECT_NE(train.out.find("epoch 1 train_loss"), std::string::npos);
  EXPECT_NE(train.out.find("epoch 2 train_loss"), std::string::npos);
  ASSERT_TRUE(fs::exists(path("d.ckpt")));
  ASSERT_TRUE(fs::exists(path("report.json")));
  const Checkpoint ckpt = load_checkpoint_file(path("d.ckpt"));
  EXPECT_EQ(ckpt.model.labels().names(), (std::vector<std::string>{"class0", "class1", "class2"}));
  EXPECT_EQ(ckpt.config.max_epochs, 2u);

  const Result eval = run({"eval", "--model", path("d.ckpt"), "--test", path("toy.conll"),
                           "--labels", path("toy.lbl")});
  ASSERT_EQ(eval.code, kExitOk) << eval.err;
  EXPECT_EQ(eval.out.rfind("accuracy ", 0), 0u);
  EXPECT_NE(eval.out.find("<=10"), std::string::npos);

  const Result viz = run({"visualize", "--model", path("d.ckpt"), "--corpus", path("toy.conll"),
                          "--out", path("viz")});
  ASSERT_EQ(viz.code, kExitOk) << viz.err;
  for (int i = 1; i <= 12; ++i) {
    EXPECT_TRUE(fs::exists(path("viz_" + std::to_string(i) + ".dot")));
    EXPECT_TRUE(fs::exists(path("viz_" + std::to_string(i) + ".json")));
  }
  EXPECT_FALSE(fs::exists(path("viz_13.dot")));
}

TEST_F(Cli, TrainConstituencyModelWithConfigFile) {
  std::ofstream(path("c.cfg")) << "[model]\nvariant = c\nn_e = 4\nn_c = 5\nn_h = 3\n"
                                  "[train]\nmax_epochs = 2\nbatch_size = 4\n[rae]\nmax_epochs = 2\n";
  const Result r = run({"train", "--config", path("c.cfg"), "--train", path("toy.txt"),
                        "--out", path("c.ckpt"), "--rae-out", path("c.rae")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("rae heldout_loss"), std::string::npos);
  const Checkpoint ckpt = load_checkpoint_file(path("c.ckpt"));
  EXPECT_EQ(ckpt.model.shape().variant, Variant::kConstituency);
  EXPECT_EQ(ckpt.model.shape().pooling, PoolingStrategy::kThreeSlot);
  EXPECT_EQ(ckpt.model.shape().n_c, 5u);
  EXPECT_EQ(load_rae_file(path("c.rae")).comp_w.value, ckpt.model.rae().comp_w.value);

  // The saved composition is reused as-is.
  const Result again = run({"train", "--config", path("c.cfg"), "--train", path("toy.txt"),
                            "--rae", path("c.rae"), "--out", path("c2.ckpt")});
  ASSERT_EQ(again.code, kExitOk) << again.err;
  EXPECT_EQ(again.out.find("rae heldout_loss"), std::string::npos);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run({"train", "--train", path("missing.conll")}).code, kExitData);
  EXPECT_EQ(run({"train", "--train", path("toy.conll")}).code, kExitData);  // no labels

  std::ofstream(path("bad.cfg")) << "[model]\nwidth = 3\n";
  const Result bad = run({"train", "--config", path("bad.cfg"), "--train", path("toy.txt")});
  EXPECT_EQ(bad.code, kExitConfig);
  EXPECT_NE(bad.err.find("bad.cfg:2:"), std::string::npos) << bad.err;

  // Constituency text handed to a dependency model.
  EXPECT_EQ(run({"train", "--variant", "d", "--train", path("toy.txt")}).code, kExitConfig);
  EXPECT_EQ(run({"train", "--variant", "c", "--pooling", "kslot", "--train", path("toy.txt")}).code,
            kExitConfig);
  EXPECT_EQ(run({"train", "--bogus"}).code, kExitConfig);
  EXPECT_EQ(run({}).code, kExitConfig);
  EXPECT_EQ(run({"--help"}).code, kExitOk);

  std::ofstream(path("broken.ckpt")) << "TBCNN-CKPT 7\n";
  EXPECT_EQ(run({"eval", "--model", path("broken.ckpt"), "--test", path("toy.conll")}).code,
            kExitData);
}

TEST_F(Cli, GradcheckPassesAndDetectsCorruption) {
  for (const std::string v : {"c", "d"}) {
    const Result ok = run({"gradcheck", "--variant", v});
    EXPECT_EQ(ok.code, kExitOk) << ok.out << ok.err;
    EXPECT_NE(ok.out.find("PASS"), std::string::npos);
    const Result bad = run({"gradcheck", "--variant", v, "--corrupt-gradient"});
    EXPECT_EQ(bad.code, kExitCheckFailed);
    EXPECT_NE(bad.out.find("FAIL"), std::string::npos);
  }
  const Result frozen = run({"gradcheck", "--variant", "c", "--pooling", "global",
                             "--freeze-embeddings", "--lambda", "1e-5"});
  EXPECT_EQ(frozen.code, kExitOk) << frozen.out;
  EXPECT_NE(frozen.out.find("frozen"), std::string::npos);
}

TEST_F(Cli, PretrainRae) {
  const Result r = run({"pretrain-rae", "--train", path("toy.txt"), "--n-e", "4", "--rae-epochs",
                        "2", "--out", path("p.rae")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("rae_epoch 0 heldout_loss"), std::string::npos);
  EXPECT_EQ(load_rae_file(path("p.rae")).dim(), 4u);
}

TEST_F(Cli, BinaryProcessReportsExitStatus) {
  const std::string cmd = std::string(TBCNN_CLI_PATH) + " train --train " +
                          path("missing.conll") + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), kExitData);
  const std::string grad = std::string(TBCNN_CLI_PATH) +
                           " gradcheck --variant d --corrupt-gradient > /dev/null 2>&1";
  const int s2 = std::system(grad.c_str());
  ASSERT_TRUE(WIFEXITED(s2));
  EXPECT_EQ(WEXITSTATUS(s2), kExitCheckFailed);
}

}  // namespace
}  // namespace tbcnn
