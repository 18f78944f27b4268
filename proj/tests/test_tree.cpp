#include <gtest/gtest.h>

#include "support/synthetic.hpp"
#include "tbcnn/corpus_io.hpp"
#include "tbcnn/error.hpp"
#include "tbcnn/tree.hpp"

namespace tbcnn {
namespace {

ParseTree chain() {
  // the <- cat <- sat (root), on -> sat
  return parse_dependency(
      "1\tthe\t_\t_\t_\t_\t2\tdet\t_\t_\n"
      "2\tcat\t_\t_\t_\t_\t3\tnsubj\t_\t_\n"
      "3\tsat\t_\t_\t_\t_\t0\troot\t_\t_\n"
      "4\ton\t_\t_\t_\t_\t3\tprep\t_\t_\n");
}

TEST(Tree, DerivedQuantities) {
  const ParseTree t = chain();
  EXPECT_EQ(t.word_count(), 4u);
  EXPECT_EQ(t.max_depth(), 3u);
  EXPECT_EQ(t.text(), "the cat sat on");
  EXPECT_EQ(t.nodes[t.root].word, "sat");
  EXPECT_EQ(t.nodes[t.root].depth, 1u);
}

TEST(Tree, ConstituencyWordCountCountsLeavesOnly) {
  const ParseTree t = parse_constituency("(1 (2 a) (3 (2 b) (2 c)))");
  EXPECT_EQ(t.size(), 5u);
  EXPECT_EQ(t.word_count(), 3u);
  EXPECT_EQ(t.text(), "a b c");
  EXPECT_EQ(t.max_depth(), 3u);
}

TEST(Tree, RecomputeRestoresLinksAndDepths) {
  ParseTree t = chain();
  ParseTree broken = t;
  for (auto& n : broken.nodes) {
    n.parent.reset();
    n.depth = 0;
  }
  recompute_structure(broken);
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(broken.nodes[i].parent, t.nodes[i].parent);
    EXPECT_EQ(broken.nodes[i].depth, t.nodes[i].depth);
  }
  EXPECT_NO_THROW(validate(broken));
}

TEST(Tree, ValidateRejectsCorruption) {
  ParseTree t = chain();
  t.nodes[0].depth = 7;
  EXPECT_THROW(validate(t), StructureError);

  ParseTree two_parents = chain();
  two_parents.nodes[two_parents.root].children.push_back(two_parents.nodes[two_parents.root].children.front());
  EXPECT_THROW(recompute_structure(two_parents), StructureError);

  ParseTree empty;
  EXPECT_THROW(validate(empty), StructureError);
}

TEST(Tree, RandomTreesAreValid) {
  Rng rng(4);
  const std::vector<std::string> words{"x", "y", "z"};
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 1 + uniform_index(rng, 12);
    EXPECT_NO_THROW(validate(testing::random_dependency_tree(
        rng, testing::random_words(rng, n, words), {"a", "b"})));
    EXPECT_NO_THROW(validate(testing::random_constituency_tree(
        rng, testing::random_words(rng, n, words), 1, true)));
  }
}

}  // namespace
}  // namespace tbcnn
