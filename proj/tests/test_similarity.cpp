#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "riss/similarity.hpp"

using namespace riss;

namespace {

std::vector<std::string> chars(const std::string& s) { return tokenize(s, TokenMode::Char); }

ParseTree to_parse_tree(const oracle::Shape& s, const std::vector<std::string>& labels) {
  std::vector<ParseTree> nodes(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) nodes[i].label = labels[i];
  // Children appear after their parent in preorder; attach from the back.
  for (std::size_t i = s.size(); i-- > 1;) {
    auto& kids = nodes[static_cast<std::size_t>(s.parent[i])].children;
    kids.insert(kids.begin(), std::move(nodes[i]));
  }
  return std::move(nodes[0]);
}

std::vector<std::string> labels_from_mask(std::size_t n, unsigned mask) {
  std::vector<std::string> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = (mask >> i & 1u) ? "b" : "a";
  return out;
}

}  // namespace

TEST(EditDistance, KittenSitting) {
  EXPECT_EQ(weighted_edit_distance(chars("kitten"), chars("sitting")), 5u);
  EXPECT_DOUBLE_EQ(lev_sim(chars("kitten"), chars("sitting")), 8.0 / 13.0);
}

TEST(EditDistance, ReplaceCostsTwo) {
  EXPECT_EQ(weighted_edit_distance(chars("a"), chars("b")), 2u);
  EXPECT_EQ(weighted_edit_distance(chars("abc"), chars("abc")), 0u);
  EXPECT_EQ(weighted_edit_distance(std::vector<std::string>{}, chars("abc")), 3u);
  EXPECT_DOUBLE_EQ(lev_sim(chars("abc"), chars("xyz")), 0.0);
  EXPECT_DOUBLE_EQ(lev_sim(std::vector<std::string>{}, chars("x")), 0.0);
  EXPECT_THROW(lev_sim(std::vector<std::string>{}, std::vector<std::string>{}), DomainError);
}

TEST(EditDistance, MatchesShortestEditScripts) {
  const oracle::EditScriptGraph g(3, 5);
  std::size_t checked = 0;
  for (std::size_t s = 0; s < g.size(); ++s) {
    const auto a = g.decode(s);
    if (a.size() > 4) break;
    const auto dist = g.distances_from(s);
    for (std::size_t t = 0; t < g.size(); ++t) {
      const auto b = g.decode(t);
      if (b.size() > 4) break;
      ASSERT_EQ(weighted_edit_distance<int>(a, b), dist[t]);
      ++checked;
    }
  }
  EXPECT_EQ(checked, 121u * 121u);
}

TEST(EditDistance, LcsIdentityAndSymmetry) {
  std::mt19937 rng(3);
  for (int i = 0; i < 2000; ++i) {
    std::vector<int> a(rng() % 9), b(rng() % 9);
    for (auto& x : a) x = static_cast<int>(rng() % 3);
    for (auto& x : b) x = static_cast<int>(rng() % 3);
    const std::size_t lcs = oracle::lcs_brute(a, b);
    EXPECT_EQ(weighted_edit_distance<int>(a, b), a.size() + b.size() - 2 * lcs);
    EXPECT_EQ(weighted_edit_distance<int>(a, b), weighted_edit_distance<int>(b, a));
    if (!a.empty() || !b.empty()) {
      const double s = lev_sim<int>(a, b);
      EXPECT_GE(s, 0.0);
      EXPECT_LE(s, 1.0);
      EXPECT_EQ(s == 1.0, a == b);
    }
  }
}

TEST(Truncate, KeepsThreeLevels) {
  const auto t = parse_bracketed_tree("(S (NP (DT the) (NN cat)) (VP (V sat)))");
  const auto cut = truncate_tree(t, 3);
  EXPECT_EQ(to_bracketed(cut), "(S (NP DT NN) (VP V))");
  EXPECT_EQ(to_bracketed(truncate_tree(t, 1)), "(S)");
  EXPECT_EQ(truncate_tree(t, 10), t);
  EXPECT_THROW(truncate_tree(t, 0), DomainError);
}

TEST(TreeEdit, Fixtures) {
  const auto a = parse_bracketed_tree("(S (NP) (VP))");
  const auto b = parse_bracketed_tree("(S (NP))");
  EXPECT_EQ(tree_edit_distance(a, b), 1u);
  EXPECT_NEAR(syn_sim(a, b), 2.0 / 3.0, 1e-12);
  EXPECT_EQ(tree_edit_distance(a, a), 0u);
  EXPECT_DOUBLE_EQ(syn_sim(a, a), 1.0);

  const auto c = parse_bracketed_tree("(S (VP) (NP))");
  EXPECT_EQ(tree_edit_distance(a, c), 2u);
  EXPECT_EQ(tree_edit_distance(a, c, TreeEditCosts{1, 1, 2}), 2u);

  const auto np = parse_bracketed_tree("(S (NP))");
  const auto vp = parse_bracketed_tree("(S (VP))");
  EXPECT_EQ(tree_edit_distance(np, vp), 1u);
  EXPECT_EQ(tree_edit_distance(np, vp, TreeEditCosts{1, 1, 2}), 2u);
}

TEST(TreeEdit, ClassicZhangShashaExample) {
  // f(d(a c(b)) e) vs f(c(d(a b)) e): distance 2 under unit costs.
  const auto t1 = parse_bracketed_tree("(f (d a (c b)) e)");
  const auto t2 = parse_bracketed_tree("(f (c (d a b)) e)");
  EXPECT_EQ(tree_edit_distance(t1, t2), 2u);
}

TEST(TreeEdit, SynSimIgnoresDeepStructure) {
  const auto a = parse_bracketed_tree("(S (NP (DT the) (NN cat)) (VP (V sat)))");
  const auto b = parse_bracketed_tree("(S (NP (DT a) (NN dog)) (VP (V ran)))");
  EXPECT_DOUBLE_EQ(syn_sim(a, b), 1.0);
  EXPECT_LT(syn_sim(a, b, 4), 1.0);
}

TEST(TreeEdit, MatchesExhaustiveMappingsSmall) {
  // All trees up to 4 nodes with 2 labels, every relabel cost.
  std::vector<std::pair<oracle::Shape, std::size_t>> shapes;
  for (int n = 1; n <= 4; ++n)
    for (auto& s : oracle::shapes(n)) shapes.push_back({s, 0});
  for (const auto& [sa, _a] : shapes) {
    for (const auto& [sb, _b] : shapes) {
      const auto mappings = oracle::all_mappings(sa, sb);
      for (unsigned la = 0; la < (1u << sa.size()); ++la) {
        for (unsigned lb = 0; lb < (1u << sb.size()); ++lb) {
          const auto l1 = labels_from_mask(sa.size(), la), l2 = labels_from_mask(sb.size(), lb);
          const auto t1 = to_parse_tree(sa, l1), t2 = to_parse_tree(sb, l2);
          for (std::size_t rel : {1u, 2u}) {
            ASSERT_EQ(tree_edit_distance(t1, t2, TreeEditCosts{1, 1, rel}),
                      oracle::mapping_distance(sa, l1, sb, l2, mappings, 1, 1, rel))
                << to_bracketed(t1) << " vs " << to_bracketed(t2) << " relabel " << rel;
          }
        }
      }
    }
  }
}

TEST(TreeEdit, ShapeCountsAreCatalan) {
  const std::size_t catalan[] = {1, 1, 2, 5, 14, 42};
  for (int n = 1; n <= 6; ++n) EXPECT_EQ(oracle::shapes(n).size(), catalan[n - 1]);
}

TEST(TreeEdit, RandomTreesSymmetricAndBounded) {
  std::mt19937 rng(17);
  auto all = oracle::shapes(5);
  for (int n = 1; n <= 4; ++n)
    for (auto& s : oracle::shapes(n)) all.push_back(s);
  for (int i = 0; i < 500; ++i) {
    const auto& sa = all[rng() % all.size()];
    const auto& sb = all[rng() % all.size()];
    const auto t1 = to_parse_tree(sa, labels_from_mask(sa.size(), rng()));
    const auto t2 = to_parse_tree(sb, labels_from_mask(sb.size(), rng()));
    const auto d = tree_edit_distance(t1, t2);
    EXPECT_EQ(d, tree_edit_distance(t2, t1));
    EXPECT_LE(d, sa.size() + sb.size());
    const double s = syn_sim(t1, t2, 6);
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
  }
}

TEST(Cosine, Fixtures) {
  EXPECT_NEAR(sem_sim(std::vector<double>{1, 0}, std::vector<double>{1, 1}), 0.70711, 1e-5);
  EXPECT_DOUBLE_EQ(sem_sim(std::vector<double>{1, 2}, std::vector<double>{2, 4}), 1.0);
  EXPECT_DOUBLE_EQ(sem_sim(std::vector<double>{1, 0}, std::vector<double>{-1, 0}), -1.0);
  EXPECT_THROW(sem_sim(std::vector<double>{1, 0}, std::vector<double>{1}), DomainError);
  EXPECT_THROW(sem_sim(std::vector<double>{0, 0}, std::vector<double>{1, 0}), DomainError);
  EXPECT_THROW(sem_sim(std::vector<double>{}, std::vector<double>{}), DomainError);
}

TEST(HashedEmbedding, NormalizedAndDeterministic) {
  const auto s = Sentence::make("x", "今天 天气很好", TokenMode::Char);
  const auto v = hashed_char_ngram_embedding(s, 64, 2);
  double norm = 0;
  for (double x : v) norm += x * x;
  EXPECT_NEAR(norm, 1.0, 1e-12);
  EXPECT_EQ(v, hashed_char_ngram_embedding(s, 64, 2));
  EXPECT_NEAR(sem_sim(v, v), 1.0, 1e-12);
  // Spaces are ignored.
  EXPECT_EQ(v, hashed_char_ngram_embedding(Sentence::make("y", "今天天气很好", TokenMode::Char), 64, 2));
  EXPECT_THROW(hashed_char_ngram_embedding(s, 4, 2), DomainError);
  EXPECT_THROW(hashed_char_ngram_embedding(Sentence::make("z", "a", TokenMode::Char), 64, 2), DomainError);
}
