#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "riss/idiom.hpp"

using namespace riss;
using namespace riss::idiom;

namespace {

const std::string kTable6Source =
    "如果我们无法找到内心的平和，那么去别处寻找无疑是缘木求鱼。[SEP] 如果我们无法找到内心的平和，那么去别处寻找无疑是 "
    "<extra_id_0>。";
const std::string kTable6Target = "<extra_id_0> 没有意义的 [null]<extra_id_1>";

std::string read_file(const std::string& name) {
  std::ifstream in(std::string(RISS_DATA_DIR) + "/" + name, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

DistributionTrack one_hot_track(const std::vector<std::size_t>& targets, std::size_t vocab) {
  DistributionTrack t;
  for (auto k : targets) {
    std::vector<double> p(vocab, 0.0);
    p[k] = 1.0;
    t.probs.push_back(p);
  }
  return t;
}

}  // namespace

TEST(Cip, Table6Record) {
  const auto r = parse_cip_record(kTable6Source, kTable6Target, TokenMode::Char, "t6");
  EXPECT_EQ(r.idiom, "缘木求鱼");
  EXPECT_EQ(r.explanation, "没有意义的");
  EXPECT_EQ(r.original_sentence, "如果我们无法找到内心的平和，那么去别处寻找无疑是缘木求鱼。");
  EXPECT_EQ(r.target_sentence, "如果我们无法找到内心的平和，那么去别处寻找无疑是 没有意义的。");
  EXPECT_EQ(r.explanation_span.begin, 24u);
  EXPECT_EQ(r.explanation_span.end, 29u);
  std::string rebuilt;
  for (std::size_t i = r.explanation_span.begin; i < r.explanation_span.end; ++i) rebuilt += r.target_sentence_tokens[i];
  EXPECT_EQ(rebuilt, r.explanation);
}

TEST(Cip, WordMode) {
  const auto r = parse_cip_record("he was at sixes and sevens today [SEP] he was <extra_id_0> today",
                                  "<extra_id_0> confused [null]<extra_id_1>", TokenMode::Word);
  EXPECT_EQ(r.idiom, "at sixes and sevens");
  EXPECT_EQ(r.target_sentence_tokens, (std::vector<std::string>{"he", "was", "confused", "today"}));
  EXPECT_EQ(r.explanation_span.begin, 2u);
  EXPECT_EQ(r.explanation_span.end, 3u);
}

TEST(Cip, SpanPrefersOccurrenceAtTheMask) {
  // The explanation text also occurs earlier in the sentence.
  const auto r = parse_cip_record("好的开始好的结局画蛇添足 [SEP] 好的开始好的结局<extra_id_0>", "<extra_id_0>好的 [null]");
  EXPECT_EQ(r.idiom, "画蛇添足");
  EXPECT_EQ(r.explanation_span.begin, 8u);
  EXPECT_EQ(r.explanation_span.end, 10u);
}

TEST(Cip, MalformedRecords) {
  EXPECT_THROW(parse_cip_record("没有分隔符 <extra_id_0>", kTable6Target), ParseError);
  EXPECT_THROW(parse_cip_record("a [SEP] b [SEP] <extra_id_0>", kTable6Target), ParseError);
  EXPECT_THROW(parse_cip_record("原句 [SEP] 没有标记", kTable6Target), ParseError);
  EXPECT_THROW(parse_cip_record("画蛇添足自相矛盾 [SEP] <extra_id_0><extra_id_1>", kTable6Target), ValidationError);
  EXPECT_THROW(parse_cip_record("甲乙丙 [SEP] 丁<extra_id_0>", kTable6Target), ValidationError);
  EXPECT_THROW(parse_cip_record("甲乙丙 [SEP] 甲<extra_id_0>", "没有标记"), ParseError);
  EXPECT_THROW(parse_cip_record("甲乙丙 [SEP] 甲<extra_id_0>", "<extra_id_0>  [null]"), ValidationError);
}

TEST(Dictionary, GroupsByIdiomSortedById) {
  const auto a = parse_cip_record(kTable6Source, kTable6Target, TokenMode::Char, "b");
  const auto b = parse_cip_record(kTable6Source, kTable6Target, TokenMode::Char, "a");
  const auto dict = build_idiom_dictionary({a, b});
  ASSERT_EQ(dict.size(), 1u);
  const auto& entries = dict.at("缘木求鱼");
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(entries[0].record_id, "a");
  EXPECT_EQ(entries[1].span.begin, 24u);

  auto broken = a;
  broken.explanation_span = Span{3, 100};
  EXPECT_THROW(build_idiom_dictionary({broken}), ValidationError);
}

TEST(Prompts, BytesMatchGoldenFiles) {
  EXPECT_EQ(std::string(prompt(Task::Idiom)), read_file("prompt_idiom.golden"));
  EXPECT_EQ(std::string(prompt(Task::Simplify)), read_file("prompt_simplify.golden"));
  EXPECT_EQ(prepend_prompt(Task::Idiom, "X"), read_file("prompt_idiom.golden") + "X");
  EXPECT_EQ(prepend_prompt(Task::Simplify, "X"), read_file("prompt_simplify.golden") + "X");
  EXPECT_THROW(prepend_prompt(Task::Idiom, ""), ValidationError);
}

TEST(Prompts, StripInvertsPrepend) {
  for (auto task : {Task::Idiom, Task::Simplify}) {
    EXPECT_EQ(strip_prompt(task, prepend_prompt(task, "缘木求鱼")), "缘木求鱼");
  }
  EXPECT_FALSE(strip_prompt(Task::Idiom, prepend_prompt(Task::Simplify, "x")));
}

TEST(Loss, PerfectPredictionIsZero) {
  const std::vector<std::size_t> targets{0, 1, 2, 3};
  const auto r = ias_loss(one_hot_track(targets, 4), targets, Span{1, 3});
  EXPECT_EQ(r.sentence_loss, 0.0);
  EXPECT_EQ(r.idiom_loss, 0.0);
  EXPECT_EQ(r.total, 0.0);
}

TEST(Loss, UniformSpanFixture) {
  const std::vector<std::size_t> targets{0, 1, 2, 3};
  auto track = one_hot_track(targets, 4);
  track.probs[1] = {0.25, 0.25, 0.25, 0.25};
  const auto r = ias_loss(track, targets, Span{1, 2});
  EXPECT_NEAR(r.sentence_loss, std::log(4.0) / 4.0, 1e-15);
  EXPECT_NEAR(r.idiom_loss, std::log(4.0), 1e-15);
  EXPECT_NEAR(r.sentence_loss, 0.3466, 1e-4);
  EXPECT_NEAR(r.idiom_loss, 1.3863, 1e-4);
  EXPECT_NEAR(r.total, 1.7329, 1e-4);
}

TEST(Loss, CrossEntropyUniform) {
  DistributionTrack t;
  t.probs.assign(3, std::vector<double>(4, 0.25));
  EXPECT_NEAR(cross_entropy(t, {0, 3, 1}), 1.3863, 1e-4);
  EXPECT_EQ(cross_entropy(t, {0, 3, 1}, Span{2, 2}), 0.0);
}

TEST(Loss, AdditivityOnRandomTracks) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    const std::size_t len = 1 + rng() % 12, vocab = 2 + rng() % 6;
    DistributionTrack t;
    std::vector<std::size_t> targets;
    for (std::size_t p = 0; p < len; ++p) {
      std::vector<double> d(vocab);
      double sum = 0;
      for (auto& x : d) sum += (x = u(rng));
      for (auto& x : d) x /= sum;
      t.probs.push_back(d);
      targets.push_back(rng() % vocab);
    }
    const std::size_t b = rng() % (len + 1);
    const std::size_t e = b + rng() % (len - b + 1);
    const auto r = ias_loss(t, targets, Span{b, e});
    EXPECT_EQ(r.total, r.sentence_loss + r.idiom_loss);
    EXPECT_EQ(r.sentence_loss, cross_entropy(t, targets));
    EXPECT_EQ(r.idiom_loss, cross_entropy(t, targets, Span{b, e}));
    EXPECT_NO_THROW(t.validate());
  }
}

TEST(Loss, ValidationAndClamping) {
  DistributionTrack bad;
  bad.probs = {{0.5, 0.4}};
  EXPECT_THROW(bad.validate(), ValidationError);
  bad.probs = {{1.5, -0.5}};
  EXPECT_THROW(bad.validate(), ValidationError);

  DistributionTrack zero;
  zero.probs = {{1.0, 0.0}};
  ClampCounter c;
  EXPECT_NEAR(cross_entropy(zero, {1}, std::nullopt, &c), -std::log(1e-12), 1e-9);
  EXPECT_EQ(c.events, 1u);

  EXPECT_THROW(cross_entropy(zero, {2}), ValidationError);
  EXPECT_THROW(cross_entropy(zero, {0}, Span{0, 2}), ValidationError);
  EXPECT_THROW(cross_entropy(zero, {0, 0}), ValidationError);
}
