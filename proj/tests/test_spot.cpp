#include <gtest/gtest.h>

#include <algorithm>

#include "spot_fixture.hpp"

using namespace signspot;

TEST(SlidingWindows, Layout) {
  const auto w = sliding_windows(64, 32, 8);
  ASSERT_EQ(w.size(), 5u);
  EXPECT_EQ(w[0], TimeSegment(0, 32));
  EXPECT_EQ(w[4], TimeSegment(32, 64));
  EXPECT_EQ(sliding_windows(10, 32, 8), (std::vector<TimeSegment>{TimeSegment(0, 10)}));
}

TEST(SpotLexical, Examples) {
  const std::map<std::string, int> vocab{{"book", 0}, {"read", 1}};
  const std::vector<WindowProb> w{{TimeSegment(0, 32), {0.9, 0.05}}};
  const auto hit = spot_lexical(w, {"I", "read", "a", "Book."}, vocab, 0.6);
  ASSERT_EQ(hit.size(), 1u);
  EXPECT_EQ(hit[0].word, "book");
  EXPECT_EQ(hit[0].kind, SignKind::kLexical);
  EXPECT_DOUBLE_EQ(hit[0].score, 0.9);

  const std::vector<WindowProb> low{{TimeSegment(0, 32), {0.5, 0.0}}};
  EXPECT_TRUE(spot_lexical(low, {"book"}, vocab, 0.6).empty());

  const std::vector<WindowProb> absent{{TimeSegment(0, 32), {0.99, 0.0}}};
  EXPECT_TRUE(spot_lexical(absent, {"read"}, vocab, 0.6).empty());
}

TEST(SpotLexical, OneBestWindowPerWord) {
  const std::map<std::string, int> vocab{{"book", 0}};
  const std::vector<WindowProb> w{{TimeSegment(16, 48), {0.8}}, {TimeSegment(0, 32), {0.8}},
                                  {TimeSegment(8, 40), {0.7}}};
  const auto hit = spot_lexical(w, {"book", "book"}, vocab, 0.6);
  ASSERT_EQ(hit.size(), 1u);
  EXPECT_EQ(hit[0].segment, TimeSegment(0, 32));  // tie → earliest
}

TEST(SpotFingerspelling, Examples) {
  const auto exact = spot_fingerspelling({{TimeSegment(0, 10), 0.9}}, {"smith"}, {"smith"}, 0.2, 0.5);
  ASSERT_EQ(exact.size(), 1u);
  EXPECT_DOUBLE_EQ(exact[0].distance, 0.0);

  EXPECT_TRUE(spot_fingerspelling({{TimeSegment(0, 10), 0.4}}, {"smith"}, {"smith"}, 0.2, 0.5).empty());
  EXPECT_TRUE(spot_fingerspelling({{TimeSegment(0, 10), 0.5}}, {"smith"}, {"smith"}, 0.2, 0.5).empty());

  const auto near = spot_fingerspelling({{TimeSegment(0, 10), 0.9}}, {"SMIT"}, {"SMITH"}, 0.2, 0.5);
  ASSERT_EQ(near.size(), 1u);
  EXPECT_EQ(near[0].word, "smith");
  EXPECT_DOUBLE_EQ(near[0].distance, 0.2);
  EXPECT_EQ(near[0].hypothesis, "SMIT");
}

TEST(SpotFingerspelling, ClosestProposalWinsPerWord) {
  const std::vector<ScoredSegment> props{{TimeSegment(0, 10), 0.9}, {TimeSegment(20, 30), 0.6},
                                         {TimeSegment(40, 50), 0.8}};
  const auto out = spot_fingerspelling(props, {"smit", "smith", "smith"}, {"smith"}, 0.2, 0.5);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].segment, TimeSegment(40, 50));  // distance 0, higher confidence
}

TEST(Spot, EmittedWordsComeFromSentence) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto c = fixture::noisy_case(rng);
    SpotConfig cfg;
    cfg.delta_l = 0.1;
    cfg.delta_f = 0.7;
    for (const auto& s : spot_signs(c.windows, c.vocab, c.proposals, c.hypotheses, c.sentence, cfg))
      EXPECT_NE(std::find(c.sentence.begin(), c.sentence.end(), s.word), c.sentence.end());
  }
}

TEST(Spot, MonotoneInThresholds) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const auto c = fixture::noisy_case(rng);
    std::size_t prev = SIZE_MAX;
    for (int k = 0; k <= 10; ++k) {
      const auto n = fixture::spotted_count(c, k / 10.0, 0.2);
      EXPECT_LE(n, prev);
      prev = n;
    }
    prev = 0;
    for (int k = 0; k <= 10; ++k) {
      const auto n = fixture::spotted_count(c, 0.6, k / 10.0);
      EXPECT_GE(n, prev);
      prev = n;
    }
  }
}

TEST(Spot, PermutationInvariant) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    auto c = fixture::noisy_case(rng);
    SpotConfig cfg;
    cfg.delta_l = 0.2;
    cfg.delta_f = 0.5;
    const auto a = spot_signs(c.windows, c.vocab, c.proposals, c.hypotheses, c.sentence, cfg);
    std::shuffle(c.windows.begin(), c.windows.end(), rng);
    std::vector<std::size_t> perm(c.proposals.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<ScoredSegment> props;
    std::vector<std::string> hyps;
    for (std::size_t i : perm) {
      props.push_back(c.proposals[i]);
      hyps.push_back(c.hypotheses[i]);
    }
    const auto b = spot_signs(c.windows, c.vocab, props, hyps, c.sentence, cfg);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].segment, b[i].segment);
      EXPECT_EQ(a[i].word, b[i].word);
      EXPECT_EQ(a[i].score, b[i].score);
    }
  }
}

TEST(Spot, DefaultsRecoverPlantedPairs) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const auto c = fixture::planted_case(rng);
    std::set<std::tuple<int, int, std::string>> got;
    for (const auto& s : spot_signs(c.windows, c.vocab, c.proposals, c.hypotheses, c.sentence, {}))
      got.emplace(s.segment.start, s.segment.end, s.word);
    EXPECT_EQ(got, c.planted);
  }
}

TEST(Spot, RejectsBadWindows) {
  const std::map<std::string, int> vocab{{"a", 0}, {"b", 1}};
  try {
    spot_signs({{TimeSegment(0, 32), {0.3, 0.3}}, {TimeSegment(8, 40), {0.9, 0.6}}}, vocab, {}, {}, {"a"}, {});
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_EQ(e.index(), 1u);
  }
  SpotConfig cfg;
  cfg.delta_l = 1.5;
  EXPECT_THROW(cfg.validate(), ValidationError);
}
