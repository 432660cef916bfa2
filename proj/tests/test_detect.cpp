#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "signspot/detect.hpp"

using namespace signspot;

TEST(FrameProbsToSegments, Examples) {
  const std::vector<double> all{0.9, 0.95, 0.8};
  const auto one = frame_probs_to_segments(all, {0.5});
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].segment, TimeSegment(0, 3));

  EXPECT_TRUE(frame_probs_to_segments({0.05, 0.01}, default_frame_thresholds()).empty());

  const auto two = frame_probs_to_segments({0.9, 0.2, 0.8, 0.8}, {0.5});
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[0].segment, TimeSegment(0, 1));
  EXPECT_DOUBLE_EQ(two[0].score, 0.9);
  EXPECT_EQ(two[1].segment, TimeSegment(2, 4));
  EXPECT_DOUBLE_EQ(two[1].score, 0.8);
}

TEST(FrameProbsToSegments, RunsTileSuperThresholdFrames) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> p(1 + rng() % 12);
    for (double& x : p) x = u(rng);
    const double thr = u(rng);
    const auto segs = frame_probs_to_segments(p, {thr});
    std::vector<int> covered(p.size(), 0);
    for (const auto& s : segs) {
      double sum = 0;
      for (int t = s.segment.start; t < s.segment.end; ++t) {
        ++covered[t];
        sum += p[t];
      }
      EXPECT_NEAR(s.score, sum / s.segment.length(), 1e-12);
    }
    for (std::size_t t = 0; t < p.size(); ++t) EXPECT_EQ(covered[t], p[t] >= thr ? 1 : 0);
  }
}

TEST(FrameProbsToSegments, MergesDuplicatesKeepingMax) {
  const auto segs = frame_probs_to_segments({0.1, 0.95, 0.1}, {0.9, 0.5});
  ASSERT_EQ(segs.size(), 1u);
  EXPECT_DOUBLE_EQ(segs[0].score, 0.95);
}

TEST(LabelAnchors, Examples) {
  DetectConfig cfg;
  const std::vector<TimeSegment> gts{TimeSegment(0, 4)};
  std::vector<RealSegment> anchors{RealSegment(0, 4), RealSegment(10, 12), RealSegment(0, 2),
                                   RealSegment(2, 6)};
  const auto lab = label_anchors(anchors, gts, cfg);
  EXPECT_EQ(lab[0].label, AnchorLabel::kPositive);
  EXPECT_EQ(lab[0].gt, 0u);
  EXPECT_EQ(lab[1].label, AnchorLabel::kNegative);
  EXPECT_DOUBLE_EQ(lab[2].best_iou, 0.5);
  EXPECT_EQ(lab[2].label, AnchorLabel::kIgnore);
  EXPECT_DOUBLE_EQ(lab[3].best_iou, 1.0 / 3);
  EXPECT_EQ(lab[3].label, AnchorLabel::kIgnore);
}

TEST(LabelAnchors, RaisingPositiveThresholdNeverAddsPositives) {
  std::mt19937_64 rng(10);
  AnchorSet set{{4, 8, 16}, 4, 10};
  const auto anchors = generate_anchors(set);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<TimeSegment> gts;
    for (int g = 0; g < 3; ++g) {
      const int s = static_cast<int>(rng() % 30);
      gts.emplace_back(s, s + 1 + static_cast<int>(rng() % 12));
    }
    std::size_t prev = anchors.size() + 1;
    for (double pos : {0.3, 0.5, 0.7, 0.9}) {
      DetectConfig cfg;
      cfg.pos_iou = pos;
      cfg.neg_iou = 0.3;
      std::size_t n = 0;
      for (const auto& a : label_anchors(anchors, gts, cfg)) n += a.label == AnchorLabel::kPositive;
      EXPECT_LE(n, prev);
      prev = n;
    }
  }
}

TEST(Anchors, LayoutAndScales) {
  const auto scales = AnchorSet::search_scales();
  ASSERT_EQ(scales.size(), 20u);
  EXPECT_DOUBLE_EQ(scales.front(), 1);
  EXPECT_DOUBLE_EQ(scales.back(), 75);
  AnchorSet set{{2, 4}, 8, 2};
  const auto a = generate_anchors(set);
  ASSERT_EQ(a.size(), 4u);
  EXPECT_DOUBLE_EQ(a[0].center(), 4);
  EXPECT_DOUBLE_EQ(a[0].length(), 2);
  EXPECT_DOUBLE_EQ(a[1].length(), 4);
  EXPECT_DOUBLE_EQ(a[2].center(), 12);
}

TEST(Delta, EncodeExamples) {
  const auto z = delta_encode(TimeSegment(3, 9), TimeSegment(3, 9));
  EXPECT_DOUBLE_EQ(z.center, 0);
  EXPECT_DOUBLE_EQ(z.log_length, 0);
  const auto d1 = delta_encode(TimeSegment(0, 4), TimeSegment(2, 6));
  EXPECT_DOUBLE_EQ(d1.center, 0.5);
  EXPECT_DOUBLE_EQ(d1.log_length, 0);
  const auto d2 = delta_encode(TimeSegment(0, 4), TimeSegment(0, 8));
  EXPECT_DOUBLE_EQ(d2.center, 0.5);
  EXPECT_DOUBLE_EQ(d2.log_length, std::log(2.0));
}

TEST(Delta, DecodeExamples) {
  const auto self = delta_decode(TimeSegment(5, 9), {0, 0});
  EXPECT_EQ(self.rounded, TimeSegment(5, 9));
  const auto d = delta_decode(TimeSegment(0, 4), {0.5, std::log(2.0)});
  EXPECT_NEAR(d.real.start, 0, 1e-12);
  EXPECT_NEAR(d.real.end, 8, 1e-12);
  EXPECT_EQ(d.rounded, TimeSegment(0, 8));
  EXPECT_FALSE(d.clamped);
}

TEST(Delta, DegenerateLengthIsClamped) {
  const auto d = delta_decode(TimeSegment(10, 14), {0, std::log(0.01)});
  EXPECT_TRUE(d.clamped);
  EXPECT_EQ(d.rounded.length(), 1);
}

TEST(Delta, RoundTrip) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> pos(0, 500), len(0.5, 300);
  for (int i = 0; i < 1000; ++i) {
    const double as = pos(rng), gs = pos(rng);
    RealSegment a(as, as + len(rng)), g(gs, gs + len(rng));
    const auto back = delta_decode(a, delta_encode(a, g)).real;
    EXPECT_LT(std::abs(back.start - g.start), 1e-9);
    EXPECT_LT(std::abs(back.end - g.end), 1e-9);
  }
}

TEST(TemporalNms, Examples) {
  std::vector<ScoredSegment> one{{TimeSegment(0, 3), 0.4}};
  EXPECT_EQ(temporal_nms(one, 0.5).size(), 1u);
  std::vector<ScoredSegment> same{{TimeSegment(0, 3), 0.4}, {TimeSegment(0, 3), 0.8}};
  const auto kept = temporal_nms(same, 0.5);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_DOUBLE_EQ(kept[0].score, 0.8);
}

TEST(TemporalNms, MatchesReferenceGreedy) {
  std::mt19937_64 rng(23);
  auto iou = [](const ScoredSegment& a, const ScoredSegment& b) {
    const int inter = std::max(0, std::min(a.segment.end, b.segment.end) - std::max(a.segment.start, b.segment.start));
    return double(inter) / double(a.segment.length() + b.segment.length() - inter);
  };
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ScoredSegment> segs;
    const int n = 1 + static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) {
      const int s = static_cast<int>(rng() % 10);
      segs.push_back({TimeSegment(s, s + 1 + static_cast<int>(rng() % 6)), double(rng() % 5) / 4.0});
    }
    const double thr = double(rng() % 10) / 10.0;
    EXPECT_EQ(temporal_nms_indices(segs, thr, segs.size()), oracle::greedy_nms(segs, thr, iou));
  }
}

TEST(FilterByConfidence, StrictlyAbove) {
  std::vector<ScoredSegment> segs{{TimeSegment(0, 1), 0.5}, {TimeSegment(1, 2), 0.51}};
  const auto kept = filter_by_confidence(segs, 0.5);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_DOUBLE_EQ(kept[0].score, 0.51);
}

TEST(DetectConfig, Validation) {
  DetectConfig cfg;
  cfg.neg_iou = 0.8;
  EXPECT_THROW(cfg.validate(), ValidationError);
}
