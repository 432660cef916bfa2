#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "signspot/linker.hpp"

using namespace signspot;

namespace {

Box2D random_box(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(0, 8), size(0.5, 4), score(0, 1);
  const double x = pos(rng), y = pos(rng);
  return {x, y, x + size(rng), y + size(rng), score(rng)};
}

FrameBoxes random_frames(std::mt19937_64& rng, int T, int max_boxes) {
  FrameBoxes f(T);
  for (auto& frame : f) {
    const int n = 1 + static_cast<int>(rng() % max_boxes);
    for (int i = 0; i < n; ++i) frame.push_back(random_box(rng));
  }
  return f;
}

}  // namespace

TEST(FrameNms, Examples) {
  std::vector<Box2D> one{{0, 0, 1, 1, 0.3}};
  EXPECT_EQ(frame_nms_indices(one, 0.5, 10), (std::vector<std::size_t>{0}));
  std::vector<Box2D> same{{0, 0, 1, 1, 0.3}, {0, 0, 1, 1, 0.3}};
  EXPECT_EQ(frame_nms_indices(same, 0.5, 10), (std::vector<std::size_t>{0}));
  std::vector<Box2D> diff{{0, 0, 1, 1, 0.3}, {0, 0, 1, 1, 0.6}};
  EXPECT_EQ(frame_nms_indices(diff, 0.5, 10), (std::vector<std::size_t>{1}));
}

TEST(FrameNms, MatchesReferenceGreedy) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Box2D> boxes;
    for (int i = 0; i < 4; ++i) boxes.push_back(random_box(rng));
    const double thr = std::uniform_real_distribution<double>(0, 1)(rng);
    const std::size_t cap = 1 + rng() % 4;
    const auto got = frame_nms_indices(boxes, thr, cap);
    EXPECT_EQ(got, oracle::greedy_nms(boxes, thr, oracle::box_iou, cap));
    for (std::size_t i = 1; i < got.size(); ++i) EXPECT_GE(boxes[got[i - 1]].score, boxes[got[i]].score);
  }
}

TEST(LinkTube, SingleFrameTakesBestBox) {
  FrameBoxes f{{{0, 0, 1, 1, 0.2}, {0, 0, 1, 1, 0.7}, {0, 0, 1, 1, 0.7}}};
  const auto t = link_tube(f, {});
  EXPECT_EQ(t.indices, (std::vector<std::size_t>{1}));
  EXPECT_DOUBLE_EQ(t.score, 0.7);
}

TEST(LinkTube, UniqueSequence) {
  FrameBoxes f{{{0, 0, 2, 2, 0.5}}, {{1, 0, 3, 2, 0.25}}};
  LinkConfig cfg;
  cfg.lambda_link = 0.3;
  const auto t = link_tube(f, cfg);
  EXPECT_EQ(t.indices, (std::vector<std::size_t>{0, 0}));
  // (0.5 + 0.25 + 0.3 * 2/6) / 2
  EXPECT_NEAR(t.score, (0.75 + 0.1) / 2, 1e-15);
}

TEST(LinkTube, MatchesExhaustiveSearch) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const int T = 1 + static_cast<int>(rng() % 6);
    const auto frames = random_frames(rng, T, 4);
    LinkConfig cfg;
    cfg.lambda_link = std::uniform_real_distribution<double>(0, 1)(rng);
    const auto t = link_tube(frames, cfg);
    const auto o = oracle::tube_enumerate(frames, cfg.lambda_link);
    EXPECT_NEAR(t.score, o.score, 1e-12);
    EXPECT_EQ(t.indices, o.indices);
  }
}

TEST(LinkTube, TiesPickLexicographicallySmallest) {
  Box2D b{0, 0, 1, 1, 0.5};
  FrameBoxes f{{b, b}, {b, b}, {b, b}};
  EXPECT_EQ(link_tube(f, {}).indices, (std::vector<std::size_t>{0, 0, 0}));
}

TEST(LinkTube, DominatedBoxesDoNotChangeChoice) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int T = 2 + static_cast<int>(rng() % 4);
    auto frames = random_frames(rng, T, 3);
    const auto before = link_tube(frames, {});
    for (auto& fr : frames) fr.push_back({100, 100, 101, 101, 0.0});
    const auto after = link_tube(frames, {});
    EXPECT_EQ(before.indices, after.indices);
    EXPECT_DOUBLE_EQ(before.score, after.score);
  }
}

TEST(LinkTube, EmptyFrameThrows) {
  FrameBoxes f{{{0, 0, 1, 1, 0.5}}, {}};
  EXPECT_THROW(link_tube(f, {}), ValidationError);
}

TEST(SmoothTube, Examples) {
  std::vector<Box2D> drift{{0, 0, 2, 2, 0.1}, {1, 1, 3, 3, 0.2}, {2, 2, 4, 4, 0.3}};
  const auto s0 = smooth_tube(drift, 0);
  for (std::size_t i = 0; i < drift.size(); ++i) EXPECT_DOUBLE_EQ(s0[i].x1, drift[i].x1);
  const auto s1 = smooth_tube(drift, 1);
  EXPECT_DOUBLE_EQ(s1[1].x1, 1.0);
  EXPECT_DOUBLE_EQ(s1[1].y2, 3.0);
  EXPECT_DOUBLE_EQ(s1[1].score, 0.2);
  // Edge window is clipped to frames 0..1.
  EXPECT_DOUBLE_EQ(s1[0].x1, 0.5);

  std::vector<Box2D> constant(5, Box2D{1, 2, 3, 4, 0.5});
  for (const auto& b : smooth_tube(constant, 2)) {
    EXPECT_DOUBLE_EQ(b.x1, 1);
    EXPECT_DOUBLE_EQ(b.y2, 4);
  }
}

TEST(SmoothTube, PreservesValidity) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Box2D> boxes;
    for (int i = 0; i < 8; ++i) boxes.push_back(random_box(rng));
    for (const auto& b : smooth_tube(boxes, static_cast<int>(rng() % 4))) EXPECT_TRUE(b.valid());
  }
}

TEST(PeaksToBoxes, Examples) {
  Tensor2D single(4, 4, 0.0);
  single(1, 2) = 1.0;
  const auto one = peaks_to_boxes(single, 1, 0.25, {40, 40});
  ASSERT_EQ(one.size(), 1u);
  // Cell (1, 2) centre is (25, 15); box 10 x 10.
  EXPECT_DOUBLE_EQ(one[0].x1, 20);
  EXPECT_DOUBLE_EQ(one[0].x2, 30);
  EXPECT_DOUBLE_EQ(one[0].y1, 10);
  EXPECT_DOUBLE_EQ(one[0].y2, 20);
  EXPECT_DOUBLE_EQ(one[0].score, 1.0);

  Tensor2D uniform(2, 3, 0.5);
  const auto two = peaks_to_boxes(uniform, 2, 0.1, {30, 20});
  ASSERT_EQ(two.size(), 2u);
  EXPECT_DOUBLE_EQ(0.5 * (two[0].x1 + two[0].x2), 5);   // cell (0,0)
  EXPECT_DOUBLE_EQ(0.5 * (two[1].x1 + two[1].x2), 15);  // cell (0,1)

  Tensor2D peaks(3, 3, 0.0);
  peaks(0, 0) = 0.4;
  peaks(2, 1) = 0.9;
  const auto both = peaks_to_boxes(peaks, 2, 0.5, {30, 30});
  EXPECT_DOUBLE_EQ(both[0].score, 0.9);
  EXPECT_DOUBLE_EQ(both[1].score, 0.4);
  // Peak (0,0) centre (5,5); the 15x15 box is clipped at the frame corner.
  EXPECT_DOUBLE_EQ(both[1].x1, 0);
  EXPECT_DOUBLE_EQ(both[1].x2, 12.5);
  EXPECT_THROW(peaks_to_boxes(peaks, 0, 0.5, {30, 30}), ValidationError);
}
