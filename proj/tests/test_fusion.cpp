#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "signspot/fusion.hpp"

using namespace signspot;

namespace {

Tensor2D random_tensor(std::mt19937_64& rng, std::size_t r, std::size_t c) {
  std::uniform_real_distribution<double> u(-1, 1);
  Tensor2D t(r, c);
  for (double& x : t.data()) x = u(rng);
  return t;
}

// Scalar-loop softmax(QK^T/sqrt(d))V.
Tensor2D loop_attention(const Tensor2D& q, const Tensor2D& k, const Tensor2D& v) {
  Tensor2D out(q.rows(), v.cols());
  for (std::size_t i = 0; i < q.rows(); ++i) {
    std::vector<double> w(k.rows());
    double z = 0;
    for (std::size_t j = 0; j < k.rows(); ++j) {
      double s = 0;
      for (std::size_t c = 0; c < q.cols(); ++c) s += q(i, c) * k(j, c);
      z += w[j] = std::exp(s / std::sqrt(double(q.cols())));
    }
    for (std::size_t j = 0; j < k.rows(); ++j)
      for (std::size_t c = 0; c < v.cols(); ++c) out(i, c) += w[j] / z * v(j, c);
  }
  return out;
}

double sigmoid(double x) { return 1 / (1 + std::exp(-x)); }

}  // namespace

TEST(Attention, SingleKeyReturnsValue) {
  const Tensor2D q{{0.3, -2}, {5, 1}}, k{{1, 1}}, v{{7, 8, 9}};
  const auto out = attention(q, k, v);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t c = 0; c < 3; ++c) EXPECT_DOUBLE_EQ(out(i, c), v(0, c));
}

TEST(Attention, EqualLogitsAverage) {
  const Tensor2D q{{1, 0}}, k{{0, 1}, {0, -1}}, v{{2, 4}, {6, 0}};
  const auto out = attention(q, k, v);
  EXPECT_DOUBLE_EQ(out(0, 0), 4);
  EXPECT_DOUBLE_EQ(out(0, 1), 2);
}

TEST(Attention, MatchesScalarComputation) {
  const Tensor2D q{{1, 0}, {0, 1}}, k{{1, 2}, {3, -1}}, v{{1, 0}, {0, 1}};
  const auto out = attention(q, k, v);
  // Row 0 logits (1, 3)/sqrt2; row 1 logits (2, -1)/sqrt2.
  const double r = std::sqrt(2.0);
  const double p0 = std::exp(1 / r) / (std::exp(1 / r) + std::exp(3 / r));
  const double p1 = std::exp(2 / r) / (std::exp(2 / r) + std::exp(-1 / r));
  EXPECT_NEAR(out(0, 0), p0, 1e-15);
  EXPECT_NEAR(out(0, 1), 1 - p0, 1e-15);
  EXPECT_NEAR(out(1, 0), p1, 1e-15);

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = random_tensor(rng, 3, 4), b = random_tensor(rng, 5, 4), c = random_tensor(rng, 5, 2);
    EXPECT_LT(max_abs_diff(attention(a, b, c), loop_attention(a, b, c)), 1e-14);
  }
  EXPECT_THROW(attention(Tensor2D(2, 3), Tensor2D(2, 2), Tensor2D(2, 2)), ValidationError);
}

TEST(Attention, RowsInConvexHullAndSoftmaxNormalized) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const auto q = random_tensor(rng, 4, 3) * 5.0, k = random_tensor(rng, 6, 3), v = random_tensor(rng, 6, 2);
    const auto s = softmax_rows(q);
    for (std::size_t i = 0; i < s.rows(); ++i) {
      double sum = 0;
      for (double x : s.row(i)) sum += x;
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
    const auto out = attention(q, k, v);
    for (std::size_t c = 0; c < v.cols(); ++c) {
      double lo = 1e9, hi = -1e9;
      for (std::size_t j = 0; j < v.rows(); ++j) {
        lo = std::min(lo, v(j, c));
        hi = std::max(hi, v(j, c));
      }
      for (std::size_t i = 0; i < out.rows(); ++i) {
        EXPECT_GE(out(i, c), lo - 1e-12);
        EXPECT_LE(out(i, c), hi + 1e-12);
      }
    }
  }
}

TEST(Multihead, SingleIdentityHeadIsAttention) {
  std::mt19937_64 rng(5);
  const auto q = random_tensor(rng, 3, 4), k = random_tensor(rng, 5, 4), v = random_tensor(rng, 5, 4);
  EXPECT_LT(max_abs_diff(multihead(q, k, v, HeadParams::identity(4, 1)), attention(q, k, v)), 1e-15);
}

TEST(Multihead, ZeroOutputProjection) {
  std::mt19937_64 rng(6);
  auto p = HeadParams::identity(4, 2);
  p.wo = Tensor2D(4, 4, 0.0);
  const auto x = random_tensor(rng, 3, 4);
  EXPECT_EQ(msa(x, p), Tensor2D(3, 4, 0.0));
}

TEST(Multihead, TwoHeadsComposeByHand) {
  std::mt19937_64 rng(7);
  HeadParams p;
  for (int h = 0; h < 2; ++h) {
    p.wq.push_back(random_tensor(rng, 4, 2));
    p.wk.push_back(random_tensor(rng, 4, 2));
    p.wv.push_back(random_tensor(rng, 4, 2));
  }
  p.wo = random_tensor(rng, 4, 4);
  const auto x = random_tensor(rng, 3, 4), y = random_tensor(rng, 5, 4);
  std::vector<Tensor2D> heads;
  for (int h = 0; h < 2; ++h)
    heads.push_back(loop_attention(matmul(x, p.wq[h]), matmul(y, p.wk[h]), matmul(y, p.wv[h])));
  const auto expect = matmul(concat_cols(heads), p.wo);
  EXPECT_LT(max_abs_diff(mca(x, y, p), expect), 1e-14);

  EXPECT_THROW(multihead(Tensor2D(2, 3), Tensor2D(2, 3), Tensor2D(2, 3), HeadParams::identity(4, 2)),
               ValidationError);
}

TEST(Gate, Examples) {
  const Tensor2D ys{{1, 2}, {3, 4}}, yc{{5, 0}, {-1, 4}};
  GateParams zero{Tensor2D(2, 2), Tensor2D(2, 2), Tensor2D(1, 2)};
  const auto mean = gate(ys, yc, zero);
  EXPECT_DOUBLE_EQ(mean(0, 0), 3);
  EXPECT_DOUBLE_EQ(mean(1, 0), 1);

  GateParams sat{Tensor2D(2, 2), Tensor2D(2, 2), Tensor2D(1, 2, 50.0)};
  EXPECT_LE(max_abs_diff(gate(ys, yc, sat), ys), 1e-15 * 5);
  EXPECT_THROW(gate(ys, Tensor2D(1, 2), zero), ValidationError);
}

TEST(Gate, MatchesElementwiseRecomputation) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const auto ys = random_tensor(rng, 2, 3), yc = random_tensor(rng, 2, 3);
    GateParams p{random_tensor(rng, 3, 3), random_tensor(rng, 3, 3), random_tensor(rng, 1, 3)};
    const auto out = gate(ys, yc, p);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        double z = p.b(0, j);
        for (std::size_t k = 0; k < 3; ++k) z += ys(i, k) * p.ws(k, j) + yc(i, k) * p.wc(k, j);
        const double r = sigmoid(z);
        EXPECT_NEAR(out(i, j), ys(i, j) * r + yc(i, j) * (1 - r), 1e-15);
        EXPECT_GE(out(i, j), std::min(ys(i, j), yc(i, j)) - 1e-15);
        EXPECT_LE(out(i, j), std::max(ys(i, j), yc(i, j)) + 1e-15);
      }
  }
}

TEST(PriorAttention, Examples) {
  const Tensor2D logits{{0.1, 2}, {-1, 0.5}}, m{{0.3, 2}, {1, 0.7}};
  const auto beta_map = prior_attention(logits, m, 0.0);
  double z = 0;
  for (double x : logits.data()) z += std::exp(x);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(beta_map(i, j), std::exp(logits(i, j)) / z, 1e-15);

  const auto uni = prior_attention(Tensor2D(3, 3, 0.7), Tensor2D(3, 3, 2.0), 1.3);
  for (double x : uni.data()) EXPECT_NEAR(x, 1.0 / 9, 1e-15);

  // Scalar oracle with alpha = 2.
  const auto a = prior_attention(logits, m, 2.0);
  double total = 0;
  for (std::size_t k = 0; k < 4; ++k) total += std::exp(logits.data()[k]) * m.data()[k] * m.data()[k];
  double sum = 0;
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_NEAR(a.data()[k], std::exp(logits.data()[k]) * m.data()[k] * m.data()[k] / total, 1e-15);
    sum += a.data()[k];
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_THROW(prior_attention(logits, Tensor2D(2, 2, 0.0), 1.0), ValidationError);
}

TEST(MultistreamContext, Examples) {
  const Tensor2D d{{0.2, -0.4}};
  const Tensor2D e{{3, 1}};
  const auto one = multistream_context(d, {{"g", e}}, {{"g", HeadParams::identity(2, 1)}});
  EXPECT_EQ(one, e);

  std::mt19937_64 rng(9);
  const auto eg = random_tensor(rng, 4, 2), em = random_tensor(rng, 3, 2), eh = random_tensor(rng, 5, 2);
  std::map<std::string, HeadParams> params;
  for (const char* k : {"g", "m", "h"}) {
    HeadParams p;
    p.wq = {random_tensor(rng, 2, 2)};
    p.wk = {random_tensor(rng, 2, 2)};
    p.wv = {random_tensor(rng, 2, 3)};
    p.wo = random_tensor(rng, 3, 3);
    params[k] = p;
  }
  const auto out = multistream_context(d, {{"h", eh}, {"g", eg}, {"m", em}}, params);
  ASSERT_EQ(out.cols(), 9u);
  std::vector<Tensor2D> parts{mca(d, eg, params["g"]), mca(d, em, params["m"]), mca(d, eh, params["h"])};
  EXPECT_LT(max_abs_diff(out, concat_cols(parts)), 1e-15);

  EXPECT_THROW(multistream_context(d, {}, {}), ValidationError);
  EXPECT_THROW(multistream_context(d, {{"x", e}}, {{"x", HeadParams::identity(2, 1)}}), ValidationError);
}

TEST(PoseLoss, Examples) {
  const std::vector<Tensor2D> a{Tensor2D{{1, 2}, {3, 4}}, Tensor2D{{0, 0}, {0, 0}}};
  EXPECT_DOUBLE_EQ(pose_heatmap_loss(a, a, {0.9, 0.9}), 0.0);
  auto b = a;
  b[1](0, 1) = 2;
  EXPECT_DOUBLE_EQ(pose_heatmap_loss(a, b, {0.9, 0.9}), 4.0);
  EXPECT_DOUBLE_EQ(pose_heatmap_loss(a, b, {0.9, 0.5}), 0.0);  // not strictly above tau
  EXPECT_THROW(pose_heatmap_loss(a, b, {0.9}), ValidationError);
}

TEST(ExpectedLer, Examples) {
  EXPECT_DOUBLE_EQ(expected_ler_loss({0.7}, {1.0}).loss, -1.0);
  EXPECT_DOUBLE_EQ(expected_ler_loss({0.2, 0.5}, {0.0, 0.0}).loss, 0.0);
  const auto r = expected_ler_loss({1, 3}, {1, 0});
  EXPECT_DOUBLE_EQ(r.loss, -0.25);
  EXPECT_DOUBLE_EQ(r.coefficients[0], -0.25);
  EXPECT_DOUBLE_EQ(r.coefficients[1], 0.0);
  EXPECT_THROW(expected_ler_loss({0, 0}, {1, 1}), ValidationError);
  EXPECT_THROW(expected_ler_loss({-1, 2}, {1, 1}), ValidationError);
}

TEST(ExpectedLer, BoundedAndGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.1, 2), acc(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> f(4), a(4);
    for (double& x : f) x = u(rng);
    for (double& x : a) x = acc(rng);
    const auto r = expected_ler_loss(f, a);
    EXPECT_GE(r.loss, -1.0);
    EXPECT_LE(r.loss, 0.0);
    const auto rep = finite_diff_check([&](const std::vector<double>& x) { return expected_ler_loss(x, a).loss; },
                                       f, r.grad_scores);
    EXPECT_TRUE(rep.passed) << rep.max_rel_error;
  }
}

TEST(LossCombination, Weighted) {
  LossWeights w{0.5, 2, 3, 0.25, 4};
  EXPECT_DOUBLE_EQ(detection_total_loss(1, 2, 3, 4, w), 1 + 1 + 6 + 12);
  EXPECT_DOUBLE_EQ(multistream_ctc_loss(1, 4, 0.5, w), 1 + 1 + 2);
}

TEST(FiniteDiff, Examples) {
  auto sq = [](const std::vector<double>& x) { return x[0] * x[0]; };
  const auto good = finite_diff_check(sq, {1.0}, {2.0});
  EXPECT_LT(good.max_rel_error, 1e-6);
  EXPECT_TRUE(good.passed);
  const auto bad = finite_diff_check(sq, {1.0}, {3.0});
  EXPECT_GT(bad.max_rel_error, 1e-5);
  EXPECT_FALSE(bad.passed);
}

TEST(FiniteDiff, GateGradientWrtWs) {
  std::mt19937_64 rng(11);
  const auto ys = random_tensor(rng, 2, 2), yc = random_tensor(rng, 2, 2), g = random_tensor(rng, 2, 2);
  GateParams p{random_tensor(rng, 2, 2), random_tensor(rng, 2, 2), random_tensor(rng, 1, 2)};
  auto loss = [&](const std::vector<double>& w) {
    GateParams q = p;
    q.ws = Tensor2D(2, 2, w);
    return dot(g, gate(ys, yc, q));
  };
  const auto grads = gate_backward(ys, yc, p, g);
  const auto rep = finite_diff_check(loss, p.ws.data(), grads.dws.data());
  EXPECT_LT(rep.max_rel_error, 1e-5);
}

TEST(GradientCheck, EveryOpPasses) {
  for (const auto& op : gradient_check_ops()) {
    const auto r = run_gradient_check(op, 5, 123);
    EXPECT_TRUE(r.passed) << op << " " << r.max_rel_error;
    EXPECT_LT(r.max_rel_error, 1e-5) << op;
    EXPECT_EQ(r.instances, 5u);
  }
  EXPECT_THROW(run_gradient_check("nope", 1, 0), ValidationError);
}
