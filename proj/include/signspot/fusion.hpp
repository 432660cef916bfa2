#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "signspot/tensor.hpp"

namespace signspot {

// Forward passes come with analytic backward passes. Every backward takes the
// upstream gradient dOut = dL/dOut of some scalar loss L and returns the
// gradients of L with respect to the inputs and parameters.

/// Row-wise softmax.
Tensor2D softmax_rows(const Tensor2D& x);

/// softmax(Q K^T / sqrt(d)) V with d = Q.cols().
Tensor2D attention(const Tensor2D& q, const Tensor2D& k, const Tensor2D& v);

struct AttentionGrads {
  Tensor2D dq, dk, dv;
};
AttentionGrads attention_backward(const Tensor2D& q, const Tensor2D& k, const Tensor2D& v,
                                  const Tensor2D& d_out);

/// Per-head projections W_i^Q, W_i^K, W_i^V and the shared output W^O.
struct HeadParams {
  std::vector<Tensor2D> wq, wk, wv;
  Tensor2D wo;

  std::size_t heads() const { return wq.size(); }

  /// Head i projects onto columns [i*d/h, (i+1)*d/h) of the identity; W^O = I.
  static HeadParams identity(std::size_t d, std::size_t h);
};

/// Concat_i(attention(Q W_i^Q, K W_i^K, V W_i^V)) W^O. Q.cols() must be
/// divisible by the head count and every W_i^Q must have Q.cols()/h columns.
Tensor2D multihead(const Tensor2D& q, const Tensor2D& k, const Tensor2D& v, const HeadParams& p);
inline Tensor2D msa(const Tensor2D& x, const HeadParams& p) { return multihead(x, x, x, p); }
inline Tensor2D mca(const Tensor2D& x, const Tensor2D& y, const HeadParams& p) {
  return multihead(x, y, y, p);
}

struct MultiheadGrads {
  Tensor2D dq, dk, dv;
  std::vector<Tensor2D> dwq, dwk, dwv;
  Tensor2D dwo;
};
MultiheadGrads multihead_backward(const Tensor2D& q, const Tensor2D& k, const Tensor2D& v,
                                  const HeadParams& p, const Tensor2D& d_out);

struct GateParams {
  Tensor2D ws, wc;  // d x d
  Tensor2D b;       // 1 x d, broadcast over rows
};

/// R = sigmoid(Y_s W_s + Y_c W_c + b); out = Y_s * R + Y_c * (1 - R).
Tensor2D gate(const Tensor2D& ys, const Tensor2D& yc, const GateParams& p);

struct GateGrads {
  Tensor2D dys, dyc, dws, dwc, db;
};
GateGrads gate_backward(const Tensor2D& ys, const Tensor2D& yc, const GateParams& p,
                        const Tensor2D& d_out);

/// beta = softmax of the logits over all cells jointly; A = beta*M^alpha / sum.
Tensor2D prior_attention(const Tensor2D& logits, const Tensor2D& prior, double alpha);

struct PriorAttentionGrads {
  Tensor2D dlogits;
  Tensor2D dprior;  // zero at cells where the prior is zero
  double dalpha = 0;
};
PriorAttentionGrads prior_attention_backward(const Tensor2D& logits, const Tensor2D& prior,
                                             double alpha, const Tensor2D& d_out);

/// Per-modality cross-attention contexts c^(x) = mca(d_n, e^(x)), concatenated
/// in the order g, m, h. Keys of `encodings` must be a subset of {"g","m","h"}.
Tensor2D multistream_context(const Tensor2D& decoder_state,
                             const std::map<std::string, Tensor2D>& encodings,
                             const std::map<std::string, HeadParams>& params);

/// Σ_i ||pred_i - pseudo_i||^2 over heatmaps whose keypoint confidence
/// exceeds tau.
double pose_heatmap_loss(const std::vector<Tensor2D>& pred, const std::vector<Tensor2D>& pseudo,
                         const std::vector<double>& confidence, double tau = 0.5);
std::vector<Tensor2D> pose_heatmap_loss_grad(const std::vector<Tensor2D>& pred,
                                             const std::vector<Tensor2D>& pseudo,
                                             const std::vector<double>& confidence,
                                             double tau = 0.5);

struct ExpectedLer {
  double loss = 0;                    // -Σ p_i Acc_i with p_i = f_i / Σ f
  std::vector<double> coefficients;   // -p_i Acc_i, paired with grad log p_i
  std::vector<double> grad_scores;    // Σ_i c_i d(log p_i)/d f_j
};
ExpectedLer expected_ler_loss(const std::vector<double>& scores, const std::vector<double>& accuracies);

/// Weights of the auxiliary losses.
struct LossWeights {
  double rec = 1, ler = 1, pose = 1;  // detection-side terms
  double hand = 1, mouth = 1;         // auxiliary CTC streams
};
/// L_det + lambda_rec L_rec + lambda_ler L_ler + lambda_pose L_pose.
double detection_total_loss(double det, double rec, double ler, double pose, const LossWeights& w);
/// L_ctc(joint) + lambda_h L_ctc(hand) + lambda_m L_ctc(mouth).
double multistream_ctc_loss(double joint, double hand, double mouth, const LossWeights& w);

struct GradCheckReport {
  double max_rel_error = 0;
  std::size_t worst_index = 0;
  bool passed = true;
};

/// Compares analytic gradients with central differences per coordinate.
/// Relative error is |a - n| / max(|a|, |n|, floor).
GradCheckReport finite_diff_check(const std::function<double(const std::vector<double>&)>& f,
                                  const std::vector<double>& theta,
                                  const std::vector<double>& analytic, double eps = 1e-6,
                                  double tol = 1e-5, double floor = 1e-3);

/// Random-instance gradient checks of scalar losses sum(G * op(x)) through
/// each differentiable op. Names: attention, multihead, gate,
/// prior_attention, pose_heatmap_loss.
struct OpCheck {
  std::string op;
  std::size_t instances = 0;
  double max_rel_error = 0;
  bool passed = true;
};
const std::vector<std::string>& gradient_check_ops();
OpCheck run_gradient_check(const std::string& op, std::size_t instances, std::uint64_t seed,
                           double eps = 1e-6, double tol = 1e-5);

}  // namespace signspot
