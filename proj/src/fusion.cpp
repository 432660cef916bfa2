#include "signspot/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace signspot {

Tensor2D softmax_rows(const Tensor2D& x) {
  Tensor2D out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto in = x.row(r);
    auto o = out.row(r);
    const double mx = *std::max_element(in.begin(), in.end());
    double sum = 0;
    for (std::size_t c = 0; c < in.size(); ++c) sum += o[c] = std::exp(in[c] - mx);
    for (double& v : o) v /= sum;
  }
  return out;
}

namespace {

void check_attention_shapes(const Tensor2D& q, const Tensor2D& k, const Tensor2D& v) {
  if (q.cols() != k.cols()) throw ValidationError("attention: query/key widths differ");
  if (k.rows() != v.rows()) throw ValidationError("attention: key/value lengths differ");
  if (q.cols() == 0 || k.rows() == 0) throw ValidationError("attention: empty input");
}

Tensor2D attention_weights(const Tensor2D& q, const Tensor2D& k) {
  return softmax_rows(matmul_nt(q, k) * (1.0 / std::sqrt(static_cast<double>(q.cols()))));
}

}  // namespace

Tensor2D attention(const Tensor2D& q, const Tensor2D& k, const Tensor2D& v) {
  check_attention_shapes(q, k, v);
  return matmul(attention_weights(q, k), v);
}

AttentionGrads attention_backward(const Tensor2D& q, const Tensor2D& k, const Tensor2D& v,
                                  const Tensor2D& d_out) {
  check_attention_shapes(q, k, v);
  const Tensor2D p = attention_weights(q, k);
  if (d_out.rows() != q.rows() || d_out.cols() != v.cols())
    throw ValidationError("attention_backward: gradient shape mismatch");
  const Tensor2D dp = matmul_nt(d_out, v);
  Tensor2D ds(p.rows(), p.cols());
  for (std::size_t i = 0; i < p.rows(); ++i) {
    double s = 0;
    for (std::size_t j = 0; j < p.cols(); ++j) s += p(i, j) * dp(i, j);
    for (std::size_t j = 0; j < p.cols(); ++j) ds(i, j) = p(i, j) * (dp(i, j) - s);
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  return {matmul(ds, k) * scale, matmul_tn(ds, q) * scale, matmul_tn(p, d_out)};
}

HeadParams HeadParams::identity(std::size_t d, std::size_t h) {
  if (h == 0 || d % h != 0) throw ValidationError("HeadParams: d must be divisible by the head count");
  const Tensor2D eye = Tensor2D::identity(d);
  HeadParams p;
  for (std::size_t i = 0; i < h; ++i) {
    Tensor2D w = slice_cols(eye, i * (d / h), d / h);
    p.wq.push_back(w);
    p.wk.push_back(w);
    p.wv.push_back(w);
  }
  p.wo = eye;
  return p;
}

namespace {

void check_heads(const Tensor2D& q, const Tensor2D& k, const Tensor2D& v, const HeadParams& p) {
  const std::size_t h = p.heads();
  if (h == 0) throw ValidationError("multihead: no heads");
  if (p.wk.size() != h || p.wv.size() != h) throw ValidationError("multihead: head count mismatch");
  if (q.cols() % h != 0) throw ValidationError("multihead: model width not divisible by head count");
  std::size_t dv_total = 0;
  for (std::size_t i = 0; i < h; ++i) {
    if (p.wq[i].rows() != q.cols() || p.wq[i].cols() != q.cols() / h)
      throw ValidationError("multihead: W^Q shape mismatch");
    if (p.wk[i].rows() != k.cols() || p.wk[i].cols() != p.wq[i].cols())
      throw ValidationError("multihead: W^K shape mismatch");
    if (p.wv[i].rows() != v.cols()) throw ValidationError("multihead: W^V shape mismatch");
    dv_total += p.wv[i].cols();
  }
  if (p.wo.rows() != dv_total) throw ValidationError("multihead: W^O shape mismatch");
}

}  // namespace

Tensor2D multihead(const Tensor2D& q, const Tensor2D& k, const Tensor2D& v, const HeadParams& p) {
  check_heads(q, k, v, p);
  std::vector<Tensor2D> heads;
  for (std::size_t i = 0; i < p.heads(); ++i)
    heads.push_back(attention(matmul(q, p.wq[i]), matmul(k, p.wk[i]), matmul(v, p.wv[i])));
  return matmul(concat_cols(heads), p.wo);
}

MultiheadGrads multihead_backward(const Tensor2D& q, const Tensor2D& k, const Tensor2D& v,
                                  const HeadParams& p, const Tensor2D& d_out) {
  check_heads(q, k, v, p);
  std::vector<Tensor2D> qs, ks, vs, heads;
  for (std::size_t i = 0; i < p.heads(); ++i) {
    qs.push_back(matmul(q, p.wq[i]));
    ks.push_back(matmul(k, p.wk[i]));
    vs.push_back(matmul(v, p.wv[i]));
    heads.push_back(attention(qs[i], ks[i], vs[i]));
  }
  const Tensor2D concat = concat_cols(heads);
  if (d_out.rows() != concat.rows() || d_out.cols() != p.wo.cols())
    throw ValidationError("multihead_backward: gradient shape mismatch");

  MultiheadGrads g;
  g.dwo = matmul_tn(concat, d_out);
  const Tensor2D dconcat = matmul_nt(d_out, p.wo);
  g.dq = Tensor2D(q.rows(), q.cols());
  g.dk = Tensor2D(k.rows(), k.cols());
  g.dv = Tensor2D(v.rows(), v.cols());
  std::size_t offset = 0;
  for (std::size_t i = 0; i < p.heads(); ++i) {
    const Tensor2D dh = slice_cols(dconcat, offset, heads[i].cols());
    offset += heads[i].cols();
    const auto a = attention_backward(qs[i], ks[i], vs[i], dh);
    g.dwq.push_back(matmul_tn(q, a.dq));
    g.dwk.push_back(matmul_tn(k, a.dk));
    g.dwv.push_back(matmul_tn(v, a.dv));
    g.dq = g.dq + matmul_nt(a.dq, p.wq[i]);
    g.dk = g.dk + matmul_nt(a.dk, p.wk[i]);
    g.dv = g.dv + matmul_nt(a.dv, p.wv[i]);
  }
  return g;
}

namespace {

void check_gate(const Tensor2D& ys, const Tensor2D& yc, const GateParams& p) {
  if (!ys.same_shape(yc)) throw ValidationError("gate: stream shapes differ");
  const std::size_t d = ys.cols();
  if (p.ws.rows() != d || p.ws.cols() != d || p.wc.rows() != d || p.wc.cols() != d)
    throw ValidationError("gate: weight shape mismatch");
  if (p.b.rows() != 1 || p.b.cols() != d) throw ValidationError("gate: bias shape mismatch");
}

Tensor2D gate_ratio(const Tensor2D& ys, const Tensor2D& yc, const GateParams& p) {
  Tensor2D z = matmul(ys, p.ws) + matmul(yc, p.wc);
  for (std::size_t r = 0; r < z.rows(); ++r)
    for (std::size_t c = 0; c < z.cols(); ++c) z(r, c) = 1.0 / (1.0 + std::exp(-(z(r, c) + p.b(0, c))));
  return z;
}

}  // namespace

Tensor2D gate(const Tensor2D& ys, const Tensor2D& yc, const GateParams& p) {
  check_gate(ys, yc, p);
  const Tensor2D r = gate_ratio(ys, yc, p);
  Tensor2D out(ys.rows(), ys.cols());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double ri = r.data()[i];
    out.data()[i] = ys.data()[i] * ri + yc.data()[i] * (1.0 - ri);
  }
  return out;
}

GateGrads gate_backward(const Tensor2D& ys, const Tensor2D& yc, const GateParams& p,
                        const Tensor2D& d_out) {
  check_gate(ys, yc, p);
  if (!d_out.same_shape(ys)) throw ValidationError("gate_backward: gradient shape mismatch");
  const Tensor2D r = gate_ratio(ys, yc, p);
  Tensor2D dz(r.rows(), r.cols()), dys_direct(r.rows(), r.cols()), dyc_direct(r.rows(), r.cols());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double ri = r.data()[i], g = d_out.data()[i];
    dz.data()[i] = g * (ys.data()[i] - yc.data()[i]) * ri * (1.0 - ri);
    dys_direct.data()[i] = g * ri;
    dyc_direct.data()[i] = g * (1.0 - ri);
  }
  GateGrads g;
  g.dys = dys_direct + matmul_nt(dz, p.ws);
  g.dyc = dyc_direct + matmul_nt(dz, p.wc);
  g.dws = matmul_tn(ys, dz);
  g.dwc = matmul_tn(yc, dz);
  g.db = Tensor2D(1, dz.cols());
  for (std::size_t r2 = 0; r2 < dz.rows(); ++r2)
    for (std::size_t c = 0; c < dz.cols(); ++c) g.db(0, c) += dz(r2, c);
  return g;
}

namespace {

struct PriorForward {
  Tensor2D beta, powered, out;
  double total = 0;
};

PriorForward prior_forward(const Tensor2D& logits, const Tensor2D& prior, double alpha) {
  if (!logits.same_shape(prior)) throw ValidationError("prior_attention: shape mismatch");
  if (logits.size() == 0) throw ValidationError("prior_attention: empty map");
  for (double m : prior.data())
    if (!(m >= 0)) throw ValidationError("prior_attention: prior must be nonnegative");
  PriorForward f;
  // Joint softmax over every cell.
  f.beta = softmax_rows(Tensor2D(1, logits.size(), logits.data()));
  f.beta = Tensor2D(logits.rows(), logits.cols(), f.beta.data());
  f.powered = Tensor2D(prior.rows(), prior.cols());
  for (std::size_t i = 0; i < prior.size(); ++i) f.powered.data()[i] = std::pow(prior.data()[i], alpha);
  const Tensor2D w = hadamard(f.beta, f.powered);
  for (double x : w.data()) f.total += x;
  if (!(f.total > 0)) throw ValidationError("prior_attention: weighted map sums to zero");
  f.out = w * (1.0 / f.total);
  return f;
}

}  // namespace

Tensor2D prior_attention(const Tensor2D& logits, const Tensor2D& prior, double alpha) {
  return prior_forward(logits, prior, alpha).out;
}

PriorAttentionGrads prior_attention_backward(const Tensor2D& logits, const Tensor2D& prior,
                                             double alpha, const Tensor2D& d_out) {
  const PriorForward f = prior_forward(logits, prior, alpha);
  if (!d_out.same_shape(logits)) throw ValidationError("prior_attention_backward: gradient shape mismatch");
  const std::size_t n = logits.size();
  const double s_out = dot(d_out, f.out);
  std::vector<double> dw(n), dbeta(n);
  double s_beta = 0;
  for (std::size_t i = 0; i < n; ++i) {
    dw[i] = (d_out.data()[i] - s_out) / f.total;
    dbeta[i] = dw[i] * f.powered.data()[i];
    s_beta += dbeta[i] * f.beta.data()[i];
  }
  PriorAttentionGrads g;
  g.dlogits = Tensor2D(logits.rows(), logits.cols());
  g.dprior = Tensor2D(prior.rows(), prior.cols());
  for (std::size_t i = 0; i < n; ++i) {
    const double b = f.beta.data()[i], m = prior.data()[i];
    g.dlogits.data()[i] = b * (dbeta[i] - s_beta);
    if (m > 0) {
      g.dprior.data()[i] = dw[i] * b * alpha * std::pow(m, alpha - 1.0);
      g.dalpha += dw[i] * b * f.powered.data()[i] * std::log(m);
    }
  }
  return g;
}

Tensor2D multistream_context(const Tensor2D& decoder_state,
                             const std::map<std::string, Tensor2D>& encodings,
                             const std::map<std::string, HeadParams>& params) {
  if (encodings.empty()) throw ValidationError("multistream_context: no modalities");
  for (const auto& [name, enc] : encodings) {
    if (name != "g" && name != "m" && name != "h")
      throw ValidationError("multistream_context: unknown modality '" + name + "'");
    if (enc.rows() == 0) throw ValidationError("multistream_context: empty encoding for '" + name + "'");
    if (!params.count(name)) throw ValidationError("multistream_context: no parameters for '" + name + "'");
  }
  std::vector<Tensor2D> parts;
  for (const char* name : {"g", "m", "h"}) {
    auto it = encodings.find(name);
    if (it != encodings.end()) parts.push_back(mca(decoder_state, it->second, params.at(name)));
  }
  return concat_cols(parts);
}

namespace {

void check_pose(const std::vector<Tensor2D>& pred, const std::vector<Tensor2D>& pseudo,
                const std::vector<double>& confidence) {
  if (pred.size() != pseudo.size() || pred.size() != confidence.size())
    throw ValidationError("pose_heatmap_loss: list lengths differ");
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (!pred[i].same_shape(pseudo[i])) throw ValidationError("pose_heatmap_loss: heatmap shapes differ");
}

}  // namespace

double pose_heatmap_loss(const std::vector<Tensor2D>& pred, const std::vector<Tensor2D>& pseudo,
                         const std::vector<double>& confidence, double tau) {
  check_pose(pred, pseudo, confidence);
  double loss = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!(confidence[i] > tau)) continue;
    const Tensor2D diff = pred[i] - pseudo[i];
    loss += dot(diff, diff);
  }
  return loss;
}

std::vector<Tensor2D> pose_heatmap_loss_grad(const std::vector<Tensor2D>& pred,
                                             const std::vector<Tensor2D>& pseudo,
                                             const std::vector<double>& confidence, double tau) {
  check_pose(pred, pseudo, confidence);
  std::vector<Tensor2D> out;
  for (std::size_t i = 0; i < pred.size(); ++i)
    out.push_back(confidence[i] > tau ? (pred[i] - pseudo[i]) * 2.0 : Tensor2D(pred[i].rows(), pred[i].cols()));
  return out;
}

ExpectedLer expected_ler_loss(const std::vector<double>& scores, const std::vector<double>& accuracies) {
  if (scores.size() != accuracies.size()) throw ValidationError("expected_ler_loss: length mismatch");
  double total = 0;
  for (double f : scores) {
    if (!(f >= 0) || !std::isfinite(f)) throw ValidationError("expected_ler_loss: scores must be nonnegative");
    total += f;
  }
  if (!(total > 0)) throw ValidationError("expected_ler_loss: scores sum to zero");
  ExpectedLer r;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double c = -scores[i] / total * accuracies[i];
    r.coefficients.push_back(c);
    r.loss += c;
  }
  // d log p_i / d f_j = [i == j] / f_i - 1 / S, so Σ_i c_i d log p_i / d f_j
  // = c_j / f_j - Σ c / S, where c_j / f_j = -Acc_j / S stays finite at f_j = 0.
  for (std::size_t j = 0; j < scores.size(); ++j) r.grad_scores.push_back((-accuracies[j] - r.loss) / total);
  return r;
}

double detection_total_loss(double det, double rec, double ler, double pose, const LossWeights& w) {
  return det + w.rec * rec + w.ler * ler + w.pose * pose;
}

double multistream_ctc_loss(double joint, double hand, double mouth, const LossWeights& w) {
  return joint + w.hand * hand + w.mouth * mouth;
}

GradCheckReport finite_diff_check(const std::function<double(const std::vector<double>&)>& f,
                                  const std::vector<double>& theta,
                                  const std::vector<double>& analytic, double eps, double tol,
                                  double floor) {
  if (theta.size() != analytic.size()) throw ValidationError("finite_diff_check: gradient length mismatch");
  if (!(eps > 0)) throw ValidationError("finite_diff_check: eps must be positive");
  GradCheckReport rep;
  std::vector<double> x = theta;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + eps;
    const double fp = f(x);
    x[i] = orig - eps;
    const double fm = f(x);
    x[i] = orig;
    const double numeric = (fp - fm) / (2 * eps);
    const double rel = std::abs(analytic[i] - numeric) /
                       std::max({std::abs(analytic[i]), std::abs(numeric), floor});
    if (rel > rep.max_rel_error) {
      rep.max_rel_error = rel;
      rep.worst_index = i;
    }
  }
  rep.passed = rep.max_rel_error < tol;
  return rep;
}

const std::vector<std::string>& gradient_check_ops() {
  static const std::vector<std::string> ops = {"attention", "multihead", "gate", "prior_attention",
                                               "pose_heatmap_loss"};
  return ops;
}

namespace {

// A loss over a list of tensors with its analytic gradient, checked on the
// flattened parameter vector. Linear losses sum(G * op(x)) also check the
// gradient with respect to G, which is op(x) itself.
struct Instance {
  std::vector<Tensor2D> tensors;
  std::function<double(const std::vector<Tensor2D>&)> loss;
  std::function<std::vector<Tensor2D>(const std::vector<Tensor2D>&)> grad;
};

std::vector<double> flatten(const std::vector<Tensor2D>& ts) {
  std::vector<double> out;
  for (const auto& t : ts) out.insert(out.end(), t.data().begin(), t.data().end());
  return out;
}

std::vector<Tensor2D> unflatten(const std::vector<double>& x, const std::vector<Tensor2D>& like) {
  std::vector<Tensor2D> out;
  std::size_t off = 0;
  for (const auto& t : like) {
    out.emplace_back(t.rows(), t.cols(),
                     std::vector<double>(x.begin() + static_cast<std::ptrdiff_t>(off),
                                         x.begin() + static_cast<std::ptrdiff_t>(off + t.size())));
    off += t.size();
  }
  return out;
}

class InstanceGen {
 public:
  explicit InstanceGen(std::uint64_t seed) : rng_(seed) {}

  Tensor2D uniform(std::size_t r, std::size_t c, double lo = -1, double hi = 1) {
    std::uniform_real_distribution<double> u(lo, hi);
    Tensor2D t(r, c);
    for (double& x : t.data()) x = u(rng_);
    return t;
  }
  std::size_t dim(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }

  Instance make(const std::string& op) {
    Instance in;
    if (op == "attention") {
      const std::size_t n = dim(1, 4), m = dim(1, 4), d = dim(1, 4), dv = dim(1, 4);
      in.tensors = {uniform(n, d), uniform(m, d), uniform(m, dv), uniform(n, dv)};
      in.loss = [](const std::vector<Tensor2D>& t) { return dot(attention(t[0], t[1], t[2]), t[3]); };
      in.grad = [](const std::vector<Tensor2D>& t) {
        auto g = attention_backward(t[0], t[1], t[2], t[3]);
        return std::vector<Tensor2D>{g.dq, g.dk, g.dv, attention(t[0], t[1], t[2])};
      };
    } else if (op == "multihead") {
      const std::size_t h = dim(1, 2), dh = dim(1, 2), d = h * dh;
      const std::size_t n = dim(1, 3), m = dim(1, 3), dk = dim(1, 3), dv = dim(1, 3), dout = dim(1, 3);
      in.tensors = {uniform(n, d), uniform(m, dk), uniform(m, dv)};
      for (std::size_t i = 0; i < h; ++i) {
        in.tensors.push_back(uniform(d, dh));
        in.tensors.push_back(uniform(dk, dh));
        in.tensors.push_back(uniform(dv, dh));
      }
      in.tensors.push_back(uniform(h * dh, dout));
      in.tensors.push_back(uniform(n, dout));
      auto params = [h](const std::vector<Tensor2D>& t) {
        HeadParams p;
        for (std::size_t i = 0; i < h; ++i) {
          p.wq.push_back(t[3 + 3 * i]);
          p.wk.push_back(t[4 + 3 * i]);
          p.wv.push_back(t[5 + 3 * i]);
        }
        p.wo = t[3 + 3 * h];
        return p;
      };
      in.loss = [params](const std::vector<Tensor2D>& t) {
        return dot(multihead(t[0], t[1], t[2], params(t)), t.back());
      };
      in.grad = [params, h](const std::vector<Tensor2D>& t) {
        auto g = multihead_backward(t[0], t[1], t[2], params(t), t.back());
        std::vector<Tensor2D> out{g.dq, g.dk, g.dv};
        for (std::size_t i = 0; i < h; ++i) {
          out.push_back(g.dwq[i]);
          out.push_back(g.dwk[i]);
          out.push_back(g.dwv[i]);
        }
        out.push_back(g.dwo);
        out.push_back(multihead(t[0], t[1], t[2], params(t)));
        return out;
      };
    } else if (op == "gate") {
      const std::size_t n = dim(1, 4), d = dim(1, 4);
      in.tensors = {uniform(n, d), uniform(n, d), uniform(d, d), uniform(d, d), uniform(1, d), uniform(n, d)};
      in.loss = [](const std::vector<Tensor2D>& t) { return dot(gate(t[0], t[1], {t[2], t[3], t[4]}), t[5]); };
      in.grad = [](const std::vector<Tensor2D>& t) {
        auto g = gate_backward(t[0], t[1], {t[2], t[3], t[4]}, t[5]);
        return std::vector<Tensor2D>{g.dys, g.dyc, g.dws, g.dwc, g.db, gate(t[0], t[1], {t[2], t[3], t[4]})};
      };
    } else if (op == "prior_attention") {
      const std::size_t r = dim(1, 4), c = dim(1, 4);
      in.tensors = {uniform(r, c, -2, 2), uniform(r, c, 0.2, 1.5), uniform(1, 1, 0, 2), uniform(r, c)};
      in.loss = [](const std::vector<Tensor2D>& t) {
        return dot(prior_attention(t[0], t[1], t[2](0, 0)), t[3]);
      };
      in.grad = [](const std::vector<Tensor2D>& t) {
        auto g = prior_attention_backward(t[0], t[1], t[2](0, 0), t[3]);
        return std::vector<Tensor2D>{g.dlogits, g.dprior, Tensor2D(1, 1, g.dalpha),
                                     prior_attention(t[0], t[1], t[2](0, 0))};
      };
    } else if (op == "pose_heatmap_loss") {
      const std::size_t k = dim(1, 4), r = dim(1, 4), c = dim(1, 4);
      std::vector<double> conf;
      for (std::size_t i = 0; i < k; ++i) {
        in.tensors.push_back(uniform(r, c));
        conf.push_back(uniform(1, 1, 0, 1)(0, 0));
      }
      std::vector<Tensor2D> pseudo;
      for (std::size_t i = 0; i < k; ++i) pseudo.push_back(uniform(r, c));
      in.loss = [pseudo, conf](const std::vector<Tensor2D>& t) { return pose_heatmap_loss(t, pseudo, conf); };
      in.grad = [pseudo, conf](const std::vector<Tensor2D>& t) { return pose_heatmap_loss_grad(t, pseudo, conf); };
    } else {
      throw ValidationError("unknown gradient-check op '" + op + "'");
    }
    return in;
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace

OpCheck run_gradient_check(const std::string& op, std::size_t instances, std::uint64_t seed,
                           double eps, double tol) {
  InstanceGen gen(seed);
  OpCheck check{op, instances, 0.0, true};
  for (std::size_t i = 0; i < instances; ++i) {
    const Instance in = gen.make(op);
    const auto like = in.tensors;
    auto f = [&](const std::vector<double>& x) { return in.loss(unflatten(x, like)); };
    const auto rep = finite_diff_check(f, flatten(in.tensors), flatten(in.grad(in.tensors)), eps, tol);
    check.max_rel_error = std::max(check.max_rel_error, rep.max_rel_error);
    check.passed = check.passed && rep.passed;
  }
  return check;
}

}  // namespace signspot
