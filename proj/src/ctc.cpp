#include "signspot/ctc.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace signspot {

double log_add(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

namespace {
double safe_log(double p) { return p > 0 ? std::log(p) : kLogZero; }
}  // namespace

Posteriorgram::Posteriorgram(Alphabet alphabet, std::vector<std::vector<double>> frames,
                             double tol)
    : alphabet_(std::move(alphabet)), frames_(std::move(frames)) {
  if (frames_.empty()) throw DataError("posteriorgram has no frames");
  for (std::size_t t = 0; t < frames_.size(); ++t) {
    const auto& row = frames_[t];
    if (static_cast<int>(row.size()) != alphabet_.num_labels()) {
      std::ostringstream os;
      os << "row " << t << ": expected " << alphabet_.num_labels() << " probabilities, got "
         << row.size();
      throw DataError(os.str(), t);
    }
    double sum = 0;
    for (double p : row) {
      if (!std::isfinite(p) || p < 0) {
        std::ostringstream os;
        os << "row " << t << ": probability " << p << " is negative or not finite";
        throw DataError(os.str(), t);
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > tol) {
      std::ostringstream os;
      os << "row " << t << ": probabilities sum to " << sum;
      throw DataError(os.str(), t);
    }
  }
}

std::vector<int> collapse(std::span<const int> path, const Alphabet& alphabet) {
  std::vector<int> out;
  int prev = -1;
  for (int l : path) {
    if (!alphabet.valid(l)) throw ValidationError("collapse: invalid label " + std::to_string(l));
    if (l != prev && !alphabet.is_blank(l)) out.push_back(l);
    prev = l;
  }
  return out;
}

int min_frames_for(std::span<const int> labels) {
  int n = static_cast<int>(labels.size());
  for (std::size_t i = 1; i < labels.size(); ++i)
    if (labels[i] == labels[i - 1]) ++n;
  return n;
}

CtcScore sequence_log_prob(const Posteriorgram& post, std::span<const int> labels) {
  const Alphabet& ab = post.alphabet();
  for (int l : labels)
    if (!ab.valid(l) || ab.is_blank(l))
      throw ValidationError("sequence_log_prob: labels must be valid non-blank labels");
  const int T = post.num_frames();
  if (min_frames_for(labels) > T) return {kLogZero, false};

  // Extended sequence: blank, l1, blank, l2, ..., blank.
  const int blank = ab.blank_index();
  std::vector<int> ext(2 * labels.size() + 1, blank);
  for (std::size_t i = 0; i < labels.size(); ++i) ext[2 * i + 1] = labels[i];
  const int S = static_cast<int>(ext.size());

  std::vector<double> alpha(S, kLogZero), next(S);
  alpha[0] = safe_log(post.prob(0, ext[0]));
  if (S > 1) alpha[1] = safe_log(post.prob(0, ext[1]));
  for (int t = 1; t < T; ++t) {
    for (int s = 0; s < S; ++s) {
      double a = alpha[s];
      if (s >= 1) a = log_add(a, alpha[s - 1]);
      if (s >= 2 && ext[s] != blank && ext[s] != ext[s - 2]) a = log_add(a, alpha[s - 2]);
      const double lp = safe_log(post.prob(t, ext[s]));
      next[s] = (a == kLogZero || lp == kLogZero) ? kLogZero : a + lp;
    }
    std::swap(alpha, next);
  }
  double total = alpha[S - 1];
  if (S > 1) total = log_add(total, alpha[S - 2]);
  return {total, true};
}

GreedyResult greedy_decode(const Posteriorgram& post) {
  GreedyResult r;
  r.path.reserve(post.num_frames());
  for (int t = 0; t < post.num_frames(); ++t) {
    const auto& row = post.frame(t);
    r.path.push_back(static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin()));
  }
  r.labels = collapse(r.path, post.alphabet());
  return r;
}

namespace {

struct PrefixState {
  double blank = kLogZero;     // paths ending in blank
  double non_blank = kLogZero; // paths ending in the prefix's last label
  double lm = 0.0;             // LM log prob of the prefix (no end-of-sequence)
  double total() const { return log_add(blank, non_blank); }
};

}  // namespace

std::vector<Hypothesis> beam_decode(const Posteriorgram& post, const NGramModel* lm,
                                    const BeamConfig& cfg) {
  if (cfg.beam_width < 1) throw ValidationError("beam_decode: beam_width must be >= 1");
  if (!(cfg.lm_weight >= 0)) throw ValidationError("beam_decode: lm_weight must be >= 0");
  const Alphabet& ab = post.alphabet();
  const int L = ab.num_labels();
  const int blank = ab.blank_index();

  // Label -> LM symbol index.
  std::vector<int> lm_id(L, -1);
  if (lm) {
    for (int k = 0; k < L; ++k) {
      if (ab.is_blank(k)) continue;
      const std::string sym = ab.symbol(k);
      lm_id[k] = lm->index_of(sym);
      if (lm_id[k] < 0)
        throw ValidationError("beam_decode: symbol '" + sym + "' missing from LM vocabulary");
    }
  }
  auto lm_ids = [&](const std::vector<int>& labels) {
    std::vector<int> ids;
    ids.reserve(labels.size());
    for (int l : labels) ids.push_back(lm_id[l]);
    return ids;
  };
  auto weighted_lm = [&](double lm_lp) { return cfg.lm_weight == 0 ? 0.0 : cfg.lm_weight * lm_lp; };
  auto rank_score = [&](const std::vector<int>& prefix, const PrefixState& st) {
    return st.total() + weighted_lm(st.lm) +
           cfg.insertion_bias * static_cast<double>(prefix.size());
  };

  std::map<std::vector<int>, PrefixState> beam;
  beam[{}] = PrefixState{0.0, kLogZero, 0.0};

  for (int t = 0; t < post.num_frames(); ++t) {
    std::map<std::vector<int>, PrefixState> next;
    auto slot = [&](const std::vector<int>& prefix, double lm_score) -> PrefixState& {
      auto [it, inserted] = next.try_emplace(prefix);
      if (inserted) it->second.lm = lm_score;
      return it->second;
    };
    for (const auto& [prefix, st] : beam) {
      const double total = st.total();
      for (int k = 0; k < L; ++k) {
        const double p = post.prob(t, k);
        if (p <= 0) continue;
        const double lp = std::log(p);
        if (k == blank) {
          auto& dst = slot(prefix, st.lm);
          dst.blank = log_add(dst.blank, total + lp);
          continue;
        }
        std::vector<int> extended = prefix;
        extended.push_back(k);
        double ext_lm = st.lm;
        if (lm) ext_lm += lm->log_prob_next(lm_ids(prefix), lm_id[k]);
        if (!prefix.empty() && prefix.back() == k) {
          // Repeat without an intervening blank stays on the same prefix.
          auto& same = slot(prefix, st.lm);
          same.non_blank = log_add(same.non_blank, st.non_blank + lp);
          auto& dst = slot(extended, ext_lm);
          dst.non_blank = log_add(dst.non_blank, st.blank + lp);
        } else {
          auto& dst = slot(extended, ext_lm);
          dst.non_blank = log_add(dst.non_blank, total + lp);
        }
      }
    }
    // Prune to the beam; ties broken by lexicographic prefix (map order).
    std::vector<std::pair<double, const std::vector<int>*>> ranked;
    ranked.reserve(next.size());
    for (const auto& [prefix, st] : next)
      if (st.total() != kLogZero) ranked.emplace_back(rank_score(prefix, st), &prefix);
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    if (static_cast<int>(ranked.size()) > cfg.beam_width) ranked.resize(cfg.beam_width);
    std::map<std::vector<int>, PrefixState> kept;
    for (const auto& [score, prefix] : ranked) kept.emplace(*prefix, next.at(*prefix));
    beam = std::move(kept);
  }

  std::vector<Hypothesis> out;
  out.reserve(beam.size());
  for (const auto& [prefix, st] : beam) {
    Hypothesis h;
    h.labels = prefix;
    h.ctc_log_prob = st.total();
    h.lm_log_prob = lm ? st.lm + lm->log_prob_next(lm_ids(prefix), lm->eos()) : 0.0;
    h.score = h.ctc_log_prob + weighted_lm(h.lm_log_prob) +
              cfg.insertion_bias * static_cast<double>(prefix.size());
    out.push_back(std::move(h));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Hypothesis& a, const Hypothesis& b) { return a.score > b.score; });
  return out;
}

}  // namespace signspot
