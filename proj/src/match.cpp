#include "signspot/match.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace signspot {

void MatchConfig::validate() const {
  if (!(delta_iou >= 0 && delta_iou <= 1)) throw ValidationError("match: delta_iou must be in [0, 1]");
  if (!(delta_is >= 0 && delta_is <= 1)) throw ValidationError("match: delta_is must be in [0, 1]");
  if (num_sampled < 0) throw ValidationError("match: K must be >= 0");
  if (!(margin >= 0)) throw ValidationError("match: margin must be >= 0");
  if (negatives_per_set < 0) throw ValidationError("match: negatives per set must be >= 0");
  if (!(beta >= 0)) throw ValidationError("match: beta must be >= 0");
  if (!(lambda_det >= 0)) throw ValidationError("match: lambda_det must be >= 0");
  if (test_proposals < 1) throw ValidationError("match: M must be >= 1");
}

double cosine_distance(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.size() != b.size()) throw ValidationError("cosine_distance: dimension mismatch");
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0 || bb == 0) throw ValidationError("cosine_distance: zero-norm vector");
  return std::clamp(1.0 - ab / (std::sqrt(aa) * std::sqrt(bb)), 0.0, 2.0);
}

namespace {

// Uniform draw in [0, n) from a 64-bit engine, by rejection so results do
// not depend on the standard library's distribution implementation.
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do x = rng();
  while (x >= limit);
  return static_cast<std::size_t>(x % n);
}

}  // namespace

std::vector<LabeledSegment> build_positive_set(const std::vector<LabeledSegment>& gts,
                                               const std::vector<TimeSegment>& proposals,
                                               const MatchConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  auto iou_ok = [&](double iou) { return cfg.delta_iou >= 1.0 ? iou >= cfg.delta_iou : iou > cfg.delta_iou; };

  struct Candidate {
    std::size_t proposal;
    std::size_t gt;
  };
  std::vector<Candidate> eligible;
  for (std::size_t p = 0; p < proposals.size(); ++p)
    for (std::size_t g = 0; g < gts.size(); ++g)
      if (iou_ok(temporal_iou(proposals[p], gts[g].segment)) &&
          temporal_is(proposals[p], gts[g].segment) > cfg.delta_is) {
        eligible.push_back({p, g});
        break;
      }

  // Partial Fisher-Yates: the first K slots become the sample.
  std::mt19937_64 rng(seed);
  const std::size_t k = std::min<std::size_t>(cfg.num_sampled, eligible.size());
  for (std::size_t i = 0; i < k; ++i) std::swap(eligible[i], eligible[i + uniform_index(rng, eligible.size() - i)]);
  eligible.resize(k);
  std::sort(eligible.begin(), eligible.end(),
            [](const Candidate& a, const Candidate& b) { return a.proposal < b.proposal; });

  std::vector<LabeledSegment> out = gts;
  for (const auto& c : eligible) {
    LabeledSegment ls{proposals[c.proposal], gts[c.gt].transcript};
    const bool dup = std::any_of(out.begin(), out.end(), [&](const LabeledSegment& o) {
      return o.segment == ls.segment && o.transcript == ls.transcript;
    });
    if (!dup) out.push_back(std::move(ls));
  }
  return out;
}

namespace {

std::vector<std::size_t> farther_than(const std::vector<double>& dist, double threshold,
                                      std::size_t limit) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < dist.size(); ++i)
    if (dist[i] > threshold) idx.push_back(i);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
  if (idx.size() > limit) idx.resize(limit);
  return idx;
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

NegativeSets semi_hard_negatives(const EmbeddingVector& anchor_segment,
                                 const EmbeddingVector& positive_word,
                                 const std::vector<EmbeddingVector>& candidate_words,
                                 const std::vector<EmbeddingVector>& candidate_segments,
                                 std::size_t limit) {
  const double d_pos = cosine_distance(anchor_segment, positive_word);
  std::vector<double> dw, dv;
  for (const auto& w : candidate_words) dw.push_back(cosine_distance(anchor_segment, w));
  for (const auto& v : candidate_segments) dv.push_back(cosine_distance(v, positive_word));
  return {farther_than(dw, d_pos, limit), farther_than(dv, d_pos, limit)};
}

double triplet_loss(const std::vector<TripletSample>& samples, double margin) {
  double loss = 0;
  for (const auto& s : samples) {
    const double d_pos = cosine_distance(s.segment, s.word);
    if (!s.negative_words.empty()) {
      std::vector<double> d;
      for (const auto& w : s.negative_words) d.push_back(cosine_distance(s.segment, w));
      loss += std::max(margin + d_pos - mean(d), 0.0);
    }
    if (!s.negative_segments.empty()) {
      std::vector<double> d;
      for (const auto& v : s.negative_segments) d.push_back(cosine_distance(v, s.word));
      loss += std::max(margin + d_pos - mean(d), 0.0);
    }
  }
  return loss;
}

double total_search_loss(double detection_loss, double triplet, double lambda_det) {
  return lambda_det * detection_loss + triplet;
}

ClipScore score_clip(const EmbeddingVector& word, const std::vector<ScoredProposal>& proposals,
                     double beta) {
  if (proposals.empty()) throw ValidationError("score_clip: no proposals");
  ClipScore best{-std::numeric_limits<double>::infinity(), 0};
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const double p = proposals[i].proposal.score;
    const double sc = std::pow(p, beta) * (1.0 - cosine_distance(proposals[i].embedding, word));
    if (sc > best.score) best = {sc, i};
  }
  return best;
}

double recognizer_baseline_score(const std::vector<std::string>& hypotheses,
                                 const std::string& word) {
  if (hypotheses.empty()) throw ValidationError("recognizer_baseline_score: no hypotheses");
  const std::string query = normalize_word(word);
  double best = 1.0;
  for (const auto& hyp : hypotheses) {
    std::size_t pos = 0;
    while (pos <= hyp.size()) {
      const std::size_t next = std::min(hyp.find(kNoLetterToken, pos), hyp.size());
      const std::string piece = normalize_word(hyp.substr(pos, next - pos));
      if (!piece.empty()) best = std::min(best, normalized_edit_distance(piece, query));
      pos = next + kNoLetterToken.size();
    }
  }
  return 1.0 - best;
}

RetrievalReport retrieval_eval(const ScoreMatrix& matrix,
                               const std::set<std::pair<std::string, std::string>>& relevant_pairs,
                               SearchAxis axis, const std::vector<int>& cutoffs) {
  if (matrix.scores.size() != matrix.videos.size()) throw ValidationError("retrieval_eval: incomplete matrix");
  for (const auto& row : matrix.scores)
    if (row.size() != matrix.words.size()) throw ValidationError("retrieval_eval: incomplete matrix");
  const bool word_search = axis == SearchAxis::kWordSearch;
  const auto& queries = word_search ? matrix.videos : matrix.words;
  const auto& items = word_search ? matrix.words : matrix.videos;

  RetrievalReport report;
  for (int n : cutoffs) report.mean_at_n[n] = {};
  for (std::size_t q = 0; q < queries.size(); ++q) {
    std::vector<RankedItem> ranked;
    std::set<std::string> relevant;
    for (std::size_t i = 0; i < items.size(); ++i) {
      const std::size_t v = word_search ? q : i, w = word_search ? i : q;
      ranked.push_back({items[i], matrix.scores[v][w]});
      if (relevant_pairs.count({matrix.videos[v], matrix.words[w]})) relevant.insert(items[i]);
    }
    rank_items(ranked);
    QueryResult qr;
    qr.ap_f1 = retrieval_ap_f1(ranked, relevant);
    for (int n : cutoffs) qr.at_n[n] = precision_recall_at_n(ranked, relevant, n);
    if (qr.ap_f1) {
      ++report.evaluated_queries;
      report.mean_ap += qr.ap_f1->ap;
      report.mean_f1 += qr.ap_f1->max_f1;
      for (int n : cutoffs) {
        report.mean_at_n[n].precision += qr.at_n[n].precision;
        report.mean_at_n[n].recall += qr.at_n[n].recall;
      }
    }
    report.per_query[queries[q]] = std::move(qr);
  }
  if (report.evaluated_queries) {
    const double n = static_cast<double>(report.evaluated_queries);
    report.mean_ap /= n;
    report.mean_f1 /= n;
    for (auto& [k, pr] : report.mean_at_n) {
      pr.precision /= n;
      pr.recall /= n;
    }
  }
  return report;
}

}  // namespace signspot
