#include "signspot/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "signspot/detect.hpp"

namespace signspot {

void MetricConfig::validate() const {
  for (double d : iou_thresholds)
    if (!(d >= 0 && d <= 1)) throw ValidationError("metrics: IoU thresholds must be in [0, 1]");
  for (double d : acc_thresholds)
    if (!(d <= 1)) throw ValidationError("metrics: accuracy thresholds must be <= 1");
  if (!(acc_iou_threshold >= 0 && acc_iou_threshold <= 1))
    throw ValidationError("metrics: AP@Acc IoU threshold must be in [0, 1]");
  if (recall_levels < 1) throw ValidationError("metrics: recall levels must be >= 1");
}

double interpolated_ap(const std::vector<bool>& hits, std::size_t num_relevant, int recall_levels) {
  if (num_relevant == 0) throw ValidationError("interpolated_ap: no relevant items");
  if (recall_levels < 1) throw ValidationError("interpolated_ap: recall levels must be >= 1");
  // best[c]: highest precision once c relevant items have been recovered.
  std::vector<double> best(num_relevant + 1, 0.0);
  std::size_t tp = 0;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (hits[i]) ++tp;
    best[tp] = std::max(best[tp], static_cast<double>(tp) / static_cast<double>(i + 1));
  }
  // Suffix max turns "precision at recall c" into "at recall >= c".
  for (std::size_t c = num_relevant; c-- > 0;) best[c] = std::max(best[c], best[c + 1]);
  double sum = 0;
  const auto N = static_cast<std::size_t>(recall_levels);
  for (std::size_t level = 0; level <= N; ++level) {
    // Smallest count c with c / num_relevant >= level / N, in exact integers.
    const std::size_t c = (level * num_relevant + N - 1) / N;
    sum += best[c];
  }
  return sum / static_cast<double>(N + 1);
}

namespace {

struct RankedPred {
  const std::string* video;
  std::size_t index;
  double score;
};

std::vector<RankedPred> rank_predictions(const DetectionCorpus& corpus) {
  std::vector<RankedPred> all;
  for (const auto& [vid, vd] : corpus)
    for (std::size_t i = 0; i < vd.preds.size(); ++i) all.push_back({&vid, i, vd.preds[i].score});
  std::stable_sort(all.begin(), all.end(),
                   [](const RankedPred& a, const RankedPred& b) { return a.score > b.score; });
  return all;
}

std::size_t count_gts(const DetectionCorpus& corpus) {
  std::size_t n = 0;
  for (const auto& [vid, vd] : corpus) n += vd.gts.size();
  return n;
}

// Shared greedy matcher. `gain(pred, gt)` returns the matching criterion or
// nullopt when the pair is not admissible; the largest gain wins, first gt
// on ties.
template <typename Gain>
std::vector<MatchRecord> greedy_match(const DetectionCorpus& corpus, Gain gain) {
  std::map<std::string, std::vector<bool>> used;
  for (const auto& [vid, vd] : corpus) used[vid].assign(vd.gts.size(), false);
  std::vector<MatchRecord> out;
  for (const auto& rp : rank_predictions(corpus)) {
    const auto& vd = corpus.at(*rp.video);
    auto& taken = used[*rp.video];
    MatchRecord rec{*rp.video, rp.index, std::nullopt};
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < vd.gts.size(); ++g) {
      if (taken[g]) continue;
      const auto v = gain(vd.preds[rp.index], vd.gts[g]);
      if (v && *v > best) {
        best = *v;
        rec.gt = g;
      }
    }
    if (rec.gt) taken[*rec.gt] = true;
    out.push_back(std::move(rec));
  }
  return out;
}

std::optional<double> ap_from_matches(const std::vector<MatchRecord>& matches, std::size_t num_gt,
                                      int recall_levels) {
  if (num_gt == 0) return std::nullopt;
  std::vector<bool> hits;
  hits.reserve(matches.size());
  for (const auto& m : matches) hits.push_back(m.gt.has_value());
  return interpolated_ap(hits, num_gt, recall_levels);
}

}  // namespace

std::vector<MatchRecord> match_by_iou(const DetectionCorpus& corpus, double iou_threshold) {
  return greedy_match(corpus, [&](const RecognizedSegment& p, const LabeledSegment& g) -> std::optional<double> {
    const double iou = temporal_iou(p.segment, g.segment);
    if (iou > iou_threshold) return iou;
    return std::nullopt;
  });
}

std::vector<MatchRecord> match_by_accuracy(const DetectionCorpus& corpus, double acc_threshold,
                                           double iou_threshold) {
  return greedy_match(corpus, [&](const RecognizedSegment& p, const LabeledSegment& g) -> std::optional<double> {
    if (!(temporal_iou(p.segment, g.segment) > iou_threshold)) return std::nullopt;
    const double acc = letter_accuracy(g.transcript, p.transcript);
    if (acc > acc_threshold) return acc;
    return std::nullopt;
  });
}

std::optional<double> ap_at_iou(const DetectionCorpus& corpus, double iou_threshold,
                                int recall_levels) {
  return ap_from_matches(match_by_iou(corpus, iou_threshold), count_gts(corpus), recall_levels);
}

std::optional<double> ap_at_acc(const DetectionCorpus& corpus, double acc_threshold,
                                double iou_threshold, int recall_levels) {
  return ap_from_matches(match_by_accuracy(corpus, acc_threshold, iou_threshold), count_gts(corpus),
                         recall_levels);
}

std::optional<double> ap_at_iou(const std::vector<ScoredSegment>& preds,
                                const std::vector<TimeSegment>& gts, double iou_threshold,
                                int recall_levels) {
  DetectionCorpus c;
  auto& vd = c[""];
  for (const auto& p : preds) vd.preds.push_back({p.segment, p.score, {}});
  for (const auto& g : gts) vd.gts.push_back({g, {}});
  return ap_at_iou(c, iou_threshold, recall_levels);
}

std::optional<double> ap_at_acc(const std::vector<RecognizedSegment>& preds,
                                const std::vector<LabeledSegment>& gts, double acc_threshold,
                                double iou_threshold, int recall_levels) {
  DetectionCorpus c;
  c[""] = VideoDetections{preds, gts, 0};
  return ap_at_acc(c, acc_threshold, iou_threshold, recall_levels);
}

std::vector<std::string> full_video_sequence(std::vector<LabeledSegment> segments, int num_frames) {
  std::sort(segments.begin(), segments.end(),
            [](const LabeledSegment& a, const LabeledSegment& b) { return a.segment < b.segment; });
  const std::string gap(kNoLetterToken);
  std::vector<std::string> seq;
  int cursor = 0;
  for (const auto& s : segments) {
    if (s.segment.start < cursor) throw ValidationError("full_video_sequence: segments overlap");
    if (s.segment.end > num_frames) throw ValidationError("full_video_sequence: segment beyond video end");
    if (s.segment.start > cursor) seq.push_back(gap);
    for (auto& sym : split_symbols(s.transcript)) seq.push_back(std::move(sym));
    cursor = s.segment.end;
  }
  if (cursor < num_frames) seq.push_back(gap);
  return seq;
}

MsaResult msa(const DetectionCorpus& corpus, const std::vector<double>& thresholds) {
  std::vector<double> grid = thresholds;
  if (grid.empty()) {
    for (const auto& [vid, vd] : corpus)
      for (const auto& p : vd.preds) grid.push_back(p.score);
    grid.push_back(std::numeric_limits<double>::infinity());
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  // Ground-truth sequences do not depend on δ_f.
  std::map<std::string, std::vector<std::string>> refs;
  std::size_t ref_len = 0;
  for (const auto& [vid, vd] : corpus) {
    refs[vid] = full_video_sequence(vd.gts, vd.num_frames);
    ref_len += refs[vid].size();
  }
  if (ref_len == 0) throw ValidationError("msa: empty reference (videos without frames)");

  MsaResult best{-std::numeric_limits<double>::infinity(), 0.0};
  for (double thr : grid) {
    std::size_t dist = 0;
    for (const auto& [vid, vd] : corpus) {
      std::vector<ScoredSegment> kept;
      std::vector<std::size_t> origin;
      for (std::size_t i = 0; i < vd.preds.size(); ++i)
        if (vd.preds[i].score >= thr) {
          kept.push_back({vd.preds[i].segment, vd.preds[i].score});
          origin.push_back(i);
        }
      std::vector<LabeledSegment> segs;
      for (std::size_t k : temporal_nms_indices(kept, 0.0, kept.size()))
        segs.push_back({kept[k].segment, vd.preds[origin[k]].transcript});
      dist += edit_distance(refs[vid], full_video_sequence(std::move(segs), vd.num_frames));
    }
    const double acc = 1.0 - static_cast<double>(dist) / static_cast<double>(ref_len);
    if (acc > best.msa) best = {acc, thr};
  }
  return best;
}

FrameApResult frame_ap(const std::vector<double>& scores, const std::vector<int>& labels,
                       int recall_levels) {
  if (scores.size() != labels.size()) throw ValidationError("frame_ap: size mismatch");
  std::size_t positives = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw ValidationError("frame_ap: labels must be 0 or 1");
    positives += l;
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  FrameApResult r;
  std::vector<bool> hits;
  std::size_t tp = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const bool hit = labels[order[k]] == 1;
    hits.push_back(hit);
    tp += hit;
    r.curve.push_back({scores[order[k]], static_cast<double>(tp) / static_cast<double>(k + 1),
                       positives ? static_cast<double>(tp) / static_cast<double>(positives) : 0.0});
  }
  if (positives) r.ap = interpolated_ap(hits, positives, recall_levels);
  return r;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

namespace {
std::map<std::vector<std::string>, int> ngram_counts(const std::vector<std::string>& toks, int n) {
  std::map<std::vector<std::string>, int> c;
  for (std::size_t i = 0; i + n <= toks.size(); ++i)
    ++c[std::vector<std::string>(toks.begin() + i, toks.begin() + i + n)];
  return c;
}
}  // namespace

double bleu(const std::vector<std::vector<std::string>>& hyps,
            const std::vector<std::vector<std::string>>& refs, int max_n) {
  if (hyps.size() != refs.size()) throw ValidationError("bleu: hypothesis/reference count mismatch");
  if (hyps.empty()) throw ValidationError("bleu: empty corpus");
  if (max_n < 1 || max_n > 4) throw ValidationError("bleu: max_n must be in [1, 4]");
  std::vector<double> matched(max_n, 0), total(max_n, 0);
  double hyp_len = 0, ref_len = 0;
  for (std::size_t s = 0; s < hyps.size(); ++s) {
    hyp_len += hyps[s].size();
    ref_len += refs[s].size();
    for (int n = 1; n <= max_n; ++n) {
      const auto hc = ngram_counts(hyps[s], n);
      const auto rc = ngram_counts(refs[s], n);
      for (const auto& [g, c] : hc) {
        total[n - 1] += c;
        auto it = rc.find(g);
        if (it != rc.end()) matched[n - 1] += std::min(c, it->second);
      }
    }
  }
  double log_sum = 0;
  for (int n = 0; n < max_n; ++n) {
    if (matched[n] == 0) return 0.0;
    log_sum += std::log(matched[n] / total[n]);
  }
  const double bp = hyp_len < ref_len ? std::exp(1.0 - ref_len / hyp_len) : 1.0;
  return bp * std::exp(log_sum / max_n);
}

double rouge_l(const std::vector<std::vector<std::string>>& hyps,
               const std::vector<std::vector<std::string>>& refs) {
  if (hyps.size() != refs.size()) throw ValidationError("rouge_l: hypothesis/reference count mismatch");
  if (hyps.empty()) throw ValidationError("rouge_l: empty corpus");
  double sum = 0;
  for (std::size_t s = 0; s < hyps.size(); ++s) {
    const double lcs = static_cast<double>(lcs_length(hyps[s], refs[s]));
    if (lcs == 0) continue;
    const double p = lcs / hyps[s].size(), r = lcs / refs[s].size();
    sum += 2 * p * r / (p + r);
  }
  return sum / static_cast<double>(hyps.size());
}

void rank_items(std::vector<RankedItem>& items) {
  std::sort(items.begin(), items.end(), [](const RankedItem& a, const RankedItem& b) {
    return a.score > b.score || (a.score == b.score && a.id < b.id);
  });
}

std::optional<RetrievalScores> retrieval_ap_f1(const std::vector<RankedItem>& ranked,
                                               const std::set<std::string>& relevant) {
  if (relevant.empty()) return std::nullopt;
  RetrievalScores r;
  std::size_t hits = 0;
  double prec_sum = 0;
  const double R = static_cast<double>(relevant.size());
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    if (!relevant.count(ranked[k].id)) continue;
    ++hits;
    const double p = static_cast<double>(hits) / static_cast<double>(k + 1);
    prec_sum += p;
    // F1 can only peak right after a hit.
    const double rec = static_cast<double>(hits) / R;
    r.max_f1 = std::max(r.max_f1, 2 * p * rec / (p + rec));
  }
  r.ap = prec_sum / R;
  return r;
}

PrecisionRecall precision_recall_at_n(const std::vector<RankedItem>& ranked,
                                      const std::set<std::string>& relevant, int n) {
  if (n < 1) throw ValidationError("precision_recall_at_n: N must be >= 1");
  std::size_t hits = 0;
  for (std::size_t k = 0; k < ranked.size() && k < static_cast<std::size_t>(n); ++k)
    hits += relevant.count(ranked[k].id);
  PrecisionRecall pr;
  pr.precision = static_cast<double>(hits) / n;
  pr.recall = relevant.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(relevant.size());
  return pr;
}

}  // namespace signspot
