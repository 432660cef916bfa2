#include "signspot/detect.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace signspot {

double temporal_iou(const RealSegment& a, const RealSegment& b) {
  const double inter = std::max(0.0, std::min(a.end, b.end) - std::max(a.start, b.start));
  const double uni = a.length() + b.length() - inter;
  return uni > 0 ? inter / uni : 0.0;
}

std::vector<double> AnchorSet::search_scales() {
  return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 12, 14, 16, 18, 20, 24, 32, 40, 60, 75};
}

std::vector<RealSegment> generate_anchors(const AnchorSet& anchors) {
  if (anchors.stride < 1) throw ValidationError("anchors: stride must be positive");
  if (anchors.num_positions < 1) throw ValidationError("anchors: num_positions must be positive");
  for (std::size_t i = 0; i < anchors.lengths.size(); ++i) {
    if (!(anchors.lengths[i] > 0)) throw ValidationError("anchors: lengths must be positive");
    if (i > 0 && !(anchors.lengths[i] > anchors.lengths[i - 1]))
      throw ValidationError("anchors: lengths must be ascending and distinct");
  }
  std::vector<RealSegment> out;
  out.reserve(anchors.lengths.size() * anchors.num_positions);
  for (int p = 0; p < anchors.num_positions; ++p) {
    const double c = (p + 0.5) * anchors.stride;
    for (double l : anchors.lengths) out.emplace_back(c - l / 2, c + l / 2);
  }
  return out;
}

void DetectConfig::validate() const {
  if (!(0 <= neg_iou && neg_iou <= pos_iou && pos_iou <= 1))
    throw ValidationError("detect config: need 0 <= neg_iou <= pos_iou <= 1");
  if (!(0 <= nms_iou && nms_iou <= 1)) throw ValidationError("detect config: nms_iou must be in [0, 1]");
}

std::vector<AnchorAssignment> label_anchors(const std::vector<RealSegment>& anchors,
                                            const std::vector<TimeSegment>& gts,
                                            const DetectConfig& cfg) {
  cfg.validate();
  std::vector<AnchorAssignment> out(anchors.size());
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    std::optional<std::size_t> best;
    double best_iou = 0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      const double iou = temporal_iou(anchors[a], RealSegment(gts[g]));
      if (!best || iou > best_iou) {
        best = g;
        best_iou = iou;
      }
    }
    auto& as = out[a];
    as.best_iou = best_iou;
    if (best && best_iou > cfg.pos_iou) {
      as.label = AnchorLabel::kPositive;
      as.gt = best;
    } else if (best_iou < cfg.neg_iou) {
      as.label = AnchorLabel::kNegative;
    } else {
      as.label = AnchorLabel::kIgnore;
    }
  }
  return out;
}

SegmentDelta delta_encode(const RealSegment& anchor, const RealSegment& gt) {
  if (!(anchor.length() > 0 && gt.length() > 0))
    throw ValidationError("delta_encode: segments must have positive length");
  return {(gt.center() - anchor.center()) / anchor.length(), std::log(gt.length() / anchor.length())};
}

DecodedSegment delta_decode(const RealSegment& anchor, const SegmentDelta& delta) {
  const double c = anchor.center() + delta.center * anchor.length();
  const double l = anchor.length() * std::exp(delta.log_length);
  DecodedSegment d;
  d.real = RealSegment(c - l / 2, c + l / 2);
  int s = static_cast<int>(std::floor(d.real.start + 0.5));
  int e = static_cast<int>(std::floor(d.real.end + 0.5));
  s = std::max(0, s);
  if (e - s < 1) {
    e = s + 1;
    d.clamped = true;
  }
  d.rounded = TimeSegment(s, e);
  return d;
}

std::vector<ScoredSegment> frame_probs_to_segments(const std::vector<double>& probs,
                                                   const std::vector<double>& thresholds) {
  for (double p : probs)
    if (!(p >= 0 && p <= 1)) throw ValidationError("frame_probs_to_segments: probabilities must be in [0, 1]");
  std::map<TimeSegment, double> pool;
  const int T = static_cast<int>(probs.size());
  for (double thr : thresholds) {
    int t = 0;
    while (t < T) {
      if (probs[t] < thr) {
        ++t;
        continue;
      }
      const int start = t;
      double sum = 0;
      while (t < T && probs[t] >= thr) sum += probs[t++];
      const double score = sum / (t - start);
      auto [it, inserted] = pool.try_emplace(TimeSegment(start, t), score);
      if (!inserted) it->second = std::max(it->second, score);
    }
  }
  std::vector<ScoredSegment> out;
  out.reserve(pool.size());
  for (const auto& [seg, score] : pool) out.push_back({seg, score});
  return out;
}

std::vector<double> default_frame_thresholds() {
  std::vector<double> t;
  for (int i = 9; i >= 1; --i) t.push_back(i / 10.0);
  return t;
}

std::vector<std::size_t> temporal_nms_indices(const std::vector<ScoredSegment>& segs,
                                              double iou_threshold, std::size_t max_keep) {
  if (iou_threshold < 0 || iou_threshold > 1)
    throw ValidationError("temporal_nms: threshold must be in [0, 1]");
  std::vector<std::size_t> order(segs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return segs[a].score > segs[b].score; });
  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    if (kept.size() >= max_keep) break;
    bool overlaps = false;
    for (std::size_t k : kept)
      if (temporal_iou(segs[i].segment, segs[k].segment) > iou_threshold) {
        overlaps = true;
        break;
      }
    if (!overlaps) kept.push_back(i);
  }
  return kept;
}

std::vector<ScoredSegment> temporal_nms(const std::vector<ScoredSegment>& segs, double iou_threshold,
                                        std::size_t max_keep) {
  std::vector<ScoredSegment> out;
  for (std::size_t i : temporal_nms_indices(segs, iou_threshold, max_keep)) out.push_back(segs[i]);
  return out;
}

std::vector<ScoredSegment> filter_by_confidence(const std::vector<ScoredSegment>& segs,
                                                double min_confidence) {
  std::vector<ScoredSegment> out;
  std::copy_if(segs.begin(), segs.end(), std::back_inserter(out),
               [&](const ScoredSegment& s) { return s.score > min_confidence; });
  return out;
}

}  // namespace signspot
