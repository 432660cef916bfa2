#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "signspot/core.hpp"

namespace signspot {

/// Real-valued interval, used for anchors and undecoded proposals.
struct RealSegment {
  double start = 0, end = 0;

  RealSegment() = default;
  RealSegment(double s, double e) : start(s), end(e) {}
  RealSegment(const TimeSegment& s) : start(s.start), end(s.end) {}  // NOLINT: implicit by intent

  double center() const { return 0.5 * (start + end); }
  double length() const { return end - start; }
};

double temporal_iou(const RealSegment& a, const RealSegment& b);

/// Anchor scales per feature position.
struct AnchorSet {
  std::vector<double> lengths;
  int stride = 8;
  int num_positions = 0;

  /// Scales used for fingerspelling proposals, in multiples of the stride.
  static std::vector<double> search_scales();
};

/// Anchors ordered by position, then by length. Position p is centred at
/// (p + 0.5) * stride.
std::vector<RealSegment> generate_anchors(const AnchorSet& anchors);

struct DetectConfig {
  double pos_iou = 0.7;
  double neg_iou = 0.3;
  double nms_iou = 0.7;
  double min_confidence = 0.5;

  void validate() const;
};

enum class AnchorLabel { kNegative, kIgnore, kPositive };

struct AnchorAssignment {
  AnchorLabel label = AnchorLabel::kNegative;
  std::optional<std::size_t> gt;  // matched ground truth for positives
  double best_iou = 0.0;
};

/// Positive iff the best IoU with any ground truth exceeds pos_iou (matched
/// to the first gt attaining it), negative iff it is below neg_iou.
std::vector<AnchorAssignment> label_anchors(const std::vector<RealSegment>& anchors,
                                            const std::vector<TimeSegment>& gts,
                                            const DetectConfig& cfg);

struct SegmentDelta {
  double center = 0;  // (c* - c) / l
  double log_length = 0;  // log(l* / l)
};

SegmentDelta delta_encode(const RealSegment& anchor, const RealSegment& gt);

struct DecodedSegment {
  RealSegment real;       // before rounding
  TimeSegment rounded;    // endpoints rounded half-up, start clipped at 0
  bool clamped = false;   // rounded length fell below one frame and was forced to 1
};

DecodedSegment delta_decode(const RealSegment& anchor, const SegmentDelta& delta);

/// Baseline frame classifier to segments: for each threshold, maximal runs
/// of frames with prob >= threshold, scored by their mean prob. Runs found
/// at several thresholds are merged keeping the highest score. Output is
/// sorted by (start, end).
std::vector<ScoredSegment> frame_probs_to_segments(const std::vector<double>& probs,
                                                   const std::vector<double>& thresholds);

/// 0.9, 0.8, ..., 0.1
std::vector<double> default_frame_thresholds();

/// Greedy NMS on temporal IoU; same tie rules as frame_nms.
std::vector<ScoredSegment> temporal_nms(const std::vector<ScoredSegment>& segs, double iou_threshold,
                                        std::size_t max_keep = std::numeric_limits<std::size_t>::max());
std::vector<std::size_t> temporal_nms_indices(const std::vector<ScoredSegment>& segs,
                                              double iou_threshold, std::size_t max_keep);

/// Keeps segments whose score is strictly above `min_confidence`.
std::vector<ScoredSegment> filter_by_confidence(const std::vector<ScoredSegment>& segs,
                                                double min_confidence);

}  // namespace signspot
