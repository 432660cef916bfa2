#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "signspot/core.hpp"

namespace signspot {

struct MetricConfig {
  std::vector<double> iou_thresholds{0.1, 0.3, 0.5};
  std::vector<double> acc_thresholds{0.0, 0.2, 0.4};
  double acc_iou_threshold = 0.0;  // overlap gate for AP@Acc
  int recall_levels = 100;
  /// MSA score thresholds; empty means every distinct prediction score.
  std::vector<double> msa_thresholds;

  void validate() const;
};

/// Mean over recall levels r = 0, 1/N, ..., 1 of the highest precision
/// reached at any recall >= r (0 when that recall is never reached).
/// `hits` marks each ranked prediction as a true positive or not.
double interpolated_ap(const std::vector<bool>& hits, std::size_t num_relevant, int recall_levels);

/// Ground truth and predictions of one video.
struct VideoDetections {
  std::vector<RecognizedSegment> preds;
  std::vector<LabeledSegment> gts;
  int num_frames = 0;
};

/// Keyed by video id; iteration order (sorted ids) fixes every tie-break.
using DetectionCorpus = std::map<std::string, VideoDetections>;

struct MatchRecord {
  std::string video;
  std::size_t pred = 0;               // index into that video's preds
  std::optional<std::size_t> gt;      // matched gt, if any
};

/// Predictions in global rank order (score desc, then video id, then index),
/// each greedily matched to the unmatched gt of highest IoU above the threshold.
std::vector<MatchRecord> match_by_iou(const DetectionCorpus& corpus, double iou_threshold);

/// As match_by_iou, but the unmatched gt maximizing letter accuracy of the
/// prediction's transcript is chosen, subject to Acc > acc_threshold and
/// IoU > iou_threshold.
std::vector<MatchRecord> match_by_accuracy(const DetectionCorpus& corpus, double acc_threshold,
                                           double iou_threshold);

/// nullopt when the corpus has no ground truth.
std::optional<double> ap_at_iou(const DetectionCorpus& corpus, double iou_threshold,
                                int recall_levels = 100);
std::optional<double> ap_at_acc(const DetectionCorpus& corpus, double acc_threshold,
                                double iou_threshold = 0.0, int recall_levels = 100);

/// Single-video convenience forms.
std::optional<double> ap_at_iou(const std::vector<ScoredSegment>& preds,
                                const std::vector<TimeSegment>& gts, double iou_threshold,
                                int recall_levels = 100);
std::optional<double> ap_at_acc(const std::vector<RecognizedSegment>& preds,
                                const std::vector<LabeledSegment>& gts, double acc_threshold,
                                double iou_threshold = 0.0, int recall_levels = 100);

/// Whole-video letter sequence: transcripts of time-ordered, non-overlapping
/// segments joined by the no-letter token wherever uncovered frames exist
/// (before the first, between two, after the last segment).
std::vector<std::string> full_video_sequence(std::vector<LabeledSegment> segments, int num_frames);

struct MsaResult {
  double msa = 0.0;
  double threshold = 0.0;  // δ_f attaining the maximum (smallest on ties)
};

/// For each δ_f: keep predictions with score >= δ_f, suppress any temporal
/// overlap greedily, build the whole-video sequence and score it against the
/// ground-truth sequence (edit distances and lengths pooled over videos).
/// Returns the maximum. With an empty grid, every distinct prediction score
/// plus +inf (no predictions kept) is tried.
MsaResult msa(const DetectionCorpus& corpus, const std::vector<double>& thresholds = {});

struct PrPoint {
  double threshold = 0, precision = 0, recall = 0;
};

struct FrameApResult {
  std::vector<PrPoint> curve;  // one point per ranked frame
  std::optional<double> ap;    // nullopt without positive frames
};

FrameApResult frame_ap(const std::vector<double>& scores, const std::vector<int>& labels,
                       int recall_levels = 100);

/// Whitespace tokenization with ASCII lower-casing.
std::vector<std::string> tokenize(std::string_view text);

/// Corpus BLEU-n, uniform weights, clipped counts, single reference.
double bleu(const std::vector<std::vector<std::string>>& hyps,
            const std::vector<std::vector<std::string>>& refs, int max_n);

/// Mean sentence-level ROUGE-L F1.
double rouge_l(const std::vector<std::vector<std::string>>& hyps,
               const std::vector<std::vector<std::string>>& refs);

struct RankedItem {
  std::string id;
  double score = 0;
};

/// Sorts by score descending, ties by id ascending.
void rank_items(std::vector<RankedItem>& items);

struct RetrievalScores {
  double ap = 0;
  double max_f1 = 0;
};

/// `ranked` is taken in the given order. nullopt when nothing is relevant.
std::optional<RetrievalScores> retrieval_ap_f1(const std::vector<RankedItem>& ranked,
                                               const std::set<std::string>& relevant);

struct PrecisionRecall {
  double precision = 0, recall = 0;
};

PrecisionRecall precision_recall_at_n(const std::vector<RankedItem>& ranked,
                                      const std::set<std::string>& relevant, int n);

}  // namespace signspot
