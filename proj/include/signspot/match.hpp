#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "signspot/core.hpp"
#include "signspot/metrics.hpp"

namespace signspot {

using EmbeddingVector = std::vector<double>;

struct MatchConfig {
  // IoU gate for generated positives. A threshold of 1.0 under a strict ">"
  // would admit nothing, so at >= 1.0 the gate becomes ">=" (exact matches).
  double delta_iou = 1.0;
  double delta_is = 0.8;
  int num_sampled = 5;          // K proposals sampled into the positive set
  double margin = 0.45;
  int negatives_per_set = 5;
  double beta = 1.0;
  double lambda_det = 0.1;
  int test_proposals = 50;      // M proposals kept at test time

  void validate() const;
};

/// 1 - a.b / (|a||b|), clamped to [0, 2]. Throws on zero norm or size mismatch.
double cosine_distance(const EmbeddingVector& a, const EmbeddingVector& b);

/// P_g ∪ P_k: ground truth plus up to K proposals (sampled without
/// replacement with the given seed) whose IoU and IS against some ground
/// truth pass the gates; a sampled proposal takes the word of the first
/// such ground truth. Ground truth comes first, then samples in proposal
/// order. Identical (segment, word) pairs appear once.
std::vector<LabeledSegment> build_positive_set(const std::vector<LabeledSegment>& gts,
                                               const std::vector<TimeSegment>& proposals,
                                               const MatchConfig& cfg, std::uint64_t seed);

struct NegativeSets {
  std::vector<std::size_t> words;     // indices into candidate words
  std::vector<std::size_t> segments;  // indices into candidate segments
};

/// Semi-hard negatives: words farther from the anchor segment than the
/// positive word, and segments farther from the positive word than the
/// anchor segment. Each set keeps the `limit` nearest qualifying candidates.
NegativeSets semi_hard_negatives(const EmbeddingVector& anchor_segment,
                                 const EmbeddingVector& positive_word,
                                 const std::vector<EmbeddingVector>& candidate_words,
                                 const std::vector<EmbeddingVector>& candidate_segments,
                                 std::size_t limit);

/// One positive pair with the embeddings of its negatives.
struct TripletSample {
  EmbeddingVector segment;
  EmbeddingVector word;
  std::vector<EmbeddingVector> negative_words;
  std::vector<EmbeddingVector> negative_segments;
};

/// Σ over pairs of both hinge terms max(m + d(pos) - mean d(neg), 0). An
/// empty negative set contributes zero for its term.
double triplet_loss(const std::vector<TripletSample>& samples, double margin);

/// lambda_det * detection_loss + triplet.
double total_search_loss(double detection_loss, double triplet, double lambda_det);

struct ScoredProposal {
  ScoredSegment proposal;  // score is p_det
  EmbeddingVector embedding;
};

struct ClipScore {
  double score = 0;
  std::size_t best = 0;  // index of the winning proposal
};

/// max over proposals of p_det^beta * (1 - d(proposal, word)); earliest on ties.
ClipScore score_clip(const EmbeddingVector& word, const std::vector<ScoredProposal>& proposals,
                     double beta);

/// 1 - min normalized edit distance between the query and any word of any
/// hypothesis (words separated by the no-letter token). Case-insensitive.
double recognizer_baseline_score(const std::vector<std::string>& hypotheses,
                                 const std::string& word);

/// Score matrix: rows are videos, columns are words.
struct ScoreMatrix {
  std::vector<std::string> videos;
  std::vector<std::string> words;
  std::vector<std::vector<double>> scores;  // [video][word]
};

struct QueryResult {
  std::optional<RetrievalScores> ap_f1;  // nullopt without relevant items
  std::map<int, PrecisionRecall> at_n;
};

struct RetrievalReport {
  std::map<std::string, QueryResult> per_query;
  double mean_ap = 0;
  double mean_f1 = 0;
  std::map<int, PrecisionRecall> mean_at_n;
  std::size_t evaluated_queries = 0;  // queries with at least one relevant item
};

enum class SearchAxis {
  kWordSearch,   // FWS: each video ranks the words
  kVideoSearch,  // FVS: each word ranks the videos
};

/// Ranks items per query (score descending, ties by id) and averages
/// AP / max-F1 / P@N / R@N over queries that have relevant items.
RetrievalReport retrieval_eval(const ScoreMatrix& matrix,
                               const std::set<std::pair<std::string, std::string>>& relevant_pairs,
                               SearchAxis axis, const std::vector<int>& cutoffs);

}  // namespace signspot
