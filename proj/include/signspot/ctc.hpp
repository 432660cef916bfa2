#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "signspot/core.hpp"
#include "signspot/lm.hpp"

namespace signspot {

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

/// log(exp(a) + exp(b)) without overflow; kLogZero is the identity.
double log_add(double a, double b);

/// T x L frame-level label probabilities.
class Posteriorgram {
 public:
  /// Validates every row: nonnegative, finite, sums to 1 within `tol`.
  /// Throws DataError carrying the offending row index.
  Posteriorgram(Alphabet alphabet, std::vector<std::vector<double>> frames, double tol = 1e-6);

  const Alphabet& alphabet() const { return alphabet_; }
  int num_frames() const { return static_cast<int>(frames_.size()); }
  int num_labels() const { return alphabet_.num_labels(); }
  double prob(int t, int label) const { return frames_[t][label]; }
  const std::vector<double>& frame(int t) const { return frames_[t]; }

 private:
  Alphabet alphabet_;
  std::vector<std::vector<double>> frames_;
};

/// Merge runs of equal labels, then drop blanks.
std::vector<int> collapse(std::span<const int> path, const Alphabet& alphabet);

struct CtcScore {
  double log_prob = kLogZero;
  /// False when no frame labeling can produce the labels in T frames.
  bool feasible = false;
};

/// Minimum frame count that can emit `labels`: one per label plus a blank
/// between each pair of equal neighbours.
int min_frames_for(std::span<const int> labels);

/// log Σ over all paths collapsing to `labels` (forward algorithm, log space).
CtcScore sequence_log_prob(const Posteriorgram& post, std::span<const int> labels);

struct GreedyResult {
  std::vector<int> labels;
  std::vector<int> path;
};

/// Per-frame argmax (lowest label on ties), then collapse.
GreedyResult greedy_decode(const Posteriorgram& post);

struct BeamConfig {
  int beam_width = 16;
  double lm_weight = 0.0;
  double insertion_bias = 0.0;
};

struct Hypothesis {
  std::vector<int> labels;
  double ctc_log_prob = kLogZero;
  double lm_log_prob = 0.0;  // includes end-of-sequence; 0 when no LM
  double score = kLogZero;   // ctc + lm_weight * lm + insertion_bias * |labels|
};

// Prefix beam search over collapsed label prefixes. Each prefix keeps the
// merged (ends-in-blank, ends-in-non-blank) path probabilities; the LM and
// insertion bias enter the pruning score as each symbol is appended, and the
// end-of-sequence LM term is added before the final ranking. Prefixes with
// zero CTC probability are dropped. Ties rank lexicographically by labels.
// The LM is optional (nullptr); when present every non-blank label's symbol
// must be in its vocabulary.
std::vector<Hypothesis> beam_decode(const Posteriorgram& post, const NGramModel* lm,
                                    const BeamConfig& cfg);

}  // namespace signspot
