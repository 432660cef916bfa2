#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "signspot/core.hpp"

namespace signspot {

// Character n-gram model with add-k smoothing.
//
// Symbols are indexed 0..V-2 for the vocabulary and V-1 for end-of-sequence.
// Histories are padded on the left with a begin-of-sequence marker (index V,
// never predicted), so every prediction sees exactly order-1 context symbols.
// A context that was never observed backs off to its longest observed suffix;
// the empty context is always present.
class NGramModel {
 public:
  using Context = std::vector<int>;

  /// `counts` maps contexts (length <= order-1) to next-symbol counts of size V.
  /// Requires k >= 0; every stored context must have positive normalizer.
  NGramModel(int order, double k, std::vector<std::string> vocab,
             std::map<Context, std::vector<double>> counts);

  int order() const { return order_; }
  double k() const { return k_; }
  const std::vector<std::string>& vocab() const { return vocab_; }
  /// Number of predicted outcomes: vocabulary plus end-of-sequence.
  int num_outcomes() const { return static_cast<int>(vocab_.size()) + 1; }
  int eos() const { return static_cast<int>(vocab_.size()); }
  int bos() const { return static_cast<int>(vocab_.size()) + 1; }
  const std::map<Context, std::vector<double>>& counts() const { return counts_; }

  /// Index of a vocabulary symbol, or -1.
  int index_of(std::string_view symbol) const;

  /// log P(next | history). `history` is the unpadded prefix of the sequence.
  double log_prob_next(std::span<const int> history, int next) const;
  /// Full distribution over outcomes at the context selected for `history`.
  std::vector<double> distribution(std::span<const int> history) const;

  /// Σ log P(s_i | s_<i) + log P(eos | s).
  double sequence_log_prob(std::span<const int> seq) const;
  /// Same over symbol strings; throws ValidationError for out-of-vocabulary symbols.
  double sequence_log_prob(std::span<const std::string> seq) const;
  std::vector<int> encode(std::span<const std::string> seq) const;

 private:
  const std::vector<double>& select(std::span<const int> history) const;

  int order_;
  double k_;
  std::vector<std::string> vocab_;
  std::map<std::string, int, std::less<>> index_;
  std::map<Context, std::vector<double>> counts_;
  std::map<Context, double> totals_;
};

/// Counts every (context suffix, next symbol) event in the corpus. The
/// vocabulary is `vocab` when given, otherwise the sorted set of symbols seen.
NGramModel train_ngram(std::span<const std::vector<std::string>> corpus, int order,
                       double smoothing_k, std::vector<std::string> vocab = {});

/// exp(-Σ log P / number of predicted symbols including end-of-sequence).
double perplexity(const NGramModel& model, std::span<const std::vector<std::string>> corpus);

}  // namespace signspot
