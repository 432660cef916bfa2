#include "signspot/lm.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "signspot/core.hpp"

namespace signspot {

NGramModel::NGramModel(int order, double k, std::vector<std::string> vocab,
                       std::map<Context, std::vector<double>> counts)
    : order_(order), k_(k), vocab_(std::move(vocab)), counts_(std::move(counts)) {
  if (order_ < 1) throw ValidationError("ngram: order must be >= 1");
  if (!(k_ >= 0) || !std::isfinite(k_)) throw ValidationError("ngram: k must be finite and >= 0");
  for (int i = 0; i < static_cast<int>(vocab_.size()); ++i)
    if (!index_.emplace(vocab_[i], i).second)
      throw ValidationError("ngram: duplicate vocabulary symbol '" + vocab_[i] + "'");
  if (!counts_.count(Context{})) counts_.emplace(Context{}, std::vector<double>(num_outcomes(), 0.0));
  for (const auto& [ctx, c] : counts_) {
    if (static_cast<int>(ctx.size()) > order_ - 1)
      throw ValidationError("ngram: context longer than order-1");
    for (int s : ctx)
      if (s < 0 || s > bos() || s == eos()) throw ValidationError("ngram: invalid context symbol");
    if (static_cast<int>(c.size()) != num_outcomes())
      throw ValidationError("ngram: count vector has wrong size");
    double total = 0;
    for (double x : c) {
      if (!(x >= 0) || !std::isfinite(x)) throw ValidationError("ngram: invalid count");
      total += x;
    }
    if (total + k_ * num_outcomes() <= 0) throw ValidationError("ngram: context has no mass");
    totals_[ctx] = total;
  }
}

int NGramModel::index_of(std::string_view symbol) const {
  auto it = index_.find(symbol);
  return it == index_.end() ? -1 : it->second;
}

const std::vector<double>& NGramModel::select(std::span<const int> history) const {
  // Padded history suffix of length order-1, then shrink until observed.
  const int want = order_ - 1;
  Context ctx(want, bos());
  const int n = static_cast<int>(history.size());
  for (int i = 0; i < want && i < n; ++i) ctx[want - 1 - i] = history[n - 1 - i];
  while (!ctx.empty()) {
    auto it = counts_.find(ctx);
    if (it != counts_.end()) return it->second;
    ctx.erase(ctx.begin());
  }
  return counts_.at(ctx);
}

double NGramModel::log_prob_next(std::span<const int> history, int next) const {
  if (next < 0 || next >= num_outcomes()) throw ValidationError("ngram: symbol out of range");
  const auto& c = select(history);
  double total = 0;
  for (double x : c) total += x;
  return std::log((c[next] + k_) / (total + k_ * num_outcomes()));
}

std::vector<double> NGramModel::distribution(std::span<const int> history) const {
  const auto& c = select(history);
  double total = 0;
  for (double x : c) total += x;
  std::vector<double> p(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) p[i] = (c[i] + k_) / (total + k_ * num_outcomes());
  return p;
}

double NGramModel::sequence_log_prob(std::span<const int> seq) const {
  double lp = 0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (seq[i] < 0 || seq[i] >= eos()) throw ValidationError("ngram: symbol out of vocabulary");
    lp += log_prob_next(seq.first(i), seq[i]);
  }
  return lp + log_prob_next(seq, eos());
}

std::vector<int> NGramModel::encode(std::span<const std::string> seq) const {
  std::vector<int> ids;
  ids.reserve(seq.size());
  for (const auto& s : seq) {
    const int id = index_of(s);
    if (id < 0) throw ValidationError("ngram: out-of-vocabulary symbol '" + s + "'");
    ids.push_back(id);
  }
  return ids;
}

double NGramModel::sequence_log_prob(std::span<const std::string> seq) const {
  return sequence_log_prob(encode(seq));
}

NGramModel train_ngram(std::span<const std::vector<std::string>> corpus, int order,
                       double smoothing_k, std::vector<std::string> vocab) {
  if (corpus.empty()) throw ValidationError("train_ngram: empty corpus");
  if (!(smoothing_k > 0)) throw ValidationError("train_ngram: smoothing k must be > 0");
  if (order < 1) throw ValidationError("train_ngram: order must be >= 1");
  std::set<std::string> symbols(vocab.begin(), vocab.end());
  for (const auto& seq : corpus) symbols.insert(seq.begin(), seq.end());
  if (vocab.empty()) vocab.assign(symbols.begin(), symbols.end());
  else
    for (const auto& s : symbols)
      if (std::find(vocab.begin(), vocab.end(), s) == vocab.end()) vocab.push_back(s);

  // Build an empty model just to reuse encode(); counts are filled below.
  NGramModel indexer(order, smoothing_k, vocab, {});
  const int outcomes = indexer.num_outcomes();
  const int bos = indexer.bos();
  std::map<NGramModel::Context, std::vector<double>> counts;
  for (const auto& seq : corpus) {
    auto ids = indexer.encode(seq);
    ids.push_back(indexer.eos());
    std::vector<int> padded(order - 1, bos);
    padded.insert(padded.end(), ids.begin(), ids.end());
    for (std::size_t i = order - 1; i < padded.size(); ++i) {
      for (int len = 0; len <= order - 1; ++len) {
        NGramModel::Context ctx(padded.begin() + (i - len), padded.begin() + i);
        auto& c = counts[ctx];
        if (c.empty()) c.assign(outcomes, 0.0);
        c[padded[i]] += 1.0;
      }
    }
  }
  return NGramModel(order, smoothing_k, std::move(vocab), std::move(counts));
}

double perplexity(const NGramModel& model, std::span<const std::vector<std::string>> corpus) {
  if (corpus.empty()) throw ValidationError("perplexity: empty corpus");
  double total = 0;
  std::size_t predicted = 0;
  for (const auto& seq : corpus) {
    total += model.sequence_log_prob(std::span<const std::string>(seq));
    predicted += seq.size() + 1;
  }
  return std::exp(-total / static_cast<double>(predicted));
}

}  // namespace signspot
