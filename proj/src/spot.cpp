#include "signspot/spot.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace signspot {

void SpotConfig::validate() const {
  if (window_len < 1 || stride < 1) throw ValidationError("spot: window length and stride must be positive");
  if (!(delta_l >= 0 && delta_l <= 1)) throw ValidationError("spot: delta_l must be in [0, 1]");
  if (!(delta_f >= 0 && delta_f <= 1)) throw ValidationError("spot: delta_f must be in [0, 1]");
  if (!(min_confidence >= 0 && min_confidence <= 1))
    throw ValidationError("spot: min_confidence must be in [0, 1]");
}

std::vector<TimeSegment> sliding_windows(int num_frames, int window_len, int stride) {
  if (num_frames < 1 || window_len < 1 || stride < 1)
    throw ValidationError("sliding_windows: arguments must be positive");
  std::vector<TimeSegment> out;
  if (num_frames <= window_len) return {TimeSegment(0, num_frames)};
  for (int s = 0; s + window_len <= num_frames; s += stride) out.emplace_back(s, s + window_len);
  return out;
}

void validate_windows(const std::vector<WindowProb>& windows, std::size_t vocab_size) {
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto& p = windows[i].probs;
    if (p.size() != vocab_size) throw DataError("window " + std::to_string(i) + ": wrong vector size", i);
    double sum = 0;
    for (double x : p) {
      if (!std::isfinite(x) || x < 0)
        throw DataError("window " + std::to_string(i) + ": negative or non-finite probability", i);
      sum += x;
    }
    if (sum > 1 + 1e-6) {
      std::ostringstream os;
      os << "window " << i << ": probabilities sum to " << sum;
      throw DataError(os.str(), i);
    }
  }
}

namespace {

// Distinct normalized sentence words in order of first appearance.
std::vector<std::string> distinct_words(const std::vector<std::string>& sentence_words) {
  std::vector<std::string> out;
  for (const auto& w : sentence_words) {
    auto n = normalize_word(w);
    if (!n.empty() && std::find(out.begin(), out.end(), n) == out.end()) out.push_back(std::move(n));
  }
  return out;
}

bool by_position(const SpottedSign& a, const SpottedSign& b) {
  if (a.segment != b.segment) return a.segment < b.segment;
  if (a.kind != b.kind) return a.kind < b.kind;
  return a.word < b.word;
}

}  // namespace

std::vector<SpottedSign> spot_lexical(const std::vector<WindowProb>& windows,
                                      const std::vector<std::string>& sentence_words,
                                      const std::map<std::string, int>& vocab, double delta_l) {
  std::map<std::string, int> normalized;
  for (const auto& [w, idx] : vocab) normalized.try_emplace(normalize_word(w), idx);

  std::vector<std::size_t> order(windows.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return windows[a].segment < windows[b].segment;
  });

  std::vector<SpottedSign> out;
  for (const auto& word : distinct_words(sentence_words)) {
    auto it = normalized.find(word);
    if (it == normalized.end()) continue;
    const std::size_t idx = static_cast<std::size_t>(it->second);
    const WindowProb* best = nullptr;
    for (std::size_t i : order) {
      const auto& w = windows[i];
      if (idx >= w.probs.size()) throw ValidationError("spot_lexical: vocabulary index out of range");
      if (w.probs[idx] >= delta_l && (!best || w.probs[idx] > best->probs[idx])) best = &w;
    }
    if (best) out.push_back({best->segment, word, best->probs[idx], SignKind::kLexical, {}, 0.0});
  }
  std::sort(out.begin(), out.end(), by_position);
  return out;
}

std::vector<SpottedSign> spot_fingerspelling(const std::vector<ScoredSegment>& proposals,
                                             const std::vector<std::string>& hypotheses,
                                             const std::vector<std::string>& sentence_words,
                                             double delta_f, double min_confidence) {
  if (proposals.size() != hypotheses.size())
    throw ValidationError("spot_fingerspelling: one hypothesis per proposal required");
  const auto words = distinct_words(sentence_words);
  std::map<std::string, SpottedSign> best;  // per word
  auto better = [](const SpottedSign& a, const SpottedSign& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    if (a.score != b.score) return a.score > b.score;
    return a.segment < b.segment;
  };
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    if (!(proposals[i].score > min_confidence)) continue;
    const std::string hyp = normalize_word(hypotheses[i]);
    if (hyp.empty() || words.empty()) continue;
    std::size_t arg = 0;
    double d = normalized_edit_distance(words[0], hyp);
    for (std::size_t w = 1; w < words.size(); ++w) {
      const double dw = normalized_edit_distance(words[w], hyp);
      if (dw < d) {
        d = dw;
        arg = w;
      }
    }
    if (d > delta_f) continue;
    SpottedSign cand{proposals[i].segment, words[arg], proposals[i].score, SignKind::kFingerspelled,
                     hypotheses[i], d};
    auto [it, inserted] = best.try_emplace(words[arg], cand);
    if (!inserted && better(cand, it->second)) it->second = cand;
  }
  std::vector<SpottedSign> out;
  for (auto& [w, s] : best) out.push_back(std::move(s));
  std::sort(out.begin(), out.end(), by_position);
  return out;
}

std::vector<SpottedSign> spot_signs(const std::vector<WindowProb>& windows,
                                    const std::map<std::string, int>& vocab,
                                    const std::vector<ScoredSegment>& proposals,
                                    const std::vector<std::string>& hypotheses,
                                    const std::vector<std::string>& sentence_words,
                                    const SpotConfig& cfg) {
  cfg.validate();
  validate_windows(windows, vocab.size());
  auto out = spot_lexical(windows, sentence_words, vocab, cfg.delta_l);
  auto fs = spot_fingerspelling(proposals, hypotheses, sentence_words, cfg.delta_f, cfg.min_confidence);
  out.insert(out.end(), fs.begin(), fs.end());
  std::sort(out.begin(), out.end(), by_position);
  return out;
}

}  // namespace signspot
