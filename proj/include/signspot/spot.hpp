#pragma once

#include <map>
#include <string>
#include <vector>

#include "signspot/core.hpp"

namespace signspot {

struct SpotConfig {
  int window_len = 32;
  int stride = 8;
  double delta_l = 0.6;         // minimum word probability for lexical signs
  double delta_f = 0.2;         // maximum normalized edit distance for fingerspelling
  double min_confidence = 0.5;  // proposals must score strictly above this

  void validate() const;
};

/// Windows of `window_len` frames every `stride` frames; a clip shorter than
/// one window yields a single window covering it.
std::vector<TimeSegment> sliding_windows(int num_frames, int window_len, int stride);

/// Output of the isolated-sign recognizer for one window.
struct WindowProb {
  TimeSegment segment;
  std::vector<double> probs;  // indexed by vocabulary position
};

/// Throws DataError (with the window index) unless each vector is
/// nonnegative and sums to at most 1 + 1e-6.
void validate_windows(const std::vector<WindowProb>& windows, std::size_t vocab_size);

enum class SignKind { kLexical, kFingerspelled };

struct SpottedSign {
  TimeSegment segment;
  std::string word;        // normalized sentence word
  double score = 0;        // word probability or proposal confidence
  SignKind kind = SignKind::kLexical;
  std::string hypothesis;  // recognizer output, fingerspelling only
  double distance = 0;     // normalized edit distance, fingerspelling only
};

/// Assigns sentence words to windows whose probability for the word is at
/// least delta_l. Each word keeps only its best window (highest probability,
/// earliest on ties). Words are compared after normalize_word().
std::vector<SpottedSign> spot_lexical(const std::vector<WindowProb>& windows,
                                      const std::vector<std::string>& sentence_words,
                                      const std::map<std::string, int>& vocab, double delta_l);

/// Assigns to each confident proposal the sentence word closest to its
/// hypothesis when the normalized edit distance is at most delta_f; each word
/// then keeps its closest proposal (higher confidence, then earlier, on ties).
std::vector<SpottedSign> spot_fingerspelling(const std::vector<ScoredSegment>& proposals,
                                             const std::vector<std::string>& hypotheses,
                                             const std::vector<std::string>& sentence_words,
                                             double delta_f, double min_confidence);

/// Both searches for one (video, sentence) pair, sorted by segment, kind, word.
std::vector<SpottedSign> spot_signs(const std::vector<WindowProb>& windows,
                                    const std::map<std::string, int>& vocab,
                                    const std::vector<ScoredSegment>& proposals,
                                    const std::vector<std::string>& hypotheses,
                                    const std::vector<std::string>& sentence_words,
                                    const SpotConfig& cfg);

}  // namespace signspot
