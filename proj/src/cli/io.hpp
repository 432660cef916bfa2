#pragma once

// Readers for the CLI's JSON / JSON-Lines formats. Every reader validates
// fully and throws DataError with the 1-based line number of the first bad
// record (and the offending row index where one applies).

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "signspot/core.hpp"
#include "signspot/ctc.hpp"
#include "signspot/linker.hpp"
#include "signspot/lm.hpp"

namespace signspot::cli {

using nlohmann::json;

/// Whole file as text. Throws ValidationError when unreadable.
std::string read_text(const std::string& path);

/// Non-empty lines (trailing CR stripped) with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::string>> read_lines(const std::string& path);

/// A posteriorgram record; `id` defaults to its position.
struct PosteriorRecord {
  std::string id;
  Posteriorgram post;
};
/// A single pg/1 JSON document or one pg/1 object per line.
std::vector<PosteriorRecord> read_posteriorgrams(const std::string& path);

struct SegmentRecord {
  std::string video_id;
  TimeSegment segment;
  std::optional<std::string> word;
  std::optional<double> score;
  std::optional<std::string> transcript;
  std::size_t line = 0;
};
std::vector<SegmentRecord> read_segments(const std::string& path);

/// Frame boxes grouped by video; frames of each video must be 0..T-1.
std::map<std::string, FrameBoxes> read_frame_boxes(const std::string& path);

struct Embeddings {
  std::map<std::string, std::vector<double>> segments;  // kind "video_segment"
  std::map<std::string, std::vector<double>> texts;     // kind "text"
};
Embeddings read_embeddings(const std::string& path);

struct WindowRecord {
  std::string video_id;
  TimeSegment segment;
  std::map<std::string, double> probs;
  std::size_t line = 0;
};
std::vector<WindowRecord> read_window_probs(const std::string& path);

/// sent/1: one sentence per video.
std::map<std::string, std::string> read_sentences(const std::string& path);

/// rel/1 (or seg/1 lines carrying a word): relevant (video, word) pairs.
std::vector<std::pair<std::string, std::string>> read_relevance(const std::string& path);

/// hyps/1: recognizer hypotheses per video.
std::map<std::string, std::vector<std::string>> read_hypotheses(const std::string& path);

NGramModel read_lm(const std::string& path);
json lm_to_json(const NGramModel& lm);

/// Plain text corpus: one sentence per non-empty line.
std::vector<std::string> read_corpus(const std::string& path);

}  // namespace signspot::cli
