#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace signspot {

/// Raised when an argument violates a documented precondition.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when input data (a record, row or line) violates its schema or
/// an invariant. `index` locates the offending item (row or 1-based line).
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& what, std::optional<std::size_t> index = std::nullopt)
      : std::runtime_error(what), index_(index) {}
  std::optional<std::size_t> index() const { return index_; }

 private:
  std::optional<std::size_t> index_;
};

/// Rendering of the non-fingerspelling symbol in transcripts and hypotheses.
inline constexpr std::string_view kNoLetterToken = "<x>";

// Label space of a frame-level recognizer: the letters plus a CTC blank and
// an optional no-letter symbol. Reserved indices may sit anywhere in
// [0, num_labels()); letters fill the remaining slots in order.
class Alphabet {
 public:
  Alphabet() = default;
  /// Blank appended after the letters, no-letter (if requested) after blank.
  explicit Alphabet(std::vector<std::string> letters, bool with_noletter = false);
  Alphabet(std::vector<std::string> letters, int blank_index,
           std::optional<int> noletter_index);

  const std::vector<std::string>& letters() const { return letters_; }
  int num_labels() const { return static_cast<int>(label_letter_.size()); }
  int blank_index() const { return blank_; }
  std::optional<int> noletter_index() const { return noletter_; }

  bool is_blank(int label) const { return label == blank_; }
  bool is_noletter(int label) const { return noletter_ && label == *noletter_; }
  bool valid(int label) const { return label >= 0 && label < num_labels(); }

  /// Letter string for a letter label, kNoLetterToken for the no-letter label.
  std::string symbol(int label) const;
  /// Label of a letter (or kNoLetterToken); nullopt when unknown.
  std::optional<int> label_of(std::string_view symbol) const;
  /// Concatenated rendering of a label sequence (blanks are skipped).
  std::string render(std::span<const int> labels) const;

 private:
  void build();

  std::vector<std::string> letters_;
  int blank_ = 0;
  std::optional<int> noletter_;
  std::vector<int> label_letter_;  // label -> letter index, -1 for reserved
};

/// Half-open frame interval [start, end).
struct TimeSegment {
  int start = 0;
  int end = 1;

  TimeSegment() = default;
  TimeSegment(int s, int e);

  int length() const { return end - start; }
  bool operator==(const TimeSegment&) const = default;
  auto operator<=>(const TimeSegment&) const = default;
};

struct LabeledSegment {
  TimeSegment segment;
  std::string transcript;
};

struct ScoredSegment {
  TimeSegment segment;
  double score = 0.0;
};

/// Predicted segment carrying both a confidence and the recognizer output
/// for its interval.
struct RecognizedSegment {
  TimeSegment segment;
  double score = 0.0;
  std::string transcript;
};

struct Box2D {
  double x1 = 0, y1 = 0, x2 = 1, y2 = 1;
  double score = 0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  bool valid() const { return x1 < x2 && y1 < y2; }
};

int intersection_length(const TimeSegment& a, const TimeSegment& b);

/// Frame-count intersection over union.
double temporal_iou(const TimeSegment& a, const TimeSegment& b);

/// |x ∩ y| / |y|: how much of y is covered by x.
double temporal_is(const TimeSegment& x, const TimeSegment& y);

double box_iou(const Box2D& a, const Box2D& b);

/// Splits UTF-8 text into code points. Each code point is one symbol.
std::vector<std::string> split_symbols(std::string_view utf8);

/// Lower-cases ASCII letters and drops ASCII punctuation.
std::string normalize_word(std::string_view word);

/// Levenshtein distance with unit costs.
template <typename Seq>
std::size_t edit_distance(const Seq& ref, const Seq& hyp) {
  const std::size_t n = std::size(ref), m = std::size(hyp);
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  auto r = std::begin(ref);
  for (std::size_t i = 1; i <= n; ++i, ++r) {
    cur[0] = i;
    auto h = std::begin(hyp);
    for (std::size_t j = 1; j <= m; ++j, ++h) {
      const std::size_t sub = prev[j - 1] + (*r == *h ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

/// Length of the longest common subsequence.
template <typename Seq>
std::size_t lcs_length(const Seq& a, const Seq& b) {
  const std::size_t m = std::size(b);
  std::vector<std::size_t> prev(m + 1, 0), cur(m + 1, 0);
  for (const auto& x : a) {
    auto y = std::begin(b);
    for (std::size_t j = 1; j <= m; ++j, ++y)
      cur[j] = (x == *y) ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[m];
}

/// 1 - D(ref, hyp) / |ref|. Negative when the hypothesis has many insertions.
template <typename Seq>
  requires(!std::is_convertible_v<const Seq&, std::string_view>)
double letter_accuracy(const Seq& ref, const Seq& hyp) {
  if (std::size(ref) == 0) throw ValidationError("letter_accuracy: empty reference");
  return 1.0 - static_cast<double>(edit_distance(ref, hyp)) /
                   static_cast<double>(std::size(ref));
}

/// Accuracy on UTF-8 strings, symbol = code point.
double letter_accuracy(std::string_view ref, std::string_view hyp);

/// Edit distance divided by max(|a|, |b|), in [0, 1]. Zero for two empties.
double normalized_edit_distance(std::string_view a, std::string_view b);

}  // namespace signspot
