#include "signspot/core.hpp"

#include <cctype>
#include <cmath>
#include <set>

namespace signspot {

Alphabet::Alphabet(std::vector<std::string> letters, bool with_noletter)
    : letters_(std::move(letters)) {
  const int n = static_cast<int>(letters_.size());
  blank_ = n;
  if (with_noletter) noletter_ = n + 1;
  build();
}

Alphabet::Alphabet(std::vector<std::string> letters, int blank_index,
                   std::optional<int> noletter_index)
    : letters_(std::move(letters)), blank_(blank_index), noletter_(noletter_index) {
  build();
}

void Alphabet::build() {
  std::set<std::string> seen;
  for (const auto& l : letters_) {
    if (l.empty()) throw ValidationError("alphabet: empty letter");
    if (l == kNoLetterToken) throw ValidationError("alphabet: reserved symbol used as a letter");
    if (!seen.insert(l).second) throw ValidationError("alphabet: duplicate letter '" + l + "'");
  }
  const int total = static_cast<int>(letters_.size()) + 1 + (noletter_ ? 1 : 0);
  if (blank_ < 0 || blank_ >= total) throw ValidationError("alphabet: blank_index out of range");
  if (noletter_) {
    if (*noletter_ < 0 || *noletter_ >= total)
      throw ValidationError("alphabet: noletter_index out of range");
    if (*noletter_ == blank_) throw ValidationError("alphabet: blank and no-letter share an index");
  }
  label_letter_.assign(total, -1);
  int next = 0;
  for (int k = 0; k < total; ++k) {
    if (k == blank_ || (noletter_ && k == *noletter_)) continue;
    label_letter_[k] = next++;
  }
}

std::string Alphabet::symbol(int label) const {
  if (!valid(label)) throw ValidationError("alphabet: label out of range");
  if (is_noletter(label)) return std::string(kNoLetterToken);
  if (is_blank(label)) throw ValidationError("alphabet: blank has no symbol");
  return letters_[label_letter_[label]];
}

std::optional<int> Alphabet::label_of(std::string_view symbol) const {
  if (symbol == kNoLetterToken) return noletter_;
  for (int k = 0; k < num_labels(); ++k)
    if (label_letter_[k] >= 0 && letters_[label_letter_[k]] == symbol) return k;
  return std::nullopt;
}

std::string Alphabet::render(std::span<const int> labels) const {
  std::string out;
  for (int l : labels)
    if (!is_blank(l)) out += symbol(l);
  return out;
}

TimeSegment::TimeSegment(int s, int e) : start(s), end(e) {
  if (s < 0 || e <= s)
    throw ValidationError("segment [" + std::to_string(s) + ", " + std::to_string(e) +
                          ") violates 0 <= start < end");
}

int intersection_length(const TimeSegment& a, const TimeSegment& b) {
  return std::max(0, std::min(a.end, b.end) - std::max(a.start, b.start));
}

double temporal_iou(const TimeSegment& a, const TimeSegment& b) {
  const int inter = intersection_length(a, b);
  const int uni = a.length() + b.length() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double temporal_is(const TimeSegment& x, const TimeSegment& y) {
  return static_cast<double>(intersection_length(x, y)) / static_cast<double>(y.length());
}

double box_iou(const Box2D& a, const Box2D& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

std::vector<std::string> split_symbols(std::string_view utf8) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < utf8.size()) {
    const auto c = static_cast<unsigned char>(utf8[i]);
    std::size_t len = 1;
    if (c >= 0xF0) len = 4;
    else if (c >= 0xE0) len = 3;
    else if (c >= 0xC0) len = 2;
    len = std::min(len, utf8.size() - i);
    out.emplace_back(utf8.substr(i, len));
    i += len;
  }
  return out;
}

std::string normalize_word(std::string_view word) {
  std::string out;
  out.reserve(word.size());
  for (char ch : word) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && std::ispunct(c)) continue;
    out.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
  }
  return out;
}

double letter_accuracy(std::string_view ref, std::string_view hyp) {
  return letter_accuracy(split_symbols(ref), split_symbols(hyp));
}

double normalized_edit_distance(std::string_view a, std::string_view b) {
  const auto sa = split_symbols(a), sb = split_symbols(b);
  const std::size_t denom = std::max(sa.size(), sb.size());
  if (denom == 0) return 0.0;
  return static_cast<double>(edit_distance(sa, sb)) / static_cast<double>(denom);
}

}  // namespace signspot
