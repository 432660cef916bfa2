#include "io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace signspot::cli {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    pos = nl + 1;
  }
  return lines;
}

// Location prefix for diagnostics.
struct Where {
  const std::string& path;
  std::size_t line;

  [[noreturn]] void fail(const std::string& msg, std::optional<std::size_t> index = std::nullopt) const {
    throw DataError(path + ":" + std::to_string(line) + ": " + msg, index ? index : std::optional(line));
  }
};

json parse_line(const Where& w, const std::string& text) {
  try {
    json j = json::parse(text);
    if (!j.is_object()) w.fail("expected a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    w.fail(std::string("invalid JSON: ") + e.what());
  }
}

void expect_schema(const Where& w, const json& j, const std::string& schema) {
  auto it = j.find("schema");
  if (it == j.end() || !it->is_string()) w.fail("missing \"schema\"");
  if (*it != schema) w.fail("expected schema \"" + schema + "\", got \"" + it->get<std::string>() + "\"");
}

const json& field(const Where& w, const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) w.fail(std::string("missing field \"") + name + "\"");
  return *it;
}

std::string get_string(const Where& w, const json& j, const char* name) {
  const json& v = field(w, j, name);
  if (!v.is_string()) w.fail(std::string("field \"") + name + "\" must be a string");
  return v.get<std::string>();
}

std::optional<std::string> get_opt_string(const Where& w, const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) w.fail(std::string("field \"") + name + "\" must be a string or null");
  return it->get<std::string>();
}

double as_real(const Where& w, const json& v, const std::string& what) {
  if (!v.is_number()) w.fail(what + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) w.fail(what + " must be finite");
  return x;
}

std::optional<double> get_opt_real(const Where& w, const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return as_real(w, *it, std::string("field \"") + name + "\"");
}

int get_int(const Where& w, const json& j, const char* name) {
  const json& v = field(w, j, name);
  if (!v.is_number_integer()) w.fail(std::string("field \"") + name + "\" must be an integer");
  return v.get<int>();
}

TimeSegment get_segment(const Where& w, const json& j) {
  const int s = get_int(w, j, "start"), e = get_int(w, j, "end");
  if (s < 0 || e <= s) w.fail("segment needs 0 <= start < end");
  return TimeSegment(s, e);
}

std::vector<double> get_reals(const Where& w, const json& v, const std::string& what) {
  if (!v.is_array()) w.fail(what + " must be an array");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(as_real(w, x, what + " entry"));
  return out;
}

template <typename Fn>
void for_each_record(const std::string& path, const std::string& schema, Fn&& fn) {
  const auto lines = read_lines(path);
  for (const auto& [no, text] : lines) {
    const Where w{path, no};
    const json j = parse_line(w, text);
    expect_schema(w, j, schema);
    fn(w, j);
  }
}

PosteriorRecord parse_posteriorgram(const Where& w, const json& j, std::size_t position) {
  expect_schema(w, j, "pg/1");
  const json& alpha = field(w, j, "alphabet");
  if (!alpha.is_array()) w.fail("\"alphabet\" must be an array");
  std::vector<std::string> letters;
  for (const auto& a : alpha) {
    if (!a.is_string()) w.fail("alphabet entries must be strings");
    letters.push_back(a.get<std::string>());
  }
  const int blank = get_int(w, j, "blank_index");
  std::optional<int> noletter;
  if (auto it = j.find("noletter_index"); it != j.end() && !it->is_null()) {
    if (!it->is_number_integer()) w.fail("\"noletter_index\" must be an integer or null");
    noletter = it->get<int>();
  }
  std::optional<Alphabet> alphabet;
  try {
    alphabet.emplace(std::move(letters), blank, noletter);
  } catch (const ValidationError& e) {
    w.fail(e.what());
  }
  const json& fr = field(w, j, "frames");
  if (!fr.is_array()) w.fail("\"frames\" must be an array");
  std::vector<std::vector<double>> frames;
  for (std::size_t t = 0; t < fr.size(); ++t)
    frames.push_back(get_reals(w, fr[t], "row " + std::to_string(t)));
  std::string id = std::to_string(position);
  if (auto it = j.find("id"); it != j.end() && it->is_string()) id = it->get<std::string>();
  try {
    return {id, Posteriorgram(*alphabet, std::move(frames))};
  } catch (const DataError& e) {
    w.fail(e.what(), e.index());
  } catch (const ValidationError& e) {
    w.fail(e.what());
  }
}

}  // namespace

std::vector<std::pair<std::size_t, std::string>> read_lines(const std::string& path) {
  std::vector<std::pair<std::size_t, std::string>> out;
  const auto lines = split_lines(read_text(path));
  for (std::size_t i = 0; i < lines.size(); ++i)
    if (lines[i].find_first_not_of(" \t") != std::string::npos) out.emplace_back(i + 1, lines[i]);
  return out;
}

std::vector<PosteriorRecord> read_posteriorgrams(const std::string& path) {
  const std::string text = read_text(path);
  // A single (possibly pretty-printed) document, else JSON-Lines.
  json whole = json::parse(text, nullptr, false);
  std::vector<PosteriorRecord> out;
  if (!whole.is_discarded() && whole.is_object()) {
    out.push_back(parse_posteriorgram(Where{path, 1}, whole, 0));
    return out;
  }
  for (const auto& [no, line] : read_lines(path)) {
    const Where w{path, no};
    out.push_back(parse_posteriorgram(w, parse_line(w, line), out.size()));
  }
  if (out.empty()) throw DataError(path + ": no posteriorgrams");
  return out;
}

std::vector<SegmentRecord> read_segments(const std::string& path) {
  std::vector<SegmentRecord> out;
  for_each_record(path, "seg/1", [&](const Where& w, const json& j) {
    out.push_back({get_string(w, j, "video_id"), get_segment(w, j), get_opt_string(w, j, "word"),
                   get_opt_real(w, j, "score"), get_opt_string(w, j, "transcript"), w.line});
  });
  return out;
}

std::map<std::string, FrameBoxes> read_frame_boxes(const std::string& path) {
  std::map<std::string, std::map<int, std::pair<std::size_t, std::vector<Box2D>>>> raw;
  for_each_record(path, "fb/1", [&](const Where& w, const json& j) {
    const std::string vid = get_string(w, j, "video_id");
    const int frame = get_int(w, j, "frame");
    if (frame < 0) w.fail("\"frame\" must be nonnegative");
    const json& bs = field(w, j, "boxes");
    if (!bs.is_array()) w.fail("\"boxes\" must be an array");
    std::vector<Box2D> boxes;
    for (std::size_t i = 0; i < bs.size(); ++i) {
      const json& b = bs[i];
      if (!b.is_object()) w.fail("box " + std::to_string(i) + " must be an object", i);
      Box2D box{as_real(w, field(w, b, "x1"), "x1"), as_real(w, field(w, b, "y1"), "y1"),
                as_real(w, field(w, b, "x2"), "x2"), as_real(w, field(w, b, "y2"), "y2"),
                as_real(w, field(w, b, "score"), "score")};
      if (!box.valid()) w.fail("box " + std::to_string(i) + " has x2 < x1 or y2 < y1", i);
      boxes.push_back(box);
    }
    if (!raw[vid].emplace(frame, std::make_pair(w.line, std::move(boxes))).second)
      w.fail("duplicate frame " + std::to_string(frame) + " for video '" + vid + "'");
  });
  std::map<std::string, FrameBoxes> out;
  for (auto& [vid, frames] : raw) {
    int expect = 0;
    for (auto& [f, entry] : frames) {
      if (f != expect)
        throw DataError(path + ": video '" + vid + "' is missing frame " + std::to_string(expect));
      if (entry.second.empty())
        throw DataError(path + ":" + std::to_string(entry.first) + ": frame has no boxes", entry.first);
      out[vid].push_back(std::move(entry.second));
      ++expect;
    }
  }
  return out;
}

Embeddings read_embeddings(const std::string& path) {
  Embeddings out;
  std::optional<std::size_t> dim;
  for_each_record(path, "emb/1", [&](const Where& w, const json& j) {
    const std::string id = get_string(w, j, "id");
    const std::string kind = get_string(w, j, "kind");
    if (kind != "video_segment" && kind != "text") w.fail("\"kind\" must be \"video_segment\" or \"text\"");
    auto vec = get_reals(w, field(w, j, "vector"), "\"vector\"");
    if (vec.empty()) w.fail("empty embedding");
    if (dim && *dim != vec.size()) w.fail("embedding dimension differs from earlier records");
    dim = vec.size();
    double norm = 0;
    for (double x : vec) norm += x * x;
    if (norm == 0) w.fail("zero-norm embedding");
    auto& table = kind == "text" ? out.texts : out.segments;
    if (!table.emplace(id, std::move(vec)).second)
      w.fail("duplicate " + kind + " embedding '" + id + "'");
  });
  return out;
}

std::vector<WindowRecord> read_window_probs(const std::string& path) {
  std::vector<WindowRecord> out;
  for_each_record(path, "wp/1", [&](const Where& w, const json& j) {
    WindowRecord r{get_string(w, j, "video_id"), get_segment(w, j), {}, w.line};
    const json& probs = field(w, j, "probs");
    if (!probs.is_object()) w.fail("\"probs\" must be an object");
    double sum = 0;
    for (const auto& [word, p] : probs.items()) {
      const double x = as_real(w, p, "probability of '" + word + "'");
      if (x < 0) w.fail("negative probability for '" + word + "'");
      sum += x;
      r.probs[word] = x;
    }
    if (sum > 1 + 1e-6) {
      std::ostringstream os;
      os << "probabilities sum to " << sum;
      w.fail(os.str());
    }
    out.push_back(std::move(r));
  });
  return out;
}

std::map<std::string, std::string> read_sentences(const std::string& path) {
  std::map<std::string, std::string> out;
  for_each_record(path, "sent/1", [&](const Where& w, const json& j) {
    const std::string vid = get_string(w, j, "video_id");
    if (!out.emplace(vid, get_string(w, j, "text")).second) w.fail("duplicate sentence for '" + vid + "'");
  });
  return out;
}

std::vector<std::pair<std::string, std::string>> read_relevance(const std::string& path) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [no, line] : read_lines(path)) {
    const Where w{path, no};
    const json j = parse_line(w, line);
    const auto schema = get_string(w, j, "schema");
    if (schema != "rel/1" && schema != "seg/1") w.fail("expected schema \"rel/1\" or \"seg/1\"");
    const auto word = get_opt_string(w, j, "word");
    if (!word) w.fail("relevance record needs a word");
    out.emplace_back(get_string(w, j, "video_id"), *word);
  }
  return out;
}

std::map<std::string, std::vector<std::string>> read_hypotheses(const std::string& path) {
  std::map<std::string, std::vector<std::string>> out;
  for_each_record(path, "hyps/1", [&](const Where& w, const json& j) {
    const std::string vid = get_string(w, j, "video_id");
    const json& hs = field(w, j, "hypotheses");
    if (!hs.is_array()) w.fail("\"hypotheses\" must be an array");
    std::vector<std::string> list;
    for (const auto& h : hs) {
      if (!h.is_string()) w.fail("hypotheses must be strings");
      list.push_back(h.get<std::string>());
    }
    auto& slot = out[vid];
    slot.insert(slot.end(), list.begin(), list.end());
  });
  return out;
}

namespace {

std::string context_key(const NGramModel::Context& ctx) {
  std::string key;
  for (std::size_t i = 0; i < ctx.size(); ++i) key += (i ? "," : "") + std::to_string(ctx[i]);
  return key;
}

NGramModel::Context parse_context(const Where& w, const std::string& key) {
  NGramModel::Context ctx;
  if (key.empty()) return ctx;
  std::stringstream ss(key);
  std::string part;
  while (std::getline(ss, part, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != part.size()) w.fail("bad context key \"" + key + "\"");
    ctx.push_back(v);
  }
  return ctx;
}

}  // namespace

NGramModel read_lm(const std::string& path) {
  const Where w{path, 1};
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    w.fail(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) w.fail("expected a JSON object");
  expect_schema(w, j, "lm/1");
  const int order = get_int(w, j, "order");
  const double k = as_real(w, field(w, j, "k"), "\"k\"");
  const json& voc = field(w, j, "vocab");
  if (!voc.is_array()) w.fail("\"vocab\" must be an array");
  std::vector<std::string> vocab;
  for (const auto& s : voc) {
    if (!s.is_string()) w.fail("vocab entries must be strings");
    vocab.push_back(s.get<std::string>());
  }
  const json& ctxs = field(w, j, "contexts");
  if (!ctxs.is_object()) w.fail("\"contexts\" must be an object");
  std::map<NGramModel::Context, std::vector<double>> counts;
  for (const auto& [key, c] : ctxs.items())
    counts[parse_context(w, key)] = get_reals(w, c, "counts of context \"" + key + "\"");
  try {
    return NGramModel(order, k, std::move(vocab), std::move(counts));
  } catch (const ValidationError& e) {
    w.fail(e.what());
  }
}

json lm_to_json(const NGramModel& lm) {
  json ctxs = json::object();
  for (const auto& [ctx, c] : lm.counts()) ctxs[context_key(ctx)] = c;
  return {{"schema", "lm/1"}, {"order", lm.order()}, {"k", lm.k()}, {"vocab", lm.vocab()}, {"contexts", ctxs}};
}

std::vector<std::string> read_corpus(const std::string& path) {
  return split_lines(read_text(path));
}

}  // namespace signspot::cli
