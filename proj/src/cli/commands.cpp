#include "signspot/cli.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "io.hpp"
#include "report.hpp"
#include "signspot/ctc.hpp"
#include "signspot/fusion.hpp"
#include "signspot/linker.hpp"
#include "signspot/lm.hpp"
#include "signspot/match.hpp"
#include "signspot/metrics.hpp"
#include "signspot/parallel.hpp"
#include "signspot/spot.hpp"

namespace signspot::cli {

namespace {

struct Common {
  std::string output = "-";
  std::string config;
  std::size_t jobs = 1;
};

std::vector<double> parse_reals(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != part.size()) throw ValidationError(flag + ": bad number '" + part + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ValidationError(flag + ": empty list");
  return out;
}

std::vector<int> parse_ints(const std::string& text, const std::string& flag) {
  std::vector<int> out;
  for (double v : parse_reals(text, flag)) {
    if (v != static_cast<int>(v) || v < 1) throw ValidationError(flag + ": expected positive integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

void write_output(const Common& c, const std::string& text, std::ostream& out) {
  if (c.output == "-") {
    out << text;
    return;
  }
  std::ofstream f(c.output, std::ios::binary);
  if (!f) throw ValidationError("cannot write '" + c.output + "'");
  f << text;
}

json box_json(const Box2D& b) {
  return {{"x1", b.x1}, {"y1", b.y1}, {"x2", b.x2}, {"y2", b.y2}, {"score", b.score}};
}

// ---------------------------------------------------------------- commands

std::string ctc_decode(const Common& c, const std::string& input, const std::string& lm_path,
                       const BeamConfig& beam, int nbest) {
  if (beam.beam_width < 1) throw ValidationError("--beam-width must be >= 1");
  if (nbest < 1) throw ValidationError("--nbest must be >= 1");
  std::optional<NGramModel> lm;
  if (!lm_path.empty()) lm = read_lm(lm_path);
  const auto records = read_posteriorgrams(input);
  if (lm) {
    for (const auto& r : records)
      for (const auto& l : r.post.alphabet().letters())
        if (lm->index_of(l) < 0) throw ValidationError("language model lacks alphabet symbol '" + l + "'");
  }
  std::vector<json> results(records.size());
  parallel_for(records.size(), c.jobs, [&](std::size_t i) {
    const auto& post = records[i].post;
    const auto& alpha = post.alphabet();
    const auto greedy = greedy_decode(post);
    json hyps = json::array();
    const auto beams = beam_decode(post, lm ? &*lm : nullptr, beam);
    for (std::size_t h = 0; h < beams.size() && h < static_cast<std::size_t>(nbest); ++h)
      hyps.push_back({{"text", alpha.render(beams[h].labels)},
                      {"labels", beams[h].labels},
                      {"ctc_log_prob", beams[h].ctc_log_prob},
                      {"lm_log_prob", beams[h].lm_log_prob},
                      {"score", beams[h].score}});
    results[i] = {{"id", records[i].id},
                  {"greedy", {{"text", alpha.render(greedy.labels)}, {"labels", greedy.labels}}},
                  {"hypotheses", hyps}};
  });
  return render_report({{"schema", "hyp/1"}, {"results", results}});
}

std::vector<std::vector<std::string>> symbol_corpus(const std::vector<std::string>& lines) {
  std::vector<std::vector<std::string>> corpus;
  for (const auto& l : lines) corpus.push_back(split_symbols(l));
  return corpus;
}

std::string lm_train(const std::string& input, int order, double k) {
  if (order < 1) throw ValidationError("--order must be >= 1");
  if (!(k > 0)) throw ValidationError("--k must be > 0");
  const auto lines = read_corpus(input);
  if (lines.empty()) throw DataError(input + ": empty corpus");
  const auto corpus = symbol_corpus(lines);
  return render_report(lm_to_json(train_ngram(corpus, order, k)));
}

std::string lm_ppl(const std::string& lm_path, const std::string& input) {
  const NGramModel lm = read_lm(lm_path);
  const auto lines = read_corpus(input);
  if (lines.empty()) throw DataError(input + ": empty corpus");
  const auto corpus = symbol_corpus(lines);
  std::size_t tokens = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (const auto& s : corpus[i])
      if (lm.index_of(s) < 0)
        throw DataError(input + ":" + std::to_string(i + 1) + ": symbol '" + s + "' not in the model vocabulary",
                        i + 1);
    tokens += corpus[i].size() + 1;
  }
  return render_report({{"perplexity", perplexity(lm, corpus)},
                        {"sentences", corpus.size()},
                        {"tokens", tokens}});
}

std::string link_tube_cmd(const Common& c, const std::string& input, const LinkConfig& cfg, double nms_iou,
                          int max_boxes) {
  if (!(cfg.lambda_link >= 0)) throw ValidationError("--lambda must be >= 0");
  if (cfg.smooth_half_window < 0) throw ValidationError("--smooth-half-window must be >= 0");
  if (!(nms_iou >= 0 && nms_iou <= 1)) throw ValidationError("--nms-iou must be in [0, 1]");
  if (max_boxes < 1) throw ValidationError("--max-boxes must be >= 1");
  const auto videos = read_frame_boxes(input);
  std::vector<std::pair<std::string, const FrameBoxes*>> items;
  for (const auto& [vid, fb] : videos) items.emplace_back(vid, &fb);
  std::vector<json> results(items.size());
  parallel_for(items.size(), c.jobs, [&](std::size_t i) {
    const FrameBoxes& frames = *items[i].second;
    FrameBoxes kept_boxes;
    std::vector<std::vector<std::size_t>> kept_idx;
    for (const auto& boxes : frames) {
      kept_idx.push_back(frame_nms_indices(boxes, nms_iou, static_cast<std::size_t>(max_boxes)));
      kept_boxes.emplace_back();
      for (std::size_t k : kept_idx.back()) kept_boxes.back().push_back(boxes[k]);
    }
    const Tube tube = link_tube(kept_boxes, cfg);
    std::vector<std::size_t> original;
    std::vector<Box2D> chosen;
    for (std::size_t t = 0; t < frames.size(); ++t) {
      original.push_back(kept_idx[t][tube.indices[t]]);
      chosen.push_back(kept_boxes[t][tube.indices[t]]);
    }
    json boxes = json::array(), smoothed = json::array();
    for (const auto& b : chosen) boxes.push_back(box_json(b));
    for (const auto& b : smooth_tube(chosen, cfg.smooth_half_window)) smoothed.push_back(box_json(b));
    results[i] = {{"score", tube.score}, {"indices", original}, {"boxes", boxes}, {"smoothed", smoothed}};
  });
  json out = json::object();
  for (std::size_t i = 0; i < items.size(); ++i) out[items[i].first] = results[i];
  return render_report({{"schema", "tube/1"}, {"videos", out}});
}

std::string detect_eval(const std::string& gt_path, const std::string& pred_path,
                        const std::string& lengths_path, const MetricConfig& mc) {
  mc.validate();
  const auto gts = read_segments(gt_path);
  const auto preds = read_segments(pred_path);
  std::map<std::string, int> lengths;
  if (!lengths_path.empty()) {
    json j;
    try {
      j = json::parse(read_text(lengths_path));
    } catch (const json::parse_error& e) {
      throw DataError(lengths_path + ": invalid JSON: " + e.what());
    }
    if (!j.is_object()) throw DataError(lengths_path + ": expected an object of video lengths");
    for (const auto& [vid, v] : j.items()) {
      if (!v.is_number_integer() || v.get<int>() < 1)
        throw DataError(lengths_path + ": length of '" + vid + "' must be a positive integer");
      lengths[vid] = v.get<int>();
    }
  }

  DetectionCorpus corpus;
  for (const auto& g : gts) {
    const auto& text = g.transcript ? g.transcript : g.word;
    if (!text || text->empty())
      throw DataError(gt_path + ":" + std::to_string(g.line) + ": ground truth needs a transcript", g.line);
    corpus[g.video_id].gts.push_back({g.segment, *text});
  }
  for (const auto& p : preds) {
    if (!p.score)
      throw DataError(pred_path + ":" + std::to_string(p.line) + ": prediction needs a score", p.line);
    const auto& text = p.transcript ? p.transcript : p.word;
    corpus[p.video_id].preds.push_back({p.segment, *p.score, text.value_or("")});
  }
  for (auto& [vid, v] : corpus) {
    int max_end = 0;
    for (const auto& g : v.gts) max_end = std::max(max_end, g.segment.end);
    for (const auto& p : v.preds) max_end = std::max(max_end, p.segment.end);
    auto it = lengths.find(vid);
    if (it != lengths.end() && it->second < max_end)
      throw DataError(lengths_path + ": video '" + vid + "' is shorter than its segments");
    v.num_frames = it != lengths.end() ? it->second : max_end;
    // Ground truth must tile the video without overlap for the full-video sequence.
    try {
      full_video_sequence(v.gts, v.num_frames);
    } catch (const ValidationError& e) {
      throw DataError(gt_path + ": video '" + vid + "': " + e.what());
    }
  }

  json report = {{"schema", "det-report/1"}, {"num_videos", corpus.size()}, {"num_gt", gts.size()},
                 {"num_pred", preds.size()}};
  for (double t : mc.iou_thresholds)
    report["AP@IoU=" + format_threshold(t)] = optional_number(ap_at_iou(corpus, t, mc.recall_levels));
  for (double t : mc.acc_thresholds)
    report["AP@Acc=" + format_threshold(t)] =
        optional_number(ap_at_acc(corpus, t, mc.acc_iou_threshold, mc.recall_levels));
  const MsaResult m = msa(corpus, mc.msa_thresholds);
  report["MSA"] = m.msa;
  report["MSA_threshold"] = m.threshold;
  return render_report(report);
}

std::string spot_cmd(const Common& c, const std::string& windows_path, const std::string& proposals_path,
                     const std::string& sentences_path, const SpotConfig& cfg) {
  cfg.validate();
  const auto windows = read_window_probs(windows_path);
  std::vector<SegmentRecord> proposals;
  if (!proposals_path.empty()) proposals = read_segments(proposals_path);
  const auto sentences = read_sentences(sentences_path);

  std::map<std::string, int> vocab;
  for (const auto& w : windows)
    for (const auto& [word, p] : w.probs) vocab.emplace(word, 0);
  int next = 0;
  for (auto& [word, idx] : vocab) idx = next++;

  struct VideoInput {
    std::string id;
    std::vector<WindowProb> windows;
    std::vector<ScoredSegment> proposals;
    std::vector<std::string> hypotheses;
    std::vector<std::string> words;
  };
  std::map<std::string, VideoInput> per_video;
  for (const auto& [vid, text] : sentences) {
    auto& v = per_video[vid];
    v.id = vid;
    std::istringstream ss(text);
    for (std::string w; ss >> w;) v.words.push_back(w);
  }
  for (const auto& w : windows) {
    auto it = per_video.find(w.video_id);
    if (it == per_video.end()) continue;
    std::vector<double> probs(vocab.size(), 0.0);
    for (const auto& [word, p] : w.probs) probs[vocab.at(word)] = p;
    it->second.windows.push_back({w.segment, std::move(probs)});
  }
  for (const auto& p : proposals) {
    if (!p.score || !p.transcript)
      throw DataError(proposals_path + ":" + std::to_string(p.line) + ": proposal needs a score and a transcript",
                      p.line);
    auto it = per_video.find(p.video_id);
    if (it == per_video.end()) continue;
    it->second.proposals.push_back({p.segment, *p.score});
    it->second.hypotheses.push_back(*p.transcript);
  }

  std::vector<const VideoInput*> items;
  for (const auto& [vid, v] : per_video) items.push_back(&v);
  std::vector<std::vector<SpottedSign>> results(items.size());
  parallel_for(items.size(), c.jobs, [&](std::size_t i) {
    const auto& v = *items[i];
    results[i] = spot_signs(v.windows, vocab, v.proposals, v.hypotheses, v.words, cfg);
  });
  json spotted = json::array();
  for (std::size_t i = 0; i < items.size(); ++i)
    for (const auto& s : results[i]) {
      json e = {{"video_id", items[i]->id}, {"start", s.segment.start}, {"end", s.segment.end},
                {"word", s.word}, {"score", s.score},
                {"kind", s.kind == SignKind::kLexical ? "lexical" : "fingerspelled"}};
      if (s.kind == SignKind::kFingerspelled) {
        e["hypothesis"] = s.hypothesis;
        e["distance"] = s.distance;
      }
      spotted.push_back(std::move(e));
    }
  return render_report({{"schema", "spot/1"}, {"num_spotted", spotted.size()}, {"spotted", spotted}});
}

std::string segment_embedding_id(const std::string& vid, const TimeSegment& s) {
  return vid + ":" + std::to_string(s.start) + ":" + std::to_string(s.end);
}

json retrieval_json(const RetrievalReport& r) {
  json j = {{"mAP", r.mean_ap}, {"mF1", r.mean_f1}, {"queries", r.evaluated_queries}};
  for (const auto& [n, pr] : r.mean_at_n) {
    j["P@" + std::to_string(n)] = pr.precision;
    j["R@" + std::to_string(n)] = pr.recall;
  }
  return j;
}

std::string retrieve_eval(const Common& c, const std::string& relevance_path, const std::string& proposals_path,
                          const std::string& embeddings_path, const std::string& hyps_path,
                          const MatchConfig& mc, const std::vector<int>& cutoffs) {
  mc.validate();
  const bool baseline = !hyps_path.empty();
  if (baseline == !embeddings_path.empty())
    throw ValidationError("give exactly one of --embeddings (with --proposals) or --hypotheses");
  if (!baseline && proposals_path.empty()) throw ValidationError("--embeddings requires --proposals");
  const auto relevance = read_relevance(relevance_path);

  std::set<std::string> video_set, word_set;
  std::set<std::pair<std::string, std::string>> relevant;
  for (const auto& [v, w] : relevance) {
    relevant.emplace(v, w);
    video_set.insert(v);
  }

  ScoreMatrix m;
  std::function<double(std::size_t, std::size_t)> score;
  Embeddings emb;
  std::map<std::string, std::vector<ScoredProposal>> props;
  std::map<std::string, std::vector<std::string>> hyps;
  if (baseline) {
    hyps = read_hypotheses(hyps_path);
    for (const auto& [v, h] : hyps) video_set.insert(v);
    for (const auto& [v, w] : relevance) word_set.insert(w);
  } else {
    emb = read_embeddings(embeddings_path);
    for (const auto& [w, vec] : emb.texts) word_set.insert(w);
    for (const auto& [v, w] : relevance)
      if (!emb.texts.count(w)) throw DataError(relevance_path + ": no text embedding for word '" + w + "'");
    for (const auto& p : read_segments(proposals_path)) {
      if (!p.score)
        throw DataError(proposals_path + ":" + std::to_string(p.line) + ": proposal needs a score", p.line);
      if (*p.score < 0 || *p.score > 1)
        throw DataError(proposals_path + ":" + std::to_string(p.line) + ": score must be in [0, 1]", p.line);
      auto it = emb.segments.find(segment_embedding_id(p.video_id, p.segment));
      if (it == emb.segments.end())
        throw DataError(proposals_path + ":" + std::to_string(p.line) + ": no embedding '" +
                            segment_embedding_id(p.video_id, p.segment) + "'",
                        p.line);
      if (it->second.size() != emb.texts.begin()->second.size())
        throw DataError(embeddings_path + ": segment and text embedding dimensions differ");
      props[p.video_id].push_back({{p.segment, *p.score}, it->second});
      video_set.insert(p.video_id);
    }
    // Keep the M most confident proposals per video (earlier segment on ties).
    for (auto& [v, list] : props) {
      std::stable_sort(list.begin(), list.end(), [](const ScoredProposal& a, const ScoredProposal& b) {
        if (a.proposal.score != b.proposal.score) return a.proposal.score > b.proposal.score;
        return a.proposal.segment < b.proposal.segment;
      });
      if (list.size() > static_cast<std::size_t>(mc.test_proposals)) list.resize(mc.test_proposals);
    }
  }
  if (word_set.empty()) throw DataError("no query words");
  m.videos.assign(video_set.begin(), video_set.end());
  m.words.assign(word_set.begin(), word_set.end());
  m.scores.assign(m.videos.size(), std::vector<double>(m.words.size(), 0.0));

  parallel_for(m.videos.size(), c.jobs, [&](std::size_t v) {
    const auto& vid = m.videos[v];
    for (std::size_t w = 0; w < m.words.size(); ++w) {
      if (baseline) {
        auto it = hyps.find(vid);
        m.scores[v][w] = it == hyps.end() || it->second.empty() ? 0.0
                                                                : recognizer_baseline_score(it->second, m.words[w]);
      } else {
        auto it = props.find(vid);
        m.scores[v][w] = it == props.end() ? 0.0 : score_clip(emb.texts.at(m.words[w]), it->second, mc.beta).score;
      }
    }
  });

  const auto fws = retrieval_eval(m, relevant, SearchAxis::kWordSearch, cutoffs);
  const auto fvs = retrieval_eval(m, relevant, SearchAxis::kVideoSearch, cutoffs);
  return render_report({{"schema", "ret-report/1"},
                        {"mode", baseline ? "recognizer" : "embedding"},
                        {"FWS", retrieval_json(fws)},
                        {"FVS", retrieval_json(fvs)}});
}

std::string bleu_cmd(const std::string& hyp_path, const std::string& ref_path, int max_n) {
  if (max_n < 1 || max_n > 4) throw ValidationError("--max-n must be in 1..4");
  auto hyp_lines = read_corpus(hyp_path);
  auto ref_lines = read_corpus(ref_path);
  if (hyp_lines.size() != ref_lines.size())
    throw DataError("hypothesis and reference files have different line counts (" +
                    std::to_string(hyp_lines.size()) + " vs " + std::to_string(ref_lines.size()) + ")");
  if (hyp_lines.empty()) throw DataError("empty corpus");
  std::vector<std::vector<std::string>> hyps, refs;
  for (const auto& l : hyp_lines) hyps.push_back(tokenize(l));
  for (const auto& l : ref_lines) refs.push_back(tokenize(l));
  json report = {{"sentences", hyps.size()}, {"ROUGE-L", rouge_l(hyps, refs)}};
  for (int n = 1; n <= max_n; ++n) report["BLEU-" + std::to_string(n)] = bleu(hyps, refs, n);
  return render_report(report);
}

std::string fusion_check(const Common& c, const std::string& ops_text, int instances, std::uint64_t seed,
                         double eps, double tol, bool& passed) {
  if (instances < 1) throw ValidationError("--instances must be >= 1");
  if (!(eps > 0) || !(tol > 0)) throw ValidationError("--eps and --tol must be positive");
  std::vector<std::string> ops;
  if (ops_text.empty()) {
    ops = gradient_check_ops();
  } else {
    std::stringstream ss(ops_text);
    for (std::string op; std::getline(ss, op, ',');) {
      const auto& known = gradient_check_ops();
      if (std::find(known.begin(), known.end(), op) == known.end())
        throw ValidationError("--ops: unknown op '" + op + "'");
      ops.push_back(op);
    }
  }
  std::vector<OpCheck> results(ops.size());
  parallel_for(ops.size(), c.jobs, [&](std::size_t i) {
    results[i] = run_gradient_check(ops[i], static_cast<std::size_t>(instances), seed + i, eps, tol);
  });
  json per_op = json::object();
  passed = true;
  for (const auto& r : results) {
    per_op[r.op] = {{"instances", r.instances}, {"max_rel_error", r.max_rel_error}, {"passed", r.passed}};
    passed = passed && r.passed;
  }
  return render_report({{"schema", "gradcheck/1"}, {"ops", per_op}, {"passed", passed}});
}

// ------------------------------------------------------------ config files

// Config keys are flag names without the leading dashes. Values become
// "--key value" pairs placed before the command-line flags, so flags win.
std::vector<std::string> config_args(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": invalid JSON: " + e.what());
  }
  if (!j.is_object()) throw ValidationError(path + ": config must be a JSON object");
  auto scalar = [&](const std::string& key, const json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number() || v.is_boolean()) return v.dump();
    throw ValidationError(path + ": unsupported value for '" + key + "'");
  };
  std::vector<std::string> out;
  for (const auto& [key, v] : j.items()) {
    if (key == "config") throw ValidationError(path + ": config files cannot nest");
    std::string value;
    if (v.is_array()) {
      for (std::size_t i = 0; i < v.size(); ++i) value += (i ? "," : "") + scalar(key, v[i]);
    } else {
      value = scalar(key, v);
    }
    out.push_back("--" + key);
    out.push_back(value);
  }
  return out;
}

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty() || args.empty()) return args;
  std::vector<std::string> out{args[0]};
  const auto extra = config_args(path);
  out.insert(out.end(), extra.begin(), extra.end());
  out.insert(out.end(), args.begin() + 1, args.end());
  return out;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"signspot: sign spotting, decoding, and retrieval toolkit", "signspot"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--output", common.output, "Report path ('-' for stdout)");
    sub->add_option("--jobs", common.jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--config", common.config, "JSON file of flag defaults");
  };
  std::function<std::string()> action;
  int data_exit = kExitOk;

  // ctc-decode
  std::string input, lm_path;
  BeamConfig beam;
  int nbest = 1;
  auto* ctc = app.add_subcommand("ctc-decode", "Greedy and beam decoding of posteriorgrams");
  ctc->add_option("--input", input, "pg/1 JSON or JSON-Lines")->required();
  ctc->add_option("--lm", lm_path, "lm/1 language model");
  ctc->add_option("--beam-width", beam.beam_width);
  ctc->add_option("--lm-weight", beam.lm_weight);
  ctc->add_option("--insertion-bias", beam.insertion_bias);
  ctc->add_option("--nbest", nbest, "Hypotheses to report");
  add_common(ctc);
  ctc->callback([&] { action = [&] { return ctc_decode(common, input, lm_path, beam, nbest); }; });

  // lm-train / lm-ppl
  int order = 3;
  double k = 1.0;
  auto* train = app.add_subcommand("lm-train", "Train a character n-gram model on a text corpus");
  train->add_option("--input", input, "One sentence per line")->required();
  train->add_option("--order", order);
  train->add_option("--k", k, "Add-k smoothing");
  add_common(train);
  train->callback([&] { action = [&] { return lm_train(input, order, k); }; });

  auto* ppl = app.add_subcommand("lm-ppl", "Perplexity of a text corpus");
  ppl->add_option("--lm", lm_path)->required();
  ppl->add_option("--input", input)->required();
  add_common(ppl);
  ppl->callback([&] { action = [&] { return lm_ppl(lm_path, input); }; });

  // link-tube
  LinkConfig link;
  double nms_iou = 0.9;
  int max_boxes = 50;
  auto* tube = app.add_subcommand("link-tube", "Per-frame NMS, Viterbi linking, and smoothing");
  tube->add_option("--input", input, "fb/1 JSON-Lines")->required();
  tube->add_option("--lambda", link.lambda_link);
  tube->add_option("--smooth-half-window", link.smooth_half_window);
  tube->add_option("--nms-iou", nms_iou);
  tube->add_option("--max-boxes", max_boxes);
  add_common(tube);
  tube->callback([&] { action = [&] { return link_tube_cmd(common, input, link, nms_iou, max_boxes); }; });

  // detect-eval
  std::string gt_path, pred_path, lengths_path, iou_list = "0.1,0.3,0.5", acc_list = "0,0.2,0.4", msa_list;
  MetricConfig metric;
  auto* det = app.add_subcommand("detect-eval", "AP@IoU, AP@Acc, and MSA of detected segments");
  det->add_option("--gt", gt_path, "seg/1 ground truth")->required();
  det->add_option("--pred", pred_path, "seg/1 predictions")->required();
  det->add_option("--video-lengths", lengths_path, "JSON object of frame counts");
  det->add_option("--iou-thresholds", iou_list);
  det->add_option("--acc-thresholds", acc_list);
  det->add_option("--acc-iou", metric.acc_iou_threshold);
  det->add_option("--recall-levels", metric.recall_levels);
  det->add_option("--msa-thresholds", msa_list, "Score grid (default: all prediction scores)");
  add_common(det);
  det->callback([&] {
    action = [&] {
      metric.iou_thresholds = parse_reals(iou_list, "--iou-thresholds");
      metric.acc_thresholds = parse_reals(acc_list, "--acc-thresholds");
      if (!msa_list.empty()) metric.msa_thresholds = parse_reals(msa_list, "--msa-thresholds");
      return detect_eval(gt_path, pred_path, lengths_path, metric);
    };
  });

  // spot
  std::string windows_path, proposals_path, sentences_path;
  SpotConfig spot;
  auto* sp = app.add_subcommand("spot", "Spot lexical and fingerspelled signs named by the sentence");
  sp->add_option("--windows", windows_path, "wp/1 window probabilities")->required();
  sp->add_option("--proposals", proposals_path, "seg/1 fingerspelling proposals with transcripts");
  sp->add_option("--sentences", sentences_path, "sent/1 sentences")->required();
  sp->add_option("--delta-l", spot.delta_l);
  sp->add_option("--delta-f", spot.delta_f);
  sp->add_option("--min-confidence", spot.min_confidence);
  add_common(sp);
  sp->callback([&] {
    action = [&] { return spot_cmd(common, windows_path, proposals_path, sentences_path, spot); };
  });

  // retrieve-eval
  std::string relevance_path, embeddings_path, hyps_path, cutoff_list = "1,5,10";
  MatchConfig match;
  auto* ret = app.add_subcommand("retrieve-eval", "Fingerspelled word and video search evaluation");
  ret->add_option("--relevance", relevance_path, "rel/1 relevant (video, word) pairs")->required();
  ret->add_option("--proposals", proposals_path, "seg/1 proposals with detection scores");
  ret->add_option("--embeddings", embeddings_path, "emb/1 segment and word embeddings");
  ret->add_option("--hypotheses", hyps_path, "hyps/1 recognizer output (baseline scoring)");
  ret->add_option("--beta", match.beta);
  ret->add_option("--top-m", match.test_proposals);
  ret->add_option("--cutoffs", cutoff_list, "N values for P@N and R@N");
  add_common(ret);
  ret->callback([&] {
    action = [&] {
      return retrieve_eval(common, relevance_path, proposals_path, embeddings_path, hyps_path, match,
                           parse_ints(cutoff_list, "--cutoffs"));
    };
  });

  // bleu
  std::string hyp_text, ref_text;
  int max_n = 4;
  auto* bl = app.add_subcommand("bleu", "Corpus BLEU and ROUGE-L");
  bl->add_option("--hyp", hyp_text, "One hypothesis per line")->required();
  bl->add_option("--ref", ref_text, "One reference per line")->required();
  bl->add_option("--max-n", max_n);
  add_common(bl);
  bl->callback([&] { action = [&] { return bleu_cmd(hyp_text, ref_text, max_n); }; });

  // fusion-check
  std::string ops_text;
  int instances = 20;
  std::uint64_t seed = 0;
  double eps = 1e-6, tol = 1e-5;
  bool grad_passed = true;
  auto* fc = app.add_subcommand("fusion-check", "Finite-difference checks of the fusion gradients");
  fc->add_option("--ops", ops_text, "Comma-separated subset of ops");
  fc->add_option("--instances", instances);
  fc->add_option("--seed", seed);
  fc->add_option("--eps", eps);
  fc->add_option("--tol", tol);
  add_common(fc);
  fc->callback([&] {
    action = [&] {
      auto text = fusion_check(common, ops_text, instances, seed, eps, tol, grad_passed);
      if (!grad_passed) data_exit = kExitData;
      return text;
    };
  });

  try {
    auto args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    const std::string text = action();
    write_output(common, text, out);
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  if (data_exit != kExitOk) err << "error: gradient check failed\n";
  return data_exit;
}

}  // namespace signspot::cli
