#pragma once

#include <cstdint>
#include <istream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "riss/config.hpp"
#include "riss/corpus.hpp"
#include "riss/idiom.hpp"
#include "riss/metrics.hpp"
#include "riss/readability.hpp"
#include "riss/selection.hpp"
#include "riss/similarity.hpp"
#include "riss/statistics.hpp"

// Command implementations behind the CLI. Every command renders its
// outputs to strings so runs can be compared byte for byte.
namespace riss::pipeline {

using ojson = nlohmann::ordered_json;

inline ojson meta(const PipelineConfig& cfg, std::string_view command) {
  ojson m;
  m["tool"] = "riss";
  m["version"] = kVersion;
  m["command"] = command;
  m["config_hash"] = cfg.hash();
  return m;
}

inline std::string meta_line(const PipelineConfig& cfg, std::string_view command) {
  ojson j;
  j["_meta"] = meta(cfg, command);
  return j.dump() + "\n";
}

inline std::string csv_comment(const PipelineConfig& cfg, std::string_view command) {
  return "# riss " + std::string(kVersion) + " " + std::string(command) + " config_hash=" + cfg.hash() + "\n";
}

/// Reads the corpus and merges the sidecars named in the config.
inline std::vector<ParaphrasePair> load_corpus(std::istream& in, const PipelineConfig& cfg) {
  auto pairs = read_corpus(in, IngestConfig{cfg.tokenization});
  for (const auto* path : {&cfg.wnll_sidecar, &cfg.tree_sidecar, &cfg.embedding_sidecar}) {
    if (!path->empty()) merge_sidecar(pairs, *path);
  }
  return pairs;
}

inline std::vector<ParaphrasePair> load_corpus(const std::string& path, const PipelineConfig& cfg) {
  auto in = riss::detail::open_input(path);
  return load_corpus(in, cfg);
}

inline std::unique_ptr<WnllSource> make_wnll_source(const std::vector<ParaphrasePair>& pairs,
                                                    const PipelineConfig& cfg) {
  if (cfg.wnll_source == WnllSourceKind::File) return std::make_unique<FileWnllSource>(pairs);
  return ngram_wnll(pairs, cfg.wnll_order, cfg.wnll_k);
}

inline FeatureProviders make_providers(const WnllSource& wnll, const PipelineConfig& cfg) {
  FeatureProviders fp;
  fp.wnll = &wnll;
  fp.use_trees = cfg.tree_source == TreeSourceKind::File;
  fp.tree_max_level = cfg.tree_max_level;
  fp.tree_costs.relabel = cfg.tree_relabel_cost;
  if (cfg.embedding_source == EmbeddingSourceKind::File) {
    fp.embedding = [](const Sentence&, const std::optional<std::vector<double>>& supplied) { return supplied; };
  } else {
    const auto dim = cfg.embedding_dim, n = cfg.embedding_n;
    fp.embedding = [dim, n](const Sentence& s, const std::optional<std::vector<double>>&) {
      return std::optional<std::vector<double>>(hashed_char_ngram_embedding(s, dim, n));
    };
  }
  return fp;
}

namespace detail {

inline std::string csv_real(const std::optional<double>& v) {
  if (!v) return "";
  return riss::detail::format_real(*v);
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string feature_csv(const std::vector<FeatureRecord>& records) {
  std::string out = "id,rsrs_source,rsrs_target,rsrs_diff,lev_sim,syn_sim,sem_sim,source_tokens,target_tokens\n";
  for (const auto& r : records) {
    out += csv_escape(r.pair_id) + "," + csv_real(r.rsrs_source) + "," + csv_real(r.rsrs_target) + "," +
           csv_real(r.rsrs_diff) + "," + csv_real(r.lev_sim) + "," + csv_real(r.syn_sim) + "," + csv_real(r.sem_sim) +
           "," + std::to_string(r.source_tokens) + "," + std::to_string(r.target_tokens) + "\n";
  }
  return out;
}

inline ojson stats_json(const std::optional<FeatureStats>& s) {
  if (!s) return nullptr;
  ojson j;
  j["mean"] = s->mean;
  j["std"] = s->std;
  j["count"] = s->count;
  return j;
}

}  // namespace detail

struct ScoreOutput {
  std::vector<FeatureRecord> records;
  std::string jsonl;
  std::string csv;
};

/// Feature table for every pair, unoriented, in input order.
inline ScoreOutput run_score(const std::vector<ParaphrasePair>& pairs, const PipelineConfig& cfg) {
  const auto wnll = make_wnll_source(pairs, cfg);
  const auto fp = make_providers(*wnll, cfg);
  ScoreOutput out;
  out.jsonl = meta_line(cfg, "score");
  for (const auto& p : pairs) {
    out.records.push_back(score_pair(p, fp));
    out.jsonl += to_json(out.records.back()).dump() + "\n";
  }
  out.csv = csv_comment(cfg, "score") + detail::feature_csv(out.records);
  return out;
}

struct MineOutput {
  MineResult result;
  std::string jsonl;   // kept pairs
  std::string report;  // JSON document
  std::string csv;     // feature table of the filtered records
};

inline MineOutput run_mine(std::vector<ParaphrasePair> pairs, const PipelineConfig& cfg) {
  const auto wnll = make_wnll_source(pairs, cfg);
  const auto fp = make_providers(*wnll, cfg);
  MineOutput out;
  out.result = mine(std::move(pairs), fp, cfg.selection);
  const auto& sel = out.result.selection;

  out.jsonl = meta_line(cfg, "mine");
  std::vector<FeatureRecord> scored;
  for (std::size_t i = 0; i < out.result.pairs.size(); ++i) {
    if (sel.bin[i]) scored.push_back(sel.records[i]);
    if (!sel.kept[i]) continue;
    auto j = to_json(out.result.pairs[i]);
    const auto& r = sel.records[i];
    j["rsrs_diff"] = r.rsrs_diff;
    j["lev_sim"] = r.lev_sim;
    if (r.syn_sim) j["syn_sim"] = *r.syn_sim;
    if (r.sem_sim) j["sem_sim"] = *r.sem_sim;
    j["bin"] = *sel.bin[i];
    j["swapped"] = static_cast<bool>(sel.swapped[i]);
    out.jsonl += j.dump() + "\n";
  }

  ojson rep;
  rep["meta"] = meta(cfg, "mine");
  rep["input_count"] = sel.report.input_count;
  rep["kept_count"] = sel.report.kept.size();
  rep["swapped_count"] = sel.report.swapped;
  ojson counts;
  for (auto reason : {RejectReason::TooShort, RejectReason::BelowDiffThreshold, RejectReason::MissingFeature,
                      RejectReason::OutsideGate})
    counts[std::string(to_string(reason))] = sel.report.count(reason);
  rep["rejection_counts"] = counts;
  ojson bins = ojson::array();
  for (const auto& b : sel.report.bins) {
    ojson jb;
    jb["index"] = b.bin.index;
    jb["lower"] = b.bin.lower;
    jb["upper"] = b.bin.upper;
    jb["count"] = b.bin.members.size();
    jb["kept"] = b.kept;
    jb["global_fallback"] = b.global_fallback;
    jb["lev"] = detail::stats_json(b.stats.lev);
    jb["syn"] = detail::stats_json(b.stats.syn);
    jb["sem"] = detail::stats_json(b.stats.sem);
    bins.push_back(jb);
  }
  rep["bins"] = bins;
  rep["kept"] = sel.report.kept;
  ojson rejected = ojson::array();
  for (const auto& r : sel.report.rejected) rejected.push_back({{"id", r.id}, {"reason", to_string(r.reason)}});
  rep["rejected"] = rejected;
  if (sel.report.input_count > 0 && sel.report.kept.empty())
    rep["note"] = "no pair survived; see rejection_counts";
  out.report = rep.dump(2) + "\n";
  out.csv = csv_comment(cfg, "mine") + detail::feature_csv(scored);
  return out;
}

// ---- idiom-prep -------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
  return out;
}

/// Rows of a headed TSV or a JSONL file as string maps, with line numbers.
inline std::vector<std::pair<std::size_t, std::map<std::string, std::string>>> read_table(std::istream& in) {
  std::vector<std::pair<std::size_t, std::map<std::string, std::string>>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::vector<std::string>> header;
  bool jsonl = false, decided = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (utf8::trim(line).empty()) continue;
    if (!decided) {
      jsonl = utf8::trim(line).front() == '{';
      decided = true;
    }
    if (jsonl) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed JSON line: ") + e.what(), line_no);
      }
      if (riss::detail::is_meta_line(j)) continue;
      if (!j.is_object()) throw ParseError("JSONL record must be an object", line_no);
      std::map<std::string, std::string> row;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (it->is_string()) row[it.key()] = it->get<std::string>();
        else if (it->is_number_integer()) row[it.key()] = std::to_string(it->get<long long>());
      }
      rows.emplace_back(line_no, std::move(row));
    } else if (!header) {
      header = split_tabs(line);
    } else {
      const auto cells = split_tabs(line);
      if (cells.size() != header->size())
        throw ParseError("row has " + std::to_string(cells.size()) + " columns, header has " +
                             std::to_string(header->size()),
                         line_no);
      std::map<std::string, std::string> row;
      for (std::size_t c = 0; c < cells.size(); ++c) row[(*header)[c]] = cells[c];
      rows.emplace_back(line_no, std::move(row));
    }
  }
  return rows;
}

}  // namespace detail

struct IdiomPrepOutput {
  std::vector<idiom::IdiomRecord> records;
  std::string records_jsonl;
  std::string dictionary_json;
  std::string errors_jsonl;
  std::string prompts_jsonl;
  std::size_t failures = 0;
};

/// Parses every CIP row; malformed rows go to the errors output instead of
/// aborting the run. With `prompts`, also renders prompted multi-task
/// training lines (idiom task from the records, simplification task from
/// `simplify_pairs`).
inline IdiomPrepOutput run_idiom_prep(std::istream& in, const PipelineConfig& cfg, bool prompts,
                                      const std::vector<ParaphrasePair>* simplify_pairs = nullptr) {
  IdiomPrepOutput out;
  out.records_jsonl = meta_line(cfg, "idiom-prep");
  for (const auto& [line_no, row] : detail::read_table(in)) {
    const auto id_it = row.find("id");
    const std::string id = id_it != row.end() ? id_it->second : "cip-" + std::to_string(line_no);
    try {
      const auto src = row.find("source"), tgt = row.find("target");
      if (src == row.end()) throw ValidationError("missing column 'source'");
      if (tgt == row.end()) throw ValidationError("missing column 'target'");
      auto rec = idiom::parse_cip_record(src->second, tgt->second, cfg.tokenization, id);
      ojson j;
      j["id"] = rec.id;
      j["idiom"] = rec.idiom;
      j["explanation"] = rec.explanation;
      j["target"] = rec.target_sentence;
      j["span"] = {rec.explanation_span.begin, rec.explanation_span.end};
      j["original"] = rec.original_sentence;
      j["masked"] = rec.masked_sentence;
      out.records_jsonl += j.dump() + "\n";
      out.records.push_back(std::move(rec));
    } catch (const Error& e) {
      ++out.failures;
      ojson err;
      err["line"] = line_no;
      err["id"] = id;
      err["error"] = e.what();
      out.errors_jsonl += err.dump() + "\n";
    }
  }
  ojson dict = ojson::object();
  for (const auto& [idiom_text, entries] : idiom::build_idiom_dictionary(out.records)) {
    ojson list = ojson::array();
    for (const auto& e : entries) list.push_back({{"id", e.record_id}, {"span", {e.span.begin, e.span.end}}});
    dict[idiom_text] = list;
  }
  ojson doc;
  doc["meta"] = meta(cfg, "idiom-prep");
  doc["dictionary"] = dict;
  out.dictionary_json = doc.dump(2) + "\n";
  if (prompts) {
    out.prompts_jsonl = meta_line(cfg, "idiom-prep");
    for (const auto& r : out.records) {
      ojson j;
      j["task"] = "idiom";
      j["input"] = idiom::prepend_prompt(idiom::Task::Idiom, r.idiom);
      j["output"] = r.explanation;
      out.prompts_jsonl += j.dump() + "\n";
    }
    if (simplify_pairs) {
      for (const auto& p : *simplify_pairs) {
        ojson j;
        j["task"] = "simplify";
        j["input"] = idiom::prepend_prompt(idiom::Task::Simplify, p.source.raw);
        j["output"] = p.target.raw;
        out.prompts_jsonl += j.dump() + "\n";
      }
    }
  }
  return out;
}

// ---- eval ---------------------------------------------------------------

/// Rows with `orig`, `sys` and `ref_1..ref_x`; x is taken from the first row
/// and every row must carry all of them.
inline std::vector<metrics::EvalInstance> read_eval(std::istream& in) {
  const auto rows = detail::read_table(in);
  if (rows.empty()) throw ValidationError("evaluation file has no rows");
  std::size_t refs = 0;
  while (rows.front().second.count("ref_" + std::to_string(refs + 1))) ++refs;
  std::vector<metrics::EvalInstance> out;
  for (const auto& [line_no, row] : rows) {
    auto get = [&](const std::string& col) -> const std::string& {
      const auto it = row.find(col);
      if (it == row.end()) throw ParseError("schema error: missing column '" + col + "'", line_no);
      return it->second;
    };
    metrics::EvalInstance inst;
    inst.original = get("orig");
    inst.system = get("sys");
    if (refs == 0) get("ref_1");
    for (std::size_t r = 1; r <= refs; ++r) inst.references.push_back(get("ref_" + std::to_string(r)));
    if (row.count("ref_" + std::to_string(refs + 1)))
      throw ParseError("schema error: unexpected column 'ref_" + std::to_string(refs + 1) + "'", line_no);
    out.push_back(std::move(inst));
  }
  return out;
}

struct EvalReport {
  double sari_char = 0.0;
  double sari_word = 0.0;
  double bleu = 0.0;
  metrics::Aggregation mode = metrics::Aggregation::SentenceMean;
  std::size_t n_instances = 0;
  std::string json;
};

inline EvalReport run_eval(const std::vector<metrics::EvalInstance>& instances, metrics::Aggregation mode,
                           const PipelineConfig& cfg) {
  const metrics::SariOptions opts{cfg.deletion_f1};
  EvalReport r;
  r.mode = mode;
  r.n_instances = instances.size();
  r.sari_char = metrics::sari_corpus(instances, mode, TokenMode::Char, opts);
  r.sari_word = metrics::sari_corpus(instances, mode, TokenMode::Word, opts);
  r.bleu = metrics::bleu(instances, cfg.bleu_level, 4, cfg.bleu_smoothing);
  ojson j;
  j["sari_char"] = r.sari_char;
  j["sari_word"] = r.sari_word;
  j["bleu"] = r.bleu;
  j["mode"] = mode == metrics::Aggregation::SentenceMean ? "css" : "mcts";
  j["n_instances"] = r.n_instances;
  j["meta"] = meta(cfg, "eval");
  r.json = j.dump(2) + "\n";
  return r;
}

// ---- loss-check -------------------------------------------------------

struct LossRow {
  std::string id;
  idiom::LossReport loss;
};

struct LossCheckOutput {
  std::vector<LossRow> rows;
  std::size_t clamps = 0;
  std::string jsonl;
};

/// Track file rows: {"id", "targets": [...], "probs": [[...], ...], "span": [b, e]?}.
/// A missing span selects no idiom positions.
inline LossCheckOutput run_loss_check(std::istream& in, const PipelineConfig& cfg) {
  LossCheckOutput out;
  ClampCounter clamps;
  riss::detail::for_each_jsonl(in, [&](const nlohmann::json& j, std::size_t) {
    LossRow row;
    row.id = riss::detail::string_field(j, "id");
    const auto targets = j.at("targets").get<std::vector<std::size_t>>();
    idiom::DistributionTrack track;
    for (const auto& pos : j.at("probs")) track.probs.push_back(riss::detail::number_array(pos, "probs"));
    track.validate();
    idiom::Span span{0, 0};
    if (auto it = j.find("span"); it != j.end() && !it->is_null()) {
      const auto s = it->get<std::vector<std::size_t>>();
      if (s.size() != 2) throw ValidationError("span must be [begin, end]");
      span = idiom::Span{s[0], s[1]};
    }
    row.loss = idiom::ias_loss(track, targets, span, &clamps);
    out.rows.push_back(std::move(row));
  });
  out.clamps = clamps.events;
  out.jsonl = meta_line(cfg, "loss-check");
  for (const auto& r : out.rows) {
    ojson j;
    j["id"] = r.id;
    j["sentence_loss"] = r.loss.sentence_loss;
    j["idiom_loss"] = r.loss.idiom_loss;
    j["total"] = r.loss.total;
    out.jsonl += j.dump() + "\n";
  }
  return out;
}

// ---- stats --------------------------------------------------------------

/// Correlation of rsrs_diff with each similarity, plus a paired t-test of
/// source against target readability.
inline std::string run_stats(const std::vector<FeatureRecord>& records, const PipelineConfig& cfg) {
  auto correlation = [&](auto select) -> ojson {
    std::vector<double> x, y;
    for (const auto& r : records) {
      if (auto v = select(r)) {
        x.push_back(r.rsrs_diff);
        y.push_back(*v);
      }
    }
    ojson j;
    try {
      const auto c = stats::pearson(x, y);
      j["r"] = c.r;
      j["p_value"] = c.p_value;
      j["n"] = c.n;
    } catch (const DomainError& e) {
      j["error"] = e.what();
      j["n"] = x.size();
    }
    return j;
  };
  ojson doc;
  doc["meta"] = meta(cfg, "stats");
  doc["n_records"] = records.size();
  ojson corr;
  corr["lev"] = correlation([](const FeatureRecord& r) { return std::optional<double>(r.lev_sim); });
  corr["syn"] = correlation([](const FeatureRecord& r) { return r.syn_sim; });
  corr["sem"] = correlation([](const FeatureRecord& r) { return r.sem_sim; });
  doc["pearson"] = corr;
  std::vector<double> a, b;
  for (const auto& r : records) {
    a.push_back(r.rsrs_source);
    b.push_back(r.rsrs_target);
  }
  ojson t;
  try {
    const auto tt = stats::paired_t_test(a, b);
    t["t"] = tt.t;
    t["p_value"] = tt.p_value;
    t["n"] = tt.n;
    t["mean_source"] = stats::mean(a);
    t["mean_target"] = stats::mean(b);
  } catch (const DomainError& e) {
    t["error"] = e.what();
  }
  doc["paired_t_test"] = t;
  return doc.dump(2) + "\n";
}

// ---- synth ------------------------------------------------------------

/// Deterministic synthetic pair corpus with inline WNLL tracks, trees and
/// embeddings, for smoke runs and demonstrations.
inline std::string run_synth(std::size_t count, std::size_t length, const PipelineConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  auto uniform = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  static const std::vector<std::string> alphabet = {"的", "是", "在", "人", "有", "我", "他", "这", "中", "大",
                                                    "来", "上", "国", "个", "到", "说", "们", "为", "子", "和"};
  static const std::vector<std::string> phrase = {"NP", "VP", "PP", "ADVP", "QP"};
  std::string out = meta_line(cfg, "synth");
  for (std::size_t i = 0; i < count; ++i) {
    std::string source, target;
    std::vector<std::string> chars;
    std::vector<double> sw, tw;
    const std::size_t tlen = length - static_cast<std::size_t>(uniform() * static_cast<double>(length) / 4.0);
    for (std::size_t k = 0; k < length; ++k) {
      chars.push_back(alphabet[rng() % alphabet.size()]);
      source += chars.back();
      sw.push_back(0.5 + 3.0 * uniform());
    }
    // The target copies most characters of the source and reads easier.
    for (std::size_t k = 0; k < tlen; ++k) {
      target += uniform() < 0.7 ? chars[k] : alphabet[rng() % alphabet.size()];
      tw.push_back(0.3 + 2.5 * uniform());
    }
    auto tree = [&]() {
      std::string t = "(S";
      const std::size_t kids = 1 + rng() % 3;
      for (std::size_t k = 0; k < kids; ++k) t += " (" + phrase[rng() % phrase.size()] + " (NN x))";
      return t + ")";
    };
    std::vector<double> se(8), te(8);
    for (std::size_t d = 0; d < 8; ++d) {
      se[d] = uniform() - 0.25;
      te[d] = se[d] + 0.3 * (uniform() - 0.5);
    }
    ojson j;
    j["id"] = "syn-" + std::to_string(i);
    j["source"] = source;
    j["target"] = target;
    j["source_tree"] = tree();
    j["target_tree"] = tree();
    j["source_embedding"] = se;
    j["target_embedding"] = te;
    j["source_wnll"] = sw;
    j["target_wnll"] = tw;
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace riss::pipeline
