#pragma once

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "riss/error.hpp"
#include "riss/tree.hpp"
#include "riss/utf8.hpp"

namespace riss {

enum class TokenMode { Char, Word };

inline std::string_view to_string(TokenMode m) { return m == TokenMode::Char ? "char" : "word"; }

inline TokenMode token_mode_from_string(std::string_view s) {
  if (s == "char") return TokenMode::Char;
  if (s == "word") return TokenMode::Word;
  throw ConfigError("unknown tokenization mode '" + std::string(s) + "' (expected char|word)");
}

/// Joiner that reproduces the raw text (modulo whitespace) from tokens.
inline std::string_view joiner(TokenMode m) { return m == TokenMode::Char ? "" : " "; }

/// Char mode: Unicode scalar values, whitespace dropped.
/// Word mode: whitespace-delimited tokens of pre-segmented text.
inline std::vector<std::string> tokenize(std::string_view raw, TokenMode mode) {
  if (utf8::trim(raw).empty()) throw ValidationError("cannot tokenize empty text");
  std::vector<std::string> tokens;
  if (mode == TokenMode::Char) {
    for (auto& s : utf8::split_scalars(raw)) {
      if (!utf8::is_space(s)) tokens.push_back(std::move(s));
    }
    return tokens;
  }
  std::string current;
  for (auto& s : utf8::split_scalars(raw)) {
    if (utf8::is_space(s)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current += s;
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

inline std::string join(const std::vector<std::string>& tokens, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

struct Sentence {
  std::string id;
  std::string raw;
  std::vector<std::string> tokens;

  static Sentence make(std::string id, std::string raw, TokenMode mode) {
    auto tokens = tokenize(raw, mode);
    return Sentence{std::move(id), std::move(raw), std::move(tokens)};
  }
};

/// Per-token negative log-likelihoods (natural log).
struct WnllTrack {
  std::vector<double> values;

  void validate() const {
    for (double v : values) {
      if (!std::isfinite(v) || v < 0.0) throw ValidationError("WNLL values must be finite and >= 0");
    }
  }
};

struct ParaphrasePair {
  std::string id;
  Sentence source;
  Sentence target;
  std::optional<ParseTree> source_tree;
  std::optional<ParseTree> target_tree;
  std::optional<std::vector<double>> source_embedding;
  std::optional<std::vector<double>> target_embedding;
  std::optional<WnllTrack> source_wnll;
  std::optional<WnllTrack> target_wnll;

  /// Exchanges the two sides together with everything attached to them.
  void swap_sides() {
    std::swap(source, target);
    std::swap(source_tree, target_tree);
    std::swap(source_embedding, target_embedding);
    std::swap(source_wnll, target_wnll);
  }

  void validate() const {
    if (source_wnll) {
      source_wnll->validate();
      if (source_wnll->values.size() != source.tokens.size())
        throw ValidationError("pair " + id + ": source_wnll length " +
                              std::to_string(source_wnll->values.size()) + " != token count " +
                              std::to_string(source.tokens.size()));
    }
    if (target_wnll) {
      target_wnll->validate();
      if (target_wnll->values.size() != target.tokens.size())
        throw ValidationError("pair " + id + ": target_wnll length " +
                              std::to_string(target_wnll->values.size()) + " != token count " +
                              std::to_string(target.tokens.size()));
    }
    if (source_embedding && target_embedding) {
      if (source_embedding->empty() || source_embedding->size() != target_embedding->size())
        throw ValidationError("pair " + id + ": embeddings must have equal dimension >= 1");
    }
  }
};

/// Per-pair scores. Token counts are carried for the length filter.
struct FeatureRecord {
  std::string pair_id;
  double rsrs_source = 0.0;
  double rsrs_target = 0.0;
  double rsrs_diff = 0.0;
  double lev_sim = 0.0;
  std::optional<double> syn_sim;
  std::optional<double> sem_sim;
  std::size_t source_tokens = 0;
  std::size_t target_tokens = 0;

  static FeatureRecord from_rsrs(std::string id, double source, double target) {
    FeatureRecord r;
    r.pair_id = std::move(id);
    r.rsrs_source = source;
    r.rsrs_target = target;
    r.rsrs_diff = source - target;
    return r;
  }
};

struct IngestConfig {
  TokenMode mode = TokenMode::Char;
};

namespace detail {

inline std::vector<double> number_array(const nlohmann::json& j, std::string_view key) {
  if (!j.is_array()) throw ValidationError("field '" + std::string(key) + "' must be an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw ValidationError("field '" + std::string(key) + "' must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

inline std::string string_field(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_string()) throw ValidationError(std::string("missing string field '") + key + "'");
  return it->get<std::string>();
}

/// A metadata header line written by the CLI; skipped by readers.
inline bool is_meta_line(const nlohmann::json& j) { return j.is_object() && j.size() == 1 && j.contains("_meta"); }

inline void apply_optional_fields(ParaphrasePair& p, const nlohmann::json& j) {
  if (auto it = j.find("source_tree"); it != j.end() && !it->is_null())
    p.source_tree = parse_bracketed_tree(it->get<std::string>());
  if (auto it = j.find("target_tree"); it != j.end() && !it->is_null())
    p.target_tree = parse_bracketed_tree(it->get<std::string>());
  if (auto it = j.find("source_embedding"); it != j.end() && !it->is_null())
    p.source_embedding = number_array(*it, "source_embedding");
  if (auto it = j.find("target_embedding"); it != j.end() && !it->is_null())
    p.target_embedding = number_array(*it, "target_embedding");
  if (auto it = j.find("source_wnll"); it != j.end() && !it->is_null())
    p.source_wnll = WnllTrack{number_array(*it, "source_wnll")};
  if (auto it = j.find("target_wnll"); it != j.end() && !it->is_null())
    p.target_wnll = WnllTrack{number_array(*it, "target_wnll")};
}

/// Calls fn(json, line_number) for each non-blank, non-meta JSONL line.
template <typename Fn>
void for_each_jsonl(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (utf8::trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("malformed JSON line: ") + e.what(), line_no);
    }
    if (is_meta_line(j)) continue;
    if (!j.is_object()) throw ParseError("JSONL record must be an object", line_no);
    try {
      fn(j, line_no);
    } catch (const Error& e) {
      throw ParseError(e.what(), line_no);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(e.what(), line_no);
    }
  }
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return in;
}

}  // namespace detail

/// Reads a pair corpus (JSONL). Errors carry the 1-based line number.
inline std::vector<ParaphrasePair> read_corpus(std::istream& in, const IngestConfig& config) {
  std::vector<ParaphrasePair> pairs;
  std::unordered_set<std::string> seen;
  detail::for_each_jsonl(in, [&](const nlohmann::json& j, std::size_t) {
    ParaphrasePair p;
    p.id = detail::string_field(j, "id");
    if (!seen.insert(p.id).second) throw ValidationError("duplicate id '" + p.id + "'");
    p.source = Sentence::make(p.id + "#source", detail::string_field(j, "source"), config.mode);
    p.target = Sentence::make(p.id + "#target", detail::string_field(j, "target"), config.mode);
    detail::apply_optional_fields(p, j);
    p.validate();
    pairs.push_back(std::move(p));
  });
  return pairs;
}

inline std::vector<ParaphrasePair> read_corpus(const std::string& path, const IngestConfig& config) {
  auto in = detail::open_input(path);
  return read_corpus(in, config);
}

/// Attaches optional fields from a sidecar JSONL keyed by id (trees,
/// embeddings or WNLL tracks). Sidecar ids absent from the corpus are errors.
inline void merge_sidecar(std::vector<ParaphrasePair>& pairs, std::istream& in) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < pairs.size(); ++i) index.emplace(pairs[i].id, i);
  detail::for_each_jsonl(in, [&](const nlohmann::json& j, std::size_t) {
    const auto id = detail::string_field(j, "id");
    const auto it = index.find(id);
    if (it == index.end()) throw ValidationError("sidecar id '" + id + "' not in corpus");
    auto& p = pairs[it->second];
    detail::apply_optional_fields(p, j);
    p.validate();
  });
}

inline void merge_sidecar(std::vector<ParaphrasePair>& pairs, const std::string& path) {
  auto in = detail::open_input(path);
  merge_sidecar(pairs, in);
}

/// JSON form of a pair, same schema read_corpus accepts.
inline nlohmann::ordered_json to_json(const ParaphrasePair& p) {
  nlohmann::ordered_json j;
  j["id"] = p.id;
  j["source"] = p.source.raw;
  j["target"] = p.target.raw;
  if (p.source_tree) j["source_tree"] = to_bracketed(*p.source_tree);
  if (p.target_tree) j["target_tree"] = to_bracketed(*p.target_tree);
  if (p.source_embedding) j["source_embedding"] = *p.source_embedding;
  if (p.target_embedding) j["target_embedding"] = *p.target_embedding;
  if (p.source_wnll) j["source_wnll"] = p.source_wnll->values;
  if (p.target_wnll) j["target_wnll"] = p.target_wnll->values;
  return j;
}

inline nlohmann::ordered_json to_json(const FeatureRecord& r) {
  nlohmann::ordered_json j;
  j["id"] = r.pair_id;
  j["rsrs_source"] = r.rsrs_source;
  j["rsrs_target"] = r.rsrs_target;
  j["rsrs_diff"] = r.rsrs_diff;
  j["lev_sim"] = r.lev_sim;
  if (r.syn_sim) j["syn_sim"] = *r.syn_sim;
  if (r.sem_sim) j["sem_sim"] = *r.sem_sim;
  j["source_tokens"] = r.source_tokens;
  j["target_tokens"] = r.target_tokens;
  return j;
}

inline FeatureRecord feature_record_from_json(const nlohmann::json& j) {
  FeatureRecord r;
  r.pair_id = detail::string_field(j, "id");
  r.rsrs_source = j.at("rsrs_source").get<double>();
  r.rsrs_target = j.at("rsrs_target").get<double>();
  r.rsrs_diff = j.at("rsrs_diff").get<double>();
  r.lev_sim = j.at("lev_sim").get<double>();
  if (auto it = j.find("syn_sim"); it != j.end() && !it->is_null()) r.syn_sim = it->get<double>();
  if (auto it = j.find("sem_sim"); it != j.end() && !it->is_null()) r.sem_sim = it->get<double>();
  r.source_tokens = j.value("source_tokens", std::size_t{0});
  r.target_tokens = j.value("target_tokens", std::size_t{0});
  return r;
}

inline std::vector<FeatureRecord> read_feature_table(std::istream& in) {
  std::vector<FeatureRecord> out;
  detail::for_each_jsonl(in, [&](const nlohmann::json& j, std::size_t) { out.push_back(feature_record_from_json(j)); });
  return out;
}

}  // namespace riss
