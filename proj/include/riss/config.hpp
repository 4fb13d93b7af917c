#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "riss/corpus.hpp"
#include "riss/error.hpp"
#include "riss/metrics.hpp"
#include "riss/selection.hpp"
#include "riss/similarity.hpp"
#include "riss/utf8.hpp"

namespace riss {

inline constexpr std::string_view kVersion = "0.1.0";

enum class WnllSourceKind { File, Ngram };
enum class EmbeddingSourceKind { File, Hashed };
enum class TreeSourceKind { File, Disabled };

/// Resolved settings for every command. Loaded from a "key = value" file
/// ('#' starts a comment) and then from --set overrides.
struct PipelineConfig {
  TokenMode tokenization = TokenMode::Char;

  WnllSourceKind wnll_source = WnllSourceKind::Ngram;
  std::size_t wnll_order = 3;
  double wnll_k = 0.1;
  std::string wnll_sidecar;

  EmbeddingSourceKind embedding_source = EmbeddingSourceKind::Hashed;
  std::size_t embedding_dim = 256;
  std::size_t embedding_n = 2;
  std::string embedding_sidecar;

  TreeSourceKind tree_source = TreeSourceKind::File;
  std::string tree_sidecar;
  std::size_t tree_max_level = 3;
  std::size_t tree_relabel_cost = 1;

  SelectionConfig selection;

  bool deletion_f1 = false;
  metrics::BleuSmoothing bleu_smoothing = metrics::BleuSmoothing::None;
  TokenMode bleu_level = TokenMode::Char;

  std::uint64_t seed = 0;

  void set(std::string_view key, std::string_view value);

  /// Canonical "key = value" listing of every setting, sorted by key.
  std::string dump() const;

  /// FNV-1a over dump(), as 16 hex digits.
  std::string hash() const;

  static PipelineConfig load(std::istream& in);
  static PipelineConfig load_file(const std::string& path);
};

namespace detail {

inline std::size_t parse_size(std::string_view key, std::string_view v, std::size_t min, std::size_t max) {
  std::size_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ConfigError("'" + std::string(key) + "' expects an integer, got '" + std::string(v) + "'");
  if (out < min || out > max)
    throw ConfigError("'" + std::string(key) + "' must lie in [" + std::to_string(min) + ", " + std::to_string(max) + "]");
  return out;
}

inline double parse_real(std::string_view key, std::string_view v) {
  // std::from_chars for double is missing from older libstdc++.
  std::string s(v);
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty() || !std::isfinite(out))
    throw ConfigError("'" + std::string(key) + "' expects a real number, got '" + s + "'");
  return out;
}

inline bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("'" + std::string(key) + "' expects true|false, got '" + std::string(v) + "'");
}

template <typename E>
E parse_enum(std::string_view key, std::string_view v, std::initializer_list<std::pair<std::string_view, E>> options) {
  std::string expected;
  for (const auto& [name, e] : options) {
    if (v == name) return e;
    if (!expected.empty()) expected += '|';
    expected += name;
  }
  throw ConfigError("'" + std::string(key) + "' expects " + expected + ", got '" + std::string(v) + "'");
}

inline std::string format_real(double v) {
  char buf[32];
  const auto end = std::to_chars(buf, buf + sizeof buf, v).ptr;
  return std::string(buf, end);
}

}  // namespace detail

inline void PipelineConfig::set(std::string_view key, std::string_view value) {
  using namespace detail;
  const std::string_view v = utf8::trim(value);
  constexpr std::size_t big = 1u << 30;
  if (key == "tokenization") tokenization = token_mode_from_string(v);
  else if (key == "wnll.source") wnll_source = parse_enum<WnllSourceKind>(key, v, {{"file", WnllSourceKind::File}, {"ngram", WnllSourceKind::Ngram}});
  else if (key == "wnll.order") wnll_order = parse_size(key, v, 1, 10);
  else if (key == "wnll.k") {
    wnll_k = parse_real(key, v);
    if (!(wnll_k > 0.0)) throw ConfigError("'wnll.k' must be > 0");
  } else if (key == "wnll.sidecar") wnll_sidecar = std::string(v);
  else if (key == "embedding.source") embedding_source = parse_enum<EmbeddingSourceKind>(key, v, {{"file", EmbeddingSourceKind::File}, {"hashed", EmbeddingSourceKind::Hashed}});
  else if (key == "embedding.dim") embedding_dim = parse_size(key, v, 8, big);
  else if (key == "embedding.n") embedding_n = parse_size(key, v, 1, 16);
  else if (key == "embedding.sidecar") embedding_sidecar = std::string(v);
  else if (key == "tree.source") tree_source = parse_enum<TreeSourceKind>(key, v, {{"file", TreeSourceKind::File}, {"disabled", TreeSourceKind::Disabled}});
  else if (key == "tree.sidecar") tree_sidecar = std::string(v);
  else if (key == "tree.max_level") tree_max_level = parse_size(key, v, 1, big);
  else if (key == "tree.relabel_cost") tree_relabel_cost = parse_size(key, v, 1, 2);
  else if (key == "filter.min_tokens") selection.filter.min_tokens = parse_size(key, v, 0, big);
  else if (key == "filter.min_diff") selection.filter.min_diff = parse_real(key, v);
  else if (key == "filter.length_direction") selection.filter.length_direction = parse_enum<LengthDirection>(key, v, {{"at_least", LengthDirection::AtLeast}, {"at_most", LengthDirection::AtMost}});
  else if (key == "bins.count") selection.num_bins = parse_size(key, v, 1, big);
  else if (key == "bins.strategy") selection.strategy = parse_enum<BinStrategy>(key, v, {{"equal-width", BinStrategy::EqualWidth}, {"equal-frequency", BinStrategy::EqualFrequency}});
  else if (key == "bins.min_size") selection.min_bin_size = parse_size(key, v, 1, big);
  else if (key == "gate.missing_feature") selection.missing = parse_enum<MissingFeaturePolicy>(key, v, {{"lenient", MissingFeaturePolicy::Lenient}, {"strict", MissingFeaturePolicy::Strict}});
  else if (key == "gate.std") selection.std_kind = parse_enum<stats::StdKind>(key, v, {{"population", stats::StdKind::Population}, {"sample", stats::StdKind::Sample}});
  else if (key == "metrics.deletion_f1") deletion_f1 = parse_bool(key, v);
  else if (key == "metrics.bleu_smoothing") bleu_smoothing = parse_enum<metrics::BleuSmoothing>(key, v, {{"none", metrics::BleuSmoothing::None}, {"add-one", metrics::BleuSmoothing::AddOne}});
  else if (key == "metrics.bleu_level") bleu_level = token_mode_from_string(v);
  else if (key == "seed") seed = parse_size(key, v, 0, static_cast<std::size_t>(-1));
  else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

inline std::string PipelineConfig::dump() const {
  using detail::format_real;
  std::map<std::string, std::string> kv;
  kv["tokenization"] = std::string(to_string(tokenization));
  kv["wnll.source"] = wnll_source == WnllSourceKind::File ? "file" : "ngram";
  kv["wnll.order"] = std::to_string(wnll_order);
  kv["wnll.k"] = format_real(wnll_k);
  kv["wnll.sidecar"] = wnll_sidecar;
  kv["embedding.source"] = embedding_source == EmbeddingSourceKind::File ? "file" : "hashed";
  kv["embedding.dim"] = std::to_string(embedding_dim);
  kv["embedding.n"] = std::to_string(embedding_n);
  kv["embedding.sidecar"] = embedding_sidecar;
  kv["tree.source"] = tree_source == TreeSourceKind::File ? "file" : "disabled";
  kv["tree.sidecar"] = tree_sidecar;
  kv["tree.max_level"] = std::to_string(tree_max_level);
  kv["tree.relabel_cost"] = std::to_string(tree_relabel_cost);
  kv["filter.min_tokens"] = std::to_string(selection.filter.min_tokens);
  kv["filter.min_diff"] = format_real(selection.filter.min_diff);
  kv["filter.length_direction"] = selection.filter.length_direction == LengthDirection::AtLeast ? "at_least" : "at_most";
  kv["bins.count"] = std::to_string(selection.num_bins);
  kv["bins.strategy"] = selection.strategy == BinStrategy::EqualWidth ? "equal-width" : "equal-frequency";
  kv["bins.min_size"] = std::to_string(selection.min_bin_size);
  kv["gate.missing_feature"] = selection.missing == MissingFeaturePolicy::Lenient ? "lenient" : "strict";
  kv["gate.std"] = selection.std_kind == stats::StdKind::Population ? "population" : "sample";
  kv["metrics.deletion_f1"] = deletion_f1 ? "true" : "false";
  kv["metrics.bleu_smoothing"] = bleu_smoothing == metrics::BleuSmoothing::None ? "none" : "add-one";
  kv["metrics.bleu_level"] = std::string(to_string(bleu_level));
  kv["seed"] = std::to_string(seed);
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

inline std::string PipelineConfig::hash() const {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = digits[h & 0xF];
  return out;
}

inline PipelineConfig PipelineConfig::load(std::istream& in) {
  PipelineConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = line;
    if (const auto hash_pos = sv.find('#'); hash_pos != std::string_view::npos) sv = sv.substr(0, hash_pos);
    sv = utf8::trim(sv);
    if (sv.empty()) continue;
    const auto eq = sv.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    cfg.set(utf8::trim(sv.substr(0, eq)), sv.substr(eq + 1));
  }
  return cfg;
}

inline PipelineConfig PipelineConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return load(in);
}

/// Applies a "key=value" override.
inline void apply_override(PipelineConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ConfigError("--set expects key=value, got '" + std::string(assignment) + "'");
  cfg.set(utf8::trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

}  // namespace riss
