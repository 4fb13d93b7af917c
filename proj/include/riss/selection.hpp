#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "riss/corpus.hpp"
#include "riss/error.hpp"
#include "riss/readability.hpp"
#include "riss/similarity.hpp"
#include "riss/statistics.hpp"

namespace riss {

enum class RejectReason { BelowDiffThreshold, TooShort, OutsideGate, MissingFeature };

inline std::string_view to_string(RejectReason r) {
  switch (r) {
    case RejectReason::BelowDiffThreshold: return "below-diff-threshold";
    case RejectReason::TooShort: return "too-short";
    case RejectReason::OutsideGate: return "outside-gate";
    case RejectReason::MissingFeature: return "missing-feature";
  }
  return "unknown";
}

enum class BinStrategy { EqualWidth, EqualFrequency };
enum class MissingFeaturePolicy { Lenient, Strict };
/// Which side of min_tokens is rejected; AtLeast keeps sides with >= min_tokens.
enum class LengthDirection { AtLeast, AtMost };

struct Bin {
  std::size_t index = 0;
  double lower = 0.0;
  double upper = 0.0;
  std::vector<std::string> members;
};

struct FeatureStats {
  double mean = 0.0;
  double std = 0.0;
  std::size_t count = 0;
};

/// Per-feature statistics of one bin; a feature absent on every member is nullopt.
struct BinStats {
  std::optional<FeatureStats> lev;
  std::optional<FeatureStats> syn;
  std::optional<FeatureStats> sem;
  std::size_t count = 0;
};

struct Rejection {
  std::string id;
  RejectReason reason;
};

struct FilterConfig {
  std::size_t min_tokens = 30;
  double min_diff = 0.1;
  LengthDirection length_direction = LengthDirection::AtLeast;
};

struct SelectionConfig {
  FilterConfig filter;
  std::size_t num_bins = 10;
  BinStrategy strategy = BinStrategy::EqualWidth;
  /// Bins with fewer members are gated against the statistics of all
  /// post-filter records instead of their own.
  std::size_t min_bin_size = 1;
  MissingFeaturePolicy missing = MissingFeaturePolicy::Lenient;
  stats::StdKind std_kind = stats::StdKind::Population;
};

/// Swaps sides when rsrs_diff < 0 so the source is the harder sentence.
/// Similarities are symmetric and left unchanged. Returns the swap flag.
inline bool orient(FeatureRecord& r) {
  if (!(r.rsrs_diff < 0.0)) return false;
  std::swap(r.rsrs_source, r.rsrs_target);
  std::swap(r.source_tokens, r.target_tokens);
  r.rsrs_diff = r.rsrs_source - r.rsrs_target;
  return true;
}

struct OrientedPair {
  ParaphrasePair pair;
  FeatureRecord features;
  bool swapped = false;
};

inline OrientedPair orient_pair(ParaphrasePair pair, FeatureRecord features) {
  OrientedPair out{std::move(pair), std::move(features), false};
  out.swapped = orient(out.features);
  if (out.swapped) out.pair.swap_sides();
  return out;
}

/// Length rule first, then the readability-difference threshold (inclusive).
inline std::optional<RejectReason> filter_record(const FeatureRecord& r, const FilterConfig& cfg) {
  const std::size_t shortest = std::min(r.source_tokens, r.target_tokens);
  const std::size_t longest = std::max(r.source_tokens, r.target_tokens);
  const bool length_ok = cfg.length_direction == LengthDirection::AtLeast ? shortest >= cfg.min_tokens
                                                                          : longest <= cfg.min_tokens;
  if (!length_ok) return RejectReason::TooShort;
  if (r.rsrs_diff < cfg.min_diff) return RejectReason::BelowDiffThreshold;
  return std::nullopt;
}

struct FilterResult {
  std::vector<std::size_t> kept;
  std::vector<Rejection> rejected;
};

inline FilterResult filter_corpus(std::span<const FeatureRecord> records, const FilterConfig& cfg) {
  FilterResult out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (auto reason = filter_record(records[i], cfg))
      out.rejected.push_back({records[i].pair_id, *reason});
    else
      out.kept.push_back(i);
  }
  return out;
}

namespace detail {

struct BinLayout {
  std::vector<double> lower, upper;
  std::vector<std::size_t> assignment;  // bin index per record
};

inline BinLayout layout_bins(std::span<const FeatureRecord> records, std::size_t num_bins, BinStrategy strategy) {
  if (num_bins < 1) throw ConfigError("num_bins must be >= 1");
  if (records.empty()) throw ValidationError("cannot bin an empty record set");
  BinLayout out;
  std::vector<double> diffs;
  diffs.reserve(records.size());
  for (const auto& r : records) diffs.push_back(r.rsrs_diff);
  const auto [lo_it, hi_it] = std::minmax_element(diffs.begin(), diffs.end());
  const double lo = *lo_it, hi = *hi_it;

  if (lo == hi) {
    out.lower = {lo};
    out.upper = {hi};
    out.assignment.assign(records.size(), 0);
    return out;
  }

  // edges[0] = lo, edges[num_bins] = hi; bin b covers [edges[b], edges[b+1]),
  // the last bin closed above.
  std::vector<double> edges(num_bins + 1);
  edges.front() = lo;
  edges.back() = hi;
  if (strategy == BinStrategy::EqualWidth) {
    const double width = (hi - lo) / static_cast<double>(num_bins);
    for (std::size_t b = 1; b < num_bins; ++b) edges[b] = lo + static_cast<double>(b) * width;
  } else {
    std::vector<double> sorted = diffs;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t b = 1; b < num_bins; ++b) edges[b] = sorted[b * sorted.size() / num_bins];
  }
  out.lower.assign(edges.begin(), edges.end() - 1);
  out.upper.assign(edges.begin() + 1, edges.end());
  out.assignment.reserve(records.size());
  for (double d : diffs) {
    // Largest b < num_bins with d >= edges[b].
    const auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, d);
    out.assignment.push_back(static_cast<std::size_t>(it - edges.begin()) - 1);
  }
  return out;
}

inline std::optional<FeatureStats> feature_stats(const std::vector<double>& values, stats::StdKind kind) {
  if (values.empty()) return std::nullopt;
  const auto std_kind = values.size() < 2 ? stats::StdKind::Population : kind;
  return FeatureStats{stats::mean(values), stats::stddev(values, std_kind), values.size()};
}

}  // namespace detail

/// Partitions records by rsrs_diff. Equal-width splits the observed range
/// evenly; equal-frequency places edges at sorted quantile positions. When
/// all differences are equal a single bin holds everything.
inline std::vector<Bin> bin_records(std::span<const FeatureRecord> records, std::size_t num_bins,
                                    BinStrategy strategy = BinStrategy::EqualWidth) {
  const auto layout = detail::layout_bins(records, num_bins, strategy);
  std::vector<Bin> bins(layout.lower.size());
  for (std::size_t b = 0; b < bins.size(); ++b) bins[b] = Bin{b, layout.lower[b], layout.upper[b], {}};
  for (std::size_t i = 0; i < records.size(); ++i) bins[layout.assignment[i]].members.push_back(records[i].pair_id);
  return bins;
}

/// Mean and standard deviation of each feature over the members where it
/// is present. A single value has zero spread.
inline BinStats bin_stats(std::span<const FeatureRecord* const> members,
                          stats::StdKind kind = stats::StdKind::Population) {
  if (members.empty()) throw ValidationError("bin_stats of an empty bin");
  std::vector<double> lev, syn, sem;
  for (const auto* r : members) {
    lev.push_back(r->lev_sim);
    if (r->syn_sim) syn.push_back(*r->syn_sim);
    if (r->sem_sim) sem.push_back(*r->sem_sim);
  }
  return BinStats{detail::feature_stats(lev, kind), detail::feature_stats(syn, kind),
                  detail::feature_stats(sem, kind), members.size()};
}

inline BinStats bin_stats(const Bin& bin, std::span<const FeatureRecord> records,
                          stats::StdKind kind = stats::StdKind::Population) {
  std::map<std::string_view, const FeatureRecord*> by_id;
  for (const auto& r : records) by_id.emplace(r.pair_id, &r);
  std::vector<const FeatureRecord*> members;
  for (const auto& id : bin.members) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw ValidationError("bin member '" + id + "' not among records");
    members.push_back(it->second);
  }
  return bin_stats(members, kind);
}

/// 1 iff every feature present in both the record and the statistics lies
/// within mean ± std (bounds inclusive).
inline int quality_gate(const FeatureRecord& r, const BinStats& s) {
  auto within = [](double v, const std::optional<FeatureStats>& fs) {
    return !fs || (fs->mean - fs->std <= v && v <= fs->mean + fs->std);
  };
  if (!within(r.lev_sim, s.lev)) return 0;
  if (r.syn_sim && !within(*r.syn_sim, s.syn)) return 0;
  if (r.sem_sim && !within(*r.sem_sim, s.sem)) return 0;
  return 1;
}

struct BinReport {
  Bin bin;
  BinStats stats;
  std::size_t kept = 0;
  bool global_fallback = false;
};

struct SelectionReport {
  std::vector<std::string> kept;
  std::vector<Rejection> rejected;
  std::vector<BinReport> bins;
  std::size_t input_count = 0;
  std::size_t swapped = 0;
  std::size_t wnll_clamps = 0;

  std::size_t count(RejectReason reason) const {
    return static_cast<std::size_t>(
        std::count_if(rejected.begin(), rejected.end(), [&](const Rejection& r) { return r.reason == reason; }));
  }
};

/// Result of selection over feature records, in input order.
struct SelectionResult {
  std::vector<FeatureRecord> records;  // oriented
  std::vector<bool> swapped;
  std::vector<bool> kept;
  std::vector<std::optional<std::size_t>> bin;
  SelectionReport report;
};

namespace detail {

/// Bin, compute statistics and gate the records at `passing` (indices
/// into result.records, all already oriented and filtered).
inline void bin_and_gate(SelectionResult& result, const std::vector<std::size_t>& passing,
                         const SelectionConfig& cfg, std::vector<std::optional<RejectReason>>& reasons) {
  if (passing.empty()) return;
  std::vector<FeatureRecord> subset;
  subset.reserve(passing.size());
  for (std::size_t i : passing) subset.push_back(result.records[i]);
  const auto layout = layout_bins(subset, cfg.num_bins, cfg.strategy);

  std::vector<std::vector<const FeatureRecord*>> members(layout.lower.size());
  for (std::size_t k = 0; k < subset.size(); ++k) members[layout.assignment[k]].push_back(&subset[k]);

  std::vector<const FeatureRecord*> everyone;
  for (const auto& r : subset) everyone.push_back(&r);
  std::optional<BinStats> global;

  std::vector<BinStats> per_bin(members.size());
  for (std::size_t b = 0; b < members.size(); ++b) {
    BinReport br;
    br.bin = Bin{b, layout.lower[b], layout.upper[b], {}};
    for (const auto* r : members[b]) br.bin.members.push_back(r->pair_id);
    if (!members[b].empty()) {
      if (members[b].size() < cfg.min_bin_size) {
        if (!global) global = bin_stats(everyone, cfg.std_kind);
        br.stats = *global;
        br.global_fallback = true;
      } else {
        br.stats = bin_stats(members[b], cfg.std_kind);
      }
    }
    per_bin[b] = br.stats;
    result.report.bins.push_back(std::move(br));
  }

  for (std::size_t k = 0; k < subset.size(); ++k) {
    const std::size_t i = passing[k];
    const std::size_t b = layout.assignment[k];
    result.bin[i] = b;
    const auto& r = subset[k];
    if (cfg.missing == MissingFeaturePolicy::Strict && (!r.syn_sim || !r.sem_sim)) {
      reasons[i] = RejectReason::MissingFeature;
      continue;
    }
    if (quality_gate(r, per_bin[b])) {
      result.kept[i] = true;
      ++result.report.bins[b].kept;
    } else {
      reasons[i] = RejectReason::OutsideGate;
    }
  }
}

inline void finish_report(SelectionResult& result, const std::vector<std::optional<RejectReason>>& reasons) {
  for (std::size_t i = 0; i < result.records.size(); ++i) {
    if (result.kept[i])
      result.report.kept.push_back(result.records[i].pair_id);
    else
      result.report.rejected.push_back({result.records[i].pair_id, *reasons[i]});
  }
}

}  // namespace detail

/// Orientation, filtering, binning, per-bin statistics and the quality
/// gate over precomputed feature records.
inline SelectionResult select_records(std::vector<FeatureRecord> records, const SelectionConfig& cfg) {
  SelectionResult result;
  const std::size_t n = records.size();
  result.records = std::move(records);
  result.swapped.assign(n, false);
  result.kept.assign(n, false);
  result.bin.assign(n, std::nullopt);
  result.report.input_count = n;
  std::vector<std::optional<RejectReason>> reasons(n);
  std::vector<std::size_t> passing;
  for (std::size_t i = 0; i < n; ++i) {
    result.swapped[i] = orient(result.records[i]);
    if (result.swapped[i]) ++result.report.swapped;
    reasons[i] = filter_record(result.records[i], cfg.filter);
    if (!reasons[i]) passing.push_back(i);
  }
  detail::bin_and_gate(result, passing, cfg, reasons);
  detail::finish_report(result, reasons);
  return result;
}

/// Feature providers for the end-to-end pipeline. Absent providers leave
/// the corresponding feature absent.
struct FeatureProviders {
  const WnllSource* wnll = nullptr;
  std::function<std::optional<std::vector<double>>(const Sentence&, const std::optional<std::vector<double>>&)>
      embedding;
  bool use_trees = true;
  std::size_t tree_max_level = 3;
  TreeEditCosts tree_costs;
};

/// Lexical, syntactic and semantic similarity of one pair.
inline SimilarityTriple similarities(const ParaphrasePair& p, const FeatureProviders& fp) {
  SimilarityTriple s;
  s.lev = lev_sim(p.source.tokens, p.target.tokens);
  if (fp.use_trees && p.source_tree && p.target_tree)
    s.syn = syn_sim(*p.source_tree, *p.target_tree, fp.tree_max_level, fp.tree_costs);
  if (fp.embedding) {
    const auto u = fp.embedding(p.source, p.source_embedding);
    const auto v = fp.embedding(p.target, p.target_embedding);
    if (u && v) s.sem = sem_sim(*u, *v);
  }
  return s;
}

inline FeatureRecord score_pair(const ParaphrasePair& p, const FeatureProviders& fp) {
  if (!fp.wnll) throw ConfigError("no WNLL source configured");
  auto r = FeatureRecord::from_rsrs(p.id, rsrs(fp.wnll->wnll(p.source)).value, rsrs(fp.wnll->wnll(p.target)).value);
  r.source_tokens = p.source.tokens.size();
  r.target_tokens = p.target.tokens.size();
  const auto s = similarities(p, fp);
  r.lev_sim = s.lev;
  r.syn_sim = s.syn;
  r.sem_sim = s.sem;
  return r;
}

struct MineResult {
  std::vector<ParaphrasePair> pairs;  // oriented, input order, all pairs
  SelectionResult selection;
};

/// End-to-end mining: readability, orientation, filtering, feature
/// extraction for the survivors, then binning and gating.
inline MineResult mine(std::vector<ParaphrasePair> pairs, const FeatureProviders& fp, const SelectionConfig& cfg) {
  if (!fp.wnll) throw ConfigError("no WNLL source configured");
  MineResult out;
  auto& sel = out.selection;
  const std::size_t n = pairs.size();
  sel.swapped.assign(n, false);
  sel.kept.assign(n, false);
  sel.bin.assign(n, std::nullopt);
  sel.report.input_count = n;
  std::vector<std::optional<RejectReason>> reasons(n);
  std::vector<std::size_t> passing;
  for (std::size_t i = 0; i < n; ++i) {
    auto& p = pairs[i];
    auto r = FeatureRecord::from_rsrs(p.id, rsrs(fp.wnll->wnll(p.source)).value, rsrs(fp.wnll->wnll(p.target)).value);
    r.source_tokens = p.source.tokens.size();
    r.target_tokens = p.target.tokens.size();
    auto oriented = orient_pair(std::move(p), std::move(r));
    sel.swapped[i] = oriented.swapped;
    if (oriented.swapped) ++sel.report.swapped;
    reasons[i] = filter_record(oriented.features, cfg.filter);
    if (!reasons[i]) {
      const auto s = similarities(oriented.pair, fp);
      oriented.features.lev_sim = s.lev;
      oriented.features.syn_sim = s.syn;
      oriented.features.sem_sim = s.sem;
      passing.push_back(i);
    }
    out.pairs.push_back(std::move(oriented.pair));
    sel.records.push_back(std::move(oriented.features));
  }
  detail::bin_and_gate(sel, passing, cfg, reasons);
  detail::finish_report(sel, reasons);
  return out;
}

}  // namespace riss
