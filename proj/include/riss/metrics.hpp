#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "riss/corpus.hpp"
#include "riss/error.hpp"

namespace riss::metrics {

inline constexpr std::size_t kSariOrder = 4;

struct EvalInstance {
  std::string original;
  std::string system;
  std::vector<std::string> references;
};

struct SariScore {
  double keep = 0.0;
  double add = 0.0;
  double del = 0.0;
  double mean = 0.0;
  TokenMode level = TokenMode::Char;
};

struct SariOptions {
  /// Score deletion by F1 instead of precision alone.
  bool deletion_f1 = false;
};

enum class Aggregation { SentenceMean, Corpus };

/// N-gram key: tokens joined by U+001F.
using NgramCounts = std::map<std::string, double>;

/// Contiguous n-grams of a single order, with multiplicity.
inline NgramCounts ngrams(const std::vector<std::string>& tokens, std::size_t n) {
  NgramCounts out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (std::size_t k = 1; k < n; ++k) {
      key += '\x1f';
      key += tokens[i + k];
    }
    out[key] += 1.0;
  }
  return out;
}

/// All n-grams of orders 1..min(n_max, |tokens|), with multiplicity.
inline NgramCounts ngram_multiset(const std::vector<std::string>& tokens, std::size_t n_max = kSariOrder) {
  NgramCounts out;
  for (std::size_t n = 1; n <= std::min(n_max, tokens.size()); ++n) {
    for (auto& [k, v] : ngrams(tokens, n)) out[k] += v;
  }
  return out;
}

/// Numerators and denominators for one operation's precision and recall.
/// Summing these across instances gives the corpus-level computation.
struct Ratio {
  double p_num = 0.0, p_den = 0.0;
  double r_num = 0.0, r_den = 0.0;

  Ratio& operator+=(const Ratio& o) {
    p_num += o.p_num;
    p_den += o.p_den;
    r_num += o.r_num;
    r_den += o.r_den;
    return *this;
  }

  /// Both candidate and reference sets empty.
  bool vacuous() const { return p_den == 0.0 && r_den == 0.0; }
  double precision() const { return p_den == 0.0 ? 0.0 : p_num / p_den; }
  double recall() const { return r_den == 0.0 ? 0.0 : r_num / r_den; }
  double f1() const {
    if (vacuous()) return 1.0;
    const double p = precision(), r = recall();
    return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  }
  double precision_only() const { return vacuous() ? 1.0 : precision(); }
};

struct SariOrderStats {
  Ratio keep, del, add;
};

struct SariStats {
  std::array<SariOrderStats, kSariOrder> orders{};
  std::size_t instances = 0;

  SariStats& operator+=(const SariStats& o) {
    for (std::size_t n = 0; n < kSariOrder; ++n) {
      orders[n].keep += o.orders[n].keep;
      orders[n].del += o.orders[n].del;
      orders[n].add += o.orders[n].add;
    }
    instances += o.instances;
    return *this;
  }
};

namespace detail {

inline double count_of(const NgramCounts& c, const std::string& k) {
  const auto it = c.find(k);
  return it == c.end() ? 0.0 : it->second;
}

}  // namespace detail

/// Keep, deletion and addition statistics of one order. Original and
/// system counts are scaled by the reference count so that an n-gram
/// found in only some references earns fractional credit.
inline SariOrderStats sari_order_stats(const NgramCounts& orig, const NgramCounts& sys,
                                       const std::vector<NgramCounts>& refs) {
  using detail::count_of;
  const double num_refs = static_cast<double>(refs.size());
  NgramCounts ref_all;
  for (const auto& r : refs)
    for (const auto& [k, v] : r) ref_all[k] += v;

  SariOrderStats s;

  // Keep: n-grams of the original retained by the system.
  std::size_t keep_all_size = 0;
  for (const auto& [k, v] : orig) {
    if (std::min(v * num_refs, count_of(ref_all, k)) > 0.0) ++keep_all_size;
  }
  s.keep.r_den = static_cast<double>(keep_all_size);
  for (const auto& [k, v] : orig) {
    const double kept = std::min(v * num_refs, count_of(sys, k) * num_refs);
    if (kept <= 0.0) continue;
    const double good = std::min(kept, count_of(ref_all, k));
    const double all = std::min(v * num_refs, count_of(ref_all, k));
    s.keep.p_num += good / kept;
    s.keep.p_den += 1.0;
    if (all > 0.0) s.keep.r_num += good / all;
  }

  // Deletion: n-grams of the original the system dropped (counts clipped at 0).
  std::size_t del_all_size = 0;
  for (const auto& [k, v] : orig) {
    if (v * num_refs - count_of(ref_all, k) > 0.0) ++del_all_size;
  }
  s.del.r_den = static_cast<double>(del_all_size);
  for (const auto& [k, v] : orig) {
    const double deleted = v * num_refs - count_of(sys, k) * num_refs;
    if (deleted <= 0.0) continue;
    const double good = std::max(0.0, deleted - count_of(ref_all, k));
    const double all = std::max(0.0, v * num_refs - count_of(ref_all, k));
    s.del.p_num += good / deleted;
    s.del.p_den += 1.0;
    if (all > 0.0) s.del.r_num += good / all;
  }

  // Addition: distinct system n-grams absent from the original.
  for (const auto& [k, v] : sys) {
    if (orig.count(k)) continue;
    s.add.p_den += 1.0;
    if (ref_all.count(k)) s.add.p_num += 1.0;
  }
  s.add.r_num = s.add.p_num;
  for (const auto& [k, v] : ref_all) {
    if (!orig.count(k)) s.add.r_den += 1.0;
  }
  return s;
}

inline SariStats sari_stats(const std::vector<std::string>& orig, const std::vector<std::string>& sys,
                            const std::vector<std::vector<std::string>>& refs) {
  if (sys.empty()) throw ValidationError("empty system output");
  if (refs.empty()) throw ValidationError("SARI needs at least one reference");
  SariStats stats;
  stats.instances = 1;
  for (std::size_t n = 1; n <= kSariOrder; ++n) {
    std::vector<NgramCounts> ref_counts;
    ref_counts.reserve(refs.size());
    for (const auto& r : refs) ref_counts.push_back(ngrams(r, n));
    stats.orders[n - 1] = sari_order_stats(ngrams(orig, n), ngrams(sys, n), ref_counts);
  }
  return stats;
}

inline SariStats sari_stats(const EvalInstance& inst, TokenMode level) {
  if (utf8::trim(inst.system).empty()) throw ValidationError("empty system output");
  std::vector<std::vector<std::string>> refs;
  for (const auto& r : inst.references) refs.push_back(tokenize(r, level));
  return sari_stats(tokenize(inst.original, level), tokenize(inst.system, level), refs);
}

/// Per-order F1 (keep, add) and precision (deletion), averaged over the
/// orders, then over the three operations, scaled to [0, 100].
inline SariScore sari_from_stats(const SariStats& stats, TokenMode level, const SariOptions& opts = {}) {
  double keep = 0.0, del = 0.0, add = 0.0;
  for (const auto& o : stats.orders) {
    keep += o.keep.f1();
    del += opts.deletion_f1 ? o.del.f1() : o.del.precision_only();
    add += o.add.f1();
  }
  const double k = static_cast<double>(kSariOrder);
  SariScore s;
  s.keep = 100.0 * keep / k;
  s.del = 100.0 * del / k;
  s.add = 100.0 * add / k;
  s.mean = (s.keep + s.add + s.del) / 3.0;
  s.level = level;
  return s;
}

inline SariScore sari_sentence(const EvalInstance& inst, TokenMode level, const SariOptions& opts = {}) {
  return sari_from_stats(sari_stats(inst, level), level, opts);
}

inline void check_uniform_references(const std::vector<EvalInstance>& instances) {
  if (instances.empty()) throw ValidationError("empty evaluation corpus");
  const std::size_t x = instances.front().references.size();
  if (x == 0) throw ValidationError("instances need at least one reference");
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (instances[i].references.size() != x)
      throw ValidationError("instance " + std::to_string(i) + " has " +
                            std::to_string(instances[i].references.size()) + " references, expected " +
                            std::to_string(x));
  }
}

/// SentenceMean: mean of per-instance SARI. Corpus: one SARI over the
/// statistics of every instance pooled together.
inline double sari_corpus(const std::vector<EvalInstance>& instances, Aggregation mode, TokenMode level,
                          const SariOptions& opts = {}) {
  check_uniform_references(instances);
  if (mode == Aggregation::SentenceMean) {
    double sum = 0.0;
    for (const auto& inst : instances) sum += sari_sentence(inst, level, opts).mean;
    return sum / static_cast<double>(instances.size());
  }
  SariStats pooled;
  for (const auto& inst : instances) pooled += sari_stats(inst, level);
  return sari_from_stats(pooled, level, opts).mean;
}

enum class BleuSmoothing { None, AddOne };

/// Corpus BLEU: clipped n-gram precisions pooled over the corpus (each
/// sentence contributes a denominator of at least 1 per order), geometric
/// mean with uniform weights, brevity penalty against the closest reference
/// length (shorter wins ties). Without smoothing a zero precision gives 0.
/// AddOne adds 1 to numerator and denominator for orders >= 2.
inline double bleu(const std::vector<EvalInstance>& instances, TokenMode level, std::size_t n_max = 4,
                   BleuSmoothing smoothing = BleuSmoothing::None) {
  if (instances.empty()) throw ValidationError("empty evaluation corpus");
  if (n_max < 1) throw DomainError("BLEU order must be >= 1");
  std::vector<double> num(n_max, 0.0), den(n_max, 0.0);
  double hyp_len = 0.0, ref_len = 0.0;
  for (const auto& inst : instances) {
    if (utf8::trim(inst.system).empty()) throw ValidationError("empty system output");
    if (inst.references.empty()) throw ValidationError("BLEU needs at least one reference");
    const auto hyp = tokenize(inst.system, level);
    std::vector<std::vector<std::string>> refs;
    for (const auto& r : inst.references) refs.push_back(tokenize(r, level));
    for (std::size_t n = 1; n <= n_max; ++n) {
      const auto h = ngrams(hyp, n);
      NgramCounts max_ref;
      for (const auto& r : refs)
        for (const auto& [k, v] : ngrams(r, n)) max_ref[k] = std::max(max_ref[k], v);
      double clipped = 0.0, total = 0.0;
      for (const auto& [k, v] : h) {
        clipped += std::min(v, detail::count_of(max_ref, k));
        total += v;
      }
      num[n - 1] += clipped;
      den[n - 1] += std::max(1.0, total);
    }
    const double c = static_cast<double>(hyp.size());
    double closest = static_cast<double>(refs.front().size());
    for (const auto& r : refs) {
      const double len = static_cast<double>(r.size());
      if (std::fabs(len - c) < std::fabs(closest - c) || (std::fabs(len - c) == std::fabs(closest - c) && len < closest))
        closest = len;
    }
    hyp_len += c;
    ref_len += closest;
  }
  double log_sum = 0.0;
  for (std::size_t n = 0; n < n_max; ++n) {
    double p_num = num[n], p_den = den[n];
    if (smoothing == BleuSmoothing::AddOne && n > 0) {
      p_num += 1.0;
      p_den += 1.0;
    }
    if (p_num == 0.0) return 0.0;
    log_sum += std::log(p_num / p_den);
  }
  const double bp = hyp_len > ref_len ? 1.0 : std::exp(1.0 - ref_len / hyp_len);
  return bp * std::exp(log_sum / static_cast<double>(n_max));
}

}  // namespace riss::metrics
