#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "riss/corpus.hpp"
#include "riss/error.hpp"

namespace riss {

/// Probabilities below this are clamped before taking the log.
inline constexpr double kProbabilityFloor = 1e-12;

/// Tally of probability clamping events, reported alongside scores.
struct ClampCounter {
  std::size_t events = 0;
};

/// −ln p for the observed token (the y_t = 1 term of the binary
/// cross-entropy; the other vocabulary terms are not summed).
inline double wnll_from_prob(double p, ClampCounter* clamps = nullptr, bool clamp = true) {
  if (std::isnan(p) || p > 1.0) throw DomainError("probability must lie in (0, 1]");
  if (p < kProbabilityFloor) {
    if (clamp) {
      if (clamps) ++clamps->events;
      p = kProbabilityFloor;
    } else if (p <= 0.0) {
      throw DomainError("probability must be > 0 when clamping is disabled");
    }
  }
  return -std::log(p);
}

struct RsrsScore {
  double value = 0.0;
  std::string sentence_id;
};

/// Ranked sentence readability score: WNLLs sorted ascending, the i-th
/// smallest weighted by sqrt(i), summed and divided by the token count.
inline double rsrs(std::span<const double> wnll) {
  if (wnll.empty()) throw ValidationError("RSRS of an empty WNLL track");
  std::vector<double> sorted(wnll.begin(), wnll.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) sum += std::sqrt(static_cast<double>(i + 1)) * sorted[i];
  return sum / static_cast<double>(sorted.size());
}

inline RsrsScore rsrs(const WnllTrack& track, std::string sentence_id = {}) {
  track.validate();
  return RsrsScore{rsrs(std::span<const double>(track.values)), std::move(sentence_id)};
}

/// Produces a WNLL track for a sentence. Implementations are immutable
/// once built and safe to share between threads.
class WnllSource {
 public:
  virtual ~WnllSource() = default;
  virtual WnllTrack wnll(const Sentence& sentence) const = 0;
};

/// Tracks supplied with the corpus (inline or sidecar), keyed by sentence id.
class FileWnllSource final : public WnllSource {
 public:
  explicit FileWnllSource(const std::vector<ParaphrasePair>& pairs) {
    for (const auto& p : pairs) {
      if (p.source_wnll) tracks_.emplace(p.source.id, *p.source_wnll);
      if (p.target_wnll) tracks_.emplace(p.target.id, *p.target_wnll);
    }
  }

  WnllTrack wnll(const Sentence& sentence) const override {
    const auto it = tracks_.find(sentence.id);
    if (it == tracks_.end()) throw ValidationError("no WNLL track for sentence '" + sentence.id + "'");
    if (it->second.values.size() != sentence.tokens.size())
      throw ValidationError("WNLL track length mismatch for sentence '" + sentence.id + "'");
    return it->second;
  }

 private:
  std::map<std::string, WnllTrack> tracks_;
};

/// Additive-k smoothed n-gram model with begin-of-sentence padding:
///   P(w | h) = (c(h, w) + k) / (c(h) + k * V)
/// where V is the number of distinct training tokens.
class NgramWnllSource final : public WnllSource {
 public:
  static constexpr const char* kBos = "<s>";

  NgramWnllSource(const std::vector<std::vector<std::string>>& corpus, std::size_t order, double k)
      : order_(order), k_(k) {
    if (order < 1) throw ConfigError("n-gram order must be >= 1");
    if (!(k > 0.0) || !std::isfinite(k)) throw ConfigError("smoothing constant k must be > 0");
    bool any = false;
    for (const auto& sentence : corpus) {
      if (sentence.empty()) continue;
      any = true;
      const auto padded = pad(sentence);
      for (std::size_t i = order_ - 1; i < padded.size(); ++i) {
        const auto h = context_key(padded, i);
        ++context_counts_[h];
        ++ngram_counts_[h + kSep + padded[i]];
        ++vocabulary_[padded[i]];
      }
    }
    if (!any) throw ValidationError("cannot train an n-gram model on an empty corpus");
  }

  std::size_t order() const noexcept { return order_; }
  double k() const noexcept { return k_; }
  std::size_t vocabulary_size() const noexcept { return vocabulary_.size(); }

  /// Training counts per token, ordered by token.
  const std::map<std::string, std::size_t, std::less<>>& vocabulary_counts() const { return vocabulary_; }

  /// P(token | history), history given most-recent-last; only the final
  /// order-1 entries are used and missing ones are filled with <s>.
  double probability(const std::vector<std::string>& history, const std::string& token) const {
    std::vector<std::string> ctx(order_ - 1, kBos);
    const std::size_t take = std::min(history.size(), order_ - 1);
    std::copy(history.end() - static_cast<std::ptrdiff_t>(take), history.end(), ctx.end() - static_cast<std::ptrdiff_t>(take));
    ctx.push_back(token);
    return conditional(ctx, ctx.size() - 1);
  }

  WnllTrack wnll(const Sentence& sentence) const override {
    const auto padded = pad(sentence.tokens);
    WnllTrack track;
    track.values.reserve(sentence.tokens.size());
    for (std::size_t i = order_ - 1; i < padded.size(); ++i) track.values.push_back(-std::log(conditional(padded, i)));
    return track;
  }

 private:
  static constexpr char kSep = '\x1f';

  std::vector<std::string> pad(const std::vector<std::string>& tokens) const {
    std::vector<std::string> padded(order_ - 1, kBos);
    padded.insert(padded.end(), tokens.begin(), tokens.end());
    return padded;
  }

  std::string context_key(const std::vector<std::string>& padded, std::size_t i) const {
    std::string key;
    for (std::size_t j = i + 1 - order_; j < i; ++j) {
      key += padded[j];
      key += kSep;
    }
    return key;
  }

  double conditional(const std::vector<std::string>& padded, std::size_t i) const {
    const auto h = context_key(padded, i);
    const auto hc = context_counts_.find(h);
    const double c_h = hc == context_counts_.end() ? 0.0 : static_cast<double>(hc->second);
    const auto hw = ngram_counts_.find(h + kSep + padded[i]);
    const double c_hw = hw == ngram_counts_.end() ? 0.0 : static_cast<double>(hw->second);
    return (c_hw + k_) / (c_h + k_ * static_cast<double>(vocabulary_.size()));
  }

  std::size_t order_;
  double k_;
  std::unordered_map<std::string, std::size_t> context_counts_;
  std::unordered_map<std::string, std::size_t> ngram_counts_;
  std::map<std::string, std::size_t, std::less<>> vocabulary_;
};

/// Trains the built-in n-gram source on both sides of every pair.
inline std::unique_ptr<NgramWnllSource> ngram_wnll(const std::vector<ParaphrasePair>& pairs, std::size_t order,
                                                   double k) {
  std::vector<std::vector<std::string>> corpus;
  corpus.reserve(pairs.size() * 2);
  for (const auto& p : pairs) {
    corpus.push_back(p.source.tokens);
    corpus.push_back(p.target.tokens);
  }
  return std::make_unique<NgramWnllSource>(corpus, order, k);
}

/// RSRS(source) − RSRS(target); positive when the target reads easier.
inline double rsrs_diff(const ParaphrasePair& pair, const WnllSource& source) {
  return rsrs(source.wnll(pair.source)).value - rsrs(source.wnll(pair.target)).value;
}

}  // namespace riss
