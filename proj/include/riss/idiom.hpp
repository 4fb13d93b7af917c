#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "riss/corpus.hpp"
#include "riss/error.hpp"
#include "riss/readability.hpp"
#include "riss/utf8.hpp"

namespace riss::idiom {

inline constexpr std::string_view kSeparator = "[SEP]";
inline constexpr std::string_view kMask = "<extra_id_0>";
inline constexpr std::string_view kEndMask = "<extra_id_1>";
inline constexpr std::string_view kNull = "[null]";

/// Half-open token index range.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct IdiomRecord {
  std::string id;
  std::string original_sentence;
  std::string masked_sentence;
  std::string idiom;
  std::string explanation;
  std::string target_sentence;
  std::vector<std::string> target_sentence_tokens;
  Span explanation_span;
};

namespace detail {

inline std::size_t count_occurrences(std::string_view hay, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string_view::npos; pos = hay.find(needle, pos + needle.size())) ++n;
  return n;
}

struct Scalar {
  std::string text;
  std::size_t offset;
};

inline std::vector<Scalar> non_space_scalars(std::string_view s) {
  std::vector<Scalar> out;
  std::size_t offset = 0;
  for (auto& c : utf8::split_scalars(s)) {
    const auto len = c.size();
    if (!utf8::is_space(c)) out.push_back({std::move(c), offset});
    offset += len;
  }
  return out;
}

}  // namespace detail

/// Token span of `explanation` inside `target_tokens`. Among several
/// occurrences the one starting at `expected_offset` (or nearest to it) wins.
inline Span explanation_indices(const std::vector<std::string>& target_tokens, std::string_view explanation,
                                TokenMode mode, std::optional<std::size_t> expected_offset = std::nullopt) {
  const auto needle = tokenize(explanation, mode);
  std::optional<Span> best;
  std::size_t best_distance = 0;
  for (std::size_t s = 0; s + needle.size() <= target_tokens.size(); ++s) {
    if (!std::equal(needle.begin(), needle.end(), target_tokens.begin() + static_cast<std::ptrdiff_t>(s))) continue;
    const std::size_t distance = expected_offset ? (s > *expected_offset ? s - *expected_offset : *expected_offset - s) : s;
    if (!best || distance < best_distance) {
      best = Span{s, s + needle.size()};
      best_distance = distance;
    }
  }
  if (!best) throw ValidationError("explanation '" + std::string(explanation) + "' not found in target tokens");
  return *best;
}

/// Parses a CIP record: the source holds "<original> [SEP] <masked>", the
/// target holds "<extra_id_0> explanation [null]<extra_id_1>". The idiom
/// is the part of the original that the mask replaces.
inline IdiomRecord parse_cip_record(std::string_view source, std::string_view target, TokenMode mode = TokenMode::Char,
                                    std::string id = {}) {
  if (detail::count_occurrences(source, kSeparator) != 1)
    throw ParseError("CIP source must contain exactly one [SEP]", source.find(kSeparator));
  const auto sep = source.find(kSeparator);
  IdiomRecord rec;
  rec.id = std::move(id);
  rec.original_sentence = std::string(utf8::trim(source.substr(0, sep)));
  rec.masked_sentence = std::string(utf8::trim(source.substr(sep + kSeparator.size())));
  const std::string_view masked = rec.masked_sentence;

  const auto masks = detail::count_occurrences(masked, kMask);
  if (masks == 0) throw ParseError("masked sentence has no <extra_id_0> marker", sep);
  if (masks > 1 || masked.find(kEndMask) != std::string_view::npos)
    throw ValidationError("multi-idiom records are not supported (only <extra_id_0> may appear)");
  const auto mask_pos = masked.find(kMask);
  const std::string_view prefix = masked.substr(0, mask_pos);
  const std::string_view suffix = masked.substr(mask_pos + kMask.size());

  // Align the original against prefix + idiom + suffix, ignoring whitespace.
  const auto orig = detail::non_space_scalars(rec.original_sentence);
  const auto pre = detail::non_space_scalars(prefix);
  const auto suf = detail::non_space_scalars(suffix);
  auto same = [](const detail::Scalar& a, const detail::Scalar& b) { return a.text == b.text; };
  if (orig.size() < pre.size() + suf.size() + 1 ||
      !std::equal(pre.begin(), pre.end(), orig.begin(), same) ||
      !std::equal(suf.begin(), suf.end(), orig.end() - static_cast<std::ptrdiff_t>(suf.size()), same))
    throw ValidationError("original and masked sentences do not align around <extra_id_0>");
  const auto& first = orig[pre.size()];
  const auto& last = orig[orig.size() - suf.size() - 1];
  rec.idiom = rec.original_sentence.substr(first.offset, last.offset + last.text.size() - first.offset);

  const auto t_mask = target.find(kMask);
  if (t_mask == std::string_view::npos) throw ParseError("target has no <extra_id_0> marker", 0);
  std::string_view rest = target.substr(t_mask + kMask.size());
  rest = rest.substr(0, std::min(rest.find(kNull), rest.find(kEndMask)));
  if (rest.find(kMask) != std::string_view::npos)
    throw ValidationError("multi-idiom records are not supported (repeated <extra_id_0> in target)");
  rec.explanation = std::string(utf8::trim(rest));
  if (rec.explanation.empty()) throw ValidationError("empty explanation after <extra_id_0>");

  rec.target_sentence = std::string(prefix) + rec.explanation + std::string(suffix);
  rec.target_sentence_tokens = tokenize(rec.target_sentence, mode);
  const std::size_t offset = utf8::trim(prefix).empty() ? 0 : tokenize(prefix, mode).size();
  rec.explanation_span = explanation_indices(rec.target_sentence_tokens, rec.explanation, mode, offset);
  return rec;
}

struct DictionaryEntry {
  std::string record_id;
  Span span;
};

/// idiom surface form -> spans of its explanations, ordered by record id.
using IdiomDictionary = std::map<std::string, std::vector<DictionaryEntry>>;

inline IdiomDictionary build_idiom_dictionary(const std::vector<IdiomRecord>& records) {
  IdiomDictionary dict;
  for (const auto& r : records) {
    if (r.explanation_span.end > r.target_sentence_tokens.size() || r.explanation_span.begin > r.explanation_span.end)
      throw ValidationError("record '" + r.id + "' has an invalid explanation span");
    dict[r.idiom].push_back({r.id, r.explanation_span});
  }
  for (auto& [_, entries] : dict) {
    std::stable_sort(entries.begin(), entries.end(),
                     [](const DictionaryEntry& a, const DictionaryEntry& b) { return a.record_id < b.record_id; });
  }
  return dict;
}

enum class Task { Idiom, Simplify };

inline constexpr std::string_view kIdiomPrompt = "请解释以下成语的意思: ";
inline constexpr std::string_view kSimplifyPrompt = "请简化以下句子: ";

inline std::string_view prompt(Task task) { return task == Task::Idiom ? kIdiomPrompt : kSimplifyPrompt; }

inline std::string prepend_prompt(Task task, std::string_view sentence) {
  if (sentence.empty()) throw ValidationError("cannot prompt an empty sentence");
  return std::string(prompt(task)) + std::string(sentence);
}

inline std::optional<std::string> strip_prompt(Task task, std::string_view text) {
  const auto p = prompt(task);
  if (text.substr(0, p.size()) != p) return std::nullopt;
  return std::string(text.substr(p.size()));
}

/// One probability distribution over the vocabulary per target position.
struct DistributionTrack {
  std::vector<std::vector<double>> probs;

  void validate(double tolerance = 1e-6) const {
    for (std::size_t i = 0; i < probs.size(); ++i) {
      double sum = 0.0;
      for (double p : probs[i]) {
        if (!(p >= 0.0) || !std::isfinite(p))
          throw ValidationError("position " + std::to_string(i) + ": probabilities must be finite and >= 0");
        sum += p;
      }
      if (std::fabs(sum - 1.0) > tolerance)
        throw ValidationError("position " + std::to_string(i) + ": probabilities sum to " + std::to_string(sum) +
                              ", not 1");
    }
  }
};

/// Mean over the selected positions of −ln p(position, target). Without a
/// span every target position is selected; an empty span gives 0.
inline double cross_entropy(const DistributionTrack& track, const std::vector<std::size_t>& targets,
                            std::optional<Span> span = std::nullopt, ClampCounter* clamps = nullptr) {
  if (track.probs.size() < targets.size())
    throw ValidationError("distribution track shorter than the target sequence");
  const Span sel = span.value_or(Span{0, targets.size()});
  if (sel.begin > sel.end || sel.end > targets.size()) throw ValidationError("span outside the target sequence");
  if (sel.size() == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = sel.begin; i < sel.end; ++i) {
    const auto& dist = track.probs[i];
    if (targets[i] >= dist.size())
      throw ValidationError("target index " + std::to_string(targets[i]) + " outside the vocabulary at position " +
                            std::to_string(i));
    sum += wnll_from_prob(dist[targets[i]], clamps);
  }
  return sum / static_cast<double>(sel.size());
}

struct LossReport {
  double sentence_loss = 0.0;
  double idiom_loss = 0.0;
  double total = 0.0;
};

/// Sentence loss over all positions plus idiom loss over the explanation span.
inline LossReport ias_loss(const DistributionTrack& track, const std::vector<std::size_t>& targets, Span span,
                           ClampCounter* clamps = nullptr) {
  LossReport r;
  r.sentence_loss = cross_entropy(track, targets, std::nullopt, clamps);
  r.idiom_loss = cross_entropy(track, targets, span, clamps);
  r.total = r.sentence_loss + r.idiom_loss;
  return r;
}

}  // namespace riss::idiom
