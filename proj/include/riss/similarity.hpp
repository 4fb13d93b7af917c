#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riss/corpus.hpp"
#include "riss/error.hpp"
#include "riss/tree.hpp"
#include "riss/utf8.hpp"

namespace riss {

/// Fixed weights of the lexical edit distance.
struct EditCosts {
  static constexpr std::size_t insert = 1;
  static constexpr std::size_t remove = 1;
  static constexpr std::size_t replace = 2;
};

struct SimilarityTriple {
  double lev = 0.0;
  std::optional<double> syn;
  std::optional<double> sem;
};

/// Minimum of inserts + deletes + 2 * replaces over all edit scripts.
template <typename T>
std::size_t weighted_edit_distance(std::span<const T> a, std::span<const T> b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j * EditCosts::insert;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i * EditCosts::remove;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : EditCosts::replace);
      cur[j] = std::min({prev[j] + EditCosts::remove, cur[j - 1] + EditCosts::insert, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline std::size_t weighted_edit_distance(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  return weighted_edit_distance<std::string>(std::span<const std::string>(a), std::span<const std::string>(b));
}

/// (|a| + |b| − ldist) / (|a| + |b|).
template <typename T>
double lev_sim(std::span<const T> a, std::span<const T> b) {
  const std::size_t sum = a.size() + b.size();
  if (sum == 0) throw DomainError("lev_sim of two empty sequences");
  const std::size_t dist = weighted_edit_distance(a, b);
  return static_cast<double>(sum - dist) / static_cast<double>(sum);
}

inline double lev_sim(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  return lev_sim<std::string>(std::span<const std::string>(a), std::span<const std::string>(b));
}

/// Drops every node deeper than max_level; the root is level 1.
inline ParseTree truncate_tree(const ParseTree& t, std::size_t max_level = 3) {
  if (max_level == 0) throw DomainError("max_level must be >= 1");
  ParseTree out{t.label, {}};
  if (max_level > 1) {
    out.children.reserve(t.children.size());
    for (const auto& c : t.children) out.children.push_back(truncate_tree(c, max_level - 1));
  }
  return out;
}

struct TreeEditCosts {
  std::size_t insert = 1;
  std::size_t remove = 1;
  std::size_t relabel = 1;
};

/// Postorder flattening used by the Zhang–Shasha recurrence. Node indices
/// are 1-based; leftmost[i] is the leftmost leaf descendant of node i.
struct PostorderTree {
  std::vector<std::string> labels{""};
  std::vector<std::size_t> leftmost{0};
  std::vector<std::size_t> keyroots;

  explicit PostorderTree(const ParseTree& t) {
    visit(t);
    // A keyroot is the highest node among those sharing a leftmost leaf.
    std::vector<bool> seen(size() + 1, false);
    for (std::size_t i = size(); i >= 1; --i) {
      if (!seen[leftmost[i]]) {
        keyroots.push_back(i);
        seen[leftmost[i]] = true;
      }
    }
    std::reverse(keyroots.begin(), keyroots.end());
  }

  std::size_t size() const noexcept { return labels.size() - 1; }

 private:
  std::size_t visit(const ParseTree& t) {
    std::size_t first_leaf = 0;
    for (const auto& c : t.children) {
      const std::size_t idx = visit(c);
      if (first_leaf == 0) first_leaf = leftmost[idx];
    }
    labels.push_back(t.label);
    const std::size_t self = labels.size() - 1;
    leftmost.push_back(first_leaf == 0 ? self : first_leaf);
    return self;
  }
};

/// Zhang–Shasha ordered tree edit distance.
inline std::size_t tree_edit_distance(const PostorderTree& t1, const PostorderTree& t2,
                                      const TreeEditCosts& costs = {}) {
  const std::size_t n1 = t1.size(), n2 = t2.size();
  const std::size_t w = n2 + 1;
  std::vector<std::size_t> td((n1 + 1) * w, 0);
  std::vector<std::size_t> fd((n1 + 1) * w, 0);
  auto at = [w](std::vector<std::size_t>& m, std::size_t i, std::size_t j) -> std::size_t& { return m[i * w + j]; };

  for (std::size_t i : t1.keyroots) {
    for (std::size_t j : t2.keyroots) {
      const std::size_t li = t1.leftmost[i], lj = t2.leftmost[j];
      at(fd, li - 1, lj - 1) = 0;
      for (std::size_t x = li; x <= i; ++x) at(fd, x, lj - 1) = at(fd, x - 1, lj - 1) + costs.remove;
      for (std::size_t y = lj; y <= j; ++y) at(fd, li - 1, y) = at(fd, li - 1, y - 1) + costs.insert;
      for (std::size_t x = li; x <= i; ++x) {
        for (std::size_t y = lj; y <= j; ++y) {
          const std::size_t del = at(fd, x - 1, y) + costs.remove;
          const std::size_t ins = at(fd, x, y - 1) + costs.insert;
          if (t1.leftmost[x] == li && t2.leftmost[y] == lj) {
            const std::size_t ren = at(fd, x - 1, y - 1) + (t1.labels[x] == t2.labels[y] ? 0 : costs.relabel);
            at(fd, x, y) = std::min({del, ins, ren});
            at(td, x, y) = at(fd, x, y);
          } else {
            const std::size_t sub = at(fd, t1.leftmost[x] - 1, t2.leftmost[y] - 1) + at(td, x, y);
            at(fd, x, y) = std::min({del, ins, sub});
          }
        }
      }
    }
  }
  return at(td, n1, n2);
}

inline std::size_t tree_edit_distance(const ParseTree& t1, const ParseTree& t2, const TreeEditCosts& costs = {}) {
  return tree_edit_distance(PostorderTree(t1), PostorderTree(t2), costs);
}

/// 1 − TED / max(node count) over the depth-truncated trees, clamped to [0, 1].
inline double syn_sim(const ParseTree& t1, const ParseTree& t2, std::size_t max_level = 3,
                      const TreeEditCosts& costs = {}) {
  const ParseTree a = truncate_tree(t1, max_level);
  const ParseTree b = truncate_tree(t2, max_level);
  const double ted = static_cast<double>(tree_edit_distance(a, b, costs));
  const double longest = static_cast<double>(std::max(node_count(a), node_count(b)));
  return std::clamp(1.0 - ted / longest, 0.0, 1.0);
}

/// Cosine similarity.
inline double sem_sim(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw DomainError("embedding dimension mismatch");
  if (u.empty()) throw DomainError("empty embedding");
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    dot += u[j] * v[j];
    uu += u[j] * u[j];
    vv += v[j] * v[j];
  }
  if (uu == 0.0 || vv == 0.0) throw DomainError("cosine of a zero vector");
  return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

namespace detail {

inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace detail

/// L2-normalized bag of character n-grams, each hashed (FNV-1a) into one
/// of dim buckets. Whitespace is ignored.
inline std::vector<double> hashed_char_ngram_embedding(const Sentence& s, std::size_t dim, std::size_t n) {
  if (dim < 8) throw DomainError("embedding dimension must be >= 8");
  if (n < 1) throw DomainError("n-gram size must be >= 1");
  std::vector<std::string> chars;
  for (auto& c : utf8::split_scalars(s.raw)) {
    if (!utf8::is_space(c)) chars.push_back(std::move(c));
  }
  if (chars.size() < n) throw DomainError("sentence '" + s.id + "' is shorter than the n-gram size");
  std::vector<double> v(dim, 0.0);
  for (std::size_t i = 0; i + n <= chars.size(); ++i) {
    std::string gram;
    for (std::size_t k = 0; k < n; ++k) gram += chars[i + k];
    v[detail::fnv1a(gram) % dim] += 1.0;
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

}  // namespace riss
