#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "riss/error.hpp"

namespace riss {

/// Ordered, labeled constituency tree. Leaves have no children.
struct ParseTree {
  std::string label;
  std::vector<ParseTree> children;

  bool is_leaf() const noexcept { return children.empty(); }

  friend bool operator==(const ParseTree&, const ParseTree&) = default;
};

inline std::size_t node_count(const ParseTree& t) {
  std::size_t n = 1;
  for (const auto& c : t.children) n += node_count(c);
  return n;
}

/// Root-only tree has depth 1.
inline std::size_t depth(const ParseTree& t) {
  std::size_t d = 0;
  for (const auto& c : t.children) d = std::max(d, depth(c));
  return d + 1;
}

namespace detail {

class BracketParser {
 public:
  explicit BracketParser(std::string_view text) : text_(text) {}

  ParseTree parse() {
    skip_space();
    if (pos_ == text_.size()) throw ParseError("empty tree", pos_);
    ParseTree root = node();
    skip_space();
    if (pos_ != text_.size()) throw ParseError("trailing characters after tree", pos_);
    return root;
  }

 private:
  static bool is_delim(char c) {
    return c == '(' || c == ')' || std::isspace(static_cast<unsigned char>(c));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string token() {
    const auto start = pos_;
    while (pos_ < text_.size() && !is_delim(text_[pos_])) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  ParseTree node() {
    skip_space();
    if (pos_ == text_.size()) throw ParseError("unbalanced parentheses: unexpected end", pos_);
    if (text_[pos_] == ')') throw ParseError("unexpected ')'", pos_);
    if (text_[pos_] != '(') return ParseTree{token(), {}};

    ++pos_;
    skip_space();
    ParseTree t;
    // "( (S ...))" carries an empty root label.
    if (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')') t.label = token();
    for (;;) {
      skip_space();
      if (pos_ == text_.size()) throw ParseError("unbalanced parentheses: unexpected end", pos_);
      if (text_[pos_] == ')') {
        ++pos_;
        break;
      }
      t.children.push_back(node());
    }
    if (t.label.empty() && t.children.empty()) throw ParseError("empty node '()'", pos_);
    return t;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

inline void write_bracketed(const ParseTree& t, std::string& out, bool top) {
  if (t.is_leaf() && !top) {
    out += t.label;
    return;
  }
  out += '(';
  out += t.label;
  for (const auto& c : t.children) {
    out += ' ';
    write_bracketed(c, out, false);
  }
  out += ')';
}

}  // namespace detail

/// Parses "(LABEL child*)" trees; children are nested nodes or bare leaf
/// tokens. Errors carry the byte offset of the failure.
inline ParseTree parse_bracketed_tree(std::string_view text) {
  return detail::BracketParser(text).parse();
}

/// Inverse of parse_bracketed_tree. Nested leaves print as bare tokens,
/// a root-only tree as "(X)".
inline std::string to_bracketed(const ParseTree& t) {
  std::string out;
  detail::write_bracketed(t, out, true);
  return out;
}

}  // namespace riss
