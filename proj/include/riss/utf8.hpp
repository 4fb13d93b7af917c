#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "riss/error.hpp"

namespace riss::utf8 {

/// Splits a UTF-8 string into one string per Unicode scalar value.
inline std::vector<std::string> split_scalars(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if (lead >= 0xF0) {
      len = 4;
    } else if (lead >= 0xE0) {
      len = 3;
    } else if (lead >= 0xC0) {
      len = 2;
    } else if (lead >= 0x80) {
      throw ParseError("invalid UTF-8 lead byte", i);
    }
    if (i + len > text.size()) throw ParseError("truncated UTF-8 sequence", i);
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80)
        throw ParseError("invalid UTF-8 continuation byte", i + k);
    }
    out.emplace_back(text.substr(i, len));
    i += len;
  }
  return out;
}

/// ASCII whitespace plus the ideographic space U+3000.
inline bool is_space(std::string_view scalar) {
  if (scalar.size() == 1) {
    const char c = scalar[0];
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  }
  return scalar == "\xE3\x80\x80";
}

inline std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\n\r\f\v";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

}  // namespace riss::utf8
