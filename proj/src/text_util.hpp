#pragma once

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "rsmix/error.hpp"

namespace rsmix::detail {

struct Line {
  std::size_t number = 0; // 1-based
  std::vector<std::string_view> tokens;
};

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }

inline std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) {
      ++i;
    }
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) {
      ++i;
    }
    if (i > start) {
      tokens.push_back(line.substr(start, i - start));
    }
  }
  return tokens;
}

// Non-empty lines with their tokens. Text after `comment` (if set) is
// dropped.
inline std::vector<Line> tokenize_lines(std::string_view text, std::optional<char> comment) {
  std::vector<Line> lines;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    ++number;
    std::string_view line = text.substr(pos, end - pos);
    if (comment) {
      if (const std::size_t c = line.find(*comment); c != std::string_view::npos) {
        line = line.substr(0, c);
      }
    }
    auto tokens = split_tokens(line);
    if (!tokens.empty()) {
      lines.push_back({number, std::move(tokens)});
    }
    if (end == text.size()) {
      break;
    }
    pos = end + 1;
  }
  return lines;
}

[[noreturn]] inline void parse_error(std::string_view what, std::size_t line, const std::string& message) {
  throw Error(ErrorCode::Parse, std::string(what) + ": line " + std::to_string(line) + ": " + message);
}

inline std::optional<double> to_double(std::string_view token) {
  if (!token.empty() && token.front() == '+') {
    token.remove_prefix(1);
  }
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    return std::nullopt;
  }
  return value;
}

inline std::optional<std::uint64_t> to_uint(std::string_view token) {
  if (!token.empty() && token.front() == '+') {
    token.remove_prefix(1);
  }
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    return std::nullopt;
  }
  return value;
}

} // namespace rsmix::detail
