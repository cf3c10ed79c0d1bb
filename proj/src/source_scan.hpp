#pragma once

// Small line-oriented helpers shared by the pattern-based source scanners.

#include <string>
#include <string_view>
#include <vector>

namespace nbsim::detail {

std::vector<std::string> split_lines(std::string_view text);
std::vector<std::string> split(std::string_view text, char sep);

/// First whitespace-delimited word of `text`.
std::string first_word(std::string_view text);

/// Drops a trailing `#` comment that is not inside a string literal.
std::string strip_comment(std::string_view line);

/// True when `name` occurs in `text` not adjacent to identifier characters.
bool contains_identifier(std::string_view text, std::string_view name);

/// True when `needle` occurs in `text` at all.
inline bool contains(std::string_view text, std::string_view needle) {
    return text.find(needle) != std::string_view::npos;
}

}  // namespace nbsim::detail
