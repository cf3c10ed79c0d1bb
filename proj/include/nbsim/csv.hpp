#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "nbsim/notebook.hpp"

namespace nbsim {

/// Parses comma-separated text (first row is the header) into per-column
/// distinct-value sets. Values are trimmed; empty cells are treated as missing.
/// Throws TableLoadError with `origin` as the path on malformed input.
TableData parse_delimited(std::string_view text, std::string name, const std::string& origin);

TableData load_delimited(const std::filesystem::path& path, std::string name);

/// Writes a table so that parse_delimited reproduces it: row i holds the i-th
/// smallest value of every column, padded with empty cells.
std::string serialize_delimited(const TableData& table);

}  // namespace nbsim
