#pragma once

#include <filesystem>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nbsim/notebook.hpp"

namespace nbsim {

/// Regex set used by the pattern-based source scanners.
///
/// Import patterns are matched per line; capture group 1 must hold the module
/// list (`a.b as c, d`). Only the root name before the first period is kept.
/// Reader patterns flag an assignment's right-hand side as producing a table.
struct IngestPatterns {
    std::vector<std::regex> imports;
    std::vector<std::regex> table_readers;

    static const IngestPatterns& defaults();
};

std::set<std::string> extract_libraries(std::string_view source,
                                        const IngestPatterns& patterns = IngestPatterns::defaults());

/// Classifies one `outputs[]` record of a code cell. Throws UnknownOutputType
/// when the record carries no image, table, or text payload.
OutputKind classify_output(const nlohmann::json& record);

struct TableRefs {
    std::set<std::string> reads;
    std::set<std::string> writes;

    friend bool operator==(const TableRefs&, const TableRefs&) = default;
};

/// Finds table variables written and read by one cell.
///
/// A name is written when it is the target of an assignment whose right side
/// calls a reader or mentions a known table variable. Subscript or attribute
/// assignment to a known variable (`df["x"] = ...`) is a mutation and counts
/// as both a read and a write. A known name is read when it occurs anywhere
/// outside the target position of a plain assignment.
TableRefs detect_table_refs(std::string_view source, const std::set<std::string>& known_tables,
                            const IngestPatterns& patterns = IngestPatterns::defaults());

/// Parses a `.ipynb`-style JSON document. Markdown and raw cells are skipped;
/// output records of unknown type are skipped and reported through `warnings`.
/// Throws MalformedDocument or EmptyNotebook.
Notebook parse_notebook(std::string_view document, NotebookId id, std::vector<std::string>* warnings = nullptr,
                        const IngestPatterns& patterns = IngestPatterns::defaults());

/// Table name (variable or file name) mapped to the path of a delimited file.
struct TableManifest {
    std::vector<std::pair<std::string, std::filesystem::path>> entries;

    /// Reads `{ "<name>": "<relative path>" }`; paths resolve against the
    /// manifest's directory.
    static TableManifest load(const std::filesystem::path& file);
};

/// Returns `notebook` with one TableData per manifest entry appended.
/// Throws TableLoadError.
Notebook attach_tables(Notebook notebook, const TableManifest& manifest);

}  // namespace nbsim
