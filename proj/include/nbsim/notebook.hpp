#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace nbsim {

/// Stable identifier of a notebook inside one corpus.
struct NotebookId {
    std::string value;

    friend auto operator<=>(const NotebookId&, const NotebookId&) = default;
};

struct Cell {
    std::size_t index = 0;
    std::string source;

    friend bool operator==(const Cell&, const Cell&) = default;
};

enum class OutputKind { DataFrame, Text, Png };

std::string_view to_string(OutputKind kind);
std::optional<OutputKind> parse_output_kind(std::string_view text);

/// A column keeps only its distinct values, rendered as trimmed strings.
struct Column {
    std::string name;
    std::set<std::string> values;

    friend bool operator==(const Column&, const Column&) = default;
};

struct TableData {
    std::string name;
    std::vector<Column> columns;

    friend bool operator==(const TableData&, const TableData&) = default;
};

/// One output record of a cell. A cell may produce several of the same kind.
struct OutputRecord {
    std::size_t cell = 0;
    OutputKind kind = OutputKind::Text;

    friend bool operator==(const OutputRecord&, const OutputRecord&) = default;
};

struct Notebook {
    NotebookId id;
    std::vector<Cell> cells;
    std::vector<TableData> tables;
    std::vector<OutputRecord> outputs;
    std::set<std::string> libraries;

    friend bool operator==(const Notebook&, const Notebook&) = default;
};

/// Importance of code, tables, outputs and libraries. Throws InvalidWeights
/// when a component is negative or not finite, or when all are zero.
class Weights {
public:
    Weights(double code, double data, double output, double library);

    double code() const noexcept { return code_; }
    double data() const noexcept { return data_; }
    double output() const noexcept { return output_; }
    double library() const noexcept { return library_; }
    double total() const noexcept { return code_ + data_ + output_ + library_; }

    /// (8, 1, 1, 1): graph-based defaults.
    static Weights graph_defaults() { return {8, 1, 1, 1}; }
    /// (32, 2, 1, 1): set-based defaults.
    static Weights set_defaults() { return {32, 2, 1, 1}; }

    friend bool operator==(const Weights&, const Weights&) = default;

private:
    double code_;
    double data_;
    double output_;
    double library_;
};

/// Returns one description per violated invariant; empty when well-formed.
std::vector<std::string> validate_notebook(const Notebook& notebook);

}  // namespace nbsim
