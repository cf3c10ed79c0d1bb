#include "nbsim/notebook.hpp"

#include <cmath>
#include <unordered_set>

#include "nbsim/errors.hpp"

namespace nbsim {

std::string_view to_string(OutputKind kind) {
    switch (kind) {
        case OutputKind::DataFrame: return "dataframe";
        case OutputKind::Text: return "text";
        case OutputKind::Png: return "png";
    }
    return "text";
}

std::optional<OutputKind> parse_output_kind(std::string_view text) {
    if (text == "dataframe" || text == "DataFrame") return OutputKind::DataFrame;
    if (text == "text" || text == "Text") return OutputKind::Text;
    if (text == "png" || text == "Png") return OutputKind::Png;
    return std::nullopt;
}

Weights::Weights(double code, double data, double output, double library)
    : code_(code), data_(data), output_(output), library_(library) {
    for (double w : {code, data, output, library}) {
        if (!std::isfinite(w) || w < 0) {
            throw InvalidWeights("weights must be finite and non-negative");
        }
    }
    if (code == 0 && data == 0 && output == 0 && library == 0) {
        throw InvalidWeights("at least one weight must be positive");
    }
}

std::vector<std::string> validate_notebook(const Notebook& notebook) {
    std::vector<std::string> violations;
    if (notebook.id.value.empty()) violations.emplace_back("empty notebook id");
    if (notebook.cells.empty()) violations.emplace_back("cells empty");

    for (std::size_t i = 0; i < notebook.cells.size(); ++i) {
        if (notebook.cells[i].index != i) {
            violations.push_back("cell at position " + std::to_string(i) + " has index " +
                                 std::to_string(notebook.cells[i].index));
        }
    }
    for (const auto& out : notebook.outputs) {
        if (out.cell >= notebook.cells.size()) {
            violations.push_back("dangling output cell-index " + std::to_string(out.cell));
        }
    }
    for (const auto& table : notebook.tables) {
        std::unordered_set<std::string> names;
        for (const auto& col : table.columns) {
            if (!names.insert(col.name).second) {
                violations.push_back("duplicate column '" + col.name + "' in table '" + table.name + "'");
            }
        }
    }
    return violations;
}

}  // namespace nbsim
