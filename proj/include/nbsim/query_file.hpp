#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>

#include <json.hpp>

#include "nbsim/search.hpp"
#include "nbsim/workflow_graph.hpp"

namespace nbsim {

enum class QueryMode { Graph, Set };

/// A parsed query file. Optional fields fall back to the caller's defaults.
///
/// Graph mode:
///   {"mode": "graph",
///    "nodes": [{"id": "c", "label": "code", "attribute": "df.head()"},
///              {"id": "d", "label": "data", "attribute": "tables/a.csv"},
///              {"id": "t", "label": "data", "name": "t", "columns": [{"name": "x", "values": ["1"]}]},
///              {"id": "w", "label": "any"},
///              {"id": "o", "label": "output", "attribute": "png"}],
///    "edges": [["c", "d"], ...], "libraries": ["pandas"]}
///
/// Set mode:
///   {"mode": "set", "code": ["..."], "code_files": ["a.py"],
///    "tables": ["a.csv", {"name": "t", "columns": [...]}],
///    "outputs": ["png"], "libraries": ["pandas"]}
///
/// Both modes accept "weights" ({"code", "data", "output", "library"}), "k",
/// "theta" (code | data | output) and "toggles" ({"pruning", "ordering",
/// "caching", "indexing"}). Relative paths resolve against the file's
/// directory.
struct QueryFile {
    QueryMode mode = QueryMode::Graph;
    QueryGraph graph;
    SetQuery set;
    std::optional<Weights> weights;
    std::optional<std::size_t> k;
    std::optional<NodeLabel> theta;
    std::optional<SearchToggles> toggles;

    /// The file's weights, else the defaults of its mode.
    Weights effective_weights() const;
};

/// Throws InvalidQuery for every schema, reference or validation problem.
QueryFile parse_query_file(const nlohmann::json& doc, const std::filesystem::path& base_dir);
QueryFile load_query_file(const std::filesystem::path& path);

/// Self-contained documents (tables inlined) that parse back to the input.
nlohmann::json query_graph_to_json(const QueryGraph& query);
nlohmann::json set_query_to_json(const SetQuery& query);

}  // namespace nbsim
