#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "nbsim/content_hash.hpp"
#include "nbsim/notebook.hpp"

namespace nbsim {

enum class NodeLabel { Code, Data, Output, Wildcard };

std::string_view to_string(NodeLabel label);

using NodeId = std::size_t;

/// Code nodes carry source text, Data nodes a table, Output nodes an output
/// kind. Wildcard nodes carry nothing.
using NodeAttribute = std::variant<std::monostate, std::string, TableData, OutputKind>;

struct Node {
    NodeLabel label = NodeLabel::Code;
    NodeAttribute attribute;
    ContentHash hash;

    static Node code(std::string source);
    static Node data(TableData table);
    static Node output(OutputKind kind);
    static Node wildcard();

    const std::string& source() const { return std::get<std::string>(attribute); }
    const TableData& table() const { return std::get<TableData>(attribute); }
    OutputKind output_kind() const { return std::get<OutputKind>(attribute); }

    friend bool operator==(const Node& a, const Node& b) {
        return a.label == b.label && a.attribute == b.attribute;
    }
};

using Edge = std::pair<NodeId, NodeId>;

/// Labeled directed graph with sorted adjacency lists. Shared representation
/// of workflow and query graphs; the derived types own validation.
class LabeledGraph {
public:
    LabeledGraph() = default;
    LabeledGraph(std::vector<Node> nodes, std::vector<Edge> edges, std::set<std::string> libraries);

    std::size_t size() const noexcept { return nodes_.size(); }
    const Node& node(NodeId id) const { return nodes_.at(id); }
    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    /// Sorted, duplicate-free.
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const std::vector<NodeId>& successors(NodeId id) const { return out_.at(id); }
    const std::vector<NodeId>& predecessors(NodeId id) const { return in_.at(id); }
    bool has_edge(NodeId from, NodeId to) const;
    const std::set<std::string>& libraries() const noexcept { return libraries_; }

    std::size_t count(NodeLabel label) const;

    friend bool operator==(const LabeledGraph&, const LabeledGraph&) = default;

private:
    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
    std::vector<std::vector<NodeId>> out_;
    std::vector<std::vector<NodeId>> in_;
    std::set<std::string> libraries_;
};

/// A notebook's execution flow and content relationships as a labeled DAG.
class WorkflowGraph : public LabeledGraph {
public:
    WorkflowGraph() = default;
    /// Throws GraphConstructionError on wildcard nodes or dangling edges and
    /// CycleDetected on cycles.
    WorkflowGraph(NotebookId owner, std::vector<Node> nodes, std::vector<Edge> edges,
                  std::set<std::string> libraries);

    const NotebookId& owner() const noexcept { return owner_; }

    friend bool operator==(const WorkflowGraph&, const WorkflowGraph&) = default;

private:
    NotebookId owner_;
};

/// A query DAG. Wildcard nodes stand for a directed path of length >= 1
/// between their neighbours.
class QueryGraph : public LabeledGraph {
public:
    QueryGraph() = default;
    /// Throws InvalidQuery when wildcards are adjacent, a wildcard lacks an
    /// in- or out-edge, an edge dangles, or the graph has a cycle.
    QueryGraph(std::vector<Node> nodes, std::vector<Edge> edges, std::set<std::string> libraries,
               std::vector<std::string> node_names = {});

    /// Display names of the nodes (defaults to "q<index>").
    const std::vector<std::string>& node_names() const noexcept { return names_; }

    friend bool operator==(const QueryGraph&, const QueryGraph&) = default;

private:
    std::vector<std::string> names_;
};

struct TopologySignature {
    std::size_t count_code = 0;
    std::size_t count_data = 0;
    std::size_t count_output = 0;
    std::size_t max_in = 0;
    std::size_t max_out = 0;

    friend bool operator==(const TopologySignature&, const TopologySignature&) = default;
};

/// Per-label node counts and maximum in/out degree.
///
/// Wildcards are not counted. For degrees, each non-wildcard node counts its
/// direct non-wildcard neighbours; a node whose only neighbours on one side
/// are wildcards still needs one edge on that side, so it counts as 1.
TopologySignature topology_signature(const LabeledGraph& graph);

/// Throws CycleDetected with a witness cycle if the graph is not a DAG.
void assert_dag(std::size_t node_count, const std::vector<Edge>& edges);
void assert_dag(const LabeledGraph& graph);

/// Nodes in a topological order (ties broken by ascending id).
std::vector<NodeId> topological_order(const LabeledGraph& graph);

/// Builds one Code node per cell (chained in execution order), one Data node
/// per table and one Output node per output record. Data nodes are bound to
/// the cell that writes them and linked to every later cell that reads them.
///
/// A table name of the form `name#k` binds to the k-th cell that writes
/// `name`; a plain name binds to the first. A name that is not an identifier
/// is treated as a file name and matched literally in cell sources. A table
/// without a writing cell is attached to the first cell that mentions it.
/// Throws GraphConstructionError for invalid notebooks or unmentioned tables.
WorkflowGraph build_workflow_graph(const Notebook& notebook);

/// Inverse of build_workflow_graph for the content it preserves.
Notebook notebook_from_graph(const WorkflowGraph& graph);

}  // namespace nbsim
