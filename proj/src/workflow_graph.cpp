#include "nbsim/workflow_graph.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <queue>
#include <regex>

#include "nbsim/errors.hpp"
#include "nbsim/ingest.hpp"
#include "source_scan.hpp"

namespace nbsim {

std::string_view to_string(NodeLabel label) {
    switch (label) {
        case NodeLabel::Code: return "code";
        case NodeLabel::Data: return "data";
        case NodeLabel::Output: return "output";
        case NodeLabel::Wildcard: return "any";
    }
    return "any";
}

Node Node::code(std::string source) {
    auto hash = hash_code(source);
    return Node{NodeLabel::Code, std::move(source), hash};
}

Node Node::data(TableData table) {
    auto hash = hash_table(table);
    return Node{NodeLabel::Data, std::move(table), hash};
}

Node Node::output(OutputKind kind) {
    return Node{NodeLabel::Output, kind, hash_output(kind)};
}

Node Node::wildcard() {
    return Node{NodeLabel::Wildcard, std::monostate{}, ContentHash{}};
}

LabeledGraph::LabeledGraph(std::vector<Node> nodes, std::vector<Edge> edges, std::set<std::string> libraries)
    : nodes_(std::move(nodes)),
      edges_(std::move(edges)),
      out_(nodes_.size()),
      in_(nodes_.size()),
      libraries_(std::move(libraries)) {
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
    for (const auto& [from, to] : edges_) {
        if (from >= nodes_.size() || to >= nodes_.size()) {
            throw GraphConstructionError("edge (" + std::to_string(from) + ", " + std::to_string(to) +
                                         ") references a missing node");
        }
        out_[from].push_back(to);
        in_[to].push_back(from);
    }
    for (auto& list : in_) std::sort(list.begin(), list.end());
}

bool LabeledGraph::has_edge(NodeId from, NodeId to) const {
    const auto& succ = out_.at(from);
    return std::binary_search(succ.begin(), succ.end(), to);
}

std::size_t LabeledGraph::count(NodeLabel label) const {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [label](const Node& n) { return n.label == label; }));
}

WorkflowGraph::WorkflowGraph(NotebookId owner, std::vector<Node> nodes, std::vector<Edge> edges,
                             std::set<std::string> libraries)
    : LabeledGraph(std::move(nodes), std::move(edges), std::move(libraries)), owner_(std::move(owner)) {
    for (NodeId v = 0; v < size(); ++v) {
        if (node(v).label == NodeLabel::Wildcard) {
            throw GraphConstructionError("workflow graph node " + std::to_string(v) + " is a wildcard");
        }
    }
    assert_dag(*this);
}

QueryGraph::QueryGraph(std::vector<Node> nodes, std::vector<Edge> edges, std::set<std::string> libraries,
                       std::vector<std::string> node_names) try
    : LabeledGraph(std::move(nodes), std::move(edges), std::move(libraries)), names_(std::move(node_names)) {
    if (names_.empty()) {
        for (NodeId v = 0; v < size(); ++v) names_.push_back("q" + std::to_string(v));
    }
    if (names_.size() != size()) throw InvalidQuery("node name count does not match node count");

    for (NodeId v = 0; v < size(); ++v) {
        if (node(v).label != NodeLabel::Wildcard) continue;
        if (predecessors(v).empty() || successors(v).empty()) {
            throw InvalidQuery("wildcard node '" + names_[v] + "' needs at least one in-edge and one out-edge");
        }
        for (NodeId u : successors(v)) {
            if (node(u).label == NodeLabel::Wildcard) {
                throw InvalidQuery("wildcard nodes '" + names_[v] + "' and '" + names_[u] + "' are adjacent");
            }
        }
    }
    try {
        assert_dag(*this);
    } catch (const CycleDetected& e) {
        throw InvalidQuery(std::string("query graph is not acyclic: ") + e.what());
    }
} catch (const GraphConstructionError& e) {
    throw InvalidQuery(e.what());
}

TopologySignature topology_signature(const LabeledGraph& graph) {
    TopologySignature sig;
    sig.count_code = graph.count(NodeLabel::Code);
    sig.count_data = graph.count(NodeLabel::Data);
    sig.count_output = graph.count(NodeLabel::Output);

    auto required = [&](const std::vector<NodeId>& neighbours) -> std::size_t {
        std::size_t direct = 0;
        bool via_wildcard = false;
        for (NodeId u : neighbours) {
            if (graph.node(u).label == NodeLabel::Wildcard) {
                via_wildcard = true;
            } else {
                ++direct;
            }
        }
        return direct == 0 && via_wildcard ? 1 : direct;
    };
    for (NodeId v = 0; v < graph.size(); ++v) {
        if (graph.node(v).label == NodeLabel::Wildcard) continue;
        sig.max_in = std::max(sig.max_in, required(graph.predecessors(v)));
        sig.max_out = std::max(sig.max_out, required(graph.successors(v)));
    }
    return sig;
}

CycleDetected::CycleDetected(std::vector<std::size_t> witness)
    : Error([&] {
          std::string msg = "cycle detected:";
          for (auto v : witness) msg += " " + std::to_string(v);
          return msg;
      }()),
      witness_(std::move(witness)) {}

void assert_dag(std::size_t node_count, const std::vector<Edge>& edges) {
    std::vector<std::vector<std::size_t>> succ(node_count);
    for (const auto& [from, to] : edges) succ.at(from).push_back(to);

    enum class Mark { White, Grey, Black };
    std::vector<Mark> mark(node_count, Mark::White);
    std::vector<std::size_t> parent(node_count, node_count);

    for (std::size_t root = 0; root < node_count; ++root) {
        if (mark[root] != Mark::White) continue;
        // (node, next successor position)
        std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
        mark[root] = Mark::Grey;
        while (!stack.empty()) {
            auto& [v, pos] = stack.back();
            if (pos == succ[v].size()) {
                mark[v] = Mark::Black;
                stack.pop_back();
                continue;
            }
            const std::size_t u = succ[v][pos++];
            if (mark[u] == Mark::Grey) {
                std::vector<std::size_t> cycle;
                for (std::size_t w = v; w != u; w = parent[w]) cycle.push_back(w);
                cycle.push_back(u);
                std::reverse(cycle.begin(), cycle.end());
                cycle.push_back(u);
                throw CycleDetected(std::move(cycle));
            }
            if (mark[u] == Mark::White) {
                mark[u] = Mark::Grey;
                parent[u] = v;
                stack.emplace_back(u, 0);
            }
        }
    }
}

void assert_dag(const LabeledGraph& graph) { assert_dag(graph.size(), graph.edges()); }

std::vector<NodeId> topological_order(const LabeledGraph& graph) {
    std::vector<std::size_t> indegree(graph.size());
    for (const auto& [from, to] : graph.edges()) ++indegree[to];
    std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
    for (NodeId v = 0; v < graph.size(); ++v) {
        if (indegree[v] == 0) ready.push(v);
    }
    std::vector<NodeId> order;
    order.reserve(graph.size());
    while (!ready.empty()) {
        const NodeId v = ready.top();
        ready.pop();
        order.push_back(v);
        for (NodeId u : graph.successors(v)) {
            if (--indegree[u] == 0) ready.push(u);
        }
    }
    return order;
}

namespace {

struct TableKey {
    bool is_variable = false;
    std::string base;
    std::size_t ordinal = 1;
};

TableKey parse_table_key(const std::string& name) {
    static const std::regex variable(R"(^([A-Za-z_]\w*)(?:#([1-9]\d*))?$)");
    std::smatch m;
    if (std::regex_match(name, m, variable)) {
        return TableKey{true, m[1].str(), m[2].matched ? std::stoul(m[2].str()) : 1};
    }
    return TableKey{false, name, 1};
}

}  // namespace

WorkflowGraph build_workflow_graph(const Notebook& notebook) {
    if (auto violations = validate_notebook(notebook); !violations.empty()) {
        std::string msg = "invalid notebook '" + notebook.id.value + "':";
        for (const auto& v : violations) msg += " " + v + ";";
        throw GraphConstructionError(msg);
    }

    const std::size_t cells = notebook.cells.size();
    std::vector<TableKey> keys;
    std::set<std::string> known;
    std::set<std::pair<std::string, std::size_t>> versions;
    for (const auto& table : notebook.tables) {
        keys.push_back(parse_table_key(table.name));
        if (keys.back().is_variable) {
            known.insert(keys.back().base);
            versions.emplace(keys.back().base, keys.back().ordinal);
        }
    }

    std::vector<TableRefs> refs;
    refs.reserve(cells);
    for (const auto& cell : notebook.cells) {
        refs.push_back(detect_table_refs(cell.source, known));
        known.insert(refs.back().writes.begin(), refs.back().writes.end());
    }

    std::vector<Node> nodes;
    std::vector<Edge> edges;
    for (const auto& cell : notebook.cells) nodes.push_back(Node::code(cell.source));
    for (std::size_t c = 0; c + 1 < cells; ++c) edges.emplace_back(c, c + 1);

    for (std::size_t t = 0; t < notebook.tables.size(); ++t) {
        const NodeId data = nodes.size();
        const auto& key = keys[t];
        nodes.push_back(Node::data(notebook.tables[t]));

        auto cells_where = [&](auto&& pred) {
            std::vector<std::size_t> out;
            for (std::size_t c = 0; c < cells; ++c) {
                if (pred(c)) out.push_back(c);
            }
            return out;
        };

        std::optional<std::size_t> anchor;
        std::size_t last_reader = cells - 1;
        std::vector<std::size_t> readers;
        if (key.is_variable) {
            const auto writers = cells_where([&](std::size_t c) { return refs[c].writes.contains(key.base); });
            readers = cells_where([&](std::size_t c) { return refs[c].reads.contains(key.base); });
            if (key.ordinal <= writers.size()) {
                anchor = writers[key.ordinal - 1];
                if (key.ordinal < writers.size() && versions.contains({key.base, key.ordinal + 1})) {
                    last_reader = writers[key.ordinal];
                }
            } else if (key.ordinal == 1 && !readers.empty()) {
                anchor = readers.front();
            } else if (key.ordinal > 1) {
                throw GraphConstructionError("table '" + notebook.tables[t].name + "': no cell performs write #" +
                                             std::to_string(key.ordinal) + " of '" + key.base + "'");
            }
        } else {
            readers = cells_where([&](std::size_t c) { return detail::contains(notebook.cells[c].source, key.base); });
            if (!readers.empty()) anchor = readers.front();
        }
        if (!anchor) {
            throw GraphConstructionError("table '" + notebook.tables[t].name + "' is never mentioned in '" +
                                         notebook.id.value + "'");
        }

        edges.emplace_back(*anchor, data);
        for (std::size_t c : readers) {
            if (c > *anchor && c <= last_reader) edges.emplace_back(data, c);
        }
    }

    for (const auto& out : notebook.outputs) {
        edges.emplace_back(out.cell, nodes.size());
        nodes.push_back(Node::output(out.kind));
    }
    return WorkflowGraph(notebook.id, std::move(nodes), std::move(edges), notebook.libraries);
}

Notebook notebook_from_graph(const WorkflowGraph& graph) {
    Notebook nb;
    nb.id = graph.owner();
    nb.libraries = graph.libraries();
    std::map<NodeId, std::size_t> cell_of;
    for (NodeId v = 0; v < graph.size(); ++v) {
        const auto& n = graph.node(v);
        if (n.label == NodeLabel::Code) {
            cell_of[v] = nb.cells.size();
            nb.cells.push_back(Cell{nb.cells.size(), n.source()});
        } else if (n.label == NodeLabel::Data) {
            nb.tables.push_back(n.table());
        }
    }
    for (NodeId v = 0; v < graph.size(); ++v) {
        const auto& n = graph.node(v);
        if (n.label != NodeLabel::Output) continue;
        for (NodeId p : graph.predecessors(v)) {
            if (auto it = cell_of.find(p); it != cell_of.end()) {
                nb.outputs.push_back(OutputRecord{it->second, n.output_kind()});
                break;
            }
        }
    }
    return nb;
}

}  // namespace nbsim
