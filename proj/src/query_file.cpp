#include "nbsim/query_file.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "nbsim/csv.hpp"
#include "nbsim/errors.hpp"

namespace nbsim {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidQuery("cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path resolve(const fs::path& base, const std::string& rel) {
    fs::path p(rel);
    return p.is_absolute() ? p : base / p;
}

TableData inline_table(const json& j) {
    TableData table{j.value("name", std::string("table")), {}};
    for (const auto& c : j.at("columns")) {
        table.columns.push_back(Column{c.at("name").get<std::string>(), c.at("values").get<std::set<std::string>>()});
    }
    return table;
}

json table_json(const TableData& table) {
    json columns = json::array();
    for (const auto& c : table.columns) columns.push_back(json{{"name", c.name}, {"values", c.values}});
    return json{{"name", table.name}, {"columns", std::move(columns)}};
}

TableData table_from_path(const fs::path& base, const std::string& rel, std::optional<std::string> name) {
    const auto path = resolve(base, rel);
    try {
        return load_delimited(path, name ? *name : path.stem().string());
    } catch (const Error& e) {
        throw InvalidQuery(e.what());
    }
}

OutputKind output_kind(const json& j) {
    const auto text = j.get<std::string>();
    const auto kind = parse_output_kind(text);
    if (!kind) throw InvalidQuery("unknown output kind '" + text + "'");
    return *kind;
}

NodeLabel parse_label(const std::string& text, bool allow_any) {
    if (text == "code") return NodeLabel::Code;
    if (text == "data") return NodeLabel::Data;
    if (text == "output") return NodeLabel::Output;
    if (allow_any && text == "any") return NodeLabel::Wildcard;
    throw InvalidQuery("unknown label '" + text + "'");
}

QueryGraph parse_graph(const json& doc, const fs::path& base) {
    std::vector<Node> nodes;
    std::vector<std::string> names;
    std::map<std::string, NodeId> index;
    for (const auto& n : doc.at("nodes")) {
        const auto name = n.at("id").is_string() ? n.at("id").get<std::string>() : n.at("id").dump();
        if (!index.emplace(name, nodes.size()).second) throw InvalidQuery("duplicate node id '" + name + "'");
        names.push_back(name);
        switch (parse_label(n.at("label").get<std::string>(), true)) {
            case NodeLabel::Code:
                if (n.contains("source_file")) {
                    nodes.push_back(Node::code(read_text(resolve(base, n.at("source_file").get<std::string>()))));
                } else {
                    nodes.push_back(Node::code(n.at("attribute").get<std::string>()));
                }
                break;
            case NodeLabel::Data:
                if (n.contains("columns")) {
                    nodes.push_back(Node::data(inline_table(n)));
                } else {
                    std::optional<std::string> table_name;
                    if (n.contains("name")) table_name = n.at("name").get<std::string>();
                    nodes.push_back(Node::data(table_from_path(base, n.at("attribute").get<std::string>(), table_name)));
                }
                break;
            case NodeLabel::Output: nodes.push_back(Node::output(output_kind(n.at("attribute")))); break;
            case NodeLabel::Wildcard: nodes.push_back(Node::wildcard()); break;
        }
    }
    std::vector<Edge> edges;
    for (const auto& e : doc.value("edges", json::array())) {
        if (!e.is_array() || e.size() != 2) throw InvalidQuery("edge must be a pair: " + e.dump());
        NodeId ends[2];
        for (int i = 0; i < 2; ++i) {
            const auto name = e[i].is_string() ? e[i].get<std::string>() : e[i].dump();
            const auto it = index.find(name);
            if (it == index.end()) throw InvalidQuery("edge references unknown node '" + name + "'");
            ends[i] = it->second;
        }
        edges.emplace_back(ends[0], ends[1]);
    }
    auto libraries = doc.value("libraries", std::set<std::string>{});
    return QueryGraph(std::move(nodes), std::move(edges), std::move(libraries), std::move(names));
}

SetQuery parse_set(const json& doc, const fs::path& base) {
    SetQuery q;
    if (doc.contains("code")) {
        const auto& code = doc.at("code");
        if (code.is_string()) {
            q.code.push_back(code.get<std::string>());
        } else {
            q.code = code.get<std::vector<std::string>>();
        }
    }
    for (const auto& f : doc.value("code_files", std::vector<std::string>{})) q.code.push_back(read_text(resolve(base, f)));
    for (const auto& t : doc.value("tables", json::array())) {
        q.tables.push_back(t.is_string() ? table_from_path(base, t.get<std::string>(), std::nullopt) : inline_table(t));
    }
    for (const auto& o : doc.value("outputs", json::array())) q.outputs.push_back(output_kind(o));
    q.libraries = doc.value("libraries", std::set<std::string>{});
    return q;
}

}  // namespace

Weights QueryFile::effective_weights() const {
    if (weights) return *weights;
    return mode == QueryMode::Graph ? Weights::graph_defaults() : Weights::set_defaults();
}

QueryFile parse_query_file(const json& doc, const fs::path& base_dir) {
    try {
        if (!doc.is_object()) throw InvalidQuery("query file must be a JSON object");
        QueryFile q;
        const auto mode = doc.at("mode").get<std::string>();
        if (mode == "graph") {
            q.mode = QueryMode::Graph;
            for (const char* key : {"code", "code_files", "tables", "outputs"}) {
                if (doc.contains(key)) throw InvalidQuery(std::string("graph query has set-mode key '") + key + "'");
            }
            q.graph = parse_graph(doc, base_dir);
        } else if (mode == "set") {
            q.mode = QueryMode::Set;
            for (const char* key : {"nodes", "edges"}) {
                if (doc.contains(key)) throw InvalidQuery(std::string("set query has graph-mode key '") + key + "'");
            }
            q.set = parse_set(doc, base_dir);
        } else {
            throw InvalidQuery("mode must be 'graph' or 'set', got '" + mode + "'");
        }

        if (doc.contains("weights")) {
            const auto& w = doc.at("weights");
            try {
                q.weights = Weights(w.at("code").get<double>(), w.at("data").get<double>(), w.at("output").get<double>(),
                                    w.at("library").get<double>());
            } catch (const InvalidWeights& e) {
                throw InvalidQuery(e.what());
            }
        }
        if (doc.contains("k")) {
            const auto k = doc.at("k").get<long long>();
            if (k <= 0) throw InvalidQuery("k must be positive");
            q.k = static_cast<std::size_t>(k);
        }
        if (doc.contains("theta")) q.theta = parse_label(doc.at("theta").get<std::string>(), false);
        if (doc.contains("toggles")) {
            const auto& t = doc.at("toggles");
            SearchToggles toggles;
            toggles.pruning = t.value("pruning", true);
            toggles.ordering = t.value("ordering", true);
            toggles.caching = t.value("caching", true);
            toggles.indexing = t.value("indexing", true);
            q.toggles = toggles;
        }
        return q;
    } catch (const json::exception& e) {
        throw InvalidQuery(std::string("query file: ") + e.what());
    }
}

QueryFile load_query_file(const fs::path& path) {
    const auto text = read_text(path);
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidQuery(path.string() + ": " + e.what());
    }
    return parse_query_file(doc, path.parent_path());
}

json query_graph_to_json(const QueryGraph& query) {
    json nodes = json::array();
    for (NodeId v = 0; v < query.size(); ++v) {
        const auto& n = query.node(v);
        json entry{{"id", query.node_names()[v]}, {"label", std::string(to_string(n.label))}};
        switch (n.label) {
            case NodeLabel::Code: entry["attribute"] = n.source(); break;
            case NodeLabel::Data: entry.update(table_json(n.table())); break;
            case NodeLabel::Output: entry["attribute"] = std::string(to_string(n.output_kind())); break;
            case NodeLabel::Wildcard: break;
        }
        nodes.push_back(std::move(entry));
    }
    json edges = json::array();
    for (const auto& [from, to] : query.edges()) edges.push_back({query.node_names()[from], query.node_names()[to]});
    return json{{"mode", "graph"}, {"nodes", std::move(nodes)}, {"edges", std::move(edges)}, {"libraries", query.libraries()}};
}

json set_query_to_json(const SetQuery& query) {
    json tables = json::array();
    for (const auto& t : query.tables) tables.push_back(table_json(t));
    json outputs = json::array();
    for (auto kind : query.outputs) outputs.push_back(std::string(to_string(kind)));
    return json{{"mode", "set"},           {"code", query.code},      {"tables", std::move(tables)},
                {"outputs", std::move(outputs)}, {"libraries", query.libraries}};
}

}  // namespace nbsim
