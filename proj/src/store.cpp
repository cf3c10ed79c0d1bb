#include "nbsim/store.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "nbsim/csv.hpp"
#include "nbsim/errors.hpp"

namespace nbsim {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string file_stem_for(const std::string& name) {
    std::string out;
    for (char c : name) {
        const bool safe = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
        out.push_back(safe ? c : '_');
    }
    if (out.empty() || out == "." || out == "..") out = "_" + out;
    return out;
}

std::string unique_stem(const std::string& name, std::set<std::string>& taken) {
    const auto base = file_stem_for(name);
    auto candidate = base;
    for (int n = 2; !taken.insert(candidate).second; ++n) candidate = base + "~" + std::to_string(n);
    return candidate;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << content;
    out.close();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

int label_rank(NodeLabel label) { return static_cast<int>(label); }

// Canonical node order: (label, original position).
WorkflowGraph canonical(const WorkflowGraph& graph) {
    std::vector<NodeId> order(graph.size());
    for (NodeId v = 0; v < order.size(); ++v) order[v] = v;
    std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
        return label_rank(graph.node(a).label) < label_rank(graph.node(b).label);
    });
    if (std::is_sorted(order.begin(), order.end())) return graph;

    std::vector<NodeId> new_id(graph.size());
    std::vector<Node> nodes;
    for (NodeId i = 0; i < order.size(); ++i) {
        new_id[order[i]] = i;
        nodes.push_back(graph.node(order[i]));
    }
    std::vector<Edge> edges;
    for (const auto& [from, to] : graph.edges()) edges.emplace_back(new_id[from], new_id[to]);
    return WorkflowGraph(graph.owner(), std::move(nodes), std::move(edges), graph.libraries());
}

NodeLabel parse_label(const std::string& text) {
    if (text == "code") return NodeLabel::Code;
    if (text == "data") return NodeLabel::Data;
    if (text == "output") return NodeLabel::Output;
    throw std::runtime_error("unknown node label '" + text + "'");
}

WorkflowGraph graph_from_file(const fs::path& dir, const CorpusManifest::Item& item) {
    std::ifstream in(dir / item.graph_file, std::ios::binary);
    if (!in) throw CorruptGraph(item.id.value, "graph file '" + item.graph_file + "' not readable");
    try {
        const json doc = json::parse(in);
        std::vector<std::pair<std::size_t, Node>> indexed;
        for (const auto& n : doc.at("nodes")) {
            const auto id = n.at("id").get<std::size_t>();
            switch (parse_label(n.at("label").get<std::string>())) {
                case NodeLabel::Code: indexed.emplace_back(id, Node::code(n.at("source").get<std::string>())); break;
                case NodeLabel::Data:
                    indexed.emplace_back(id, Node::data(load_delimited(dir / n.at("table").get<std::string>(),
                                                                       n.at("name").get<std::string>())));
                    break;
                case NodeLabel::Output: {
                    const auto kind = parse_output_kind(n.at("kind").get<std::string>());
                    if (!kind) throw std::runtime_error("unknown output kind");
                    indexed.emplace_back(id, Node::output(*kind));
                    break;
                }
                case NodeLabel::Wildcard: break;
            }
        }
        std::sort(indexed.begin(), indexed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<Node> nodes;
        for (std::size_t i = 0; i < indexed.size(); ++i) {
            if (indexed[i].first != i) throw std::runtime_error("node ids are not 0.." + std::to_string(indexed.size() - 1));
            nodes.push_back(std::move(indexed[i].second));
        }
        std::vector<Edge> edges;
        for (const auto& e : doc.at("edges")) edges.emplace_back(e.at(0).get<NodeId>(), e.at(1).get<NodeId>());
        auto libraries = doc.at("libraries").get<std::set<std::string>>();
        const auto owner = doc.at("id").get<std::string>();
        if (owner != item.id.value) throw std::runtime_error("graph file belongs to '" + owner + "'");
        return WorkflowGraph(item.id, std::move(nodes), std::move(edges), std::move(libraries));
    } catch (const CorruptGraph&) {
        throw;
    } catch (const std::exception& e) {
        throw CorruptGraph(item.id.value, e.what());
    }
}

}  // namespace

json signature_to_json(const TopologySignature& sig) {
    return json{{"count_code", sig.count_code},     {"count_data", sig.count_data},
                {"count_output", sig.count_output}, {"max_in", sig.max_in},
                {"max_out", sig.max_out}};
}

TopologySignature signature_from_json(const json& j) {
    return TopologySignature{j.at("count_code").get<std::size_t>(), j.at("count_data").get<std::size_t>(),
                             j.at("count_output").get<std::size_t>(), j.at("max_in").get<std::size_t>(),
                             j.at("max_out").get<std::size_t>()};
}

json graph_to_json(const WorkflowGraph& graph, const std::vector<std::string>& table_files) {
    json nodes = json::array();
    std::size_t table_index = 0;
    for (NodeId v = 0; v < graph.size(); ++v) {
        const auto& n = graph.node(v);
        json entry{{"id", v}, {"label", std::string(to_string(n.label))}};
        switch (n.label) {
            case NodeLabel::Code: entry["source"] = n.source(); break;
            case NodeLabel::Data:
                entry["name"] = n.table().name;
                entry["table"] = table_files.at(table_index++);
                break;
            case NodeLabel::Output: entry["kind"] = std::string(to_string(n.output_kind())); break;
            case NodeLabel::Wildcard: break;
        }
        nodes.push_back(std::move(entry));
    }
    json edges = json::array();
    for (const auto& [from, to] : graph.edges()) edges.push_back({from, to});
    return json{{"id", graph.owner().value}, {"nodes", std::move(nodes)}, {"edges", std::move(edges)},
                {"libraries", graph.libraries()}};
}

CorpusManifest save_corpus(const std::vector<WorkflowGraph>& graphs, const fs::path& dir) {
    CorpusManifest manifest;
    try {
        fs::create_directories(dir / "graphs");
        fs::create_directories(dir / "tables");

        std::set<std::string> ids, graph_stems;
        for (const auto& input : graphs) {
            if (!ids.insert(input.owner().value).second) {
                throw IoError("duplicate notebook id '" + input.owner().value + "'");
            }
            const auto graph = canonical(input);
            const auto stem = unique_stem(graph.owner().value, graph_stems);

            CorpusManifest::Item item{graph.owner(), "graphs/" + stem + ".json", {}, topology_signature(graph)};
            std::set<std::string> table_stems;
            for (const auto& n : graph.nodes()) {
                if (n.label != NodeLabel::Data) continue;
                const auto rel = "tables/" + stem + "/" + unique_stem(n.table().name, table_stems) + ".csv";
                fs::create_directories(dir / "tables" / stem);
                write_file(dir / rel, serialize_delimited(n.table()));
                item.table_files.push_back(rel);
            }
            write_file(dir / item.graph_file, graph_to_json(graph, item.table_files).dump(1) + "\n");
            manifest.notebooks.push_back(std::move(item));
        }

        json items = json::array();
        for (const auto& item : manifest.notebooks) {
            items.push_back(json{{"id", item.id.value},
                                 {"graph", item.graph_file},
                                 {"tables", item.table_files},
                                 {"signature", signature_to_json(item.signature)}});
        }
        const json doc{{"version", manifest.version}, {"notebooks", std::move(items)}};
        const auto tmp = dir / "manifest.json.tmp";
        write_file(tmp, doc.dump(1) + "\n");
        fs::rename(tmp, dir / "manifest.json");
    } catch (const fs::filesystem_error& e) {
        throw IoError(e.what());
    }
    return manifest;
}

CorpusManifest read_manifest(const fs::path& dir) {
    std::ifstream in(dir / "manifest.json", std::ios::binary);
    if (!in) throw IoError("no readable manifest.json in '" + dir.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw IoError("manifest.json: " + std::string(e.what()));
    }
    CorpusManifest manifest;
    try {
        manifest.version = doc.at("version").get<int>();
    } catch (const json::exception& e) {
        throw IoError("manifest.json: " + std::string(e.what()));
    }
    if (manifest.version != kCorpusFormatVersion) throw VersionMismatch(manifest.version, kCorpusFormatVersion);
    try {
        for (const auto& item : doc.at("notebooks")) {
            manifest.notebooks.push_back(CorpusManifest::Item{
                NotebookId{item.at("id").get<std::string>()},
                item.at("graph").get<std::string>(),
                item.at("tables").get<std::vector<std::string>>(),
                signature_from_json(item.at("signature")),
            });
        }
    } catch (const json::exception& e) {
        throw IoError("manifest.json: " + std::string(e.what()));
    }
    return manifest;
}

Corpus load_corpus(const fs::path& dir) {
    const auto manifest = read_manifest(dir);
    Corpus corpus;
    for (const auto& item : manifest.notebooks) {
        corpus.add(item.id, item.signature, [dir, item] { return graph_from_file(dir, item); });
    }
    return corpus;
}

std::vector<NotebookId> verify_index(const Corpus& corpus) {
    std::vector<NotebookId> stale;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        try {
            if (topology_signature(corpus.graph(i)) != corpus.entry(i).signature) stale.push_back(corpus.entry(i).id);
        } catch (const CorruptGraph&) {
            stale.push_back(corpus.entry(i).id);
        }
    }
    return stale;
}

}  // namespace nbsim
