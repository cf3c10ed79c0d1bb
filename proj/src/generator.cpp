#include "nbsim/generator.hpp"

#include <algorithm>
#include <limits>
#include <map>

#include "nbsim/ingest.hpp"
#include "nbsim/matching.hpp"

namespace nbsim {

using nlohmann::json;

std::uint64_t Rng::below(std::uint64_t n) {
    // Rejection keeps the draw unbiased.
    const auto limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    for (;;) {
        const auto x = engine_();
        if (x < limit) return x % n;
    }
}

namespace {

const std::vector<std::string> kImports = {
    "import pandas as pd",
    "import numpy as np",
    "import matplotlib.pyplot as plt",
    "import seaborn as sns",
    "from sklearn.model_selection import train_test_split",
    "from sklearn.linear_model import LinearRegression",
    "from sklearn.ensemble import RandomForestClassifier",
    "import scipy.stats as stats",
    "import statsmodels.api as sm",
    "import xgboost as xgb",
    "import plotly.express as px",
    "import warnings",
};

const std::vector<std::string> kSnippets = {
    "plt.figure(figsize=(10, 6))",
    "plt.show()",
    "sns.set_style('whitegrid')",
    "np.random.seed(42)",
    "warnings.filterwarnings('ignore')",
    "x = np.linspace(0, 10, 100)",
    "y = np.sin(x)",
    "plt.plot(x, y)",
    "model = LinearRegression()",
    "clf = RandomForestClassifier(n_estimators=100)",
    "print('done')",
    "result = sm.OLS(y, x).fit()",
    "print(result.summary())",
    "z = stats.zscore(y)",
    "fig = px.scatter(x=x, y=y)",
    "fig.show()",
    "params = {'max_depth': 3, 'eta': 0.1}",
    "booster = xgb.XGBRegressor(**params)",
    "scores = []",
    "for i in range(5):\n    scores.append(i * i)",
    "print(np.mean(scores))",
    "plt.title('Distribution')",
    "plt.xlabel('value')",
    "threshold = 0.5",
};

// `{t}` is the table variable, `{c}` one of its columns.
const std::vector<std::string> kTableUses = {
    "{t}.head()",
    "{t}.describe()",
    "print({t}.shape)",
    "{t}.info()",
    "{t}.isnull().sum()",
    "sns.histplot({t}['{c}'])",
    "{t}.groupby('{c}').size()",
    "{t}['{c}'].value_counts()",
    "{t}.plot(kind='bar')",
    "{t}['{c}'] = {t}['{c}'].fillna(0)",
};

const std::vector<std::string> kColumnNames = {"id",    "age",   "price", "city",  "year",   "score",
                                               "label", "count", "name",  "rating", "region", "month"};
const std::vector<std::string> kWords = {"alpha", "beta",  "gamma", "delta", "red",   "green", "blue",  "north",
                                         "south", "east",  "west",  "low",   "mid",   "high",  "small", "large",
                                         "cat",   "dog",   "bird",  "apple", "pear",  "plum",  "oak",   "pine"};

struct BaseTable {
    std::string file;
    std::vector<Column> columns;
};

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
    for (std::size_t pos = 0; (pos = text.find(from, pos)) != std::string::npos; pos += to.size()) {
        text.replace(pos, from.size(), to);
    }
    return text;
}

Column random_column(Rng& rng, const std::string& name) {
    Column col{name, {}};
    const auto n = rng.between(3, 25);
    if (rng.chance(50)) {
        const auto lo = rng.below(50);
        for (std::size_t i = 0; i < n; ++i) col.values.insert(std::to_string(lo + rng.below(60)));
    } else {
        for (std::size_t i = 0; i < n; ++i) col.values.insert(rng.pick(kWords));
    }
    return col;
}

std::vector<BaseTable> make_base_tables(Rng& rng) {
    std::vector<BaseTable> out;
    for (std::size_t i = 0; i < 16; ++i) {
        BaseTable t{"data" + std::to_string(i) + ".csv", {}};
        auto names = kColumnNames;
        const auto width = rng.between(1, 4);
        for (std::size_t c = 0; c < width; ++c) {
            const auto j = c + rng.below(names.size() - c);
            std::swap(names[c], names[j]);
            t.columns.push_back(random_column(rng, names[c]));
        }
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<Column> perturb(Rng& rng, std::vector<Column> columns) {
    if (columns.size() > 1 && rng.chance(30)) columns.erase(columns.begin() + rng.below(columns.size()));
    for (auto& col : columns) {
        if (!rng.chance(50) || col.values.size() < 2) continue;
        auto it = col.values.begin();
        std::advance(it, rng.below(col.values.size()));
        col.values.erase(it);
        col.values.insert(rng.pick(kWords));
    }
    return columns;
}

std::set<std::string> libraries_of(const std::vector<Cell>& cells) {
    std::set<std::string> libs;
    for (const auto& c : cells) libs.merge(extract_libraries(c.source));
    return libs;
}

std::string join_lines(const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& l : lines) {
        if (!out.empty()) out.push_back('\n');
        out += l;
    }
    return out;
}

Notebook fresh_notebook(Rng& rng, NotebookId id, const std::vector<BaseTable>& bases) {
    const auto n_cells = rng.between(5, 30);
    std::vector<std::vector<std::string>> lines(n_cells);

    const auto n_tables = rng.between(0, std::min<std::size_t>(5, n_cells - 1));
    lines[0].push_back("import pandas as pd");
    for (std::size_t i = 0, n = rng.between(0, 3); i < n; ++i) {
        const auto& imp = rng.pick(kImports);
        if (std::find(lines[0].begin(), lines[0].end(), imp) == lines[0].end()) lines[0].push_back(imp);
    }
    for (std::size_t c = 1; c < n_cells; ++c) {
        for (std::size_t i = 0, n = rng.between(1, 2); i < n; ++i) lines[c].push_back(rng.pick(kSnippets));
    }

    Notebook nb{std::move(id), {}, {}, {}, {}};
    for (std::size_t j = 0; j < n_tables; ++j) {
        const auto& base = bases[rng.below(bases.size())];
        const auto var = "df" + std::to_string(j);
        const auto writer = rng.between(1, n_cells - 1);
        lines[writer].insert(lines[writer].begin(), var + " = pd.read_csv('" + base.file + "')");
        for (std::size_t r = 0, n = rng.between(0, 3); r < n && writer + 1 < n_cells; ++r) {
            const auto cell = rng.between(writer + 1, n_cells - 1);
            const auto& column = base.columns[rng.below(base.columns.size())].name;
            lines[cell].push_back(replace_all(replace_all(rng.pick(kTableUses), "{t}", var), "{c}", column));
        }
        auto columns = rng.chance(50) ? base.columns : perturb(rng, base.columns);
        nb.tables.push_back(TableData{var, std::move(columns)});
    }

    for (std::size_t c = 0; c < n_cells; ++c) nb.cells.push_back(Cell{c, join_lines(lines[c])});
    for (std::size_t i = 0, n = rng.between(0, 10); i < n; ++i) {
        const auto roll = rng.below(10);
        const auto kind = roll < 4 ? OutputKind::Text : roll < 7 ? OutputKind::DataFrame : OutputKind::Png;
        nb.outputs.push_back(OutputRecord{rng.below(n_cells), kind});
    }
    std::sort(nb.outputs.begin(), nb.outputs.end(),
              [](const auto& a, const auto& b) { return a.cell < b.cell; });
    nb.libraries = libraries_of(nb.cells);
    return nb;
}

// A near copy: a few table-free cells get a different snippet.
Notebook clone_notebook(Rng& rng, const Notebook& source, NotebookId id) {
    Notebook nb = source;
    nb.id = std::move(id);
    for (std::size_t i = 0, n = rng.between(0, 2); i < n; ++i) {
        auto& cell = nb.cells[rng.between(1, nb.cells.size() - 1)];
        if (cell.source.find("df") != std::string::npos) continue;
        cell.source = rng.pick(kSnippets);
    }
    nb.libraries = libraries_of(nb.cells);
    return nb;
}

std::string notebook_id(std::size_t i) {
    auto digits = std::to_string(i);
    if (digits.size() < 4) digits.insert(0, 4 - digits.size(), '0');
    return "nb" + digits;
}

}  // namespace

std::vector<Notebook> generate_notebooks(std::size_t count, std::uint64_t seed) {
    Rng rng(seed);
    const auto bases = make_base_tables(rng);
    std::vector<Notebook> out;
    for (std::size_t i = 0; i < count; ++i) {
        if (!out.empty() && rng.chance(15)) {
            const auto& source = out[rng.below(out.size())];
            out.push_back(clone_notebook(rng, source, NotebookId{notebook_id(i)}));
        } else {
            out.push_back(fresh_notebook(rng, NotebookId{notebook_id(i)}, bases));
        }
    }
    return out;
}

json notebook_to_ipynb(const Notebook& notebook) {
    std::map<std::size_t, json> outputs;
    for (const auto& o : notebook.outputs) {
        auto& list = outputs[o.cell];
        if (list.is_null()) list = json::array();
        switch (o.kind) {
            case OutputKind::Text:
                list.push_back(json{{"output_type", "stream"}, {"name", "stdout"}, {"text", {"output\n"}}});
                break;
            case OutputKind::DataFrame:
                list.push_back(json{{"output_type", "execute_result"},
                                    {"execution_count", o.cell + 1},
                                    {"metadata", json::object()},
                                    {"data", {{"text/html", {"<table>\n", "</table>"}}, {"text/plain", {"table"}}}}});
                break;
            case OutputKind::Png:
                list.push_back(json{{"output_type", "display_data"},
                                    {"metadata", json::object()},
                                    {"data", {{"image/png", "iVBORw0KGgo="}, {"text/plain", {"<Figure>"}}}}});
                break;
        }
    }
    json cells = json::array();
    for (const auto& c : notebook.cells) {
        auto it = outputs.find(c.index);
        cells.push_back(json{{"cell_type", "code"},
                             {"execution_count", c.index + 1},
                             {"metadata", json::object()},
                             {"source", c.source},
                             {"outputs", it == outputs.end() ? json::array() : it->second}});
    }
    return json{{"nbformat", 4}, {"nbformat_minor", 5}, {"metadata", json::object()}, {"cells", std::move(cells)}};
}

std::size_t total_mappings(const QueryGraph& query, const Corpus& corpus) {
    const auto sig = topology_signature(query);
    std::size_t total = 0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (index_prune(sig, corpus.entry(i).signature)) continue;
        const auto& g = corpus.graph(i);
        total += enumerate_mappings(query, g, build_reachability(g)).size();
    }
    return total;
}

namespace {

Node perturbed_node(Rng& rng, const Node& node, const Corpus& corpus) {
    switch (node.label) {
        case NodeLabel::Code: {
            if (!rng.chance(50)) return node;
            if (rng.chance(50)) return Node::code(node.source() + "\n" + rng.pick(kSnippets));
            // Any code cell of any notebook.
            const auto& g = corpus.graph(rng.below(corpus.size()));
            return Node::code(g.node(rng.below(g.count(NodeLabel::Code))).source());
        }
        case NodeLabel::Data: {
            if (!rng.chance(50)) return node;
            return Node::data(TableData{node.table().name, perturb(rng, node.table().columns)});
        }
        case NodeLabel::Output:
            if (!rng.chance(25)) return node;
            return Node::output(static_cast<OutputKind>(rng.below(3)));
        case NodeLabel::Wildcard: break;
    }
    return node;
}

std::string node_prefix(NodeLabel label) {
    switch (label) {
        case NodeLabel::Code: return "c";
        case NodeLabel::Data: return "d";
        case NodeLabel::Output: return "o";
        case NodeLabel::Wildcard: return "w";
    }
    return "n";
}

QueryGraph draw_query(Rng& rng, const Corpus& corpus, const QueryGenOptions& options) {
    const auto& g = corpus.graph(rng.below(corpus.size()));
    const auto reach = build_reachability(g);
    const auto target = rng.between(options.min_nodes, std::min(options.max_nodes, g.size()));

    std::vector<NodeId> chosen{static_cast<NodeId>(rng.below(g.size()))};
    while (chosen.size() < target) {
        std::vector<NodeId> frontier;
        for (auto v : chosen) {
            for (auto u : g.successors(v)) frontier.push_back(u);
            for (auto u : g.predecessors(v)) frontier.push_back(u);
        }
        std::erase_if(frontier, [&](NodeId u) { return std::find(chosen.begin(), chosen.end(), u) != chosen.end(); });
        if (frontier.empty()) break;
        std::sort(frontier.begin(), frontier.end());
        frontier.erase(std::unique(frontier.begin(), frontier.end()), frontier.end());
        chosen.push_back(rng.pick(frontier));
    }

    // Wildcard endpoints: a reachable pair, adding a new far end when there is room.
    std::vector<std::pair<NodeId, NodeId>> wild;
    for (std::size_t i = 0, n = rng.between(0, options.max_wildcards); i < n; ++i) {
        const auto a = rng.pick(chosen);
        std::vector<NodeId> ends;
        for (NodeId b = 0; b < g.size(); ++b) {
            if (b == a || !reach.reaches(a, b)) continue;
            const bool inside = std::find(chosen.begin(), chosen.end(), b) != chosen.end();
            if (inside || chosen.size() < options.max_nodes) ends.push_back(b);
        }
        if (ends.empty()) continue;
        const auto b = rng.pick(ends);
        if (std::find(chosen.begin(), chosen.end(), b) == chosen.end()) chosen.push_back(b);
        if (std::find(wild.begin(), wild.end(), std::pair{a, b}) == wild.end()) wild.emplace_back(a, b);
    }

    std::sort(chosen.begin(), chosen.end());
    std::map<NodeId, NodeId> local;
    std::vector<Node> nodes;
    std::vector<std::string> names;
    std::map<NodeLabel, std::size_t> per_label;
    for (auto v : chosen) {
        local[v] = nodes.size();
        const auto label = g.node(v).label;
        names.push_back(node_prefix(label) + std::to_string(++per_label[label]));
        nodes.push_back(perturbed_node(rng, g.node(v), corpus));
    }
    std::vector<Edge> edges;
    for (const auto& [from, to] : g.edges()) {
        if (local.count(from) && local.count(to)) edges.emplace_back(local[from], local[to]);
    }
    for (const auto& [a, b] : wild) {
        const auto w = nodes.size();
        nodes.push_back(Node::wildcard());
        names.push_back("w" + std::to_string(++per_label[NodeLabel::Wildcard]));
        edges.emplace_back(local[a], w);
        edges.emplace_back(w, local[b]);
    }

    std::set<std::string> libs;
    for (const auto& lib : g.libraries()) {
        if (rng.chance(60)) libs.insert(lib);
    }
    if (rng.chance(30)) libs.insert(rng.chance(50) ? "numpy" : "torch");
    return QueryGraph(std::move(nodes), std::move(edges), std::move(libs), std::move(names));
}

}  // namespace

std::vector<QueryGraph> generate_queries(const Corpus& corpus, std::size_t count, std::uint64_t seed,
                                         const QueryGenOptions& options) {
    std::vector<QueryGraph> out;
    if (corpus.empty()) return out;
    Rng rng(seed);
    while (out.size() < count) {
        auto q = draw_query(rng, corpus, options);
        if (options.max_total_mappings != 0 && total_mappings(q, corpus) > options.max_total_mappings) continue;
        out.push_back(std::move(q));
    }
    return out;
}

std::vector<SetQuery> generate_set_queries(const Corpus& corpus, std::size_t count, std::uint64_t seed) {
    std::vector<SetQuery> out;
    if (corpus.empty()) return out;
    Rng rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        const auto nb = notebook_from_graph(corpus.graph(rng.below(corpus.size())));
        SetQuery q;
        for (const auto& c : nb.cells) {
            if (rng.chance(40)) q.code.push_back(c.source);
        }
        if (q.code.empty() || rng.chance(30)) q.code.push_back(rng.pick(kSnippets));
        for (const auto& t : nb.tables) {
            if (!rng.chance(60)) continue;
            q.tables.push_back(rng.chance(50) ? t : TableData{t.name, perturb(rng, t.columns)});
        }
        for (const auto& o : nb.outputs) {
            if (rng.chance(50)) q.outputs.push_back(o.kind);
        }
        for (const auto& lib : nb.libraries) {
            if (rng.chance(70)) q.libraries.insert(lib);
        }
        out.push_back(std::move(q));
    }
    return out;
}

}  // namespace nbsim
