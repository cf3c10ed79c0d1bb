#include "nbsim/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "nbsim/csv.hpp"
#include "nbsim/errors.hpp"
#include "nbsim/generator.hpp"
#include "nbsim/ingest.hpp"
#include "nbsim/query_file.hpp"
#include "nbsim/search.hpp"
#include "nbsim/store.hpp"

namespace nbsim::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fixed(double value, int digits) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(digits) << value;
    return ss.str();
}

std::string full_precision(double value) {
    std::ostringstream ss;
    ss << std::setprecision(17) << value;
    return ss.str();
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

// ---- ingest ----------------------------------------------------------------

struct IngestArgs {
    std::vector<std::string> inputs;
    std::string out_dir;
    bool skip_bad = false;
};

bool is_table_manifest(const std::string& path) {
    const std::string suffix = ".tables.json";
    return path.size() > suffix.size() && path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string manifest_stem(const fs::path& path) {
    auto name = path.filename().string();
    return name.substr(0, name.size() - std::string(".tables.json").size());
}

int cmd_ingest(const IngestArgs& args, std::ostream& out, std::ostream& err) {
    std::map<std::string, fs::path> manifests;
    std::vector<fs::path> notebooks;
    for (const auto& input : args.inputs) {
        if (is_table_manifest(input)) {
            manifests[manifest_stem(input)] = input;
        } else {
            notebooks.emplace_back(input);
        }
    }

    std::vector<WorkflowGraph> graphs;
    std::vector<std::size_t> cell_counts;
    std::set<std::string> seen;
    std::size_t failures = 0;
    for (const auto& path : notebooks) {
        const auto id = path.stem().string();
        try {
            if (!seen.insert(id).second) throw MalformedDocument("duplicate notebook id '" + id + "'");
            std::vector<std::string> warnings;
            auto nb = parse_notebook(read_file(path), NotebookId{id}, &warnings);
            std::optional<fs::path> manifest;
            if (auto it = manifests.find(id); it != manifests.end()) {
                manifest = it->second;
            } else if (auto sidecar = path.parent_path() / (id + ".tables.json"); fs::exists(sidecar)) {
                manifest = sidecar;
            }
            if (manifest) nb = attach_tables(std::move(nb), TableManifest::load(*manifest));
            for (const auto& w : warnings) err << "warning: " << path.string() << ": " << w << "\n";
            cell_counts.push_back(nb.cells.size());
            graphs.push_back(build_workflow_graph(nb));
        } catch (const std::exception& e) {
            ++failures;
            err << (args.skip_bad ? "warning: skipped " : "error: ") << path.string() << ": " << e.what() << "\n";
        }
    }
    if (failures > 0 && !args.skip_bad) {
        err << "error: " << failures << " notebook(s) failed; corpus not written\n";
        return kIngestError;
    }

    try {
        save_corpus(graphs, args.out_dir);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kIngestError;
    }

    out << std::left << std::setw(24) << "notebook" << std::right << std::setw(7) << "cells" << std::setw(7) << "code"
        << std::setw(7) << "data" << std::setw(8) << "output" << std::setw(7) << "nodes" << std::setw(7) << "edges"
        << "\n";
    for (std::size_t i = 0; i < graphs.size(); ++i) {
        const auto& g = graphs[i];
        out << std::left << std::setw(24) << g.owner().value << std::right << std::setw(7) << cell_counts[i]
            << std::setw(7) << g.count(NodeLabel::Code) << std::setw(7) << g.count(NodeLabel::Data) << std::setw(8)
            << g.count(NodeLabel::Output) << std::setw(7) << g.size() << std::setw(7) << g.edges().size() << "\n";
    }
    out << graphs.size() << " notebook(s) written to " << args.out_dir << "\n";
    return kOk;
}

// ---- search ----------------------------------------------------------------

struct SearchArgs {
    std::string corpus_dir;
    std::string query_file;
    std::optional<std::size_t> k;
    bool naive = false;
    bool no_prune = false;
    bool no_order = false;
    bool no_cache = false;
    bool no_index = false;
    bool include_zero = false;
    std::size_t threads = std::max(1U, std::thread::hardware_concurrency());
    std::string format = "table";
};

SearchOptions options_for(const QueryFile& q, const SearchArgs& args) {
    SearchOptions options;
    options.k = args.k ? *args.k : q.k.value_or(10);
    options.weights = q.effective_weights();
    if (q.theta) options.theta = *q.theta;
    if (q.toggles) options.toggles = *q.toggles;
    if (args.no_prune) options.toggles.pruning = false;
    if (args.no_order) options.toggles.ordering = false;
    if (args.no_cache) options.toggles.caching = false;
    if (args.no_index) options.toggles.indexing = false;
    options.include_zero = args.include_zero;
    options.threads = std::max<std::size_t>(1, args.threads);
    return options;
}

std::vector<ScoredResult> run_query(const QueryFile& q, const Corpus& corpus, const SearchOptions& options, bool naive,
                                    SearchStats* stats) {
    if (q.mode == QueryMode::Graph) {
        return naive ? naive_search_topk(q.graph, corpus, options, stats) : search_topk(q.graph, corpus, options, stats);
    }
    return naive ? exhaustive_set_based_topk(q.set, corpus, options, stats)
                 : set_based_search_topk(q.set, corpus, options, stats);
}

std::vector<std::pair<std::string, NodeId>> mapping_pairs(const QueryFile& q, const ScoredResult& r) {
    std::vector<std::pair<std::string, NodeId>> pairs;
    if (q.mode != QueryMode::Graph || !r.mapping) return pairs;
    for (NodeId v = 0; v < r.mapping->image.size(); ++v) {
        if (r.mapping->image[v] == Mapping::kUnmapped) continue;
        pairs.emplace_back(q.graph.node_names()[v], r.mapping->image[v]);
    }
    return pairs;
}

void print_results(const QueryFile& q, const std::vector<ScoredResult>& results, const std::string& format,
                   std::ostream& out) {
    if (format == "jsonl") {
        for (std::size_t i = 0; i < results.size(); ++i) {
            const auto& r = results[i];
            json mapping = nullptr;
            if (q.mode == QueryMode::Graph && r.mapping) {
                mapping = json::object();
                for (const auto& [name, node] : mapping_pairs(q, r)) mapping[name] = node;
            }
            // Hand-assembled so the key order is fixed and the score keeps full precision.
            out << "{\"rank\":" << i + 1 << ",\"id\":" << json(r.notebook.value).dump()
                << ",\"score\":" << full_precision(r.score) << ",\"mapping\":" << mapping.dump() << "}\n";
        }
        return;
    }
    out << std::right << std::setw(4) << "rank" << "  " << std::left << std::setw(20) << "notebook" << std::right
        << std::setw(10) << "score";
    if (q.mode == QueryMode::Graph) out << "  mapping";
    out << "\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        out << std::right << std::setw(4) << i + 1 << "  " << std::left << std::setw(20) << r.notebook.value
            << std::right << std::setw(10) << fixed(r.score, 6);
        if (q.mode == QueryMode::Graph) {
            out << " ";
            for (const auto& [name, node] : mapping_pairs(q, r)) out << " " << name << "->" << node;
            if (!r.mapping) out << " -";
        }
        out << "\n";
    }
}

int cmd_search(const SearchArgs& args, std::ostream& out, std::ostream& err) {
    QueryFile q;
    try {
        q = load_query_file(args.query_file);
    } catch (const Error& e) {
        err << "error: invalid query: " << e.what() << "\n";
        return kQueryError;
    }
    try {
        const auto corpus = load_corpus(args.corpus_dir);
        const auto results = run_query(q, corpus, options_for(q, args), args.naive, nullptr);
        print_results(q, results, args.format, out);
        return kOk;
    } catch (const InvalidQuery& e) {
        err << "error: invalid query: " << e.what() << "\n";
        return kQueryError;
    } catch (const Error& e) {
        err << "error: corpus: " << e.what() << "\n";
        return kCorpusError;
    }
}

// ---- bench -----------------------------------------------------------------

struct BenchArgs {
    SearchArgs search;
    std::size_t reps = 3;
    double table_cost_us = 0;
    std::string matrix = "all";
    bool inject_fault = false;
};

struct BenchRow {
    SearchToggles toggles;
    std::vector<double> millis;
    SearchStats stats;
    std::vector<ScoredResult> results;
};

double median(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const auto n = xs.size();
    return n % 2 == 1 ? xs[n / 2] : (xs[n / 2 - 1] + xs[n / 2]) / 2;
}

std::string disagreement(const std::vector<ScoredResult>& got, const std::vector<ScoredResult>& want) {
    if (got.size() != want.size()) {
        return std::to_string(got.size()) + " results instead of " + std::to_string(want.size());
    }
    for (std::size_t i = 0; i < got.size(); ++i) {
        if (got[i].notebook != want[i].notebook) {
            return "rank " + std::to_string(i + 1) + " is " + got[i].notebook.value + " instead of " +
                   want[i].notebook.value;
        }
        if (got[i].score != want[i].score) {
            return "rank " + std::to_string(i + 1) + " scores " + full_precision(got[i].score) + " instead of " +
                   full_precision(want[i].score);
        }
        if (got[i].mapping != want[i].mapping) return "rank " + std::to_string(i + 1) + " has a different mapping";
    }
    return {};
}

int cmd_bench(const BenchArgs& args, std::ostream& out, std::ostream& err) {
    QueryFile q;
    try {
        q = load_query_file(args.search.query_file);
    } catch (const Error& e) {
        err << "error: invalid query: " << e.what() << "\n";
        return kQueryError;
    }
    std::vector<BenchRow> rows;
    std::vector<ScoredResult> reference;
    try {
        const auto corpus = load_corpus(args.search.corpus_dir);
        auto options = options_for(q, args.search);
        reference = run_query(q, corpus, options, true, nullptr);

        options.sim.column_pair_cost =
            std::chrono::nanoseconds(static_cast<long long>(args.table_cost_us * 1000.0));
        std::vector<unsigned> subsets;
        if (args.matrix == "all") {
            for (unsigned bits = 16; bits-- > 0;) subsets.push_back(bits);
        } else {
            subsets = {15U, 0U};
        }
        for (auto bits : subsets) {
            BenchRow row{SearchToggles::from_bits(bits), {}, {}, {}};
            options.toggles = row.toggles;
            for (std::size_t rep = 0; rep < args.reps; ++rep) {
                SearchStats stats;
                const auto start = std::chrono::steady_clock::now();
                row.results = run_query(q, corpus, options, false, &stats);
                const auto stop = std::chrono::steady_clock::now();
                row.millis.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
                row.stats = stats;
            }
            rows.push_back(std::move(row));
        }
    } catch (const InvalidQuery& e) {
        err << "error: invalid query: " << e.what() << "\n";
        return kQueryError;
    } catch (const Error& e) {
        err << "error: corpus: " << e.what() << "\n";
        return kCorpusError;
    }

#ifdef NBSIM_FAULT_INJECTION
    if (args.inject_fault && !rows.empty()) {
        auto& victim = rows.front().results;
        if (victim.empty()) {
            victim.push_back(ScoredResult{NotebookId{"<injected>"}, 1.0, std::nullopt});
        } else {
            victim.front().score = std::nextafter(victim.front().score, 2.0);
        }
    }
#endif

    bool agree = true;
    for (const auto& row : rows) {
        const auto why = disagreement(row.results, reference);
        if (!why.empty()) {
            agree = false;
            err << "error: toggles " << row.toggles.describe() << " disagree with the naive ranking: " << why << "\n";
        }
    }
    if (!agree) return kGuardFailure;

    out << std::left << std::setw(26) << "toggles" << std::right << std::setw(7) << "rep" << std::setw(12)
        << "time_ms" << std::setw(10) << "measures" << std::setw(10) << "mappings" << std::setw(8) << "pruned"
        << std::setw(8) << "cached" << "\n";
    for (const auto& row : rows) {
        for (std::size_t rep = 0; rep < row.millis.size(); ++rep) {
            out << std::left << std::setw(26) << row.toggles.describe() << std::right << std::setw(7) << rep + 1
                << std::setw(12) << fixed(row.millis[rep], 3) << "\n";
        }
        const auto& s = row.stats;
        out << std::left << std::setw(26) << row.toggles.describe() << std::right << std::setw(7) << "median"
            << std::setw(12) << fixed(median(row.millis), 3) << std::setw(10) << s.measure_invocations()
            << std::setw(10) << s.mappings << std::setw(8) << s.graphs_index_pruned << std::setw(8) << s.cache_hits
            << "\n";
    }
    const auto find = [&](const SearchToggles& t) -> const BenchRow* {
        for (const auto& row : rows) {
            if (row.toggles == t) return &row;
        }
        return nullptr;
    };
    const auto* on = find(SearchToggles{});
    const auto* off = find(SearchToggles::all_off());
    if (on && off && median(on->millis) > 0) {
        out << "speedup (all on vs all off, median): " << fixed(median(off->millis) / median(on->millis), 2) << "x\n";
    }
    out << "all " << rows.size() << " toggle subsets agree with the naive ranking (" << reference.size()
        << " results)\n";
    return kOk;
}

// ---- gen -------------------------------------------------------------------

struct GenArgs {
    std::size_t count = 10;
    std::uint64_t seed = 42;
    std::string out_dir;
    std::size_t queries = 0;
    std::string ipynb_dir;
};

int cmd_gen(const GenArgs& args, std::ostream& out, std::ostream& err) {
    try {
        const auto notebooks = generate_notebooks(args.count, args.seed);
        std::vector<WorkflowGraph> graphs;
        for (const auto& nb : notebooks) graphs.push_back(build_workflow_graph(nb));
        save_corpus(graphs, args.out_dir);

        if (args.queries > 0 && !graphs.empty()) {
            const auto corpus = Corpus::from_graphs(graphs);
            QueryGenOptions qopts;
            qopts.max_total_mappings = 20000;
            const auto graph_queries = generate_queries(corpus, args.queries, args.seed + 1, qopts);
            const auto set_queries = generate_set_queries(corpus, args.queries, args.seed + 2);
            const auto dir = fs::path(args.out_dir) / "queries";
            fs::create_directories(dir);
            for (std::size_t i = 0; i < args.queries; ++i) {
                char name[32];
                std::snprintf(name, sizeof name, "%03zu", i);
                write_file(dir / ("graph_" + std::string(name) + ".json"),
                           query_graph_to_json(graph_queries[i]).dump(1) + "\n");
                write_file(dir / ("set_" + std::string(name) + ".json"),
                           set_query_to_json(set_queries[i]).dump(1) + "\n");
            }
        }

        if (!args.ipynb_dir.empty()) {
            const fs::path dir(args.ipynb_dir);
            fs::create_directories(dir);
            for (const auto& nb : notebooks) {
                const auto& id = nb.id.value;
                write_file(dir / (id + ".ipynb"), notebook_to_ipynb(nb).dump(1) + "\n");
                if (nb.tables.empty()) continue;
                fs::create_directories(dir / (id + "_tables"));
                json sidecar = json::object();
                for (const auto& t : nb.tables) {
                    const auto rel = id + "_tables/" + t.name + ".csv";
                    write_file(dir / rel, serialize_delimited(t));
                    sidecar[t.name] = rel;
                }
                write_file(dir / (id + ".tables.json"), sidecar.dump(1) + "\n");
            }
        }
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kIngestError;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kIngestError;
    }
    out << args.count << " notebook(s) generated into " << args.out_dir << "\n";
    return kOk;
}

// ---- verify ----------------------------------------------------------------

int cmd_verify(const std::string& corpus_dir, std::ostream& out, std::ostream& err) {
    try {
        const auto corpus = load_corpus(corpus_dir);
        const auto stale = verify_index(corpus);
        for (const auto& id : stale) out << "stale: " << id.value << "\n";
        out << corpus.size() << " notebook(s), " << stale.size() << " stale signature(s)\n";
        return stale.empty() ? kOk : kCorpusError;
    } catch (const Error& e) {
        err << "error: corpus: " << e.what() << "\n";
        return kCorpusError;
    }
}

void add_search_flags(CLI::App* cmd, SearchArgs& args) {
    cmd->add_option("corpus", args.corpus_dir, "Corpus directory")->required();
    cmd->add_option("query", args.query_file, "Query file (JSON)")->required();
    cmd->add_option("--k", args.k, "Number of results")->check(CLI::PositiveNumber);
    cmd->add_flag("--no-prune", args.no_prune, "Disable bound pruning");
    cmd->add_flag("--no-order", args.no_order, "Disable tentative ordering");
    cmd->add_flag("--no-cache", args.no_cache, "Disable the similarity cache");
    cmd->add_flag("--no-index", args.no_index, "Disable topology index pruning");
    cmd->add_flag("--include-zero", args.include_zero, "Pad the ranking with zero-score notebooks");
    cmd->add_option("--threads", args.threads, "Worker threads for candidate generation")
        ->check(CLI::PositiveNumber);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Notebook similarity search over workflow graphs"};
    app.require_subcommand(1);

    IngestArgs ingest;
    auto* ingest_cmd = app.add_subcommand("ingest", "Build a corpus from .ipynb files and table manifests");
    ingest_cmd->add_option("inputs", ingest.inputs, "Notebooks and <stem>.tables.json manifests")->required();
    ingest_cmd->add_option("--out", ingest.out_dir, "Corpus directory to write")->required();
    ingest_cmd->add_flag("--skip-bad", ingest.skip_bad, "Skip notebooks that fail instead of aborting");

    SearchArgs search;
    auto* search_cmd = app.add_subcommand("search", "Top-k search");
    add_search_flags(search_cmd, search);
    search_cmd->add_flag("--naive", search.naive, "Use the exhaustive reference search");
    search_cmd->add_option("--format", search.format, "Output format")->check(CLI::IsMember({"table", "jsonl"}));

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "Time the query under every toggle subset");
    add_search_flags(bench_cmd, bench.search);
    bench_cmd->add_option("--reps", bench.reps, "Repetitions per subset")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--table-cost-us", bench.table_cost_us, "Artificial cost per column-pair Jaccard (us)")
        ->check(CLI::NonNegativeNumber);
    bench_cmd->add_option("--matrix", bench.matrix, "Toggle subsets: all (16) or on-off")
        ->check(CLI::IsMember({"all", "on-off"}));
#ifdef NBSIM_FAULT_INJECTION
    bench_cmd->add_flag("--inject-fault", bench.inject_fault, "Corrupt one subset's ranking (test build)");
#endif

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic corpus");
    gen_cmd->add_option("--count", gen.count, "Number of notebooks");
    gen_cmd->add_option("--seed", gen.seed, "Random seed");
    gen_cmd->add_option("--out", gen.out_dir, "Corpus directory to write")->required();
    gen_cmd->add_option("--queries", gen.queries, "Also write this many graph and set queries");
    gen_cmd->add_option("--ipynb", gen.ipynb_dir, "Also write the notebooks as .ipynb files with table manifests");

    std::string verify_dir;
    auto* verify_cmd = app.add_subcommand("verify", "Recompute topology signatures and report stale ones");
    verify_cmd->add_option("corpus", verify_dir, "Corpus directory")->required();

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kQueryError;
    }

    if (*ingest_cmd) return cmd_ingest(ingest, out, err);
    if (*search_cmd) return cmd_search(search, out, err);
    if (*bench_cmd) return cmd_bench(bench, out, err);
    if (*gen_cmd) return cmd_gen(gen, out, err);
    return cmd_verify(verify_dir, out, err);
}

}  // namespace nbsim::cli
