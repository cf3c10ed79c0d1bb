#include <gtest/gtest.h>

#include <fstream>
#include <regex>
#include <sstream>

#include <unistd.h>

#include "nbsim/errors.hpp"
#include "nbsim/generator.hpp"
#include "nbsim/store.hpp"
#include "support/oracles.hpp"

using namespace nbsim;
namespace fs = std::filesystem;

namespace {

std::vector<WorkflowGraph> generated(std::size_t n, std::uint64_t seed) {
    std::vector<WorkflowGraph> out;
    for (const auto& nb : generate_notebooks(n, seed)) out.push_back(build_workflow_graph(nb));
    return out;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

}  // namespace

TEST(Store, RoundTrip) {
    const auto dir = oracle::temp_dir("store");
    const auto graphs = generated(25, 1);
    const auto manifest = save_corpus(graphs, dir);
    EXPECT_EQ(read_manifest(dir), manifest);
    const auto corpus = load_corpus(dir);
    ASSERT_EQ(corpus.size(), graphs.size());
    EXPECT_EQ(corpus.bodies_loaded(), 0U);
    for (std::size_t i = 0; i < graphs.size(); ++i) {
        EXPECT_EQ(corpus.entry(i).id, graphs[i].owner());
        EXPECT_EQ(corpus.entry(i).signature, topology_signature(graphs[i]));
        EXPECT_EQ(corpus.graph(i), graphs[i]);
        // Hashes are recomputed on load.
        for (NodeId v = 0; v < graphs[i].size(); ++v) EXPECT_EQ(corpus.graph(i).node(v).hash, graphs[i].node(v).hash);
    }
    EXPECT_EQ(corpus.bodies_loaded(), graphs.size());
    EXPECT_TRUE(verify_index(corpus).empty());
    EXPECT_TRUE(fs::exists(dir / "graphs" / "nb0000.json"));
}

TEST(Store, EmptyCorpus) {
    const auto dir = oracle::temp_dir("store_empty");
    EXPECT_TRUE(save_corpus({}, dir).notebooks.empty());
    const auto corpus = load_corpus(dir);
    EXPECT_TRUE(corpus.empty());
    EXPECT_TRUE(verify_index(corpus).empty());
}

TEST(Store, SavingIsByteStable) {
    const auto a = oracle::temp_dir("store_a"), b = oracle::temp_dir("store_b");
    const auto graphs = generated(8, 2);
    save_corpus(graphs, a);
    save_corpus(graphs, b);
    for (const auto& entry : fs::recursive_directory_iterator(a)) {
        if (!entry.is_regular_file()) continue;
        EXPECT_EQ(slurp(entry.path()), slurp(b / fs::relative(entry.path(), a))) << entry.path();
    }
}

TEST(Store, CanonicalNodeOrder) {
    // Output, data, code: stored as code, data, output.
    const WorkflowGraph g(NotebookId{"odd"}, {Node::output(OutputKind::Png), Node::data({"t", {{"x", {"1"}}}}), Node::code("c")},
                          {{2, 0}, {2, 1}}, {"pandas"});
    const auto dir = oracle::temp_dir("store_canon");
    save_corpus({g}, dir);
    const auto corpus = load_corpus(dir);
    const auto& back = corpus.graph(0);
    EXPECT_EQ(back.node(0).label, NodeLabel::Code);
    EXPECT_EQ(back.node(1).label, NodeLabel::Data);
    EXPECT_EQ(back.node(2).label, NodeLabel::Output);
    EXPECT_EQ(back.edges(), (std::vector<Edge>{{0, 1}, {0, 2}}));
    EXPECT_EQ(topology_signature(back), topology_signature(g));
}

TEST(Store, AwkwardIdsAndTableNames) {
    Notebook nb{NotebookId{"a/b c"}, {{0, "x = read_csv('f')"}}, {TableData{"sales data.csv", {}}}, {}, {}};
    nb.cells[0].source = "pd.read_csv('sales data.csv')";
    const auto dir = oracle::temp_dir("store_names");
    save_corpus({build_workflow_graph(nb)}, dir);
    const auto corpus = load_corpus(dir);
    EXPECT_EQ(corpus.entry(0).id.value, "a/b c");
    EXPECT_EQ(notebook_from_graph(corpus.graph(0)), nb);
}

TEST(Store, Errors) {
    const auto dir = oracle::temp_dir("store_err");
    const auto graphs = generated(3, 3);
    // A directory cannot be created below a regular file.
    spit(dir / "file", "x");
    EXPECT_THROW(save_corpus(graphs, dir / "file" / "corpus"), IoError);
    EXPECT_THROW(save_corpus({graphs[0], graphs[0]}, dir / "dup"), IoError);
    EXPECT_THROW(load_corpus(dir / "missing"), IoError);

    save_corpus(graphs, dir / "c");
    auto manifest = slurp(dir / "c" / "manifest.json");
    spit(dir / "c" / "manifest.json", std::regex_replace(manifest, std::regex("\"version\": 1"), "\"version\": 2"));
    EXPECT_THROW(load_corpus(dir / "c"), VersionMismatch);
    spit(dir / "c" / "manifest.json", manifest);

    const auto graph_file = dir / "c" / "graphs" / "nb0001.json";
    const auto body = slurp(graph_file);
    spit(graph_file, body.substr(0, body.size() / 2));
    const auto corpus = load_corpus(dir / "c");
    EXPECT_NO_THROW(corpus.graph(0));
    try {
        corpus.graph(1);
        FAIL();
    } catch (const CorruptGraph& e) {
        EXPECT_EQ(e.id(), "nb0001");
    }
    EXPECT_EQ(verify_index(corpus), (std::vector<NotebookId>{NotebookId{"nb0001"}}));
}

TEST(Store, VerifyIndexDetectsEditedGraph) {
    const auto dir = oracle::temp_dir("store_edit");
    auto graphs = generated(2, 4);
    graphs.emplace_back(NotebookId{"edited"},
                        std::vector<Node>{Node::code("a"), Node::output(OutputKind::Png), Node::output(OutputKind::Text)},
                        std::vector<Edge>{{0, 1}}, std::set<std::string>{});
    save_corpus(graphs, dir);
    const auto path = dir / "graphs" / "edited.json";
    auto doc = nlohmann::json::parse(slurp(path));
    doc["edges"].push_back({0, 2});
    spit(path, doc.dump());
    EXPECT_EQ(verify_index(load_corpus(dir)), (std::vector<NotebookId>{NotebookId{"edited"}}));
}

TEST(Store, ReadOnlyDirectory) {
    if (::geteuid() == 0) GTEST_SKIP() << "permission bits do not bind root";
    const auto dir = oracle::temp_dir("store_ro");
    fs::permissions(dir, fs::perms::owner_read | fs::perms::owner_exec);
    EXPECT_THROW(save_corpus(generated(1, 5), dir / "c"), IoError);
    fs::permissions(dir, fs::perms::owner_all);
}
