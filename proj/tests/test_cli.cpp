#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "nbsim/cli.hpp"
#include "nbsim/store.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "nbsim");
    std::ostringstream out, err;
    const int code = nbsim::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string fixture(const std::string& name) { return std::string(NBSIM_FIXTURES) + "/" + name; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// One corpus with queries shared by the tests below.
const fs::path& gen_corpus() {
    static const fs::path dir = [] {
        const auto d = oracle::temp_dir("cli_gen") / "corpus";
        const auto r = cli({"gen", "--count", "40", "--seed", "3", "--out", d.string(), "--queries", "4"});
        EXPECT_EQ(r.code, 0) << r.err;
        return d;
    }();
    return dir;
}

}  // namespace

TEST(CliIngest, ThreeValidNotebooks) {
    const auto out = oracle::temp_dir("cli_ingest") / "c";
    const auto r = cli({"ingest", "--out", out.string(), fixture("fig1.ipynb"), fixture("versions.ipynb"),
                        fixture("two_tables.ipynb")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(nbsim::read_manifest(out).notebooks.size(), 3U);
    EXPECT_NE(r.out.find("fig1"), std::string::npos);
    EXPECT_NE(r.out.find("nodes"), std::string::npos);
}

TEST(CliIngest, MalformedFileFailsWithoutWriting) {
    const auto out = oracle::temp_dir("cli_ingest_bad") / "c";
    const auto r = cli({"ingest", "--out", out.string(), fixture("fig1.ipynb"), fixture("malformed.ipynb"),
                        fixture("file_read.ipynb")});
    EXPECT_EQ(r.code, nbsim::cli::kIngestError);
    EXPECT_NE(r.err.find("malformed.ipynb"), std::string::npos);
    EXPECT_FALSE(fs::exists(out / "manifest.json"));
}

TEST(CliIngest, SkipBad) {
    const auto out = oracle::temp_dir("cli_ingest_skip") / "c";
    const auto r = cli({"ingest", "--skip-bad", "--out", out.string(), fixture("fig1.ipynb"),
                        fixture("malformed.ipynb"), fixture("file_read.ipynb")});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.err.find("warning"), std::string::npos);
    EXPECT_EQ(nbsim::read_manifest(out).notebooks.size(), 2U);
}

TEST(CliIngest, ExplicitManifestArgument) {
    const auto dir = oracle::temp_dir("cli_ingest_manifest");
    fs::copy_file(fixture("fig1.ipynb"), dir / "renamed.ipynb");
    std::ofstream(dir / "elsewhere.json") << R"({"df": ")" << fixture("tables/train.csv") << R"("})";
    // Without a manifest the table is unknown and the notebook has no Data node.
    auto r = cli({"ingest", "--out", (dir / "a").string(), (dir / "renamed.ipynb").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(nbsim::load_corpus(dir / "a").graph(0).count(nbsim::NodeLabel::Data), 0U);
    fs::copy_file(dir / "elsewhere.json", dir / "renamed.tables.json");
    r = cli({"ingest", "--out", (dir / "b").string(), (dir / "renamed.ipynb").string(),
             (dir / "renamed.tables.json").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(nbsim::load_corpus(dir / "b").graph(0).count(nbsim::NodeLabel::Data), 1U);
}

TEST(CliGen, DeterministicDirectories) {
    const auto base = oracle::temp_dir("cli_gen_det");
    for (const char* name : {"a", "b"}) {
        ASSERT_EQ(cli({"gen", "--count", "10", "--seed", "42", "--out", (base / name).string(), "--queries", "2"}).code, 0);
    }
    std::size_t files = 0;
    for (const auto& e : fs::recursive_directory_iterator(base / "a")) {
        if (!e.is_regular_file()) continue;
        ++files;
        EXPECT_EQ(slurp(e.path()), slurp(base / "b" / fs::relative(e.path(), base / "a")));
    }
    EXPECT_GT(files, 10U);
    ASSERT_EQ(cli({"gen", "--count", "0", "--out", (base / "empty").string()}).code, 0);
    EXPECT_TRUE(nbsim::read_manifest(base / "empty").notebooks.empty());
    const auto v = cli({"verify", (base / "a").string()});
    EXPECT_EQ(v.code, 0);
    EXPECT_NE(v.out.find("0 stale"), std::string::npos);
}

TEST(CliGen, IpynbOutputIngestsToTheSameCorpus) {
    const auto base = oracle::temp_dir("cli_gen_ipynb");
    ASSERT_EQ(cli({"gen", "--count", "12", "--seed", "5", "--out", (base / "gen").string(), "--ipynb",
                   (base / "nb").string()}).code, 0);
    std::vector<std::string> args = {"ingest", "--out", (base / "ing").string()};
    for (const auto& e : fs::directory_iterator(base / "nb")) {
        if (e.path().extension() == ".ipynb") args.push_back(e.path().string());
    }
    std::sort(args.begin() + 3, args.end());
    const auto r = cli(args);
    ASSERT_EQ(r.code, 0) << r.err;
    const auto a = nbsim::load_corpus(base / "gen"), b = nbsim::load_corpus(base / "ing");
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.graph(i), b.graph(i)) << a.entry(i).id.value;
}

TEST(CliSearch, NaiveFlagGivesIdenticalOutput) {
    for (const char* q : {"graph_000.json", "graph_001.json", "graph_002.json", "set_000.json", "set_003.json"}) {
        const auto query = (gen_corpus() / "queries" / q).string();
        for (const char* format : {"table", "jsonl"}) {
            const auto fast = cli({"search", gen_corpus().string(), query, "--format", format, "--k", "7"});
            const auto naive = cli({"search", gen_corpus().string(), query, "--format", format, "--k", "7", "--naive"});
            ASSERT_EQ(fast.code, 0) << fast.err;
            EXPECT_EQ(fast.out, naive.out);
            const auto off = cli({"search", gen_corpus().string(), query, "--format", format, "--k", "7", "--no-prune",
                                  "--no-order", "--no-cache", "--no-index", "--threads", "2"});
            EXPECT_EQ(off.out, fast.out);
        }
    }
}

TEST(CliSearch, JsonlRecords) {
    const auto r = cli({"search", gen_corpus().string(), (gen_corpus() / "queries" / "graph_000.json").string(),
                        "--format", "jsonl", "--k", "3"});
    ASSERT_EQ(r.code, 0);
    std::istringstream lines(r.out);
    std::string line;
    int rank = 0;
    while (std::getline(lines, line)) {
        const auto rec = nlohmann::json::parse(line);
        EXPECT_EQ(rec.at("rank"), ++rank);
        EXPECT_TRUE(rec.at("id").is_string());
        EXPECT_TRUE(rec.at("score").is_number());
        EXPECT_TRUE(rec.at("mapping").is_object());
        EXPECT_EQ(line.substr(0, 8), "{\"rank\":");
    }
    EXPECT_GE(rank, 1);
}

TEST(CliSearch, IdentityQueryRanksItsNotebookFirst) {
    const auto dir = oracle::temp_dir("cli_identity");
    const auto corpus = nbsim::load_corpus(gen_corpus());
    const auto& g = corpus.graph(5);
    nlohmann::json q{{"mode", "graph"},
                     {"nodes", {{{"id", "a"}, {"label", "code"}, {"attribute", g.node(0).source()}},
                                {{"id", "b"}, {"label", "code"}, {"attribute", g.node(1).source()}}}},
                     {"edges", nlohmann::json::array({nlohmann::json::array({"a", "b"})})},
                     {"libraries", g.libraries()}};
    std::ofstream(dir / "q.json") << q.dump();
    const auto r = cli({"search", gen_corpus().string(), (dir / "q.json").string(), "--k", "1", "--format", "jsonl"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rec = nlohmann::json::parse(r.out);
    EXPECT_EQ(rec["score"], 9.0);
    // Another notebook may share the fragment; the identity one must tie at the top.
    const auto all = cli({"search", gen_corpus().string(), (dir / "q.json").string(), "--k", "40", "--format", "jsonl"});
    EXPECT_NE(all.out.find("\"id\":\"" + g.owner().value + "\",\"score\":9,"), std::string::npos);
}

TEST(CliSearch, KLargerThanCorpus) {
    const auto r = cli({"search", gen_corpus().string(), (gen_corpus() / "queries" / "set_001.json").string(), "--k",
                        "1000", "--format", "jsonl"});
    ASSERT_EQ(r.code, 0);
    EXPECT_LE(std::count(r.out.begin(), r.out.end(), '\n'), 40);
}

TEST(CliSearch, ExitCodes) {
    const auto dir = oracle::temp_dir("cli_codes");
    std::ofstream(dir / "bad.json") << R"({"mode": "graph", "nodes": [{"id": "w", "label": "any"}]})";
    const auto query = (gen_corpus() / "queries" / "graph_000.json").string();
    EXPECT_EQ(cli({"search", gen_corpus().string(), (dir / "bad.json").string()}).code, nbsim::cli::kQueryError);
    EXPECT_EQ(cli({"search", gen_corpus().string(), (dir / "missing.json").string()}).code, nbsim::cli::kQueryError);
    EXPECT_EQ(cli({"search", (dir / "nocorpus").string(), query}).code, nbsim::cli::kCorpusError);
    ASSERT_EQ(cli({"gen", "--count", "0", "--out", (dir / "empty").string()}).code, 0);
    EXPECT_EQ(cli({"search", (dir / "empty").string(), query}).code, nbsim::cli::kCorpusError);
    EXPECT_EQ(cli({"search", gen_corpus().string(), query, "--k", "0"}).code, nbsim::cli::kQueryError);
    EXPECT_EQ(cli({"frobnicate"}).code, nbsim::cli::kQueryError);
    EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST(CliBench, RepetitionsAndMedian) {
    const auto r = cli({"bench", gen_corpus().string(), (gen_corpus() / "queries" / "graph_001.json").string(), "--reps",
                        "3", "--matrix", "on-off", "--threads", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream lines(r.out);
    std::string line;
    int timing = 0, medians = 0;
    while (std::getline(lines, line)) {
        if (line.find("median") != std::string::npos && line.find("speedup") == std::string::npos) ++medians;
        if (line.rfind("prune+order+cache+index", 0) == 0 && line.find("median") == std::string::npos) ++timing;
    }
    EXPECT_EQ(timing, 3);
    EXPECT_EQ(medians, 2);
    EXPECT_NE(r.out.find("speedup"), std::string::npos);
}

TEST(CliBench, FullMatrixAgrees) {
    const auto r = cli({"bench", gen_corpus().string(), (gen_corpus() / "queries" / "set_002.json").string(), "--reps",
                        "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("all 16 toggle subsets agree"), std::string::npos);
}

TEST(CliBench, InjectedFaultTripsTheGuard) {
    const auto r = cli({"bench", gen_corpus().string(), (gen_corpus() / "queries" / "graph_002.json").string(), "--reps",
                        "1", "--matrix", "on-off", "--inject-fault"});
    EXPECT_EQ(r.code, nbsim::cli::kGuardFailure);
    EXPECT_NE(r.err.find("disagree"), std::string::npos);
    EXPECT_EQ(r.out, "");
}

TEST(CliVerify, ReportsStaleSignature) {
    const auto dir = oracle::temp_dir("cli_verify") / "c";
    ASSERT_EQ(cli({"gen", "--count", "3", "--seed", "1", "--out", dir.string()}).code, 0);
    auto doc = nlohmann::json::parse(slurp(dir / "manifest.json"));
    doc["notebooks"][1]["signature"]["max_in"] = 99;
    std::ofstream(dir / "manifest.json") << doc.dump();
    const auto r = cli({"verify", dir.string()});
    EXPECT_EQ(r.code, nbsim::cli::kCorpusError);
    EXPECT_NE(r.out.find("stale: nb0001"), std::string::npos);
}
