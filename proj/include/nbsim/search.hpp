#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nbsim/content_sim.hpp"
#include "nbsim/corpus.hpp"
#include "nbsim/matching.hpp"
#include "nbsim/notebook.hpp"
#include "nbsim/workflow_graph.hpp"

namespace nbsim {

/// Per-node weights: each label's weight is split evenly across the query's
/// nodes of that label (0 when the query has none). The library weight is
/// used as is.
struct NormalizedWeights {
    double code = 0;
    double data = 0;
    double output = 0;
    double library = 0;

    double for_label(NodeLabel label) const;
};

NormalizedWeights normalize_weights(const QueryGraph& query, const Weights& weights);

/// Similarity of a query node to a workflow node of the same label, through
/// an optional cache. Counts underlying measure invocations.
class NodeSimilarity {
public:
    NodeSimilarity(const SimConfig& config, SimCache* cache, MeasureCounters& counters)
        : config_(config), cache_(cache), counters_(counters) {}

    double node(const Node& query, const Node& workflow) const;
    double library(const std::set<std::string>& query, const std::set<std::string>& workflow) const;

private:
    const SimConfig& config_;
    SimCache* cache_;
    MeasureCounters& counters_;
};

/// Score of one mapping while its node similarities are filled in.
///
/// Every total is summed in the same fixed order (library first, then query
/// nodes by id) with unscored terms contributing their full weight, so the
/// bound only ever decreases and equals the final score bit for bit once all
/// terms are known.
class PartialScore {
public:
    PartialScore(const QueryGraph& query, const NormalizedWeights& weights);

    void set_library(double similarity);
    void set_node(NodeId v, double similarity);
    bool node_scored(NodeId v) const { return scored_[v]; }
    bool complete() const;

    /// Similarity mass of the scored terms.
    double computed() const;
    /// Total weight of the unscored terms.
    double remaining_weight() const;
    /// computed() + remaining_weight(): every unscored term optimistically 1.
    double max_sim() const;

private:
    const QueryGraph* query_;
    NormalizedWeights weights_;
    std::optional<double> library_;
    std::vector<double> node_sim_;
    std::vector<bool> scored_;
};

double max_sim(const PartialScore& partial);

/// Weighted similarity of one mapping.
double graph_mapping_score(const QueryGraph& query, const WorkflowGraph& workflow, const Mapping& mapping,
                           const NormalizedWeights& weights, const NodeSimilarity& similarity);

/// Best mapping score and the first mapping reaching it; 0 and no mapping
/// when `mappings` is empty.
struct NotebookScore {
    double score = 0;
    std::optional<std::size_t> best_mapping;
};

NotebookScore notebook_score(const QueryGraph& query, const WorkflowGraph& workflow,
                             const std::vector<Mapping>& mappings, const NormalizedWeights& weights,
                             const NodeSimilarity& similarity);

struct SearchToggles {
    bool pruning = true;
    bool ordering = true;
    bool caching = true;
    bool indexing = true;

    static SearchToggles all_off() { return {false, false, false, false}; }
    /// Bit 0 pruning, bit 1 ordering, bit 2 caching, bit 3 indexing.
    static SearchToggles from_bits(unsigned bits);
    std::string describe() const;

    friend bool operator==(const SearchToggles&, const SearchToggles&) = default;
};

/// Records how every (graph, mapping) pair was settled during the exact
/// scoring phase. For testing bound soundness and prune safety.
struct SearchTrace {
    enum class Outcome { Completed, PrunedByK, PrunedByBest };

    struct Pair {
        std::size_t notebook = 0;
        Mapping mapping;
        /// max_sim before the first exact-phase term and after each term.
        std::vector<double> max_sims;
        Outcome outcome = Outcome::Completed;
        /// Final score when completed, otherwise the threshold that pruned it.
        double value = 0;
    };

    std::vector<Pair> pairs;
};

struct SearchOptions {
    std::size_t k = 10;
    Weights weights = Weights::graph_defaults();
    /// Label of the costliest measure, deferred to the pruned phase.
    NodeLabel theta = NodeLabel::Data;
    SearchToggles toggles;
    /// Pad the ranking with zero-score notebooks up to k.
    bool include_zero = false;
    std::size_t threads = 1;
    SimConfig sim;
    /// Shared cache; a private one is used when null and caching is on.
    SimCache* cache = nullptr;
    SearchTrace* trace = nullptr;
};

struct ScoredResult {
    NotebookId notebook;
    double score = 0;
    std::optional<Mapping> mapping;

    friend bool operator==(const ScoredResult&, const ScoredResult&) = default;
};

struct SearchStats {
    std::size_t graphs = 0;
    std::size_t graphs_index_pruned = 0;
    std::size_t mappings = 0;
    std::size_t pairs_completed = 0;
    std::size_t pairs_pruned_by_k = 0;
    std::size_t pairs_pruned_by_best = 0;
    std::size_t code_sims = 0;
    std::size_t table_sims = 0;
    std::size_t output_sims = 0;
    std::size_t library_sims = 0;
    std::size_t column_pairs = 0;
    std::size_t cache_hits = 0;

    std::size_t measure_invocations() const { return code_sims + table_sims + output_sims + library_sims; }
};

/// Graph-based top-k search with pruning, ordering, caching and topology
/// indexing, each switchable. Every switch combination returns the same
/// ranking and the same exact scores. Ties rank by ascending notebook id.
/// Throws InvalidQuery (k == 0 or theta is a wildcard) and EmptyCorpus.
std::vector<ScoredResult> search_topk(const QueryGraph& query, const Corpus& corpus, const SearchOptions& options,
                                      SearchStats* stats = nullptr);

/// Exhaustive reference: every mapping of every graph, every similarity.
std::vector<ScoredResult> naive_search_topk(const QueryGraph& query, const Corpus& corpus,
                                            const SearchOptions& options, SearchStats* stats = nullptr);

/// Set-based query: whole-notebook contents regardless of cells.
struct SetQuery {
    std::vector<std::string> code;
    std::vector<TableData> tables;
    std::vector<OutputKind> outputs;
    std::set<std::string> libraries;
};

/// Code similarity compares the cells' sources joined by newlines.
double set_based_score(const SetQuery& query, const Notebook& notebook, const Weights& weights,
                       const SimConfig& config = {}, MeasureCounters* counters = nullptr);

/// Set-based top-k with tentative ordering and bound pruning on the theta
/// facet (pruning and ordering toggles apply; caching and indexing do not).
std::vector<ScoredResult> set_based_search_topk(const SetQuery& query, const Corpus& corpus,
                                                const SearchOptions& options, SearchStats* stats = nullptr);

/// Scores every notebook with set_based_score and ranks them.
std::vector<ScoredResult> exhaustive_set_based_topk(const SetQuery& query, const Corpus& corpus,
                                                    const SearchOptions& options, SearchStats* stats = nullptr);

}  // namespace nbsim
