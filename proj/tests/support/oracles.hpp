#pragma once

// Independent reference implementations used as test oracles. They follow
// the definitions directly and share no code with the library beyond types.

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "nbsim/corpus.hpp"
#include "nbsim/generator.hpp"
#include "nbsim/matching.hpp"
#include "nbsim/search.hpp"
#include "nbsim/workflow_graph.hpp"

namespace oracle {

using namespace nbsim;

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);
std::set<std::string> tokens(const std::string& source);
double code(const std::string& a, const std::string& b);

/// Greedy column matching by repeated arg-max over the free pairs.
double table(const TableData& a, const TableData& b);
/// Best injective assignment by trying every permutation (small tables only).
double table_optimal(const TableData& a, const TableData& b);
double table_sets(const std::vector<TableData>& q, const std::vector<TableData>& n);
double output_multiset(const std::vector<OutputKind>& a, const std::vector<OutputKind>& b);

/// Path of length >= 1 by plain DFS.
bool path_exists(const LabeledGraph& g, NodeId from, NodeId to);

/// Every injective label-preserving assignment, conditions checked directly.
std::vector<Mapping> mappings(const QueryGraph& q, const WorkflowGraph& w);

/// Score by the definition: library term first, then nodes by id.
double mapping_score(const QueryGraph& q, const WorkflowGraph& w, const Mapping& m, const Weights& weights);

struct Ranked {
    std::string id;
    double score;
};

/// Top-k by brute force over oracle mappings and scores (positive scores only).
std::vector<Ranked> graph_topk(const QueryGraph& q, const std::vector<WorkflowGraph>& corpus, const Weights& weights,
                               std::size_t k);

double set_score(const SetQuery& q, const Notebook& n, const Weights& weights);

// ---- random instances --------------------------------------------------

/// Random DAG of `n` nodes with random labels and small random attributes.
WorkflowGraph random_workflow(Rng& rng, std::size_t n, const std::string& id = "w");

/// Random valid query with up to `max_nodes` non-wildcard nodes and up to
/// `max_wildcards` wildcards, attributes drawn like random_workflow's.
QueryGraph random_query(Rng& rng, std::size_t max_nodes, std::size_t max_wildcards);

TableData random_table(Rng& rng, std::size_t max_columns);
std::string random_source(Rng& rng);
std::set<std::string> random_libraries(Rng& rng);

/// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& tag);

}  // namespace oracle
