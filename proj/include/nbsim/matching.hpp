#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "nbsim/workflow_graph.hpp"

namespace nbsim {

/// Image of every query node in a workflow graph; wildcard query nodes map
/// to Mapping::kUnmapped.
struct Mapping {
    static constexpr NodeId kUnmapped = std::numeric_limits<NodeId>::max();

    std::vector<NodeId> image;

    friend auto operator<=>(const Mapping&, const Mapping&) = default;
};

/// True when the workflow graph cannot contain a match for the query: it has
/// fewer nodes of some label or a smaller maximum in- or out-degree.
bool index_prune(const TopologySignature& query, const TopologySignature& workflow);

/// Transitive closure of a DAG as one bitset of descendants per node.
class ReachabilityIndex {
public:
    ReachabilityIndex() = default;
    explicit ReachabilityIndex(const LabeledGraph& graph);

    /// True iff a directed path of length >= 1 leads from `from` to `to`.
    bool reaches(NodeId from, NodeId to) const {
        return (rows_[from * words_ + to / 64] >> (to % 64)) & 1U;
    }

private:
    std::size_t words_ = 0;
    std::vector<std::uint64_t> rows_;
};

ReachabilityIndex build_reachability(const WorkflowGraph& graph);

/// All injective, label-preserving mappings of the query's non-wildcard nodes
/// such that every query edge between mapped nodes is a workflow edge and, for
/// every wildcard, each in-neighbour's image reaches each out-neighbour's
/// image. Sorted lexicographically by image.
std::vector<Mapping> enumerate_mappings(const QueryGraph& query, const WorkflowGraph& workflow,
                                        const ReachabilityIndex& reach);

}  // namespace nbsim
