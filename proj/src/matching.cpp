#include "nbsim/matching.hpp"

#include <algorithm>
#include <numeric>

namespace nbsim {

bool index_prune(const TopologySignature& query, const TopologySignature& workflow) {
    return workflow.count_code < query.count_code || workflow.count_data < query.count_data ||
           workflow.count_output < query.count_output || workflow.max_in < query.max_in ||
           workflow.max_out < query.max_out;
}

ReachabilityIndex::ReachabilityIndex(const LabeledGraph& graph)
    : words_((graph.size() + 63) / 64), rows_(graph.size() * words_, 0) {
    const auto order = topological_order(graph);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const NodeId v = *it;
        std::uint64_t* row = &rows_[v * words_];
        for (NodeId u : graph.successors(v)) {
            row[u / 64] |= std::uint64_t{1} << (u % 64);
            const std::uint64_t* child = &rows_[u * words_];
            for (std::size_t w = 0; w < words_; ++w) row[w] |= child[w];
        }
    }
}

ReachabilityIndex build_reachability(const WorkflowGraph& graph) { return ReachabilityIndex(graph); }

namespace {

// Backtracking matcher. Query nodes are assigned in ascending order of
// candidate count; each constraint is checked as soon as both of its
// endpoints are assigned.
class Matcher {
public:
    Matcher(const QueryGraph& q, const WorkflowGraph& w, const ReachabilityIndex& r)
        : q_(q), w_(w), r_(r), image_(q.size(), Mapping::kUnmapped), used_(w.size(), false) {}

    std::vector<Mapping> run() {
        std::vector<std::vector<NodeId>> candidates(q_.size());
        std::vector<NodeId> order;
        for (NodeId v = 0; v < q_.size(); ++v) {
            if (q_.node(v).label == NodeLabel::Wildcard) continue;
            candidates[v] = candidates_for(v);
            if (candidates[v].empty()) return {};
            order.push_back(v);
        }
        std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
            return candidates[a].size() < candidates[b].size();
        });

        std::vector<std::size_t> position(q_.size(), 0);
        for (std::size_t i = 0; i < order.size(); ++i) position[order[i]] = i;
        // checks_[i]: constraints whose later endpoint is order[i].
        checks_.resize(order.size());
        for (const auto& [from, to] : q_.edges()) {
            const bool from_wild = q_.node(from).label == NodeLabel::Wildcard;
            const bool to_wild = q_.node(to).label == NodeLabel::Wildcard;
            if (!from_wild && !to_wild) {
                checks_[std::max(position[from], position[to])].push_back({from, to, false});
            }
        }
        for (NodeId m = 0; m < q_.size(); ++m) {
            if (q_.node(m).label != NodeLabel::Wildcard) continue;
            for (NodeId i : q_.predecessors(m)) {
                for (NodeId j : q_.successors(m)) {
                    checks_[std::max(position[i], position[j])].push_back({i, j, true});
                }
            }
        }

        order_ = std::move(order);
        candidates_ = std::move(candidates);
        extend(0);
        std::sort(results_.begin(), results_.end());
        return std::move(results_);
    }

private:
    struct Check {
        NodeId from;
        NodeId to;
        bool via_path;
    };

    std::vector<NodeId> candidates_for(NodeId v) const {
        std::size_t direct_in = 0, direct_out = 0;
        for (NodeId u : q_.predecessors(v)) direct_in += q_.node(u).label != NodeLabel::Wildcard;
        for (NodeId u : q_.successors(v)) direct_out += q_.node(u).label != NodeLabel::Wildcard;

        std::vector<NodeId> out;
        for (NodeId u = 0; u < w_.size(); ++u) {
            if (w_.node(u).label != q_.node(v).label) continue;
            if (w_.predecessors(u).size() < direct_in || w_.successors(u).size() < direct_out) continue;
            out.push_back(u);
        }
        return out;
    }

    bool satisfied(std::size_t depth) const {
        for (const auto& c : checks_[depth]) {
            const NodeId a = image_[c.from];
            const NodeId b = image_[c.to];
            if (c.via_path ? !r_.reaches(a, b) : !w_.has_edge(a, b)) return false;
        }
        return true;
    }

    void extend(std::size_t depth) {
        if (depth == order_.size()) {
            results_.push_back(Mapping{image_});
            return;
        }
        const NodeId v = order_[depth];
        for (NodeId u : candidates_[v]) {
            if (used_[u]) continue;
            image_[v] = u;
            used_[u] = true;
            if (satisfied(depth)) extend(depth + 1);
            used_[u] = false;
        }
        image_[v] = Mapping::kUnmapped;
    }

    const QueryGraph& q_;
    const WorkflowGraph& w_;
    const ReachabilityIndex& r_;
    std::vector<NodeId> image_;
    std::vector<bool> used_;
    std::vector<NodeId> order_;
    std::vector<std::vector<NodeId>> candidates_;
    std::vector<std::vector<Check>> checks_;
    std::vector<Mapping> results_;
};

}  // namespace

std::vector<Mapping> enumerate_mappings(const QueryGraph& query, const WorkflowGraph& workflow,
                                        const ReachabilityIndex& reach) {
    return Matcher(query, workflow, reach).run();
}

}  // namespace nbsim
