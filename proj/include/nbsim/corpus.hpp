#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "nbsim/workflow_graph.hpp"

namespace nbsim {

/// Workflow graphs plus their topology signatures. Signatures are available
/// up front; a graph body is materialised on first access, so index pruning
/// can skip graphs without ever loading them. Safe for concurrent readers.
class Corpus {
public:
    using Loader = std::function<WorkflowGraph()>;

    struct Entry {
        NotebookId id;
        TopologySignature signature;
    };

    static Corpus from_graphs(std::vector<WorkflowGraph> graphs);

    void add(WorkflowGraph graph);
    void add(NotebookId id, TopologySignature signature, Loader loader);

    std::size_t size() const noexcept { return slots_.size(); }
    bool empty() const noexcept { return slots_.empty(); }
    const Entry& entry(std::size_t i) const { return slots_.at(i)->entry; }
    const WorkflowGraph& graph(std::size_t i) const;

    /// Number of graph bodies materialised by a loader so far.
    std::size_t bodies_loaded() const noexcept { return *bodies_loaded_; }

private:
    struct Slot {
        Entry entry;
        Loader loader;
        mutable std::once_flag once;
        mutable std::optional<WorkflowGraph> body;
    };

    std::vector<std::unique_ptr<Slot>> slots_;
    std::unique_ptr<std::atomic<std::size_t>> bodies_loaded_ = std::make_unique<std::atomic<std::size_t>>(0);
};

}  // namespace nbsim
