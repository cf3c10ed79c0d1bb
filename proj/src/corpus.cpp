#include "nbsim/corpus.hpp"

namespace nbsim {

Corpus Corpus::from_graphs(std::vector<WorkflowGraph> graphs) {
    Corpus corpus;
    for (auto& g : graphs) corpus.add(std::move(g));
    return corpus;
}

void Corpus::add(WorkflowGraph graph) {
    auto slot = std::make_unique<Slot>();
    slot->entry = Entry{graph.owner(), topology_signature(graph)};
    std::call_once(slot->once, [&] { slot->body.emplace(std::move(graph)); });
    slots_.push_back(std::move(slot));
}

void Corpus::add(NotebookId id, TopologySignature signature, Loader loader) {
    auto slot = std::make_unique<Slot>();
    slot->entry = Entry{std::move(id), signature};
    slot->loader = std::move(loader);
    slots_.push_back(std::move(slot));
}

const WorkflowGraph& Corpus::graph(std::size_t i) const {
    const Slot& slot = *slots_.at(i);
    std::call_once(slot.once, [&] {
        slot.body.emplace(slot.loader());
        ++*bodies_loaded_;
    });
    return *slot.body;
}

}  // namespace nbsim
