#include "nbsim/search.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <mutex>
#include <exception>
#include <set>
#include <thread>

#include "nbsim/errors.hpp"

namespace nbsim {

double NormalizedWeights::for_label(NodeLabel label) const {
    switch (label) {
        case NodeLabel::Code: return code;
        case NodeLabel::Data: return data;
        case NodeLabel::Output: return output;
        case NodeLabel::Wildcard: return 0;
    }
    return 0;
}

NormalizedWeights normalize_weights(const QueryGraph& query, const Weights& weights) {
    auto split = [](double w, std::size_t n) { return n == 0 ? 0.0 : w / static_cast<double>(n); };
    return NormalizedWeights{
        split(weights.code(), query.count(NodeLabel::Code)),
        split(weights.data(), query.count(NodeLabel::Data)),
        split(weights.output(), query.count(NodeLabel::Output)),
        weights.library(),
    };
}

double NodeSimilarity::node(const Node& query, const Node& workflow) const {
    switch (query.label) {
        case NodeLabel::Code: {
            auto compute = [&] { return sim_code(query.source(), workflow.source(), config_, &counters_); };
            return cache_ ? cached(MeasureTag::Code, query.hash, workflow.hash, *cache_, compute) : compute();
        }
        case NodeLabel::Data: {
            auto compute = [&] { return sim_table(query.table(), workflow.table(), config_, &counters_); };
            return cache_ ? cached(MeasureTag::Table, query.hash, workflow.hash, *cache_, compute) : compute();
        }
        case NodeLabel::Output:
            return sim_output(query.output_kind(), workflow.output_kind(), &counters_);
        case NodeLabel::Wildcard: break;
    }
    throw InvalidQuery("wildcard nodes have no content similarity");
}

double NodeSimilarity::library(const std::set<std::string>& query, const std::set<std::string>& workflow) const {
    return sim_library(query, workflow, &counters_);
}

PartialScore::PartialScore(const QueryGraph& query, const NormalizedWeights& weights)
    : query_(&query), weights_(weights), node_sim_(query.size(), 0.0), scored_(query.size(), false) {}

void PartialScore::set_library(double similarity) { library_ = similarity; }

void PartialScore::set_node(NodeId v, double similarity) {
    node_sim_.at(v) = similarity;
    scored_[v] = true;
}

bool PartialScore::complete() const {
    if (!library_) return false;
    for (NodeId v = 0; v < query_->size(); ++v) {
        if (query_->node(v).label != NodeLabel::Wildcard && !scored_[v]) return false;
    }
    return true;
}

double PartialScore::computed() const {
    double sum = library_ ? weights_.library * *library_ : 0.0;
    for (NodeId v = 0; v < query_->size(); ++v) {
        if (scored_[v]) sum += weights_.for_label(query_->node(v).label) * node_sim_[v];
    }
    return sum;
}

double PartialScore::remaining_weight() const {
    double sum = library_ ? 0.0 : weights_.library;
    for (NodeId v = 0; v < query_->size(); ++v) {
        if (!scored_[v]) sum += weights_.for_label(query_->node(v).label);
    }
    return sum;
}

double PartialScore::max_sim() const {
    double sum = library_ ? weights_.library * *library_ : weights_.library;
    for (NodeId v = 0; v < query_->size(); ++v) {
        const double w = weights_.for_label(query_->node(v).label);
        sum += scored_[v] ? w * node_sim_[v] : w;
    }
    return sum;
}

double max_sim(const PartialScore& partial) { return partial.max_sim(); }

double graph_mapping_score(const QueryGraph& query, const WorkflowGraph& workflow, const Mapping& mapping,
                           const NormalizedWeights& weights, const NodeSimilarity& similarity) {
    PartialScore partial(query, weights);
    partial.set_library(similarity.library(query.libraries(), workflow.libraries()));
    for (NodeId v = 0; v < query.size(); ++v) {
        if (query.node(v).label == NodeLabel::Wildcard) continue;
        partial.set_node(v, similarity.node(query.node(v), workflow.node(mapping.image.at(v))));
    }
    return partial.max_sim();
}

NotebookScore notebook_score(const QueryGraph& query, const WorkflowGraph& workflow,
                             const std::vector<Mapping>& mappings, const NormalizedWeights& weights,
                             const NodeSimilarity& similarity) {
    NotebookScore best;
    for (std::size_t i = 0; i < mappings.size(); ++i) {
        const double s = graph_mapping_score(query, workflow, mappings[i], weights, similarity);
        if (!best.best_mapping || s > best.score) best = NotebookScore{s, i};
    }
    return best;
}

SearchToggles SearchToggles::from_bits(unsigned bits) {
    return SearchToggles{(bits & 1U) != 0, (bits & 2U) != 0, (bits & 4U) != 0, (bits & 8U) != 0};
}

std::string SearchToggles::describe() const {
    std::string out;
    auto add = [&](bool on, const char* name) {
        if (!on) return;
        if (!out.empty()) out += '+';
        out += name;
    };
    add(pruning, "prune");
    add(ordering, "order");
    add(caching, "cache");
    add(indexing, "index");
    return out.empty() ? "none" : out;
}

namespace {

void validate_request(const Corpus& corpus, const SearchOptions& options) {
    if (options.k == 0) throw InvalidQuery("k must be positive");
    if (options.theta == NodeLabel::Wildcard) throw InvalidQuery("theta must be code, data or output");
    if (corpus.empty()) throw EmptyCorpus();
}

// Positive scores by descending score then id; with include_zero the ranking
// is padded by the remaining notebooks in id order.
std::vector<ScoredResult> rank(const Corpus& corpus, const std::vector<std::optional<ScoredResult>>& best,
                               const SearchOptions& options) {
    std::vector<ScoredResult> ranking;
    for (const auto& b : best) {
        if (b && b->score > 0) ranking.push_back(*b);
    }
    std::sort(ranking.begin(), ranking.end(), [](const ScoredResult& a, const ScoredResult& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.notebook < b.notebook;
    });
    if (ranking.size() >= options.k) {
        ranking.resize(options.k);
        return ranking;
    }
    if (options.include_zero) {
        std::vector<ScoredResult> zeros;
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            if (best[i] && best[i]->score > 0) continue;
            zeros.push_back(best[i] ? *best[i] : ScoredResult{corpus.entry(i).id, 0.0, std::nullopt});
        }
        std::sort(zeros.begin(), zeros.end(),
                  [](const ScoredResult& a, const ScoredResult& b) { return a.notebook < b.notebook; });
        for (auto& z : zeros) {
            if (ranking.size() == options.k) break;
            ranking.push_back(std::move(z));
        }
    }
    return ranking;
}

template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
    threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(count, 1));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

void copy_counters(const MeasureCounters& counters, const SimCache* cache, SearchStats& stats) {
    stats.code_sims = counters.code;
    stats.table_sims = counters.table;
    stats.output_sims = counters.output;
    stats.library_sims = counters.library;
    stats.column_pairs = counters.column_pairs;
    stats.cache_hits = cache ? cache->hits() : 0;
}

// Best score per notebook plus the multiset of those scores, giving Sim_k.
class TopKTracker {
public:
    TopKTracker(std::size_t notebooks, std::size_t k) : best_(notebooks), k_(k) {}

    double kth() const {
        if (scores_.size() < k_) return 0.0;
        return *std::next(scores_.begin(), static_cast<std::ptrdiff_t>(k_ - 1));
    }

    std::optional<double> best(std::size_t notebook) const {
        if (!best_[notebook]) return std::nullopt;
        return best_[notebook]->first;
    }

    void offer(std::size_t notebook, double score, std::size_t mapping_index) {
        auto& slot = best_[notebook];
        if (slot && !(score > slot->first) && !(score == slot->first && mapping_index < slot->second)) return;
        if (slot) scores_.erase(scores_.find(slot->first));
        slot = {score, mapping_index};
        scores_.insert(score);
    }

    std::optional<std::size_t> best_mapping(std::size_t notebook) const {
        if (!best_[notebook]) return std::nullopt;
        return best_[notebook]->second;
    }

private:
    std::vector<std::optional<std::pair<double, std::size_t>>> best_;
    std::multiset<double, std::greater<>> scores_;
    std::size_t k_;
};

}  // namespace

std::vector<ScoredResult> search_topk(const QueryGraph& query, const Corpus& corpus, const SearchOptions& options,
                                      SearchStats* stats) {
    validate_request(corpus, options);
    const auto& toggles = options.toggles;
    const auto weights = normalize_weights(query, options.weights);
    const auto query_sig = topology_signature(query);

    SimCache private_cache;
    SimCache* cache = toggles.caching ? (options.cache ? options.cache : &private_cache) : nullptr;
    MeasureCounters counters;
    const NodeSimilarity similarity(options.sim, cache, counters);

    std::vector<NodeId> deferred;  // query nodes scored in the exact phase
    for (NodeId v = 0; v < query.size(); ++v) {
        const auto label = query.node(v).label;
        if (label == NodeLabel::Wildcard) continue;
        if (!toggles.ordering || label == options.theta) deferred.push_back(v);
    }

    struct GraphWork {
        bool index_pruned = false;
        std::vector<Mapping> mappings;
        std::vector<PartialScore> partials;
    };
    std::vector<GraphWork> work(corpus.size());

    // Phase 1: matching plus every similarity that is not deferred.
    parallel_for(corpus.size(), options.threads, [&](std::size_t i) {
        auto& w = work[i];
        if (toggles.indexing && index_prune(query_sig, corpus.entry(i).signature)) {
            w.index_pruned = true;
            return;
        }
        const auto& graph = corpus.graph(i);
        w.mappings = enumerate_mappings(query, graph, build_reachability(graph));
        if (w.mappings.empty()) return;

        const double library = similarity.library(query.libraries(), graph.libraries());
        w.partials.reserve(w.mappings.size());
        for (const auto& m : w.mappings) {
            PartialScore partial(query, weights);
            partial.set_library(library);
            if (toggles.ordering) {
                for (NodeId v = 0; v < query.size(); ++v) {
                    const auto label = query.node(v).label;
                    if (label == NodeLabel::Wildcard || label == options.theta) continue;
                    partial.set_node(v, similarity.node(query.node(v), graph.node(m.image[v])));
                }
            }
            w.partials.push_back(std::move(partial));
        }
    });

    struct PairRef {
        std::size_t notebook;
        std::size_t mapping;
        double tentative;
    };
    std::vector<PairRef> pairs;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        for (std::size_t m = 0; m < work[i].partials.size(); ++m) {
            pairs.push_back({i, m, work[i].partials[m].computed()});
        }
    }
    if (toggles.ordering) {
        std::stable_sort(pairs.begin(), pairs.end(), [&](const PairRef& a, const PairRef& b) {
            if (a.tentative != b.tentative) return a.tentative > b.tentative;
            return corpus.entry(a.notebook).id < corpus.entry(b.notebook).id;
        });
    }

    // Phase 2: exact scoring in tentative order, abandoning a pair as soon as
    // its bound falls below Sim_k or below the notebook's best so far.
    TopKTracker tracker(corpus.size(), options.k);
    SearchStats local;
    for (const auto& ref : pairs) {
        auto& partial = work[ref.notebook].partials[ref.mapping];
        const auto& mapping = work[ref.notebook].mappings[ref.mapping];
        const auto& graph = corpus.graph(ref.notebook);

        SearchTrace::Pair traced;
        if (options.trace) {
            traced.notebook = ref.notebook;
            traced.mapping = mapping;
            traced.max_sims.push_back(partial.max_sim());
        }

        auto outcome = SearchTrace::Outcome::Completed;
        double threshold = 0;
        for (NodeId v : deferred) {
            if (toggles.pruning) {
                const double bound = partial.max_sim();
                const double sim_k = tracker.kth();
                const auto best = tracker.best(ref.notebook);
                if (bound < sim_k) {
                    outcome = SearchTrace::Outcome::PrunedByK;
                    threshold = sim_k;
                    break;
                }
                if (best && bound < *best) {
                    outcome = SearchTrace::Outcome::PrunedByBest;
                    threshold = *best;
                    break;
                }
            }
            partial.set_node(v, similarity.node(query.node(v), graph.node(mapping.image[v])));
            if (options.trace) traced.max_sims.push_back(partial.max_sim());
        }

        switch (outcome) {
            case SearchTrace::Outcome::Completed:
                ++local.pairs_completed;
                tracker.offer(ref.notebook, partial.max_sim(), ref.mapping);
                break;
            case SearchTrace::Outcome::PrunedByK: ++local.pairs_pruned_by_k; break;
            case SearchTrace::Outcome::PrunedByBest: ++local.pairs_pruned_by_best; break;
        }
        if (options.trace) {
            traced.outcome = outcome;
            traced.value = outcome == SearchTrace::Outcome::Completed ? partial.max_sim() : threshold;
            options.trace->pairs.push_back(std::move(traced));
        }
    }

    std::vector<std::optional<ScoredResult>> best(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (auto m = tracker.best_mapping(i)) {
            best[i] = ScoredResult{corpus.entry(i).id, *tracker.best(i), work[i].mappings[*m]};
        }
    }

    if (stats) {
        local.graphs = corpus.size();
        for (const auto& w : work) {
            local.graphs_index_pruned += w.index_pruned;
            local.mappings += w.mappings.size();
        }
        copy_counters(counters, cache, local);
        *stats = local;
    }
    return rank(corpus, best, options);
}

std::vector<ScoredResult> naive_search_topk(const QueryGraph& query, const Corpus& corpus,
                                            const SearchOptions& options, SearchStats* stats) {
    validate_request(corpus, options);
    const auto weights = normalize_weights(query, options.weights);
    MeasureCounters counters;
    const NodeSimilarity similarity(options.sim, nullptr, counters);
    SearchStats local;

    std::vector<std::optional<ScoredResult>> best(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& graph = corpus.graph(i);
        const double library = similarity.library(query.libraries(), graph.libraries());
        const auto mappings = enumerate_mappings(query, graph, build_reachability(graph));
        local.mappings += mappings.size();
        local.pairs_completed += mappings.size();
        for (const auto& m : mappings) {
            PartialScore partial(query, weights);
            partial.set_library(library);
            for (NodeId v = 0; v < query.size(); ++v) {
                if (query.node(v).label == NodeLabel::Wildcard) continue;
                partial.set_node(v, similarity.node(query.node(v), graph.node(m.image[v])));
            }
            const double score = partial.max_sim();
            if (!best[i] || score > best[i]->score) best[i] = ScoredResult{graph.owner(), score, m};
        }
    }
    if (stats) {
        local.graphs = corpus.size();
        copy_counters(counters, nullptr, local);
        *stats = local;
    }
    return rank(corpus, best, options);
}

namespace {

enum Facet : std::size_t { kCodeFacet, kDataFacet, kOutputFacet, kLibraryFacet, kFacetCount };

Facet facet_of(NodeLabel label) {
    switch (label) {
        case NodeLabel::Code: return kCodeFacet;
        case NodeLabel::Data: return kDataFacet;
        case NodeLabel::Output: return kOutputFacet;
        case NodeLabel::Wildcard: break;
    }
    return kDataFacet;
}

struct SetFacets {
    std::array<double, kFacetCount> weight{};
    std::array<std::optional<double>, kFacetCount> sim{};

    double computed() const {
        double sum = 0;
        for (std::size_t f = 0; f < kFacetCount; ++f) {
            if (sim[f]) sum += weight[f] * *sim[f];
        }
        return sum;
    }
    double max_sim() const {
        double sum = 0;
        for (std::size_t f = 0; f < kFacetCount; ++f) sum += sim[f] ? weight[f] * *sim[f] : weight[f];
        return sum;
    }
};

std::string join_sources(const std::vector<std::string>& parts) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out.push_back('\n');
        out += parts[i];
    }
    return out;
}

struct SetView {
    std::string code;
    std::vector<TableData> tables;
    std::vector<OutputKind> outputs;
    std::set<std::string> libraries;
};

SetView view_of(const Notebook& nb) {
    SetView view;
    std::vector<std::string> sources;
    for (const auto& c : nb.cells) sources.push_back(c.source);
    view.code = join_sources(sources);
    view.tables = nb.tables;
    for (const auto& o : nb.outputs) view.outputs.push_back(o.kind);
    view.libraries = nb.libraries;
    return view;
}

double facet_similarity(Facet facet, const SetView& q, const SetView& n, const SimConfig& config,
                        MeasureCounters* counters) {
    switch (facet) {
        case kCodeFacet: return sim_code(q.code, n.code, config, counters);
        case kDataFacet: return sim_table_sets(q.tables, n.tables, config, counters);
        case kOutputFacet:
            if (counters) ++counters->output;
            return sim_output_multiset(q.outputs, n.outputs);
        case kLibraryFacet: return sim_library(q.libraries, n.libraries, counters);
        case kFacetCount: break;
    }
    return 0;
}

SetView view_of(const SetQuery& q) {
    return SetView{join_sources(q.code), q.tables, q.outputs, q.libraries};
}

SetFacets facets_for(const Weights& w) {
    SetFacets f;
    f.weight = {w.code(), w.data(), w.output(), w.library()};
    return f;
}

}  // namespace

double set_based_score(const SetQuery& query, const Notebook& notebook, const Weights& weights,
                       const SimConfig& config, MeasureCounters* counters) {
    const auto q = view_of(query);
    const auto n = view_of(notebook);
    auto facets = facets_for(weights);
    for (std::size_t f = 0; f < kFacetCount; ++f) {
        facets.sim[f] = facet_similarity(static_cast<Facet>(f), q, n, config, counters);
    }
    return facets.max_sim();
}

std::vector<ScoredResult> exhaustive_set_based_topk(const SetQuery& query, const Corpus& corpus,
                                                    const SearchOptions& options, SearchStats* stats) {
    validate_request(corpus, options);
    MeasureCounters counters;
    std::vector<std::optional<ScoredResult>> best(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto nb = notebook_from_graph(corpus.graph(i));
        best[i] = ScoredResult{nb.id, set_based_score(query, nb, options.weights, options.sim, &counters),
                               std::nullopt};
    }
    if (stats) {
        *stats = SearchStats{};
        stats->graphs = corpus.size();
        copy_counters(counters, nullptr, *stats);
    }
    return rank(corpus, best, options);
}

std::vector<ScoredResult> set_based_search_topk(const SetQuery& query, const Corpus& corpus,
                                                const SearchOptions& options, SearchStats* stats) {
    validate_request(corpus, options);
    const auto& toggles = options.toggles;
    const Facet theta = facet_of(options.theta);
    const auto q = view_of(query);
    MeasureCounters counters;

    std::vector<SetView> views(corpus.size());
    std::vector<SetFacets> facets(corpus.size(), facets_for(options.weights));
    std::vector<Facet> deferred;
    for (std::size_t f = 0; f < kFacetCount; ++f) {
        if (!toggles.ordering || f == theta) deferred.push_back(static_cast<Facet>(f));
    }

    parallel_for(corpus.size(), options.threads, [&](std::size_t i) {
        views[i] = view_of(notebook_from_graph(corpus.graph(i)));
        if (!toggles.ordering) return;
        for (std::size_t f = 0; f < kFacetCount; ++f) {
            if (f == theta) continue;
            facets[i].sim[f] = facet_similarity(static_cast<Facet>(f), q, views[i], options.sim, &counters);
        }
    });

    std::vector<std::size_t> order(corpus.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (toggles.ordering) {
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double ta = facets[a].computed();
            const double tb = facets[b].computed();
            if (ta != tb) return ta > tb;
            return corpus.entry(a).id < corpus.entry(b).id;
        });
    }

    TopKTracker tracker(corpus.size(), options.k);
    SearchStats local;
    for (std::size_t i : order) {
        auto& f = facets[i];
        bool pruned = false;
        for (Facet facet : deferred) {
            if (toggles.pruning && f.max_sim() < tracker.kth()) {
                pruned = true;
                break;
            }
            // A zero-weight facet contributes exactly 0 whatever its value.
            f.sim[facet] = f.weight[facet] == 0
                               ? 0.0
                               : facet_similarity(facet, q, views[i], options.sim, &counters);
        }
        if (pruned) {
            ++local.pairs_pruned_by_k;
            continue;
        }
        ++local.pairs_completed;
        tracker.offer(i, f.max_sim(), 0);
    }

    std::vector<std::optional<ScoredResult>> best(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (auto s = tracker.best(i)) best[i] = ScoredResult{corpus.entry(i).id, *s, std::nullopt};
    }
    if (stats) {
        local.graphs = corpus.size();
        copy_counters(counters, nullptr, local);
        *stats = local;
    }
    return rank(corpus, best, options);
}

}  // namespace nbsim
