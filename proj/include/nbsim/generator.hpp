#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "nbsim/corpus.hpp"
#include "nbsim/notebook.hpp"
#include "nbsim/search.hpp"
#include "nbsim/workflow_graph.hpp"

namespace nbsim {

/// mt19937_64 with its own range reduction, so a seed yields the same stream
/// with every standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);
    /// Uniform in [lo, hi].
    std::size_t between(std::size_t lo, std::size_t hi) { return lo + below(hi - lo + 1); }
    /// True with probability percent/100.
    bool chance(unsigned percent) { return below(100) < percent; }

    template <class T>
    const T& pick(const std::vector<T>& items) {
        return items[below(items.size())];
    }

private:
    std::mt19937_64 engine_;
};

/// Synthetic notebooks: 5-30 cells, 0-5 tables, 0-10 outputs, imports from a
/// fixed pool. Cells, tables and whole notebooks are drawn from shared pools
/// so identical content recurs across notebooks. Ids are `nb0000`, `nb0001`, ...
std::vector<Notebook> generate_notebooks(std::size_t count, std::uint64_t seed);

/// The notebook as `.ipynb` JSON. Outputs become records that
/// classify_output maps back to the same kind.
nlohmann::json notebook_to_ipynb(const Notebook& notebook);

struct QueryGenOptions {
    std::size_t min_nodes = 1;
    std::size_t max_nodes = 6;
    std::size_t max_wildcards = 2;
    /// Redraw queries whose mappings over the whole corpus exceed this (0: no limit).
    std::size_t max_total_mappings = 0;
};

/// Connected fragments cut from corpus graphs, with some attributes replaced
/// and wildcards standing for existing paths.
std::vector<QueryGraph> generate_queries(const Corpus& corpus, std::size_t count, std::uint64_t seed,
                                         const QueryGenOptions& options = {});

std::vector<SetQuery> generate_set_queries(const Corpus& corpus, std::size_t count, std::uint64_t seed);

/// Mappings enumerated for `query` over every graph that survives index pruning.
std::size_t total_mappings(const QueryGraph& query, const Corpus& corpus);

}  // namespace nbsim
