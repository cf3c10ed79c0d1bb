#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <functional>
#include <list>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nbsim/content_hash.hpp"
#include "nbsim/notebook.hpp"

namespace nbsim {

using TokenSet = std::set<std::string>;

inline constexpr std::string_view kDefaultCodeDelimiters = " \n.=";

/// Splits source on any delimiter character; empty fragments are dropped.
TokenSet tokenize_code(std::string_view source, std::string_view delimiters = kDefaultCodeDelimiters);

/// |a ∩ b| / |a ∪ b| over sorted sets. Two empty sets are identical (1.0).
template <typename T>
double jaccard(const std::set<T>& a, const std::set<T>& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t common = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) {
            ++ia;
        } else if (*ib < *ia) {
            ++ib;
        } else {
            ++common;
            ++ia;
            ++ib;
        }
    }
    return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

/// Normaliser for the table measure: the smaller or the larger column count.
enum class TableDenominator { Smaller, Larger };

struct SimConfig {
    TableDenominator table_denominator = TableDenominator::Smaller;
    std::string code_delimiters{kDefaultCodeDelimiters};
    /// Artificial delay added to every column-pair Jaccard (benchmarking only).
    std::chrono::nanoseconds column_pair_cost{0};
};

/// Invocation counts of the underlying (uncached) measures.
struct MeasureCounters {
    std::atomic<std::size_t> code{0};
    std::atomic<std::size_t> table{0};
    std::atomic<std::size_t> output{0};
    std::atomic<std::size_t> library{0};
    std::atomic<std::size_t> column_pairs{0};

    std::size_t total() const noexcept { return code + table + output + library; }
};

double sim_code(std::string_view a, std::string_view b, const SimConfig& config = {},
                MeasureCounters* counters = nullptr);

/// Greedy column matching: all column pairs are ranked by Jaccard (ties by
/// column index of the narrower table, then of the wider one) and accepted
/// while both columns are free. The sum is divided by the narrower (or, with
/// TableDenominator::Larger, the wider) column count.
double sim_table(const TableData& a, const TableData& b, const SimConfig& config = {},
                 MeasureCounters* counters = nullptr);

/// Greedy matching of query tables to notebook tables by sim_table, divided
/// by the number of query tables.
double sim_table_sets(const std::vector<TableData>& query, const std::vector<TableData>& notebook,
                      const SimConfig& config = {}, MeasureCounters* counters = nullptr);

double sim_library(const std::set<std::string>& a, const std::set<std::string>& b,
                   MeasureCounters* counters = nullptr);

double sim_output(OutputKind a, OutputKind b, MeasureCounters* counters = nullptr);

/// Multiset Jaccard over output kinds.
double sim_output_multiset(const std::vector<OutputKind>& a, const std::vector<OutputKind>& b);

enum class MeasureTag : std::uint8_t { Code, Table, Output, Library };

/// Similarity values keyed by an order-normalised pair of content hashes and
/// the measure. Thread-safe; bounded by `capacity` entries with LRU eviction
/// (0 means unbounded). The lock is never held while a measure runs, so two
/// threads may compute the same entry; both store the same value.
class SimCache {
public:
    explicit SimCache(std::size_t capacity = 0) : capacity_(capacity) {}

    std::optional<double> lookup(MeasureTag tag, const ContentHash& a, const ContentHash& b);
    void store(MeasureTag tag, const ContentHash& a, const ContentHash& b, double value);

    std::size_t size() const;
    std::size_t hits() const noexcept { return hits_; }
    std::size_t misses() const noexcept { return misses_; }

private:
    struct Key {
        ContentHash low;
        ContentHash high;
        MeasureTag tag;

        friend bool operator==(const Key&, const Key&) = default;
    };
    struct KeyHasher {
        std::size_t operator()(const Key& k) const noexcept {
            ContentHashHasher h;
            return h(k.low) * 31 ^ h(k.high) * 17 ^ static_cast<std::size_t>(k.tag);
        }
    };
    using Lru = std::list<std::pair<Key, double>>;

    static Key make_key(MeasureTag tag, const ContentHash& a, const ContentHash& b);

    std::size_t capacity_;
    mutable std::mutex mutex_;
    Lru lru_;
    std::unordered_map<Key, Lru::iterator, KeyHasher> index_;
    std::atomic<std::size_t> hits_{0};
    std::atomic<std::size_t> misses_{0};
};

/// Returns the cached value for (tag, a, b) or runs `compute` and stores it.
double cached(MeasureTag tag, const ContentHash& a, const ContentHash& b, SimCache& cache,
              const std::function<double()>& compute);

}  // namespace nbsim
