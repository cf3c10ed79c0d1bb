#include "nbsim/content_sim.hpp"

#include <array>
#include <thread>
#include <tuple>

namespace nbsim {

TokenSet tokenize_code(std::string_view source, std::string_view delimiters) {
    TokenSet tokens;
    std::size_t start = 0;
    while (start < source.size()) {
        const auto end = source.find_first_of(delimiters, start);
        const auto stop = end == std::string_view::npos ? source.size() : end;
        if (stop > start) tokens.emplace(source.substr(start, stop - start));
        start = stop + 1;
    }
    return tokens;
}

double sim_code(std::string_view a, std::string_view b, const SimConfig& config, MeasureCounters* counters) {
    if (counters) ++counters->code;
    return jaccard(tokenize_code(a, config.code_delimiters), tokenize_code(b, config.code_delimiters));
}

namespace {

struct ScoredPair {
    double score;
    std::size_t left;
    std::size_t right;
};

// Accepts pairs in descending score order (ties by ascending indices) while
// both endpoints are unused; returns the accepted scores in acceptance order.
std::vector<double> greedy_injection(std::vector<ScoredPair> pairs, std::size_t left_count,
                                     std::size_t right_count) {
    std::sort(pairs.begin(), pairs.end(), [](const ScoredPair& x, const ScoredPair& y) {
        if (x.score != y.score) return x.score > y.score;
        return std::tie(x.left, x.right) < std::tie(y.left, y.right);
    });
    std::vector<bool> left_used(left_count), right_used(right_count);
    const std::size_t wanted = std::min(left_count, right_count);
    std::vector<double> accepted;
    for (const auto& p : pairs) {
        if (accepted.size() == wanted) break;
        if (left_used[p.left] || right_used[p.right]) continue;
        left_used[p.left] = right_used[p.right] = true;
        accepted.push_back(p.score);
    }
    return accepted;
}

}  // namespace

double sim_table(const TableData& a, const TableData& b, const SimConfig& config, MeasureCounters* counters) {
    if (counters) ++counters->table;
    if (a.columns.empty() && b.columns.empty()) return 1.0;
    if (a.columns.empty() || b.columns.empty()) return 0.0;

    const bool swap = b.columns.size() < a.columns.size();
    const auto& narrow = swap ? b : a;
    const auto& wide = swap ? a : b;

    const std::size_t pair_count = narrow.columns.size() * wide.columns.size();
    if (counters) counters->column_pairs += pair_count;
    if (config.column_pair_cost.count() > 0) std::this_thread::sleep_for(config.column_pair_cost * pair_count);

    std::vector<ScoredPair> pairs;
    pairs.reserve(pair_count);
    for (std::size_t i = 0; i < narrow.columns.size(); ++i) {
        for (std::size_t j = 0; j < wide.columns.size(); ++j) {
            pairs.push_back({jaccard(narrow.columns[i].values, wide.columns[j].values), i, j});
        }
    }
    double sum = 0;
    for (double s : greedy_injection(std::move(pairs), narrow.columns.size(), wide.columns.size())) sum += s;

    const auto denominator = config.table_denominator == TableDenominator::Smaller ? narrow.columns.size()
                                                                                   : wide.columns.size();
    return sum / static_cast<double>(denominator);
}

double sim_table_sets(const std::vector<TableData>& query, const std::vector<TableData>& notebook,
                      const SimConfig& config, MeasureCounters* counters) {
    if (query.empty() && notebook.empty()) return 1.0;
    if (query.empty() || notebook.empty()) return 0.0;

    std::vector<ScoredPair> pairs;
    pairs.reserve(query.size() * notebook.size());
    for (std::size_t i = 0; i < query.size(); ++i) {
        for (std::size_t j = 0; j < notebook.size(); ++j) {
            pairs.push_back({sim_table(query[i], notebook[j], config, counters), i, j});
        }
    }
    double sum = 0;
    for (double s : greedy_injection(std::move(pairs), query.size(), notebook.size())) sum += s;
    return sum / static_cast<double>(query.size());
}

double sim_library(const std::set<std::string>& a, const std::set<std::string>& b, MeasureCounters* counters) {
    if (counters) ++counters->library;
    return jaccard(a, b);
}

double sim_output(OutputKind a, OutputKind b, MeasureCounters* counters) {
    if (counters) ++counters->output;
    return a == b ? 1.0 : 0.0;
}

double sim_output_multiset(const std::vector<OutputKind>& a, const std::vector<OutputKind>& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::array<std::size_t, 3> count_a{}, count_b{};
    for (auto k : a) ++count_a[static_cast<std::size_t>(k)];
    for (auto k : b) ++count_b[static_cast<std::size_t>(k)];
    std::size_t lo = 0, hi = 0;
    for (std::size_t k = 0; k < 3; ++k) {
        lo += std::min(count_a[k], count_b[k]);
        hi += std::max(count_a[k], count_b[k]);
    }
    return static_cast<double>(lo) / static_cast<double>(hi);
}

SimCache::Key SimCache::make_key(MeasureTag tag, const ContentHash& a, const ContentHash& b) {
    return b < a ? Key{b, a, tag} : Key{a, b, tag};
}

std::optional<double> SimCache::lookup(MeasureTag tag, const ContentHash& a, const ContentHash& b) {
    const auto key = make_key(tag, a, b);
    std::lock_guard lock(mutex_);
    const auto it = index_.find(key);
    if (it == index_.end()) {
        ++misses_;
        return std::nullopt;
    }
    ++hits_;
    lru_.splice(lru_.begin(), lru_, it->second);
    return it->second->second;
}

void SimCache::store(MeasureTag tag, const ContentHash& a, const ContentHash& b, double value) {
    const auto key = make_key(tag, a, b);
    std::lock_guard lock(mutex_);
    if (const auto it = index_.find(key); it != index_.end()) {
        it->second->second = value;
        lru_.splice(lru_.begin(), lru_, it->second);
        return;
    }
    lru_.emplace_front(key, value);
    index_.emplace(key, lru_.begin());
    if (capacity_ > 0 && lru_.size() > capacity_) {
        index_.erase(lru_.back().first);
        lru_.pop_back();
    }
}

std::size_t SimCache::size() const {
    std::lock_guard lock(mutex_);
    return lru_.size();
}

double cached(MeasureTag tag, const ContentHash& a, const ContentHash& b, SimCache& cache,
              const std::function<double()>& compute) {
    if (auto hit = cache.lookup(tag, a, b)) return *hit;
    const double value = compute();
    cache.store(tag, a, b, value);
    return value;
}

}  // namespace nbsim
