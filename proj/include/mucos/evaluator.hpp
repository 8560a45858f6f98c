#pragma once
// Ranking metrics for relation and tail prediction.
//
// A query's rank is 1 + the number of competing classes scored at least as
// high as the truth (ties count against the truth). Filtered ranking removes
// competitors that complete some other known triple in any split.

#include "mucos/kg_store.hpp"
#include "mucos/task.hpp"

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

namespace mucos {

enum class RankMode { raw, filtered };

std::string to_string(RankMode mode);

inline constexpr std::array<std::size_t, 4> kHitsAt{1, 3, 5, 10};

struct RankResult {
    Triple query{};
    Task task = Task::tail;
    std::size_t raw_rank = 0;
    std::optional<std::size_t> filtered_rank;

    std::size_t rank(RankMode mode) const;
};

struct MetricsReport {
    Task task = Task::tail;
    std::string slice = "general";
    RankMode mode = RankMode::raw;
    std::size_t n_queries = 0;
    double mrr = 0.0;
    std::map<std::size_t, double> hits;
};

// Throws ContractError if `truth` is excluded or out of range.
std::size_t rank_of_truth(std::span<const double> dist, std::size_t truth,
                          const std::unordered_set<std::size_t>& excluded = {});

// MRR and Hits@{1,3,5,10}. Throws DataError on an empty list and
// ContractError on a zero rank.
MetricsReport compute_metrics(std::span<const std::size_t> ranks);

struct EvalConfig {
    bool raw = true;
    bool filtered = false;
    // Adds a slice restricted to test triples with this relation label.
    std::optional<std::string> target_relation;
    // Adds one slice per relation present in the queries.
    bool per_relation = false;
    std::size_t threads = 1;
};

struct EvaluationResult {
    std::vector<RankResult> ranks;
    std::vector<MetricsReport> reports;
};

// Known-triple lookup used for filtered ranking.
class FilterIndex {
public:
    explicit FilterIndex(const SplitDataset& splits);
    // Classes other than the truth that complete a known triple for this query.
    std::unordered_set<std::size_t> competitors(Task task, const Triple& query) const;

private:
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<std::uint32_t>> relations_by_pair_;
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<std::uint32_t>> tails_by_head_relation_;
};

// Scores and ranks every query, then aggregates the general slice plus any
// configured relation slices for each enabled mode.
EvaluationResult evaluate(const Scorer& scorer, std::span<const Triple> queries, Task task, const Dataset& data,
                          const EvalConfig& cfg);

// Re-aggregates a rank dump into reports (used to cross-check stored results).
std::vector<MetricsReport> aggregate(std::span<const RankResult> ranks, Task task, const Vocabulary& vocab,
                                     const EvalConfig& cfg);

}  // namespace mucos
