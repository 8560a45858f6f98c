#pragma once
// Analytic context-cost comparison between full-neighborhood extraction and
// top-k sampled extraction, plus an empirical wall-clock benchmark.

#include "mucos/context_sampler.hpp"
#include "mucos/kg_store.hpp"
#include "mucos/model.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mucos {

struct CostInputs {
    double avg_density = 0.4326;
    double avg_appearance = 7008.89;
    double n_e = 15;  // head-context sampling size
    double n_r = 10;  // relation-context sampling size

    // Throws ConfigError on negative averages or divisors below 1.
    void validate() const;
};

struct CostReport {
    CostInputs inputs;
    double cab_cost = 0.0;
    double mucos_cost = 0.0;
    double speedup = 0.0;
};

// Full context: head and tail neighborhoods plus the whole relation context.
double cab_cost(const CostInputs& in);
// Sampled context: each term divided by its sampling size.
double mucos_cost(const CostInputs& in);
// cab_cost / mucos_cost; throws ContractError when mucos_cost is 0.
double speedup(const CostInputs& in);
CostReport cost_report(const CostInputs& in);

struct BenchConfig {
    SamplerConfig sampled;  // the full-mode side reuses everything but the mode
    std::size_t max_len = 128;
    std::size_t warmup = 1;
    std::size_t repetitions = 5;
    std::size_t threads = 1;
    // When set, encoder forward passes over the built tail inputs are timed
    // separately for both strategies.
    const ModelState* end_to_end = nullptr;
};

struct StrategyReport {
    std::string name;
    double qps_mean = 0.0;
    double qps_std = 0.0;
    double mean_context_tokens = 0.0;  // head + relation + tail, before truncation
    double mean_head_entities = 0.0;
    double mean_head_relations = 0.0;
    double mean_relation_context = 0.0;
    double mean_tail_context = 0.0;
    double mean_sequence_tokens = 0.0;  // both encoder inputs, after truncation
    std::size_t items_scanned = 0;      // per pass over the query list
    std::optional<double> end_to_end_qps;
};

struct BenchReport {
    std::size_t queries = 0;
    std::size_t node_count = 0;
    std::size_t edge_count = 0;
    double avg_degree = 0.0;
    StrategyReport full;
    StrategyReport sampled;
    double speedup = 0.0;  // sampled qps / full qps
    std::optional<double> end_to_end_speedup;
};

// For every query builds head, relation and tail contexts plus both encoder
// inputs, under full and sampled modes. Graph construction is not timed.
// Throws DataError on an empty query list.
BenchReport benchmark_contexts(const GraphIndex& g, std::span<const Triple> queries, const BenchConfig& cfg);

}  // namespace mucos
