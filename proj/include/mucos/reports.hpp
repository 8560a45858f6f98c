#pragma once
// Structured records and text tables for reports, plus the rank dump format.

#include "mucos/cost_model.hpp"
#include "mucos/evaluator.hpp"
#include "mucos/kg_store.hpp"
#include "mucos/trainer.hpp"

#include "json.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace mucos {

nlohmann::json to_json(const MetricsReport& m);
nlohmann::json to_json(const GraphStats& s);
nlohmann::json to_json(const CostReport& r);
nlohmann::json to_json(const BenchReport& r);
nlohmann::json to_json(const StrategyReport& r);
// `timed` adds wall_seconds; without it the record is reproducible.
nlohmann::json to_json(const EpochRecord& e, bool timed);
nlohmann::json to_json(const SamplerConfig& c);
// Inverse of to_json(SamplerConfig); validates the result.
SamplerConfig sampler_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrainConfig& c);

std::string format_metrics_table(const std::vector<MetricsReport>& reports);
std::string format_stats_table(const StatsReport& stats);
std::string format_cost_table(const CostReport& r);
std::string format_bench_table(const BenchReport& r);

// One JSON object per line: head, relation, tail labels, task, raw_rank and
// (when computed) filtered_rank.
void write_rank_dump(std::ostream& out, const std::vector<RankResult>& ranks, const Vocabulary& vocab);
std::vector<RankResult> read_rank_dump(std::istream& in, const Vocabulary& vocab);

}  // namespace mucos
