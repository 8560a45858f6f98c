#pragma once
// Run configuration: a JSON tree merged over built-in defaults, then
// overridden by `key.path=value` assignments. Keys absent from the defaults
// are rejected, as are values whose JSON type differs from the default's.

#include "mucos/context_sampler.hpp"
#include "mucos/cost_model.hpp"
#include "mucos/encoder.hpp"
#include "mucos/evaluator.hpp"
#include "mucos/task.hpp"
#include "mucos/trainer.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mucos {

struct BenchSettings {
    std::string graph = "dataset";  // dataset | hub | single-relation
    std::size_t queries = 1000;
    std::size_t repetitions = 5;
    std::size_t warmup = 1;
    std::size_t threads = 1;
    bool end_to_end = false;
    std::size_t hub_nodes = 2000;
    std::size_t hub_out_degree = 100;
    std::size_t hub_relations = 5;
    std::size_t single_triples = 10000;
    std::size_t single_entities = 2000;
};

struct RunConfig {
    std::string data_dir;
    std::string output_dir;
    std::string checkpoint;  // defaults to <output_dir>/model.ckpt
    std::uint64_t seed = 42;
    Task task = Task::tail;
    SamplerConfig sampler;
    EncoderConfig encoder;
    TrainConfig train;
    EvalConfig eval;
    std::string eval_split = "test";
    std::size_t top_n = 10;
    CostInputs cost;
    bool cost_from_graph = false;
    BenchSettings bench;

    std::string checkpoint_path() const;
};

nlohmann::json default_config();

// Merges `user` over the defaults; throws ConfigError naming the offending key.
nlohmann::json merge_config(const nlohmann::json& user);
// Applies "a.b.c=value"; the value is parsed as JSON when possible, otherwise
// taken as a string.
void apply_override(nlohmann::json& resolved, const std::string& assignment);
// Sets the dotted `key` to `value` under the same checks as a file entry.
void set_config_value(nlohmann::json& resolved, const std::string& key, const nlohmann::json& value);

RunConfig resolve_config(const nlohmann::json& resolved);

// File (optional) plus overrides, fully resolved.
struct LoadedConfig {
    nlohmann::json tree;
    RunConfig run;
};
LoadedConfig load_config(const std::optional<std::string>& path, const std::vector<std::string>& overrides);

}  // namespace mucos
