#include "mucos/run_config.hpp"

#include "mucos/checkpoint.hpp"
#include "mucos/error.hpp"
#include "mucos/reports.hpp"

#include <filesystem>
#include <fstream>

namespace mucos {

namespace {

bool same_kind(const nlohmann::json& a, const nlohmann::json& b) {
    if (a.is_number() && b.is_number()) return true;
    return a.type() == b.type();
}

void merge_into(nlohmann::json& base, const nlohmann::json& user, const std::string& path) {
    if (!user.is_object()) throw ConfigError("config section '" + (path.empty() ? "<root>" : path) + "' must be an object");
    for (const auto& [key, value] : user.items()) {
        const std::string here = path.empty() ? key : path + "." + key;
        if (!base.contains(key)) throw ConfigError("unknown config key '" + here + "'");
        nlohmann::json& slot = base[key];
        if (slot.is_object()) {
            merge_into(slot, value, here);
        } else {
            if (!same_kind(slot, value))
                throw ConfigError("config key '" + here + "' expects a " + std::string(slot.type_name()) + ", got " +
                                  value.type_name());
            if (slot.is_number_unsigned() && value.is_number_integer() && value.get<std::int64_t>() < 0)
                throw ConfigError("config key '" + here + "' must be non-negative");
            if (slot.is_number_integer() && value.is_number_float())
                throw ConfigError("config key '" + here + "' expects an integer");
            slot = value;
        }
    }
}

}  // namespace

std::string RunConfig::checkpoint_path() const {
    if (!checkpoint.empty()) return checkpoint;
    return (std::filesystem::path(output_dir) / "model.ckpt").string();
}

nlohmann::json default_config() {
    const SamplerConfig s;
    const EncoderConfig e;
    const TrainConfig t;
    const CostInputs c;
    const BenchSettings b;
    nlohmann::json train = to_json(t);
    train.erase("seed");
    return {
        {"data_dir", ""},
        {"output_dir", "runs/default"},
        {"checkpoint", ""},
        {"seed", 42u},
        {"task", "tail"},
        {"sampler", to_json(s)},
        {"encoder", to_json(e)},
        {"train", train},
        {"eval",
         {{"split", "test"},
          {"raw", true},
          {"filtered", false},
          {"target_relation", ""},
          {"per_relation", false},
          {"threads", 1u},
          {"top_n", 10u}}},
        {"cost",
         {{"avg_density", c.avg_density},
          {"avg_appearance", c.avg_appearance},
          {"n_e", c.n_e},
          {"n_r", c.n_r},
          {"from_graph", false}}},
        {"bench",
         {{"graph", b.graph},
          {"queries", b.queries},
          {"repetitions", b.repetitions},
          {"warmup", b.warmup},
          {"threads", b.threads},
          {"end_to_end", b.end_to_end},
          {"hub_nodes", b.hub_nodes},
          {"hub_out_degree", b.hub_out_degree},
          {"hub_relations", b.hub_relations},
          {"single_triples", b.single_triples},
          {"single_entities", b.single_entities}}},
    };
}

nlohmann::json merge_config(const nlohmann::json& user) {
    nlohmann::json base = default_config();
    merge_into(base, user, "");
    return base;
}

void apply_override(nlohmann::json& resolved, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
    const std::string text = assignment.substr(eq + 1);
    nlohmann::json value = nlohmann::json::parse(text, nullptr, false);
    if (value.is_discarded() || value.is_string()) {
        set_config_value(resolved, assignment.substr(0, eq), value.is_string() ? value : nlohmann::json(text));
        return;
    }
    nlohmann::json attempt = resolved;
    try {
        set_config_value(attempt, assignment.substr(0, eq), value);
    } catch (const ConfigError&) {
        // A label such as "123" is still a string when the key expects one.
        set_config_value(resolved, assignment.substr(0, eq), text);
        return;
    }
    resolved = std::move(attempt);
}

void set_config_value(nlohmann::json& resolved, const std::string& key, const nlohmann::json& value) {
    if (key.empty()) throw ConfigError("empty config key");
    nlohmann::json patch = value;
    std::size_t end = key.size();
    while (true) {
        const auto dot = key.rfind('.', end - 1);
        const std::string part = key.substr(dot == std::string::npos ? 0 : dot + 1,
                                            end - (dot == std::string::npos ? 0 : dot + 1));
        if (part.empty()) throw ConfigError("override key '" + key + "' is malformed");
        patch = nlohmann::json{{part, patch}};
        if (dot == std::string::npos) break;
        end = dot;
    }
    merge_into(resolved, patch, "");
}

RunConfig resolve_config(const nlohmann::json& j) {
    RunConfig r;
    try {
        r.data_dir = j.at("data_dir").get<std::string>();
        r.output_dir = j.at("output_dir").get<std::string>();
        r.checkpoint = j.at("checkpoint").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.task = parse_task(j.at("task").get<std::string>());

        r.sampler = sampler_config_from_json(j.at("sampler"));

        r.encoder = encoder_config_from_json(j.at("encoder"));

        const auto& t = j.at("train");
        r.train.learning_rate = t.at("learning_rate").get<double>();
        r.train.batch_size = t.at("batch_size").get<std::size_t>();
        r.train.epochs = t.at("epochs").get<std::size_t>();
        r.train.weight_decay = t.at("weight_decay").get<double>();
        r.train.beta1 = t.at("beta1").get<double>();
        r.train.beta2 = t.at("beta2").get<double>();
        r.train.adam_epsilon = t.at("adam_epsilon").get<double>();
        r.train.threads = t.at("threads").get<std::size_t>();
        r.train.seed = r.seed;
        r.train.validate();

        const auto& e = j.at("eval");
        r.eval_split = e.at("split").get<std::string>();
        if (r.eval_split != "test" && r.eval_split != "valid")
            throw ConfigError("eval.split must be 'test' or 'valid'");
        r.eval.raw = e.at("raw").get<bool>();
        r.eval.filtered = e.at("filtered").get<bool>();
        if (!r.eval.raw && !r.eval.filtered) throw ConfigError("enable eval.raw or eval.filtered");
        const auto target = e.at("target_relation").get<std::string>();
        if (!target.empty()) r.eval.target_relation = target;
        r.eval.per_relation = e.at("per_relation").get<bool>();
        r.eval.threads = e.at("threads").get<std::size_t>();
        r.top_n = e.at("top_n").get<std::size_t>();
        if (r.top_n == 0) throw ConfigError("eval.top_n must be >= 1");

        const auto& c = j.at("cost");
        r.cost.avg_density = c.at("avg_density").get<double>();
        r.cost.avg_appearance = c.at("avg_appearance").get<double>();
        r.cost.n_e = c.at("n_e").get<double>();
        r.cost.n_r = c.at("n_r").get<double>();
        r.cost_from_graph = c.at("from_graph").get<bool>();
        r.cost.validate();

        const auto& b = j.at("bench");
        r.bench.graph = b.at("graph").get<std::string>();
        if (r.bench.graph != "dataset" && r.bench.graph != "hub" && r.bench.graph != "single-relation")
            throw ConfigError("bench.graph must be dataset, hub or single-relation");
        r.bench.queries = b.at("queries").get<std::size_t>();
        r.bench.repetitions = b.at("repetitions").get<std::size_t>();
        r.bench.warmup = b.at("warmup").get<std::size_t>();
        r.bench.threads = b.at("threads").get<std::size_t>();
        r.bench.end_to_end = b.at("end_to_end").get<bool>();
        r.bench.hub_nodes = b.at("hub_nodes").get<std::size_t>();
        r.bench.hub_out_degree = b.at("hub_out_degree").get<std::size_t>();
        r.bench.hub_relations = b.at("hub_relations").get<std::size_t>();
        r.bench.single_triples = b.at("single_triples").get<std::size_t>();
        r.bench.single_entities = b.at("single_entities").get<std::size_t>();
        if (r.bench.queries == 0 || r.bench.repetitions == 0)
            throw ConfigError("bench.queries and bench.repetitions must be >= 1");
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
    if (!r.data_dir.empty() && !std::filesystem::is_directory(r.data_dir))
        throw ConfigError("data_dir '" + r.data_dir + "' does not exist");
    if (!r.checkpoint.empty() && !std::filesystem::exists(r.checkpoint))
        throw ConfigError("checkpoint '" + r.checkpoint + "' does not exist");
    return r;
}

LoadedConfig load_config(const std::optional<std::string>& path, const std::vector<std::string>& overrides) {
    nlohmann::json user = nlohmann::json::object();
    if (path) {
        std::ifstream in(*path);
        if (!in) throw ConfigError("cannot read config file '" + *path + "'");
        try {
            user = nlohmann::json::parse(in, nullptr, true, true);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("config file '" + *path + "': " + e.what());
        }
    }
    LoadedConfig out;
    out.tree = merge_config(user);
    for (const auto& o : overrides) apply_override(out.tree, o);
    out.run = resolve_config(out.tree);
    return out;
}

}  // namespace mucos
