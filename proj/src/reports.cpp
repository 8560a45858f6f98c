#include "mucos/reports.hpp"

#include "mucos/error.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace mucos {

namespace {

std::string fixed(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string lpad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

nlohmann::json hits_json(const std::map<std::size_t, double>& hits) {
    nlohmann::json h = nlohmann::json::object();
    for (const auto& [k, v] : hits) h[std::to_string(k)] = v;
    return h;
}

}  // namespace

nlohmann::json to_json(const MetricsReport& m) {
    return {{"type", "metrics"},       {"task", to_string(m.task)}, {"slice", m.slice}, {"mode", to_string(m.mode)},
            {"n_queries", m.n_queries}, {"mrr", m.mrr},              {"hits", hits_json(m.hits)}};
}

nlohmann::json to_json(const GraphStats& s) {
    return {{"node_count", s.node_count},
            {"edge_count", s.edge_count},
            {"avg_degree", s.avg_degree},
            {"relation_count", s.relation_count},
            {"avg_relation_appearance", s.avg_relation_appearance},
            {"avg_density_input", s.avg_density_input}};
}

nlohmann::json to_json(const CostReport& r) {
    return {{"type", "cost"},
            {"cab_cost", r.cab_cost},
            {"mucos_cost", r.mucos_cost},
            {"speedup", r.speedup},
            {"inputs",
             {{"avg_density", r.inputs.avg_density},
              {"avg_appearance", r.inputs.avg_appearance},
              {"n_e", r.inputs.n_e},
              {"n_r", r.inputs.n_r}}}};
}

nlohmann::json to_json(const StrategyReport& r) {
    nlohmann::json j{{"name", r.name},
                     {"qps_mean", r.qps_mean},
                     {"qps_std", r.qps_std},
                     {"mean_context_tokens", r.mean_context_tokens},
                     {"mean_head_entities", r.mean_head_entities},
                     {"mean_head_relations", r.mean_head_relations},
                     {"mean_relation_context", r.mean_relation_context},
                     {"mean_tail_context", r.mean_tail_context},
                     {"mean_sequence_tokens", r.mean_sequence_tokens},
                     {"items_scanned", r.items_scanned}};
    if (r.end_to_end_qps) j["end_to_end_qps"] = *r.end_to_end_qps;
    return j;
}

nlohmann::json to_json(const BenchReport& r) {
    nlohmann::json j{{"type", "bench"},
                     {"queries", r.queries},
                     {"graph", {{"nodes", r.node_count}, {"edges", r.edge_count}, {"avg_degree", r.avg_degree}}},
                     {"full", to_json(r.full)},
                     {"sampled", to_json(r.sampled)},
                     {"speedup", r.speedup}};
    if (r.end_to_end_speedup) j["end_to_end_speedup"] = *r.end_to_end_speedup;
    return j;
}

nlohmann::json to_json(const EpochRecord& e, bool timed) {
    nlohmann::json j{{"type", "epoch"}, {"epoch", e.epoch}, {"mean_loss", e.mean_loss}, {"examples", e.examples}};
    if (e.validation) {
        j["validation"] = {{"mrr", e.validation->mrr}, {"hits", hits_json(e.validation->hits)}};
    }
    if (timed) j["wall_seconds"] = e.wall_seconds;
    return j;
}

nlohmann::json to_json(const SamplerConfig& c) {
    return {{"mode", to_string(c.mode)},
            {"k_entities", c.k_entities},
            {"k_relations", c.k_relations},
            {"k_relation_context", c.k_relation_context},
            {"skeleton_only", c.skeleton_only}};
}

SamplerConfig sampler_config_from_json(const nlohmann::json& j) {
    SamplerConfig c;
    try {
        c.mode = parse_sampling_mode(j.at("mode").get<std::string>());
        c.k_entities = j.at("k_entities").get<std::size_t>();
        c.k_relations = j.at("k_relations").get<std::size_t>();
        c.k_relation_context = j.at("k_relation_context").get<std::size_t>();
        c.skeleton_only = j.at("skeleton_only").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid sampler settings: ") + e.what());
    }
    c.validate();
    return c;
}

nlohmann::json to_json(const TrainConfig& c) {
    return {{"learning_rate", c.learning_rate}, {"batch_size", c.batch_size}, {"epochs", c.epochs},
            {"weight_decay", c.weight_decay},   {"beta1", c.beta1},           {"beta2", c.beta2},
            {"adam_epsilon", c.adam_epsilon},   {"seed", c.seed},             {"threads", c.threads}};
}

std::string format_metrics_table(const std::vector<MetricsReport>& reports) {
    std::ostringstream out;
    out << pad("task", 10) << pad("slice", 32) << pad("mode", 10) << lpad("N", 8) << lpad("MRR", 9);
    for (std::size_t k : kHitsAt) out << lpad("H@" + std::to_string(k), 9);
    out << '\n';
    for (const auto& m : reports) {
        out << pad(to_string(m.task), 10) << pad(m.slice, 32) << pad(to_string(m.mode), 10)
            << lpad(std::to_string(m.n_queries), 8) << lpad(fixed(m.mrr), 9);
        for (std::size_t k : kHitsAt) out << lpad(fixed(m.hits.at(k)), 9);
        out << '\n';
    }
    return out.str();
}

std::string format_stats_table(const StatsReport& stats) {
    std::ostringstream out;
    out << pad("split", 10) << lpad("nodes", 10) << lpad("triples", 10) << lpad("avg_deg", 10)
        << lpad("relations", 11) << lpad("avg_rel_app", 14) << '\n';
    const auto row = [&](const std::string& name, const GraphStats& s) {
        out << pad(name, 10) << lpad(std::to_string(s.node_count), 10) << lpad(std::to_string(s.edge_count), 10)
            << lpad(fixed(s.avg_degree, 2), 10) << lpad(std::to_string(s.relation_count), 11)
            << lpad(fixed(s.avg_relation_appearance, 2), 14) << '\n';
    };
    row("train", stats.train);
    if (stats.valid) row("valid", *stats.valid);
    if (stats.test) row("test", *stats.test);
    row("overall", stats.overall);
    return out.str();
}

std::string format_cost_table(const CostReport& r) {
    std::ostringstream out;
    out << "avg_density     " << fixed(r.inputs.avg_density) << '\n'
        << "avg_appearance  " << fixed(r.inputs.avg_appearance, 2) << '\n'
        << "n_e / n_r       " << r.inputs.n_e << " / " << r.inputs.n_r << '\n'
        << "full cost       " << fixed(r.cab_cost, 2) << '\n'
        << "sampled cost    " << fixed(r.mucos_cost, 2) << '\n'
        << "speedup         " << fixed(r.speedup, 2) << '\n';
    return out.str();
}

std::string format_bench_table(const BenchReport& r) {
    std::ostringstream out;
    out << "graph: " << r.node_count << " nodes, " << r.edge_count << " triples, avg degree " << fixed(r.avg_degree, 2)
        << ", " << r.queries << " queries\n";
    out << pad("strategy", 10) << lpad("qps", 14) << lpad("std", 12) << lpad("ctx/query", 12) << lpad("head_ent", 10)
        << lpad("rel_ctx", 10) << lpad("seq/query", 11) << lpad("scanned", 12) << '\n';
    for (const StrategyReport* s : {&r.full, &r.sampled}) {
        out << pad(s->name, 10) << lpad(fixed(s->qps_mean, 1), 14) << lpad(fixed(s->qps_std, 1), 12)
            << lpad(fixed(s->mean_context_tokens, 2), 12) << lpad(fixed(s->mean_head_entities, 2), 10)
            << lpad(fixed(s->mean_relation_context, 2), 10) << lpad(fixed(s->mean_sequence_tokens, 2), 11)
            << lpad(std::to_string(s->items_scanned), 12) << '\n';
    }
    out << "speedup (sampled/full qps): " << fixed(r.speedup, 2) << '\n';
    if (r.end_to_end_speedup) out << "end-to-end speedup with encoder: " << fixed(*r.end_to_end_speedup, 2) << '\n';
    return out.str();
}

void write_rank_dump(std::ostream& out, const std::vector<RankResult>& ranks, const Vocabulary& vocab) {
    for (const RankResult& r : ranks) {
        nlohmann::json j{{"head", vocab.entity_label(r.query.head)},
                         {"relation", vocab.relation_label(r.query.relation)},
                         {"tail", vocab.entity_label(r.query.tail)},
                         {"task", to_string(r.task)},
                         {"raw_rank", r.raw_rank}};
        if (r.filtered_rank) j["filtered_rank"] = *r.filtered_rank;
        out << j.dump() << '\n';
    }
}

std::vector<RankResult> read_rank_dump(std::istream& in, const Vocabulary& vocab) {
    std::vector<RankResult> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            RankResult r;
            r.query = {vocab.entity_id(j.at("head").get<std::string>()),
                       vocab.relation_id(j.at("relation").get<std::string>()),
                       vocab.entity_id(j.at("tail").get<std::string>())};
            r.task = parse_task(j.at("task").get<std::string>());
            r.raw_rank = j.at("raw_rank").get<std::size_t>();
            if (j.contains("filtered_rank")) r.filtered_rank = j.at("filtered_rank").get<std::size_t>();
            out.push_back(r);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("<rank dump>", lineno, e.what());
        }
    }
    return out;
}

}  // namespace mucos
