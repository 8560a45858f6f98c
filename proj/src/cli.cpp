#include "mucos/cli.hpp"

#include "mucos/checkpoint.hpp"
#include "mucos/context_sampler.hpp"
#include "mucos/cost_model.hpp"
#include "mucos/error.hpp"
#include "mucos/evaluator.hpp"
#include "mucos/hashing.hpp"
#include "mucos/kg_store.hpp"
#include "mucos/model.hpp"
#include "mucos/reports.hpp"
#include "mucos/run_config.hpp"
#include "mucos/synthetic.hpp"
#include "mucos/trainer.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>

namespace mucos {

namespace fs = std::filesystem;
using nlohmann::json;

std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    std::iota(prev.begin(), prev.end(), std::size_t{0});
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::vector<std::string> nearest_labels(const std::vector<std::string>& labels, std::string_view query,
                                        std::size_t n) {
    std::vector<std::pair<std::size_t, const std::string*>> scored;
    scored.reserve(labels.size());
    for (const auto& l : labels) scored.emplace_back(edit_distance(l, query), &l);
    const auto less = [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first < b.first : *a.second < *b.second;
    };
    const std::size_t keep = std::min(n, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(), less);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < keep; ++i) out.push_back(*scored[i].second);
    return out;
}

namespace {

struct CommonOptions {
    std::string config;
    std::vector<std::string> sets;
    std::string data;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string task;
    std::optional<std::size_t> threads;
    std::string checkpoint;
    bool jsonl = false;
};

// Collects structured records; prints them as JSON lines when requested.
class Session {
public:
    Session(std::string command, std::ostream& out, bool jsonl)
        : command_(std::move(command)), out_(out), jsonl_(jsonl) {}

    void emit(json record) {
        if (jsonl_) out_ << record.dump() << '\n';
        records_.push_back(std::move(record));
    }
    void text(const std::string& s) {
        if (!jsonl_) out_ << s;
    }
    void artifact(const std::string& name) { artifacts_.push_back(name); }

    const std::string& command() const { return command_; }
    const std::vector<json>& records() const { return records_; }
    const std::vector<std::string>& artifacts() const { return artifacts_; }

private:
    std::string command_;
    std::ostream& out_;
    bool jsonl_;
    std::vector<json> records_;
    std::vector<std::string> artifacts_;
};

std::string fixed(double v, int digits) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(digits);
    s << v;
    return s.str();
}

LoadedConfig resolve(const CommonOptions& c, std::vector<std::string> extra = {}) {
    std::vector<std::string> overrides = c.sets;
    if (!c.data.empty()) overrides.push_back("data_dir=" + c.data);
    if (!c.out.empty()) overrides.push_back("output_dir=" + c.out);
    if (c.seed) overrides.push_back("seed=" + std::to_string(*c.seed));
    if (!c.task.empty()) overrides.push_back("task=" + c.task);
    if (!c.checkpoint.empty()) overrides.push_back("checkpoint=" + c.checkpoint);
    if (c.threads) {
        for (const char* k : {"train.threads", "eval.threads", "bench.threads"})
            overrides.push_back(std::string(k) + "=" + std::to_string(*c.threads));
    }
    for (auto& e : extra) overrides.push_back(std::move(e));
    return load_config(c.config.empty() ? std::nullopt : std::optional<std::string>(c.config), overrides);
}

Dataset require_dataset(const RunConfig& run) {
    if (run.data_dir.empty()) throw ConfigError("data_dir is required (use --data or set data_dir)");
    return load_dataset(run.data_dir);
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
    if (!out) throw Error("failed writing " + path.string());
}

json dataset_identity(const RunConfig& run, const Dataset* data) {
    if (run.data_dir.empty()) return nullptr;
    json files = json::object();
    for (const char* name : {"train.txt", "valid.txt", "test.txt"}) {
        const fs::path p = fs::path(run.data_dir) / name;
        if (fs::exists(p)) files[name] = to_hex(hash_file(p.string()));
    }
    json j{{"dir", run.data_dir}, {"files", files}};
    if (data) j["vocab_hash"] = to_hex(data->vocab.hash());
    return j;
}

// Writes <cmd>.config.json, <cmd>.jsonl and updates manifest.json.
void write_outputs(const Session& s, const LoadedConfig& cfg, const Dataset* data) {
    const fs::path dir(cfg.run.output_dir);
    fs::create_directories(dir);
    const std::string config_name = s.command() + ".config.json";
    const std::string records_name = s.command() + ".jsonl";
    write_text(dir / config_name, cfg.tree.dump(2) + "\n");
    std::string lines;
    for (const auto& r : s.records()) lines += r.dump() + "\n";
    write_text(dir / records_name, lines);

    json artifacts = json::object();
    for (const auto& name : s.artifacts()) artifacts[name] = to_hex(hash_file((dir / name).string()));
    artifacts[records_name] = to_hex(fnv1a64(lines));

    json manifest = json::object();
    const fs::path manifest_path = dir / "manifest.json";
    if (fs::exists(manifest_path)) {
        std::ifstream in(manifest_path);
        manifest = json::parse(in, nullptr, false);
        if (!manifest.is_object()) manifest = json::object();
    }
    manifest["format"] = "mucos-run";
    manifest["commands"][s.command()] = {{"config_hash", to_hex(fnv1a64(cfg.tree.dump()))},
                                         {"config", config_name},
                                         {"records", records_name},
                                         {"dataset", dataset_identity(cfg.run, data)},
                                         {"artifacts", artifacts}};
    write_text(manifest_path, manifest.dump(2) + "\n");
}

EntityId lookup_entity(const Vocabulary& v, const std::string& label) {
    if (auto id = v.find_entity(label)) return *id;
    std::string hint;
    for (const auto& n : nearest_labels(v.entity_labels(), label)) hint += (hint.empty() ? "" : ", ") + n;
    throw VocabularyError("unknown entity '" + label + "'; nearest matches: " + hint);
}

RelationId lookup_relation(const Vocabulary& v, const std::string& label) {
    if (auto id = v.find_relation(label)) return *id;
    std::string hint;
    for (const auto& n : nearest_labels(v.relation_labels(), label)) hint += (hint.empty() ? "" : ", ") + n;
    throw VocabularyError("unknown relation '" + label + "'; nearest matches: " + hint);
}

struct LoadedModel {
    Checkpoint ckpt;
    Task task;
    SamplerConfig sampler;
};

// Task and sampler come from the checkpoint so that inputs match training.
LoadedModel load_model(const RunConfig& run, const Vocabulary& vocab) {
    const std::string path = run.checkpoint_path();
    if (!fs::exists(path)) throw ConfigError("checkpoint '" + path + "' does not exist");
    LoadedModel m{load_checkpoint(path), run.task, run.sampler};
    if (m.ckpt.state.vocab_hash != vocab.hash())
        throw DataError("checkpoint vocabulary hash " + to_hex(m.ckpt.state.vocab_hash) +
                        " does not match dataset vocabulary hash " + to_hex(vocab.hash()));
    const json& meta = m.ckpt.metadata;
    if (meta.contains("task")) m.task = parse_task(meta.at("task").get<std::string>());
    if (meta.contains("sampler")) m.sampler = sampler_config_from_json(meta.at("sampler"));
    return m;
}

const std::vector<Triple>& split_of(const Dataset& data, const std::string& name) {
    return name == "valid" ? data.splits.valid : data.splits.test;
}

void emit_metrics(Session& s, const std::vector<MetricsReport>& reports) {
    for (const auto& r : reports) s.emit(to_json(r));
    s.text(format_metrics_table(reports));
}

int cmd_stats(const CommonOptions& c, Session& s) {
    const auto cfg = resolve(c);
    const auto data = require_dataset(cfg.run);
    const auto g = GraphIndex::build(data.splits.train, data.vocab);
    const auto stats = graph_stats(g, data.splits);
    const auto record = [&](const std::string& split, const GraphStats& st) {
        json j = to_json(st);
        j["type"] = "stats";
        j["split"] = split;
        s.emit(j);
    };
    record("train", stats.train);
    if (stats.valid) record("valid", *stats.valid);
    if (stats.test) record("test", *stats.test);
    record("overall", stats.overall);
    s.text(format_stats_table(stats));
    write_outputs(s, cfg, &data);
    return 0;
}

int cmd_train(const CommonOptions& c, Session& s) {
    const auto cfg = resolve(c);
    const RunConfig& run = cfg.run;
    const auto data = require_dataset(run);
    const auto g = GraphIndex::build(data.splits.train, data.vocab);
    const fs::path dir(run.output_dir);
    fs::create_directories(dir);

    std::string loss_log, timed_log;
    TrainOptions opts;
    opts.task = run.task;
    opts.train = run.train;
    opts.sampler = run.sampler;
    opts.on_epoch = [&](const EpochRecord& e) {
        const json untimed = to_json(e, false);
        loss_log += untimed.dump() + "\n";
        timed_log += to_json(e, true).dump() + "\n";
        s.emit(untimed);
        std::string line = "epoch " + std::to_string(e.epoch) + "  loss " + fixed(e.mean_loss, 6);
        if (e.validation) line += "  valid MRR " + fixed(e.validation->mrr, 4);
        s.text(line + "\n");
    };
    auto result = train(ModelState::initialize(run.encoder, data.vocab, run.seed), data, g, opts);

    Checkpoint ckpt{std::move(result.best),
                    {{"task", to_string(run.task)},
                     {"sampler", to_json(run.sampler)},
                     {"train", to_json(run.train)},
                     {"best_epoch", result.best_epoch},
                     {"config_hash", to_hex(fnv1a64(cfg.tree.dump()))}}};
    save_checkpoint((dir / "model.ckpt").string(), ckpt);
    write_text(dir / "train_loss.jsonl", loss_log);
    write_text(dir / "epochs.jsonl", timed_log);
    s.artifact("model.ckpt");
    s.artifact("train_loss.jsonl");
    s.artifact("epochs.jsonl");
    s.emit({{"type", "checkpoint"},
            {"path", (dir / "model.ckpt").string()},
            {"best_epoch", result.best_epoch},
            {"parameters", ckpt.state.params.parameter_count()},
            {"classes", ckpt.state.class_count(run.task)}});
    s.text("best epoch " + std::to_string(result.best_epoch) + ", checkpoint " + (dir / "model.ckpt").string() +
           "\n");

    const auto& held_out = split_of(data, run.eval_split);
    if (!held_out.empty()) {
        const ModelScorer scorer(ckpt.state, g, run.sampler);
        const auto eval = evaluate(scorer, held_out, run.task, data, run.eval);
        emit_metrics(s, eval.reports);
    }
    write_outputs(s, cfg, &data);
    return 0;
}

int cmd_evaluate(const CommonOptions& c, Session& s) {
    const auto cfg = resolve(c);
    const RunConfig& run = cfg.run;
    const auto data = require_dataset(run);
    const auto model = load_model(run, data.vocab);
    const auto& queries = split_of(data, run.eval_split);
    if (queries.empty()) throw DataError("split '" + run.eval_split + "' is empty");
    const auto g = GraphIndex::build(data.splits.train, data.vocab);
    const ModelScorer scorer(model.ckpt.state, g, model.sampler);
    const auto result = evaluate(scorer, queries, model.task, data, run.eval);

    const fs::path dir(run.output_dir);
    fs::create_directories(dir);
    std::ostringstream dump;
    write_rank_dump(dump, result.ranks, data.vocab);
    write_text(dir / "ranks.jsonl", dump.str());
    s.artifact("ranks.jsonl");
    emit_metrics(s, result.reports);
    write_outputs(s, cfg, &data);
    return 0;
}

int cmd_aggregate(const CommonOptions& c, const std::string& ranks_path, Session& s) {
    const auto cfg = resolve(c);
    const auto data = require_dataset(cfg.run);
    std::ifstream in(ranks_path);
    if (!in) throw ConfigError("cannot read rank dump '" + ranks_path + "'");
    const auto ranks = read_rank_dump(in, data.vocab);
    if (ranks.empty()) throw DataError("rank dump '" + ranks_path + "' is empty");
    const Task task = ranks.front().task;
    for (const auto& r : ranks)
        if (r.task != task) throw DataError("rank dump mixes tasks");
    emit_metrics(s, aggregate(ranks, task, data.vocab, cfg.run.eval));
    write_outputs(s, cfg, &data);
    return 0;
}

struct PredictArgs {
    std::string head, relation, tail;
    std::optional<std::size_t> top;
};

int cmd_predict(const CommonOptions& c, const PredictArgs& a, Session& s) {
    std::vector<std::string> extra;
    if (a.top) extra.push_back("eval.top_n=" + std::to_string(*a.top));
    const auto cfg = resolve(c, extra);
    const auto data = require_dataset(cfg.run);
    const auto model = load_model(cfg.run, data.vocab);
    const auto g = GraphIndex::build(data.splits.train, data.vocab);
    if (a.head.empty()) throw ConfigError("--head is required");
    const EntityId h = lookup_entity(data.vocab, a.head);

    std::vector<double> probs;
    if (model.task == Task::tail) {
        if (a.relation.empty()) throw ConfigError("tail prediction needs --relation");
        probs = predict_tail(model.ckpt.state, g, h, lookup_relation(data.vocab, a.relation), model.sampler);
    } else {
        if (a.tail.empty()) throw ConfigError("relation prediction needs --tail");
        probs = predict_relation(model.ckpt.state, g, h, lookup_entity(data.vocab, a.tail), model.sampler);
    }
    std::vector<std::size_t> order(probs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t n = std::min(cfg.run.top_n, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                      [&](std::size_t x, std::size_t y) { return probs[x] != probs[y] ? probs[x] > probs[y] : x < y; });

    std::ostringstream table;
    table << "rank  probability  label\n";
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t id = order[i];
        const std::string& label = model.task == Task::tail ? data.vocab.entity_label(entity_at(id))
                                                            : data.vocab.relation_label(relation_at(id));
        s.emit({{"type", "prediction"},
                {"task", to_string(model.task)},
                {"rank", i + 1},
                {"label", label},
                {"probability", probs[id]}});
        table << std::to_string(i + 1) << std::string(6 - std::min<std::size_t>(5, std::to_string(i + 1).size()), ' ')
              << fixed(probs[id], 6) << "     " << label << '\n';
    }
    s.text(table.str());
    return 0;
}

int cmd_cost(const CommonOptions& c, bool from_graph, const std::vector<std::string>& extra, Session& s) {
    auto overrides = extra;
    if (from_graph) overrides.push_back("cost.from_graph=true");
    const auto cfg = resolve(c, overrides);
    const RunConfig& run = cfg.run;

    json configured = to_json(cost_report(run.cost));
    configured["source"] = "configured";
    s.emit(configured);
    s.text(format_cost_table(cost_report(run.cost)));

    std::optional<Dataset> data;
    if (run.cost_from_graph) {
        data = require_dataset(run);
        const auto g = GraphIndex::build(data->splits.train, data->vocab);
        const auto stats = graph_stats(g, data->splits);
        CostInputs in = run.cost;
        in.avg_density = stats.train.avg_degree;
        in.avg_appearance = stats.train.avg_relation_appearance;
        const auto report = cost_report(in);
        json j = to_json(report);
        j["source"] = "graph";
        j["note"] = "avg_density replaced by the training graph's average degree (" + fixed(in.avg_density, 4) +
                    ", configured " + fixed(run.cost.avg_density, 4) + "); avg_appearance by its average relation " +
                    "appearance (" + fixed(in.avg_appearance, 2) + ", configured " +
                    fixed(run.cost.avg_appearance, 2) + ")";
        s.emit(j);
        s.text("\nfrom graph:\n" + format_cost_table(report) + "note: " + j["note"].get<std::string>() + "\n");
    }
    write_outputs(s, cfg, data ? &*data : nullptr);
    return 0;
}

std::vector<Triple> spread(const std::vector<Triple>& pool, std::size_t n) {
    if (n >= pool.size()) return pool;
    std::vector<Triple> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(pool[i * pool.size() / n]);
    return out;
}

int cmd_bench(const CommonOptions& c, const std::string& graph, Session& s) {
    std::vector<std::string> extra;
    if (!graph.empty()) extra.push_back("bench.graph=" + graph);
    const auto cfg = resolve(c, extra);
    const RunConfig& run = cfg.run;
    const BenchSettings& b = run.bench;

    std::optional<Dataset> data;
    SyntheticGraph synthetic;
    const Vocabulary* vocab = nullptr;
    const std::vector<Triple>* pool = nullptr;
    if (b.graph == "dataset") {
        data = require_dataset(run);
        vocab = &data->vocab;
        pool = &data->splits.train;
    } else {
        synthetic = b.graph == "hub" ? hub_graph(b.hub_nodes, b.hub_out_degree, b.hub_relations)
                                     : single_relation_graph(b.single_triples, b.single_entities);
        vocab = &synthetic.vocab;
        pool = &synthetic.triples;
    }
    const auto g = GraphIndex::build(*pool, *vocab);

    BenchConfig bc;
    bc.sampled = run.sampler;
    bc.max_len = run.encoder.max_seq_len;
    bc.warmup = b.warmup;
    bc.repetitions = b.repetitions;
    bc.threads = b.threads;
    std::optional<ModelState> state;
    if (b.end_to_end) {
        if (!run.checkpoint.empty()) {
            state = load_model(run, *vocab).ckpt.state;
        } else {
            state = ModelState::initialize(run.encoder, *vocab, run.seed);
        }
        bc.max_len = state->encoder_config.max_seq_len;
        bc.end_to_end = &*state;
    }
    const auto report = benchmark_contexts(g, spread(*pool, b.queries), bc);
    json j = to_json(report);
    j["graph"]["kind"] = b.graph;
    s.emit(j);
    s.text(format_bench_table(report));
    write_outputs(s, cfg, data ? &*data : nullptr);
    return 0;
}

struct SynthArgs {
    std::string kind = "functional";
    std::string dir;
    std::optional<std::uint64_t> seed;
    std::size_t nodes = 2000;
    std::size_t out_degree = 100;
    std::size_t relations = 5;
};

int cmd_synth(const SynthArgs& a, Session& s) {
    if (a.dir.empty()) throw ConfigError("--dir is required");
    Dataset data;
    if (a.kind == "functional") {
        FunctionalGraphConfig fc;
        if (a.seed) fc.seed = *a.seed;
        data = functional_graph(fc).data;
    } else if (a.kind == "marked") {
        MarkedGraphConfig mc;
        if (a.seed) mc.seed = *a.seed;
        data = marked_graph(mc).data;
    } else if (a.kind == "hub") {
        auto g = hub_graph(a.nodes, a.out_degree, a.relations);
        data.vocab = std::move(g.vocab);
        data.splits.train = std::move(g.triples);
    } else {
        throw ConfigError("unknown graph kind '" + a.kind + "' (functional, marked, hub)");
    }
    write_dataset(a.dir, data);
    s.emit({{"type", "synth"},
            {"kind", a.kind},
            {"dir", a.dir},
            {"entities", data.vocab.entity_count()},
            {"relations", data.vocab.relation_count()},
            {"train", data.splits.train.size()},
            {"valid", data.splits.valid.size()},
            {"test", data.splits.test.size()}});
    s.text("wrote " + a.kind + " graph to " + a.dir + ": " + std::to_string(data.splits.train.size()) + " train, " +
           std::to_string(data.splits.valid.size()) + " valid, " + std::to_string(data.splits.test.size()) +
           " test triples\n");
    return 0;
}

int cmd_context(const CommonOptions& c, const std::string& kind, const std::string& anchor, Session& s) {
    const auto cfg = resolve(c);
    const auto data = require_dataset(cfg.run);
    const auto g = GraphIndex::build(data.splits.train, data.vocab);
    const SamplerConfig& sc = cfg.run.sampler;
    ContextSample sample;
    if (kind == "head") {
        sample = head_context(g, lookup_entity(data.vocab, anchor), sc);
    } else if (kind == "tail") {
        sample = tail_context(g, lookup_entity(data.vocab, anchor), sc);
    } else if (kind == "relation") {
        sample = relation_context(g, lookup_relation(data.vocab, anchor), sc);
    } else {
        throw ConfigError("unknown context kind '" + kind + "' (head, tail, relation)");
    }
    json relations = json::array(), entities = json::array();
    std::ostringstream text;
    text << kind << " context of " << anchor << " (" << to_string(sc.mode) << ", " << sample.scanned
         << " index entries read)\n";
    text << "relations:\n";
    for (RelationId r : sample.relations) {
        relations.push_back({{"label", data.vocab.relation_label(r)}, {"frequency", g.relation_frequency(r)}});
        text << "  " << data.vocab.relation_label(r) << "  frequency " << g.relation_frequency(r) << '\n';
    }
    text << "entities:\n";
    for (EntityId e : sample.entities) {
        entities.push_back({{"label", data.vocab.entity_label(e)}, {"density", g.density(e)}});
        text << "  " << data.vocab.entity_label(e) << "  density " << g.density(e) << '\n';
    }
    s.emit({{"type", "context"},
            {"kind", kind},
            {"anchor", anchor},
            {"mode", to_string(sc.mode)},
            {"relations", relations},
            {"entities", entities},
            {"scanned", sample.scanned}});
    s.text(text.str());
    return 0;
}

std::string error_kind(const std::exception& e) {
    if (dynamic_cast<const ParseError*>(&e)) return "parse";
    if (dynamic_cast<const VocabularyError*>(&e)) return "vocabulary";
    if (dynamic_cast<const ConfigError*>(&e)) return "config";
    if (dynamic_cast<const DataError*>(&e)) return "data";
    if (dynamic_cast<const ContractError*>(&e)) return "contract";
    if (dynamic_cast<const Error*>(&e)) return "error";
    return "internal";
}

void add_common(CLI::App* app, CommonOptions& c) {
    app->add_option("-c,--config", c.config, "JSON config file");
    app->add_option("--set", c.sets, "Override a config value, key.path=value")->allow_extra_args(false);
    app->add_option("--data", c.data, "Dataset directory with train/valid/test.txt");
    app->add_option("--out", c.out, "Output directory");
    app->add_option("--seed", c.seed, "Random seed");
    app->add_option("--task", c.task, "relation or tail");
    app->add_option("--threads", c.threads, "Worker threads for training, evaluation and benchmarks");
    app->add_flag("--jsonl", c.jsonl, "Print line-delimited JSON records instead of tables");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Knowledge graph completion with sampled multi-context sequences", "mucos"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    CommonOptions common;
    std::string ranks_path, bench_graph, context_kind = "head", context_anchor;
    PredictArgs predict;
    SynthArgs synth;
    bool from_graph = false;
    std::optional<double> avg_density, avg_appearance, n_e, n_r;

    auto* stats = app.add_subcommand("stats", "Per-split and overall graph statistics");
    auto* train_cmd = app.add_subcommand("train", "Train one task and write the best-validation checkpoint");
    auto* eval_cmd = app.add_subcommand("evaluate", "Rank a split with a checkpoint and report MRR and Hits@k");
    auto* agg_cmd = app.add_subcommand("aggregate", "Recompute metrics from a rank dump");
    auto* predict_cmd = app.add_subcommand("predict", "Top-n predictions for one query");
    auto* cost_cmd = app.add_subcommand("cost", "Analytic context-cost comparison");
    auto* bench_cmd = app.add_subcommand("bench", "Time full versus sampled context extraction");
    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic dataset");
    auto* context_cmd = app.add_subcommand("context", "Show the context extracted for an anchor");

    for (auto* sub : {stats, train_cmd, eval_cmd, agg_cmd, predict_cmd, cost_cmd, bench_cmd, context_cmd})
        add_common(sub, common);
    for (auto* sub : {eval_cmd, predict_cmd, bench_cmd})
        sub->add_option("--checkpoint", common.checkpoint, "Checkpoint path (default <out>/model.ckpt)");

    agg_cmd->add_option("--ranks", ranks_path, "Rank dump written by evaluate")->required();

    predict_cmd->add_option("--head", predict.head, "Head entity label");
    predict_cmd->add_option("--relation", predict.relation, "Relation label (tail prediction)");
    predict_cmd->add_option("--tail", predict.tail, "Tail entity label (relation prediction)");
    predict_cmd->add_option("-n,--top", predict.top, "Number of classes to list");

    cost_cmd->add_flag("--from-graph", from_graph, "Use averages measured on the dataset's training graph");
    cost_cmd->add_option("--avg-density", avg_density);
    cost_cmd->add_option("--avg-appearance", avg_appearance);
    cost_cmd->add_option("--n-e", n_e, "Entity sample size");
    cost_cmd->add_option("--n-r", n_r, "Relation sample size");

    bench_cmd->add_option("--graph", bench_graph, "dataset, hub or single-relation");

    synth_cmd->add_option("--kind", synth.kind, "functional, marked or hub");
    synth_cmd->add_option("--dir", synth.dir, "Output dataset directory")->required();
    synth_cmd->add_option("--seed", synth.seed, "Generator seed");
    synth_cmd->add_option("--nodes", synth.nodes, "Hub graph node count");
    synth_cmd->add_option("--out-degree", synth.out_degree, "Hub graph out-degree");
    synth_cmd->add_option("--relations", synth.relations, "Hub graph relation count");
    synth_cmd->add_flag("--jsonl", common.jsonl, "Print line-delimited JSON records");

    context_cmd->add_option("--kind", context_kind, "head, tail or relation");
    context_cmd->add_option("--anchor", context_anchor, "Entity or relation label")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    auto* chosen = app.get_subcommands().front();
    Session session(chosen->get_name(), out, common.jsonl);
    try {
        if (chosen == stats) return cmd_stats(common, session);
        if (chosen == train_cmd) return cmd_train(common, session);
        if (chosen == eval_cmd) return cmd_evaluate(common, session);
        if (chosen == agg_cmd) return cmd_aggregate(common, ranks_path, session);
        if (chosen == predict_cmd) return cmd_predict(common, predict, session);
        if (chosen == cost_cmd) {
            std::vector<std::string> extra;
            const auto put = [&](const char* key, const std::optional<double>& v) {
                if (v) extra.push_back(std::string(key) + "=" + json(*v).dump());
            };
            put("cost.avg_density", avg_density);
            put("cost.avg_appearance", avg_appearance);
            put("cost.n_e", n_e);
            put("cost.n_r", n_r);
            return cmd_cost(common, from_graph, extra, session);
        }
        if (chosen == bench_cmd) return cmd_bench(common, bench_graph, session);
        if (chosen == synth_cmd) return cmd_synth(synth, session);
        if (chosen == context_cmd) return cmd_context(common, context_kind, context_anchor, session);
    } catch (const std::exception& e) {
        json record{{"type", "error"}, {"command", chosen->get_name()}, {"kind", error_kind(e)}, {"message", e.what()}};
        if (const auto* pe = dynamic_cast<const ParseError*>(&e)) {
            record["path"] = pe->path();
            record["line"] = pe->line();
        }
        if (common.jsonl) out << record.dump() << '\n';
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

}  // namespace mucos
