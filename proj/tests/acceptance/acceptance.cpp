// Acceptance gate: one PASS/FAIL line per criterion. Pass criterion ids
// (1..10, S) as arguments to run a subset. Set MUCOS_KEGG50K_DIR to a
// directory holding the KEGG50k train/valid/test files to check its
// statistics directly.

#include "mucos/checkpoint.hpp"
#include "mucos/cli.hpp"
#include "mucos/context_sampler.hpp"
#include "mucos/cost_model.hpp"
#include "mucos/evaluator.hpp"
#include "mucos/kg_store.hpp"
#include "mucos/model.hpp"
#include "mucos/reports.hpp"
#include "mucos/synthetic.hpp"
#include "mucos/trainer.hpp"

#include "../support/oracles.hpp"

#include "json.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace mucos;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Records the first failure; later checks still run so the detail is complete.
struct Checker {
    Outcome out;
    void require(bool ok, const std::string& what) {
        if (!ok && out.pass) {
            out.pass = false;
            out.detail = what;
        }
    }
};

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("mucos_acceptance_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::vector<nlohmann::json> run_cli_records(std::vector<std::string> args, int& code) {
    args.insert(args.begin(), "mucos");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    std::vector<nlohmann::json> records;
    std::istringstream in(out.str());
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) records.push_back(nlohmann::json::parse(line));
    return records;
}

Outcome cost_model_exactness() {
    Checker c;
    const auto dir = scratch_dir("cost");
    int code = 0;
    const auto records = run_cli_records({"cost", "--out", dir.string(), "--jsonl"}, code);
    c.require(code == 0 && records.size() == 1, "cost command failed");
    if (!c.out.pass) return c.out;
    const auto& r = records[0];
    const double cab = r.at("cab_cost").get<double>();
    const double mucos = r.at("mucos_cost").get<double>();
    const double sp = r.at("speedup").get<double>();
    c.require(r.at("inputs").at("avg_density").get<double>() == 0.4326 &&
                  r.at("inputs").at("avg_appearance").get<double>() == 7008.89 &&
                  r.at("inputs").at("n_e").get<double>() == 15 && r.at("inputs").at("n_r").get<double>() == 10,
              "default inputs differ");
    c.require(near(cab, 7009.75, 0.01), "cab_cost " + fmt(cab));
    c.require(near(mucos, 700.95, 0.01), "mucos_cost " + fmt(mucos));
    c.require(near(sp, 10.00, 0.01), "speedup " + fmt(sp));
    const auto lib = cost_report(CostInputs{});
    c.require(lib.cab_cost == cab && lib.mucos_cost == mucos && lib.speedup == sp, "tool and library disagree");
    fs::remove_all(dir);
    if (c.out.pass)
        c.out.detail = "cab " + fmt(cab) + ", sampled " + fmt(mucos) + ", speedup " + fmt(sp, 5);
    return c.out;
}

GraphStats oracle_stats(const std::vector<Triple>& triples) {
    std::set<EntityId> nodes;
    std::set<RelationId> relations;
    for (const Triple& t : triples) {
        nodes.insert(t.head);
        nodes.insert(t.tail);
        relations.insert(t.relation);
    }
    GraphStats s;
    s.node_count = nodes.size();
    s.edge_count = triples.size();
    s.relation_count = relations.size();
    s.avg_degree = static_cast<double>(triples.size()) / static_cast<double>(nodes.size());
    s.avg_relation_appearance = static_cast<double>(triples.size()) / static_cast<double>(relations.size());
    return s;
}

bool same_stats(const GraphStats& a, const GraphStats& b) {
    return a.node_count == b.node_count && a.edge_count == b.edge_count && a.relation_count == b.relation_count &&
           a.avg_degree == b.avg_degree && a.avg_relation_appearance == b.avg_relation_appearance;
}

Outcome graph_stats_reproduction() {
    Checker c;
    if (const char* dir = std::getenv("MUCOS_KEGG50K_DIR")) {
        const auto data = load_dataset(dir);
        const auto g = GraphIndex::build(data.splits.train, data.vocab);
        const auto s = graph_stats(g, data.splits).train;
        c.require(s.node_count == 16201, "train nodes " + std::to_string(s.node_count));
        c.require(s.edge_count == 57080, "train triples " + std::to_string(s.edge_count));
        c.require(s.relation_count == 9, "relations " + std::to_string(s.relation_count));
        c.require(near(s.avg_degree, 3.52, 0.01), "avg degree " + fmt(s.avg_degree));
        c.require(near(s.avg_relation_appearance, 6342.22, 0.01),
                  "avg relation appearance " + fmt(s.avg_relation_appearance));
        if (c.out.pass)
            c.out.detail = "KEGG50k: " + std::to_string(s.node_count) + " nodes, " + std::to_string(s.edge_count) +
                           " triples, " + std::to_string(s.relation_count) + " relations, avg degree " +
                           fmt(s.avg_degree, 2) + ", avg relation appearance " + fmt(s.avg_relation_appearance, 2);
        return c.out;
    }
    std::mt19937_64 rng(2024);
    std::size_t checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        auto rg = oracle::random_graph(rng, 2 + rng() % 49, 1 + rng() % 8, 3 + rng() % 300);
        std::shuffle(rg.triples.begin(), rg.triples.end(), rng);
        SplitDataset splits;
        for (const Triple& t : rg.triples) {
            const auto u = rng() % 10;
            (u < 8 || splits.train.empty() ? splits.train : u == 8 ? splits.valid : splits.test).push_back(t);
        }
        const auto g = GraphIndex::build(splits.train, rg.vocab);
        const auto report = graph_stats(g, splits);
        c.require(same_stats(report.train, oracle_stats(splits.train)), "train stats differ, trial " +
                                                                             std::to_string(trial));
        c.require(same_stats(report.overall, oracle_stats(rg.triples)), "overall stats differ, trial " +
                                                                            std::to_string(trial));
        c.require(report.valid.has_value() == !splits.valid.empty(), "valid split presence");
        if (report.valid) c.require(same_stats(*report.valid, oracle_stats(splits.valid)), "valid stats differ");
        if (report.test) c.require(same_stats(*report.test, oracle_stats(splits.test)), "test stats differ");
        ++checked;
    }
    if (c.out.pass)
        c.out.detail = "KEGG50k not supplied; " + std::to_string(checked) +
                       " random graphs match the brute-force statistics exactly";
    return c.out;
}

constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

SamplerConfig sampler_with(std::size_t k) {
    SamplerConfig s;
    s.k_entities = s.k_relations = s.k_relation_context = k;
    return s;
}

template <class Id, class Score>
void check_truncation(Checker& c, const std::vector<Id>& kept, const std::vector<Id>& full, std::size_t k,
                      Score score, const std::string& where) {
    const std::set<Id> kept_set(kept.begin(), kept.end());
    const std::set<Id> full_set(full.begin(), full.end());
    c.require(kept_set.size() == kept.size(), where + ": duplicate in sample");
    c.require(std::includes(full_set.begin(), full_set.end(), kept_set.begin(), kept_set.end()),
              where + ": sample not a subset of the full context");
    c.require(kept.size() == std::min(k, full_set.size()), where + ": sample size off bound");
    std::size_t min_kept = kUnbounded, max_dropped = 0;
    bool dropped = false;
    for (Id id : kept) min_kept = std::min(min_kept, score(id));
    for (Id id : full_set) {
        if (kept_set.count(id)) continue;
        dropped = true;
        max_dropped = std::max(max_dropped, score(id));
    }
    c.require(!dropped || min_kept >= max_dropped, where + ": dropped a higher-scored member");
}

Outcome sampler_correctness() {
    Checker c;
    std::mt19937_64 rng(3);
    std::size_t anchors = 0;
    const SamplerConfig full = SamplerConfig::full();
    for (int trial = 0; trial < 1000 && c.out.pass; ++trial) {
        const auto rg = oracle::random_graph(rng, 1 + rng() % 50, 1 + rng() % 6, rng() % 200);
        const auto g = GraphIndex::build(rg.triples, rg.vocab);
        const auto rebuilt = GraphIndex::build(rg.triples, rg.vocab);
        const auto dens = [&](EntityId e) { return oracle::density(rg.triples, e); };
        const auto freq = [&](RelationId r) { return oracle::relation_frequency(rg.triples, r); };
        for (std::size_t k : {std::size_t{1}, std::size_t{2}, std::size_t{5}, kUnbounded}) {
            const auto cfg = sampler_with(k);
            for (std::size_t i = 0; i < rg.vocab.entity_count(); ++i) {
                const EntityId e = entity_at(i);
                const auto n = oracle::neighborhood(rg.triples, e);
                for (auto kind : {ContextKind::head, ContextKind::tail}) {
                    const auto extract = [&](const GraphIndex& idx, const SamplerConfig& sc) {
                        return kind == ContextKind::head ? head_context(idx, e, sc) : tail_context(idx, e, sc);
                    };
                    const auto s = extract(g, cfg);
                    const auto f = extract(g, full);
                    const std::string where = to_string(kind) + " context, trial " + std::to_string(trial);
                    c.require(std::set<EntityId>(f.entities.begin(), f.entities.end()) == n.entities &&
                                  std::set<RelationId>(f.relations.begin(), f.relations.end()) == n.relations,
                              where + ": full mode differs from the brute-force neighborhood");
                    check_truncation(c, s.entities, f.entities, k, dens, where + " entities");
                    check_truncation(c, s.relations, f.relations, k, freq, where + " relations");
                    if (k == kUnbounded) c.require(s == f || (s.entities == f.entities && s.relations == f.relations),
                                                   where + ": unbounded k differs from full mode");
                    c.require(s == extract(g, cfg) && s == extract(rebuilt, cfg), where + ": not deterministic");
                    ++anchors;
                }
            }
            for (std::size_t r = 0; r < rg.vocab.relation_count(); ++r) {
                const RelationId rel = relation_at(r);
                const auto s = relation_context(g, rel, cfg);
                const auto f = relation_context(g, rel, full);
                const std::string where = "relation context, trial " + std::to_string(trial);
                c.require(std::set<EntityId>(f.entities.begin(), f.entities.end()) ==
                              oracle::relation_entities(rg.triples, rel),
                          where + ": full mode differs from the brute-force entity set");
                check_truncation(c, s.entities, f.entities, k, dens, where);
                c.require(s.relations.empty(), where + ": relation context holds relations");
                if (k == kUnbounded) c.require(s.entities == f.entities, where + ": unbounded k differs");
                c.require(s == relation_context(rebuilt, rel, cfg), where + ": not deterministic");
                ++anchors;
            }
        }
    }
    if (c.out.pass) c.out.detail = "1000 graphs, " + std::to_string(anchors) + " anchor/k combinations";
    return c.out;
}

Outcome density_oracle() {
    Checker c;
    std::mt19937_64 rng(4);
    std::size_t entities = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto rg = oracle::random_graph(rng, 1 + rng() % 50, 1 + rng() % 6, rng() % 200);
        const auto g = GraphIndex::build(rg.triples, rg.vocab);
        std::size_t total = 0;
        for (std::size_t i = 0; i < rg.vocab.entity_count(); ++i) {
            const std::size_t d = g.density(entity_at(i));
            c.require(d == oracle::density(rg.triples, entity_at(i)),
                      "density mismatch, trial " + std::to_string(trial));
            total += d;
            ++entities;
        }
        c.require(total == 2 * rg.triples.size(), "density sum != 2|T|, trial " + std::to_string(trial));
    }
    if (c.out.pass) c.out.detail = std::to_string(entities) + " entities over 1000 graphs";
    return c.out;
}

EncoderConfig tiny_encoder() {
    EncoderConfig e;
    e.d_model = 8;
    e.n_layers = 1;
    e.n_heads = 1;
    e.ff_dim = 16;
    e.max_seq_len = 32;
    return e;
}

Outcome gradient_check_criterion() {
    Checker c;
    std::mt19937_64 rng(5);
    const auto rg = oracle::random_graph(rng, 12, 3, 40);
    const auto g = GraphIndex::build(rg.triples, rg.vocab);
    const auto state = ModelState::initialize(tiny_encoder(), rg.vocab, 11);
    double worst = 0.0;
    std::string worst_tensor;
    std::size_t checked = 0;
    for (Task task : {Task::relation, Task::tail}) {
        for (std::size_t i = 0; i < 6; ++i) {
            const auto ex = make_example(task, g, rg.triples[i * 5], SamplerConfig{}, state.token_vocab(), 32);
            const auto report = gradient_check(state, task, ex, 25, 100 + i);
            checked += report.checked;
            if (report.max_relative_error > worst) {
                worst = report.max_relative_error;
                worst_tensor = report.worst_tensor;
            }
        }
    }
    c.require(worst < 1e-4, "max relative error " + std::to_string(worst) + " in " + worst_tensor);
    if (c.out.pass)
        c.out.detail = "max relative error " + std::to_string(worst) + " over " + std::to_string(checked) +
                       " entries (d_model 8, 1 layer, 1 head)";
    return c.out;
}

Outcome softmax_and_metrics() {
    Checker c;
    std::mt19937_64 rng(6);
    const auto rg = oracle::random_graph(rng, 30, 4, 120);
    const auto g = GraphIndex::build(rg.triples, rg.vocab);
    const auto state = ModelState::initialize(tiny_encoder(), rg.vocab, 12);
    std::size_t distributions = 0;
    double worst = 0.0;
    const auto check_dist = [&](const std::vector<double>& p) {
        double s = 0.0;
        for (double x : p) {
            c.require(x >= 0.0 && std::isfinite(x), "negative or non-finite probability");
            s += x;
        }
        worst = std::max(worst, std::abs(s - 1.0));
        ++distributions;
    };
    ModelState randomized = state;
    std::normal_distribution<double> noise(0.0, 1.0);
    for (auto* m : {&randomized.params.relation_weight, &randomized.params.tail_weight})
        for (Eigen::Index i = 0; i < m->size(); ++i) m->data()[i] = noise(rng);
    for (const ModelState* s : {&state, static_cast<const ModelState*>(&randomized)}) {
        for (const Triple& t : rg.triples) {
            check_dist(predict_relation(*s, g, t.head, t.tail, SamplerConfig{}));
            check_dist(predict_tail(*s, g, t.head, t.relation, SamplerConfig{}));
        }
    }
    c.require(worst <= 1e-6, "distribution sum off by " + std::to_string(worst));

    const std::vector<std::size_t> ranks{1, 2, 4};
    const auto m = compute_metrics(ranks);
    c.require(near(m.mrr, 0.5833, 1e-4), "MRR " + fmt(m.mrr));
    c.require(near(m.hits.at(1), 0.3333, 1e-4), "Hits@1 " + fmt(m.hits.at(1)));
    c.require(near(m.hits.at(3), 0.6667, 1e-4), "Hits@3 " + fmt(m.hits.at(3)));
    c.require(m.hits.at(10) == 1.0, "Hits@10 " + fmt(m.hits.at(10)));

    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<std::size_t> fuzz(1 + rng() % 50);
        for (auto& r : fuzz) r = 1 + rng() % 30;
        const auto f = compute_metrics(fuzz);
        double prev = 0.0;
        for (std::size_t k : kHitsAt) {
            c.require(f.hits.at(k) >= prev, "Hits@k decreased in k");
            prev = f.hits.at(k);
        }
        c.require(near(f.mrr, oracle::mrr(fuzz), 1e-12), "MRR differs from the definition");
    }
    if (c.out.pass)
        c.out.detail = std::to_string(distributions) + " distributions within " + fmt(worst, 12) +
                       " of 1; [1,2,4] -> MRR " + fmt(m.mrr) + ", Hits@1/3/10 " + fmt(m.hits.at(1)) + "/" +
                       fmt(m.hits.at(3)) + "/" + fmt(m.hits.at(10));
    return c.out;
}

EncoderConfig learnability_encoder() {
    EncoderConfig e;
    e.d_model = 64;
    e.n_layers = 2;
    e.n_heads = 4;
    e.ff_dim = 128;
    e.max_seq_len = 128;
    e.dropout = 0.1;
    e.n_segments = 4;
    return e;
}

TrainConfig learnability_training(std::size_t epochs) {
    TrainConfig t;
    t.learning_rate = 1e-3;
    t.batch_size = 16;
    t.epochs = epochs;
    return t;
}

double held_out_mrr(const FunctionalGraph& fg, Task task, const SamplerConfig& sampler, std::size_t epochs,
                    std::size_t& best_epoch) {
    const auto& data = fg.data;
    const auto g = GraphIndex::build(data.splits.train, data.vocab);
    TrainOptions opts;
    opts.task = task;
    opts.train = learnability_training(epochs);
    opts.sampler = sampler;
    const auto result = train(ModelState::initialize(learnability_encoder(), data.vocab, 1), data, g, opts);
    best_epoch = result.best_epoch;
    const ModelScorer scorer(result.best, g, sampler);
    return evaluate(scorer, data.splits.test, task, data, {}).reports.at(0).mrr;
}

Outcome learnability() {
    Checker c;
    const auto start = std::chrono::steady_clock::now();
    const auto fg = functional_graph({});
    std::size_t tail_epoch = 0, relation_epoch = 0;
    const double tail = held_out_mrr(fg, Task::tail, SamplerConfig{}, 50, tail_epoch);
    const double relation = held_out_mrr(fg, Task::relation, SamplerConfig{}, 50, relation_epoch);
    const double minutes = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / 60.0;
    c.require(tail >= 0.5, "tail MRR " + fmt(tail));
    c.require(relation >= 0.8, "relation MRR " + fmt(relation));
    c.require(minutes < 15.0, "took " + fmt(minutes, 1) + " minutes");
    const auto& s = fg.data.splits;
    c.out.detail = (c.out.pass ? "" : c.out.detail + "; ") + "tail MRR " + fmt(tail) + " (best epoch " +
                   std::to_string(tail_epoch) + "), relation MRR " + fmt(relation) + " (best epoch " +
                   std::to_string(relation_epoch) + "), " + std::to_string(fg.data.vocab.entity_count()) +
                   " entities, " + std::to_string(s.train.size()) + "/" + std::to_string(s.valid.size()) + "/" +
                   std::to_string(s.test.size()) + " triples, " + fmt(minutes, 1) + " min";
    return c.out;
}

Outcome negative_sample_freedom() {
    Checker c;
    FunctionalGraphConfig fc;
    fc.entities = 60;
    fc.relations = 3;
    fc.cluster_size = 3;
    fc.train = 150;
    fc.valid = 10;
    fc.test = 20;
    const auto fg = functional_graph(fc);
    const auto& data = fg.data;
    const auto g = GraphIndex::build(data.splits.train, data.vocab);
    std::size_t consumed = 0;
    for (Task task : {Task::relation, Task::tail}) {
        std::map<std::size_t, std::multiset<Triple>> per_epoch;
        TrainOptions opts;
        opts.task = task;
        opts.train.epochs = 3;
        opts.train.learning_rate = 1e-3;
        const auto state = ModelState::initialize(tiny_encoder(), data.vocab, 2);
        opts.on_example = [&](std::size_t epoch, const TrainingExample& ex) {
            per_epoch[epoch].insert(ex.source);
            c.require(ex.label == truth_of(task, ex.source), "label is not the triple's own class");
            const auto rebuilt =
                make_example(task, g, ex.source, opts.sampler, state.token_vocab(), state.encoder_config.max_seq_len);
            c.require(rebuilt.input_tokens == ex.input_tokens, "input differs from the observed triple's input");
            ++consumed;
        };
        train(state, data, g, opts);
        const std::multiset<Triple> expected(data.splits.train.begin(), data.splits.train.end());
        c.require(per_epoch.size() == 3, "observer missed an epoch");
        for (const auto& [epoch, seen] : per_epoch)
            c.require(seen == expected, "epoch " + std::to_string(epoch) + " consumed something besides the train set");
    }
    if (c.out.pass)
        c.out.detail = std::to_string(consumed) + " examples over 2 tasks x 3 epochs, each an observed train triple; " +
                       "0 synthesized negatives";
    return c.out;
}

Outcome sampling_benefit() {
    Checker c;
    const auto hub = hub_graph(2000, 100, 5);
    const auto g = GraphIndex::build(hub.triples, hub.vocab);
    std::vector<Triple> queries;
    for (std::size_t i = 0; i < 500; ++i) queries.push_back(hub.triples[i * hub.triples.size() / 500]);
    BenchConfig cfg;
    cfg.repetitions = 5;
    cfg.warmup = 1;
    const auto r = benchmark_contexts(g, queries, cfg);
    double density = 0.0;
    for (std::size_t d : g.entity_densities()) density += static_cast<double>(d);
    density /= static_cast<double>(g.entity_count());
    const double expected = density / static_cast<double>(cfg.sampled.k_entities);
    const double measured = r.full.mean_head_entities / r.sampled.mean_head_entities;
    const double qps_gain = r.sampled.qps_mean / r.full.qps_mean;
    c.require(r.avg_degree >= 100.0, "average degree " + fmt(r.avg_degree));
    c.require(cfg.sampled.k_entities == 15 && cfg.sampled.k_relation_context == 10, "k values not at defaults");
    c.require(qps_gain >= 2.0, "throughput gain " + fmt(qps_gain, 2));
    c.require(std::abs(measured - expected) <= 0.2 * expected,
              "context ratio " + fmt(measured, 2) + " vs degree/k " + fmt(expected, 2));
    c.out.detail = (c.out.pass ? "" : c.out.detail + "; ") + "avg degree " + fmt(r.avg_degree, 1) +
                   ", throughput " + fmt(qps_gain, 1) + "x (" + fmt(r.sampled.qps_mean, 0) + " vs " +
                   fmt(r.full.qps_mean, 0) + " q/s), head context " + fmt(r.full.mean_head_entities, 1) + " -> " +
                   fmt(r.sampled.mean_head_entities, 1) + " entities, ratio " + fmt(measured, 2) +
                   " vs incident degree/k " + fmt(expected, 2);
    return c.out;
}

bool bit_equal(const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

Outcome round_trips() {
    Checker c;
    FunctionalGraphConfig fc;
    fc.entities = 60;
    fc.relations = 3;
    fc.cluster_size = 3;
    fc.train = 150;
    fc.valid = 10;
    fc.test = 20;
    const auto fg = functional_graph(fc);
    const auto& data = fg.data;
    const auto g = GraphIndex::build(data.splits.train, data.vocab);
    TrainOptions opts;
    opts.task = Task::tail;
    opts.train.epochs = 2;
    opts.train.learning_rate = 1e-3;
    auto trained = train(ModelState::initialize(tiny_encoder(), data.vocab, 3), data, g, opts).best;

    const auto dir = scratch_dir("roundtrip");
    const std::string path = (dir / "model.ckpt").string();
    save_checkpoint(path, {trained, {{"task", "tail"}}});
    const auto loaded = load_checkpoint(path).state;
    const auto before = trained.params.tensors();
    const auto after = loaded.params.tensors();
    c.require(before.size() == after.size(), "tensor count changed");
    for (std::size_t i = 0; i < before.size() && i < after.size(); ++i)
        c.require(before[i].name == after[i].name && bit_equal(*before[i].value, *after[i].value),
                  "tensor " + before[i].name + " changed");
    c.require(loaded.step == trained.step && loaded.vocab_hash == trained.vocab_hash, "header fields changed");
    std::size_t compared = 0;
    for (const auto* split : {&data.splits.train, &data.splits.test}) {
        for (const Triple& t : *split) {
            c.require(bit_equal(predict_tail(trained, g, t.head, t.relation, opts.sampler),
                                predict_tail(loaded, g, t.head, t.relation, opts.sampler)) &&
                          bit_equal(predict_relation(trained, g, t.head, t.tail, opts.sampler),
                                    predict_relation(loaded, g, t.head, t.tail, opts.sampler)),
                      "prediction changed after reload");
            ++compared;
        }
    }

    EvalConfig ec;
    ec.filtered = true;
    ec.per_relation = true;
    ec.target_relation = data.vocab.relation_label(relation_at(0));
    const ModelScorer scorer(loaded, g, opts.sampler);
    const auto result = evaluate(scorer, data.splits.test, Task::tail, data, ec);
    std::stringstream dump;
    write_rank_dump(dump, result.ranks, data.vocab);
    const auto reread = read_rank_dump(dump, data.vocab);
    const auto again = aggregate(reread, Task::tail, data.vocab, ec);
    c.require(again.size() == result.reports.size(), "report count differs after re-aggregation");
    for (std::size_t i = 0; i < again.size() && i < result.reports.size(); ++i) {
        c.require(again[i].slice == result.reports[i].slice && again[i].mode == result.reports[i].mode &&
                      again[i].n_queries == result.reports[i].n_queries &&
                      std::bit_cast<std::uint64_t>(again[i].mrr) == std::bit_cast<std::uint64_t>(result.reports[i].mrr) &&
                      again[i].hits == result.reports[i].hits,
                  "re-aggregated " + again[i].slice + " differs");
    }
    fs::remove_all(dir);
    if (c.out.pass)
        c.out.detail = std::to_string(before.size()) + " tensors and " + std::to_string(compared) +
                       " query predictions bit-identical after reload; " + std::to_string(again.size()) +
                       " reports re-aggregated exactly from the rank dump (general MRR " +
                       fmt(result.reports.at(0).mrr, 6) + ")";
    return c.out;
}

Outcome context_sensitivity() {
    Checker c;
    const auto fg = marked_graph({});
    SamplerConfig skeleton;
    skeleton.skeleton_only = true;
    std::size_t full_epoch = 0, skeleton_epoch = 0;
    const double full = held_out_mrr(fg, Task::tail, SamplerConfig{}, 30, full_epoch);
    const double bare = held_out_mrr(fg, Task::tail, skeleton, 30, skeleton_epoch);
    c.require(full > bare, "full-context MRR not above skeleton-only");
    c.out.detail = (c.out.pass ? "" : c.out.detail + "; ") + "held-out tail MRR with contexts " + fmt(full) +
                   " vs skeleton only " + fmt(bare) + " on the marked graph";
    return c.out;
}

struct Criterion {
    std::string id;
    std::string title;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria{
        {"1", "cost-model exactness", cost_model_exactness},
        {"2", "graph statistics", graph_stats_reproduction},
        {"3", "sampler correctness", sampler_correctness},
        {"4", "density oracle", density_oracle},
        {"5", "gradient check", gradient_check_criterion},
        {"6", "softmax and metrics arithmetic", softmax_and_metrics},
        {"7", "desk-scale learnability", learnability},
        {"8", "negative-sample freedom", negative_sample_freedom},
        {"9", "empirical sampling benefit", sampling_benefit},
        {"10", "round-trips", round_trips},
        {"S", "context sensitivity (supplementary)", context_sensitivity},
    };
    const std::set<std::string> only(argv + 1, argv + argc);
    int failures = 0;
    for (const auto& cr : criteria) {
        if (!only.empty() && !only.count(cr.id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = cr.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s  %-3s %-36s %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", cr.id.c_str(), cr.title.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
