#include "mucos/cost_model.hpp"

#include "mucos/error.hpp"
#include "mucos/tokens.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

namespace mucos {

void CostInputs::validate() const {
    if (avg_density < 0.0 || avg_appearance < 0.0) throw ConfigError("cost averages must be non-negative");
    if (!(n_e >= 1.0) || !(n_r >= 1.0)) throw ConfigError("sampling sizes n_e and n_r must be >= 1");
}

double cab_cost(const CostInputs& in) {
    return in.avg_density + in.avg_density + in.avg_appearance;
}

double mucos_cost(const CostInputs& in) {
    in.validate();
    return 2.0 * in.avg_density / in.n_e + in.avg_appearance / in.n_r;
}

double speedup(const CostInputs& in) {
    const double denom = mucos_cost(in);
    if (denom == 0.0) throw ContractError("speedup is undefined when the sampled cost is zero");
    return cab_cost(in) / denom;
}

CostReport cost_report(const CostInputs& in) {
    CostReport r;
    r.inputs = in;
    r.cab_cost = cab_cost(in);
    r.mucos_cost = mucos_cost(in);
    r.speedup = speedup(in);
    return r;
}

namespace {

struct PassTotals {
    std::size_t context_tokens = 0;
    std::size_t head_entities = 0;
    std::size_t head_relations = 0;
    std::size_t relation_context = 0;
    std::size_t tail_context = 0;
    std::size_t sequence_tokens = 0;
    std::size_t scanned = 0;
    // Keeps the optimizer from discarding the work.
    std::size_t checksum = 0;

    void add(const PassTotals& o) {
        context_tokens += o.context_tokens;
        head_entities += o.head_entities;
        head_relations += o.head_relations;
        relation_context += o.relation_context;
        tail_context += o.tail_context;
        sequence_tokens += o.sequence_tokens;
        scanned += o.scanned;
        checksum += o.checksum;
    }
};

PassTotals run_range(const GraphIndex& g, std::span<const Triple> queries, const SamplerConfig& sc,
                     const TokenVocab& vocab, std::size_t max_len, std::vector<std::vector<TokenId>>* tail_inputs) {
    PassTotals t;
    for (const Triple& q : queries) {
        const auto hc = head_context(g, q.head, sc);
        const auto rc = relation_context(g, q.relation, sc);
        const auto tc = tail_context(g, q.tail, sc);
        const auto h_agg = hc.aggregate();
        const auto r_agg = rc.aggregate();
        const auto t_agg = tc.aggregate();
        const auto rel_in = build_relation_input(q.head, h_agg, q.tail, t_agg, vocab, max_len);
        auto tail_in = build_tail_input(q.head, h_agg, q.relation, r_agg, vocab, max_len);
        t.context_tokens += hc.size() + rc.size() + tc.size();
        t.head_entities += hc.entities.size();
        t.head_relations += hc.relations.size();
        t.relation_context += rc.size();
        t.tail_context += tc.size();
        t.sequence_tokens += rel_in.size() + tail_in.size();
        t.scanned += hc.scanned + rc.scanned + tc.scanned;
        t.checksum += rel_in.back() + tail_in.back();
        if (tail_inputs) tail_inputs->push_back(std::move(tail_in));
    }
    return t;
}

PassTotals run_pass(const GraphIndex& g, std::span<const Triple> queries, const SamplerConfig& sc,
                    const TokenVocab& vocab, std::size_t max_len, std::size_t threads) {
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, queries.size());
    if (workers == 1) return run_range(g, queries, sc, vocab, max_len, nullptr);
    std::vector<PassTotals> partial(workers);
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    const std::size_t chunk = (queries.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                const std::size_t b = std::min(queries.size(), w * chunk);
                const std::size_t e = std::min(queries.size(), (w + 1) * chunk);
                partial[w] = run_range(g, queries.subspan(b, e - b), sc, vocab, max_len, nullptr);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    PassTotals total;
    for (const auto& p : partial) total.add(p);
    return total;
}

StrategyReport measure(const std::string& name, const GraphIndex& g, std::span<const Triple> queries,
                       const SamplerConfig& sc, const BenchConfig& cfg, std::size_t& sink) {
    const TokenVocab vocab(g.entity_count(), g.relation_count());
    for (std::size_t i = 0; i < cfg.warmup; ++i) sink += run_pass(g, queries, sc, vocab, cfg.max_len, cfg.threads).checksum;

    std::vector<double> qps;
    PassTotals last;
    for (std::size_t i = 0; i < cfg.repetitions; ++i) {
        const auto start = std::chrono::steady_clock::now();
        last = run_pass(g, queries, sc, vocab, cfg.max_len, cfg.threads);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        qps.push_back(static_cast<double>(queries.size()) / std::max(secs, 1e-12));
        sink += last.checksum;
    }

    StrategyReport r;
    r.name = name;
    double mean = 0.0;
    for (double x : qps) mean += x;
    mean /= static_cast<double>(qps.size());
    double var = 0.0;
    for (double x : qps) var += (x - mean) * (x - mean);
    r.qps_mean = mean;
    r.qps_std = qps.size() > 1 ? std::sqrt(var / static_cast<double>(qps.size() - 1)) : 0.0;

    const auto n = static_cast<double>(queries.size());
    r.mean_context_tokens = static_cast<double>(last.context_tokens) / n;
    r.mean_head_entities = static_cast<double>(last.head_entities) / n;
    r.mean_head_relations = static_cast<double>(last.head_relations) / n;
    r.mean_relation_context = static_cast<double>(last.relation_context) / n;
    r.mean_tail_context = static_cast<double>(last.tail_context) / n;
    r.mean_sequence_tokens = static_cast<double>(last.sequence_tokens) / n;
    r.items_scanned = last.scanned;

    if (cfg.end_to_end) {
        const ModelState& state = *cfg.end_to_end;
        const auto enc = state.encoder();
        const auto start = std::chrono::steady_clock::now();
        std::vector<std::vector<TokenId>> inputs;
        run_range(g, queries, sc, vocab, std::min(cfg.max_len, state.encoder_config.max_seq_len), &inputs);
        for (const auto& in : inputs) sink += static_cast<std::size_t>(predict(state, enc, Task::tail, in).size());
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        r.end_to_end_qps = n / std::max(secs, 1e-12);
    }
    return r;
}

}  // namespace

BenchReport benchmark_contexts(const GraphIndex& g, std::span<const Triple> queries, const BenchConfig& cfg) {
    if (queries.empty()) throw DataError("benchmark needs at least one query");
    if (cfg.repetitions == 0) throw ConfigError("benchmark repetitions must be >= 1");
    if (cfg.sampled.mode != SamplingMode::sampled) throw ConfigError("benchmark sampler must be in sampled mode");
    cfg.sampled.validate();
    if (cfg.end_to_end && (cfg.end_to_end->entity_count != g.entity_count() ||
                           cfg.end_to_end->relation_count != g.relation_count()))
        throw ConfigError("end-to-end model does not match the graph vocabulary");
    for (const Triple& q : queries) {
        g.check(q.head);
        g.check(q.relation);
        g.check(q.tail);
    }

    SamplerConfig full = cfg.sampled;
    full.mode = SamplingMode::full;

    BenchReport r;
    r.queries = queries.size();
    for (std::size_t d : g.entity_densities()) r.node_count += d > 0 ? 1 : 0;
    r.edge_count = g.triple_count();
    r.avg_degree = r.node_count ? static_cast<double>(r.edge_count) / static_cast<double>(r.node_count) : 0.0;

    std::size_t sink = 0;
    r.full = measure("full", g, queries, full, cfg, sink);
    r.sampled = measure("sampled", g, queries, cfg.sampled, cfg, sink);
    r.speedup = r.sampled.qps_mean / r.full.qps_mean;
    if (r.full.end_to_end_qps && r.sampled.end_to_end_qps)
        r.end_to_end_speedup = *r.sampled.end_to_end_qps / *r.full.end_to_end_qps;
    // Consumed so the timed loops cannot be elided.
    volatile std::size_t keep = sink;
    (void)keep;
    return r;
}

}  // namespace mucos
