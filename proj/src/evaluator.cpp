#include "mucos/evaluator.hpp"

#include "mucos/error.hpp"

#include <algorithm>
#include <thread>

namespace mucos {

std::string to_string(RankMode mode) { return mode == RankMode::raw ? "raw" : "filtered"; }

std::size_t RankResult::rank(RankMode mode) const {
    if (mode == RankMode::raw) return raw_rank;
    if (!filtered_rank) throw ContractError("filtered rank was not computed");
    return *filtered_rank;
}

std::size_t rank_of_truth(std::span<const double> dist, std::size_t truth,
                          const std::unordered_set<std::size_t>& excluded) {
    if (truth >= dist.size()) throw ContractError("truth index outside the distribution");
    if (excluded.contains(truth)) throw ContractError("the truth class cannot be excluded from ranking");
    const double target = dist[truth];
    std::size_t rank = 1;
    for (std::size_t c = 0; c < dist.size(); ++c) {
        if (c == truth || excluded.contains(c)) continue;
        if (dist[c] >= target) ++rank;
    }
    return rank;
}

MetricsReport compute_metrics(std::span<const std::size_t> ranks) {
    if (ranks.empty()) throw DataError("metrics are undefined for an empty rank list");
    MetricsReport m;
    m.n_queries = ranks.size();
    double reciprocal = 0.0;
    std::array<std::size_t, kHitsAt.size()> hit_counts{};
    for (std::size_t r : ranks) {
        if (r == 0) throw ContractError("ranks start at 1");
        reciprocal += 1.0 / static_cast<double>(r);
        for (std::size_t i = 0; i < kHitsAt.size(); ++i) hit_counts[i] += r <= kHitsAt[i] ? 1 : 0;
    }
    const auto n = static_cast<double>(ranks.size());
    m.mrr = reciprocal / n;
    for (std::size_t i = 0; i < kHitsAt.size(); ++i) m.hits[kHitsAt[i]] = static_cast<double>(hit_counts[i]) / n;
    return m;
}

FilterIndex::FilterIndex(const SplitDataset& splits) {
    for (const auto* split : {&splits.train, &splits.valid, &splits.test}) {
        for (const Triple& t : *split) {
            const auto h = static_cast<std::uint32_t>(t.head);
            const auto r = static_cast<std::uint32_t>(t.relation);
            const auto e = static_cast<std::uint32_t>(t.tail);
            relations_by_pair_[{h, e}].push_back(r);
            tails_by_head_relation_[{h, r}].push_back(e);
        }
    }
}

std::unordered_set<std::size_t> FilterIndex::competitors(Task task, const Triple& query) const {
    std::unordered_set<std::size_t> out;
    const auto h = static_cast<std::uint32_t>(query.head);
    const std::size_t truth = truth_of(task, query);
    const auto& map = task == Task::relation ? relations_by_pair_ : tails_by_head_relation_;
    const auto key = task == Task::relation ? std::pair{h, static_cast<std::uint32_t>(query.tail)}
                                            : std::pair{h, static_cast<std::uint32_t>(query.relation)};
    if (auto it = map.find(key); it != map.end()) {
        for (std::uint32_t c : it->second) {
            if (c != truth) out.insert(c);
        }
    }
    return out;
}

std::vector<MetricsReport> aggregate(std::span<const RankResult> ranks, Task task, const Vocabulary& vocab,
                                     const EvalConfig& cfg) {
    std::vector<std::pair<std::string, std::vector<const RankResult*>>> slices;
    slices.push_back({"general", {}});
    for (const RankResult& r : ranks) slices[0].second.push_back(&r);

    if (cfg.per_relation) {
        std::map<std::uint32_t, std::vector<const RankResult*>> by_relation;
        for (const RankResult& r : ranks) by_relation[static_cast<std::uint32_t>(r.query.relation)].push_back(&r);
        for (auto& [rel, members] : by_relation)
            slices.push_back({"relation-filtered:" + vocab.relation_label(static_cast<RelationId>(rel)), std::move(members)});
    }
    if (cfg.target_relation) {
        const auto rel = vocab.find_relation(*cfg.target_relation);
        if (!rel) throw ConfigError("unknown target relation '" + *cfg.target_relation + "'");
        if (!cfg.per_relation) {
            std::vector<const RankResult*> members;
            for (const RankResult& r : ranks) {
                if (r.query.relation == *rel) members.push_back(&r);
            }
            slices.push_back({"relation-filtered:" + *cfg.target_relation, std::move(members)});
        }
    }

    std::vector<RankMode> modes;
    if (cfg.raw) modes.push_back(RankMode::raw);
    if (cfg.filtered) modes.push_back(RankMode::filtered);

    std::vector<MetricsReport> reports;
    for (const auto& [name, members] : slices) {
        if (members.empty()) continue;
        for (RankMode mode : modes) {
            std::vector<std::size_t> values;
            values.reserve(members.size());
            for (const RankResult* r : members) values.push_back(r->rank(mode));
            MetricsReport m = compute_metrics(values);
            m.task = task;
            m.slice = name;
            m.mode = mode;
            reports.push_back(std::move(m));
        }
    }
    return reports;
}

EvaluationResult evaluate(const Scorer& scorer, std::span<const Triple> queries, Task task, const Dataset& data,
                          const EvalConfig& cfg) {
    if (queries.empty()) throw DataError("no queries to evaluate");
    if (!cfg.raw && !cfg.filtered) throw ConfigError("enable at least one of raw or filtered ranking");
    if (cfg.target_relation && !data.vocab.find_relation(*cfg.target_relation))
        throw ConfigError("unknown target relation '" + *cfg.target_relation + "'");

    std::optional<FilterIndex> filter;
    if (cfg.filtered) filter.emplace(data.splits);

    EvaluationResult result;
    result.ranks.resize(queries.size());
    const auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const Triple& q = queries[i];
            const auto dist = scorer.score(task, q);
            RankResult& r = result.ranks[i];
            r.query = q;
            r.task = task;
            r.raw_rank = rank_of_truth(dist, truth_of(task, q));
            if (filter) r.filtered_rank = rank_of_truth(dist, truth_of(task, q), filter->competitors(task, q));
        }
    };

    const std::size_t workers = std::clamp<std::size_t>(cfg.threads, 1, queries.size());
    if (workers == 1) {
        work(0, queries.size());
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        const std::size_t chunk = (queries.size() + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    work(std::min(queries.size(), w * chunk), std::min(queries.size(), (w + 1) * chunk));
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    result.reports = aggregate(result.ranks, task, data.vocab, cfg);
    return result;
}

}  // namespace mucos
