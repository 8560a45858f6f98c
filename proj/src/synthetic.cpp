#include "mucos/synthetic.hpp"

#include "mucos/error.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace mucos {

namespace {

Vocabulary labeled_vocab(std::size_t entities, std::size_t relations) {
    Vocabulary v;
    for (std::size_t i = 0; i < entities; ++i) v.add_entity("e" + std::to_string(i));
    for (std::size_t i = 0; i < relations; ++i) v.add_relation("r" + std::to_string(i));
    return v;
}

}  // namespace

void FunctionalGraphConfig::validate() const {
    if (entities == 0 || relations == 0) throw ConfigError("synthetic graph needs entities and relations");
    if (cluster_size == 0 || entities % cluster_size != 0)
        throw ConfigError("cluster_size must divide the entity count");
    if (train == 0) throw ConfigError("synthetic graph needs training triples");
    if (train + valid + test > entities * relations)
        throw ConfigError("only " + std::to_string(entities * relations) +
                          " distinct (head, relation) pairs exist; requested " +
                          std::to_string(train + valid + test) + " triples");
}

FunctionalGraph functional_graph(const FunctionalGraphConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);

    FunctionalGraph out;
    out.data.vocab = labeled_vocab(cfg.entities, cfg.relations);

    std::vector<std::size_t> perm(cfg.entities);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    out.cluster_of.resize(cfg.entities);
    for (std::size_t i = 0; i < cfg.entities; ++i) out.cluster_of[perm[i]] = i / cfg.cluster_size;

    const std::size_t clusters = cfg.entities / cfg.cluster_size;
    std::vector<std::size_t> targets;
    while (targets.size() < clusters * cfg.relations) {
        std::vector<std::size_t> round(cfg.entities);
        std::iota(round.begin(), round.end(), std::size_t{0});
        std::shuffle(round.begin(), round.end(), rng);
        targets.insert(targets.end(), round.begin(), round.end());
    }

    std::vector<Triple> all;
    all.reserve(cfg.entities * cfg.relations);
    for (std::size_t h = 0; h < cfg.entities; ++h) {
        for (std::size_t r = 0; r < cfg.relations; ++r) {
            const std::size_t t = targets[out.cluster_of[h] * cfg.relations + r];
            all.push_back({entity_at(h), relation_at(r), entity_at(t)});
        }
    }
    std::shuffle(all.begin(), all.end(), rng);
    auto& s = out.data.splits;
    auto it = all.begin();
    s.train.assign(it, it + static_cast<std::ptrdiff_t>(cfg.train));
    it += static_cast<std::ptrdiff_t>(cfg.train);
    s.valid.assign(it, it + static_cast<std::ptrdiff_t>(cfg.valid));
    it += static_cast<std::ptrdiff_t>(cfg.valid);
    s.test.assign(it, it + static_cast<std::ptrdiff_t>(cfg.test));
    return out;
}

void MarkedGraphConfig::validate() const {
    if (clusters == 0 || cluster_size == 0 || relations == 0 || markers_per_cluster == 0)
        throw ConfigError("marked graph sizes must be positive");
    if (valid_heads_per_cluster + test_heads_per_cluster >= cluster_size)
        throw ConfigError("every cluster needs at least one training head");
}

FunctionalGraph marked_graph(const MarkedGraphConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    const std::size_t members = cfg.clusters * cfg.cluster_size;
    const std::size_t markers = cfg.clusters * cfg.markers_per_cluster;

    FunctionalGraph out;
    Vocabulary& v = out.data.vocab;
    for (std::size_t i = 0; i < members; ++i) v.add_entity("e" + std::to_string(i));
    for (std::size_t i = 0; i < markers; ++i) v.add_entity("m" + std::to_string(i));
    for (std::size_t i = 0; i < cfg.relations; ++i) v.add_relation("r" + std::to_string(i));
    const RelationId tag = v.add_relation("tag");

    std::vector<std::size_t> perm(members);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    out.cluster_of.assign(members + markers, 0);
    std::vector<std::vector<std::size_t>> by_cluster(cfg.clusters);
    for (std::size_t i = 0; i < members; ++i) {
        out.cluster_of[perm[i]] = i / cfg.cluster_size;
        by_cluster[i / cfg.cluster_size].push_back(perm[i]);
    }
    for (std::size_t m = 0; m < markers; ++m) out.cluster_of[members + m] = m / cfg.markers_per_cluster;

    std::vector<std::size_t> targets;
    while (targets.size() < cfg.clusters * cfg.relations) {
        std::vector<std::size_t> round(members);
        std::iota(round.begin(), round.end(), std::size_t{0});
        std::shuffle(round.begin(), round.end(), rng);
        targets.insert(targets.end(), round.begin(), round.end());
    }

    auto& s = out.data.splits;
    for (std::size_t c = 0; c < cfg.clusters; ++c) {
        for (std::size_t j = 0; j < by_cluster[c].size(); ++j) {
            const std::size_t h = by_cluster[c][j];
            for (std::size_t k = 0; k < cfg.markers_per_cluster; ++k)
                s.train.push_back({entity_at(members + c * cfg.markers_per_cluster + k), tag, entity_at(h)});
            auto& split = j < cfg.valid_heads_per_cluster                                ? s.valid
                          : j < cfg.valid_heads_per_cluster + cfg.test_heads_per_cluster ? s.test
                                                                                         : s.train;
            for (std::size_t r = 0; r < cfg.relations; ++r)
                split.push_back({entity_at(h), relation_at(r), entity_at(targets[c * cfg.relations + r])});
        }
    }
    std::shuffle(s.train.begin(), s.train.end(), rng);
    return out;
}

SyntheticGraph hub_graph(std::size_t nodes, std::size_t out_degree, std::size_t relations) {
    if (nodes == 0 || relations == 0) throw ConfigError("hub graph needs nodes and relations");
    if (out_degree == 0 || out_degree >= nodes) throw ConfigError("hub graph out_degree must lie in [1, nodes)");
    SyntheticGraph g;
    g.vocab = labeled_vocab(nodes, relations);
    g.triples.reserve(nodes * out_degree);
    for (std::size_t i = 0; i < nodes; ++i) {
        for (std::size_t j = 1; j <= out_degree; ++j)
            g.triples.push_back({entity_at(i), relation_at(j % relations), entity_at((i + j) % nodes)});
    }
    return g;
}

SyntheticGraph single_relation_graph(std::size_t triples, std::size_t entities) {
    if (entities < 2) throw ConfigError("single-relation graph needs at least two entities");
    if (triples > entities * (entities - 1)) throw ConfigError("too many triples for the entity count");
    SyntheticGraph g;
    g.vocab = labeled_vocab(entities, 1);
    g.triples.reserve(triples);
    for (std::size_t idx = 0; idx < triples; ++idx) {
        const std::size_t h = idx % entities;
        const std::size_t offset = idx / entities + 1;
        g.triples.push_back({entity_at(h), relation_at(0), entity_at((h + offset) % entities)});
    }
    return g;
}

}  // namespace mucos
