#include "mucos/context_sampler.hpp"

#include "mucos/error.hpp"

#include <algorithm>

namespace mucos {

namespace {

std::size_t limit(const SamplerConfig& cfg, std::size_t k) {
    return cfg.mode == SamplingMode::full ? kUnbounded : k;
}

template <class T>
std::vector<T> prefix(std::span<const T> ranked, std::size_t k) {
    const std::size_t n = std::min(k, ranked.size());
    return {ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n)};
}

ContextSample entity_context(const GraphIndex& g, EntityId anchor, const SamplerConfig& cfg,
                             ContextKind kind) {
    cfg.validate();
    ContextSample s;
    s.kind = kind;
    s.anchor = static_cast<std::uint32_t>(anchor);
    if (cfg.skeleton_only) {
        g.check(anchor);
        return s;
    }
    s.relations = prefix(g.ranked_relations(anchor), limit(cfg, cfg.k_relations));
    s.entities = prefix(g.ranked_neighbors(anchor), limit(cfg, cfg.k_entities));
    s.scanned = s.relations.size() + s.entities.size();
    return s;
}

}  // namespace

void SamplerConfig::validate() const {
    if (mode == SamplingMode::full || skeleton_only) return;
    if (k_entities == 0 || k_relations == 0 || k_relation_context == 0)
        throw ConfigError("sampler k values must be >= 1 in sampled mode");
}

std::vector<ContextToken> ContextSample::aggregate() const {
    std::vector<ContextToken> out;
    out.reserve(size());
    for (RelationId r : relations) out.push_back(ContextToken::relation(r));
    for (EntityId e : entities) out.push_back(ContextToken::entity(e));
    return out;
}

ContextSample head_context(const GraphIndex& g, EntityId h, const SamplerConfig& cfg) {
    return entity_context(g, h, cfg, ContextKind::head);
}

ContextSample tail_context(const GraphIndex& g, EntityId t, const SamplerConfig& cfg) {
    return entity_context(g, t, cfg, ContextKind::tail);
}

ContextSample relation_context(const GraphIndex& g, RelationId r, const SamplerConfig& cfg) {
    cfg.validate();
    ContextSample s;
    s.kind = ContextKind::relation;
    s.anchor = static_cast<std::uint32_t>(r);
    if (cfg.skeleton_only) {
        g.check(r);
        return s;
    }
    s.entities = prefix(g.ranked_relation_entities(r), limit(cfg, cfg.k_relation_context));
    s.scanned = s.entities.size();
    return s;
}

std::string to_string(SamplingMode mode) {
    return mode == SamplingMode::full ? "full" : "sampled";
}

SamplingMode parse_sampling_mode(const std::string& text) {
    if (text == "sampled") return SamplingMode::sampled;
    if (text == "full") return SamplingMode::full;
    throw ConfigError("unknown sampling mode '" + text + "' (expected sampled|full)");
}

std::string to_string(ContextKind kind) {
    switch (kind) {
        case ContextKind::head: return "head";
        case ContextKind::relation: return "relation";
        case ContextKind::tail: return "tail";
    }
    return "?";
}

}  // namespace mucos
