#pragma once
// Head, relation and tail context extraction.
//
// A head (or tail) context is the set of distinct relations and distinct
// neighbor entities around an anchor entity, taken over incoming and outgoing
// training triples. A relation context is the set of distinct entities that
// occur in triples of that relation. In sampled mode each set is cut to its k
// best members: entities by density, relations by triple frequency, ties by
// ascending id. Full mode keeps the entire neighborhood (the unsampled
// baseline) and otherwise shares every step, so the two modes differ only in
// truncation.

#include "mucos/kg_store.hpp"
#include "mucos/ranking.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace mucos {

enum class SamplingMode { sampled, full };

struct SamplerConfig {
    std::size_t k_entities = 15;
    std::size_t k_relations = 15;
    std::size_t k_relation_context = 10;
    SamplingMode mode = SamplingMode::sampled;
    // Ablation switch: every context comes back empty, leaving only the
    // skeleton tokens in encoder inputs.
    bool skeleton_only = false;

    // Throws ConfigError if any k is zero in sampled mode.
    void validate() const;

    static SamplerConfig full() { return {.mode = SamplingMode::full}; }
};

enum class ContextKind { head, relation, tail };

// One element of an aggregated context sequence.
struct ContextToken {
    enum class Kind : std::uint8_t { entity, relation };
    Kind kind;
    std::uint32_t id;

    static ContextToken entity(EntityId e) { return {Kind::entity, static_cast<std::uint32_t>(e)}; }
    static ContextToken relation(RelationId r) { return {Kind::relation, static_cast<std::uint32_t>(r)}; }

    friend bool operator==(const ContextToken&, const ContextToken&) = default;
};

struct ContextSample {
    ContextKind kind = ContextKind::head;
    std::uint32_t anchor = 0;
    std::vector<RelationId> relations;  // always empty for relation contexts
    std::vector<EntityId> entities;
    // Index entries read to produce this sample.
    std::size_t scanned = 0;

    // Relations followed by entities, each block in ranked order.
    std::vector<ContextToken> aggregate() const;
    std::size_t size() const noexcept { return relations.size() + entities.size(); }

    friend bool operator==(const ContextSample&, const ContextSample&) = default;
};

ContextSample head_context(const GraphIndex& g, EntityId h, const SamplerConfig& cfg);
ContextSample relation_context(const GraphIndex& g, RelationId r, const SamplerConfig& cfg);
ContextSample tail_context(const GraphIndex& g, EntityId t, const SamplerConfig& cfg);

std::string to_string(SamplingMode mode);
SamplingMode parse_sampling_mode(const std::string& text);
std::string to_string(ContextKind kind);

}  // namespace mucos
