#pragma once
// Triple ingestion, vocabularies, and the immutable graph index.
//
// Files follow the common KG benchmark layout: one directory holding
// train.txt / valid.txt / test.txt, each line "head<TAB>relation<TAB>tail".
// Labels are kept verbatim. The vocabulary spans all three splits so that
// entities seen only in valid/test are still addressable (density 0), while
// the GraphIndex is built from the training split alone.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mucos {

enum class EntityId : std::uint32_t {};
enum class RelationId : std::uint32_t {};

constexpr std::size_t index_of(EntityId e) noexcept { return static_cast<std::size_t>(e); }
constexpr std::size_t index_of(RelationId r) noexcept { return static_cast<std::size_t>(r); }
constexpr EntityId entity_at(std::size_t i) noexcept { return static_cast<EntityId>(i); }
constexpr RelationId relation_at(std::size_t i) noexcept { return static_cast<RelationId>(i); }

struct Triple {
    EntityId head{};
    RelationId relation{};
    EntityId tail{};

    friend constexpr auto operator<=>(const Triple&, const Triple&) = default;
};

struct TripleHash {
    std::size_t operator()(const Triple& t) const noexcept {
        std::uint64_t x = (static_cast<std::uint64_t>(index_of(t.head)) << 40) ^
                          (static_cast<std::uint64_t>(index_of(t.relation)) << 20) ^
                          static_cast<std::uint64_t>(index_of(t.tail));
        x ^= x >> 33;
        x *= 0xff51afd7ed558ccdULL;
        x ^= x >> 33;
        return static_cast<std::size_t>(x);
    }
};

// A triple as read from disk, before vocabulary resolution.
struct LabeledTriple {
    std::string head;
    std::string relation;
    std::string tail;

    friend bool operator==(const LabeledTriple&, const LabeledTriple&) = default;
};

// Reads a tab-separated triple file. Blank lines are skipped; any other line
// must have exactly three fields. Throws ParseError naming the line.
std::vector<LabeledTriple> parse_triples(const std::string& path);
std::vector<LabeledTriple> parse_triples_text(std::string_view text,
                                              const std::string& source_name = "<memory>");

// Bijective label <-> dense id maps for entities and relations, ids assigned in
// first-seen order.
class Vocabulary {
public:
    EntityId add_entity(std::string_view label);
    RelationId add_relation(std::string_view label);

    EntityId entity_id(std::string_view label) const;
    RelationId relation_id(std::string_view label) const;
    std::optional<EntityId> find_entity(std::string_view label) const;
    std::optional<RelationId> find_relation(std::string_view label) const;

    const std::string& entity_label(EntityId e) const;
    const std::string& relation_label(RelationId r) const;

    std::size_t entity_count() const noexcept { return entities_.size(); }
    std::size_t relation_count() const noexcept { return relations_.size(); }
    const std::vector<std::string>& entity_labels() const noexcept { return entities_; }
    const std::vector<std::string>& relation_labels() const noexcept { return relations_; }

    void check(EntityId e) const;
    void check(RelationId r) const;

    Triple resolve(const LabeledTriple& t) const;

    // Order-sensitive content hash of both label lists.
    std::uint64_t hash() const;

private:
    std::vector<std::string> entities_;
    std::vector<std::string> relations_;
    std::unordered_map<std::string, std::uint32_t> entity_index_;
    std::unordered_map<std::string, std::uint32_t> relation_index_;
};

struct SplitDataset {
    std::vector<Triple> train;
    std::vector<Triple> valid;
    std::vector<Triple> test;
};

struct Dataset {
    Vocabulary vocab;
    SplitDataset splits;
};

// Builds the vocabulary over train, then valid, then test (in file order) and
// resolves every split. Throws DataError if two splits share a triple.
Dataset make_dataset(const std::vector<LabeledTriple>& train,
                     const std::vector<LabeledTriple>& valid,
                     const std::vector<LabeledTriple>& test);

// Loads <dir>/train.txt, valid.txt, test.txt. Missing valid/test files are
// treated as empty splits; a missing train.txt is an error.
Dataset load_dataset(const std::string& dir);

// Writes one split as tab-separated labels.
void write_triples(const std::string& path, const Vocabulary& vocab, std::span<const Triple> triples);
// Writes train.txt, valid.txt and test.txt under `dir`, creating it if needed.
void write_dataset(const std::string& dir, const Dataset& data);

void check_disjoint(const SplitDataset& splits);

struct RelationEdge {
    RelationId relation;
    EntityId entity;
};

struct EntityPair {
    EntityId head;
    EntityId tail;
};

// Immutable adjacency and density indexes over the training triples.
//
// Besides the raw adjacency (file order), the index keeps every neighborhood
// pre-ranked by score: distinct neighbor entities and distinct relations per
// entity, and distinct entities per relation. Ranking is score descending,
// id ascending, where an entity's score is its density and a relation's score
// is its triple frequency. Context sampling then reduces to taking a prefix.
class GraphIndex {
public:
    static GraphIndex build(std::span<const Triple> train, const Vocabulary& vocab);

    std::size_t entity_count() const noexcept { return entity_density_.size(); }
    std::size_t relation_count() const noexcept { return relation_frequency_.size(); }
    std::size_t triple_count() const noexcept { return triple_count_; }

    std::span<const RelationEdge> by_head(EntityId e) const;
    std::span<const RelationEdge> by_tail(EntityId e) const;
    std::span<const EntityPair> by_relation(RelationId r) const;

    // Number of triples in which e is the head plus number in which e is the
    // tail; a self-loop counts twice.
    std::size_t density(EntityId e) const;
    std::size_t relation_frequency(RelationId r) const;

    std::span<const std::size_t> entity_densities() const noexcept { return entity_density_; }
    std::span<const std::size_t> relation_frequencies() const noexcept { return relation_frequency_; }

    std::span<const EntityId> ranked_neighbors(EntityId e) const;
    std::span<const RelationId> ranked_relations(EntityId e) const;
    std::span<const EntityId> ranked_relation_entities(RelationId r) const;

    void check(EntityId e) const;
    void check(RelationId r) const;

private:
    template <class T>
    struct Csr {
        std::vector<std::size_t> offsets;
        std::vector<T> items;

        std::span<const T> row(std::size_t i) const {
            return {items.data() + offsets[i], offsets[i + 1] - offsets[i]};
        }
    };

    std::size_t triple_count_ = 0;
    std::vector<std::size_t> entity_density_;
    std::vector<std::size_t> relation_frequency_;
    Csr<RelationEdge> by_head_;
    Csr<RelationEdge> by_tail_;
    Csr<EntityPair> by_relation_;
    Csr<EntityId> ranked_neighbors_;
    Csr<RelationId> ranked_relations_;
    Csr<EntityId> ranked_relation_entities_;
};

struct GraphStats {
    std::size_t node_count = 0;
    std::size_t edge_count = 0;
    double avg_degree = 0.0;
    std::size_t relation_count = 0;
    double avg_relation_appearance = 0.0;
    double avg_density_input = 0.0;
};

struct StatsReport {
    GraphStats train;
    std::optional<GraphStats> valid;
    std::optional<GraphStats> test;
    GraphStats overall;
};

// Statistics of a bare triple list: nodes are distinct entities appearing in
// it, relations are distinct relations used. Throws DataError when empty.
// avg_density_input is left at avg_degree.
GraphStats triple_stats(std::span<const Triple> triples);

// Per-split and overall statistics. Train figures are read from the index.
// avg_density_input is the supplied value when present, otherwise avg_degree
// of the respective split.
StatsReport graph_stats(const GraphIndex& g, const SplitDataset& splits,
                        std::optional<double> avg_density_input = std::nullopt);

}  // namespace mucos
