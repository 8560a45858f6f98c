#pragma once
// Synthetic graphs with known structure, used for learnability checks and
// benchmarks. Entities are labeled e0, e1, ... and relations r0, r1, ...

#include "mucos/kg_store.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace mucos {

struct SyntheticGraph {
    Vocabulary vocab;
    std::vector<Triple> triples;
};

// Entities are split into random clusters of `cluster_size`; the tail of
// (h, r) is a fixed function of (cluster of h, r), injective while
// clusters * relations <= entities. Every (h, r) pair occurs exactly once, so
// a held-out tail is recoverable only by recognizing the head's cluster from
// its neighborhood.
struct FunctionalGraphConfig {
    std::size_t entities = 200;
    std::size_t relations = 5;
    std::size_t cluster_size = 5;
    std::size_t train = 850;
    std::size_t valid = 50;
    std::size_t test = 100;
    std::uint64_t seed = 13;

    void validate() const;
};

struct FunctionalGraph {
    Dataset data;
    std::vector<std::size_t> cluster_of;  // by entity index
};

FunctionalGraph functional_graph(const FunctionalGraphConfig& cfg);

// Functional graph plus cluster markers: every member entity receives one
// "tag" triple from each marker entity of its cluster. Whole heads are held
// out, so valid/test heads never appear as the head of a training triple and
// their cluster is visible only through the markers in their neighborhood.
struct MarkedGraphConfig {
    std::size_t clusters = 40;
    std::size_t cluster_size = 5;
    std::size_t relations = 5;
    std::size_t markers_per_cluster = 2;
    std::size_t valid_heads_per_cluster = 1;
    std::size_t test_heads_per_cluster = 1;
    std::uint64_t seed = 17;

    void validate() const;
};

FunctionalGraph marked_graph(const MarkedGraphConfig& cfg);

// Circulant graph: node i heads one triple to each of i+1 .. i+out_degree
// (mod nodes), relation chosen by offset mod relations. Every node has
// 2 * out_degree incident triples and distinct neighbors when
// 2 * out_degree < nodes.
SyntheticGraph hub_graph(std::size_t nodes, std::size_t out_degree, std::size_t relations);

// `triples` distinct triples of one relation over `entities` nodes, every
// node taking part once triples >= entities.
SyntheticGraph single_relation_graph(std::size_t triples, std::size_t entities);

}  // namespace mucos
