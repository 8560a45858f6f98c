#include "mucos/error.hpp"
#include "mucos/synthetic.hpp"

#include <gtest/gtest.h>

#include <map>
#include <set>

using namespace mucos;

TEST(FunctionalGraph, TailIsAFunctionOfClusterAndRelation) {
    const auto fg = functional_graph({});
    const auto& s = fg.data.splits;
    EXPECT_EQ(s.train.size(), 850u);
    EXPECT_EQ(s.valid.size(), 50u);
    EXPECT_EQ(s.test.size(), 100u);
    EXPECT_EQ(fg.data.vocab.entity_count(), 200u);
    EXPECT_EQ(fg.data.vocab.relation_count(), 5u);
    EXPECT_NO_THROW(check_disjoint(s));

    std::map<std::pair<std::size_t, RelationId>, EntityId> rule;
    std::set<std::pair<EntityId, RelationId>> pairs;
    std::map<EntityId, std::set<RelationId>> relations_into;
    for (const auto* split : {&s.train, &s.valid, &s.test}) {
        for (const Triple& t : *split) {
            const auto key = std::pair{fg.cluster_of[static_cast<std::size_t>(t.head)], t.relation};
            const auto [it, fresh] = rule.emplace(key, t.tail);
            if (!fresh) EXPECT_EQ(it->second, t.tail);
            EXPECT_TRUE(pairs.insert({t.head, t.relation}).second);
            relations_into[t.tail].insert(t.relation);
        }
    }
    // 40 clusters x 5 relations map injectively onto the 200 entities.
    std::set<EntityId> targets;
    for (const auto& [_, t] : rule) targets.insert(t);
    EXPECT_EQ(targets.size(), rule.size());
    for (const auto& [_, rels] : relations_into) EXPECT_EQ(rels.size(), 1u);
}

TEST(FunctionalGraph, DeterministicPerSeed) {
    const auto a = functional_graph({});
    const auto b = functional_graph({});
    EXPECT_EQ(a.data.splits.train, b.data.splits.train);
    FunctionalGraphConfig other;
    other.seed = 99;
    EXPECT_NE(functional_graph(other).data.splits.train, a.data.splits.train);
}

TEST(FunctionalGraph, RejectsImpossibleSizes) {
    FunctionalGraphConfig cfg;
    cfg.train = 1000;
    cfg.test = 100;
    EXPECT_THROW(functional_graph(cfg), ConfigError);
    cfg = {};
    cfg.cluster_size = 7;
    EXPECT_THROW(functional_graph(cfg), ConfigError);
}

TEST(MarkedGraph, HeldOutHeadsNeverHeadTrainingTriples) {
    const auto mg = marked_graph({});
    const auto& s = mg.data.splits;
    EXPECT_NO_THROW(check_disjoint(s));
    std::set<EntityId> train_heads;
    for (const Triple& t : s.train) train_heads.insert(t.head);
    for (const auto* split : {&s.valid, &s.test}) {
        EXPECT_EQ(split->size(), 40u * 5u);
        for (const Triple& t : *split) EXPECT_FALSE(train_heads.contains(t.head));
    }
    const auto tag = mg.data.vocab.relation_id("tag");
    std::map<EntityId, std::set<std::size_t>> marker_clusters;
    for (const Triple& t : s.train) {
        if (t.relation != tag) continue;
        EXPECT_EQ(mg.cluster_of[static_cast<std::size_t>(t.head)], mg.cluster_of[static_cast<std::size_t>(t.tail)]);
        marker_clusters[t.tail].insert(mg.cluster_of[static_cast<std::size_t>(t.head)]);
    }
    EXPECT_EQ(marker_clusters.size(), 200u);
}

TEST(HubGraph, DegreesAndNeighbors) {
    const auto g = hub_graph(100, 10, 5);
    EXPECT_EQ(g.triples.size(), 1000u);
    const auto index = GraphIndex::build(g.triples, g.vocab);
    for (std::size_t i = 0; i < 100; ++i) {
        EXPECT_EQ(index.density(entity_at(i)), 20u);
        EXPECT_EQ(index.ranked_neighbors(entity_at(i)).size(), 20u);
        EXPECT_EQ(index.ranked_relations(entity_at(i)).size(), 5u);
    }
    EXPECT_THROW(hub_graph(10, 10, 1), ConfigError);
}

TEST(SingleRelationGraph, DistinctTriplesCoveringAllEntities) {
    const auto g = single_relation_graph(10000, 2000);
    const std::set<Triple> distinct(g.triples.begin(), g.triples.end());
    EXPECT_EQ(distinct.size(), 10000u);
    const auto index = GraphIndex::build(g.triples, g.vocab);
    EXPECT_EQ(index.ranked_relation_entities(relation_at(0)).size(), 2000u);
    EXPECT_THROW(single_relation_graph(10, 3), ConfigError);
}
