#include "mucos/kg_store.hpp"

#include "mucos/error.hpp"
#include "mucos/hashing.hpp"
#include "mucos/ranking.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace mucos {

namespace {

std::string_view strip_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

bool is_blank(std::string_view line) {
    return line.find_first_not_of(" \t") == std::string_view::npos;
}

// Stable counting sort of `n` rows into CSR form.
template <class T, class KeyFn>
void fill_csr(std::size_t rows, std::span<const Triple> triples, KeyFn&& key_and_item,
              std::vector<std::size_t>& offsets, std::vector<T>& items) {
    offsets.assign(rows + 1, 0);
    for (const Triple& t : triples) ++offsets[key_and_item(t).first + 1];
    for (std::size_t i = 0; i < rows; ++i) offsets[i + 1] += offsets[i];
    items.resize(triples.size());
    std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
    for (const Triple& t : triples) {
        auto [row, item] = key_and_item(t);
        items[cursor[row]++] = item;
    }
}

}  // namespace

std::vector<LabeledTriple> parse_triples_text(std::string_view text, const std::string& source_name) {
    std::vector<LabeledTriple> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = strip_cr(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (is_blank(line)) continue;

        std::string_view fields[3];
        std::size_t count = 0;
        std::size_t start = 0;
        while (true) {
            const std::size_t tab = line.find('\t', start);
            const std::string_view field =
                line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start);
            if (count < 3) fields[count] = field;
            ++count;
            if (tab == std::string_view::npos) break;
            start = tab + 1;
        }
        if (count != 3) {
            throw ParseError(source_name, line_no,
                             "expected 3 tab-separated fields, found " + std::to_string(count));
        }
        for (const auto& f : fields) {
            if (f.empty()) throw ParseError(source_name, line_no, "empty field");
        }
        out.push_back({std::string(fields[0]), std::string(fields[1]), std::string(fields[2])});
    }
    return out;
}

std::vector<LabeledTriple> parse_triples(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open triple file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_triples_text(buf.str(), path);
}

EntityId Vocabulary::add_entity(std::string_view label) {
    auto [it, inserted] =
        entity_index_.try_emplace(std::string(label), static_cast<std::uint32_t>(entities_.size()));
    if (inserted) entities_.emplace_back(label);
    return static_cast<EntityId>(it->second);
}

RelationId Vocabulary::add_relation(std::string_view label) {
    auto [it, inserted] =
        relation_index_.try_emplace(std::string(label), static_cast<std::uint32_t>(relations_.size()));
    if (inserted) relations_.emplace_back(label);
    return static_cast<RelationId>(it->second);
}

std::optional<EntityId> Vocabulary::find_entity(std::string_view label) const {
    auto it = entity_index_.find(std::string(label));
    if (it == entity_index_.end()) return std::nullopt;
    return static_cast<EntityId>(it->second);
}

std::optional<RelationId> Vocabulary::find_relation(std::string_view label) const {
    auto it = relation_index_.find(std::string(label));
    if (it == relation_index_.end()) return std::nullopt;
    return static_cast<RelationId>(it->second);
}

EntityId Vocabulary::entity_id(std::string_view label) const {
    if (auto e = find_entity(label)) return *e;
    throw VocabularyError("unknown entity '" + std::string(label) + "'");
}

RelationId Vocabulary::relation_id(std::string_view label) const {
    if (auto r = find_relation(label)) return *r;
    throw VocabularyError("unknown relation '" + std::string(label) + "'");
}

void Vocabulary::check(EntityId e) const {
    if (index_of(e) >= entities_.size())
        throw VocabularyError("entity id " + std::to_string(index_of(e)) + " out of range");
}

void Vocabulary::check(RelationId r) const {
    if (index_of(r) >= relations_.size())
        throw VocabularyError("relation id " + std::to_string(index_of(r)) + " out of range");
}

const std::string& Vocabulary::entity_label(EntityId e) const {
    check(e);
    return entities_[index_of(e)];
}

const std::string& Vocabulary::relation_label(RelationId r) const {
    check(r);
    return relations_[index_of(r)];
}

Triple Vocabulary::resolve(const LabeledTriple& t) const {
    return {entity_id(t.head), relation_id(t.relation), entity_id(t.tail)};
}

std::uint64_t Vocabulary::hash() const {
    Fnv1a64 h;
    h.update_field("entities");
    for (const auto& e : entities_) h.update_field(e);
    h.update_field("relations");
    for (const auto& r : relations_) h.update_field(r);
    return h.digest();
}

void check_disjoint(const SplitDataset& splits) {
    std::unordered_set<Triple, TripleHash> seen;
    const std::pair<const char*, const std::vector<Triple>*> parts[] = {
        {"train", &splits.train}, {"valid", &splits.valid}, {"test", &splits.test}};
    for (const auto& [name, triples] : parts) {
        std::unordered_set<Triple, TripleHash> local(triples->begin(), triples->end());
        for (const Triple& t : local) {
            if (seen.contains(t)) {
                throw DataError(std::string("split '") + name +
                                "' shares a triple with an earlier split");
            }
        }
        seen.insert(local.begin(), local.end());
    }
}

Dataset make_dataset(const std::vector<LabeledTriple>& train, const std::vector<LabeledTriple>& valid,
                     const std::vector<LabeledTriple>& test) {
    Dataset ds;
    for (const auto* split : {&train, &valid, &test}) {
        for (const auto& t : *split) {
            ds.vocab.add_entity(t.head);
            ds.vocab.add_relation(t.relation);
            ds.vocab.add_entity(t.tail);
        }
    }
    const auto resolve_all = [&](const std::vector<LabeledTriple>& in) {
        std::vector<Triple> out;
        out.reserve(in.size());
        for (const auto& t : in) out.push_back(ds.vocab.resolve(t));
        return out;
    };
    ds.splits.train = resolve_all(train);
    ds.splits.valid = resolve_all(valid);
    ds.splits.test = resolve_all(test);
    check_disjoint(ds.splits);
    return ds;
}

Dataset load_dataset(const std::string& dir) {
    namespace fs = std::filesystem;
    const fs::path root(dir);
    if (!fs::is_directory(root)) throw Error("dataset directory not found: " + dir);
    const auto load = [&](const char* name, bool required) {
        const fs::path p = root / name;
        if (!fs::exists(p)) {
            if (required) throw Error("missing " + p.string());
            return std::vector<LabeledTriple>{};
        }
        return parse_triples(p.string());
    };
    return make_dataset(load("train.txt", true), load("valid.txt", false), load("test.txt", false));
}

void write_triples(const std::string& path, const Vocabulary& vocab, std::span<const Triple> triples) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot write " + path);
    for (const Triple& t : triples)
        out << vocab.entity_label(t.head) << '\t' << vocab.relation_label(t.relation) << '\t'
            << vocab.entity_label(t.tail) << '\n';
    if (!out) throw Error("failed writing " + path);
}

void write_dataset(const std::string& dir, const Dataset& data) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    write_triples((fs::path(dir) / "train.txt").string(), data.vocab, data.splits.train);
    write_triples((fs::path(dir) / "valid.txt").string(), data.vocab, data.splits.valid);
    write_triples((fs::path(dir) / "test.txt").string(), data.vocab, data.splits.test);
}

GraphIndex GraphIndex::build(std::span<const Triple> train, const Vocabulary& vocab) {
    GraphIndex g;
    const std::size_t n_ent = vocab.entity_count();
    const std::size_t n_rel = vocab.relation_count();
    for (const Triple& t : train) {
        vocab.check(t.head);
        vocab.check(t.relation);
        vocab.check(t.tail);
    }

    g.triple_count_ = train.size();
    g.entity_density_.assign(n_ent, 0);
    g.relation_frequency_.assign(n_rel, 0);
    for (const Triple& t : train) {
        ++g.entity_density_[index_of(t.head)];
        ++g.entity_density_[index_of(t.tail)];
        ++g.relation_frequency_[index_of(t.relation)];
    }

    fill_csr<RelationEdge>(n_ent, train,
                           [](const Triple& t) {
                               return std::pair{index_of(t.head), RelationEdge{t.relation, t.tail}};
                           },
                           g.by_head_.offsets, g.by_head_.items);
    fill_csr<RelationEdge>(n_ent, train,
                           [](const Triple& t) {
                               return std::pair{index_of(t.tail), RelationEdge{t.relation, t.head}};
                           },
                           g.by_tail_.offsets, g.by_tail_.items);
    fill_csr<EntityPair>(n_rel, train,
                         [](const Triple& t) {
                             return std::pair{index_of(t.relation), EntityPair{t.head, t.tail}};
                         },
                         g.by_relation_.offsets, g.by_relation_.items);

    const auto entity_score = [&g](EntityId e) { return g.entity_density_[index_of(e)]; };
    const auto relation_score = [&g](RelationId r) { return g.relation_frequency_[index_of(r)]; };

    // Distinct neighbor entities / relations per entity, both directions.
    std::vector<std::uint32_t> entity_mark(n_ent, UINT32_MAX);
    std::vector<std::uint32_t> relation_mark(n_rel, UINT32_MAX);
    g.ranked_neighbors_.offsets.assign(n_ent + 1, 0);
    g.ranked_relations_.offsets.assign(n_ent + 1, 0);
    std::vector<EntityId> ents;
    std::vector<RelationId> rels;
    for (std::size_t i = 0; i < n_ent; ++i) {
        ents.clear();
        rels.clear();
        const auto stamp = static_cast<std::uint32_t>(i);
        for (const auto* row : {&g.by_head_, &g.by_tail_}) {
            for (const RelationEdge& edge : row->row(i)) {
                if (entity_mark[index_of(edge.entity)] != stamp) {
                    entity_mark[index_of(edge.entity)] = stamp;
                    ents.push_back(edge.entity);
                }
                if (relation_mark[index_of(edge.relation)] != stamp) {
                    relation_mark[index_of(edge.relation)] = stamp;
                    rels.push_back(edge.relation);
                }
            }
        }
        for (EntityId e : top_k_by_density(ents, kUnbounded, entity_score))
            g.ranked_neighbors_.items.push_back(e);
        for (RelationId r : top_k_by_density(rels, kUnbounded, relation_score))
            g.ranked_relations_.items.push_back(r);
        g.ranked_neighbors_.offsets[i + 1] = g.ranked_neighbors_.items.size();
        g.ranked_relations_.offsets[i + 1] = g.ranked_relations_.items.size();
    }

    std::fill(entity_mark.begin(), entity_mark.end(), UINT32_MAX);
    g.ranked_relation_entities_.offsets.assign(n_rel + 1, 0);
    for (std::size_t r = 0; r < n_rel; ++r) {
        ents.clear();
        const auto stamp = static_cast<std::uint32_t>(r);
        for (const EntityPair& p : g.by_relation_.row(r)) {
            for (EntityId e : {p.head, p.tail}) {
                if (entity_mark[index_of(e)] != stamp) {
                    entity_mark[index_of(e)] = stamp;
                    ents.push_back(e);
                }
            }
        }
        for (EntityId e : top_k_by_density(ents, kUnbounded, entity_score))
            g.ranked_relation_entities_.items.push_back(e);
        g.ranked_relation_entities_.offsets[r + 1] = g.ranked_relation_entities_.items.size();
    }
    return g;
}

void GraphIndex::check(EntityId e) const {
    if (index_of(e) >= entity_density_.size())
        throw VocabularyError("entity id " + std::to_string(index_of(e)) + " out of range");
}

void GraphIndex::check(RelationId r) const {
    if (index_of(r) >= relation_frequency_.size())
        throw VocabularyError("relation id " + std::to_string(index_of(r)) + " out of range");
}

std::span<const RelationEdge> GraphIndex::by_head(EntityId e) const {
    check(e);
    return by_head_.row(index_of(e));
}

std::span<const RelationEdge> GraphIndex::by_tail(EntityId e) const {
    check(e);
    return by_tail_.row(index_of(e));
}

std::span<const EntityPair> GraphIndex::by_relation(RelationId r) const {
    check(r);
    return by_relation_.row(index_of(r));
}

std::size_t GraphIndex::density(EntityId e) const {
    check(e);
    return entity_density_[index_of(e)];
}

std::size_t GraphIndex::relation_frequency(RelationId r) const {
    check(r);
    return relation_frequency_[index_of(r)];
}

std::span<const EntityId> GraphIndex::ranked_neighbors(EntityId e) const {
    check(e);
    return ranked_neighbors_.row(index_of(e));
}

std::span<const RelationId> GraphIndex::ranked_relations(EntityId e) const {
    check(e);
    return ranked_relations_.row(index_of(e));
}

std::span<const EntityId> GraphIndex::ranked_relation_entities(RelationId r) const {
    check(r);
    return ranked_relation_entities_.row(index_of(r));
}

namespace {

GraphStats finish_stats(std::size_t nodes, std::size_t edges, std::size_t relations) {
    if (nodes == 0) throw DataError("statistics undefined for a graph with zero nodes");
    GraphStats s;
    s.node_count = nodes;
    s.edge_count = edges;
    s.relation_count = relations;
    s.avg_degree = static_cast<double>(edges) / static_cast<double>(nodes);
    s.avg_relation_appearance =
        relations == 0 ? 0.0 : static_cast<double>(edges) / static_cast<double>(relations);
    s.avg_density_input = s.avg_degree;
    return s;
}

}  // namespace

GraphStats triple_stats(std::span<const Triple> triples) {
    std::unordered_set<std::uint32_t> nodes;
    std::unordered_set<std::uint32_t> relations;
    for (const Triple& t : triples) {
        nodes.insert(static_cast<std::uint32_t>(t.head));
        nodes.insert(static_cast<std::uint32_t>(t.tail));
        relations.insert(static_cast<std::uint32_t>(t.relation));
    }
    return finish_stats(nodes.size(), triples.size(), relations.size());
}

StatsReport graph_stats(const GraphIndex& g, const SplitDataset& splits,
                        std::optional<double> avg_density_input) {
    StatsReport report;
    std::size_t nodes = 0;
    for (std::size_t d : g.entity_densities()) nodes += d > 0 ? 1 : 0;
    std::size_t relations = 0;
    for (std::size_t f : g.relation_frequencies()) relations += f > 0 ? 1 : 0;
    report.train = finish_stats(nodes, g.triple_count(), relations);

    if (!splits.valid.empty()) report.valid = triple_stats(splits.valid);
    if (!splits.test.empty()) report.test = triple_stats(splits.test);

    std::vector<Triple> all;
    all.reserve(splits.train.size() + splits.valid.size() + splits.test.size());
    for (const auto* s : {&splits.train, &splits.valid, &splits.test}) all.insert(all.end(), s->begin(), s->end());
    report.overall = triple_stats(all);

    if (avg_density_input) {
        for (GraphStats* s : {&report.train, &report.overall}) s->avg_density_input = *avg_density_input;
        if (report.valid) report.valid->avg_density_input = *avg_density_input;
        if (report.test) report.test->avg_density_input = *avg_density_input;
    }
    return report;
}

}  // namespace mucos
