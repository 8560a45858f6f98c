#include "mucos/tokens.hpp"

#include "mucos/error.hpp"

#include <algorithm>
#include <string>

namespace mucos {

TokenId TokenVocab::token(EntityId e) const {
    if (index_of(e) >= entities_)
        throw VocabularyError("entity id " + std::to_string(index_of(e)) + " has no token");
    return static_cast<TokenId>(kSpecialCount + index_of(e));
}

TokenId TokenVocab::token(RelationId r) const {
    if (index_of(r) >= relations_)
        throw VocabularyError("relation id " + std::to_string(index_of(r)) + " has no token");
    return static_cast<TokenId>(kSpecialCount + entities_ + index_of(r));
}

TokenId TokenVocab::token(const ContextToken& c) const {
    return c.kind == ContextToken::Kind::entity ? token(static_cast<EntityId>(c.id))
                                                : token(static_cast<RelationId>(c.id));
}

EntityId TokenVocab::entity_of(TokenId t) const {
    if (!is_entity(t)) throw VocabularyError("token " + std::to_string(t) + " is not an entity");
    return entity_at(t - kSpecialCount);
}

RelationId TokenVocab::relation_of(TokenId t) const {
    if (!is_relation(t)) throw VocabularyError("token " + std::to_string(t) + " is not a relation");
    return relation_at(t - kSpecialCount - entities_);
}

BlockSplit split_budget(std::size_t first_len, std::size_t second_len, std::size_t budget) {
    if (first_len + second_len <= budget) return {first_len, second_len};
    const std::size_t first = std::min(first_len, std::max((budget + 1) / 2, budget - std::min(budget, second_len)));
    return {first, budget - first};
}

namespace {

std::vector<TokenId> assemble(TokenId a, std::span<const ContextToken> a_agg, TokenId b,
                              std::span<const ContextToken> b_agg, const TokenVocab& vocab,
                              std::size_t max_len) {
    if (max_len < kMinInputLength)
        throw ConfigError("max sequence length " + std::to_string(max_len) + " is below the minimum of " +
                          std::to_string(kMinInputLength));
    const BlockSplit keep = split_budget(a_agg.size(), b_agg.size(), max_len - kSkeletonTokens);

    std::vector<TokenId> seq;
    seq.reserve(kSkeletonTokens + keep.first + keep.second);
    seq.push_back(TokenVocab::kBos);
    seq.push_back(a);
    seq.push_back(TokenVocab::kSep);
    for (std::size_t i = 0; i < keep.first; ++i) seq.push_back(vocab.token(a_agg[i]));
    seq.push_back(TokenVocab::kSep);
    seq.push_back(b);
    seq.push_back(TokenVocab::kSep);
    for (std::size_t i = 0; i < keep.second; ++i) seq.push_back(vocab.token(b_agg[i]));
    return seq;
}

}  // namespace

std::vector<TokenId> build_relation_input(EntityId h, std::span<const ContextToken> head_agg, EntityId t,
                                          std::span<const ContextToken> tail_agg, const TokenVocab& vocab,
                                          std::size_t max_len) {
    return assemble(vocab.token(h), head_agg, vocab.token(t), tail_agg, vocab, max_len);
}

std::vector<TokenId> build_tail_input(EntityId h, std::span<const ContextToken> head_agg, RelationId r,
                                      std::span<const ContextToken> relation_agg, const TokenVocab& vocab,
                                      std::size_t max_len) {
    return assemble(vocab.token(h), head_agg, vocab.token(r), relation_agg, vocab, max_len);
}

}  // namespace mucos
