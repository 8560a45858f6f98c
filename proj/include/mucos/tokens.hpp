#pragma once
// Token ids and encoder input layouts.
//
// Every entity and relation is an atomic token; no text is involved. Layouts:
//   relation task: [BOS, h, SEP, H_agg..., SEP, t, SEP, T_agg...]
//   tail task:     [BOS, h, SEP, H_agg..., SEP, r, SEP, R_agg...]
// When the two context blocks do not fit, tokens are dropped from the end of
// whichever block is currently longer (the second block on a tie). The six
// skeleton tokens are never dropped.

#include "mucos/context_sampler.hpp"
#include "mucos/kg_store.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mucos {

using TokenId = std::uint32_t;

class TokenVocab {
public:
    static constexpr TokenId kBos = 0;
    static constexpr TokenId kSep = 1;
    static constexpr TokenId kPad = 2;
    static constexpr std::size_t kSpecialCount = 3;

    TokenVocab() = default;
    TokenVocab(std::size_t entity_count, std::size_t relation_count)
        : entities_(entity_count), relations_(relation_count) {}

    std::size_t size() const noexcept { return kSpecialCount + entities_ + relations_; }
    std::size_t entity_count() const noexcept { return entities_; }
    std::size_t relation_count() const noexcept { return relations_; }

    TokenId token(EntityId e) const;
    TokenId token(RelationId r) const;
    TokenId token(const ContextToken& c) const;

    bool is_entity(TokenId t) const noexcept { return t >= kSpecialCount && t < kSpecialCount + entities_; }
    bool is_relation(TokenId t) const noexcept { return t >= kSpecialCount + entities_ && t < size(); }
    EntityId entity_of(TokenId t) const;
    RelationId relation_of(TokenId t) const;

private:
    std::size_t entities_ = 0;
    std::size_t relations_ = 0;
};

inline constexpr std::size_t kSkeletonTokens = 6;
inline constexpr std::size_t kMinInputLength = 7;

// Number of tokens kept from each block for a given budget (see header note).
struct BlockSplit {
    std::size_t first;
    std::size_t second;
};
BlockSplit split_budget(std::size_t first_len, std::size_t second_len, std::size_t budget);

std::vector<TokenId> build_relation_input(EntityId h, std::span<const ContextToken> head_agg, EntityId t,
                                          std::span<const ContextToken> tail_agg, const TokenVocab& vocab,
                                          std::size_t max_len);

std::vector<TokenId> build_tail_input(EntityId h, std::span<const ContextToken> head_agg, RelationId r,
                                      std::span<const ContextToken> relation_agg, const TokenVocab& vocab,
                                      std::size_t max_len);

}  // namespace mucos
