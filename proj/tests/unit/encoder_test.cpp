#include "mucos/encoder.hpp"
#include "mucos/error.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace mucos;

namespace {

EncoderConfig small_config() {
    EncoderConfig cfg;
    cfg.d_model = 16;
    cfg.n_layers = 2;
    cfg.n_heads = 4;
    cfg.ff_dim = 32;
    cfg.max_seq_len = 32;
    cfg.dropout = 0.1;
    return cfg;
}

}  // namespace

TEST(EncoderConfig, Validation) {
    EncoderConfig cfg = small_config();
    EXPECT_NO_THROW(cfg.validate());
    cfg.n_heads = 3;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = small_config();
    cfg.max_seq_len = 3;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = small_config();
    cfg.dropout = 1.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(TransformerEncoder, InferenceIsDeterministicAndShaped) {
    const auto cfg = small_config();
    std::mt19937_64 rng(1);
    const auto params = EncoderParams::initialize(cfg, 20, rng);
    const TransformerEncoder enc(cfg, params);
    for (std::size_t len : {1u, 5u, 32u}) {
        std::vector<TokenId> tokens(len);
        for (std::size_t i = 0; i < len; ++i) tokens[i] = static_cast<TokenId>(3 + (i * 7) % 17);
        const Vector a = enc.encode(tokens);
        const Vector b = enc.encode(tokens);
        EXPECT_EQ(a.size(), 16);
        EXPECT_TRUE(a == b);
    }
}

TEST(TransformerEncoder, RejectsBadInputs) {
    const auto cfg = small_config();
    std::mt19937_64 rng(1);
    const auto params = EncoderParams::initialize(cfg, 20, rng);
    const TransformerEncoder enc(cfg, params);
    EXPECT_THROW(enc.encode(std::vector<TokenId>{0, 25}), VocabularyError);
    EXPECT_THROW(enc.encode(std::vector<TokenId>{}), ContractError);
    EXPECT_THROW(enc.encode(std::vector<TokenId>(33, 4)), ContractError);
}

TEST(TransformerEncoder, ZeroPositionsMakeContextOrderIrrelevant) {
    auto cfg = small_config();
    std::mt19937_64 rng(2);
    auto params = EncoderParams::initialize(cfg, 20, rng);
    params.position_embedding.setZero();
    const TransformerEncoder enc(cfg, params);
    const std::vector<TokenId> a{0, 5, 1, 7, 9, 11, 1, 6, 1, 13, 15, 17};
    std::vector<TokenId> b = a;
    std::swap(b[3], b[5]);
    std::swap(b[9], b[11]);
    EXPECT_TRUE(enc.encode(a).isApprox(enc.encode(b), 1e-12));

    // Across blocks the segment embedding still tells the tokens apart.
    std::vector<TokenId> c = a;
    std::swap(c[3], c[10]);
    EXPECT_FALSE(enc.encode(a).isApprox(enc.encode(c), 1e-6));
    params.segment_embedding.setZero();
    EXPECT_TRUE(enc.encode(a).isApprox(enc.encode(c), 1e-12));
}

TEST(TransformerEncoder, SegmentsFollowSeparators) {
    auto cfg = small_config();
    std::mt19937_64 rng(3);
    const auto params = EncoderParams::initialize(cfg, 20, rng);
    const TransformerEncoder enc(cfg, params);
    const auto tape = enc.forward(std::vector<TokenId>{0, 5, 1, 7, 9, 1, 6, 1, 13, 1, 4}, nullptr);
    EXPECT_EQ(tape.segments, (std::vector<std::size_t>{0, 0, 0, 1, 1, 1, 2, 2, 3, 3, 3}));

    cfg.n_segments = 0;
    std::mt19937_64 rng2(3);
    const auto plain = EncoderParams::initialize(cfg, 20, rng2);
    EXPECT_EQ(plain.segment_embedding.rows(), 0);
    std::size_t named = 0;
    EncoderParams::visit(plain, [&](const std::string& name, const Matrix&) {
        named += name == "encoder.segment_embedding" ? 1 : 0;
    });
    EXPECT_EQ(named, 0u);
    EXPECT_EQ(TransformerEncoder(cfg, plain).encode(std::vector<TokenId>{0, 5, 1, 6}).size(), 16);
}

TEST(TransformerEncoder, PositionsMakeOrderMatter) {
    const auto cfg = small_config();
    std::mt19937_64 rng(2);
    const auto params = EncoderParams::initialize(cfg, 20, rng);
    const TransformerEncoder enc(cfg, params);
    const std::vector<TokenId> a{0, 5, 1, 7, 9, 1, 6};
    const std::vector<TokenId> b{0, 5, 1, 9, 7, 1, 6};
    EXPECT_FALSE(enc.encode(a).isApprox(enc.encode(b), 1e-9));
}

TEST(TransformerEncoder, PaddingKeysAreIgnored) {
    auto cfg = small_config();
    std::mt19937_64 rng(4);
    auto params = EncoderParams::initialize(cfg, 20, rng);
    const TransformerEncoder enc(cfg, params);
    const std::vector<TokenId> plain{0, 5, 1, 7, 9};
    std::vector<TokenId> padded = plain;
    padded.insert(padded.end(), 4, TokenVocab::kPad);
    EXPECT_TRUE(enc.encode(plain).isApprox(enc.encode(padded), 1e-12));
}

TEST(TransformerEncoder, DropoutOnlyWithRng) {
    const auto cfg = small_config();
    std::mt19937_64 rng(5);
    const auto params = EncoderParams::initialize(cfg, 20, rng);
    const TransformerEncoder enc(cfg, params);
    const std::vector<TokenId> tokens{0, 5, 1, 7, 9, 1, 6, 8};
    std::mt19937_64 drop_a(10), drop_b(10);
    const Vector a = enc.forward(tokens, &drop_a).pooled();
    const Vector b = enc.forward(tokens, &drop_b).pooled();
    EXPECT_TRUE(a == b);
    EXPECT_FALSE(a.isApprox(enc.encode(tokens), 1e-9));
}
