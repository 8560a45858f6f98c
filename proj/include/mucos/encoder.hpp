#pragma once
// Sequence encoder used by the relation and tail classifiers.
//
// `Encoder` is the inference surface the classifiers depend on; any model that
// maps a token sequence to a fixed-size vector can stand behind it.
// `TransformerEncoder` is the trainable implementation: learned token,
// position and segment embeddings, embedding LayerNorm, then post-LN blocks of multi-head
// self-attention and a GELU feed-forward network. The pooled output is the
// final hidden state at position 0 (the BOS token). A token's segment is the
// number of SEP tokens before it (capped at n_segments - 1), so skeleton
// slots and context blocks get distinct learned offsets. All arithmetic is
// double precision so analytic gradients can be checked against finite
// differences.

#include "mucos/tokens.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace mucos {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct EncoderConfig {
    std::size_t d_model = 64;
    std::size_t n_layers = 2;
    std::size_t n_heads = 4;
    std::size_t ff_dim = 128;
    std::size_t max_seq_len = 128;
    double dropout = 0.1;
    // 0 disables segment embeddings.
    std::size_t n_segments = 4;

    void validate() const;

    friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

struct NamedTensor {
    std::string name;
    Matrix* value;
};

struct ConstNamedTensor {
    std::string name;
    const Matrix* value;
};

// Row vectors (biases, LayerNorm gains) are stored as 1 x n matrices so every
// parameter is a Matrix.
struct LayerParams {
    Matrix wq, wk, wv, wo;
    Matrix bq, bk, bv, bo;
    Matrix ln1_gain, ln1_bias;
    Matrix w1, b1, w2, b2;
    Matrix ln2_gain, ln2_bias;

    template <class Self, class F>
    static void visit(Self& self, F&& f) {
        f("attention.query.weight", self.wq);
        f("attention.query.bias", self.bq);
        f("attention.key.weight", self.wk);
        f("attention.key.bias", self.bk);
        f("attention.value.weight", self.wv);
        f("attention.value.bias", self.bv);
        f("attention.output.weight", self.wo);
        f("attention.output.bias", self.bo);
        f("attention.norm.gain", self.ln1_gain);
        f("attention.norm.bias", self.ln1_bias);
        f("ffn.in.weight", self.w1);
        f("ffn.in.bias", self.b1);
        f("ffn.out.weight", self.w2);
        f("ffn.out.bias", self.b2);
        f("ffn.norm.gain", self.ln2_gain);
        f("ffn.norm.bias", self.ln2_bias);
    }
};

struct EncoderParams {
    Matrix token_embedding;     // vocab x d_model
    Matrix position_embedding;  // max_seq_len x d_model
    Matrix segment_embedding;   // n_segments x d_model
    Matrix embedding_norm_gain, embedding_norm_bias;
    std::vector<LayerParams> layers;

    template <class Self, class F>
    static void visit(Self& self, F&& f) {
        f("encoder.token_embedding", self.token_embedding);
        f("encoder.position_embedding", self.position_embedding);
        if (self.segment_embedding.rows() > 0) f("encoder.segment_embedding", self.segment_embedding);
        f("encoder.embedding_norm.gain", self.embedding_norm_gain);
        f("encoder.embedding_norm.bias", self.embedding_norm_bias);
        for (std::size_t i = 0; i < self.layers.size(); ++i) {
            const std::string prefix = "encoder.layer" + std::to_string(i) + ".";
            LayerParams::visit(self.layers[i], [&](const char* name, auto& m) { f(prefix + name, m); });
        }
    }

    static EncoderParams initialize(const EncoderConfig& cfg, std::size_t vocab_size, std::mt19937_64& rng);
    EncoderParams zeros_like() const;
};

class Encoder {
public:
    virtual ~Encoder() = default;
    virtual std::size_t dim() const = 0;
    virtual std::size_t max_length() const = 0;
    // Inference-mode encoding; must be deterministic.
    virtual Vector encode(std::span<const TokenId> tokens) const = 0;
};

struct LayerNormCache {
    Matrix normalized;  // (x - mean) / std, per row
    Vector inv_std;
};

struct LayerTape {
    Matrix input;
    Matrix q, k, v;
    std::vector<Matrix> probs;  // one L x L matrix per head
    Matrix context;             // concatenated head outputs
    Matrix attn_mask;           // dropout mask, empty when inactive
    LayerNormCache norm1;
    Matrix hidden;              // output of the attention sub-block
    Matrix ffn_pre;             // hidden * w1 + b1
    Matrix ffn_act;             // gelu(ffn_pre)
    Matrix ffn_mask;
    LayerNormCache norm2;
};

struct EncoderTape {
    std::vector<TokenId> tokens;
    std::vector<std::size_t> segments;
    std::vector<bool> key_padding;  // true where the key is PAD and masked out
    LayerNormCache embed_norm;
    Matrix embed_mask;
    std::vector<LayerTape> layers;
    Matrix output;  // L x d_model

    Vector pooled() const { return output.row(0).transpose(); }
};

// Non-owning view over a config and parameter set.
class TransformerEncoder final : public Encoder {
public:
    TransformerEncoder(const EncoderConfig& cfg, const EncoderParams& params);

    std::size_t dim() const override { return cfg_->d_model; }
    std::size_t max_length() const override { return cfg_->max_seq_len; }
    Vector encode(std::span<const TokenId> tokens) const override;

    // Dropout is applied only when `dropout_rng` is non-null.
    EncoderTape forward(std::span<const TokenId> tokens, std::mt19937_64* dropout_rng) const;

    // Accumulates d(loss)/d(params) into `grads` given d(loss)/d(pooled).
    void backward(const EncoderTape& tape, const Vector& d_pooled, EncoderParams& grads) const;

private:
    const EncoderConfig* cfg_;
    const EncoderParams* params_;
};

}  // namespace mucos
