#include "mucos/encoder.hpp"

#include "mucos/error.hpp"

#include <cmath>
#include <limits>

namespace mucos {

namespace {

constexpr double kNormEps = 1e-5;
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

Matrix normal_matrix(std::size_t rows, std::size_t cols, double stddev, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, stddev);
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = dist(rng);
    return m;
}

Matrix linear_weight(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
    return normal_matrix(fan_in, fan_out, 1.0 / std::sqrt(static_cast<double>(fan_in)), rng);
}

Matrix row_zeros(std::size_t n) { return Matrix::Zero(1, static_cast<Eigen::Index>(n)); }
Matrix row_ones(std::size_t n) { return Matrix::Ones(1, static_cast<Eigen::Index>(n)); }

Matrix add_row(Matrix m, const Matrix& row) {
    m.rowwise() += row.row(0);
    return m;
}

Matrix layer_norm(const Matrix& x, const Matrix& gain, const Matrix& bias, LayerNormCache& cache) {
    const Eigen::Index n = x.cols();
    cache.normalized.resize(x.rows(), n);
    cache.inv_std.resize(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double mean = x.row(i).mean();
        const double var = (x.row(i).array() - mean).square().mean();
        const double inv = 1.0 / std::sqrt(var + kNormEps);
        cache.inv_std(i) = inv;
        cache.normalized.row(i) = (x.row(i).array() - mean) * inv;
    }
    Matrix y = cache.normalized.array().rowwise() * gain.row(0).array();
    y.rowwise() += bias.row(0);
    return y;
}

Matrix layer_norm_backward(const Matrix& dy, const Matrix& gain, const LayerNormCache& cache, Matrix& d_gain,
                           Matrix& d_bias) {
    d_gain.row(0) += (dy.array() * cache.normalized.array()).colwise().sum().matrix();
    d_bias.row(0) += dy.colwise().sum();
    const Matrix dxhat = dy.array().rowwise() * gain.row(0).array();
    const double n = static_cast<double>(dy.cols());
    Matrix dx(dy.rows(), dy.cols());
    for (Eigen::Index i = 0; i < dy.rows(); ++i) {
        const double mean_d = dxhat.row(i).sum() / n;
        const double mean_dx = (dxhat.row(i).array() * cache.normalized.row(i).array()).sum() / n;
        dx.row(i) = cache.inv_std(i) *
                    (dxhat.row(i).array() - mean_d - cache.normalized.row(i).array() * mean_dx).matrix();
    }
    return dx;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }
double gelu_grad(double x) {
    return 0.5 * (1.0 + std::erf(x * kInvSqrt2)) + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, std::mt19937_64* rng) {
    if (rng == nullptr || p <= 0.0) return {};
    std::bernoulli_distribution keep(1.0 - p);
    const double scale = 1.0 / (1.0 - p);
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = keep(*rng) ? scale : 0.0;
    return m;
}

void apply_mask(Matrix& x, const Matrix& mask) {
    if (mask.size() != 0) x.array() *= mask.array();
}

}  // namespace

void EncoderConfig::validate() const {
    if (d_model == 0 || n_layers == 0 || n_heads == 0 || ff_dim == 0)
        throw ConfigError("encoder dimensions must be positive");
    if (d_model % n_heads != 0) throw ConfigError("d_model must be divisible by n_heads");
    if (max_seq_len < kMinInputLength)
        throw ConfigError("max_seq_len must be at least " + std::to_string(kMinInputLength));
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
}

EncoderParams EncoderParams::initialize(const EncoderConfig& cfg, std::size_t vocab_size, std::mt19937_64& rng) {
    cfg.validate();
    const std::size_t d = cfg.d_model;
    const double embed_std = 1.0 / std::sqrt(static_cast<double>(d));
    EncoderParams p;
    p.token_embedding = normal_matrix(vocab_size, d, embed_std, rng);
    p.position_embedding = normal_matrix(cfg.max_seq_len, d, embed_std, rng);
    p.segment_embedding = normal_matrix(cfg.n_segments, d, embed_std, rng);
    p.embedding_norm_gain = row_ones(d);
    p.embedding_norm_bias = row_zeros(d);
    p.layers.resize(cfg.n_layers);
    for (LayerParams& l : p.layers) {
        l.wq = linear_weight(d, d, rng);
        l.wk = linear_weight(d, d, rng);
        l.wv = linear_weight(d, d, rng);
        l.wo = linear_weight(d, d, rng);
        l.bq = l.bk = l.bv = l.bo = row_zeros(d);
        l.ln1_gain = row_ones(d);
        l.ln1_bias = row_zeros(d);
        l.w1 = linear_weight(d, cfg.ff_dim, rng);
        l.b1 = row_zeros(cfg.ff_dim);
        l.w2 = linear_weight(cfg.ff_dim, d, rng);
        l.b2 = row_zeros(d);
        l.ln2_gain = row_ones(d);
        l.ln2_bias = row_zeros(d);
    }
    return p;
}

EncoderParams EncoderParams::zeros_like() const {
    EncoderParams z = *this;
    visit(z, [](const std::string&, Matrix& m) { m.setZero(); });
    return z;
}

TransformerEncoder::TransformerEncoder(const EncoderConfig& cfg, const EncoderParams& params)
    : cfg_(&cfg), params_(&params) {}

Vector TransformerEncoder::encode(std::span<const TokenId> tokens) const {
    return forward(tokens, nullptr).pooled();
}

EncoderTape TransformerEncoder::forward(std::span<const TokenId> tokens, std::mt19937_64* dropout_rng) const {
    const EncoderConfig& cfg = *cfg_;
    const EncoderParams& p = *params_;
    const auto len = static_cast<Eigen::Index>(tokens.size());
    const auto d = static_cast<Eigen::Index>(cfg.d_model);
    if (tokens.empty()) throw ContractError("cannot encode an empty token sequence");
    if (tokens.size() > cfg.max_seq_len)
        throw ContractError("sequence of " + std::to_string(tokens.size()) + " tokens exceeds max_seq_len " +
                            std::to_string(cfg.max_seq_len));

    EncoderTape tape;
    tape.tokens.assign(tokens.begin(), tokens.end());
    tape.key_padding.resize(tokens.size());
    bool any_unmasked = false;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (tokens[i] >= static_cast<TokenId>(p.token_embedding.rows()))
            throw VocabularyError("token id " + std::to_string(tokens[i]) + " out of range");
        tape.key_padding[i] = tokens[i] == TokenVocab::kPad;
        any_unmasked = any_unmasked || !tape.key_padding[i];
    }
    if (!any_unmasked) std::fill(tape.key_padding.begin(), tape.key_padding.end(), false);

    tape.segments.resize(tokens.size());
    std::size_t seps = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        tape.segments[i] = cfg.n_segments == 0 ? 0 : std::min(seps, cfg.n_segments - 1);
        if (tokens[i] == TokenVocab::kSep) ++seps;
    }

    Matrix x(len, d);
    for (Eigen::Index i = 0; i < len; ++i) {
        const auto u = static_cast<std::size_t>(i);
        x.row(i) = p.token_embedding.row(tokens[u]) + p.position_embedding.row(i);
        if (cfg.n_segments > 0) x.row(i) += p.segment_embedding.row(static_cast<Eigen::Index>(tape.segments[u]));
    }
    x = layer_norm(x, p.embedding_norm_gain, p.embedding_norm_bias, tape.embed_norm);
    tape.embed_mask = dropout_mask(len, d, cfg.dropout, dropout_rng);
    apply_mask(x, tape.embed_mask);

    const auto heads = static_cast<Eigen::Index>(cfg.n_heads);
    const Eigen::Index dh = d / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    tape.layers.resize(p.layers.size());
    for (std::size_t li = 0; li < p.layers.size(); ++li) {
        const LayerParams& l = p.layers[li];
        LayerTape& t = tape.layers[li];
        t.input = x;
        t.q = add_row(x * l.wq, l.bq);
        t.k = add_row(x * l.wk, l.bk);
        t.v = add_row(x * l.wv, l.bv);
        t.context.resize(len, d);
        t.probs.resize(static_cast<std::size_t>(heads));
        for (Eigen::Index h = 0; h < heads; ++h) {
            Matrix scores = t.q.middleCols(h * dh, dh) * t.k.middleCols(h * dh, dh).transpose() * scale;
            for (Eigen::Index j = 0; j < len; ++j) {
                if (tape.key_padding[static_cast<std::size_t>(j)])
                    scores.col(j).setConstant(-std::numeric_limits<double>::infinity());
            }
            for (Eigen::Index i = 0; i < len; ++i) {
                const double mx = scores.row(i).maxCoeff();
                scores.row(i) = (scores.row(i).array() - mx).exp().matrix();
                scores.row(i) /= scores.row(i).sum();
            }
            t.context.middleCols(h * dh, dh) = scores * t.v.middleCols(h * dh, dh);
            t.probs[static_cast<std::size_t>(h)] = std::move(scores);
        }
        Matrix attn = add_row(t.context * l.wo, l.bo);
        t.attn_mask = dropout_mask(len, d, cfg.dropout, dropout_rng);
        apply_mask(attn, t.attn_mask);
        t.hidden = layer_norm(x + attn, l.ln1_gain, l.ln1_bias, t.norm1);

        t.ffn_pre = add_row(t.hidden * l.w1, l.b1);
        t.ffn_act = t.ffn_pre.unaryExpr([](double v) { return gelu(v); });
        Matrix ffn = add_row(t.ffn_act * l.w2, l.b2);
        t.ffn_mask = dropout_mask(len, d, cfg.dropout, dropout_rng);
        apply_mask(ffn, t.ffn_mask);
        x = layer_norm(t.hidden + ffn, l.ln2_gain, l.ln2_bias, t.norm2);
    }
    tape.output = std::move(x);
    return tape;
}

void TransformerEncoder::backward(const EncoderTape& tape, const Vector& d_pooled, EncoderParams& grads) const {
    const EncoderConfig& cfg = *cfg_;
    const EncoderParams& p = *params_;
    const Eigen::Index len = tape.output.rows();
    const auto d = static_cast<Eigen::Index>(cfg.d_model);
    const auto heads = static_cast<Eigen::Index>(cfg.n_heads);
    const Eigen::Index dh = d / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    Matrix dx = Matrix::Zero(len, d);
    dx.row(0) = d_pooled.transpose();

    for (std::size_t li = p.layers.size(); li-- > 0;) {
        const LayerParams& l = p.layers[li];
        const LayerTape& t = tape.layers[li];
        LayerParams& g = grads.layers[li];

        // Feed-forward sub-block.
        Matrix d_res2 = layer_norm_backward(dx, l.ln2_gain, t.norm2, g.ln2_gain, g.ln2_bias);
        Matrix d_ffn = d_res2;
        apply_mask(d_ffn, t.ffn_mask);
        g.w2.noalias() += t.ffn_act.transpose() * d_ffn;
        g.b2.row(0) += d_ffn.colwise().sum();
        Matrix d_act = d_ffn * l.w2.transpose();
        Matrix d_pre = d_act.array() * t.ffn_pre.unaryExpr([](double v) { return gelu_grad(v); }).array();
        g.w1.noalias() += t.hidden.transpose() * d_pre;
        g.b1.row(0) += d_pre.colwise().sum();
        Matrix d_hidden = d_res2 + d_pre * l.w1.transpose();

        // Attention sub-block.
        Matrix d_res1 = layer_norm_backward(d_hidden, l.ln1_gain, t.norm1, g.ln1_gain, g.ln1_bias);
        Matrix d_attn = d_res1;
        apply_mask(d_attn, t.attn_mask);
        g.wo.noalias() += t.context.transpose() * d_attn;
        g.bo.row(0) += d_attn.colwise().sum();
        Matrix d_context = d_attn * l.wo.transpose();

        Matrix dq(len, d), dk(len, d), dv(len, d);
        for (Eigen::Index h = 0; h < heads; ++h) {
            const Matrix& probs = t.probs[static_cast<std::size_t>(h)];
            const auto d_ctx_h = d_context.middleCols(h * dh, dh);
            Matrix d_probs = d_ctx_h * t.v.middleCols(h * dh, dh).transpose();
            dv.middleCols(h * dh, dh) = probs.transpose() * d_ctx_h;
            Matrix d_scores(len, len);
            for (Eigen::Index i = 0; i < len; ++i) {
                const double dot = probs.row(i).dot(d_probs.row(i));
                d_scores.row(i) = probs.row(i).array() * (d_probs.row(i).array() - dot);
            }
            d_scores *= scale;
            dq.middleCols(h * dh, dh) = d_scores * t.k.middleCols(h * dh, dh);
            dk.middleCols(h * dh, dh) = d_scores.transpose() * t.q.middleCols(h * dh, dh);
        }
        g.wq.noalias() += t.input.transpose() * dq;
        g.wk.noalias() += t.input.transpose() * dk;
        g.wv.noalias() += t.input.transpose() * dv;
        g.bq.row(0) += dq.colwise().sum();
        g.bk.row(0) += dk.colwise().sum();
        g.bv.row(0) += dv.colwise().sum();
        dx = d_res1 + dq * l.wq.transpose() + dk * l.wk.transpose() + dv * l.wv.transpose();
    }

    apply_mask(dx, tape.embed_mask);
    Matrix d_embed = layer_norm_backward(dx, p.embedding_norm_gain, tape.embed_norm, grads.embedding_norm_gain,
                                         grads.embedding_norm_bias);
    for (Eigen::Index i = 0; i < len; ++i) {
        grads.token_embedding.row(tape.tokens[static_cast<std::size_t>(i)]) += d_embed.row(i);
        grads.position_embedding.row(i) += d_embed.row(i);
        if (cfg_->n_segments > 0)
            grads.segment_embedding.row(static_cast<Eigen::Index>(tape.segments[static_cast<std::size_t>(i)])) +=
                d_embed.row(i);
    }
}

}  // namespace mucos
