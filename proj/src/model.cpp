#include "mucos/model.hpp"

#include "mucos/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

namespace mucos {

std::string to_string(Task task) { return task == Task::relation ? "relation" : "tail"; }

Task parse_task(const std::string& text) {
    if (text == "relation") return Task::relation;
    if (text == "tail") return Task::tail;
    throw ConfigError("unknown task '" + text + "' (expected relation|tail)");
}

std::vector<NamedTensor> ModelParams::tensors() {
    std::vector<NamedTensor> out;
    visit(*this, [&](const std::string& name, Matrix& m) { out.push_back({name, &m}); });
    return out;
}

std::vector<ConstNamedTensor> ModelParams::tensors() const {
    std::vector<ConstNamedTensor> out;
    visit(*this, [&](const std::string& name, const Matrix& m) { out.push_back({name, &m}); });
    return out;
}

ModelParams ModelParams::zeros_like() const {
    ModelParams z = *this;
    visit(z, [](const std::string&, Matrix& m) { m.setZero(); });
    return z;
}

std::size_t ModelParams::parameter_count() const {
    std::size_t n = 0;
    visit(*this, [&](const std::string&, const Matrix& m) { n += static_cast<std::size_t>(m.size()); });
    return n;
}

ModelState ModelState::initialize(const EncoderConfig& cfg, std::size_t entity_count, std::size_t relation_count,
                                  std::uint64_t seed) {
    cfg.validate();
    std::mt19937_64 rng(seed);
    ModelState s;
    s.encoder_config = cfg;
    s.entity_count = entity_count;
    s.relation_count = relation_count;
    s.params.encoder = EncoderParams::initialize(cfg, s.token_vocab().size(), rng);
    const auto d = static_cast<Eigen::Index>(cfg.d_model);
    const double stddev = 1.0 / std::sqrt(static_cast<double>(cfg.d_model));
    std::normal_distribution<double> dist(0.0, stddev);
    const auto fill = [&](Eigen::Index cols) {
        Matrix m(d, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < d; ++i) m(i, j) = dist(rng);
        return m;
    };
    s.params.relation_weight = fill(static_cast<Eigen::Index>(relation_count));
    s.params.relation_bias = Matrix::Zero(1, static_cast<Eigen::Index>(relation_count));
    s.params.tail_weight = fill(static_cast<Eigen::Index>(entity_count));
    s.params.tail_bias = Matrix::Zero(1, static_cast<Eigen::Index>(entity_count));
    return s;
}

ModelState ModelState::initialize(const EncoderConfig& cfg, const Vocabulary& vocab, std::uint64_t seed) {
    ModelState s = initialize(cfg, vocab.entity_count(), vocab.relation_count(), seed);
    s.vocab_hash = vocab.hash();
    return s;
}

std::vector<TokenId> build_input(Task task, const GraphIndex& g, const Triple& query, const SamplerConfig& cfg,
                                 const TokenVocab& vocab, std::size_t max_len) {
    const auto head_agg = head_context(g, query.head, cfg).aggregate();
    if (task == Task::relation) {
        const auto tail_agg = tail_context(g, query.tail, cfg).aggregate();
        return build_relation_input(query.head, head_agg, query.tail, tail_agg, vocab, max_len);
    }
    const auto rel_agg = relation_context(g, query.relation, cfg).aggregate();
    return build_tail_input(query.head, head_agg, query.relation, rel_agg, vocab, max_len);
}

Vector head_logits(const ModelParams& params, Task task, const Vector& pooled) {
    const Matrix& w = task == Task::relation ? params.relation_weight : params.tail_weight;
    const Matrix& b = task == Task::relation ? params.relation_bias : params.tail_bias;
    return w.transpose() * pooled + b.transpose();
}

std::vector<double> softmax(const Vector& logits) {
    std::vector<double> out(static_cast<std::size_t>(logits.size()));
    if (out.empty()) return out;
    const double mx = logits.maxCoeff();
    double sum = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = std::exp(logits(static_cast<Eigen::Index>(i)) - mx);
        sum += out[i];
    }
    for (double& p : out) p /= sum;
    return out;
}

std::vector<double> predict(const ModelState& state, const Encoder& encoder, Task task,
                            std::span<const TokenId> tokens) {
    return softmax(head_logits(state.params, task, encoder.encode(tokens)));
}

std::vector<double> predict_relation(const ModelState& state, const GraphIndex& g, EntityId h, EntityId t,
                                     const SamplerConfig& cfg) {
    const Triple q{h, RelationId{}, t};
    const auto tokens = build_input(Task::relation, g, q, cfg, state.token_vocab(), state.encoder_config.max_seq_len);
    return predict(state, state.encoder(), Task::relation, tokens);
}

std::vector<double> predict_tail(const ModelState& state, const GraphIndex& g, EntityId h, RelationId r,
                                 const SamplerConfig& cfg) {
    const Triple q{h, r, EntityId{}};
    const auto tokens = build_input(Task::tail, g, q, cfg, state.token_vocab(), state.encoder_config.max_seq_len);
    return predict(state, state.encoder(), Task::tail, tokens);
}

double cross_entropy(std::span<const double> probs, std::size_t label, double epsilon) {
    if (label >= probs.size()) throw ContractError("label outside the class space");
    return -std::log(std::max(probs[label], epsilon));
}

TrainingExample make_example(Task task, const GraphIndex& g, const Triple& triple, const SamplerConfig& cfg,
                             const TokenVocab& vocab, std::size_t max_len) {
    TrainingExample ex;
    ex.input_tokens = build_input(task, g, triple, cfg, vocab, max_len);
    ex.label = truth_of(task, triple);
    ex.source = triple;
    return ex;
}

ExampleGradient example_gradient(const ModelState& state, Task task, const TrainingExample& example,
                                 std::mt19937_64* dropout_rng, EncoderParams& encoder_grads) {
    if (example.label >= state.class_count(task)) throw ContractError("label outside the class space");
    const TransformerEncoder encoder = state.encoder();
    const EncoderTape tape = encoder.forward(example.input_tokens, dropout_rng);

    ExampleGradient eg;
    eg.pooled = tape.pooled();
    const Vector logits = head_logits(state.params, task, eg.pooled);
    const auto label = static_cast<Eigen::Index>(example.label);
    const double mx = logits.maxCoeff();
    const double log_z = mx + std::log((logits.array() - mx).exp().sum());
    const double max_loss = -std::log(kLogEpsilon);
    const double raw_loss = log_z - logits(label);

    eg.d_logits = (logits.array() - log_z).exp().matrix();
    if (raw_loss > max_loss) {
        // Clamped: the loss is constant in the parameters here.
        eg.loss = max_loss;
        eg.d_logits.setZero();
    } else {
        eg.loss = raw_loss;
        eg.d_logits(label) -= 1.0;
    }

    const Matrix& w = task == Task::relation ? state.params.relation_weight : state.params.tail_weight;
    const Vector d_pooled = w * eg.d_logits;
    encoder.backward(tape, d_pooled, encoder_grads);
    return eg;
}

void accumulate_head_gradient(Task task, const ExampleGradient& eg, double weight, ModelParams& grads) {
    Matrix& gw = task == Task::relation ? grads.relation_weight : grads.tail_weight;
    Matrix& gb = task == Task::relation ? grads.relation_bias : grads.tail_bias;
    gw.noalias() += weight * eg.pooled * eg.d_logits.transpose();
    gb.row(0) += weight * eg.d_logits.transpose();
}

double loss_and_gradient(const ModelState& state, Task task, const TrainingExample& example, ModelParams& grads) {
    const ExampleGradient eg = example_gradient(state, task, example, nullptr, grads.encoder);
    accumulate_head_gradient(task, eg, 1.0, grads);
    return eg.loss;
}

double example_loss(const ModelState& state, Task task, const TrainingExample& example) {
    const auto probs = predict(state, state.encoder(), task, example.input_tokens);
    return cross_entropy(probs, example.label);
}

GradientCheckReport gradient_check(const ModelState& state, Task task, const TrainingExample& example,
                                   std::size_t samples_per_tensor, std::uint64_t seed, double step) {
    ModelParams grads = state.params.zeros_like();
    loss_and_gradient(state, task, example, grads);

    ModelState probe = state;
    auto probe_tensors = probe.params.tensors();
    const auto grad_tensors = std::as_const(grads).tensors();
    const std::string skip = task == Task::relation ? "tail_head." : "relation_head.";

    std::mt19937_64 rng(seed);
    GradientCheckReport report;
    for (std::size_t ti = 0; ti < probe_tensors.size(); ++ti) {
        const std::string& name = probe_tensors[ti].name;
        if (name.rfind(skip, 0) == 0) continue;
        Matrix& param = *probe_tensors[ti].value;
        const Matrix& grad = *grad_tensors[ti].value;
        const auto n = static_cast<std::size_t>(param.size());
        std::vector<std::size_t> picks(n);
        std::iota(picks.begin(), picks.end(), std::size_t{0});
        if (n > samples_per_tensor) {
            std::shuffle(picks.begin(), picks.end(), rng);
            picks.resize(samples_per_tensor);
        }
        for (std::size_t flat : picks) {
            double& slot = param.data()[flat];
            const double original = slot;
            slot = original + step;
            const double up = example_loss(probe, task, example);
            slot = original - step;
            const double down = example_loss(probe, task, example);
            slot = original;
            const double numeric = (up - down) / (2.0 * step);
            const double analytic = grad.data()[flat];
            const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
            const double rel = std::abs(analytic - numeric) / denom;
            ++report.checked;
            if (rel > report.max_relative_error) {
                report.max_relative_error = rel;
                report.worst_tensor = name;
            }
        }
    }
    return report;
}

std::vector<double> ModelScorer::score(Task task, const Triple& query) const {
    const auto tokens =
        build_input(task, *graph_, query, cfg_, state_->token_vocab(), state_->encoder_config.max_seq_len);
    return predict(*state_, state_->encoder(), task, tokens);
}

}  // namespace mucos
