#pragma once
// Relation and tail classifiers on top of the sequence encoder.
//
//   P(r | h, t) = softmax(W_r^T encode([BOS, h, SEP, H_agg, SEP, t, SEP, T_agg]) + b_r)
//   P(t | h, r) = softmax(W_t^T encode([BOS, h, SEP, H_agg, SEP, r, SEP, R_agg]) + b_t)
//
// Both heads share one encoder parameter set in ModelState, but each training
// run optimizes a single task.

#include "mucos/context_sampler.hpp"
#include "mucos/encoder.hpp"
#include "mucos/kg_store.hpp"
#include "mucos/task.hpp"
#include "mucos/tokens.hpp"

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace mucos {

struct ModelParams {
    EncoderParams encoder;
    Matrix relation_weight;  // d_model x |R|
    Matrix relation_bias;    // 1 x |R|
    Matrix tail_weight;      // d_model x |E|
    Matrix tail_bias;        // 1 x |E|

    template <class Self, class F>
    static void visit(Self& self, F&& f) {
        EncoderParams::visit(self.encoder, f);
        f(std::string("relation_head.weight"), self.relation_weight);
        f(std::string("relation_head.bias"), self.relation_bias);
        f(std::string("tail_head.weight"), self.tail_weight);
        f(std::string("tail_head.bias"), self.tail_bias);
    }

    std::vector<NamedTensor> tensors();
    std::vector<ConstNamedTensor> tensors() const;
    ModelParams zeros_like() const;
    std::size_t parameter_count() const;
};

struct ModelState {
    EncoderConfig encoder_config;
    std::size_t entity_count = 0;
    std::size_t relation_count = 0;
    ModelParams params;
    std::uint64_t step = 0;
    std::uint64_t vocab_hash = 0;

    static ModelState initialize(const EncoderConfig& cfg, std::size_t entity_count, std::size_t relation_count,
                                 std::uint64_t seed);
    static ModelState initialize(const EncoderConfig& cfg, const Vocabulary& vocab, std::uint64_t seed);

    TokenVocab token_vocab() const { return {entity_count, relation_count}; }
    TransformerEncoder encoder() const { return {encoder_config, params.encoder}; }
    std::size_t class_count(Task task) const { return task == Task::relation ? relation_count : entity_count; }
};

// Builds the encoder input for a query; the task's masked slot is not read.
std::vector<TokenId> build_input(Task task, const GraphIndex& g, const Triple& query, const SamplerConfig& cfg,
                                 const TokenVocab& vocab, std::size_t max_len);

Vector head_logits(const ModelParams& params, Task task, const Vector& pooled);
std::vector<double> softmax(const Vector& logits);

// Distribution over the task's classes for an already-built input.
std::vector<double> predict(const ModelState& state, const Encoder& encoder, Task task,
                            std::span<const TokenId> tokens);

std::vector<double> predict_relation(const ModelState& state, const GraphIndex& g, EntityId h, EntityId t,
                                     const SamplerConfig& cfg);
std::vector<double> predict_tail(const ModelState& state, const GraphIndex& g, EntityId h, RelationId r,
                                 const SamplerConfig& cfg);

inline constexpr double kLogEpsilon = 1e-12;

// -log(max(probs[label], epsilon)).
double cross_entropy(std::span<const double> probs, std::size_t label, double epsilon = kLogEpsilon);

struct TrainingExample {
    std::vector<TokenId> input_tokens;
    std::size_t label = 0;
    Triple source{};
};

TrainingExample make_example(Task task, const GraphIndex& g, const Triple& triple, const SamplerConfig& cfg,
                             const TokenVocab& vocab, std::size_t max_len);

// Forward + backward for one example. Encoder gradients are accumulated into
// `encoder_grads`; the head gradient is returned in factored form
// (d loss / d W = pooled * d_logits^T, d loss / d b = d_logits^T).
struct ExampleGradient {
    double loss = 0.0;
    Vector pooled;
    Vector d_logits;
};

ExampleGradient example_gradient(const ModelState& state, Task task, const TrainingExample& example,
                                 std::mt19937_64* dropout_rng, EncoderParams& encoder_grads);

void accumulate_head_gradient(Task task, const ExampleGradient& eg, double weight, ModelParams& grads);

// Loss and full gradient (no dropout).
double loss_and_gradient(const ModelState& state, Task task, const TrainingExample& example, ModelParams& grads);
double example_loss(const ModelState& state, Task task, const TrainingExample& example);

struct GradientCheckReport {
    double max_relative_error = 0.0;
    std::string worst_tensor;
    std::size_t checked = 0;
};

// Compares analytic gradients with central finite differences on up to
// `samples_per_tensor` randomly chosen entries of every tensor. Relative error
// is |a - n| / max(|a|, |n|, 1e-6). The head of the other task is skipped since
// it has no path to the loss.
GradientCheckReport gradient_check(const ModelState& state, Task task, const TrainingExample& example,
                                   std::size_t samples_per_tensor = 25, std::uint64_t seed = 7,
                                   double step = 1e-5);

class ModelScorer final : public Scorer {
public:
    ModelScorer(const ModelState& state, const GraphIndex& g, SamplerConfig cfg)
        : state_(&state), graph_(&g), cfg_(cfg) {}

    std::vector<double> score(Task task, const Triple& query) const override;

private:
    const ModelState* state_;
    const GraphIndex* graph_;
    SamplerConfig cfg_;
};

}  // namespace mucos
