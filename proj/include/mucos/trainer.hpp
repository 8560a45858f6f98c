#pragma once
// Negative-sample-free training: every example is an observed training triple
// with its relation (or tail) as the class label; the softmax over the full
// class space supplies the contrast that corrupted triples would otherwise
// provide.

#include "mucos/context_sampler.hpp"
#include "mucos/evaluator.hpp"
#include "mucos/kg_store.hpp"
#include "mucos/model.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace mucos {

struct TrainConfig {
    double learning_rate = 5e-5;
    std::size_t batch_size = 16;
    std::size_t epochs = 50;
    double weight_decay = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t seed = 42;
    // Workers for per-example forward/backward; results do not depend on it.
    std::size_t threads = 1;

    void validate() const;
};

// Adam with decoupled weight decay. Decay applies to weight matrices and
// embeddings, not to biases or normalization parameters.
class AdamW {
public:
    AdamW(const ModelParams& shape, const TrainConfig& cfg);

    // Updates every tensor except those whose name starts with `frozen_prefix`.
    void step(ModelParams& params, const ModelParams& grads, const std::string& frozen_prefix = {});
    std::uint64_t steps() const noexcept { return t_; }

private:
    TrainConfig cfg_;
    ModelParams m_;
    ModelParams v_;
    std::uint64_t t_ = 0;
};

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double mean_loss = 0.0;
    std::size_t examples = 0;
    std::optional<MetricsReport> validation;
    double wall_seconds = 0.0;
};

struct TrainOptions {
    Task task = Task::tail;
    TrainConfig train;
    SamplerConfig sampler;
    // Sees every example the optimizer consumes, in order.
    std::function<void(std::size_t epoch, const TrainingExample&)> on_example;
    std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainResult {
    ModelState best;
    std::size_t best_epoch = 0;
    std::vector<EpochRecord> log;
};

// Trains `initial` on data.splits.train using contexts from `g`, which must be
// built from exactly that split. With a non-empty validation split the state
// with the highest validation MRR is returned (earliest on ties); otherwise the
// final state.
TrainResult train(ModelState initial, const Dataset& data, const GraphIndex& g, const TrainOptions& options);

}  // namespace mucos
