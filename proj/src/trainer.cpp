#include "mucos/trainer.hpp"

#include "mucos/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

namespace mucos {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

bool decays(const std::string& name) {
    const auto ends_with = [&](const char* suffix) {
        const std::string s(suffix);
        return name.size() >= s.size() && name.compare(name.size() - s.size(), s.size(), s) == 0;
    };
    return !ends_with(".bias") && !ends_with(".gain");
}

void add_encoder(EncoderParams& into, const EncoderParams& from) {
    std::vector<Matrix*> dst;
    std::vector<const Matrix*> src;
    EncoderParams::visit(into, [&](const std::string&, Matrix& m) { dst.push_back(&m); });
    EncoderParams::visit(from, [&](const std::string&, const Matrix& m) { src.push_back(&m); });
    for (std::size_t i = 0; i < dst.size(); ++i) *dst[i] += *src[i];
}

}  // namespace

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (batch_size == 0) throw ConfigError("batch_size must be positive");
    if (epochs == 0) throw ConfigError("epochs must be positive");
    if (weight_decay < 0.0) throw ConfigError("weight_decay must be non-negative");
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("betas must lie in [0, 1)");
    if (!(adam_epsilon > 0.0)) throw ConfigError("adam_epsilon must be positive");
}

AdamW::AdamW(const ModelParams& shape, const TrainConfig& cfg)
    : cfg_(cfg), m_(shape.zeros_like()), v_(shape.zeros_like()) {}

void AdamW::step(ModelParams& params, const ModelParams& grads, const std::string& frozen_prefix) {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    auto p = params.tensors();
    const auto g = grads.tensors();
    auto m = m_.tensors();
    auto v = v_.tensors();
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!frozen_prefix.empty() && p[i].name.rfind(frozen_prefix, 0) == 0) continue;
        Matrix& w = *p[i].value;
        const Matrix& grad = *g[i].value;
        Matrix& mi = *m[i].value;
        Matrix& vi = *v[i].value;
        mi = cfg_.beta1 * mi + (1.0 - cfg_.beta1) * grad;
        vi = cfg_.beta2 * vi + (1.0 - cfg_.beta2) * grad.cwiseProduct(grad);
        if (decays(p[i].name)) w *= 1.0 - cfg_.learning_rate * cfg_.weight_decay;
        w.array() -= cfg_.learning_rate * (mi.array() / bc1) / ((vi.array() / bc2).sqrt() + cfg_.adam_epsilon);
    }
}

TrainResult train(ModelState initial, const Dataset& data, const GraphIndex& g, const TrainOptions& options) {
    const TrainConfig& tc = options.train;
    tc.validate();
    options.sampler.validate();
    const auto& train_split = data.splits.train;
    if (train_split.empty()) throw ConfigError("training split is empty");
    if (g.triple_count() != train_split.size())
        throw ConfigError("graph index must be built from the training split only");
    if (initial.entity_count != data.vocab.entity_count() || initial.relation_count != data.vocab.relation_count())
        throw ConfigError("model vocabulary sizes do not match the dataset");

    const Task task = options.task;
    const TokenVocab vocab = initial.token_vocab();
    const std::size_t max_len = initial.encoder_config.max_seq_len;

    // Contexts are deterministic, so examples are built once.
    std::vector<TrainingExample> examples;
    examples.reserve(train_split.size());
    for (const Triple& t : train_split) examples.push_back(make_example(task, g, t, options.sampler, vocab, max_len));

    TrainResult result;
    ModelState state = std::move(initial);
    AdamW optimizer(state.params, tc);
    const std::string frozen = task == Task::relation ? "tail_head." : "relation_head.";

    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 shuffle_rng(tc.seed);

    const std::size_t slots = std::min(tc.batch_size, examples.size());
    std::vector<EncoderParams> slot_grads(slots, state.params.encoder.zeros_like());
    std::vector<ExampleGradient> slot_results(slots);
    ModelParams grads = state.params.zeros_like();

    std::optional<double> best_mrr;
    EvalConfig val_cfg;
    val_cfg.threads = tc.threads;

    for (std::size_t epoch = 1; epoch <= tc.epochs; ++epoch) {
        const auto started = std::chrono::steady_clock::now();
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double loss_sum = 0.0;

        for (std::size_t begin = 0; begin < order.size(); begin += tc.batch_size) {
            const std::size_t count = std::min(tc.batch_size, order.size() - begin);
            for (std::size_t s = 0; s < count; ++s) {
                EncoderParams::visit(slot_grads[s], [](const std::string&, Matrix& m) { m.setZero(); });
                if (options.on_example) options.on_example(epoch, examples[order[begin + s]]);
            }

            const auto run = [&](std::size_t s) {
                const std::size_t idx = order[begin + s];
                std::mt19937_64 dropout_rng(splitmix64(tc.seed ^ splitmix64(epoch * 0x100000001ULL + begin + s)));
                slot_results[s] = example_gradient(state, task, examples[idx], &dropout_rng, slot_grads[s]);
            };
            const std::size_t workers = std::clamp<std::size_t>(tc.threads, 1, count);
            if (workers == 1) {
                for (std::size_t s = 0; s < count; ++s) run(s);
            } else {
                std::vector<std::thread> pool;
                std::vector<std::exception_ptr> errors(workers);
                for (std::size_t w = 0; w < workers; ++w) {
                    pool.emplace_back([&, w] {
                        try {
                            for (std::size_t s = w; s < count; s += workers) run(s);
                        } catch (...) {
                            errors[w] = std::current_exception();
                        }
                    });
                }
                for (auto& t : pool) t.join();
                for (auto& e : errors) {
                    if (e) std::rethrow_exception(e);
                }
            }

            // Reduce in example order so results do not depend on `threads`.
            ModelParams::visit(grads, [](const std::string&, Matrix& m) { m.setZero(); });
            const double weight = 1.0 / static_cast<double>(count);
            for (std::size_t s = 0; s < count; ++s) {
                add_encoder(grads.encoder, slot_grads[s]);
                accumulate_head_gradient(task, slot_results[s], weight, grads);
                loss_sum += slot_results[s].loss;
            }
            EncoderParams::visit(grads.encoder, [&](const std::string&, Matrix& m) { m *= weight; });
            optimizer.step(state.params, grads, frozen);
            ++state.step;
        }

        EpochRecord record;
        record.epoch = epoch;
        record.examples = examples.size();
        record.mean_loss = loss_sum / static_cast<double>(examples.size());
        if (!data.splits.valid.empty()) {
            const ModelScorer scorer(state, g, options.sampler);
            auto eval = evaluate(scorer, data.splits.valid, task, data, val_cfg);
            record.validation = eval.reports.front();
        }
        record.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

        const bool improved =
            !record.validation || !best_mrr || record.validation->mrr > *best_mrr;
        if (improved) {
            if (record.validation) best_mrr = record.validation->mrr;
            result.best = state;
            result.best_epoch = epoch;
        }
        result.log.push_back(record);
        if (options.on_epoch) options.on_epoch(record);
    }
    return result;
}

}  // namespace mucos
