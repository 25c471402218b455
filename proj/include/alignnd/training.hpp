#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "alignnd/data.hpp"
#include "alignnd/model.hpp"
#include "alignnd/peak.hpp"

namespace alignnd {

struct TrainConfig {
    int batch_size = 128;  // M
    int epochs = 1000;     // N_ep
    double lr_init = 1e-4;
    double lr_max = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    double warmup_fraction = 0.3;
    std::uint64_t seed = 0;
    int threads = 1;

    void validate() const;
};

// Mean over samples and over the 3 Gaussian parameters of the squared
// difference. Throws std::invalid_argument on an empty batch.
double mse_loss(std::span<const GaussianPeak> pred, std::span<const GaussianPeak> target);

// MSE restricted to one component (0 = mu, 1 = sigma, 2 = amplitude).
double mse_component(std::span<const GaussianPeak> pred, std::span<const GaussianPeak> target,
                     int component);

struct AdamState {
    std::vector<Array> m, v;  // first/second moments, shapes match parameters
    long step = 0;

    explicit AdamState(std::span<Parameter* const> params);
};

// Standard bias-corrected Adam update of params from their .grad fields.
void adam_step(std::span<Parameter* const> params, AdamState& state, double lr, double beta1,
               double beta2, double eps);

// 1cycle schedule: linear ramp lr_init -> lr_max over the first 30% of
// steps, cosine decay lr_max -> lr_init/10 over the rest. Throws
// std::out_of_range when step is outside [0, total_steps).
double one_cycle_lr(long step, long total_steps, const TrainConfig& cfg);

struct TrainHistory {
    std::vector<double> train_loss;
    std::vector<double> val_loss;
    std::vector<double> lr;  // learning rate of the epoch's last optimizer step
    std::vector<double> val_component_mse[3];
};

struct TrainResult {
    ModelState best_state;  // lowest validation loss seen
    ModelState final_state;
    TrainHistory history;
    double best_val_loss = 0.0;
    int best_epoch = -1;
};

// Optional early-stop hook, checked after each epoch's validation pass.
using StopCondition = std::function<bool(int epoch, const TrainHistory&)>;

// Records compiled against one representation, ready to train on.
struct CompiledDataset {
    std::vector<CompiledBundle> bundles;
    std::vector<GaussianPeak> targets;
    std::vector<Array> target_rows;  // [1,3] per record
};

CompiledDataset compile_dataset(std::span<const Record> records, const ModelConfig& cfg,
                                std::span<const BondRule> rules = {});

// MSE training with Adam and the 1cycle schedule: seeded shuffled
// mini-batches (last partial batch kept), per-epoch validation, and a
// checkpoint of the best-validation state. Per-sample forward/backward
// runs on cfg.threads threads; gradients reduce in fixed sample order, so
// results are independent of the thread count. Throws NumericError if the
// loss turns non-finite.
TrainResult train(std::span<const Record> train_records, std::span<const Record> val_records,
                  const ModelConfig& model_cfg, const TrainConfig& train_cfg,
                  std::span<const BondRule> rules = {}, const StopCondition& stop = nullptr);

// Forward passes over a compiled dataset (threaded, deterministic order).
std::vector<GaussianPeak> predict_all(const CompiledDataset& data, const ModelState& state,
                                      int threads);

}  // namespace alignnd
