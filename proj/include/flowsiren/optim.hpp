// Copyright (c) 2026 flowsiren contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "flowsiren/loss.hpp"
#include "flowsiren/siren.hpp"
#include "flowsiren/video.hpp"

namespace fsiren {

struct TrainConfig {
    double max_lr = 1e-5;
    int epochs = 5000;
    int batch_size = 4096;
    double lambda = 0.12;
    std::uint64_t seed = 0;
    enum class Precision { kF64, kF32 };
    Precision precision = Precision::kF64;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const;
};

/// max_lr * 0.5 * (1 + cos(pi * step / total_steps)); no warmup.
double cosine_lr(long step, long total_steps, double max_lr);

struct AdamState {
    std::vector<Layer> m;
    std::vector<Layer> v;
    long step = 0;
};

AdamState make_adam_state(const SirenModel& model);

/// Standard bias-corrected Adam update. A non-finite gradient or update
/// aborts the step, names the offending layer and leaves both the parameters
/// and the moment accumulators unchanged.
void adam_step(SirenModel& model, const ModelGrad& grads, AdamState& state, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8);

struct EpochLog {
    int epoch = 0;
    double lr = 0.0; // at the first step of the epoch
    double obs_loss = 0.0;
    double of_loss = 0.0;
    double total = 0.0;
    std::optional<double> observed_psnr;
    std::optional<double> interp_psnr;
};

struct EvalOptions {
    int cadence_epochs = 25; // full-grid PSNR every N epochs (and on the last)
};

struct CheckpointOptions {
    std::string model_path;
    std::string state_path;
    int cadence_epochs = 100;
};

/// Optimizer sidecar: step counter, resume epoch and the Adam moments, all
/// stored in f64 (lossless for the f32 path).
struct TrainState {
    long step = 0;
    int next_epoch = 0;
    std::vector<Layer> m;
    std::vector<Layer> v;
};

void save_train_state(const TrainState& state, const std::string& path);
TrainState load_train_state(const std::string& path, const SirenModel& shape);

struct FitResult {
    SirenModel model;
    std::vector<EpochLog> log;
    long steps = 0;
};

/// Epoch-based minimization of the weighted total loss over the observed
/// coordinates. Each epoch is one shuffled full pass; the learning rate
/// follows the cosine schedule per step with total_steps = epochs *
/// steps_per_epoch. Deterministic for a fixed (config, seed, data).
///
/// A non-finite loss, gradient or update saves a last-good checkpoint (when
/// checkpointing is configured) and raises NumericError.
FitResult fit(const SirenModel& init_model, const VideoTensor& video,
              const std::vector<NormalizedFlowGrid>& flows, const TrainConfig& cfg,
              const EvalOptions& eval = {},
              const CheckpointOptions* checkpoint = nullptr,
              const std::function<void(const EpochLog&)>& on_epoch = {},
              const TrainState* resume = nullptr);

} // namespace fsiren
