// Copyright (c) 2026 flowsiren contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>

#include <Eigen/Dense>

#include "flowsiren/siren.hpp"

namespace fsiren {

struct LossConfig {
    double lambda = 0.12;
    void validate() const;
};

/// One unit of loss evaluation: normalized coordinates, scaled RGB targets
/// and normalized flow vectors (dx/dt, dy/dt, 1), all column-per-sample.
struct SampleBatch {
    Eigen::Matrix3Xd coords;
    std::optional<Eigen::Matrix3Xd> targets;
    std::optional<Eigen::Matrix3Xd> flows;

    Eigen::Index size() const { return coords.cols(); }
    void validate() const;
};

struct LossReport {
    double obs_loss = 0.0;
    double of_loss = 0.0;
    double total = 0.0;
    Eigen::Index sample_count = 0;
    bool warned_empty = false;
};

/// Mean over samples of the squared RGB error. Empty batches evaluate to 0
/// with the warning flag set instead of failing, so sweeps compose safely.
double observation_loss(const SirenModel& model, const SampleBatch& batch,
                        bool* warned_empty = nullptr);

/// Mean over samples and RGB channels of |(d_dx, d_dy, d_dt) . F| with
/// F = (dx/dt, dy/dt, 1) per sample: the optical-flow constraint residual.
double flow_constraint_loss(const SirenModel& model, const SampleBatch& batch);

/// The per-channel constraint arithmetic on an already-computed Jacobian.
double of_loss_from_jacobian(const JacobianBatch& jac, const Eigen::Matrix3Xd& flows);

/// (1 - lambda) * obs + lambda * of; reduces bit-exactly to either term at
/// the lambda endpoints.
double combine_losses(double obs_loss, double of_loss, double lambda);

LossReport total_loss(const SirenModel& model, const SampleBatch& batch,
                      const LossConfig& cfg);

/// One CSV row: epoch, obs_loss, of_loss, total, lambda.
std::string loss_report_csv_row(int epoch, const LossReport& report, double lambda);

struct LossGradients {
    ModelGrad grads;
    LossReport report;
};

/// dL/d theta for the lambda-weighted total loss on a batch, including the
/// second-order path through the input Jacobian inside the flow term.
LossGradients loss_gradients(const SirenModel& model, const SampleBatch& batch,
                             const LossConfig& cfg);

} // namespace fsiren
