// Copyright (c) 2026 flowsiren contributors
// SPDX-License-Identifier: Apache-2.0

#include "flowsiren/loss.hpp"

#include <cmath>

#include "flowsiren/loss_eval.hpp"

namespace fsiren {

void LossConfig::validate() const
{
    FSN_CHECK_CONFIG(lambda >= 0.0 && lambda <= 1.0 && std::isfinite(lambda),
                     "LossConfig: lambda must lie in [0, 1], got ", lambda);
}

void SampleBatch::validate() const
{
    if (targets)
        FSN_CHECK(targets->cols() == coords.cols(), "SampleBatch: ", targets->cols(),
                  " targets for ", coords.cols(), " coordinates");
    if (flows) {
        FSN_CHECK(flows->cols() == coords.cols(), "SampleBatch: ", flows->cols(),
                  " flow vectors for ", coords.cols(), " coordinates");
        for (Eigen::Index i = 0; i < flows->cols(); ++i)
            FSN_CHECK((*flows)(2, i) == 1.0,
                      "SampleBatch: flow third component must be exactly 1, got ",
                      (*flows)(2, i), " at sample ", i);
    }
}

double observation_loss(const SirenModel& model, const SampleBatch& batch,
                        bool* warned_empty)
{
    batch.validate();
    FSN_CHECK(batch.targets.has_value(), "observation_loss: batch has no targets");
    if (warned_empty)
        *warned_empty = false;
    if (batch.size() == 0) {
        if (warned_empty)
            *warned_empty = true;
        return 0.0;
    }
    const Eigen::Matrix3Xd value = forward(model, batch.coords);
    return (value - *batch.targets).squaredNorm() / static_cast<double>(batch.size());
}

double of_loss_from_jacobian(const JacobianBatch& jac, const Eigen::Matrix3Xd& flows)
{
    FSN_CHECK(flows.cols() == jac.size(),
              "of_loss_from_jacobian: flow batch size mismatch");
    const Eigen::Index batch = jac.size();
    if (batch == 0)
        return 0.0;
    Eigen::Matrix3Xd constraint =
        (jac.deriv[0].array().rowwise() * flows.array().row(0)).matrix();
    constraint.array() += jac.deriv[1].array().rowwise() * flows.array().row(1);
    constraint.array() += jac.deriv[2].array().rowwise() * flows.array().row(2);
    return constraint.cwiseAbs().sum() / static_cast<double>(3 * batch);
}

double flow_constraint_loss(const SirenModel& model, const SampleBatch& batch)
{
    batch.validate();
    FSN_CHECK(batch.flows.has_value(), "flow_constraint_loss: batch has no flows");
    if (batch.size() == 0)
        return 0.0;
    return of_loss_from_jacobian(forward_with_jacobian(model, batch.coords), *batch.flows);
}

double combine_losses(double obs_loss, double of_loss, double lambda)
{
    return (1.0 - lambda) * obs_loss + lambda * of_loss;
}

LossReport total_loss(const SirenModel& model, const SampleBatch& batch,
                      const LossConfig& cfg)
{
    cfg.validate();
    batch.validate();
    FSN_CHECK(batch.targets.has_value(), "total_loss: batch has no targets");
    FSN_CHECK(batch.flows.has_value(), "total_loss: batch has no flows");

    LossReport report;
    report.sample_count = batch.size();
    if (batch.size() == 0) {
        report.warned_empty = true;
        return report;
    }
    const JacobianBatch jac = forward_with_jacobian(model, batch.coords);
    report.obs_loss =
        (jac.value - *batch.targets).squaredNorm() / static_cast<double>(batch.size());
    report.of_loss = of_loss_from_jacobian(jac, *batch.flows);
    report.total = combine_losses(report.obs_loss, report.of_loss, cfg.lambda);
    return report;
}

std::string loss_report_csv_row(int epoch, const LossReport& report, double lambda)
{
    return concat(epoch, ',', format_double(report.obs_loss), ',',
                  format_double(report.of_loss), ',', format_double(report.total), ',',
                  format_double(lambda));
}

LossGradients loss_gradients(const SirenModel& model, const SampleBatch& batch,
                             const LossConfig& cfg)
{
    cfg.validate();
    batch.validate();
    FSN_CHECK(batch.targets.has_value(), "loss_gradients: batch has no targets");
    FSN_CHECK(batch.flows.has_value(), "loss_gradients: batch has no flows");

    LossGradients out;
    out.report.sample_count = batch.size();
    if (batch.size() == 0) {
        out.report.warned_empty = true;
        out.grads = zero_grads(model);
        return out;
    }
    // The eval core does not re-validate inputs; reject non-finite here.
    for (Eigen::Index i = 0; i < batch.coords.cols(); ++i)
        for (int r = 0; r < 3; ++r)
            FSN_CHECK(std::isfinite(batch.coords(r, i)),
                      "non-finite input coordinate at batch index ", i);

    detail::LossEval<double> eval = detail::total_loss_gradients<double>(
        model.layers, model.config.omega, batch.coords, *batch.targets, *batch.flows,
        cfg.lambda);
    out.report.obs_loss = eval.obs;
    out.report.of_loss = eval.of;
    out.report.total = combine_losses(eval.obs, eval.of, cfg.lambda);
    out.grads = std::move(eval.grads);
    return out;
}

} // namespace fsiren
