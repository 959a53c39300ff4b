// Copyright (c) 2026 flowsiren contributors
// SPDX-License-Identifier: Apache-2.0
//
// Scalar-templated loss heads shared by the public double API and the
// single-precision training path.

#pragma once

#include "flowsiren/siren_eval.hpp"

namespace fsiren::detail {

template <class S>
struct LossEval {
    S obs = S(0);
    S of = S(0);
    std::vector<LayerT<S>> grads;
};

// Forward with tangents, both loss terms, and the gradient of
// (1 - lambda) * L_obs + lambda * L_of with respect to the parameters.
template <class S>
LossEval<S> total_loss_gradients(const std::vector<LayerT<S>>& layers,
                                 std::type_identity_t<S> omega,
                                 const std::type_identity_t<MatX<S>>& coords,
                                 const std::type_identity_t<MatX<S>>& targets,
                                 const std::type_identity_t<MatX<S>>& flows,
                                 std::type_identity_t<S> lambda)
{
    const Eigen::Index batch = coords.cols();
    LossEval<S> out;
    if (batch == 0) {
        out.grads = zero_like(layers);
        return out;
    }

    EvalTrace<S> trace;
    eval_forward(layers, omega, coords, true, trace);

    const MatX<S> residual = trace.value - targets;
    out.obs = residual.squaredNorm() / static_cast<S>(batch);

    MatX<S> constraint = trace.deriv[0].array().rowwise() * flows.array().row(0);
    constraint.array() += trace.deriv[1].array().rowwise() * flows.array().row(1);
    constraint.array() += trace.deriv[2].array().rowwise() * flows.array().row(2);
    const S of_norm = S(1) / static_cast<S>(3 * batch);
    out.of = constraint.cwiseAbs().sum() * of_norm;

    OutputBar<S> bar;
    bar.value = (S(2) * (S(1) - lambda) / static_cast<S>(batch)) * residual;
    if (lambda > S(0)) {
        // Subgradient of |r| at 0 is taken as 0.
        const MatX<S> sign = constraint.array().sign().matrix();
        for (int d = 0; d < 3; ++d)
            bar.deriv[d] =
                (lambda * of_norm) * (sign.array().rowwise() * flows.array().row(d)).matrix();
        bar.with_deriv = true;
    }
    out.grads = eval_backward(layers, omega, trace, bar);
    return out;
}

} // namespace fsiren::detail
