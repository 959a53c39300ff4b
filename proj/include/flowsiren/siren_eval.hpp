// Copyright (c) 2026 flowsiren contributors
// SPDX-License-Identifier: Apache-2.0
//
// Scalar-templated evaluation core shared by the double-precision public API
// and the optional single-precision training path.
//
// Forward pass per sine layer l (column = sample):
//   A_l  = W_l Z_{l-1} + b_l
//   Z_l  = sin(omega A_l)
// and, when input tangents are requested, for each input direction d:
//   TA_{l,d} = W_l TZ_{l-1,d}
//   TZ_{l,d} = omega cos(omega A_l) .* TA_{l,d}
// seeded with TZ_{-1,d} = e_d 1^T. The final layer is affine, so
// value = W_L Z_{L-1} + b_L and deriv_d = W_L TZ_{L-1,d}.
//
// The reverse pass below differentiates the whole augmented computation with
// respect to the parameters, including the second-order path through
// cos(omega A_l) in the tangent recurrence.

#pragma once

#include <array>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "flowsiren/siren.hpp"

namespace fsiren::detail {

template <class S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <class To, class From>
std::vector<LayerT<To>> cast_layers(const std::vector<LayerT<From>>& in)
{
    std::vector<LayerT<To>> out;
    out.reserve(in.size());
    for (const auto& l : in)
        out.push_back({l.weight.template cast<To>(), l.bias.template cast<To>()});
    return out;
}

template <class S>
struct EvalTrace {
    MatX<S> input;                              // 3 x B coordinates
    std::vector<MatX<S>> sin_wa;                // per sine layer, == Z_l
    std::vector<MatX<S>> cos_wa;                // per sine layer
    std::array<std::vector<MatX<S>>, 3> ta;     // tangent pre-activations
    std::array<std::vector<MatX<S>>, 3> tz;     // tangent activations
    MatX<S> value;                              // out_dim x B
    std::array<MatX<S>, 3> deriv;               // d/dx, d/dy, d/dt
    bool with_tangents = false;
};

template <class S>
void eval_forward(const std::vector<LayerT<S>>& layers, std::type_identity_t<S> omega,
                  std::type_identity_t<MatX<S>> coords, bool with_tangents,
                  EvalTrace<S>& trace)
{
    const auto num_layers = static_cast<Eigen::Index>(layers.size());
    const Eigen::Index batch = coords.cols();
    const Eigen::Index num_sine = num_layers - 1;

    trace.input = std::move(coords);
    trace.with_tangents = with_tangents;
    trace.sin_wa.assign(static_cast<std::size_t>(num_sine), {});
    trace.cos_wa.assign(static_cast<std::size_t>(num_sine), {});
    for (int d = 0; d < 3; ++d) {
        trace.ta[d].assign(with_tangents ? static_cast<std::size_t>(num_sine) : 0, {});
        trace.tz[d].assign(with_tangents ? static_cast<std::size_t>(num_sine) : 0, {});
    }

    MatX<S> z = trace.input;
    std::array<MatX<S>, 3> tz;
    if (with_tangents) {
        for (int d = 0; d < 3; ++d) {
            tz[d] = MatX<S>::Zero(3, batch);
            tz[d].row(d).setOnes();
        }
    }

    for (Eigen::Index l = 0; l < num_layers; ++l) {
        MatX<S> a = layers[l].weight * z;
        a.colwise() += layers[l].bias;
        if (l == num_layers - 1) {
            trace.value = std::move(a);
            if (with_tangents)
                for (int d = 0; d < 3; ++d)
                    trace.deriv[d] = layers[l].weight * tz[d];
        } else {
            auto& sin_wa = trace.sin_wa[static_cast<std::size_t>(l)];
            auto& cos_wa = trace.cos_wa[static_cast<std::size_t>(l)];
            sin_wa = (omega * a.array()).sin().matrix();
            cos_wa = (omega * a.array()).cos().matrix();
            z = sin_wa;
            if (with_tangents) {
                for (int d = 0; d < 3; ++d) {
                    auto& ta = trace.ta[d][static_cast<std::size_t>(l)];
                    ta = layers[l].weight * tz[d];
                    trace.tz[d][static_cast<std::size_t>(l)] =
                        omega * cos_wa.cwiseProduct(ta);
                    tz[d] = trace.tz[d][static_cast<std::size_t>(l)];
                }
            }
        }
    }
}

template <class S>
struct OutputBar {
    MatX<S> value;                  // dL/d value, out_dim x B
    std::array<MatX<S>, 3> deriv;   // dL/d deriv_d, used when with_deriv
    bool with_deriv = false;
};

template <class S>
std::vector<LayerT<S>> zero_like(const std::vector<LayerT<S>>& layers)
{
    std::vector<LayerT<S>> g;
    g.reserve(layers.size());
    for (const auto& l : layers)
        g.push_back({MatX<S>::Zero(l.weight.rows(), l.weight.cols()),
                     VecX<S>::Zero(l.bias.size())});
    return g;
}

template <class S>
std::vector<LayerT<S>> eval_backward(const std::vector<LayerT<S>>& layers,
                                     std::type_identity_t<S> omega_in,
                                     const EvalTrace<S>& trace, const OutputBar<S>& bar)
{
    const S omega = omega_in;
    const auto num_layers = static_cast<Eigen::Index>(layers.size());
    const Eigen::Index last = num_layers - 1;
    const bool with_deriv = bar.with_deriv;
    FSN_CHECK(!with_deriv || trace.with_tangents,
              "eval_backward: derivative cotangents require a tangent-forward trace");

    std::vector<LayerT<S>> grads = zero_like(layers);

    auto layer_input = [&](Eigen::Index l) -> const MatX<S>& {
        return l == 0 ? trace.input : trace.sin_wa[static_cast<std::size_t>(l - 1)];
    };

    // Output layer: value = W Z + b, deriv_d = W TZ_d.
    const MatX<S>& z_prev = layer_input(last);
    auto& out_g = grads[static_cast<std::size_t>(last)];
    out_g.weight = bar.value * z_prev.transpose();
    out_g.bias = bar.value.rowwise().sum();
    MatX<S> gz = layers[static_cast<std::size_t>(last)].weight.transpose() * bar.value;
    std::array<MatX<S>, 3> gt;
    if (with_deriv) {
        const auto prev_sine = static_cast<std::size_t>(last - 1);
        for (int d = 0; d < 3; ++d) {
            out_g.weight += bar.deriv[d] * trace.tz[d][prev_sine].transpose();
            gt[d] = layers[static_cast<std::size_t>(last)].weight.transpose() * bar.deriv[d];
        }
    }

    for (Eigen::Index l = last - 1; l >= 0; --l) {
        const auto li = static_cast<std::size_t>(l);
        const MatX<S>& sin_wa = trace.sin_wa[li];
        const MatX<S>& cos_wa = trace.cos_wa[li];

        // Z_l = sin(omega A_l) contributes omega cos(omega A_l) .* gz;
        // TZ_{l,d} = omega cos(omega A_l) .* TA_{l,d} contributes the
        // second-order term -omega^2 sin(omega A_l) .* sum_d gt_d .* TA_{l,d}.
        MatX<S> ga = omega * cos_wa.cwiseProduct(gz);
        std::array<MatX<S>, 3> gta;
        if (with_deriv) {
            MatX<S> acc = gt[0].cwiseProduct(trace.ta[0][li]);
            acc += gt[1].cwiseProduct(trace.ta[1][li]);
            acc += gt[2].cwiseProduct(trace.ta[2][li]);
            ga.noalias() -= (omega * omega) * sin_wa.cwiseProduct(acc);
            for (int d = 0; d < 3; ++d)
                gta[d] = omega * cos_wa.cwiseProduct(gt[d]);
        }

        auto& g = grads[li];
        g.weight = ga * layer_input(l).transpose();
        g.bias = ga.rowwise().sum();
        if (with_deriv) {
            if (l == 0) {
                // TZ_{-1,d} = e_d 1^T, so only column d of the weight
                // gradient picks up the tangent term.
                for (int d = 0; d < 3; ++d)
                    g.weight.col(d) += gta[d].rowwise().sum();
            } else {
                for (int d = 0; d < 3; ++d)
                    g.weight += gta[d] * trace.tz[d][li - 1].transpose();
            }
        }

        if (l > 0) {
            gz = layers[li].weight.transpose() * ga;
            if (with_deriv)
                for (int d = 0; d < 3; ++d)
                    gt[d] = layers[li].weight.transpose() * gta[d];
        }
    }

    return grads;
}

} // namespace fsiren::detail
