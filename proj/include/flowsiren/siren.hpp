// Copyright (c) 2026 flowsiren contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "flowsiren/common.hpp"

namespace fsiren {

/// Sinusoidal coordinate network f: (x, y, t) -> (R, G, B).
///
/// `depth` counts weight layers including the affine output layer, so a
/// depth-D net applies D-1 sine layers u -> sin(omega * u) followed by one
/// affine layer. `omega` scales the pre-activation of every sine layer.
struct SirenConfig {
    int depth = 9;
    int width = 512;
    double omega = 30.0;

    static constexpr int kInDim = 3;
    static constexpr int kOutDim = 3;

    void validate() const;
    bool operator==(const SirenConfig&) const = default;
};

template <class S>
struct LayerT {
    Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> weight;
    Eigen::Matrix<S, Eigen::Dynamic, 1> bias;
};

using Layer = LayerT<double>;

/// Gradients share the parameter layout.
using ModelGrad = std::vector<Layer>;

struct SirenModel {
    SirenConfig config;
    std::vector<Layer> layers;
    std::uint64_t seed = 0;
};

/// Deterministic initialization: first layer uniform in [-1/3, 1/3], deeper
/// layers uniform in [-sqrt(6/fan_in)/omega, +sqrt(6/fan_in)/omega], biases
/// zero. Two calls with the same config and seed produce identical values.
SirenModel init_siren(const SirenConfig& config, std::uint64_t seed);

/// Coordinates as columns, (x, y, t) in normalized [-1, 1] units.
using CoordBatch = Eigen::Matrix3Xd;

/// Evaluates the network on a coordinate batch. Rejects non-finite inputs
/// with a diagnostic naming the offending column.
Eigen::Matrix3Xd forward(const SirenModel& model, const CoordBatch& coords);

struct JacobianResult {
    Eigen::Vector3d value;
    Eigen::Vector3d d_dx;
    Eigen::Vector3d d_dy;
    Eigen::Vector3d d_dt;
};

struct JacobianBatch {
    Eigen::Matrix3Xd value;
    // deriv[0] = d/dx, deriv[1] = d/dy, deriv[2] = d/dt; columns are samples.
    std::array<Eigen::Matrix3Xd, 3> deriv;

    Eigen::Index size() const { return value.cols(); }
    JacobianResult sample(Eigen::Index i) const;
};

/// Forward evaluation plus the exact input Jacobian, propagated analytically
/// through the sine layers. The value channel is bit-identical to forward()
/// on the same inputs.
JacobianBatch forward_with_jacobian(const SirenModel& model, const CoordBatch& coords);

ModelGrad zero_grads(const SirenModel& model);

/// Reverse pass for a loss built on forward(): `value_bar(c, i)` is the
/// cotangent dL/d value[c, i]. Returns dL/d theta, shaped like the layers.
ModelGrad backward(const SirenModel& model, const CoordBatch& coords,
                   const Eigen::Matrix3Xd& value_bar);

/// Reverse pass for a loss built on forward_with_jacobian(). `deriv_bar[d]`
/// holds the cotangents of the d-th derivative channel. This differentiates
/// through the tangent propagation, so second-order terms are included.
ModelGrad backward_with_jacobian(const SirenModel& model, const CoordBatch& coords,
                                 const Eigen::Matrix3Xd& value_bar,
                                 const std::array<Eigen::Matrix3Xd, 3>& deriv_bar);

/// Checkpoint I/O. Little-endian binary: magic "FSIR", u32 version, u32
/// depth, u32 width, f64 omega, u64 seed, then layer-major f64 parameters
/// (weights row-major, then bias, per layer).
void save_model(const SirenModel& model, const std::string& path);
SirenModel load_model(const std::string& path);
SirenModel load_model(const std::string& path, const SirenConfig& expected);

} // namespace fsiren
