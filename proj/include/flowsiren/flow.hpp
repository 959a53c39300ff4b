// Copyright (c) 2026 flowsiren contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "flowsiren/common.hpp"

namespace fsiren {

/// Dense forward flow for one frame: (u, v) in pixels per measured frame
/// interval, u along +x (columns), v along +y (rows).
struct PixelFlow {
    int height = 0;
    int width = 0;
    std::vector<double> uv; // row-major (y, x, {u, v})

    static PixelFlow zeros(int height, int width);
    double& u(int y, int x) { return uv[2 * (static_cast<std::size_t>(y) * width + x)]; }
    double& v(int y, int x) { return uv[2 * (static_cast<std::size_t>(y) * width + x) + 1]; }
    double u(int y, int x) const { return uv[2 * (static_cast<std::size_t>(y) * width + x)]; }
    double v(int y, int x) const { return uv[2 * (static_cast<std::size_t>(y) * width + x) + 1]; }
};

/// Flow in normalized coordinate units per normalized time unit. The full
/// vector is F = (fx, fy, 1); the third component is implicit and exactly 1.
struct NormalizedFlowGrid {
    int height = 0;
    int width = 0;
    std::vector<double> f; // row-major (y, x, {fx, fy})

    Eigen::Vector3d at(int y, int x) const
    {
        const std::size_t i = 2 * (static_cast<std::size_t>(y) * width + x);
        return {f[i], f[i + 1], 1.0};
    }
};

/// Converts pixel flow to normalized units. `stride` is the number of source
/// frame steps the flow measurement spans (2 when estimated between
/// consecutive observed frames of an every-2nd split). With axes normalized
/// to [-1, 1], u px/step becomes fx = (u / stride) * (frames - 1) / (width - 1).
NormalizedFlowGrid normalize_flow(const PixelFlow& pf, int frames, int height, int width,
                                  int stride = 1);

/// Middlebury .flo: f32 magic 202021.25, i32 width, i32 height, then
/// row-major interleaved f32 (u, v). Round-trips bit-exactly for f32 data.
PixelFlow read_flo(const std::string& path);
void write_flo(const PixelFlow& flow, const std::string& path);

/// Bilinear resample to a new grid, scaling u by (new_w-1)/(w-1) and v by
/// (new_h-1)/(h-1) so displacement stays proportional to the raster.
PixelFlow resize_flow(const PixelFlow& flow, int new_height, int new_width);

/// Classic Horn-Schunck estimate between two grayscale frames (values in
/// [0, 1]), Jacobi iterations on the linearized brightness-constancy
/// objective with smoothness weight alpha. Deterministic.
PixelFlow horn_schunck(const Eigen::MatrixXd& frame_a, const Eigen::MatrixXd& frame_b,
                       double alpha, int iterations);

} // namespace fsiren
