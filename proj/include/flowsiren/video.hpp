// Copyright (c) 2026 flowsiren contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "flowsiren/flow.hpp"
#include "flowsiren/loss.hpp"
#include "flowsiren/siren.hpp"

namespace fsiren {

enum class FrameRole : std::uint8_t { kObserved, kHeldOut };

struct FrameView {
    int height = 0;
    int width = 0;
    const double* data = nullptr; // row-major (y, x, c)

    double at(int y, int x, int c) const
    {
        return data[3 * (static_cast<std::size_t>(y) * width + x) + c];
    }
};

/// Affine map between grid indices and normalized [-1, 1] coordinates:
/// index 0 -> -1, index count-1 -> +1, exact round-trip on grid points.
struct CoordMap {
    int count = 0;

    explicit CoordMap(int n) : count(n)
    {
        FSN_CHECK(n >= 2, "CoordMap: need at least 2 grid points, got ", n);
    }
    double to_norm(double index) const { return 2.0 * index / (count - 1) - 1.0; }
    double to_index(double norm) const { return (norm + 1.0) * (count - 1) / 2.0; }
};

/// Discrete observation tensor: T frames of H x W RGB in [0, 1] plus the
/// observed / held-out role of every frame.
struct VideoTensor {
    int frames = 0;
    int height = 0;
    int width = 0;
    std::vector<double> data; // (t, y, x, c)
    std::vector<FrameRole> roles;
    double fps = 0.0;

    static VideoTensor zeros(int frames, int height, int width);
    double& at(int t, int y, int x, int c)
    {
        return data[((static_cast<std::size_t>(t) * height + y) * width + x) * 3 + c];
    }
    double at(int t, int y, int x, int c) const
    {
        return data[((static_cast<std::size_t>(t) * height + y) * width + x) * 3 + c];
    }
    FrameView frame(int t) const
    {
        return {height, width,
                data.data() + static_cast<std::size_t>(t) * height * width * 3};
    }
    CoordMap tmap() const { return CoordMap(frames); }
    CoordMap ymap() const { return CoordMap(height); }
    CoordMap xmap() const { return CoordMap(width); }
    std::vector<int> observed_indices() const;
    std::vector<int> held_out_indices() const;
};

/// Fitting happens on zero-centered targets; storage stays in [0, 1].
inline double scale_to_model(double v) { return 2.0 * v - 1.0; }
inline double scale_from_model(double v) { return 0.5 * (v + 1.0); }

/// Loads numbered PNG/PPM frames ("<stem><number>.<ext>", any zero padding)
/// from a directory, ordered by number; indices must be gap-free and all
/// frames the same size.
VideoTensor load_frames(const std::string& dir);

/// Marks every k-th frame observed starting at 0; the rest are held out.
void split_observed(VideoTensor& video, int every_k = 2);

void save_frames(const VideoTensor& video, const std::string& dir,
                 const std::string& stem = "frame_", const std::string& ext = ".png");

Eigen::MatrixXd luma601(const FrameView& frame);

// ---------------------------------------------------------------------------
// Synthetic scenes with analytically known motion.

struct SceneSpec {
    std::string pattern = "sinusoid"; // sinusoid | blobs | checker
    std::string motion = "static";    // static | translate | rotate
    double vx = 0.0;                  // px per source frame
    double vy = 0.0;
    double rot_deg = 0.0;             // degrees per source frame about the center
    int width = 48;
    int height = 48;
    int frames = 16;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Continuous scene v(x, y, t) in pixel/frame units: frames are rendered by
/// evaluating the warped pattern analytically, so any continuous time index
/// has exact ground truth.
class SyntheticScene {
public:
    explicit SyntheticScene(const SceneSpec& spec);

    const SceneSpec& spec() const { return spec_; }

    Eigen::Vector3d value_at(double x, double y, double t) const;

    struct ValueAndGradient {
        Eigen::Vector3d value;
        Eigen::Vector3d d_dx; // per channel, pixel units
        Eigen::Vector3d d_dy;
        Eigen::Vector3d d_dt; // per frame step
    };
    ValueAndGradient value_and_gradient(double x, double y, double t) const;

    /// Exact forward displacement (px per frame step) of the scene point at
    /// pixel (x, y) in frame t.
    Eigen::Vector2d displacement_at(double x, double y, double t) const;

    VideoTensor render_video() const;
    VideoTensor render_at_times(const std::vector<double>& t_frames) const;

private:
    struct Harmonic {
        double kx, ky;
        double amp[3];
        double phase[3];
    };
    struct Blob {
        double cx, cy, sigma;
        double amp[3];
    };

    Eigen::Vector2d pattern_point(double x, double y, double t) const;
    void pattern_eval(double u, double v, Eigen::Vector3d& value, Eigen::Vector3d& du,
                      Eigen::Vector3d& dv) const;

    SceneSpec spec_;
    double rot_rad_ = 0.0;
    std::vector<Harmonic> harmonics_;
    std::vector<Blob> blobs_;
    double checker_kx_ = 0, checker_ky_ = 0, checker_px_ = 0, checker_py_ = 0,
           checker_sharp_ = 2.5;
    double checker_phase_[3] = {0, 0, 0};
};

/// Exact per-frame forward flow of a synthetic scene (px per frame step),
/// one grid per source frame.
std::vector<PixelFlow> synth_flow(const SyntheticScene& scene);

// ---------------------------------------------------------------------------
// Batch sampling.

/// Deterministic epoch sampler: every epoch is a freshly shuffled partition
/// of all observed-frame pixel coordinates. Held-out frames never appear.
/// Pure function of (seed, epoch, index), so resumed runs reproduce the
/// schedule exactly.
class BatchSampler {
public:
    BatchSampler(const VideoTensor& video, const std::vector<NormalizedFlowGrid>* flows,
                 int batch_size, std::uint64_t seed);

    Eigen::Index population() const { return static_cast<Eigen::Index>(coords_.size()); }
    int batches_per_epoch() const { return batches_per_epoch_; }
    bool batch_size_clamped() const { return clamped_; }
    SampleBatch batch(int epoch, int index) const;

private:
    struct Coord {
        std::uint16_t obs_rank;
        std::uint16_t y;
        std::uint16_t x;
    };

    const VideoTensor* video_;
    const std::vector<NormalizedFlowGrid>* flows_;
    std::vector<int> observed_;
    std::vector<Coord> coords_;
    int batch_size_ = 0;
    int batches_per_epoch_ = 0;
    bool clamped_ = false;
    std::uint64_t seed_ = 0;
    mutable int cached_epoch_ = -1;
    mutable std::vector<std::uint32_t> order_;

    void ensure_epoch(int epoch) const;
};

// ---------------------------------------------------------------------------
// Rendering.

/// Evaluates the model on the full pixel grid at each continuous time index
/// (source-frame units mapped through CoordMap(time_grid_frames)); output is
/// mapped back to [0, 1] and clamped.
VideoTensor render_frames(const SirenModel& model, const std::vector<double>& t_frames,
                          int height, int width, int time_grid_frames);

} // namespace fsiren
