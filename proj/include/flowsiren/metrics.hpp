// Copyright (c) 2026 flowsiren contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "flowsiren/video.hpp"

namespace fsiren {

/// Cap used when serializing infinite PSNR so aggregates stay finite; an
/// exact-match flag preserves the information.
constexpr double kPsnrSentinelDb = 99.0;

/// 10 log10(1 / mse) for [0, 1]-range frames, mse over all pixels and
/// channels; +infinity when the frames are identical.
double psnr(const FrameView& a, const FrameView& b);

/// Standard single-scale SSIM on Rec.601 luma: 11x11 Gaussian window with
/// sigma 1.5, K1 = 0.01, K2 = 0.03, dynamic range 1, averaged over valid
/// window positions. Frames must be at least 11x11.
double ssim(const FrameView& a, const FrameView& b);

struct FrameMetrics {
    int frame_index = 0;
    FrameRole role = FrameRole::kObserved;
    double psnr = 0.0; // may be +inf
    double ssim = 0.0;
    bool exact_match = false;
};

struct RoleAggregate {
    int count = 0;
    double mean_psnr = 0.0;       // per-frame mean, sentinel-capped
    double mean_ssim = 0.0;
    double global_mse_psnr = 0.0; // PSNR of the pooled mse, the other convention
};

struct VideoMetrics {
    std::vector<FrameMetrics> frames;
    RoleAggregate observed;
    RoleAggregate held_out;
};

/// Per-frame metrics plus separate observed / held-out aggregates. Roles are
/// taken from `truth`; tensors must be aligned.
VideoMetrics video_metrics(const VideoTensor& rendered, const VideoTensor& truth);

} // namespace fsiren
