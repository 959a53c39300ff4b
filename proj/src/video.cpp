// Copyright (c) 2026 flowsiren contributors
// SPDX-License-Identifier: Apache-2.0

#include "flowsiren/video.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>
#include <random>

#include "flowsiren/image_io.hpp"

namespace fs = std::filesystem;

namespace fsiren {

VideoTensor VideoTensor::zeros(int frames, int height, int width)
{
    FSN_CHECK(frames >= 1 && height >= 1 && width >= 1,
              "VideoTensor: dimensions must be positive, got ", width, "x", height, "x",
              frames);
    VideoTensor v;
    v.frames = frames;
    v.height = height;
    v.width = width;
    v.data.assign(static_cast<std::size_t>(frames) * height * width * 3, 0.0);
    v.roles.assign(static_cast<std::size_t>(frames), FrameRole::kObserved);
    return v;
}

std::vector<int> VideoTensor::observed_indices() const
{
    std::vector<int> out;
    for (int t = 0; t < frames; ++t)
        if (roles[static_cast<std::size_t>(t)] == FrameRole::kObserved)
            out.push_back(t);
    return out;
}

std::vector<int> VideoTensor::held_out_indices() const
{
    std::vector<int> out;
    for (int t = 0; t < frames; ++t)
        if (roles[static_cast<std::size_t>(t)] == FrameRole::kHeldOut)
            out.push_back(t);
    return out;
}

VideoTensor load_frames(const std::string& dir)
{
    FSN_CHECK_IO(fs::is_directory(dir), "not a directory: ", dir);

    // name = <stem><number>.<png|ppm>
    std::map<long, fs::path> by_index;
    std::string stem_seen;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file())
            continue;
        const std::string ext = entry.path().extension().string();
        if (ext != ".png" && ext != ".ppm")
            continue;
        const std::string base = entry.path().stem().string();
        std::size_t digits = 0;
        while (digits < base.size() &&
               std::isdigit(static_cast<unsigned char>(base[base.size() - 1 - digits])))
            ++digits;
        FSN_CHECK_IO(digits > 0, "frame file has no trailing index: ",
                     entry.path().string());
        const std::string stem = base.substr(0, base.size() - digits);
        if (stem_seen.empty())
            stem_seen = stem;
        FSN_CHECK_IO(stem == stem_seen, "mixed frame stems '", stem_seen, "' and '", stem,
                     "' in ", dir);
        const long index = std::stol(base.substr(base.size() - digits));
        FSN_CHECK_IO(by_index.emplace(index, entry.path()).second,
                     "duplicate frame index ", index, " in ", dir);
    }
    FSN_CHECK_IO(!by_index.empty(), "no numbered .png/.ppm frames found in ", dir);

    const long first = by_index.begin()->first;
    long expect = first;
    for (const auto& [index, path] : by_index) {
        FSN_CHECK_IO(index == expect, "frame index gap at index ", expect, " in ", dir);
        ++expect;
    }

    VideoTensor video;
    int t = 0;
    for (const auto& [index, path] : by_index) {
        const Image8 img = read_image(path.string());
        if (t == 0) {
            video = VideoTensor::zeros(static_cast<int>(by_index.size()), img.height,
                                       img.width);
        } else {
            FSN_CHECK_IO(img.width == video.width && img.height == video.height,
                         "frame dimension mismatch: ", path.string(), " is ", img.width,
                         "x", img.height, ", expected ", video.width, "x", video.height);
        }
        for (int y = 0; y < video.height; ++y)
            for (int x = 0; x < video.width; ++x)
                for (int c = 0; c < 3; ++c)
                    video.at(t, y, x, c) = img.at(y, x, c) / 255.0;
        ++t;
    }
    return video;
}

void split_observed(VideoTensor& video, int every_k)
{
    FSN_CHECK_CONFIG(every_k >= 2, "split_observed: every-k must be >= 2, got ", every_k);
    FSN_CHECK(video.frames >= 3, "split_observed: need at least 3 frames, got ",
              video.frames);
    for (int t = 0; t < video.frames; ++t)
        video.roles[static_cast<std::size_t>(t)] =
            t % every_k == 0 ? FrameRole::kObserved : FrameRole::kHeldOut;
}

void save_frames(const VideoTensor& video, const std::string& dir,
                 const std::string& stem, const std::string& ext)
{
    fs::create_directories(dir);
    char num[16];
    for (int t = 0; t < video.frames; ++t) {
        Image8 img;
        img.width = video.width;
        img.height = video.height;
        img.rgb.resize(3 * static_cast<std::size_t>(video.width) * video.height);
        for (int y = 0; y < video.height; ++y)
            for (int x = 0; x < video.width; ++x)
                for (int c = 0; c < 3; ++c) {
                    const double v = std::clamp(video.at(t, y, x, c), 0.0, 1.0);
                    img.rgb[3 * (static_cast<std::size_t>(y) * video.width + x) + c] =
                        static_cast<std::uint8_t>(std::lround(v * 255.0));
                }
        std::snprintf(num, sizeof(num), "%04d", t);
        write_image(img, (fs::path(dir) / (stem + num + ext)).string());
    }
}

Eigen::MatrixXd luma601(const FrameView& frame)
{
    Eigen::MatrixXd out(frame.height, frame.width);
    for (int y = 0; y < frame.height; ++y)
        for (int x = 0; x < frame.width; ++x)
            out(y, x) = 0.299 * frame.at(y, x, 0) + 0.587 * frame.at(y, x, 1) +
                        0.114 * frame.at(y, x, 2);
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic scenes.

void SceneSpec::validate() const
{
    FSN_CHECK_CONFIG(pattern == "sinusoid" || pattern == "blobs" || pattern == "checker",
                     "unknown scene pattern '", pattern, "'");
    FSN_CHECK_CONFIG(motion == "static" || motion == "translate" || motion == "rotate",
                     "unknown scene motion '", motion, "'");
    FSN_CHECK_CONFIG(width >= 8 && height >= 8, "scene dimensions must be >= 8x8, got ",
                     width, "x", height);
    FSN_CHECK_CONFIG(frames >= 1, "scene needs at least one frame");

    double max_disp = 0.0;
    if (motion == "translate") {
        max_disp = std::hypot(vx, vy);
    } else if (motion == "rotate") {
        const double r = 0.5 * std::hypot(width - 1.0, height - 1.0);
        max_disp = 2.0 * r * std::abs(std::sin(0.5 * rot_deg * std::numbers::pi / 180.0));
    }
    FSN_CHECK_CONFIG(max_disp <= 0.25 * width,
                     "scene motion too large: ", max_disp, " px/frame exceeds 25% of width (",
                     0.25 * width, ")");
}

SyntheticScene::SyntheticScene(const SceneSpec& spec) : spec_(spec)
{
    spec_.validate();
    rot_rad_ = spec_.rot_deg * std::numbers::pi / 180.0;

    std::mt19937_64 rng(spec_.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double two_pi = 2.0 * std::numbers::pi;
    const double min_dim = std::min(spec_.width, spec_.height);

    if (spec_.pattern == "sinusoid") {
        // Band spread from below one cycle to several cycles across the
        // frame; higher frequencies carry less amplitude so values stay well
        // inside [0, 1].
        for (int j = 0; j < 6; ++j) {
            Harmonic h{};
            const double angle = two_pi * unit(rng);
            const double cycles = 0.7 + 1.25 * j + 0.5 * unit(rng);
            const double k = two_pi * cycles / min_dim;
            h.kx = k * std::cos(angle);
            h.ky = k * std::sin(angle);
            const double scale = 1.0 / (1.0 + 0.35 * j);
            for (int c = 0; c < 3; ++c) {
                h.amp[c] = (0.05 + 0.07 * unit(rng)) * scale;
                h.phase[c] = two_pi * unit(rng);
            }
            harmonics_.push_back(h);
        }
    } else if (spec_.pattern == "blobs") {
        for (int j = 0; j < 5; ++j) {
            Blob b{};
            b.cx = (0.15 + 0.7 * unit(rng)) * (spec_.width - 1);
            b.cy = (0.15 + 0.7 * unit(rng)) * (spec_.height - 1);
            b.sigma = min_dim * (0.10 + 0.06 * unit(rng));
            for (int c = 0; c < 3; ++c)
                b.amp[c] = 0.05 + 0.11 * unit(rng);
            blobs_.push_back(b);
        }
    } else { // checker
        checker_kx_ = two_pi * (1.0 + unit(rng)) / spec_.width;
        checker_ky_ = two_pi * (1.0 + unit(rng)) / spec_.height;
        checker_px_ = two_pi * unit(rng);
        checker_py_ = two_pi * unit(rng);
        for (int c = 0; c < 3; ++c)
            checker_phase_[c] = 0.5 * unit(rng);
    }
}

Eigen::Vector2d SyntheticScene::pattern_point(double x, double y, double t) const
{
    if (spec_.motion == "translate")
        return {x - spec_.vx * t, y - spec_.vy * t};
    if (spec_.motion == "rotate") {
        const double cx = 0.5 * (spec_.width - 1);
        const double cy = 0.5 * (spec_.height - 1);
        const double a = rot_rad_ * t;
        const double dx = x - cx, dy = y - cy;
        return {cx + std::cos(a) * dx + std::sin(a) * dy,
                cy - std::sin(a) * dx + std::cos(a) * dy};
    }
    return {x, y};
}

void SyntheticScene::pattern_eval(double u, double v, Eigen::Vector3d& value,
                                  Eigen::Vector3d& du, Eigen::Vector3d& dv) const
{
    value.setConstant(0.5);
    du.setZero();
    dv.setZero();

    if (spec_.pattern == "sinusoid") {
        for (const auto& h : harmonics_) {
            const double arg = h.kx * u + h.ky * v;
            for (int c = 0; c < 3; ++c) {
                value(c) += h.amp[c] * std::sin(arg + h.phase[c]);
                const double d = h.amp[c] * std::cos(arg + h.phase[c]);
                du(c) += d * h.kx;
                dv(c) += d * h.ky;
            }
        }
    } else if (spec_.pattern == "blobs") {
        value.setConstant(0.12);
        for (const auto& b : blobs_) {
            const double rx = u - b.cx, ry = v - b.cy;
            const double g = std::exp(-0.5 * (rx * rx + ry * ry) / (b.sigma * b.sigma));
            for (int c = 0; c < 3; ++c) {
                value(c) += b.amp[c] * g;
                du(c) += b.amp[c] * g * (-rx / (b.sigma * b.sigma));
                dv(c) += b.amp[c] * g * (-ry / (b.sigma * b.sigma));
            }
        }
    } else { // checker
        for (int c = 0; c < 3; ++c) {
            const double su = std::sin(checker_kx_ * u + checker_px_ + checker_phase_[c]);
            const double cu = std::cos(checker_kx_ * u + checker_px_ + checker_phase_[c]);
            const double sv = std::sin(checker_ky_ * v + checker_py_);
            const double cv = std::cos(checker_ky_ * v + checker_py_);
            const double g = su * sv;
            const double th = std::tanh(checker_sharp_ * g);
            const double dth = checker_sharp_ * (1.0 - th * th);
            value(c) = 0.5 + 0.42 * th;
            du(c) = 0.42 * dth * checker_kx_ * cu * sv;
            dv(c) = 0.42 * dth * checker_ky_ * su * cv;
        }
    }
}

Eigen::Vector3d SyntheticScene::value_at(double x, double y, double t) const
{
    const Eigen::Vector2d p = pattern_point(x, y, t);
    Eigen::Vector3d value, du, dv;
    pattern_eval(p.x(), p.y(), value, du, dv);
    return value;
}

SyntheticScene::ValueAndGradient SyntheticScene::value_and_gradient(double x, double y,
                                                                    double t) const
{
    const Eigen::Vector2d p = pattern_point(x, y, t);
    Eigen::Vector3d value, du, dv;
    pattern_eval(p.x(), p.y(), value, du, dv);

    ValueAndGradient out;
    out.value = value;
    if (spec_.motion == "translate") {
        out.d_dx = du;
        out.d_dy = dv;
        out.d_dt = -spec_.vx * du - spec_.vy * dv;
    } else if (spec_.motion == "rotate") {
        const double cx = 0.5 * (spec_.width - 1);
        const double cy = 0.5 * (spec_.height - 1);
        const double a = rot_rad_ * t;
        const double ca = std::cos(a), sa = std::sin(a);
        // u = cx + ca dx + sa dy, v = cy - sa dx + ca dy
        out.d_dx = ca * du - sa * dv;
        out.d_dy = sa * du + ca * dv;
        const double du_dt = rot_rad_ * (p.y() - cy);
        const double dv_dt = -rot_rad_ * (p.x() - cx);
        out.d_dt = du_dt * du + dv_dt * dv;
    } else {
        out.d_dx = du;
        out.d_dy = dv;
        out.d_dt.setZero();
    }
    return out;
}

Eigen::Vector2d SyntheticScene::displacement_at(double x, double y, double t) const
{
    (void)t; // both supported motions have time-invariant displacement fields
    if (spec_.motion == "translate")
        return {spec_.vx, spec_.vy};
    if (spec_.motion == "rotate") {
        const double cx = 0.5 * (spec_.width - 1);
        const double cy = 0.5 * (spec_.height - 1);
        const double dx = x - cx, dy = y - cy;
        const double ca = std::cos(rot_rad_), sa = std::sin(rot_rad_);
        // Position of the material point one frame later, minus the current one.
        return {(ca * dx - sa * dy) - dx, (sa * dx + ca * dy) - dy};
    }
    return {0.0, 0.0};
}

VideoTensor SyntheticScene::render_video() const
{
    std::vector<double> times(static_cast<std::size_t>(spec_.frames));
    for (int t = 0; t < spec_.frames; ++t)
        times[static_cast<std::size_t>(t)] = t;
    return render_at_times(times);
}

VideoTensor SyntheticScene::render_at_times(const std::vector<double>& t_frames) const
{
    VideoTensor video = VideoTensor::zeros(static_cast<int>(t_frames.size()),
                                           spec_.height, spec_.width);
    for (std::size_t i = 0; i < t_frames.size(); ++i)
        for (int y = 0; y < spec_.height; ++y)
            for (int x = 0; x < spec_.width; ++x) {
                const Eigen::Vector3d v = value_at(x, y, t_frames[i]);
                for (int c = 0; c < 3; ++c)
                    video.at(static_cast<int>(i), y, x, c) = v(c);
            }
    return video;
}

std::vector<PixelFlow> synth_flow(const SyntheticScene& scene)
{
    const SceneSpec& spec = scene.spec();
    std::vector<PixelFlow> flows;
    flows.reserve(static_cast<std::size_t>(spec.frames));
    for (int t = 0; t < spec.frames; ++t) {
        PixelFlow f = PixelFlow::zeros(spec.height, spec.width);
        for (int y = 0; y < spec.height; ++y)
            for (int x = 0; x < spec.width; ++x) {
                const Eigen::Vector2d d = scene.displacement_at(x, y, t);
                f.u(y, x) = d.x();
                f.v(y, x) = d.y();
            }
        flows.push_back(std::move(f));
    }
    return flows;
}

// ---------------------------------------------------------------------------
// Batch sampling.

BatchSampler::BatchSampler(const VideoTensor& video,
                           const std::vector<NormalizedFlowGrid>* flows, int batch_size,
                           std::uint64_t seed)
    : video_(&video), flows_(flows), seed_(seed)
{
    FSN_CHECK_CONFIG(batch_size >= 1, "batch size must be >= 1, got ", batch_size);
    observed_ = video.observed_indices();
    FSN_CHECK(!observed_.empty(), "video has no observed frames");
    FSN_CHECK(video.height < 65536 && video.width < 65536 &&
                  observed_.size() < 65536,
              "video too large for the sampler index encoding");
    if (flows_)
        FSN_CHECK(flows_->size() == observed_.size(), "flow grids (", flows_->size(),
                  ") do not match observed frames (", observed_.size(), ")");

    coords_.reserve(observed_.size() * static_cast<std::size_t>(video.height) *
                    static_cast<std::size_t>(video.width));
    for (std::size_t rank = 0; rank < observed_.size(); ++rank)
        for (int y = 0; y < video.height; ++y)
            for (int x = 0; x < video.width; ++x)
                coords_.push_back({static_cast<std::uint16_t>(rank),
                                   static_cast<std::uint16_t>(y),
                                   static_cast<std::uint16_t>(x)});

    if (batch_size > static_cast<int>(coords_.size())) {
        clamped_ = true;
        batch_size_ = static_cast<int>(coords_.size());
    } else {
        batch_size_ = batch_size;
    }
    batches_per_epoch_ = static_cast<int>(
        (coords_.size() + static_cast<std::size_t>(batch_size_) - 1) /
        static_cast<std::size_t>(batch_size_));
}

void BatchSampler::ensure_epoch(int epoch) const
{
    if (cached_epoch_ == epoch)
        return;
    order_.resize(coords_.size());
    for (std::size_t i = 0; i < order_.size(); ++i)
        order_[i] = static_cast<std::uint32_t>(i);
    std::mt19937_64 rng(seed_ + 0x9E3779B97F4A7C15ULL *
                                    (static_cast<std::uint64_t>(epoch) + 1));
    std::shuffle(order_.begin(), order_.end(), rng);
    cached_epoch_ = epoch;
}

SampleBatch BatchSampler::batch(int epoch, int index) const
{
    FSN_CHECK(epoch >= 0 && index >= 0 && index < batches_per_epoch_,
              "batch index out of range: epoch ", epoch, " index ", index);
    ensure_epoch(epoch);

    const std::size_t begin = static_cast<std::size_t>(index) * batch_size_;
    const std::size_t end = std::min(begin + static_cast<std::size_t>(batch_size_),
                                     coords_.size());
    const auto n = static_cast<Eigen::Index>(end - begin);

    const CoordMap tmap = video_->tmap();
    const CoordMap ymap = video_->ymap();
    const CoordMap xmap = video_->xmap();

    SampleBatch batch;
    batch.coords.resize(3, n);
    Eigen::Matrix3Xd targets(3, n);
    Eigen::Matrix3Xd flow_vecs;
    if (flows_)
        flow_vecs.resize(3, n);

    for (Eigen::Index i = 0; i < n; ++i) {
        const Coord c = coords_[order_[begin + static_cast<std::size_t>(i)]];
        const int frame = observed_[c.obs_rank];
        batch.coords(0, i) = xmap.to_norm(c.x);
        batch.coords(1, i) = ymap.to_norm(c.y);
        batch.coords(2, i) = tmap.to_norm(frame);
        for (int ch = 0; ch < 3; ++ch)
            targets(ch, i) = scale_to_model(video_->at(frame, c.y, c.x, ch));
        if (flows_)
            flow_vecs.col(i) = (*flows_)[c.obs_rank].at(c.y, c.x);
    }
    batch.targets = std::move(targets);
    if (flows_)
        batch.flows = std::move(flow_vecs);
    return batch;
}

// ---------------------------------------------------------------------------
// Rendering.

VideoTensor render_frames(const SirenModel& model, const std::vector<double>& t_frames,
                          int height, int width, int time_grid_frames)
{
    FSN_CHECK(!t_frames.empty(), "render_frames: no time indices given");
    VideoTensor out = VideoTensor::zeros(static_cast<int>(t_frames.size()), height, width);
    const CoordMap tmap(time_grid_frames);
    const CoordMap ymap(height);
    const CoordMap xmap(width);

    const Eigen::Index pixels = static_cast<Eigen::Index>(height) * width;
    Eigen::Matrix3Xd coords(3, pixels);
    for (std::size_t i = 0; i < t_frames.size(); ++i) {
        const double tn = tmap.to_norm(t_frames[i]);
        Eigen::Index col = 0;
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x, ++col) {
                coords(0, col) = xmap.to_norm(x);
                coords(1, col) = ymap.to_norm(y);
                coords(2, col) = tn;
            }
        const Eigen::Matrix3Xd value = forward(model, coords);
        col = 0;
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x, ++col)
                for (int c = 0; c < 3; ++c)
                    out.at(static_cast<int>(i), y, x, c) =
                        std::clamp(scale_from_model(value(c, col)), 0.0, 1.0);
    }
    return out;
}

} // namespace fsiren
