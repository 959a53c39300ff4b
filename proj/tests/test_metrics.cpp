// Copyright (c) 2026 flowsiren contributors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include <doctest.h>

#include "flowsiren/metrics.hpp"
#include "flowsiren/video.hpp"

using namespace fsiren;

namespace {

VideoTensor noise_video(int frames, int h, int w, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    VideoTensor v = VideoTensor::zeros(frames, h, w);
    for (auto& x : v.data)
        x = dist(rng);
    return v;
}

// Direct 2-D windowed summation, the independent route against the
// separable implementation.
double ssim_naive(const FrameView& a, const FrameView& b)
{
    const Eigen::MatrixXd la = luma601(a);
    const Eigen::MatrixXd lb = luma601(b);
    const int win = 11;
    const double sigma = 1.5;
    Eigen::MatrixXd kernel(win, win);
    for (int y = 0; y < win; ++y)
        for (int x = 0; x < win; ++x) {
            const double dy = y - 5, dx = x - 5;
            kernel(y, x) = std::exp(-0.5 * (dx * dx + dy * dy) / (sigma * sigma));
        }
    kernel /= kernel.sum();

    const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    double sum = 0.0;
    int count = 0;
    for (int y0 = 0; y0 + win <= a.height; ++y0)
        for (int x0 = 0; x0 + win <= a.width; ++x0) {
            double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
            for (int y = 0; y < win; ++y)
                for (int x = 0; x < win; ++x) {
                    const double va = la(y0 + y, x0 + x);
                    const double vb = lb(y0 + y, x0 + x);
                    const double k = kernel(y, x);
                    ma += k * va;
                    mb += k * vb;
                    saa += k * va * va;
                    sbb += k * vb * vb;
                    sab += k * va * vb;
                }
            const double var_a = saa - ma * ma;
            const double var_b = sbb - mb * mb;
            const double cov = sab - ma * mb;
            sum += ((2 * ma * mb + c1) * (2 * cov + c2)) /
                   ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
            ++count;
        }
    return sum / count;
}

} // namespace

TEST_CASE("psnr of identical frames is infinite")
{
    const VideoTensor v = noise_video(1, 16, 16, 1);
    CHECK(std::isinf(psnr(v.frame(0), v.frame(0))));
}

TEST_CASE("psnr formula values")
{
    VideoTensor a = VideoTensor::zeros(1, 8, 8);
    VideoTensor b = VideoTensor::zeros(1, 8, 8);
    for (auto& x : b.data)
        x = 0.1; // mse = 0.01
    CHECK(psnr(a.frame(0), b.frame(0)) == doctest::Approx(20.0).epsilon(1e-12));

    for (auto& x : b.data)
        x = 1.0; // black vs white, mse = 1
    CHECK(psnr(a.frame(0), b.frame(0)) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("psnr rejects dimension mismatches")
{
    const VideoTensor a = VideoTensor::zeros(1, 8, 8);
    const VideoTensor b = VideoTensor::zeros(1, 8, 9);
    CHECK_THROWS_AS(psnr(a.frame(0), b.frame(0)), Error);
}

TEST_CASE("psnr strictly decreases with increasing noise")
{
    const VideoTensor base = noise_video(1, 16, 16, 2);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> noise(base.data.size());
    for (auto& n : noise)
        n = gauss(rng);

    double prev = std::numeric_limits<double>::infinity();
    for (double scale : {0.01, 0.03, 0.1, 0.3}) {
        VideoTensor noisy = base;
        for (std::size_t i = 0; i < noisy.data.size(); ++i)
            noisy.data[i] = base.data[i] + scale * noise[i];
        const double p = psnr(base.frame(0), noisy.frame(0));
        CHECK(p < prev);
        prev = p;
    }
}

TEST_CASE("ssim of a frame with itself is exactly one")
{
    const VideoTensor v = noise_video(1, 16, 16, 4);
    CHECK(ssim(v.frame(0), v.frame(0)) == 1.0);
}

TEST_CASE("ssim is symmetric")
{
    const VideoTensor a = noise_video(1, 20, 20, 5);
    const VideoTensor b = noise_video(1, 20, 20, 6);
    CHECK(std::abs(ssim(a.frame(0), b.frame(0)) - ssim(b.frame(0), a.frame(0))) <= 1e-12);
}

TEST_CASE("ssim of an inverted structured image is low")
{
    SceneSpec spec;
    spec.pattern = "checker";
    spec.width = 32;
    spec.height = 32;
    spec.frames = 1;
    const VideoTensor v = SyntheticScene(spec).render_video();
    VideoTensor inverted = v;
    for (auto& x : inverted.data)
        x = 1.0 - x;
    CHECK(ssim(v.frame(0), inverted.frame(0)) < 0.2);
}

TEST_CASE("ssim matches the naive direct-summation oracle")
{
    const VideoTensor a = noise_video(1, 16, 16, 7);
    const VideoTensor b = noise_video(1, 16, 16, 8);
    const double fast = ssim(a.frame(0), b.frame(0));
    const double naive = ssim_naive(a.frame(0), b.frame(0));
    CHECK(std::abs(fast - naive) <= 1e-9);
}

TEST_CASE("ssim rejects frames smaller than the window")
{
    const VideoTensor a = VideoTensor::zeros(1, 10, 16);
    CHECK_THROWS_AS(ssim(a.frame(0), a.frame(0)), Error);
}

TEST_CASE("video metrics aggregate per role")
{
    VideoTensor truth = noise_video(5, 16, 16, 9);
    split_observed(truth, 2);
    VideoTensor rendered = truth;

    SUBCASE("identical tensors give sentinel-capped means")
    {
        const VideoMetrics m = video_metrics(rendered, truth);
        CHECK(m.observed.mean_psnr == kPsnrSentinelDb);
        CHECK(m.held_out.mean_psnr == kPsnrSentinelDb);
        CHECK(m.observed.mean_ssim == 1.0);
        for (const auto& f : m.frames)
            CHECK(f.exact_match);
    }

    SUBCASE("corrupting one held-out frame only drops the held-out aggregate")
    {
        for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 16; ++x)
                rendered.at(3, y, x, 0) = 0.0;
        const VideoMetrics m = video_metrics(rendered, truth);
        CHECK(m.observed.mean_psnr == kPsnrSentinelDb);
        CHECK(m.held_out.mean_psnr < kPsnrSentinelDb);
    }

    SUBCASE("aggregates equal the mean of the per-frame rows")
    {
        for (std::size_t i = 0; i < rendered.data.size(); ++i)
            rendered.data[i] = std::clamp(truth.data[i] + 0.01 * ((i % 7) - 3.0), 0.0, 1.0);
        const VideoMetrics m = video_metrics(rendered, truth);
        double obs = 0.0, held = 0.0;
        int n_obs = 0, n_held = 0;
        for (const auto& f : m.frames) {
            if (f.role == FrameRole::kObserved) {
                obs += std::min(f.psnr, kPsnrSentinelDb);
                ++n_obs;
            } else {
                held += std::min(f.psnr, kPsnrSentinelDb);
                ++n_held;
            }
        }
        CHECK(m.observed.mean_psnr == doctest::Approx(obs / n_obs).epsilon(1e-12));
        CHECK(m.held_out.mean_psnr == doctest::Approx(held / n_held).epsilon(1e-12));
    }
}

TEST_CASE("video metrics require aligned tensors")
{
    const VideoTensor a = VideoTensor::zeros(2, 16, 16);
    VideoTensor b = VideoTensor::zeros(3, 16, 16);
    split_observed(b, 2);
    CHECK_THROWS_AS(video_metrics(a, b), Error);
}
