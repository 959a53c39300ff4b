// Copyright (c) 2026 flowsiren contributors
// SPDX-License-Identifier: Apache-2.0

#include "flowsiren/metrics.hpp"

#include <cmath>
#include <limits>

namespace fsiren {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01; // (K1 * L)^2, L = 1
constexpr double kC2 = 0.03 * 0.03;

Eigen::VectorXd gaussian_kernel()
{
    Eigen::VectorXd k(kWindow);
    const int half = kWindow / 2;
    for (int i = 0; i < kWindow; ++i) {
        const double d = i - half;
        k(i) = std::exp(-0.5 * d * d / (kSigma * kSigma));
    }
    k /= k.sum();
    return k;
}

// Separable valid-mode convolution with the 1-D Gaussian along both axes.
Eigen::MatrixXd gaussian_valid(const Eigen::MatrixXd& img)
{
    static const Eigen::VectorXd kernel = gaussian_kernel();
    const auto rows = img.rows();
    const auto cols = img.cols();
    Eigen::MatrixXd tmp(rows, cols - kWindow + 1);
    for (Eigen::Index y = 0; y < rows; ++y)
        for (Eigen::Index x = 0; x + kWindow <= cols; ++x)
            tmp(y, x) = img.row(y).segment(x, kWindow).dot(kernel);
    Eigen::MatrixXd out(rows - kWindow + 1, tmp.cols());
    for (Eigen::Index x = 0; x < tmp.cols(); ++x)
        for (Eigen::Index y = 0; y + kWindow <= rows; ++y)
            out(y, x) = tmp.col(x).segment(y, kWindow).dot(kernel);
    return out;
}

void check_same_dims(const FrameView& a, const FrameView& b, const char* what)
{
    FSN_CHECK(a.width == b.width && a.height == b.height, what,
              ": frame dimension mismatch ", a.width, "x", a.height, " vs ", b.width,
              "x", b.height);
}

} // namespace

double psnr(const FrameView& a, const FrameView& b)
{
    check_same_dims(a, b, "psnr");
    double se = 0.0;
    const std::size_t n = 3 * static_cast<std::size_t>(a.width) * a.height;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a.data[i] - b.data[i];
        se += d * d;
    }
    if (se == 0.0)
        return std::numeric_limits<double>::infinity();
    const double mse = se / static_cast<double>(n);
    return 10.0 * std::log10(1.0 / mse);
}

double ssim(const FrameView& a, const FrameView& b)
{
    check_same_dims(a, b, "ssim");
    FSN_CHECK(a.width >= kWindow && a.height >= kWindow, "ssim: frames must be at least ",
              kWindow, "x", kWindow, ", got ", a.width, "x", a.height);

    const Eigen::MatrixXd la = luma601(a);
    const Eigen::MatrixXd lb = luma601(b);

    const Eigen::MatrixXd mu_a = gaussian_valid(la);
    const Eigen::MatrixXd mu_b = gaussian_valid(lb);
    const Eigen::MatrixXd e_aa = gaussian_valid(la.cwiseProduct(la));
    const Eigen::MatrixXd e_bb = gaussian_valid(lb.cwiseProduct(lb));
    const Eigen::MatrixXd e_ab = gaussian_valid(la.cwiseProduct(lb));

    const Eigen::ArrayXXd mu_a2 = mu_a.array().square();
    const Eigen::ArrayXXd mu_b2 = mu_b.array().square();
    const Eigen::ArrayXXd mu_ab = mu_a.array() * mu_b.array();
    const Eigen::ArrayXXd var_a = e_aa.array() - mu_a2;
    const Eigen::ArrayXXd var_b = e_bb.array() - mu_b2;
    const Eigen::ArrayXXd cov_ab = e_ab.array() - mu_ab;

    const Eigen::ArrayXXd numerator = (2.0 * mu_ab + kC1) * (2.0 * cov_ab + kC2);
    const Eigen::ArrayXXd denominator = (mu_a2 + mu_b2 + kC1) * (var_a + var_b + kC2);
    return (numerator / denominator).mean();
}

VideoMetrics video_metrics(const VideoTensor& rendered, const VideoTensor& truth)
{
    FSN_CHECK(rendered.frames == truth.frames && rendered.height == truth.height &&
                  rendered.width == truth.width,
              "video_metrics: tensors not aligned: ", rendered.width, "x",
              rendered.height, "x", rendered.frames, " vs ", truth.width, "x",
              truth.height, "x", truth.frames);
    FSN_CHECK(static_cast<int>(truth.roles.size()) == truth.frames,
              "video_metrics: truth is missing frame role tags");

    VideoMetrics out;
    double se_obs = 0.0, se_held = 0.0;
    std::size_t n_obs = 0, n_held = 0;

    for (int t = 0; t < truth.frames; ++t) {
        FrameMetrics fm;
        fm.frame_index = t;
        fm.role = truth.roles[static_cast<std::size_t>(t)];
        const FrameView ra = rendered.frame(t);
        const FrameView tb = truth.frame(t);
        fm.psnr = psnr(ra, tb);
        fm.ssim = ssim(ra, tb);
        fm.exact_match = std::isinf(fm.psnr);

        double se = 0.0;
        const std::size_t n = 3 * static_cast<std::size_t>(truth.width) * truth.height;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = ra.data[i] - tb.data[i];
            se += d * d;
        }
        RoleAggregate& agg = fm.role == FrameRole::kObserved ? out.observed : out.held_out;
        agg.count += 1;
        agg.mean_psnr += std::min(fm.psnr, kPsnrSentinelDb);
        agg.mean_ssim += fm.ssim;
        if (fm.role == FrameRole::kObserved) {
            se_obs += se;
            n_obs += n;
        } else {
            se_held += se;
            n_held += n;
        }
        out.frames.push_back(fm);
    }

    const auto finalize = [](RoleAggregate& agg, double se, std::size_t n) {
        if (agg.count > 0) {
            agg.mean_psnr /= agg.count;
            agg.mean_ssim /= agg.count;
            const double mse = n > 0 ? se / static_cast<double>(n) : 0.0;
            agg.global_mse_psnr =
                mse == 0.0 ? kPsnrSentinelDb : 10.0 * std::log10(1.0 / mse);
        }
    };
    finalize(out.observed, se_obs, n_obs);
    finalize(out.held_out, se_held, n_held);
    return out;
}

} // namespace fsiren
