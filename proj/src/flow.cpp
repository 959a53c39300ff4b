// Copyright (c) 2026 flowsiren contributors
// SPDX-License-Identifier: Apache-2.0

#include "flowsiren/flow.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace fsiren {

namespace {

constexpr float kFloMagic = 202021.25f;

} // namespace

PixelFlow PixelFlow::zeros(int height, int width)
{
    FSN_CHECK(height >= 1 && width >= 1, "PixelFlow: dimensions must be positive, got ",
              width, "x", height);
    PixelFlow f;
    f.height = height;
    f.width = width;
    f.uv.assign(2 * static_cast<std::size_t>(height) * width, 0.0);
    return f;
}

NormalizedFlowGrid normalize_flow(const PixelFlow& pf, int frames, int height, int width,
                                  int stride)
{
    FSN_CHECK(width >= 2 && height >= 2 && frames >= 2,
              "normalize_flow: geometry must be at least 2x2x2, got ", width, "x", height,
              "x", frames);
    FSN_CHECK(pf.height == height && pf.width == width,
              "normalize_flow: flow grid ", pf.width, "x", pf.height,
              " does not match video ", width, "x", height);
    FSN_CHECK(stride >= 1, "normalize_flow: stride must be >= 1, got ", stride);

    const double sx = static_cast<double>(frames - 1) / (width - 1);
    const double sy = static_cast<double>(frames - 1) / (height - 1);
    const double inv_stride = 1.0 / stride;

    NormalizedFlowGrid out;
    out.height = height;
    out.width = width;
    out.f.resize(pf.uv.size());
    for (std::size_t i = 0; i < pf.uv.size(); i += 2) {
        out.f[i] = pf.uv[i] * inv_stride * sx;
        out.f[i + 1] = pf.uv[i + 1] * inv_stride * sy;
    }
    return out;
}

PixelFlow read_flo(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    FSN_CHECK_IO(is.good(), "cannot open flow file: ", path);

    float magic = 0.0f;
    is.read(reinterpret_cast<char*>(&magic), sizeof(magic));
    FSN_CHECK_IO(is.gcount() == sizeof(magic) && magic == kFloMagic,
                 "invalid flow file magic in ", path);

    std::int32_t w = 0, h = 0;
    is.read(reinterpret_cast<char*>(&w), sizeof(w));
    is.read(reinterpret_cast<char*>(&h), sizeof(h));
    FSN_CHECK_IO(is.good(), "truncated flow file header: ", path);
    FSN_CHECK_IO(w > 0 && h > 0, "non-positive flow dimensions ", w, "x", h, " in ",
                 path);

    PixelFlow flow = PixelFlow::zeros(h, w);
    std::vector<float> buf(2 * static_cast<std::size_t>(w) * h);
    is.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
    FSN_CHECK_IO(is.gcount() == static_cast<std::streamsize>(buf.size() * sizeof(float)),
                 "truncated flow file payload: ", path);
    for (std::size_t i = 0; i < buf.size(); ++i)
        flow.uv[i] = static_cast<double>(buf[i]);
    return flow;
}

void write_flo(const PixelFlow& flow, const std::string& path)
{
    FSN_CHECK(flow.width > 0 && flow.height > 0, "write_flo: empty flow grid");
    for (double v : flow.uv)
        FSN_CHECK(std::isfinite(v), "write_flo: non-finite flow value");

    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    FSN_CHECK_IO(os.good(), "cannot open flow file for writing: ", path);
    os.write(reinterpret_cast<const char*>(&kFloMagic), sizeof(kFloMagic));
    const std::int32_t w = flow.width, h = flow.height;
    os.write(reinterpret_cast<const char*>(&w), sizeof(w));
    os.write(reinterpret_cast<const char*>(&h), sizeof(h));
    for (double v : flow.uv) {
        const float fv = static_cast<float>(v);
        os.write(reinterpret_cast<const char*>(&fv), sizeof(fv));
    }
    os.flush();
    FSN_CHECK_IO(os.good(), "failed writing flow file: ", path);
}

PixelFlow resize_flow(const PixelFlow& flow, int new_height, int new_width)
{
    FSN_CHECK(new_height >= 2 && new_width >= 2, "resize_flow: target must be >= 2x2");
    FSN_CHECK(flow.height >= 2 && flow.width >= 2, "resize_flow: source must be >= 2x2");
    const double scale_u = static_cast<double>(new_width - 1) / (flow.width - 1);
    const double scale_v = static_cast<double>(new_height - 1) / (flow.height - 1);

    PixelFlow out = PixelFlow::zeros(new_height, new_width);
    for (int y = 0; y < new_height; ++y) {
        const double sy = y / scale_v;
        const int y0 = std::min(static_cast<int>(sy), flow.height - 2);
        const double fy = sy - y0;
        for (int x = 0; x < new_width; ++x) {
            const double sx = x / scale_u;
            const int x0 = std::min(static_cast<int>(sx), flow.width - 2);
            const double fx = sx - x0;
            const auto lerp2 = [&](auto get) {
                const double a = get(y0, x0) * (1 - fx) + get(y0, x0 + 1) * fx;
                const double b = get(y0 + 1, x0) * (1 - fx) + get(y0 + 1, x0 + 1) * fx;
                return a * (1 - fy) + b * fy;
            };
            out.u(y, x) = scale_u * lerp2([&](int yy, int xx) { return flow.u(yy, xx); });
            out.v(y, x) = scale_v * lerp2([&](int yy, int xx) { return flow.v(yy, xx); });
        }
    }
    return out;
}

namespace {

inline double at_clamped(const Eigen::MatrixXd& m, int y, int x)
{
    y = std::clamp(y, 0, static_cast<int>(m.rows()) - 1);
    x = std::clamp(x, 0, static_cast<int>(m.cols()) - 1);
    return m(y, x);
}

// Weighted 8-neighbour average used by the classic Horn-Schunck scheme.
double hs_average(const Eigen::MatrixXd& m, int y, int x)
{
    const double cross = at_clamped(m, y - 1, x) + at_clamped(m, y + 1, x) +
                         at_clamped(m, y, x - 1) + at_clamped(m, y, x + 1);
    const double diag = at_clamped(m, y - 1, x - 1) + at_clamped(m, y - 1, x + 1) +
                        at_clamped(m, y + 1, x - 1) + at_clamped(m, y + 1, x + 1);
    return cross / 6.0 + diag / 12.0;
}

} // namespace

PixelFlow horn_schunck(const Eigen::MatrixXd& frame_a, const Eigen::MatrixXd& frame_b,
                       double alpha, int iterations)
{
    FSN_CHECK(frame_a.rows() == frame_b.rows() && frame_a.cols() == frame_b.cols(),
              "horn_schunck: frame size mismatch ", frame_a.cols(), "x", frame_a.rows(),
              " vs ", frame_b.cols(), "x", frame_b.rows());
    FSN_CHECK(alpha > 0.0, "horn_schunck: alpha must be positive, got ", alpha);
    FSN_CHECK(iterations >= 1, "horn_schunck: iterations must be >= 1, got ", iterations);

    const int h = static_cast<int>(frame_a.rows());
    const int w = static_cast<int>(frame_a.cols());

    // Derivative estimates averaged over the 2x2x2 cube (original scheme).
    Eigen::MatrixXd ix(h, w), iy(h, w), it(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const auto a = [&](int yy, int xx) { return at_clamped(frame_a, yy, xx); };
            const auto b = [&](int yy, int xx) { return at_clamped(frame_b, yy, xx); };
            ix(y, x) = 0.25 * (a(y, x + 1) - a(y, x) + a(y + 1, x + 1) - a(y + 1, x) +
                               b(y, x + 1) - b(y, x) + b(y + 1, x + 1) - b(y + 1, x));
            iy(y, x) = 0.25 * (a(y + 1, x) - a(y, x) + a(y + 1, x + 1) - a(y, x + 1) +
                               b(y + 1, x) - b(y, x) + b(y + 1, x + 1) - b(y, x + 1));
            it(y, x) = 0.25 * (b(y, x) - a(y, x) + b(y + 1, x) - a(y + 1, x) +
                               b(y, x + 1) - a(y, x + 1) + b(y + 1, x + 1) - a(y + 1, x + 1));
        }
    }

    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(h, w);
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(h, w);
    Eigen::MatrixXd u_next(h, w), v_next(h, w);
    const double alpha2 = alpha * alpha;

    for (int iter = 0; iter < iterations; ++iter) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const double ubar = hs_average(u, y, x);
                const double vbar = hs_average(v, y, x);
                const double num = ix(y, x) * ubar + iy(y, x) * vbar + it(y, x);
                const double den = alpha2 + ix(y, x) * ix(y, x) + iy(y, x) * iy(y, x);
                u_next(y, x) = ubar - ix(y, x) * num / den;
                v_next(y, x) = vbar - iy(y, x) * num / den;
            }
        }
        u.swap(u_next);
        v.swap(v_next);
    }

    PixelFlow flow = PixelFlow::zeros(h, w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            flow.u(y, x) = u(y, x);
            flow.v(y, x) = v(y, x);
        }
    }
    return flow;
}

} // namespace fsiren
