// Copyright (c) 2026 flowsiren contributors
// SPDX-License-Identifier: Apache-2.0

#include "flowsiren/siren.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "flowsiren/siren_eval.hpp"

namespace fsiren {

namespace {

constexpr char kModelMagic[4] = {'F', 'S', 'I', 'R'};
constexpr std::uint32_t kModelVersion = 1;

void check_coords_finite(const CoordBatch& coords)
{
    for (Eigen::Index i = 0; i < coords.cols(); ++i)
        for (int r = 0; r < 3; ++r)
            FSN_CHECK(std::isfinite(coords(r, i)),
                      "non-finite input coordinate at batch index ", i,
                      " (component ", r, ")");
}

} // namespace

void SirenConfig::validate() const
{
    FSN_CHECK_CONFIG(depth >= 2, "SirenConfig: depth must be >= 2, got ", depth);
    FSN_CHECK_CONFIG(width >= 1, "SirenConfig: width must be >= 1, got ", width);
    FSN_CHECK_CONFIG(omega > 0.0 && std::isfinite(omega),
                     "SirenConfig: omega must be positive and finite, got ", omega);
}

SirenModel init_siren(const SirenConfig& config, std::uint64_t seed)
{
    config.validate();
    std::mt19937_64 rng(seed);

    SirenModel model;
    model.config = config;
    model.seed = seed;
    model.layers.reserve(static_cast<std::size_t>(config.depth));
    for (int l = 0; l < config.depth; ++l) {
        const int fan_in = l == 0 ? SirenConfig::kInDim : config.width;
        const int fan_out = l == config.depth - 1 ? SirenConfig::kOutDim : config.width;
        const double bound = l == 0 ? 1.0 / SirenConfig::kInDim
                                    : std::sqrt(6.0 / fan_in) / config.omega;
        std::uniform_real_distribution<double> dist(-bound, bound);

        Layer layer;
        layer.weight.resize(fan_out, fan_in);
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
                layer.weight(r, c) = dist(rng);
        layer.bias = Eigen::VectorXd::Zero(fan_out);
        model.layers.push_back(std::move(layer));
    }
    return model;
}

Eigen::Matrix3Xd forward(const SirenModel& model, const CoordBatch& coords)
{
    check_coords_finite(coords);
    detail::EvalTrace<double> trace;
    detail::eval_forward(model.layers, model.config.omega, coords, false, trace);
    return trace.value;
}

JacobianResult JacobianBatch::sample(Eigen::Index i) const
{
    return {value.col(i), deriv[0].col(i), deriv[1].col(i), deriv[2].col(i)};
}

JacobianBatch forward_with_jacobian(const SirenModel& model, const CoordBatch& coords)
{
    check_coords_finite(coords);
    detail::EvalTrace<double> trace;
    detail::eval_forward(model.layers, model.config.omega, coords, true, trace);
    JacobianBatch out;
    out.value = trace.value;
    for (int d = 0; d < 3; ++d)
        out.deriv[d] = trace.deriv[d];
    return out;
}

ModelGrad zero_grads(const SirenModel& model)
{
    return detail::zero_like(model.layers);
}

ModelGrad backward(const SirenModel& model, const CoordBatch& coords,
                   const Eigen::Matrix3Xd& value_bar)
{
    check_coords_finite(coords);
    FSN_CHECK(value_bar.cols() == coords.cols(), "backward: cotangent batch size ",
              value_bar.cols(), " does not match coordinate batch size ", coords.cols());
    detail::EvalTrace<double> trace;
    detail::eval_forward(model.layers, model.config.omega, coords, false, trace);
    detail::OutputBar<double> bar;
    bar.value = value_bar;
    bar.with_deriv = false;
    return detail::eval_backward(model.layers, model.config.omega, trace, bar);
}

ModelGrad backward_with_jacobian(const SirenModel& model, const CoordBatch& coords,
                                 const Eigen::Matrix3Xd& value_bar,
                                 const std::array<Eigen::Matrix3Xd, 3>& deriv_bar)
{
    check_coords_finite(coords);
    FSN_CHECK(value_bar.cols() == coords.cols(), "backward: cotangent batch size ",
              value_bar.cols(), " does not match coordinate batch size ", coords.cols());
    detail::EvalTrace<double> trace;
    detail::eval_forward(model.layers, model.config.omega, coords, true, trace);
    detail::OutputBar<double> bar;
    bar.value = value_bar;
    for (int d = 0; d < 3; ++d) {
        FSN_CHECK(deriv_bar[d].cols() == coords.cols(),
                  "backward: derivative cotangent batch size mismatch");
        bar.deriv[d] = deriv_bar[d];
    }
    bar.with_deriv = true;
    return detail::eval_backward(model.layers, model.config.omega, trace, bar);
}

namespace {

template <class T>
void write_raw(std::ostream& os, const T& v)
{
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_raw(std::istream& is, const char* what)
{
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    FSN_CHECK_IO(is.gcount() == static_cast<std::streamsize>(sizeof(T)),
                 "truncated model file while reading ", what);
    return v;
}

} // namespace

void save_model(const SirenModel& model, const std::string& path)
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    FSN_CHECK_IO(os.good(), "cannot open model file for writing: ", path);

    os.write(kModelMagic, sizeof(kModelMagic));
    write_raw(os, kModelVersion);
    write_raw(os, static_cast<std::uint32_t>(model.config.depth));
    write_raw(os, static_cast<std::uint32_t>(model.config.width));
    write_raw(os, model.config.omega);
    write_raw(os, model.seed);
    for (const auto& layer : model.layers) {
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
                write_raw(os, layer.weight(r, c));
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r)
            write_raw(os, layer.bias(r));
    }
    os.flush();
    FSN_CHECK_IO(os.good(), "failed writing model file: ", path);
}

SirenModel load_model(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    FSN_CHECK_IO(is.good(), "cannot open model file: ", path);

    char magic[4] = {};
    is.read(magic, sizeof(magic));
    FSN_CHECK_IO(is.gcount() == 4 && std::memcmp(magic, kModelMagic, 4) == 0,
                 "not a model file (bad magic): ", path);
    const auto version = read_raw<std::uint32_t>(is, "version");
    FSN_CHECK_IO(version == kModelVersion, "unsupported model file version ", version,
                 " (expected ", kModelVersion, "): ", path);

    SirenModel model;
    model.config.depth = static_cast<int>(read_raw<std::uint32_t>(is, "depth"));
    model.config.width = static_cast<int>(read_raw<std::uint32_t>(is, "width"));
    model.config.omega = read_raw<double>(is, "omega");
    model.seed = read_raw<std::uint64_t>(is, "seed");
    model.config.validate();

    model.layers.reserve(static_cast<std::size_t>(model.config.depth));
    for (int l = 0; l < model.config.depth; ++l) {
        const int fan_in = l == 0 ? SirenConfig::kInDim : model.config.width;
        const int fan_out =
            l == model.config.depth - 1 ? SirenConfig::kOutDim : model.config.width;
        Layer layer;
        layer.weight.resize(fan_out, fan_in);
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
                layer.weight(r, c) = read_raw<double>(is, "weights");
        layer.bias.resize(fan_out);
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r)
            layer.bias(r) = read_raw<double>(is, "bias");
        model.layers.push_back(std::move(layer));
    }
    char extra;
    is.read(&extra, 1);
    FSN_CHECK_IO(is.eof(), "model file has trailing bytes: ", path);
    return model;
}

SirenModel load_model(const std::string& path, const SirenConfig& expected)
{
    SirenModel model = load_model(path);
    FSN_CHECK_IO(model.config == expected, "model shape mismatch: file ", path,
                 " has depth ", model.config.depth, " width ", model.config.width,
                 " omega ", model.config.omega, ", expected depth ", expected.depth,
                 " width ", expected.width, " omega ", expected.omega);
    return model;
}

} // namespace fsiren
