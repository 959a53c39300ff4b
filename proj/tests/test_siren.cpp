// Copyright (c) 2026 flowsiren contributors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <vector>

#include <doctest.h>

#include "flowsiren/loss.hpp"
#include "flowsiren/siren.hpp"
#include "test_util.hpp"

using namespace fsiren;
using fsntest::rel_err;

TEST_CASE("config validation")
{
    const SirenConfig bad_depth{1, 8, 30.0};
    const SirenConfig bad_width{3, 0, 30.0};
    const SirenConfig bad_omega{3, 8, 0.0};
    const SirenConfig ok{2, 1, 30.0};
    CHECK_THROWS_AS(bad_depth.validate(), ConfigError);
    CHECK_THROWS_AS(bad_width.validate(), ConfigError);
    CHECK_THROWS_AS(bad_omega.validate(), ConfigError);
    CHECK_NOTHROW(ok.validate());
}

TEST_CASE("init bounds and zero biases")
{
    const SirenModel m = init_siren({2, 1, 30.0}, 7);
    REQUIRE(m.layers.size() == 2);
    CHECK(m.layers[0].weight.cwiseAbs().maxCoeff() <= 1.0 / 3.0);
    const double later_bound = std::sqrt(6.0 / 1.0) / 30.0;
    CHECK(m.layers[1].weight.cwiseAbs().maxCoeff() <= later_bound);
    for (const auto& layer : m.layers)
        CHECK(layer.bias.isZero(0.0));
}

TEST_CASE("init determinism")
{
    const SirenModel a = init_siren({3, 8, 30.0}, 1234);
    const SirenModel b = init_siren({3, 8, 30.0}, 1234);
    const SirenModel c = init_siren({3, 8, 30.0}, 1235);
    REQUIRE(a.layers.size() == b.layers.size());
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        CHECK(a.layers[l].weight == b.layers[l].weight);
        CHECK(a.layers[l].bias == b.layers[l].bias);
    }
    CHECK(a.layers[0].weight != c.layers[0].weight);
}

TEST_CASE("layer shape chain for depth 6 width 720")
{
    const SirenModel m = init_siren({6, 720, 25.0}, 9);
    REQUIRE(m.layers.size() == 6);
    CHECK(m.layers[0].weight.rows() == 720);
    CHECK(m.layers[0].weight.cols() == 3);
    for (int l = 1; l < 5; ++l) {
        CHECK(m.layers[static_cast<std::size_t>(l)].weight.rows() == 720);
        CHECK(m.layers[static_cast<std::size_t>(l)].weight.cols() == 720);
    }
    CHECK(m.layers[5].weight.rows() == 3);
    CHECK(m.layers[5].weight.cols() == 720);
}

TEST_CASE("forward of all-zero model is zero")
{
    const SirenModel m = fsntest::zero_model(3, 8, 30.0);
    std::mt19937_64 rng(1);
    const Eigen::Matrix3Xd coords = fsntest::random_coords(5, rng);
    CHECK(forward(m, coords).isZero(0.0));
}

TEST_CASE("forward matches hand-computed two-layer composition")
{
    const double omega = 2.5;
    SirenModel m = fsntest::zero_model(2, 3, omega);
    m.layers[0].weight << 0.1, -0.2, 0.3,
                          0.0,  0.4, -0.1,
                          0.2,  0.1, 0.0;
    m.layers[0].bias << 0.05, -0.1, 0.2;
    m.layers[1].weight << 1.0, 0.5, -0.25,
                          0.0, 1.0, 0.5,
                          0.25, 0.0, 1.0;
    m.layers[1].bias << 0.1, 0.2, 0.3;

    const Eigen::Vector3d x(0.3, -0.7, 0.9);
    double hidden[3];
    for (int j = 0; j < 3; ++j) {
        double pre = m.layers[0].bias(j);
        for (int k = 0; k < 3; ++k)
            pre += m.layers[0].weight(j, k) * x(k);
        hidden[j] = std::sin(omega * pre);
    }
    Eigen::Matrix3Xd coords(3, 1);
    coords.col(0) = x;
    const Eigen::Matrix3Xd out = forward(m, coords);
    for (int c = 0; c < 3; ++c) {
        double expect = m.layers[1].bias(c);
        for (int j = 0; j < 3; ++j)
            expect += m.layers[1].weight(c, j) * hidden[j];
        CHECK(out(c, 0) == doctest::Approx(expect).epsilon(1e-14));
    }
}

TEST_CASE("forward rejects non-finite coordinates naming the index")
{
    const SirenModel m = init_siren({3, 8, 30.0}, 3);
    Eigen::Matrix3Xd coords = Eigen::Matrix3Xd::Zero(3, 4);
    coords(1, 2) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_WITH_AS(forward(m, coords),
                         doctest::Contains("batch index 2"), Error);
}

TEST_CASE("jacobian of all-zero model is zero")
{
    const SirenModel m = fsntest::zero_model(3, 8, 30.0);
    std::mt19937_64 rng(2);
    const JacobianBatch jac = forward_with_jacobian(m, fsntest::random_coords(4, rng));
    for (int d = 0; d < 3; ++d)
        CHECK(jac.deriv[d].isZero(0.0));
}

TEST_CASE("jacobian value channel is bit-identical to forward")
{
    const SirenModel m = init_siren({4, 16, 30.0}, 11);
    std::mt19937_64 rng(3);
    const Eigen::Matrix3Xd coords = fsntest::random_coords(17, rng);
    const Eigen::Matrix3Xd value = forward(m, coords);
    const JacobianBatch jac = forward_with_jacobian(m, coords);
    CHECK(value == jac.value);

    const JacobianResult one = jac.sample(5);
    CHECK(one.value == jac.value.col(5));
    CHECK(one.d_dx == jac.deriv[0].col(5));
    CHECK(one.d_dy == jac.deriv[1].col(5));
    CHECK(one.d_dt == jac.deriv[2].col(5));
}

TEST_CASE("jacobian matches central finite differences")
{
    std::mt19937_64 rng(42);
    const double step = 1e-4;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const SirenModel m = init_siren({3, 8, 30.0}, seed);
        const Eigen::Matrix3Xd coords = fsntest::random_coords(10, rng);
        const JacobianBatch jac = forward_with_jacobian(m, coords);
        for (Eigen::Index i = 0; i < coords.cols(); ++i) {
            for (int d = 0; d < 3; ++d) {
                for (int c = 0; c < 3; ++c) {
                    const double fd =
                        fsntest::fd_jacobian_entry(m, coords.col(i), c, d, step);
                    CHECK(rel_err(jac.deriv[d](c, i), fd) <= 1e-5);
                }
            }
        }
    }
}

TEST_CASE("evaluation does not mutate the model")
{
    const SirenModel m = init_siren({3, 8, 30.0}, 5);
    const SirenModel copy = m;
    std::mt19937_64 rng(4);
    const Eigen::Matrix3Xd coords = fsntest::random_coords(9, rng);
    (void)forward(m, coords);
    (void)forward_with_jacobian(m, coords);
    REQUIRE(m.layers.size() == copy.layers.size());
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        CHECK(m.layers[l].weight == copy.layers[l].weight);
        CHECK(m.layers[l].bias == copy.layers[l].bias);
    }
}

namespace {

SampleBatch make_training_batch(Eigen::Index n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    SampleBatch batch;
    batch.coords = fsntest::random_coords(n, rng);
    Eigen::Matrix3Xd targets(3, n), flows(3, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int r = 0; r < 3; ++r)
            targets(r, i) = dist(rng);
        flows(0, i) = 1.5 * dist(rng);
        flows(1, i) = 1.5 * dist(rng);
        flows(2, i) = 1.0;
    }
    batch.targets = targets;
    batch.flows = flows;
    return batch;
}

void check_parameter_gradients(const SirenModel& model, const SampleBatch& batch,
                               double lambda)
{
    const LossConfig cfg{lambda};
    const LossGradients lg = loss_gradients(model, batch, cfg);
    const double step = 1e-5;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const auto& w = model.layers[l].weight;
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) {
                const double fd = fsntest::fd_loss_wrt_param(
                    model, batch, cfg,
                    [=](SirenModel& m) -> double& { return m.layers[l].weight(r, c); },
                    step);
                CHECK(rel_err(lg.grads[l].weight(r, c), fd) <= 1e-4);
            }
        }
        for (Eigen::Index r = 0; r < model.layers[l].bias.size(); ++r) {
            const double fd = fsntest::fd_loss_wrt_param(
                model, batch, cfg,
                [=](SirenModel& m) -> double& { return m.layers[l].bias(r); }, step);
            CHECK(rel_err(lg.grads[l].bias(r), fd) <= 1e-4);
        }
    }
}

} // namespace

TEST_CASE("parameter gradients match finite differences for observation loss")
{
    const SirenModel m = init_siren({3, 8, 30.0}, 21);
    check_parameter_gradients(m, make_training_batch(1, 100), 0.0);
    check_parameter_gradients(m, make_training_batch(8, 101), 0.0);
}

TEST_CASE("parameter gradients match finite differences through the jacobian")
{
    const SirenModel m = init_siren({3, 8, 30.0}, 22);
    // Pure temporal flow (0, 0, 1) on a single sample, then a mixed batch.
    SampleBatch single = make_training_batch(1, 102);
    (*single.flows)(0, 0) = 0.0;
    (*single.flows)(1, 0) = 0.0;
    check_parameter_gradients(m, single, 1.0);
    check_parameter_gradients(m, make_training_batch(8, 103), 1.0);
}

TEST_CASE("parameter gradients match finite differences for the weighted mix")
{
    const SirenModel m = init_siren({3, 8, 30.0}, 23);
    check_parameter_gradients(m, make_training_batch(8, 104), 0.12);
}

TEST_CASE("model round-trips through checkpoint file")
{
    const SirenModel m = init_siren({4, 12, 25.0}, 77);
    const std::string path = "test_model_roundtrip.fsir";
    save_model(m, path);
    const SirenModel r = load_model(path);
    CHECK(r.config == m.config);
    CHECK(r.seed == m.seed);
    REQUIRE(r.layers.size() == m.layers.size());
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        CHECK(r.layers[l].weight == m.layers[l].weight);
        CHECK(r.layers[l].bias == m.layers[l].bias);
    }
    std::remove(path.c_str());
}

TEST_CASE("load_model rejects corrupted magic")
{
    const std::string path = "test_model_magic.fsir";
    save_model(init_siren({2, 4, 30.0}, 1), path);
    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(0);
        f.write("XXXX", 4);
    }
    CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("not a model file"),
                         IoError);
    std::remove(path.c_str());
}

TEST_CASE("load_model rejects unsupported version")
{
    const std::string path = "test_model_version.fsir";
    save_model(init_siren({2, 4, 30.0}, 1), path);
    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(4);
        const std::uint32_t bad = 999;
        f.write(reinterpret_cast<const char*>(&bad), sizeof(bad));
    }
    CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("version"), IoError);
    std::remove(path.c_str());
}

TEST_CASE("load_model rejects truncated file")
{
    const std::string path = "test_model_trunc.fsir";
    save_model(init_siren({3, 6, 30.0}, 1), path);
    std::ifstream in(path, std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
    in.close();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 16));
    out.close();
    CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("truncated"), IoError);
    std::remove(path.c_str());
}

TEST_CASE("load_model reports shape mismatch naming both shapes")
{
    const std::string path = "test_model_shape.fsir";
    save_model(init_siren({6, 8, 30.0}, 1), path);
    const SirenConfig expected{9, 8, 30.0};
    CHECK_THROWS_WITH_AS(load_model(path, expected), doctest::Contains("depth 6"),
                         IoError);
    CHECK_THROWS_WITH_AS(load_model(path, expected), doctest::Contains("depth 9"),
                         IoError);
    std::remove(path.c_str());
}
