// Copyright (c) 2026 flowsiren contributors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "flowsiren/experiment.hpp"

using namespace fsiren;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::path("exp_tmp") / name)
    {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

SceneSpec micro_scene(std::uint64_t seed = 3)
{
    SceneSpec spec;
    spec.pattern = "sinusoid";
    spec.motion = "translate";
    spec.vx = 1.0;
    spec.vy = 0.5;
    spec.width = 16;
    spec.height = 16;
    spec.frames = 6;
    spec.seed = seed;
    return spec;
}

ExperimentConfig micro_config(const std::string& data_dir, const std::string& out_dir)
{
    ExperimentConfig cfg;
    cfg.model = {3, 12, 30.0};
    cfg.train.max_lr = 5e-4;
    cfg.train.epochs = 30;
    cfg.train.batch_size = 768;
    cfg.train.lambda = 0.12;
    cfg.train.seed = 9;
    cfg.data.frames_dir = data_dir;
    cfg.output.dir = out_dir;
    cfg.eval.cadence_epochs = 0;
    cfg.output.checkpoint_cadence = 0;
    return cfg;
}

int run_binary(const std::string& args)
{
    const int status = std::system((std::string(FLOWSIREN_BIN) + " " + args).c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is.good());
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

} // namespace

TEST_CASE("paper presets carry the full-scale protocol settings")
{
    const ExperimentConfig d = preset_config("paper-default");
    CHECK(d.model.depth == 9);
    CHECK(d.model.width == 512);
    CHECK(d.model.omega == 30.0);
    CHECK(d.train.lambda == 0.12);
    CHECK(d.train.max_lr == 1e-5);
    CHECK(d.train.epochs == 5000);

    const ExperimentConfig f = preset_config("paper-final");
    CHECK(f.model.depth == 6);
    CHECK(f.model.width == 720);
    CHECK(f.model.omega == 25.0);
    CHECK(f.train.lambda == 0.12);
    CHECK(f.train.max_lr == 3.6e-5);
    CHECK(f.train.epochs == 15000);

    CHECK_THROWS_AS(preset_config("nope"), ConfigError);
}

TEST_CASE("config json rejects unknown keys")
{
    ExperimentConfig cfg;
    CHECK_THROWS_WITH_AS(apply_config_json(cfg, R"({"modle": {}})", "test"),
                         doctest::Contains("unknown key 'modle'"), ConfigError);
    CHECK_THROWS_WITH_AS(apply_config_json(cfg, R"({"train": {"lr": 1}})", "test"),
                         doctest::Contains("unknown key 'lr'"), ConfigError);
    CHECK_THROWS_AS(apply_config_json(cfg, "not json", "test"), ConfigError);
}

TEST_CASE("config json round-trips")
{
    ExperimentConfig cfg = preset_config("desk-small");
    cfg.data.frames_dir = "somewhere";
    cfg.train.precision = TrainConfig::Precision::kF32;
    const std::string text = config_to_json(cfg, "synth:test");

    ExperimentConfig loaded;
    apply_config_json(loaded, text, "round-trip");
    CHECK(loaded.model.depth == cfg.model.depth);
    CHECK(loaded.model.omega == cfg.model.omega);
    CHECK(loaded.train.max_lr == cfg.train.max_lr);
    CHECK(loaded.train.precision == TrainConfig::Precision::kF32);
    CHECK(loaded.data.frames_dir == "somewhere");
}

TEST_CASE("scene spec round-trips")
{
    TempDir dir("scene_spec");
    const SceneSpec spec = micro_scene(42);
    const std::string path = (dir.path / "scene_spec.json").string();
    write_scene_spec(spec, path);
    const SceneSpec r = read_scene_spec(path);
    CHECK(r.pattern == spec.pattern);
    CHECK(r.motion == spec.motion);
    CHECK(r.vx == spec.vx);
    CHECK(r.seed == spec.seed);
}

TEST_CASE("run_synth emits frames, flow and spec deterministically")
{
    TempDir dir("synth");
    const SceneSpec spec = micro_scene();
    run_synth(spec, (dir.path / "a").string());

    int pngs = 0, flos = 0, specs = 0;
    for (const auto& e : fs::directory_iterator(dir.path / "a")) {
        if (e.path().extension() == ".png")
            ++pngs;
        else if (e.path().extension() == ".flo")
            ++flos;
        else if (e.path().filename() == "scene_spec.json")
            ++specs;
    }
    CHECK(pngs == 6);
    CHECK(flos == 6);
    CHECK(specs == 1);

    run_synth(spec, (dir.path / "b").string());
    CHECK(slurp((dir.path / "a" / "frame_0003.png").string()) ==
          slurp((dir.path / "b" / "frame_0003.png").string()));

    SceneSpec still = micro_scene();
    still.motion = "static";
    still.vx = still.vy = 0.0;
    run_synth(still, (dir.path / "c").string());
    const PixelFlow f = read_flo((dir.path / "c" / "flow_0002.flo").string());
    for (double v : f.uv)
        CHECK(v == 0.0);
}

TEST_CASE("flow preparation precedence: files, then synth, then horn-schunck")
{
    TempDir dir("flowprep");
    run_synth(micro_scene(), (dir.path / "data").string());
    VideoTensor video = load_frames((dir.path / "data").string());
    split_observed(video, 2);

    FlowConfig cfg; // auto
    const PreparedFlows with_files =
        prepare_flows(video, cfg, (dir.path / "data").string());
    CHECK(with_files.source_note.rfind("files:", 0) == 0);
    CHECK(with_files.grids.size() == video.observed_indices().size());

    // Remove the .flo files: the scene spec should take over.
    for (const auto& e : fs::directory_iterator(dir.path / "data"))
        if (e.path().extension() == ".flo")
            fs::remove(e.path());
    const PreparedFlows with_scene =
        prepare_flows(video, cfg, (dir.path / "data").string());
    CHECK(with_scene.source_note.rfind("synth:", 0) == 0);

    // Exact synthetic flow and the emitted .flo files agree up to f32.
    for (std::size_t g = 0; g < with_files.grids.size(); ++g)
        for (std::size_t i = 0; i < with_files.grids[g].f.size(); ++i)
            CHECK(std::abs(with_files.grids[g].f[i] - with_scene.grids[g].f[i]) <= 1e-6);

    fs::remove(dir.path / "data" / "scene_spec.json");
    const PreparedFlows with_hs = prepare_flows(video, cfg, (dir.path / "data").string());
    CHECK(with_hs.source_note.rfind("horn-schunck", 0) == 0);
    CHECK(with_hs.grids.size() == video.observed_indices().size());
}

TEST_CASE("run_fit with lambda 0 logs the flow loss but total equals obs")
{
    TempDir dir("fit_l0");
    run_synth(micro_scene(), (dir.path / "data").string());
    ExperimentConfig cfg =
        micro_config((dir.path / "data").string(), (dir.path / "out").string());
    cfg.train.lambda = 0.0;
    const FitArtifacts art = run_fit(cfg);

    CHECK(fs::exists(dir.path / "out" / "resolved_config.json"));
    std::ifstream csv(art.training_csv_path);
    std::string header;
    std::getline(csv, header);
    CHECK(header == "epoch,lr,obs_loss,of_loss,total,observed_psnr,interp_psnr");
    std::string line;
    int rows = 0;
    while (std::getline(csv, line)) {
        std::istringstream ls(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ls, cell, ','))
            cells.push_back(cell);
        REQUIRE(cells.size() >= 5);
        CHECK(!cells[3].empty());     // of_loss present
        CHECK(cells[4] == cells[2]);  // total == obs bit-exactly at lambda 0
        ++rows;
    }
    CHECK(rows == cfg.train.epochs);
}

TEST_CASE("run_eval on identical directories emits sentinel rows")
{
    TempDir dir("eval_ident");
    run_synth(micro_scene(), (dir.path / "data").string());
    const std::string csv_path = (dir.path / "metrics.csv").string();
    const EvalSummary s = run_eval((dir.path / "data").string(),
                                   (dir.path / "data").string(), 2, csv_path);
    CHECK(s.metrics.observed.mean_psnr == kPsnrSentinelDb);
    CHECK(s.metrics.held_out.mean_psnr == kPsnrSentinelDb);

    std::ifstream csv(csv_path);
    std::string line;
    int rows = -1; // skip header
    while (std::getline(csv, line))
        ++rows;
    CHECK(rows == 6 + 2);
}

TEST_CASE("run_eval rejects frame count mismatches")
{
    TempDir dir("eval_mismatch");
    run_synth(micro_scene(), (dir.path / "a").string());
    SceneSpec shorter = micro_scene();
    shorter.frames = 4;
    run_synth(shorter, (dir.path / "b").string());
    for (const auto& e : fs::directory_iterator(dir.path / "a"))
        if (e.path().extension() == ".flo")
            fs::remove(e.path());
    CHECK_THROWS_WITH_AS(run_eval((dir.path / "a").string(), (dir.path / "b").string(),
                                  2, (dir.path / "m.csv").string()),
                         doctest::Contains("count mismatch"), Error);
}

TEST_CASE("run_interpolate renders the requested times")
{
    TempDir dir("interp");
    run_synth(micro_scene(), (dir.path / "data").string());
    ExperimentConfig cfg =
        micro_config((dir.path / "data").string(), (dir.path / "out").string());
    cfg.output.checkpoint_cadence = 100;
    const FitArtifacts art = run_fit(cfg);

    const auto paths = run_interpolate(art.checkpoint_path, {0.5, 2.25, 3.75}, 16, 16,
                                       6, (dir.path / "frames").string());
    CHECK(paths.size() == 3);
    for (const auto& p : paths)
        CHECK(fs::exists(p));
    CHECK(fs::exists(dir.path / "frames" / "times.csv"));
}

TEST_CASE("interpolating at an observed time matches the render path bit-exactly")
{
    TempDir dir("interp_exact");
    run_synth(micro_scene(), (dir.path / "data").string());
    ExperimentConfig cfg =
        micro_config((dir.path / "data").string(), (dir.path / "out").string());
    cfg.output.checkpoint_cadence = 100;
    const FitArtifacts art = run_fit(cfg);

    (void)run_interpolate(art.checkpoint_path, {2.0}, 16, 16, 6,
                          (dir.path / "frames").string());
    const VideoTensor direct = render_frames(art.result.model, {2.0}, 16, 16, 6);
    VideoTensor single = VideoTensor::zeros(1, 16, 16);
    single.data = direct.data;
    save_frames(single, (dir.path / "direct").string(), "interp_");
    CHECK(slurp((dir.path / "frames" / "interp_0000.png").string()) ==
          slurp((dir.path / "direct" / "interp_0000.png").string()));
}

TEST_CASE("sweep rows equal a standalone fit plus eval")
{
    TempDir dir("sweep");
    run_synth(micro_scene(), (dir.path / "data").string());
    ExperimentConfig base =
        micro_config((dir.path / "data").string(), (dir.path / "unused").string());

    const auto rows =
        run_sweep("lambda", {"0", "0.5"}, base, (dir.path / "sweep").string());
    REQUIRE(rows.size() == 4);
    CHECK(fs::exists(dir.path / "sweep" / "sweep.csv"));

    // Standalone run with the same settings must reproduce the sweep row.
    ExperimentConfig solo = base;
    solo.train.lambda = 0.5;
    solo.output.dir = (dir.path / "solo").string();
    const FitArtifacts art = run_fit(solo);
    VideoTensor truth = load_frames(solo.data.frames_dir);
    std::vector<double> times{0, 1, 2, 3, 4, 5};
    const VideoTensor rendered =
        render_frames(art.result.model, times, truth.height, truth.width, truth.frames);
    save_frames(rendered, (dir.path / "solo" / "render").string());
    const EvalSummary summary =
        run_eval((dir.path / "solo" / "render").string(), solo.data.frames_dir, 2,
                 (dir.path / "solo" / "metrics.csv").string());

    const SweepRow& obs_row = rows[2];
    const SweepRow& interp_row = rows[3];
    CHECK(obs_row.role == "observed");
    CHECK(obs_row.psnr == summary.metrics.observed.mean_psnr);
    CHECK(interp_row.psnr == summary.metrics.held_out.mean_psnr);
    CHECK(obs_row.ssim == summary.metrics.observed.mean_ssim);
}

TEST_CASE("sweep continues past failing members")
{
    TempDir dir("sweep_fail");
    run_synth(micro_scene(), (dir.path / "data").string());
    ExperimentConfig base =
        micro_config((dir.path / "data").string(), (dir.path / "unused").string());
    base.train.epochs = 5;

    // width 0 is invalid and must fail without sinking the sweep.
    const auto rows = run_sweep("width", {"0", "8"}, base, (dir.path / "sweep").string());
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].failed);
    CHECK(rows[1].failed);
    CHECK(!rows[2].failed);
    CHECK(!rows[3].failed);
}

TEST_CASE("sweep axes parse and apply")
{
    TempDir dir("sweep_axes");
    run_synth(micro_scene(), (dir.path / "data").string());
    ExperimentConfig base =
        micro_config((dir.path / "data").string(), (dir.path / "unused").string());
    base.train.epochs = 4;

    const auto onoff =
        run_sweep("of-onoff", {"on", "off"}, base, (dir.path / "onoff").string());
    REQUIRE(onoff.size() == 4);
    for (const auto& r : onoff)
        CHECK(!r.failed);

    const auto wd =
        run_sweep("width-depth", {"8:2", "6:3"}, base, (dir.path / "wd").string());
    REQUIRE(wd.size() == 4);
    for (const auto& r : wd)
        CHECK(!r.failed);

    CHECK_THROWS_AS(run_sweep("nope", {"1"}, base, (dir.path / "bad").string()),
                    ConfigError);

    // 'on' is meaningless when the base has no flow weight.
    ExperimentConfig zero_lambda = base;
    zero_lambda.train.lambda = 0.0;
    const auto rows =
        run_sweep("of-onoff", {"on"}, zero_lambda, (dir.path / "bad2").string());
    CHECK(rows[0].failed);
}

TEST_CASE("cli exit codes")
{
    TempDir dir("cli");
    // Usage error.
    CHECK(run_binary("definitely-not-a-command >/dev/null 2>&1") == 2);
    CHECK(run_binary("fit --no-such-flag >/dev/null 2>&1") == 2);
    // I/O error: missing data directory.
    CHECK(run_binary("fit --data /nonexistent_dir_xyz --out " +
                     (dir.path / "o").string() + " >/dev/null 2>&1") == 4);
    // Success.
    CHECK(run_binary("synth --pattern blobs --motion static --dims 16x16x4 --out " +
                     (dir.path / "ds").string() + " >/dev/null 2>&1") == 0);
    // Config error: bad lambda.
    CHECK(run_binary("fit --data " + (dir.path / "ds").string() +
                     " --out " + (dir.path / "o2").string() +
                     " --lambda 2.0 >/dev/null 2>&1") == 2);
    // Numerical abort: absurd learning rate overflows within a few steps.
    CHECK(run_binary("fit --data " + (dir.path / "ds").string() + " --out " +
                     (dir.path / "o3").string() +
                     " --width 8 --epochs 3 --eval-cadence 0 "
                     "--max-lr 1e308 >/dev/null 2>&1") == 3);
}
