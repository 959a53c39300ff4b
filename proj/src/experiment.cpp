// Copyright (c) 2026 flowsiren contributors
// SPDX-License-Identifier: Apache-2.0

#include "flowsiren/experiment.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace fsiren {

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& where)
{
    FSN_CHECK_CONFIG(j.is_object(), where, " must be a JSON object");
    for (const auto& [key, value] : j.items())
        FSN_CHECK_CONFIG(allowed.count(key) != 0, "unknown key '", key, "' in ", where);
}

template <class T>
void get_if_present(const json& j, const char* key, T& out)
{
    if (j.contains(key))
        out = j.at(key).get<T>();
}

} // namespace

void ExperimentConfig::validate() const
{
    model.validate();
    train.validate();
    LossConfig{train.lambda}.validate();
    FSN_CHECK_CONFIG(data.split_k >= 2, "data.split_k must be >= 2, got ", data.split_k);
    FSN_CHECK_CONFIG(flow.source == "auto" || flow.source == "files" ||
                         flow.source == "synth" || flow.source == "horn-schunck",
                     "unknown flow source '", flow.source, "'");
    FSN_CHECK_CONFIG(flow.stride >= 1, "flow.stride must be >= 1, got ", flow.stride);
    FSN_CHECK_CONFIG(flow.hs_alpha > 0.0, "flow.hs_alpha must be positive");
    FSN_CHECK_CONFIG(flow.hs_iterations >= 1, "flow.hs_iterations must be >= 1");
    FSN_CHECK_CONFIG(eval.cadence_epochs >= 0, "eval.cadence_epochs must be >= 0");
    FSN_CHECK_CONFIG(output.checkpoint_cadence >= 0,
                     "output.checkpoint_cadence must be >= 0");
}

ExperimentConfig preset_config(const std::string& name)
{
    ExperimentConfig cfg;
    if (name == "paper-default") {
        cfg.model = {9, 512, 30.0};
        cfg.train.max_lr = 1e-5;
        cfg.train.epochs = 5000;
        cfg.train.batch_size = 16384;
        cfg.train.lambda = 0.12;
        cfg.eval.cadence_epochs = 100;
        cfg.output.checkpoint_cadence = 500;
    } else if (name == "paper-final") {
        cfg.model = {6, 720, 25.0};
        cfg.train.max_lr = 3.6e-5;
        cfg.train.epochs = 15000;
        cfg.train.batch_size = 16384;
        cfg.train.lambda = 0.12;
        cfg.eval.cadence_epochs = 100;
        cfg.output.checkpoint_cadence = 500;
    } else if (name == "desk-small") {
        cfg.model = {3, 32, 30.0};
        cfg.train.max_lr = 3e-4;
        cfg.train.epochs = 400;
        cfg.train.batch_size = 2048;
        cfg.train.lambda = 0.12;
        cfg.eval.cadence_epochs = 50;
        cfg.output.checkpoint_cadence = 200;
    } else {
        fail<ConfigError>("unknown preset '", name, "' (available: paper-default, ",
                          "paper-final, desk-small)");
    }
    return cfg;
}

std::vector<std::string> preset_names()
{
    return {"paper-default", "paper-final", "desk-small"};
}

void apply_config_json(ExperimentConfig& cfg, const std::string& json_text,
                       const std::string& origin)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        fail<ConfigError>("cannot parse ", origin, ": ", e.what());
    }
    check_keys(j, {"model", "train", "data", "flow", "eval", "output"}, origin);

    if (j.contains("model")) {
        const json& m = j["model"];
        check_keys(m, {"depth", "width", "omega"}, origin + ":model");
        get_if_present(m, "depth", cfg.model.depth);
        get_if_present(m, "width", cfg.model.width);
        get_if_present(m, "omega", cfg.model.omega);
    }
    if (j.contains("train")) {
        const json& t = j["train"];
        check_keys(t,
                   {"max_lr", "epochs", "batch_size", "lambda", "seed", "precision",
                    "beta1", "beta2", "epsilon"},
                   origin + ":train");
        get_if_present(t, "max_lr", cfg.train.max_lr);
        get_if_present(t, "epochs", cfg.train.epochs);
        get_if_present(t, "batch_size", cfg.train.batch_size);
        get_if_present(t, "lambda", cfg.train.lambda);
        get_if_present(t, "seed", cfg.train.seed);
        get_if_present(t, "beta1", cfg.train.beta1);
        get_if_present(t, "beta2", cfg.train.beta2);
        get_if_present(t, "epsilon", cfg.train.epsilon);
        if (t.contains("precision")) {
            const std::string p = t["precision"].get<std::string>();
            FSN_CHECK_CONFIG(p == "f64" || p == "f32", "train.precision must be ",
                             "'f64' or 'f32', got '", p, "'");
            cfg.train.precision = p == "f32" ? TrainConfig::Precision::kF32
                                             : TrainConfig::Precision::kF64;
        }
    }
    if (j.contains("data")) {
        const json& d = j["data"];
        check_keys(d, {"frames_dir", "split_k"}, origin + ":data");
        get_if_present(d, "frames_dir", cfg.data.frames_dir);
        get_if_present(d, "split_k", cfg.data.split_k);
    }
    if (j.contains("flow")) {
        const json& f = j["flow"];
        check_keys(f, {"source", "dir", "stride", "hs_alpha", "hs_iterations",
                       "resolved_source"},
                   origin + ":flow");
        get_if_present(f, "source", cfg.flow.source);
        get_if_present(f, "dir", cfg.flow.dir);
        get_if_present(f, "stride", cfg.flow.stride);
        get_if_present(f, "hs_alpha", cfg.flow.hs_alpha);
        get_if_present(f, "hs_iterations", cfg.flow.hs_iterations);
    }
    if (j.contains("eval")) {
        const json& e = j["eval"];
        check_keys(e, {"cadence_epochs"}, origin + ":eval");
        get_if_present(e, "cadence_epochs", cfg.eval.cadence_epochs);
    }
    if (j.contains("output")) {
        const json& o = j["output"];
        check_keys(o, {"dir", "checkpoint_cadence"}, origin + ":output");
        get_if_present(o, "dir", cfg.output.dir);
        get_if_present(o, "checkpoint_cadence", cfg.output.checkpoint_cadence);
    }
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream is(path);
    FSN_CHECK_IO(is.good(), "cannot open config file: ", path);
    std::string text((std::istreambuf_iterator<char>(is)),
                     std::istreambuf_iterator<char>());
    ExperimentConfig cfg;
    apply_config_json(cfg, text, path);
    return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg,
                           const std::string& flow_source_note)
{
    json j;
    j["model"] = {{"depth", cfg.model.depth},
                  {"width", cfg.model.width},
                  {"omega", cfg.model.omega}};
    j["train"] = {
        {"max_lr", cfg.train.max_lr},
        {"epochs", cfg.train.epochs},
        {"batch_size", cfg.train.batch_size},
        {"lambda", cfg.train.lambda},
        {"seed", cfg.train.seed},
        {"precision",
         cfg.train.precision == TrainConfig::Precision::kF32 ? "f32" : "f64"},
        {"beta1", cfg.train.beta1},
        {"beta2", cfg.train.beta2},
        {"epsilon", cfg.train.epsilon}};
    j["data"] = {{"frames_dir", cfg.data.frames_dir}, {"split_k", cfg.data.split_k}};
    j["flow"] = {{"source", cfg.flow.source},
                 {"dir", cfg.flow.dir},
                 {"stride", cfg.flow.stride},
                 {"hs_alpha", cfg.flow.hs_alpha},
                 {"hs_iterations", cfg.flow.hs_iterations}};
    if (!flow_source_note.empty())
        j["flow"]["resolved_source"] = flow_source_note;
    j["eval"] = {{"cadence_epochs", cfg.eval.cadence_epochs}};
    j["output"] = {{"dir", cfg.output.dir},
                   {"checkpoint_cadence", cfg.output.checkpoint_cadence}};
    return j.dump(2) + "\n";
}

void write_resolved_config(const ExperimentConfig& cfg, const std::string& dir,
                           const std::string& flow_source_note)
{
    fs::create_directories(dir);
    const std::string path = (fs::path(dir) / "resolved_config.json").string();
    std::ofstream os(path, std::ios::trunc);
    FSN_CHECK_IO(os.good(), "cannot write resolved config: ", path);
    os << config_to_json(cfg, flow_source_note);
}

// ---------------------------------------------------------------------------
// Scene spec sidecar.

void write_scene_spec(const SceneSpec& spec, const std::string& path)
{
    json j = {{"pattern", spec.pattern}, {"motion", spec.motion},
              {"vx", spec.vx},           {"vy", spec.vy},
              {"rot_deg", spec.rot_deg}, {"width", spec.width},
              {"height", spec.height},   {"frames", spec.frames},
              {"seed", spec.seed}};
    std::ofstream os(path, std::ios::trunc);
    FSN_CHECK_IO(os.good(), "cannot write scene spec: ", path);
    os << j.dump(2) << "\n";
}

SceneSpec read_scene_spec(const std::string& path)
{
    std::ifstream is(path);
    FSN_CHECK_IO(is.good(), "cannot open scene spec: ", path);
    json j;
    try {
        is >> j;
    } catch (const json::parse_error& e) {
        fail<ConfigError>("cannot parse scene spec ", path, ": ", e.what());
    }
    check_keys(j, {"pattern", "motion", "vx", "vy", "rot_deg", "width", "height",
                   "frames", "seed"},
               path);
    SceneSpec spec;
    get_if_present(j, "pattern", spec.pattern);
    get_if_present(j, "motion", spec.motion);
    get_if_present(j, "vx", spec.vx);
    get_if_present(j, "vy", spec.vy);
    get_if_present(j, "rot_deg", spec.rot_deg);
    get_if_present(j, "width", spec.width);
    get_if_present(j, "height", spec.height);
    get_if_present(j, "frames", spec.frames);
    get_if_present(j, "seed", spec.seed);
    spec.validate();
    return spec;
}

// ---------------------------------------------------------------------------
// Flow preparation.

namespace {

std::vector<fs::path> numbered_files(const std::string& dir, const std::string& ext)
{
    std::map<long, fs::path> by_index;
    if (!fs::is_directory(dir))
        return {};
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ext)
            continue;
        const std::string base = entry.path().stem().string();
        std::size_t digits = 0;
        while (digits < base.size() &&
               std::isdigit(static_cast<unsigned char>(base[base.size() - 1 - digits])))
            ++digits;
        if (digits == 0)
            continue;
        by_index[std::stol(base.substr(base.size() - digits))] = entry.path();
    }
    std::vector<fs::path> out;
    out.reserve(by_index.size());
    for (const auto& [index, path] : by_index)
        out.push_back(path);
    return out;
}

PreparedFlows flows_from_files(const VideoTensor& video, const FlowConfig& cfg,
                               const std::string& dir)
{
    const std::vector<fs::path> files = numbered_files(dir, ".flo");
    const std::vector<int> observed = video.observed_indices();
    const std::size_t n_obs = observed.size();
    FSN_CHECK_IO(!files.empty(), "no .flo files found in ", dir);

    // Accepted layouts: one file per source frame, one per observed frame,
    // or one per observed frame except the last (predecessor reused).
    std::vector<fs::path> per_observed;
    if (files.size() == static_cast<std::size_t>(video.frames)) {
        for (int idx : observed)
            per_observed.push_back(files[static_cast<std::size_t>(idx)]);
    } else if (files.size() == n_obs) {
        per_observed = files;
    } else if (files.size() == n_obs - 1) {
        per_observed = files;
        per_observed.push_back(files.back());
    } else {
        fail<IoError>("found ", files.size(), " .flo files in ", dir, ", expected ",
                      video.frames, " (per source frame), ", n_obs,
                      " (per observed frame) or ", n_obs - 1);
    }

    PreparedFlows out;
    out.source_note = concat("files:", dir, " stride=", cfg.stride);
    for (const auto& path : per_observed) {
        PixelFlow pf = read_flo(path.string());
        if (pf.width != video.width || pf.height != video.height)
            pf = resize_flow(pf, video.height, video.width);
        out.grids.push_back(
            normalize_flow(pf, video.frames, video.height, video.width, cfg.stride));
    }
    return out;
}

PreparedFlows flows_from_scene(const VideoTensor& video, const std::string& spec_path)
{
    const SceneSpec spec = read_scene_spec(spec_path);
    FSN_CHECK_CONFIG(spec.width == video.width && spec.height == video.height &&
                         spec.frames == video.frames,
                     "scene spec geometry does not match the loaded frames");
    const SyntheticScene scene(spec);
    PreparedFlows out;
    out.source_note = "synth:" + spec_path;
    for (int idx : video.observed_indices()) {
        PixelFlow pf = PixelFlow::zeros(video.height, video.width);
        for (int y = 0; y < video.height; ++y)
            for (int x = 0; x < video.width; ++x) {
                const Eigen::Vector2d d = scene.displacement_at(x, y, idx);
                pf.u(y, x) = d.x();
                pf.v(y, x) = d.y();
            }
        out.grids.push_back(normalize_flow(pf, video.frames, video.height, video.width));
    }
    return out;
}

PreparedFlows flows_from_horn_schunck(const VideoTensor& video, const FlowConfig& cfg)
{
    const std::vector<int> observed = video.observed_indices();
    FSN_CHECK(observed.size() >= 2, "Horn-Schunck flow needs at least 2 observed frames");

    std::vector<Eigen::MatrixXd> luma;
    luma.reserve(observed.size());
    for (int idx : observed)
        luma.push_back(luma601(video.frame(idx)));

    PreparedFlows out;
    out.source_note = concat("horn-schunck alpha=", cfg.hs_alpha,
                             " iterations=", cfg.hs_iterations);
    for (std::size_t i = 0; i < observed.size(); ++i) {
        PixelFlow pf;
        int gap = 0;
        if (i + 1 < observed.size()) {
            gap = observed[i + 1] - observed[i];
            pf = horn_schunck(luma[i], luma[i + 1], cfg.hs_alpha, cfg.hs_iterations);
        } else {
            // Last observed frame: measure backward to the predecessor and
            // negate.
            gap = observed[i] - observed[i - 1];
            pf = horn_schunck(luma[i], luma[i - 1], cfg.hs_alpha, cfg.hs_iterations);
            for (auto& v : pf.uv)
                v = -v;
        }
        out.grids.push_back(
            normalize_flow(pf, video.frames, video.height, video.width, gap));
    }
    return out;
}

} // namespace

PreparedFlows prepare_flows(const VideoTensor& video, const FlowConfig& cfg,
                            const std::string& frames_dir)
{
    const std::string flo_dir = cfg.dir.empty() ? frames_dir : cfg.dir;
    const std::string spec_path = (fs::path(frames_dir) / "scene_spec.json").string();

    if (cfg.source == "files")
        return flows_from_files(video, cfg, flo_dir);
    if (cfg.source == "synth")
        return flows_from_scene(video, spec_path);
    if (cfg.source == "horn-schunck")
        return flows_from_horn_schunck(video, cfg);

    // auto: explicit files win, then exact synthetic flow, then estimation.
    if (!numbered_files(flo_dir, ".flo").empty())
        return flows_from_files(video, cfg, flo_dir);
    if (fs::exists(spec_path))
        return flows_from_scene(video, spec_path);
    return flows_from_horn_schunck(video, cfg);
}

// ---------------------------------------------------------------------------
// Fit pipeline.

namespace {

std::string csv_cell(const std::optional<double>& v)
{
    return v ? format_double(*v) : std::string();
}

} // namespace

FitArtifacts run_fit(const ExperimentConfig& cfg, bool resume)
{
    cfg.validate();
    FSN_CHECK_CONFIG(!cfg.data.frames_dir.empty(), "data.frames_dir is not set");
    FSN_CHECK_CONFIG(!cfg.output.dir.empty(), "output.dir is not set");

    VideoTensor video = load_frames(cfg.data.frames_dir);
    split_observed(video, cfg.data.split_k);
    const PreparedFlows flows = prepare_flows(video, cfg.flow, cfg.data.frames_dir);

    fs::create_directories(cfg.output.dir);
    FitArtifacts art;
    art.checkpoint_path = (fs::path(cfg.output.dir) / "checkpoint.fsir").string();
    art.state_path = (fs::path(cfg.output.dir) / "train_state.fsst").string();
    art.training_csv_path = (fs::path(cfg.output.dir) / "training.csv").string();

    SirenModel model;
    TrainState state;
    const TrainState* resume_state = nullptr;
    if (resume) {
        model = load_model(art.checkpoint_path, cfg.model);
        state = load_train_state(art.state_path, model);
        resume_state = &state;
        std::cerr << "resuming from epoch " << state.next_epoch << "\n";
    } else {
        model = init_siren(cfg.model, cfg.train.seed);
    }

    write_resolved_config(cfg, cfg.output.dir, flows.source_note);

    std::ofstream csv(art.training_csv_path,
                      resume ? std::ios::app : std::ios::trunc);
    FSN_CHECK_IO(csv.good(), "cannot write training CSV: ", art.training_csv_path);
    if (!resume)
        csv << "epoch,lr,obs_loss,of_loss,total,observed_psnr,interp_psnr\n";

    const CheckpointOptions ckpt{art.checkpoint_path, art.state_path,
                                 cfg.output.checkpoint_cadence};
    art.result = fit(
        model, video, flows.grids, cfg.train, cfg.eval, &ckpt,
        [&](const EpochLog& log) {
            csv << log.epoch << ',' << format_double(log.lr) << ','
                << format_double(log.obs_loss) << ',' << format_double(log.of_loss)
                << ',' << format_double(log.total) << ',' << csv_cell(log.observed_psnr)
                << ',' << csv_cell(log.interp_psnr) << '\n';
            csv.flush();
        },
        resume_state);
    return art;
}

// ---------------------------------------------------------------------------
// Synthetic dataset emission.

void run_synth(const SceneSpec& spec, const std::string& out_dir)
{
    spec.validate();
    const SyntheticScene scene(spec);
    fs::create_directories(out_dir);

    save_frames(scene.render_video(), out_dir);
    const std::vector<PixelFlow> flows = synth_flow(scene);
    char num[16];
    for (std::size_t k = 0; k < flows.size(); ++k) {
        std::snprintf(num, sizeof(num), "%04zu", k);
        write_flo(flows[k], (fs::path(out_dir) / (std::string("flow_") + num + ".flo"))
                                .string());
    }
    write_scene_spec(spec, (fs::path(out_dir) / "scene_spec.json").string());
}

// ---------------------------------------------------------------------------
// Evaluation.

EvalSummary run_eval(const std::string& rendered_dir, const std::string& truth_dir,
                     int split_k, const std::string& csv_path)
{
    const VideoTensor rendered = load_frames(rendered_dir);
    VideoTensor truth = load_frames(truth_dir);
    FSN_CHECK(rendered.frames == truth.frames, "frame count mismatch: ", rendered.frames,
              " rendered vs ", truth.frames, " truth");
    split_observed(truth, split_k);

    EvalSummary out;
    out.metrics = video_metrics(rendered, truth);
    out.csv_path = csv_path;

    std::ofstream csv(csv_path, std::ios::trunc);
    FSN_CHECK_IO(csv.good(), "cannot write metrics CSV: ", csv_path);
    csv << "frame_index,role,psnr,ssim,exact_match\n";
    for (const auto& f : out.metrics.frames)
        csv << f.frame_index << ','
            << (f.role == FrameRole::kObserved ? "observed" : "interpolated") << ','
            << format_double(std::min(f.psnr, kPsnrSentinelDb)) << ','
            << format_double(f.ssim) << ',' << (f.exact_match ? 1 : 0) << '\n';
    csv << ",observed_mean," << format_double(out.metrics.observed.mean_psnr) << ','
        << format_double(out.metrics.observed.mean_ssim) << ",\n";
    csv << ",interpolated_mean," << format_double(out.metrics.held_out.mean_psnr) << ','
        << format_double(out.metrics.held_out.mean_ssim) << ",\n";

    std::cout << "observed:     mean PSNR " << out.metrics.observed.mean_psnr
              << " dB, mean SSIM " << out.metrics.observed.mean_ssim
              << " (global-mse PSNR " << out.metrics.observed.global_mse_psnr << ")\n";
    std::cout << "interpolated: mean PSNR " << out.metrics.held_out.mean_psnr
              << " dB, mean SSIM " << out.metrics.held_out.mean_ssim
              << " (global-mse PSNR " << out.metrics.held_out.global_mse_psnr << ")\n";
    return out;
}

// ---------------------------------------------------------------------------
// Interpolation.

std::vector<std::string> run_interpolate(const std::string& checkpoint_path,
                                         const std::vector<double>& times, int width,
                                         int height, int frames,
                                         const std::string& out_dir)
{
    FSN_CHECK_CONFIG(!times.empty(), "no time indices given");
    const SirenModel model = load_model(checkpoint_path);
    for (double t : times)
        if (t < 0.0 || t > frames - 1)
            std::cerr << "warning: t=" << t << " is outside the fitted range [0, "
                      << frames - 1 << "]; extrapolating\n";

    const VideoTensor rendered = render_frames(model, times, height, width, frames);
    fs::create_directories(out_dir);
    save_frames(rendered, out_dir, "interp_");

    std::ofstream index((fs::path(out_dir) / "times.csv").string(), std::ios::trunc);
    index << "frame_index,time,extrapolated\n";
    std::vector<std::string> paths;
    char num[16];
    for (std::size_t i = 0; i < times.size(); ++i) {
        std::snprintf(num, sizeof(num), "%04zu", i);
        paths.push_back((fs::path(out_dir) / (std::string("interp_") + num + ".png"))
                            .string());
        const bool outside = times[i] < 0.0 || times[i] > frames - 1;
        index << i << ',' << format_double(times[i]) << ',' << (outside ? 1 : 0) << '\n';
    }
    return paths;
}

// ---------------------------------------------------------------------------
// Sweeps.

namespace {

std::string sanitize(const std::string& s)
{
    std::string out;
    for (char c : s)
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-')
                   ? c
                   : '_';
    return out;
}

void apply_axis_value(ExperimentConfig& cfg, const std::string& axis,
                      const std::string& value)
{
    if (axis == "lambda") {
        cfg.train.lambda = std::stod(value);
    } else if (axis == "omega") {
        cfg.model.omega = std::stod(value);
    } else if (axis == "width") {
        cfg.model.width = std::stoi(value);
    } else if (axis == "width-depth") {
        const auto colon = value.find(':');
        FSN_CHECK_CONFIG(colon != std::string::npos,
                         "width-depth grid entries must look like 'width:depth', got '",
                         value, "'");
        cfg.model.width = std::stoi(value.substr(0, colon));
        cfg.model.depth = std::stoi(value.substr(colon + 1));
    } else if (axis == "of-onoff") {
        if (value == "off") {
            cfg.train.lambda = 0.0;
        } else if (value == "on") {
            FSN_CHECK_CONFIG(cfg.train.lambda > 0.0,
                             "of-onoff 'on' needs a positive lambda in the base config");
        } else {
            fail<ConfigError>("of-onoff grid entries must be 'on' or 'off', got '",
                              value, "'");
        }
    } else {
        fail<ConfigError>("unknown sweep axis '", axis,
                          "' (lambda, omega, width, width-depth, of-onoff)");
    }
}

} // namespace

std::vector<SweepRow> run_sweep(const std::string& axis,
                                const std::vector<std::string>& grid,
                                const ExperimentConfig& base,
                                const std::string& out_dir)
{
    FSN_CHECK_CONFIG(axis == "lambda" || axis == "omega" || axis == "width" ||
                         axis == "width-depth" || axis == "of-onoff",
                     "unknown sweep axis '", axis,
                     "' (lambda, omega, width, width-depth, of-onoff)");
    FSN_CHECK_CONFIG(!grid.empty(), "sweep grid is empty");
    fs::create_directories(out_dir);

    std::vector<SweepRow> rows;
    for (const std::string& value : grid) {
        ExperimentConfig cfg = base;
        cfg.output.dir = (fs::path(out_dir) / (axis + "_" + sanitize(value))).string();

        SweepRow observed{axis, value, "observed", 0.0, 0.0, false};
        SweepRow interpolated{axis, value, "interpolated", 0.0, 0.0, false};
        try {
            apply_axis_value(cfg, axis, value);
            const FitArtifacts art = run_fit(cfg);

            // Same render-save-eval path as a standalone cmd_interpolate +
            // cmd_eval, so sweep rows match standalone runs bit for bit.
            VideoTensor truth = load_frames(cfg.data.frames_dir);
            std::vector<double> times(static_cast<std::size_t>(truth.frames));
            for (int t = 0; t < truth.frames; ++t)
                times[static_cast<std::size_t>(t)] = t;
            const VideoTensor rendered =
                render_frames(art.result.model, times, truth.height, truth.width,
                              truth.frames);
            const std::string render_dir = (fs::path(cfg.output.dir) / "render").string();
            save_frames(rendered, render_dir);
            const EvalSummary summary =
                run_eval(render_dir, cfg.data.frames_dir, cfg.data.split_k,
                         (fs::path(cfg.output.dir) / "metrics.csv").string());

            observed.psnr = summary.metrics.observed.mean_psnr;
            observed.ssim = summary.metrics.observed.mean_ssim;
            interpolated.psnr = summary.metrics.held_out.mean_psnr;
            interpolated.ssim = summary.metrics.held_out.mean_ssim;
        } catch (const std::exception& e) {
            std::cerr << "sweep member " << axis << "=" << value << " failed: "
                      << e.what() << "\n";
            observed.failed = true;
            interpolated.failed = true;
        }
        rows.push_back(observed);
        rows.push_back(interpolated);
    }

    write_sweep_csv(rows, (fs::path(out_dir) / "sweep.csv").string());
    return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path)
{
    std::ofstream csv(path, std::ios::trunc);
    FSN_CHECK_IO(csv.good(), "cannot write sweep CSV: ", path);
    csv << "axis,value,role,psnr,ssim,status\n";
    for (const auto& r : rows)
        csv << r.axis << ',' << r.value << ',' << r.role << ','
            << (r.failed ? "" : format_double(r.psnr)) << ','
            << (r.failed ? "" : format_double(r.ssim)) << ','
            << (r.failed ? "failed" : "ok") << '\n';
}

} // namespace fsiren
