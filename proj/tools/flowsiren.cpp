// Copyright (c) 2026 flowsiren contributors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: synth | flow | fit | interpolate | eval | sweep.
// Exit codes: 0 success, 2 config/usage error, 3 numerical abort, 4 I/O error.

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "flowsiren/experiment.hpp"

namespace fs = std::filesystem;
using namespace fsiren;

namespace {

// Every command records its fully resolved parameters beside its outputs.
void write_resolved_args(const std::string& dir, const nlohmann::json& args)
{
    fs::create_directories(dir);
    std::ofstream os((fs::path(dir) / "resolved_args.json").string(), std::ios::trunc);
    FSN_CHECK_IO(os.good(), "cannot write resolved args in ", dir);
    os << args.dump(2) << "\n";
}

void parse_dims(const std::string& s, int& width, int& height, int& frames)
{
    int w = 0, h = 0, t = 0;
    char x1 = 0, x2 = 0;
    std::istringstream is(s);
    is >> w >> x1 >> h >> x2 >> t;
    FSN_CHECK_CONFIG(is && x1 == 'x' && x2 == 'x' && w > 0 && h > 0 && t > 0,
                     "--dims must look like WxHxT, got '", s, "'");
    width = w;
    height = h;
    frames = t;
}

std::vector<double> parse_double_list(const std::string& s)
{
    std::vector<double> out;
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, ','))
        if (!tok.empty())
            out.push_back(std::stod(tok));
    FSN_CHECK_CONFIG(!out.empty(), "expected a comma-separated list, got '", s, "'");
    return out;
}

std::vector<std::string> parse_string_list(const std::string& s)
{
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, ','))
        if (!tok.empty())
            out.push_back(tok);
    FSN_CHECK_CONFIG(!out.empty(), "expected a comma-separated list, got '", s, "'");
    return out;
}

SceneSpec parse_scene(const std::string& pattern, const std::string& motion,
                      const std::string& dims, std::uint64_t seed)
{
    SceneSpec spec;
    spec.pattern = pattern;
    spec.seed = seed;
    parse_dims(dims, spec.width, spec.height, spec.frames);

    if (motion == "static") {
        spec.motion = "static";
    } else if (motion.rfind("translate:", 0) == 0) {
        spec.motion = "translate";
        const std::vector<double> v = parse_double_list(motion.substr(10));
        FSN_CHECK_CONFIG(v.size() == 2, "--motion translate needs vx,vy");
        spec.vx = v[0];
        spec.vy = v[1];
    } else if (motion.rfind("rotate:", 0) == 0) {
        spec.motion = "rotate";
        spec.rot_deg = std::stod(motion.substr(7));
    } else {
        fail<ConfigError>("--motion must be static, translate:vx,vy or rotate:deg, got '",
                          motion, "'");
    }
    return spec;
}

int run_cli(int argc, char** argv)
{
    CLI::App app{"flowsiren: fit sinusoidal coordinate networks to videos with "
                 "optical-flow-constrained derivatives and interpolate frames"};
    app.require_subcommand(1);

    // --- synth ------------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    std::string sy_pattern = "sinusoid", sy_motion = "static", sy_dims = "48x48x16";
    std::string sy_out = "dataset";
    std::uint64_t sy_seed = 0;
    synth->add_option("--pattern", sy_pattern, "sinusoid | blobs | checker");
    synth->add_option("--motion", sy_motion, "static | translate:vx,vy | rotate:deg");
    synth->add_option("--dims", sy_dims, "WxHxT");
    synth->add_option("--seed", sy_seed, "pattern seed");
    synth->add_option("--out", sy_out, "output directory")->required();

    // --- flow -------------------------------------------------------------
    auto* flow = app.add_subcommand("flow", "estimate or import optical flow");
    std::string fl_frames, fl_out, fl_method = "hs", fl_from;
    double fl_alpha = 0.04;
    int fl_iters = 400, fl_split = 2;
    flow->add_option("--frames", fl_frames, "frame directory")->required();
    flow->add_option("--out", fl_out, "output directory")->required();
    flow->add_option("--method", fl_method, "hs (Horn-Schunck) | copy");
    flow->add_option("--from", fl_from, ".flo directory for --method copy");
    flow->add_option("--alpha", fl_alpha, "Horn-Schunck smoothness weight");
    flow->add_option("--iterations", fl_iters, "Horn-Schunck iterations");
    flow->add_option("--split-k", fl_split, "observed-frame spacing");

    // --- fit ----------------------------------------------------------------
    auto* fit_cmd = app.add_subcommand("fit", "fit a model to a dataset");
    std::string ft_config, ft_preset, ft_data, ft_out, ft_flow_source, ft_flow_dir,
        ft_precision;
    double ft_lambda = -1, ft_omega = -1, ft_max_lr = -1, ft_hs_alpha = -1;
    int ft_width = -1, ft_depth = -1, ft_epochs = -1, ft_batch = -1, ft_split = -1,
        ft_stride = -1, ft_hs_iters = -1, ft_eval_cadence = -1;
    std::int64_t ft_seed = -1;
    bool ft_resume = false;
    fit_cmd->add_option("--config", ft_config, "experiment config JSON");
    fit_cmd->add_option("--preset", ft_preset,
                        "paper-default | paper-final | desk-small");
    fit_cmd->add_option("--data", ft_data, "frame directory");
    fit_cmd->add_option("--out", ft_out, "output directory");
    fit_cmd->add_option("--lambda", ft_lambda, "loss balance in [0, 1]");
    fit_cmd->add_option("--omega", ft_omega, "sine frequency factor");
    fit_cmd->add_option("--width", ft_width, "hidden width");
    fit_cmd->add_option("--depth", ft_depth, "layer count incl. output");
    fit_cmd->add_option("--epochs", ft_epochs, "training epochs");
    fit_cmd->add_option("--batch-size", ft_batch, "samples per step");
    fit_cmd->add_option("--max-lr", ft_max_lr, "cosine schedule peak");
    fit_cmd->add_option("--seed", ft_seed, "training seed");
    fit_cmd->add_option("--split-k", ft_split, "observed-frame spacing");
    fit_cmd->add_option("--flow-source", ft_flow_source,
                        "auto | files | synth | horn-schunck");
    fit_cmd->add_option("--flow-dir", ft_flow_dir, ".flo directory");
    fit_cmd->add_option("--flow-stride", ft_stride, "source steps per flow file");
    fit_cmd->add_option("--hs-alpha", ft_hs_alpha, "Horn-Schunck smoothness");
    fit_cmd->add_option("--hs-iterations", ft_hs_iters, "Horn-Schunck iterations");
    fit_cmd->add_option("--eval-cadence", ft_eval_cadence, "PSNR eval every N epochs");
    fit_cmd->add_option("--precision", ft_precision, "f64 | f32");
    fit_cmd->add_flag("--resume", ft_resume, "resume from the output checkpoint");

    // --- interpolate --------------------------------------------------------
    auto* interp = app.add_subcommand("interpolate", "render continuous time indices");
    std::string ip_checkpoint, ip_times, ip_dims, ip_out = "interpolated";
    interp->add_option("--checkpoint", ip_checkpoint, "model checkpoint")->required();
    interp->add_option("--times", ip_times, "comma-separated source-frame times")
        ->required();
    interp->add_option("--dims", ip_dims, "WxHxT of the fitted video")->required();
    interp->add_option("--out", ip_out, "output directory");

    // --- eval ---------------------------------------------------------------
    auto* eval_cmd = app.add_subcommand("eval", "compare rendered frames to truth");
    std::string ev_rendered, ev_truth, ev_csv = "metrics.csv";
    int ev_split = 2;
    eval_cmd->add_option("--rendered", ev_rendered, "rendered frame dir")->required();
    eval_cmd->add_option("--truth", ev_truth, "ground-truth frame dir")->required();
    eval_cmd->add_option("--split-k", ev_split, "observed-frame spacing");
    eval_cmd->add_option("--out", ev_csv, "metrics CSV path");

    // --- sweep ----------------------------------------------------------------
    auto* sweep = app.add_subcommand("sweep", "run an ablation axis");
    std::string sw_axis, sw_grid, sw_config, sw_preset, sw_data, sw_out = "sweep_out";
    sweep->add_option("--axis", sw_axis, "lambda | omega | width | width-depth | of-onoff")
        ->required();
    sweep->add_option("--grid", sw_grid, "comma-separated grid values")->required();
    sweep->add_option("--config", sw_config, "base experiment config JSON");
    sweep->add_option("--preset", sw_preset, "base preset");
    sweep->add_option("--data", sw_data, "frame directory");
    sweep->add_option("--out", sw_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e); // prints help, exits 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (synth->parsed()) {
        run_synth(parse_scene(sy_pattern, sy_motion, sy_dims, sy_seed), sy_out);
        std::cout << "wrote dataset to " << sy_out << "\n";
        return 0;
    }

    if (flow->parsed()) {
        VideoTensor video = load_frames(fl_frames);
        split_observed(video, fl_split);
        fs::create_directories(fl_out);
        write_resolved_args(fl_out, {{"command", "flow"},
                                     {"frames", fl_frames},
                                     {"method", fl_method},
                                     {"from", fl_from},
                                     {"alpha", fl_alpha},
                                     {"iterations", fl_iters},
                                     {"split_k", fl_split}});
        char num[16];
        if (fl_method == "hs") {
            FlowConfig cfg;
            cfg.hs_alpha = fl_alpha;
            cfg.hs_iterations = fl_iters;
            // Estimated between observed pairs, emitted as px per source
            // step so downstream consumers can use stride 1.
            const std::vector<int> observed = video.observed_indices();
            std::vector<Eigen::MatrixXd> luma;
            for (int idx : observed)
                luma.push_back(luma601(video.frame(idx)));
            for (std::size_t i = 0; i < observed.size(); ++i) {
                PixelFlow pf;
                int gap;
                if (i + 1 < observed.size()) {
                    gap = observed[i + 1] - observed[i];
                    pf = horn_schunck(luma[i], luma[i + 1], fl_alpha, fl_iters);
                } else {
                    gap = observed[i] - observed[i - 1];
                    pf = horn_schunck(luma[i], luma[i - 1], fl_alpha, fl_iters);
                    for (auto& v : pf.uv)
                        v = -v;
                }
                for (auto& v : pf.uv)
                    v /= gap;
                std::snprintf(num, sizeof(num), "%04d", observed[i]);
                write_flo(pf, (fs::path(fl_out) / (std::string("flow_") + num + ".flo"))
                                  .string());
            }
            std::cout << "wrote " << observed.size() << " flow grids to " << fl_out
                      << "\n";
        } else if (fl_method == "copy") {
            FSN_CHECK_CONFIG(!fl_from.empty(), "--method copy needs --from DIR");
            int count = 0;
            for (const auto& entry : fs::directory_iterator(fl_from)) {
                if (entry.path().extension() != ".flo")
                    continue;
                const PixelFlow pf = read_flo(entry.path().string()); // validates
                write_flo(pf, (fs::path(fl_out) / entry.path().filename()).string());
                ++count;
            }
            FSN_CHECK_IO(count > 0, "no .flo files in ", fl_from);
            std::cout << "copied " << count << " validated flow grids to " << fl_out
                      << "\n";
        } else {
            fail<ConfigError>("--method must be hs or copy, got '", fl_method, "'");
        }
        return 0;
    }

    const auto assemble_config = [&](const std::string& preset,
                                     const std::string& config_path) {
        ExperimentConfig cfg = preset.empty() ? ExperimentConfig{} : preset_config(preset);
        if (!config_path.empty()) {
            std::ifstream is(config_path);
            FSN_CHECK_IO(is.good(), "cannot open config file: ", config_path);
            const std::string text((std::istreambuf_iterator<char>(is)),
                                   std::istreambuf_iterator<char>());
            apply_config_json(cfg, text, config_path);
        }
        return cfg;
    };

    if (fit_cmd->parsed()) {
        ExperimentConfig cfg = assemble_config(ft_preset, ft_config);
        if (!ft_data.empty())
            cfg.data.frames_dir = ft_data;
        if (!ft_out.empty())
            cfg.output.dir = ft_out;
        if (ft_lambda >= 0)
            cfg.train.lambda = ft_lambda;
        if (ft_omega > 0)
            cfg.model.omega = ft_omega;
        if (ft_width > 0)
            cfg.model.width = ft_width;
        if (ft_depth > 0)
            cfg.model.depth = ft_depth;
        if (ft_epochs > 0)
            cfg.train.epochs = ft_epochs;
        if (ft_batch > 0)
            cfg.train.batch_size = ft_batch;
        if (ft_max_lr > 0)
            cfg.train.max_lr = ft_max_lr;
        if (ft_seed >= 0)
            cfg.train.seed = static_cast<std::uint64_t>(ft_seed);
        if (ft_split > 0)
            cfg.data.split_k = ft_split;
        if (!ft_flow_source.empty())
            cfg.flow.source = ft_flow_source;
        if (!ft_flow_dir.empty())
            cfg.flow.dir = ft_flow_dir;
        if (ft_stride > 0)
            cfg.flow.stride = ft_stride;
        if (ft_hs_alpha > 0)
            cfg.flow.hs_alpha = ft_hs_alpha;
        if (ft_hs_iters > 0)
            cfg.flow.hs_iterations = ft_hs_iters;
        if (ft_eval_cadence >= 0)
            cfg.eval.cadence_epochs = ft_eval_cadence;
        if (!ft_precision.empty()) {
            FSN_CHECK_CONFIG(ft_precision == "f64" || ft_precision == "f32",
                             "--precision must be f64 or f32");
            cfg.train.precision = ft_precision == "f32" ? TrainConfig::Precision::kF32
                                                        : TrainConfig::Precision::kF64;
        }

        const FitArtifacts art = run_fit(cfg, ft_resume);
        const EpochLog& last = art.result.log.back();
        std::cout << "finished " << art.result.log.size() << " epochs; final total loss "
                  << last.total;
        if (last.observed_psnr)
            std::cout << ", observed PSNR " << *last.observed_psnr << " dB";
        if (last.interp_psnr)
            std::cout << ", interpolated PSNR " << *last.interp_psnr << " dB";
        std::cout << "\ncheckpoint: " << art.checkpoint_path << "\n";
        return 0;
    }

    if (interp->parsed()) {
        int w = 0, h = 0, t = 0;
        parse_dims(ip_dims, w, h, t);
        write_resolved_args(ip_out, {{"command", "interpolate"},
                                     {"checkpoint", ip_checkpoint},
                                     {"times", ip_times},
                                     {"dims", ip_dims}});
        const auto paths =
            run_interpolate(ip_checkpoint, parse_double_list(ip_times), w, h, t, ip_out);
        std::cout << "wrote " << paths.size() << " frames to " << ip_out << "\n";
        return 0;
    }

    if (eval_cmd->parsed()) {
        run_eval(ev_rendered, ev_truth, ev_split, ev_csv);
        write_resolved_args(fs::path(ev_csv).parent_path().string().empty()
                                ? "."
                                : fs::path(ev_csv).parent_path().string(),
                            {{"command", "eval"},
                             {"rendered", ev_rendered},
                             {"truth", ev_truth},
                             {"split_k", ev_split},
                             {"out", ev_csv}});
        std::cout << "metrics: " << ev_csv << "\n";
        return 0;
    }

    if (sweep->parsed()) {
        ExperimentConfig base = assemble_config(sw_preset, sw_config);
        if (!sw_data.empty())
            base.data.frames_dir = sw_data;
        write_resolved_args(sw_out, {{"command", "sweep"},
                                     {"axis", sw_axis},
                                     {"grid", sw_grid},
                                     {"base_config", config_to_json(base, "")}});
        const auto rows = run_sweep(sw_axis, parse_string_list(sw_grid), base, sw_out);
        std::cout << "sweep finished: " << rows.size() << " rows in " << sw_out
                  << "/sweep.csv\n";
        return 0;
    }

    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    try {
        return run_cli(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numerical abort: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
