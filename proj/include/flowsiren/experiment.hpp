// Copyright (c) 2026 flowsiren contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "flowsiren/metrics.hpp"
#include "flowsiren/optim.hpp"
#include "flowsiren/video.hpp"

namespace fsiren {

struct DataConfig {
    std::string frames_dir;
    int split_k = 2;
};

struct FlowConfig {
    // "auto" resolves by precedence: .flo files, then a scene_spec.json
    // (exact synthetic flow), then Horn-Schunck estimation.
    std::string source = "auto"; // auto | files | synth | horn-schunck
    std::string dir;             // .flo directory for "files" (default: frames_dir)
    int stride = 1;              // source-frame steps spanned by file-based flow
    double hs_alpha = 0.04;
    int hs_iterations = 400;
};

struct OutputConfig {
    std::string dir = "out";
    int checkpoint_cadence = 200;
};

struct ExperimentConfig {
    SirenConfig model;
    TrainConfig train;
    DataConfig data;
    FlowConfig flow;
    EvalOptions eval;
    OutputConfig output;

    void validate() const;
};

/// Presets: "paper-default" and "paper-final" carry the full-scale protocol
/// settings; "desk-small" is the minutes-scale preset the test suites use.
ExperimentConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

/// Strict JSON round-trip: unknown keys anywhere are rejected.
ExperimentConfig load_config(const std::string& path);
void apply_config_json(ExperimentConfig& cfg, const std::string& json_text,
                       const std::string& origin);
std::string config_to_json(const ExperimentConfig& cfg,
                           const std::string& flow_source_note = "");
void write_resolved_config(const ExperimentConfig& cfg, const std::string& dir,
                           const std::string& flow_source_note);

// ---------------------------------------------------------------------------
// Scene spec sidecar.

void write_scene_spec(const SceneSpec& spec, const std::string& path);
SceneSpec read_scene_spec(const std::string& path);

// ---------------------------------------------------------------------------
// Pipeline entry points shared by the CLI and the test suites.

struct PreparedFlows {
    std::vector<NormalizedFlowGrid> grids; // one per observed frame
    std::string source_note;               // resolved source, for the config record
};

PreparedFlows prepare_flows(const VideoTensor& video, const FlowConfig& cfg,
                            const std::string& frames_dir);

struct FitArtifacts {
    FitResult result;
    std::string checkpoint_path;
    std::string state_path;
    std::string training_csv_path;
};

/// Loads data, prepares flow, trains, and writes checkpoint + training CSV +
/// resolved config under cfg.output.dir.
FitArtifacts run_fit(const ExperimentConfig& cfg, bool resume = false);

/// Renders the dataset dir for a synthetic scene: numbered PNG frames,
/// exact per-frame .flo ground truth and scene_spec.json.
void run_synth(const SceneSpec& spec, const std::string& out_dir);

struct EvalSummary {
    VideoMetrics metrics;
    std::string csv_path;
};

/// Frame-directory comparison: per-frame CSV plus observed / interpolated
/// summary rows. Frame counts must match.
EvalSummary run_eval(const std::string& rendered_dir, const std::string& truth_dir,
                     int split_k, const std::string& csv_path);

/// Renders arbitrary continuous time indices (source-frame units) from a
/// checkpoint. Times outside [0, frames-1] are rendered with a warning.
std::vector<std::string> run_interpolate(const std::string& checkpoint_path,
                                         const std::vector<double>& times, int width,
                                         int height, int frames,
                                         const std::string& out_dir);

struct SweepRow {
    std::string axis;
    std::string value;
    std::string role; // "observed" | "interpolated"
    double psnr = 0.0;
    double ssim = 0.0;
    bool failed = false;
};

/// Sequential ablation harness over one axis; member runs reuse the base
/// config and seed. A failing member marks its rows failed and the sweep
/// continues. Rows are built by the same render-save-eval path as cmd_eval.
std::vector<SweepRow> run_sweep(const std::string& axis,
                                const std::vector<std::string>& grid,
                                const ExperimentConfig& base,
                                const std::string& out_dir);

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);

} // namespace fsiren
