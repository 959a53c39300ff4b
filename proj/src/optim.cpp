// Copyright (c) 2026 flowsiren contributors
// SPDX-License-Identifier: Apache-2.0

#include "flowsiren/optim.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "flowsiren/loss_eval.hpp"
#include "flowsiren/metrics.hpp"

namespace fsiren {

void TrainConfig::validate() const
{
    FSN_CHECK_CONFIG(max_lr > 0.0 && std::isfinite(max_lr),
                     "TrainConfig: max_lr must be positive, got ", max_lr);
    FSN_CHECK_CONFIG(epochs >= 1, "TrainConfig: epochs must be >= 1, got ", epochs);
    FSN_CHECK_CONFIG(batch_size >= 1, "TrainConfig: batch_size must be >= 1, got ",
                     batch_size);
    FSN_CHECK_CONFIG(lambda >= 0.0 && lambda <= 1.0, "TrainConfig: lambda must lie in [0, 1], got ",
                     lambda);
    FSN_CHECK_CONFIG(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0,
                     "TrainConfig: betas must lie in [0, 1)");
    FSN_CHECK_CONFIG(epsilon > 0.0, "TrainConfig: epsilon must be positive");
}

double cosine_lr(long step, long total_steps, double max_lr)
{
    FSN_CHECK(total_steps >= 1, "cosine_lr: total_steps must be >= 1, got ", total_steps);
    FSN_CHECK(step >= 0 && step <= total_steps, "cosine_lr: step ", step,
              " outside [0, ", total_steps, "]");
    const double phase = std::numbers::pi * static_cast<double>(step) /
                         static_cast<double>(total_steps);
    return max_lr * 0.5 * (1.0 + std::cos(phase));
}

namespace {

template <class S>
struct AdamStateT {
    std::vector<LayerT<S>> m;
    std::vector<LayerT<S>> v;
    long step = 0;
};

template <class S>
AdamStateT<S> zero_adam_state(const std::vector<LayerT<S>>& params)
{
    AdamStateT<S> st;
    st.m = detail::zero_like(params);
    st.v = detail::zero_like(params);
    return st;
}

template <class S>
void adam_step_impl(std::vector<LayerT<S>>& params, const std::vector<LayerT<S>>& grads,
                    AdamStateT<S>& state, S lr, S beta1, S beta2, S epsilon)
{
    FSN_CHECK(grads.size() == params.size(), "adam_step: expected ", params.size(),
              " gradient layers, got ", grads.size());
    for (std::size_t l = 0; l < params.size(); ++l) {
        FSN_CHECK(grads[l].weight.rows() == params[l].weight.rows() &&
                      grads[l].weight.cols() == params[l].weight.cols() &&
                      grads[l].bias.size() == params[l].bias.size(),
                  "adam_step: gradient shape mismatch in layer ", l);
        FSN_CHECK_NUMERIC(grads[l].weight.allFinite() && grads[l].bias.allFinite(),
                          "non-finite gradient in layer ", l);
    }

    const long t = state.step + 1;
    const S bc1 = S(1) - static_cast<S>(std::pow(static_cast<double>(beta1), t));
    const S bc2 = S(1) - static_cast<S>(std::pow(static_cast<double>(beta2), t));

    // Stage every update, validate, then commit, so a failed step leaves the
    // parameters and moments untouched.
    std::vector<LayerT<S>> new_params(params.size());
    std::vector<LayerT<S>> new_m(params.size());
    std::vector<LayerT<S>> new_v(params.size());
    for (std::size_t l = 0; l < params.size(); ++l) {
        const auto update = [&](const auto& p, const auto& g, const auto& m,
                                const auto& v, auto& p_out, auto& m_out, auto& v_out) {
            m_out = beta1 * m + (S(1) - beta1) * g;
            v_out = (beta2 * v.array() + (S(1) - beta2) * g.array().square()).matrix();
            p_out = p - (lr * (m_out / bc1).array() /
                         ((v_out / bc2).array().sqrt() + epsilon))
                            .matrix();
        };
        update(params[l].weight, grads[l].weight, state.m[l].weight, state.v[l].weight,
               new_params[l].weight, new_m[l].weight, new_v[l].weight);
        update(params[l].bias, grads[l].bias, state.m[l].bias, state.v[l].bias,
               new_params[l].bias, new_m[l].bias, new_v[l].bias);
        FSN_CHECK_NUMERIC(new_params[l].weight.allFinite() && new_params[l].bias.allFinite(),
                          "non-finite parameter after update in layer ", l);
    }
    params = std::move(new_params);
    state.m = std::move(new_m);
    state.v = std::move(new_v);
    state.step = t;
}

} // namespace

AdamState make_adam_state(const SirenModel& model)
{
    AdamState st;
    st.m = detail::zero_like(model.layers);
    st.v = detail::zero_like(model.layers);
    return st;
}

void adam_step(SirenModel& model, const ModelGrad& grads, AdamState& state, double lr,
               double beta1, double beta2, double epsilon)
{
    AdamStateT<double> st;
    st.m = std::move(state.m);
    st.v = std::move(state.v);
    st.step = state.step;
    try {
        adam_step_impl<double>(model.layers, grads, st, lr, beta1, beta2, epsilon);
    } catch (...) {
        state.m = std::move(st.m);
        state.v = std::move(st.v);
        throw;
    }
    state.m = std::move(st.m);
    state.v = std::move(st.v);
    state.step = st.step;
}

// ---------------------------------------------------------------------------
// Train-state sidecar I/O.

namespace {

constexpr char kStateMagic[4] = {'F', 'S', 'S', 'T'};
constexpr std::uint32_t kStateVersion = 1;

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
                 "truncated train-state file while reading ", what);
    return v;
}

void write_layer_block(std::ostream& os, const std::vector<Layer>& layers)
{
    for (const auto& layer : layers) {
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
                write_raw(os, layer.weight(r, c));
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r)
            write_raw(os, layer.bias(r));
    }
}

void read_layer_block(std::istream& is, std::vector<Layer>& layers)
{
    for (auto& layer : layers) {
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
                layer.weight(r, c) = read_raw<double>(is, "moments");
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r)
            layer.bias(r) = read_raw<double>(is, "moments");
    }
}

} // namespace

void save_train_state(const TrainState& state, const std::string& path)
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    FSN_CHECK_IO(os.good(), "cannot open train-state file for writing: ", path);
    os.write(kStateMagic, sizeof(kStateMagic));
    write_raw(os, kStateVersion);
    write_raw(os, static_cast<std::int64_t>(state.step));
    write_raw(os, static_cast<std::int32_t>(state.next_epoch));
    write_raw(os, static_cast<std::uint32_t>(state.m.size()));
    write_layer_block(os, state.m);
    write_layer_block(os, state.v);
    os.flush();
    FSN_CHECK_IO(os.good(), "failed writing train-state file: ", path);
}

TrainState load_train_state(const std::string& path, const SirenModel& shape)
{
    std::ifstream is(path, std::ios::binary);
    FSN_CHECK_IO(is.good(), "cannot open train-state file: ", path);
    char magic[4] = {};
    is.read(magic, 4);
    FSN_CHECK_IO(is.gcount() == 4 && std::memcmp(magic, kStateMagic, 4) == 0,
                 "not a train-state file (bad magic): ", path);
    const auto version = read_raw<std::uint32_t>(is, "version");
    FSN_CHECK_IO(version == kStateVersion, "unsupported train-state version ", version,
                 ": ", path);

    TrainState state;
    state.step = static_cast<long>(read_raw<std::int64_t>(is, "step"));
    state.next_epoch = static_cast<int>(read_raw<std::int32_t>(is, "epoch"));
    const auto layers = read_raw<std::uint32_t>(is, "layer count");
    FSN_CHECK_IO(layers == shape.layers.size(), "train-state layer count ", layers,
                 " does not match model depth ", shape.layers.size(), ": ", path);
    state.m = detail::zero_like(shape.layers);
    state.v = detail::zero_like(shape.layers);
    read_layer_block(is, state.m);
    read_layer_block(is, state.v);
    return state;
}

// ---------------------------------------------------------------------------
// Training loop.

namespace {

template <class S>
FitResult fit_impl(const SirenModel& init_model, const VideoTensor& video,
                   const std::vector<NormalizedFlowGrid>& flows, const TrainConfig& cfg,
                   const EvalOptions& eval, const CheckpointOptions* checkpoint,
                   const std::function<void(const EpochLog&)>& on_epoch,
                   const TrainState* resume)
{
    const double omega = init_model.config.omega;
    BatchSampler sampler(video, &flows, cfg.batch_size, cfg.seed);
    const int steps_per_epoch = sampler.batches_per_epoch();
    const long total_steps = static_cast<long>(cfg.epochs) * steps_per_epoch;

    std::vector<LayerT<S>> params = detail::cast_layers<S>(init_model.layers);
    AdamStateT<S> adam = zero_adam_state(params);
    int start_epoch = 0;
    if (resume) {
        FSN_CHECK_CONFIG(resume->next_epoch <= cfg.epochs, "resume epoch ",
                         resume->next_epoch, " beyond configured epochs ", cfg.epochs);
        adam.m = detail::cast_layers<S>(resume->m);
        adam.v = detail::cast_layers<S>(resume->v);
        adam.step = resume->step;
        start_epoch = resume->next_epoch;
    }

    const auto current_model = [&]() {
        SirenModel m;
        m.config = init_model.config;
        m.seed = init_model.seed;
        m.layers = detail::cast_layers<double>(params);
        return m;
    };

    const auto save_checkpoint = [&](int next_epoch) {
        if (!checkpoint)
            return;
        save_model(current_model(), checkpoint->model_path);
        TrainState st;
        st.step = adam.step;
        st.next_epoch = next_epoch;
        st.m = detail::cast_layers<double>(adam.m);
        st.v = detail::cast_layers<double>(adam.v);
        save_train_state(st, checkpoint->state_path);
    };

    std::vector<double> all_times(static_cast<std::size_t>(video.frames));
    for (int t = 0; t < video.frames; ++t)
        all_times[static_cast<std::size_t>(t)] = t;
    const bool has_held_out = !video.held_out_indices().empty();

    FitResult result;
    long step = resume ? resume->step : 0;

    for (int epoch = start_epoch; epoch < cfg.epochs; ++epoch) {
        double sum_obs = 0.0, sum_of = 0.0, sum_total = 0.0;
        Eigen::Index samples = 0;
        double first_lr = 0.0;

        for (int b = 0; b < steps_per_epoch; ++b) {
            const SampleBatch batch = sampler.batch(epoch, b);
            const double lr = cosine_lr(step, total_steps, cfg.max_lr);
            if (b == 0)
                first_lr = lr;

            detail::LossEval<S> ev;
            try {
                ev = detail::total_loss_gradients<S>(
                    params, static_cast<S>(omega),
                    batch.coords.template cast<S>(), batch.targets->template cast<S>(),
                    batch.flows->template cast<S>(), static_cast<S>(cfg.lambda));
                FSN_CHECK_NUMERIC(std::isfinite(static_cast<double>(ev.obs)) &&
                                      std::isfinite(static_cast<double>(ev.of)),
                                  "non-finite loss at epoch ", epoch, " step ", step);
                adam_step_impl<S>(params, ev.grads, adam, static_cast<S>(lr),
                                  static_cast<S>(cfg.beta1), static_cast<S>(cfg.beta2),
                                  static_cast<S>(cfg.epsilon));
            } catch (const NumericError& e) {
                // Parameters are still the last good ones: the update commits
                // only after validation.
                save_checkpoint(epoch);
                if (checkpoint)
                    fail<NumericError>(e.what(), "; last-good checkpoint saved to ",
                                       checkpoint->model_path);
                throw;
            }
            step += 1;

            const auto n = batch.size();
            sum_obs += static_cast<double>(ev.obs) * static_cast<double>(n);
            sum_of += static_cast<double>(ev.of) * static_cast<double>(n);
            sum_total += combine_losses(static_cast<double>(ev.obs),
                                        static_cast<double>(ev.of), cfg.lambda) *
                         static_cast<double>(n);
            samples += n;
        }

        EpochLog log;
        log.epoch = epoch;
        log.lr = first_lr;
        log.obs_loss = sum_obs / static_cast<double>(samples);
        log.of_loss = sum_of / static_cast<double>(samples);
        log.total = sum_total / static_cast<double>(samples);

        const bool last_epoch = epoch == cfg.epochs - 1;
        if (eval.cadence_epochs > 0 &&
            (epoch % eval.cadence_epochs == eval.cadence_epochs - 1 || last_epoch)) {
            const SirenModel snapshot = current_model();
            const VideoTensor rendered = render_frames(snapshot, all_times, video.height,
                                                       video.width, video.frames);
            const VideoMetrics metrics = video_metrics(rendered, video);
            log.observed_psnr = metrics.observed.mean_psnr;
            if (has_held_out)
                log.interp_psnr = metrics.held_out.mean_psnr;
        }

        result.log.push_back(log);
        if (on_epoch)
            on_epoch(log);

        if (checkpoint && checkpoint->cadence_epochs > 0 &&
            (epoch % checkpoint->cadence_epochs == checkpoint->cadence_epochs - 1 ||
             last_epoch))
            save_checkpoint(epoch + 1);
    }

    save_checkpoint(cfg.epochs);
    result.model = current_model();
    result.steps = step;
    return result;
}

} // namespace

FitResult fit(const SirenModel& init_model, const VideoTensor& video,
              const std::vector<NormalizedFlowGrid>& flows, const TrainConfig& cfg,
              const EvalOptions& eval, const CheckpointOptions* checkpoint,
              const std::function<void(const EpochLog&)>& on_epoch,
              const TrainState* resume)
{
    cfg.validate();
    init_model.config.validate();
    if (cfg.precision == TrainConfig::Precision::kF32)
        return fit_impl<float>(init_model, video, flows, cfg, eval, checkpoint, on_epoch,
                               resume);
    return fit_impl<double>(init_model, video, flows, cfg, eval, checkpoint, on_epoch,
                            resume);
}

} // namespace fsiren
