#pragma once

// Online semi-gradient TD training loops. Linear learners use TD(lambda) over a
// fixed representation; recurrent learners use TD(0) with T-BPTT or RTRL.
// All parameter updates go through ADAM applied to the TD pseudo-gradient.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "ccbench/envs.hpp"
#include "ccbench/repr.hpp"
#include "ccbench/rnn.hpp"

namespace ccbench {

inline double td_error(double us_next, double v_next, double v_cur, double gamma)
{
    return us_next + gamma * v_next - v_cur;
}

struct adam_state {
    std::vector<double> m;
    std::vector<double> v;
    std::int64_t step = 0;
    double alpha = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    // running beta^t products
    double beta1_pow = 1.0;
    double beta2_pow = 1.0;

    adam_state() = default;
    adam_state(std::size_t n, double step_size) : m(n, 0.0), v(n, 0.0), alpha(step_size) {}
};

/// params -= alpha * m_hat / (sqrt(v_hat) + eps), with bias-corrected moments.
inline void adam_apply(adam_state& s, std::span<double> params, std::span<const double> g)
{
    if (params.size() != g.size() || s.m.size() != g.size())
        throw std::invalid_argument("adam_apply: size mismatch");
    ++s.step;
    s.beta1_pow *= s.beta1;
    s.beta2_pow *= s.beta2;
    const double c1 = 1.0 / (1.0 - s.beta1_pow);
    const double c2 = 1.0 / (1.0 - s.beta2_pow);
    const double b1 = s.beta1, b2 = s.beta2;
    for (std::size_t i = 0; i < g.size(); ++i) {
        s.m[i] = b1 * s.m[i] + (1.0 - b1) * g[i];
        s.v[i] = b2 * s.v[i] + (1.0 - b2) * g[i] * g[i];
        params[i] -= s.alpha * (s.m[i] * c1) / (std::sqrt(s.v[i] * c2) + s.eps);
    }
}

inline void adam_apply(adam_state& s, Eigen::VectorXd& params, const Eigen::VectorXd& g)
{
    adam_apply(s, std::span<double>(params.data(), static_cast<std::size_t>(params.size())),
               std::span<const double>(g.data(), static_cast<std::size_t>(g.size())));
}

struct td_lambda_state {
    std::vector<double> w;
    std::vector<double> z;
    std::vector<double> g; // scratch
    double lambda = 0.9;
    double gamma = 0.9;

    td_lambda_state() = default;
    td_lambda_state(std::size_t dim, double lambda_, double gamma_)
        : w(dim, 0.0), z(dim, 0.0), g(dim, 0.0), lambda(lambda_), gamma(gamma_)
    {
    }
};

/// z := gamma*lambda*z + x;  ADAM step on g = -delta * z.
inline void linear_td_lambda_step(td_lambda_state& s, adam_state& adam, const feature_vector& x,
                                  double delta)
{
    const double decay = s.gamma * s.lambda;
    for (double& zi : s.z) zi *= decay;
    x.add_to(s.z);
    for (std::size_t i = 0; i < s.z.size(); ++i) s.g[i] = -delta * s.z[i];
    adam_apply(adam, s.w, s.g);
}

// ---------------------------------------------------------------------------
// Prediction log

struct prediction_log {
    double gamma = 0.0;
    std::vector<double> predictions;
    std::vector<std::uint8_t> us;
    std::vector<trial_record> trials;
    /// Per-step channel values, row-major; filled only when requested.
    std::size_t n_channels = 0;
    std::size_t n_cs = 0;
    std::size_t n_distractors = 0;
    std::vector<std::uint8_t> channels;

    std::size_t size() const noexcept { return predictions.size(); }
};

namespace detail {

inline void begin_log(prediction_log& log, const environment& env, std::int64_t steps,
                      bool record_channels)
{
    log.gamma = env.discount();
    log.n_channels = env.n_channels();
    log.n_cs = env.n_cs();
    log.n_distractors = env.n_distractors();
    log.predictions.reserve(static_cast<std::size_t>(steps));
    log.us.reserve(static_cast<std::size_t>(steps));
    if (record_channels) log.channels.reserve(static_cast<std::size_t>(steps) * log.n_channels);
}

inline void record(prediction_log& log, const observation& o, double v, bool record_channels)
{
    log.predictions.push_back(v);
    log.us.push_back(o.us());
    if (record_channels) log.channels.insert(log.channels.end(), o.channels.begin(), o.channels.end());
}

} // namespace detail

// ---------------------------------------------------------------------------
// Linear learner

struct linear_learner_config {
    double lambda = 0.9;
    double step_size = 1e-3;
    /// Defaults to the environment's discount when negative.
    double gamma = -1.0;
};

/// Runs semi-gradient TD(lambda) with ADAM over `repr` for `steps` steps.
/// At step t the learner observes o_t, builds x_t, emits V_t = w.x_t, then uses
/// delta_{t-1} = US_t + gamma V_t - V_{t-1} to update with the trace of x_{t-1}.
template <class Representation>
prediction_log run_linear_learner(environment& env, Representation& repr,
                                  const linear_learner_config& cfg, std::int64_t steps,
                                  bool record_channels = false)
{
    const double gamma = cfg.gamma >= 0.0 ? cfg.gamma : env.discount();
    td_lambda_state td(repr.dim(), cfg.lambda, gamma);
    adam_state adam(repr.dim(), cfg.step_size);

    prediction_log log;
    detail::begin_log(log, env, steps, record_channels);
    log.gamma = gamma;

    observation o(env.n_cs(), env.n_distractors());
    feature_vector x_prev, x_cur;
    double v_prev = 0.0;
    bool has_prev = false;
    for (std::int64_t t = 0; t < steps; ++t) {
        env.step(o);
        repr.encode(o, v_prev, x_cur);
        const double v = x_cur.dot(td.w);
        if (has_prev) linear_td_lambda_step(td, adam, x_prev, td_error(o.us(), v, v_prev, gamma));
        detail::record(log, o, v, record_channels);
        std::swap(x_prev, x_cur);
        v_prev = v;
        has_prev = true;
    }
    log.trials = env.trials();
    return log;
}

// ---------------------------------------------------------------------------
// Recurrent learner

enum class gradient_engine { tbptt, rtrl };

struct rnn_learner_config {
    cell_kind kind = cell_kind::lstm;
    int hidden_size = 10;
    gradient_engine engine = gradient_engine::tbptt;
    int truncation = 10;
    double step_size = 1e-3;
    /// Defaults to the environment's discount when negative.
    double gamma = -1.0;
    /// Append stimulating traces of the observation to the cell input.
    bool augment = false;
    /// Trace decay for augmentation; defaults to 1 - 1/E[ISI] when non-positive.
    double trace_decay = 0.0;
    std::uint64_t seed = 0;
};

inline int rnn_input_size(std::size_t channels, bool augment)
{
    return static_cast<int>(augment ? 2 * channels : channels);
}

/// Runs an RNN value learner online. Every step: build the input from o_t
/// (plus traces when augmenting), advance the cell, emit V_t, then apply one
/// ADAM update from the T-BPTT window or the retained RTRL gradient.
inline prediction_log run_rnn_learner(environment& env, const rnn_learner_config& cfg,
                                      std::int64_t steps, bool record_channels = false,
                                      cell_params* final_params = nullptr)
{
    const double gamma = cfg.gamma >= 0.0 ? cfg.gamma : env.discount();
    const std::size_t channels = env.n_channels();
    const int input_size = rnn_input_size(channels, cfg.augment);
    const double tau = cfg.trace_decay > 0.0 ? cfg.trace_decay : env.discount();

    cell_params params = init_params(cfg.kind, input_size, cfg.hidden_size, cfg.seed);
    adam_state adam(static_cast<std::size_t>(params.size()), cfg.step_size);
    stim_traces traces;
    if (cfg.augment) traces = stim_traces(channels, tau);

    prediction_log log;
    detail::begin_log(log, env, steps, record_channels);
    log.gamma = gamma;

    observation o(env.n_cs(), env.n_distractors());
    Eigen::VectorXd x(input_size);
    hidden_state state = hidden_state::zeros(params);
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(params.size());
    step_cache cache;

    auto build_input = [&] {
        for (std::size_t i = 0; i < channels; ++i) x[static_cast<Eigen::Index>(i)] = o.channels[i];
        if (cfg.augment) {
            traces.update(o);
            const auto y = traces.values();
            for (std::size_t i = 0; i < channels; ++i)
                x[static_cast<Eigen::Index>(channels + i)] = y[i];
        }
    };

    if (cfg.engine == gradient_engine::tbptt) {
        window_buffer window(cfg.truncation, params);
        tbptt_engine engine(params, cfg.truncation);
        static const Eigen::VectorXd no_c;
        const bool lstm = cfg.kind == cell_kind::lstm;
        for (std::int64_t t = 0; t < steps; ++t) {
            env.step(o);
            build_input();
            cell_forward(params, state.h, lstm ? state.c : no_c, x, cache);
            state.h = cache.h;
            if (lstm) state.c = cache.c;
            const double v = value_head(params, state.h);
            detail::record(log, o, v, record_channels);
            window.push(x, o.us(), state);
            if (window.full()) {
                engine.gradient(params, window, gamma, grad);
                adam_apply(adam, params.theta, grad);
            }
        }
    } else {
        rtrl_engine engine(params);
        Eigen::VectorXd grad_cur = Eigen::VectorXd::Zero(params.size());
        hidden_state next = state;
        double v_prev = 0.0;
        bool has_prev = false;
        for (std::int64_t t = 0; t < steps; ++t) {
            env.step(o);
            build_input();
            engine.propagate(params, state, x, next, cache);
            std::swap(state, next);
            const double v = value_head(params, state.h);
            detail::record(log, o, v, record_channels);
            rtrl_value_gradient(params, engine.jacobian(), state.h, grad_cur);
            if (has_prev) {
                const double delta = td_error(o.us(), v, v_prev, gamma);
                grad *= -delta;
                adam_apply(adam, params.theta, grad);
            }
            std::swap(grad, grad_cur);
            v_prev = v;
            has_prev = true;
        }
    }
    log.trials = env.trials();
    if (final_params) *final_params = std::move(params);
    return log;
}

} // namespace ccbench
