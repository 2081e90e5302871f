#pragma once

// Fixed state-construction methods: presence, stimulating traces, tile-coded
// traces, microstimulus and echo state networks.
//
// Every method appends a constant bias feature as the last entry. Feature
// dimensions per configuration:
//   presence          channels + 1
//   tile-coded traces channels * n_tilings * n_tiles + 1
//   microstimulus     channels * n_rbfs + 1
//   echo state net    hidden_size + 1

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "ccbench/envs.hpp"
#include "ccbench/rng.hpp"

namespace ccbench {

/// Agent state x_t. Dense vectors store `dim` values; sparse vectors store
/// strictly increasing active indices with one value each.
struct feature_vector {
    std::size_t dim = 0;
    bool sparse = false;
    std::vector<std::uint32_t> indices;
    std::vector<double> values;

    double dot(std::span<const double> w) const
    {
        double s = 0.0;
        if (sparse) {
            for (std::size_t k = 0; k < indices.size(); ++k) s += w[indices[k]] * values[k];
        } else {
            for (std::size_t i = 0; i < dim; ++i) s += w[i] * values[i];
        }
        return s;
    }

    /// acc += scale * x
    void add_to(std::span<double> acc, double scale = 1.0) const
    {
        if (sparse) {
            for (std::size_t k = 0; k < indices.size(); ++k) acc[indices[k]] += scale * values[k];
        } else {
            for (std::size_t i = 0; i < dim; ++i) acc[i] += scale * values[i];
        }
    }

    std::vector<double> to_dense() const
    {
        if (!sparse) return values;
        std::vector<double> out(dim, 0.0);
        add_to(out);
        return out;
    }

    void clear_sparse(std::size_t d)
    {
        dim = d;
        sparse = true;
        indices.clear();
        values.clear();
    }

    void push(std::uint32_t index, double value)
    {
        indices.push_back(index);
        values.push_back(value);
    }
};

// ---------------------------------------------------------------------------
// Presence

inline void presence_features(const observation& o, feature_vector& out)
{
    const std::size_t n = o.size();
    out.clear_sparse(n + 1);
    for (std::size_t i = 0; i < n; ++i)
        if (o.channels[i]) out.push(static_cast<std::uint32_t>(i), 1.0);
    out.push(static_cast<std::uint32_t>(n), 1.0);
}

inline feature_vector presence_features(const observation& o)
{
    feature_vector f;
    presence_features(o, f);
    return f;
}

// ---------------------------------------------------------------------------
// Stimulating traces

/// Per-channel memory set to 1 on each 0->1 transition and multiplied by tau
/// on every other step, whether or not the stimulus is still on.
class stim_traces {
public:
    stim_traces() = default;
    stim_traces(std::size_t channels, double tau) : tau_(tau), y_(channels, 0.0), prev_(channels, 0)
    {
        if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("stim_traces: tau must be in (0,1)");
    }

    void update(const observation& o) { update(std::span<const std::uint8_t>(o.channels)); }

    void update(std::span<const std::uint8_t> raw)
    {
        for (std::size_t i = 0; i < y_.size(); ++i) {
            const bool onset = raw[i] && !prev_[i];
            y_[i] = onset ? 1.0 : tau_ * y_[i];
            prev_[i] = raw[i];
        }
    }

    void reset()
    {
        std::fill(y_.begin(), y_.end(), 0.0);
        std::fill(prev_.begin(), prev_.end(), 0);
    }

    std::span<const double> values() const noexcept { return y_; }
    std::span<double> values() noexcept { return y_; }
    double tau() const noexcept { return tau_; }
    std::size_t size() const noexcept { return y_.size(); }

private:
    double tau_ = 0.9;
    std::vector<double> y_;
    std::vector<std::uint8_t> prev_;
};

// ---------------------------------------------------------------------------
// Tile-coded traces

inline constexpr double tile_activation_threshold = 0.01;

/// Tile containing y in tiling `tiling`; tilings are shifted by tiling/(n_tilings*n_tiles)
/// and the top tile is closed at 1.
inline int tile_index(double y, int tiling, int n_tilings, int n_tiles)
{
    const double offset = static_cast<double>(tiling) / (n_tilings * n_tiles);
    const int idx = static_cast<int>(std::floor((y + offset) * n_tiles));
    return std::clamp(idx, 0, n_tiles - 1);
}

inline void tile_coded_features(std::span<const double> traces, int n_tilings, int n_tiles,
                                 feature_vector& out)
{
    const std::size_t per_channel = static_cast<std::size_t>(n_tilings) * n_tiles;
    out.clear_sparse(traces.size() * per_channel + 1);
    for (std::size_t c = 0; c < traces.size(); ++c) {
        const double y = traces[c];
        if (y < tile_activation_threshold) continue;
        for (int k = 0; k < n_tilings; ++k) {
            const std::size_t idx = c * per_channel + static_cast<std::size_t>(k) * n_tiles +
                                    static_cast<std::size_t>(tile_index(y, k, n_tilings, n_tiles));
            out.push(static_cast<std::uint32_t>(idx), 1.0);
        }
    }
    out.push(static_cast<std::uint32_t>(out.dim - 1), 1.0);
}

inline feature_vector tile_coded_features(const stim_traces& s, int n_tilings, int n_tiles)
{
    if (n_tilings < 1 || n_tiles < 2) throw std::invalid_argument("tile coding: n_tilings >= 1, n_tiles >= 2");
    feature_vector f;
    tile_coded_features(s.values(), n_tilings, n_tiles, f);
    return f;
}

// ---------------------------------------------------------------------------
// Microstimulus

/// x_j = y * exp(-(y - mu_j)^2 / (2 sigma^2)), mu_j = j / n_rbfs for j = 1..n_rbfs.
inline void microstimulus_features(std::span<const double> traces, int n_rbfs, double sigma,
                                   feature_vector& out)
{
    out.dim = traces.size() * static_cast<std::size_t>(n_rbfs) + 1;
    out.sparse = false;
    out.indices.clear();
    out.values.resize(out.dim);
    const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
    std::size_t k = 0;
    for (double y : traces) {
        for (int j = 1; j <= n_rbfs; ++j) {
            const double d = y - static_cast<double>(j) / n_rbfs;
            out.values[k++] = y * std::exp(-d * d * inv_two_var);
        }
    }
    out.values[k] = 1.0;
}

inline feature_vector microstimulus_features(const stim_traces& s, int n_rbfs, double sigma)
{
    if (n_rbfs < 1 || !(sigma > 0.0)) throw std::invalid_argument("microstimulus: n_rbfs >= 1, sigma > 0");
    feature_vector f;
    microstimulus_features(s.values(), n_rbfs, sigma, f);
    return f;
}

// ---------------------------------------------------------------------------
// Echo state network

/// Largest eigenvalue modulus of a square matrix.
inline double spectral_radius(const Eigen::MatrixXd& m)
{
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

struct esn_config {
    int hidden_size = 100;
    double spectral_radius = 0.99;
    double input_scaling = 0.1;
    double density = 0.1;
};

/// Reservoir with fixed input, recurrent and output-feedback weights. Only the
/// hidden activation changes after construction.
class esn {
public:
    using sparse_matrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

    esn(std::size_t n_inputs, const esn_config& cfg, std::uint64_t seed) : cfg_(cfg)
    {
        if (cfg.hidden_size < 1) throw std::invalid_argument("esn: hidden_size >= 1");
        if (!(cfg.spectral_radius > 0.0 && cfg.spectral_radius < 1.0))
            throw std::invalid_argument("esn: spectral radius must be in (0,1)");
        if (!(cfg.density > 0.0 && cfg.density <= 1.0))
            throw std::invalid_argument("esn: density must be in (0,1]");

        const auto n = static_cast<Eigen::Index>(cfg.hidden_size);
        rng_engine rng = make_engine(seed);
        auto sign = [&] { return bernoulli(rng, 0.5) ? cfg.input_scaling : -cfg.input_scaling; };

        w_in_.resize(n, static_cast<Eigen::Index>(n_inputs));
        for (Eigen::Index c = 0; c < w_in_.cols(); ++c)
            for (Eigen::Index r = 0; r < n; ++r) w_in_(r, c) = sign();
        w_fb_.resize(n);
        for (Eigen::Index r = 0; r < n; ++r) w_fb_(r) = sign();

        Eigen::MatrixXd dense;
        double radius = 0.0;
        do {
            dense = Eigen::MatrixXd::Zero(n, n);
            for (Eigen::Index r = 0; r < n; ++r)
                for (Eigen::Index c = 0; c < n; ++c)
                    if (bernoulli(rng, cfg.density)) dense(r, c) = 2.0 * uniform01(rng) - 1.0;
            // An all-zero or nilpotent sample cannot be rescaled; draw again.
            radius = dense.isZero(0.0) ? 0.0 : spectral_radius(dense);
        } while (radius <= 1e-12);
        dense *= cfg.spectral_radius / radius;
        w_h_ = dense.sparseView(0.0, 0.0);
        w_h_.makeCompressed();

        h_ = Eigen::VectorXd::Zero(n);
        pre_ = Eigen::VectorXd::Zero(n);
    }

    std::size_t dim() const noexcept { return static_cast<std::size_t>(cfg_.hidden_size) + 1; }
    const esn_config& config() const noexcept { return cfg_; }
    const Eigen::MatrixXd& input_weights() const noexcept { return w_in_; }
    const sparse_matrix& recurrent_weights() const noexcept { return w_h_; }
    const Eigen::VectorXd& feedback_weights() const noexcept { return w_fb_; }
    const Eigen::VectorXd& hidden() const noexcept { return h_; }

    void reset() { h_.setZero(); }

    /// h := tanh(W_in o + W_h h + w_fb v_prev); emits (h, 1).
    void step(std::span<const std::uint8_t> o, double v_prev, feature_vector& out)
    {
        pre_.noalias() = w_h_ * h_;
        pre_ += v_prev * w_fb_;
        for (std::size_t c = 0; c < o.size(); ++c)
            if (o[c]) pre_ += w_in_.col(static_cast<Eigen::Index>(c));
        h_ = pre_.array().tanh();

        out.dim = dim();
        out.sparse = false;
        out.indices.clear();
        out.values.resize(out.dim);
        std::copy(h_.data(), h_.data() + h_.size(), out.values.begin());
        out.values.back() = 1.0;
    }

    feature_vector step(const observation& o, double v_prev)
    {
        feature_vector f;
        step(o.channels, v_prev, f);
        return f;
    }

private:
    esn_config cfg_;
    Eigen::MatrixXd w_in_;
    sparse_matrix w_h_;
    Eigen::VectorXd w_fb_;
    Eigen::VectorXd h_;
    Eigen::VectorXd pre_;
};

// ---------------------------------------------------------------------------
// Representation adapters used by the linear learner.
//
// Each adapter exposes dim(), reset() and encode(observation, v_prev, out).

class presence_representation {
public:
    explicit presence_representation(std::size_t channels) : channels_(channels) {}
    std::size_t dim() const noexcept { return channels_ + 1; }
    void reset() {}
    void encode(const observation& o, double, feature_vector& out) { presence_features(o, out); }

private:
    std::size_t channels_;
};

class tile_coded_representation {
public:
    tile_coded_representation(std::size_t channels, double tau, int n_tilings, int n_tiles)
        : traces_(channels, tau), n_tilings_(n_tilings), n_tiles_(n_tiles)
    {
        if (n_tilings < 1 || n_tiles < 2)
            throw std::invalid_argument("tile coding: n_tilings >= 1, n_tiles >= 2");
    }
    std::size_t dim() const noexcept
    {
        return traces_.size() * static_cast<std::size_t>(n_tilings_ * n_tiles_) + 1;
    }
    void reset() { traces_.reset(); }
    void encode(const observation& o, double, feature_vector& out)
    {
        traces_.update(o);
        tile_coded_features(traces_.values(), n_tilings_, n_tiles_, out);
    }

private:
    stim_traces traces_;
    int n_tilings_;
    int n_tiles_;
};

class microstimulus_representation {
public:
    microstimulus_representation(std::size_t channels, double tau, int n_rbfs, double sigma)
        : traces_(channels, tau), n_rbfs_(n_rbfs), sigma_(sigma)
    {
        if (n_rbfs < 1 || !(sigma > 0.0))
            throw std::invalid_argument("microstimulus: n_rbfs >= 1, sigma > 0");
    }
    std::size_t dim() const noexcept { return traces_.size() * static_cast<std::size_t>(n_rbfs_) + 1; }
    void reset() { traces_.reset(); }
    void encode(const observation& o, double, feature_vector& out)
    {
        traces_.update(o);
        microstimulus_features(traces_.values(), n_rbfs_, sigma_, out);
    }

private:
    stim_traces traces_;
    int n_rbfs_;
    double sigma_;
};

class esn_representation {
public:
    esn_representation(std::size_t channels, const esn_config& cfg, std::uint64_t seed)
        : net_(channels, cfg, seed)
    {
    }
    std::size_t dim() const noexcept { return net_.dim(); }
    void reset() { net_.reset(); }
    void encode(const observation& o, double v_prev, feature_vector& out)
    {
        net_.step(o.channels, v_prev, out);
    }
    const esn& network() const noexcept { return net_; }

private:
    esn net_;
};

} // namespace ccbench
