#pragma once

// Single-layer recurrent cells (vanilla, LSTM, GRU) with a linear value head,
// and the two gradient engines used for online training: truncated BPTT over
// a sliding window and RTRL with forward influence-matrix propagation.
//
// Parameters live in one flat vector so optimizers and Jacobians can address
// them uniformly. Layout, with G gate blocks of height H (G = 1, 4, 3 for
// vanilla, LSTM, GRU) and input size I:
//
//   [ W_x (GH x I, column-major) | W_h (GH x H, column-major) | b (GH) | w_out (H) | b_out ]
//
// LSTM gate rows are ordered (input, forget, output, candidate); GRU gate rows
// are ordered (update, reset, candidate). The first GH(I+H+1) entries are the
// "cell parameters" tracked by RTRL.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccbench/rng.hpp"

namespace ccbench {

enum class cell_kind { vanilla, lstm, gru };

inline int gate_count(cell_kind k)
{
    switch (k) {
    case cell_kind::vanilla: return 1;
    case cell_kind::lstm: return 4;
    case cell_kind::gru: return 3;
    }
    return 1;
}

inline std::string to_string(cell_kind k)
{
    switch (k) {
    case cell_kind::vanilla: return "vanilla";
    case cell_kind::lstm: return "lstm";
    case cell_kind::gru: return "gru";
    }
    return "?";
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

class cell_params {
public:
    using index = Eigen::Index;
    using matrix_map = Eigen::Map<Eigen::MatrixXd>;
    using const_matrix_map = Eigen::Map<const Eigen::MatrixXd>;
    using vector_map = Eigen::Map<Eigen::VectorXd>;
    using const_vector_map = Eigen::Map<const Eigen::VectorXd>;

    cell_params() = default;
    cell_params(cell_kind kind, int input_size, int hidden_size)
        : kind_(kind), input_(input_size), hidden_(hidden_size)
    {
        if (input_size < 1 || hidden_size < 1)
            throw std::invalid_argument("cell_params: sizes must be >= 1");
        theta = Eigen::VectorXd::Zero(size());
    }

    cell_kind kind() const noexcept { return kind_; }
    index input_size() const noexcept { return input_; }
    index hidden_size() const noexcept { return hidden_; }
    index gate_rows() const noexcept { return gate_count(kind_) * hidden_; }
    /// Number of parameters inside the recurrent cell.
    index cell_size() const noexcept { return gate_rows() * (input_ + hidden_ + 1); }
    index size() const noexcept { return cell_size() + hidden_ + 1; }
    /// Rows of the recurrent state: (h) or (h, c) for LSTM.
    index state_size() const noexcept { return kind_ == cell_kind::lstm ? 2 * hidden_ : hidden_; }

    index wx_offset() const noexcept { return 0; }
    index wh_offset() const noexcept { return gate_rows() * input_; }
    index b_offset() const noexcept { return gate_rows() * (input_ + hidden_); }
    index w_out_offset() const noexcept { return cell_size(); }
    index b_out_offset() const noexcept { return cell_size() + hidden_; }

    matrix_map wx() { return {theta.data() + wx_offset(), gate_rows(), input_}; }
    matrix_map wh() { return {theta.data() + wh_offset(), gate_rows(), hidden_}; }
    vector_map b() { return {theta.data() + b_offset(), gate_rows()}; }
    vector_map w_out() { return {theta.data() + w_out_offset(), hidden_}; }
    double& b_out() { return theta[b_out_offset()]; }

    const_matrix_map wx() const { return {theta.data() + wx_offset(), gate_rows(), input_}; }
    const_matrix_map wh() const { return {theta.data() + wh_offset(), gate_rows(), hidden_}; }
    const_vector_map b() const { return {theta.data() + b_offset(), gate_rows()}; }
    const_vector_map w_out() const { return {theta.data() + w_out_offset(), hidden_}; }
    double b_out() const { return theta[b_out_offset()]; }

    Eigen::VectorXd theta;

private:
    cell_kind kind_ = cell_kind::vanilla;
    index input_ = 0;
    index hidden_ = 0;
};

/// Fan-based uniform weights, zero biases except LSTM forget gates at 1, zero head.
inline cell_params init_params(cell_kind kind, int input_size, int hidden_size, std::uint64_t seed)
{
    cell_params p(kind, input_size, hidden_size);
    rng_engine rng = make_engine(seed);
    const double ax = std::sqrt(6.0 / (input_size + hidden_size));
    const double ah = std::sqrt(6.0 / (2.0 * hidden_size));
    auto wx = p.wx();
    for (Eigen::Index c = 0; c < wx.cols(); ++c)
        for (Eigen::Index r = 0; r < wx.rows(); ++r) wx(r, c) = ax * (2.0 * uniform01(rng) - 1.0);
    auto wh = p.wh();
    for (Eigen::Index c = 0; c < wh.cols(); ++c)
        for (Eigen::Index r = 0; r < wh.rows(); ++r) wh(r, c) = ah * (2.0 * uniform01(rng) - 1.0);
    if (kind == cell_kind::lstm) p.b().segment(hidden_size, hidden_size).setOnes();
    return p;
}

struct hidden_state {
    Eigen::VectorXd h;
    Eigen::VectorXd c; ///< LSTM cell state; empty for other kinds

    static hidden_state zeros(const cell_params& p)
    {
        hidden_state s;
        s.h = Eigen::VectorXd::Zero(p.hidden_size());
        if (p.kind() == cell_kind::lstm) s.c = Eigen::VectorXd::Zero(p.hidden_size());
        return s;
    }
};

/// Intermediate values of one forward step, kept for backpropagation.
struct step_cache {
    Eigen::VectorXd x;
    Eigen::VectorXd h_prev;
    Eigen::VectorXd c_prev;
    Eigen::VectorXd gates; ///< post-activation gate values (GH)
    Eigen::VectorXd c;
    Eigen::VectorXd tanh_c;
    Eigen::VectorXd rh; ///< GRU: reset gate times h_prev
    Eigen::VectorXd h;
};

namespace detail {

inline void sigmoid_inplace(Eigen::Ref<Eigen::VectorXd> v)
{
    v = (1.0 + (-v.array()).exp()).inverse();
}

} // namespace detail

/// One step of the cell equations; fills `cache` with everything backward needs.
inline void cell_forward(const cell_params& p, const Eigen::Ref<const Eigen::VectorXd>& h_prev,
                         const Eigen::Ref<const Eigen::VectorXd>& c_prev,
                         const Eigen::Ref<const Eigen::VectorXd>& x, step_cache& cache)
{
    const Eigen::Index H = p.hidden_size();
    cache.x = x;
    cache.h_prev = h_prev;
    switch (p.kind()) {
    case cell_kind::vanilla: {
        cache.gates.noalias() = p.wx() * x;
        cache.gates.noalias() += p.wh() * h_prev;
        cache.gates += p.b();
        cache.gates = cache.gates.array().tanh();
        cache.h = cache.gates;
        break;
    }
    case cell_kind::lstm: {
        cache.c_prev = c_prev;
        cache.gates.noalias() = p.wx() * x;
        cache.gates.noalias() += p.wh() * h_prev;
        cache.gates += p.b();
        detail::sigmoid_inplace(cache.gates.head(3 * H));
        cache.gates.tail(H) = cache.gates.tail(H).array().tanh();
        const auto i = cache.gates.segment(0, H).array();
        const auto f = cache.gates.segment(H, H).array();
        const auto o = cache.gates.segment(2 * H, H).array();
        const auto g = cache.gates.segment(3 * H, H).array();
        cache.c = f * c_prev.array() + i * g;
        cache.tanh_c = cache.c.array().tanh();
        cache.h = o * cache.tanh_c.array();
        break;
    }
    case cell_kind::gru: {
        cache.gates.resize(3 * H);
        auto zr = cache.gates.head(2 * H);
        zr.noalias() = p.wx().topRows(2 * H) * x;
        zr.noalias() += p.wh().topRows(2 * H) * h_prev;
        zr += p.b().head(2 * H);
        detail::sigmoid_inplace(zr);
        cache.rh = cache.gates.segment(H, H).cwiseProduct(h_prev);
        auto n = cache.gates.tail(H);
        n.noalias() = p.wx().bottomRows(H) * x;
        n.noalias() += p.wh().bottomRows(H) * cache.rh;
        n += p.b().tail(H);
        n = n.array().tanh();
        const auto z = cache.gates.head(H).array();
        cache.h = (1.0 - z) * h_prev.array() + z * n.array();
        break;
    }
    }
}

/// Pure forward step: next state from previous state and input.
inline hidden_state cell_forward(const cell_params& p, const hidden_state& prev,
                                 const Eigen::Ref<const Eigen::VectorXd>& x)
{
    step_cache cache;
    static const Eigen::VectorXd empty;
    cell_forward(p, prev.h, p.kind() == cell_kind::lstm ? prev.c : empty, x, cache);
    hidden_state next;
    next.h = cache.h;
    if (p.kind() == cell_kind::lstm) next.c = cache.c;
    return next;
}

inline double value_head(const cell_params& p, const Eigen::Ref<const Eigen::VectorXd>& h)
{
    return p.w_out().dot(h) + p.b_out();
}

/// Backpropagates (dh, dc) through one cached step. Accumulates cell-parameter
/// gradients into grad[0 .. cell_size) and writes the gradients flowing into
/// the previous state to dh_prev / dc_prev.
inline void cell_backward(const cell_params& p, const step_cache& cache,
                          const Eigen::Ref<const Eigen::VectorXd>& dh,
                          const Eigen::Ref<const Eigen::VectorXd>& dc, Eigen::Ref<Eigen::VectorXd> grad,
                          Eigen::VectorXd& dh_prev, Eigen::VectorXd& dc_prev, Eigen::VectorXd& da)
{
    const Eigen::Index H = p.hidden_size();
    const Eigen::Index GH = p.gate_rows();
    Eigen::Map<Eigen::MatrixXd> gwx(grad.data() + p.wx_offset(), GH, p.input_size());
    Eigen::Map<Eigen::MatrixXd> gwh(grad.data() + p.wh_offset(), GH, H);
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + p.b_offset(), GH);
    da.resize(GH);

    switch (p.kind()) {
    case cell_kind::vanilla: {
        da = dh.array() * (1.0 - cache.h.array().square());
        gwx.noalias() += da * cache.x.transpose();
        gwh.noalias() += da * cache.h_prev.transpose();
        gb += da;
        dh_prev.noalias() = p.wh().transpose() * da;
        break;
    }
    case cell_kind::lstm: {
        const auto i = cache.gates.segment(0, H).array();
        const auto f = cache.gates.segment(H, H).array();
        const auto o = cache.gates.segment(2 * H, H).array();
        const auto g = cache.gates.segment(3 * H, H).array();
        const auto tc = cache.tanh_c.array();
        const Eigen::ArrayXd dct = dc.array() + dh.array() * o * (1.0 - tc.square());
        da.segment(0, H) = dct * g * i * (1.0 - i);
        da.segment(H, H) = dct * cache.c_prev.array() * f * (1.0 - f);
        da.segment(2 * H, H) = dh.array() * tc * o * (1.0 - o);
        da.segment(3 * H, H) = dct * i * (1.0 - g.square());
        gwx.noalias() += da * cache.x.transpose();
        gwh.noalias() += da * cache.h_prev.transpose();
        gb += da;
        dc_prev = dct * f;
        dh_prev.noalias() = p.wh().transpose() * da;
        break;
    }
    case cell_kind::gru: {
        const auto z = cache.gates.segment(0, H).array();
        const auto r = cache.gates.segment(H, H).array();
        const auto n = cache.gates.segment(2 * H, H).array();
        const auto hp = cache.h_prev.array();
        // candidate
        da.segment(2 * H, H) = dh.array() * z * (1.0 - n.square());
        gwx.bottomRows(H).noalias() += da.segment(2 * H, H) * cache.x.transpose();
        gwh.bottomRows(H).noalias() += da.segment(2 * H, H) * cache.rh.transpose();
        gb.tail(H) += da.segment(2 * H, H);
        const Eigen::VectorXd drh = p.wh().bottomRows(H).transpose() * da.segment(2 * H, H);
        // update and reset gates
        da.segment(0, H) = dh.array() * (n - hp) * z * (1.0 - z);
        da.segment(H, H) = drh.array() * hp * r * (1.0 - r);
        gwx.topRows(2 * H).noalias() += da.head(2 * H) * cache.x.transpose();
        gwh.topRows(2 * H).noalias() += da.head(2 * H) * cache.h_prev.transpose();
        gb.head(2 * H) += da.head(2 * H);
        dh_prev = dh.array() * (1.0 - z) + drh.array() * r;
        dh_prev.noalias() += p.wh().topRows(2 * H).transpose() * da.head(2 * H);
        break;
    }
    }
}

// ---------------------------------------------------------------------------
// Truncated BPTT

/// Sliding window of the last T+1 inputs with their US values, plus the stale
/// hidden state that preceded the oldest input.
class window_buffer {
public:
    window_buffer() = default;
    window_buffer(int truncation, const cell_params& p)
        : truncation_(truncation), capacity_(static_cast<std::size_t>(truncation) + 1),
          inputs_(capacity_), us_(capacity_, 0.0), states_(capacity_),
          snapshot_(hidden_state::zeros(p))
    {
        if (truncation < 1) throw std::invalid_argument("window_buffer: truncation must be >= 1");
    }

    int truncation() const noexcept { return truncation_; }
    std::size_t capacity() const noexcept { return capacity_; }
    std::size_t size() const noexcept { return size_; }
    bool full() const noexcept { return size_ == capacity_; }

    /// Appends input x_t, its US value and the online state h_t computed at t.
    /// When the window overflows the oldest entry is dropped and its state
    /// becomes the snapshot.
    void push(const Eigen::Ref<const Eigen::VectorXd>& x, double us, const hidden_state& online)
    {
        if (size_ == capacity_) {
            snapshot_ = states_[head_];
            head_ = (head_ + 1) % capacity_;
            --size_;
        }
        const std::size_t slot = (head_ + size_) % capacity_;
        inputs_[slot] = x;
        us_[slot] = us;
        states_[slot] = online;
        ++size_;
    }

    /// k-th oldest buffered entry.
    const Eigen::VectorXd& input(std::size_t k) const { return inputs_[(head_ + k) % capacity_]; }
    double us(std::size_t k) const { return us_[(head_ + k) % capacity_]; }
    const hidden_state& snapshot() const noexcept { return snapshot_; }

private:
    int truncation_ = 1;
    std::size_t capacity_ = 2;
    std::vector<Eigen::VectorXd> inputs_;
    std::vector<double> us_;
    std::vector<hidden_state> states_;
    hidden_state snapshot_;
    std::size_t head_ = 0;
    std::size_t size_ = 0;
};

/// Reusable workspace for T-BPTT gradients.
class tbptt_engine {
public:
    tbptt_engine() = default;
    explicit tbptt_engine(const cell_params& p, int truncation)
        : caches_(static_cast<std::size_t>(truncation) + 1),
          values_(static_cast<std::size_t>(truncation) + 1)
    {
        const Eigen::Index H = p.hidden_size();
        dh_ = Eigen::VectorXd::Zero(H);
        dc_ = Eigen::VectorXd::Zero(H);
        dh_prev_ = Eigen::VectorXd::Zero(H);
        dc_prev_ = Eigen::VectorXd::Zero(H);
        zero_c_ = p.kind() == cell_kind::lstm ? Eigen::VectorXd::Zero(H) : Eigen::VectorXd();
    }

    /// Semi-gradient of the window's mean TD(0) loss:
    ///   g = -(1/T) sum_{i=t-T}^{t-1} delta_i grad V_i,  delta_i = US_{i+1} + gamma V_{i+1} - V_i,
    /// with every hidden state recomputed from the snapshot under the current
    /// parameters and no gradient entering the snapshot. A window that is not
    /// yet full yields a zero gradient. Returns the mean squared TD error.
    double gradient(const cell_params& p, const window_buffer& w, double gamma,
                    Eigen::Ref<Eigen::VectorXd> grad)
    {
        grad.setZero();
        if (!w.full()) return 0.0;
        const std::size_t T = static_cast<std::size_t>(w.truncation());
        const bool lstm = p.kind() == cell_kind::lstm;

        const hidden_state& s0 = w.snapshot();
        for (std::size_t k = 0; k <= T; ++k) {
            const Eigen::VectorXd& hp = k == 0 ? s0.h : caches_[k - 1].h;
            const Eigen::VectorXd& cp = !lstm ? zero_c_ : (k == 0 ? s0.c : caches_[k - 1].c);
            cell_forward(p, hp, cp, w.input(k), caches_[k]);
            values_[k] = value_head(p, caches_[k].h);
        }

        const double inv_t = 1.0 / static_cast<double>(T);
        auto g_out = grad.segment(p.w_out_offset(), p.hidden_size());
        double sq = 0.0;
        dh_.setZero();
        dc_.setZero();
        for (std::size_t k = T; k-- > 0;) {
            const double delta = w.us(k + 1) + gamma * values_[k + 1] - values_[k];
            sq += delta * delta;
            const double coeff = -delta * inv_t;
            g_out += coeff * caches_[k].h;
            grad[p.b_out_offset()] += coeff;
            dh_ += coeff * p.w_out();
            cell_backward(p, caches_[k], dh_, lstm ? dc_ : zero_c_, grad, dh_prev_, dc_prev_, da_);
            std::swap(dh_, dh_prev_);
            if (lstm) std::swap(dc_, dc_prev_);
        }
        return sq * inv_t;
    }

    /// Values V_{t-T}..V_t from the last gradient() call.
    const std::vector<double>& values() const noexcept { return values_; }

private:
    std::vector<step_cache> caches_;
    std::vector<double> values_;
    Eigen::VectorXd dh_, dc_, dh_prev_, dc_prev_, da_, zero_c_;
};

// ---------------------------------------------------------------------------
// RTRL

/// Forward propagation of the influence matrix J = d(state)/d(cell params).
/// Rows are the recurrent state: h for vanilla and GRU, (h; c) for LSTM.
class rtrl_engine {
public:
    rtrl_engine() = default;
    explicit rtrl_engine(const cell_params& p)
    {
        jacobian_ = Eigen::MatrixXd::Zero(p.state_size(), p.cell_size());
        next_ = jacobian_;
        a_ = Eigen::MatrixXd::Zero(p.gate_rows(), p.cell_size());
        if (p.kind() == cell_kind::gru) d_rh_ = Eigen::MatrixXd::Zero(p.hidden_size(), p.cell_size());
    }

    const Eigen::MatrixXd& jacobian() const noexcept { return jacobian_; }
    Eigen::MatrixXd& jacobian() noexcept { return jacobian_; }
    void reset() { jacobian_.setZero(); }

    /// Advances the state by one step and updates J' = D_state J + D_params.
    void propagate(const cell_params& p, const hidden_state& prev,
                   const Eigen::Ref<const Eigen::VectorXd>& x, hidden_state& next, step_cache& cache)
    {
        static const Eigen::VectorXd empty;
        const bool lstm = p.kind() == cell_kind::lstm;
        cell_forward(p, prev.h, lstm ? prev.c : empty, x, cache);
        const Eigen::Index H = p.hidden_size();

        switch (p.kind()) {
        case cell_kind::vanilla: {
            a_.noalias() = p.wh() * jacobian_;
            add_immediate(p, 0, H, x, prev.h, a_);
            next_.noalias() = (1.0 - cache.h.array().square()).matrix().asDiagonal() * a_;
            break;
        }
        case cell_kind::lstm: {
            const auto jh = jacobian_.topRows(H);
            const auto jc = jacobian_.bottomRows(H);
            a_.noalias() = p.wh() * jh;
            add_immediate(p, 0, 4 * H, x, prev.h, a_);
            const auto i = cache.gates.segment(0, H).array();
            const auto f = cache.gates.segment(H, H).array();
            const auto o = cache.gates.segment(2 * H, H).array();
            const auto g = cache.gates.segment(3 * H, H).array();
            const Eigen::VectorXd si = (g * i * (1.0 - i)).matrix();
            const Eigen::VectorXd sf = (prev.c.array() * f * (1.0 - f)).matrix();
            const Eigen::VectorXd sg = (i * (1.0 - g.square())).matrix();
            const Eigen::VectorXd so = (cache.tanh_c.array() * o * (1.0 - o)).matrix();
            const Eigen::VectorXd sc = (o * (1.0 - cache.tanh_c.array().square())).matrix();
            auto jc_next = next_.bottomRows(H);
            auto jh_next = next_.topRows(H);
            jc_next.noalias() = f.matrix().asDiagonal() * jc;
            jc_next.noalias() += si.asDiagonal() * a_.middleRows(0, H);
            jc_next.noalias() += sf.asDiagonal() * a_.middleRows(H, H);
            jc_next.noalias() += sg.asDiagonal() * a_.middleRows(3 * H, H);
            jh_next.noalias() = so.asDiagonal() * a_.middleRows(2 * H, H);
            jh_next.noalias() += sc.asDiagonal() * jc_next;
            break;
        }
        case cell_kind::gru: {
            auto a_zr = a_.topRows(2 * H);
            a_zr.noalias() = p.wh().topRows(2 * H) * jacobian_;
            add_immediate(p, 0, 2 * H, x, prev.h, a_);
            const auto z = cache.gates.segment(0, H).array();
            const auto r = cache.gates.segment(H, H).array();
            const auto n = cache.gates.segment(2 * H, H).array();
            const Eigen::VectorXd sz = (z * (1.0 - z)).matrix();
            const Eigen::VectorXd sr = (prev.h.array() * r * (1.0 - r)).matrix();
            // d(r*h_prev) = diag(h_prev) dr + diag(r) J
            d_rh_.noalias() = sr.asDiagonal() * a_.middleRows(H, H);
            d_rh_.noalias() += r.matrix().asDiagonal() * jacobian_;
            auto a_n = a_.bottomRows(H);
            a_n.noalias() = p.wh().bottomRows(H) * d_rh_;
            add_immediate(p, 2 * H, H, x, cache.rh, a_);
            const Eigen::VectorXd sn = (z * (1.0 - n.square())).matrix();
            const Eigen::VectorXd szz = ((n - prev.h.array()) * sz.array()).matrix();
            next_.noalias() = (1.0 - z).matrix().asDiagonal() * jacobian_;
            next_.noalias() += szz.asDiagonal() * a_.topRows(H);
            next_.noalias() += sn.asDiagonal() * a_.bottomRows(H);
            break;
        }
        }
        jacobian_.swap(next_);
        next.h = cache.h;
        if (lstm) next.c = cache.c;
    }

private:
    /// Adds the explicit derivative of pre-activation rows [row0, row0+rows)
    /// with respect to their own weights: x for W_x, `hin` for W_h, 1 for b.
    static void add_immediate(const cell_params& p, Eigen::Index row0, Eigen::Index rows,
                              const Eigen::Ref<const Eigen::VectorXd>& x,
                              const Eigen::Ref<const Eigen::VectorXd>& hin, Eigen::MatrixXd& a)
    {
        const Eigen::Index GH = p.gate_rows();
        const Eigen::Index wh0 = p.wh_offset();
        const Eigen::Index b0 = p.b_offset();
        for (Eigen::Index r = row0; r < row0 + rows; ++r) {
            for (Eigen::Index k = 0; k < x.size(); ++k) a(r, k * GH + r) += x[k];
            for (Eigen::Index k = 0; k < hin.size(); ++k) a(r, wh0 + k * GH + r) += hin[k];
            a(r, b0 + r) += 1.0;
        }
    }

    Eigen::MatrixXd jacobian_;
    Eigen::MatrixXd next_;
    Eigen::MatrixXd a_;
    Eigen::MatrixXd d_rh_;
};

/// Functional form of one RTRL step.
inline std::pair<hidden_state, Eigen::MatrixXd> rtrl_propagate(const cell_params& p,
                                                               const Eigen::MatrixXd& jacobian,
                                                               const hidden_state& prev,
                                                               const Eigen::Ref<const Eigen::VectorXd>& x)
{
    rtrl_engine e(p);
    e.jacobian() = jacobian;
    hidden_state next;
    step_cache cache;
    e.propagate(p, prev, x, next, cache);
    return {std::move(next), e.jacobian()};
}

/// Gradient of V = w_out.h + b_out over all parameters, given J for h.
inline void rtrl_value_gradient(const cell_params& p, const Eigen::MatrixXd& jacobian,
                                const Eigen::Ref<const Eigen::VectorXd>& h, Eigen::Ref<Eigen::VectorXd> grad)
{
    const Eigen::Index H = p.hidden_size();
    grad.head(p.cell_size()).noalias() = jacobian.topRows(H).transpose() * p.w_out();
    grad.segment(p.w_out_offset(), H) = h;
    grad[p.b_out_offset()] = 1.0;
}

inline Eigen::VectorXd rtrl_value_gradient(const cell_params& p, const Eigen::MatrixXd& jacobian,
                                           const Eigen::Ref<const Eigen::VectorXd>& h)
{
    Eigen::VectorXd g(p.size());
    rtrl_value_gradient(p, jacobian, h, g);
    return g;
}

} // namespace ccbench
