#pragma once

// Problem description, time grid and trajectory container shared by the
// mild-solution solver and the Volterra oracle.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fracdelay/errors.hpp"
#include "fracdelay/operators.hpp"
#include "fracdelay/state.hpp"

namespace fracdelay {

/// History segment sample: theta in [-d, 0] -> state.
using HistoryFn = std::function<State(double)>;
/// Impulse map applied to the left limit u(t_k^-).
using StateMap = std::function<State(std::span<const double>)>;
/// Forcing in pointwise delayed form: f(t, u(rho(t, u_t))).
using Forcing = std::function<State(double, std::span<const double>)>;

/// Where the delayed argument of the forcing is read.
///
/// The state-dependent form follows lag = rho1(t) * rho2(|u(t)|), target
/// r = t - lag; the forcing then sees u(r).
class DelaySpec {
public:
    enum class Form { None, Constant, StateDependent };

    static DelaySpec none() { return DelaySpec(Form::None, 0.0, {}, {}); }

    static DelaySpec constant(double tau) {
        if (!(tau >= 0.0) || !std::isfinite(tau)) {
            throw DomainError("DelaySpec: constant delay must be non-negative");
        }
        return DelaySpec(Form::Constant, tau, {}, {});
    }

    static DelaySpec state_dependent(ScalarFn rho1, ScalarFn rho2) {
        if (!rho1 || !rho2) {
            throw DomainError("DelaySpec: state-dependent delay needs rho1 and rho2");
        }
        return DelaySpec(Form::StateDependent, 0.0, std::move(rho1), std::move(rho2));
    }

    Form form() const noexcept { return form_; }
    double tau() const noexcept { return tau_; }

    /// r = rho(s, u_s) given the current state u(s). Throws DelayError unless
    /// -depth <= r <= s.
    double target(double s, std::span<const double> current, double depth) const {
        double r = s;
        switch (form_) {
        case Form::None:
            return s;
        case Form::Constant:
            r = s - tau_;
            break;
        case Form::StateDependent:
            r = s - rho1_(s) * rho2_(euclidean_norm(current));
            break;
        }
        const double slack = 1e-12 * std::max(1.0, std::abs(s));
        if (!std::isfinite(r) || r > s + slack || r < -depth - slack) {
            std::ostringstream os;
            os << "delay target " << r << " at s=" << s << " leaves the admissible window [" << -depth << ", " << s
               << "]";
            throw DelayError(os.str());
        }
        return std::clamp(r, -depth, s);
    }

private:
    DelaySpec(Form form, double tau, ScalarFn rho1, ScalarFn rho2)
        : form_(form), tau_(tau), rho1_(std::move(rho1)), rho2_(std::move(rho2)) {}

    Form form_;
    double tau_;
    ScalarFn rho1_;
    ScalarFn rho2_;
};

struct Impulse {
    double time = 0.0;
    StateMap jump;             ///< u(t_k^+) - u(t_k^-)
    StateMap derivative_jump;  ///< u'(t_k^+) - u'(t_k^-)
};

struct ProblemSpec {
    double alpha = 1.5;
    double horizon = 1.0;  ///< T
    double depth = 0.0;    ///< d, history lives on [-d, 0]
    SpectralOperator op;
    HistoryFn phi;
    HistoryFn varphi;
    Forcing forcing;
    DelaySpec delay = DelaySpec::none();
    std::vector<Impulse> impulses;

    std::size_t dimension() const noexcept { return op.size(); }

    State phi0() const { return phi(0.0); }
    State varphi0() const { return varphi(0.0); }

    void validate() const {
        if (!(alpha > 1.0 && alpha < 2.0)) {
            throw DomainError("problem: alpha must lie in (1,2)");
        }
        if (!(horizon > 0.0) || !std::isfinite(horizon)) {
            throw DomainError("problem: horizon T must be positive");
        }
        if (!(depth >= 0.0) || !std::isfinite(depth)) {
            throw DomainError("problem: delay depth d must be non-negative");
        }
        if (!phi || !varphi || !forcing) {
            throw DomainError("problem: history, history derivative and forcing are required");
        }
        double prev = 0.0;
        for (std::size_t k = 0; k < impulses.size(); ++k) {
            const auto& imp = impulses[k];
            if (!(imp.time > prev) || !(imp.time < horizon)) {
                std::ostringstream os;
                os << "problem: impulse times must satisfy 0 < t_1 < ... < t_m < T (t_" << k + 1 << " = "
                   << imp.time << ", T = " << horizon << ")";
                throw DomainError(os.str());
            }
            if (!imp.jump || !imp.derivative_jump) {
                throw DomainError("problem: every impulse needs both maps I_k and Q_k");
            }
            prev = imp.time;
        }
        // History must be finite on [-d, 0]; probe a fixed sample.
        constexpr int kProbe = 64;
        for (int i = 0; i <= kProbe; ++i) {
            const double theta = -depth * static_cast<double>(kProbe - i) / kProbe;
            for (const HistoryFn* fn : {&phi, &varphi}) {
                const State v = (*fn)(theta);
                if (v.size() != dimension()) {
                    throw ShapeError("problem: history dimension differs from the operator size");
                }
                for (double x : v) {
                    if (!std::isfinite(x)) {
                        std::ostringstream os;
                        os << "problem: history is not finite at theta = " << theta;
                        throw DomainError(os.str());
                    }
                }
            }
        }
    }
};

struct SolverConfig {
    double h = 1.0 / 256.0;
    double tol = 1e-10;
    std::size_t max_iter = 50;
    std::size_t quad_refine = 4;

    void validate() const {
        if (!(h > 0.0) || !(tol > 0.0) || max_iter < 1 || quad_refine < 1) {
            throw DomainError("solver config: need h > 0, tol > 0, max_iter >= 1, quad_refine >= 1");
        }
    }
};

/// Node role: ordinary, or the left/right copy of an impulse time.
enum class Side { Plain, Left, Right };

/// Time grid on [-d, T]. Solution times are "distinct" times; each impulse
/// time maps to two trajectory nodes.
struct GridLayout {
    std::vector<double> history_times;  ///< [-d, 0), ascending
    std::vector<double> times;          ///< distinct times on [0, T], times[0] = 0
    std::vector<std::size_t> impulse_at;  ///< distinct index of each t_k
    std::optional<double> uniform_step;   ///< set when every cell has the same width

    /// Snaps every t_k onto the grid: each (t_k, t_{k+1}] gets ceil(len/h)
    /// equal cells.
    static GridLayout build(const ProblemSpec& prob, double h) {
        if (!(h > 0.0)) {
            throw DomainError("grid: step must be positive");
        }
        GridLayout g;
        auto cells = [h](double len) {
            return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / h - 1e-9)));
        };

        if (prob.depth > 0.0) {
            const std::size_t nh = cells(prob.depth);
            for (std::size_t i = 0; i < nh; ++i) {
                g.history_times.push_back(-prob.depth * static_cast<double>(nh - i) / static_cast<double>(nh));
            }
        }

        std::vector<double> breaks{0.0};
        for (const auto& imp : prob.impulses) {
            breaks.push_back(imp.time);
        }
        breaks.push_back(prob.horizon);

        g.times.push_back(0.0);
        std::vector<double> steps;
        for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
            const double a = breaks[p];
            const double b = breaks[p + 1];
            const std::size_t n = cells(b - a);
            const double step = (b - a) / static_cast<double>(n);
            steps.push_back(step);
            for (std::size_t i = 1; i < n; ++i) {
                g.times.push_back(a + static_cast<double>(i) * step);
            }
            g.times.push_back(b);
            if (p + 2 < breaks.size()) {
                g.impulse_at.push_back(g.times.size() - 1);
            }
        }

        const double s0 = steps.front();
        const bool uniform = std::all_of(steps.begin(), steps.end(),
                                         [s0](double s) { return std::abs(s - s0) <= 1e-12 * s0; });
        if (uniform) {
            g.uniform_step = s0;
        }
        return g;
    }
};

/// Piecewise solution on [-d, T]. Impulse times carry two nodes (Left then
/// Right); lookups at an impulse time return the left value.
struct Trajectory {
    std::vector<double> times;
    std::vector<Side> sides;
    std::vector<State> values;
    State u1;  ///< u'(0)
    double alpha = 1.5;
    std::vector<double> eigenvalues;

    /// Index of the node at t = 0.
    std::size_t origin = 0;
    /// For each distinct solution time: node holding the left / right value.
    std::vector<std::size_t> left_node;
    std::vector<std::size_t> right_node;

    static Trajectory skeleton(const ProblemSpec& prob, const GridLayout& grid) {
        Trajectory tr;
        tr.alpha = prob.alpha;
        tr.eigenvalues.assign(prob.op.eigenvalues().begin(), prob.op.eigenvalues().end());
        tr.u1 = prob.varphi0();
        const std::size_t dim = prob.dimension();

        for (double th : grid.history_times) {
            tr.times.push_back(th);
            tr.sides.push_back(Side::Plain);
            tr.values.push_back(prob.phi(th));
        }
        tr.origin = tr.times.size();
        std::size_t next_imp = 0;
        for (std::size_t j = 0; j < grid.times.size(); ++j) {
            const bool jump = next_imp < grid.impulse_at.size() && grid.impulse_at[next_imp] == j;
            tr.left_node.push_back(tr.times.size());
            tr.times.push_back(grid.times[j]);
            tr.sides.push_back(jump ? Side::Left : Side::Plain);
            tr.values.emplace_back(dim, 0.0);
            if (jump) {
                tr.times.push_back(grid.times[j]);
                tr.sides.push_back(Side::Right);
                tr.values.emplace_back(dim, 0.0);
                ++next_imp;
            }
            tr.right_node.push_back(tr.times.size() - 1);
        }
        tr.values[tr.origin] = prob.phi0();
        return tr;
    }

    /// Rebuilds the index bookkeeping from raw nodes (e.g. read from CSV).
    /// The node at t = 0 must exist; Left/Right nodes must come in pairs.
    static Trajectory from_nodes(std::vector<double> times, std::vector<Side> sides, std::vector<State> values,
                                 State u1, double alpha, std::vector<double> eigenvalues) {
        if (times.size() != sides.size() || times.size() != values.size() || times.empty()) {
            throw ShapeError("trajectory: times, sides and values must be non-empty and equally long");
        }
        Trajectory tr;
        tr.times = std::move(times);
        tr.sides = std::move(sides);
        tr.values = std::move(values);
        tr.u1 = std::move(u1);
        tr.alpha = alpha;
        tr.eigenvalues = std::move(eigenvalues);

        const auto zero = std::find(tr.times.begin(), tr.times.end(), 0.0);
        if (zero == tr.times.end()) {
            throw ShapeError("trajectory: no node at t = 0");
        }
        tr.origin = static_cast<std::size_t>(zero - tr.times.begin());
        for (std::size_t i = 0; i < tr.size(); ++i) {
            if (tr.values[i].size() != tr.eigenvalues.size()) {
                throw ShapeError("trajectory: state dimension differs from the operator size");
            }
            if (i > 0 && tr.times[i] < tr.times[i - 1]) {
                throw ShapeError("trajectory: times must be non-decreasing");
            }
            const bool pair_ok = tr.sides[i] == Side::Left
                                     ? i + 1 < tr.size() && tr.sides[i + 1] == Side::Right && tr.times[i + 1] == tr.times[i]
                                     : tr.sides[i] != Side::Right || (i > 0 && tr.sides[i - 1] == Side::Left);
            if (!pair_ok || (i > 0 && tr.times[i] == tr.times[i - 1] && tr.sides[i] != Side::Right)) {
                throw ShapeError("trajectory: impulse nodes must appear as an L/R pair at equal times");
            }
            if (i < tr.origin || tr.sides[i] == Side::Right) {
                continue;
            }
            tr.left_node.push_back(i);
            tr.right_node.push_back(tr.sides[i] == Side::Left ? i + 1 : i);
        }
        return tr;
    }

    std::size_t size() const noexcept { return times.size(); }
    std::size_t dimension() const noexcept { return values.empty() ? 0 : values.front().size(); }
    double start() const { return times.front(); }
    double horizon() const { return times.back(); }

    /// Left-continuous linear interpolation.
    State at(double t) const { return lookup(t, false); }

    /// Right limit; differs from at() only at impulse times.
    State right_limit(double t) const { return lookup(t, true); }

    /// Node index ranges [first, last] of the smooth pieces [0, t_1],
    /// [t_1^+, t_2], ..., [t_m^+, T].
    std::vector<std::pair<std::size_t, std::size_t>> pieces() const {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        std::size_t first = origin;
        for (std::size_t i = origin; i < size(); ++i) {
            if (sides[i] == Side::Left) {
                out.emplace_back(first, i);
                first = i + 1;
            }
        }
        out.emplace_back(first, size() - 1);
        return out;
    }

    /// Impulse times in ascending order.
    std::vector<double> impulse_times() const {
        std::vector<double> out;
        for (std::size_t i = 0; i < size(); ++i) {
            if (sides[i] == Side::Left) {
                out.push_back(times[i]);
            }
        }
        return out;
    }

private:
    State lookup(double t, bool right) const {
        const double slack = 1e-12 * std::max(1.0, std::abs(horizon()));
        if (times.empty() || t < start() - slack || t > horizon() + slack) {
            std::ostringstream os;
            os << "trajectory lookup at t=" << t << " outside [" << (times.empty() ? 0.0 : start()) << ", "
               << (times.empty() ? 0.0 : horizon()) << "]";
            throw DomainError(os.str());
        }
        t = std::clamp(t, start(), horizon());
        auto it = std::lower_bound(times.begin(), times.end(), t);
        std::size_t j = static_cast<std::size_t>(it - times.begin());
        if (times[j] == t) {
            if (right && j + 1 < size() && times[j + 1] == t) {
                return values[j + 1];
            }
            return values[j];
        }
        const std::size_t i = j - 1;
        const double w = (t - times[i]) / (times[j] - times[i]);
        State out(values[i].size());
        for (std::size_t c = 0; c < out.size(); ++c) {
            out[c] = (1.0 - w) * values[i][c] + w * values[j][c];
        }
        return out;
    }
};

/// f(t_i, u(rho(t_i, u_{t_i}))) at trajectory node i (i >= origin). A delay
/// target equal to t_i reads the node itself, so right copies of impulse
/// nodes see the post-jump state.
inline State forcing_at_node(const ProblemSpec& prob, const Trajectory& traj, std::size_t i) {
    const double s = traj.times[i];
    const State& current = traj.values[i];
    const double r = prob.delay.target(s, current, prob.depth);
    State f = r >= s ? prob.forcing(s, current) : prob.forcing(s, traj.at(r));
    if (f.size() != prob.dimension()) {
        throw ShapeError("forcing returned a state of the wrong dimension");
    }
    return f;
}

/// u_c(theta) = u(c + theta), left-continuous at impulse times.
inline State eval_history_segment(const Trajectory& traj, double depth, double c, double theta) {
    if (theta < -depth - 1e-12 || theta > 0.0) {
        throw DomainError("eval_history_segment: theta must lie in [-d, 0]");
    }
    if (c < 0.0 || c > traj.horizon() + 1e-12) {
        throw DomainError("eval_history_segment: c must lie in [0, T]");
    }
    return traj.at(c + theta);
}

}  // namespace fracdelay
