#pragma once

// Mild-solution operator
//   (Pu)(t) = S(t) phi(0) + K(t) varphi(0)
//           + sum_{t_i < t} [ S(t - t_i) I_i(u(t_i^-)) + K(t - t_i) Q_i(u(t_i^-)) ]
//           + int_0^t T(t - s) f(s, u(rho(s, u_s))) ds
// on a grid with duplicated impulse nodes, and its Picard fixed point.
//
// The forcing is always read from the input iterate. Impulse maps are fed
// with the left limits of the output being built (they depend only on
// earlier impulses), which makes u(t_k^+) - u(t_k^-) = I_k(u(t_k^-)) hold
// exactly in every iterate, not only at the fixed point.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include "fracdelay/errors.hpp"
#include "fracdelay/fraccalc.hpp"
#include "fracdelay/mittag_leffler.hpp"
#include "fracdelay/operators.hpp"
#include "fracdelay/problem.hpp"
#include "fracdelay/state.hpp"

namespace fracdelay {

namespace solver_detail {

/// Weights (w_a, w_b) of one cell [a, b] in
///   int_a^b (t-s)^{alpha-1} E_{alpha,alpha}(mu (t-s)^alpha) p(s) ds,
/// p linear with p(a), p(b) as nodal values. The Mittag-Leffler factor is
/// frozen at the midpoints of `refine` sub-cells; the power weight is
/// integrated exactly against the linear basis.
inline std::pair<double, double> cell_weights(double alpha, double mu, double t, double a, double b,
                                              std::size_t refine) {
    const MLParams params(alpha, alpha);
    const double h = b - a;
    const double ta = t - a;
    double wa = 0.0;
    double wb = 0.0;
    for (std::size_t m = 0; m < refine; ++m) {
        const double c = a + h * static_cast<double>(m) / static_cast<double>(refine);
        const double d = m + 1 == refine ? b : a + h * static_cast<double>(m + 1) / static_cast<double>(refine);
        const double tc = t - c;
        const double td = t - d;
        const double mid = 0.5 * (tc + td);
        const double e = ml_e(params, mu * std::pow(mid, alpha));
        const double i0 = (std::pow(tc, alpha) - std::pow(td, alpha)) / alpha;
        const double i1 = ta * i0 - (std::pow(tc, alpha + 1.0) - std::pow(td, alpha + 1.0)) / (alpha + 1.0);
        wa += e * (i0 - i1 / h);
        wb += e * (i1 / h);
    }
    return {wa, wb};
}

inline double sup_difference(const Trajectory& a, const Trajectory& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t c = 0; c < a.values[i].size(); ++c) {
            m = std::max(m, std::abs(a.values[i][c] - b.values[i][c]));
        }
    }
    return m;
}

}  // namespace solver_detail

/// int_0^t T(t-s) f(s) ds per eigenmode by product integration over the
/// cells of `fvals.grid` up to t (which must be a grid node).
inline State convolve_T(const ProblemSpec& prob, const SampledFunction& fvals, double t, std::size_t refine = 4) {
    fvals.validate();
    if (fvals.dimension() != prob.dimension()) {
        throw ShapeError("convolve_T: forcing samples have the wrong dimension");
    }
    auto it = std::find(fvals.grid.begin(), fvals.grid.end(), t);
    if (it == fvals.grid.end()) {
        throw ShapeError("convolve_T: t must be a node of the sample grid");
    }
    const std::size_t j = static_cast<std::size_t>(it - fvals.grid.begin());
    State out(prob.dimension(), 0.0);
    for (std::size_t n = 0; n < prob.dimension(); ++n) {
        const double mu = prob.op.eigenvalue(n);
        double acc = 0.0;
        for (std::size_t c = 0; c < j; ++c) {
            const auto [wa, wb] =
                solver_detail::cell_weights(prob.alpha, mu, t, fvals.grid[c], fvals.grid[c + 1], refine);
            acc += wa * fvals.values[c][n] + wb * fvals.values[c + 1][n];
        }
        out[n] = acc;
    }
    return out;
}

/// P with every u-independent ingredient (operator-function multipliers,
/// convolution weights) tabulated once for a fixed problem and grid.
class MildSolutionOperator {
public:
    MildSolutionOperator(ProblemSpec prob, SolverConfig cfg) : prob_(std::move(prob)), cfg_(cfg) {
        prob_.validate();
        cfg_.validate();
        grid_ = GridLayout::build(prob_, cfg_.h);
        phi0_ = prob_.phi0();
        varphi0_ = prob_.varphi0();
        tabulate();
    }

    const ProblemSpec& problem() const noexcept { return prob_; }
    const SolverConfig& config() const noexcept { return cfg_; }
    const GridLayout& grid() const noexcept { return grid_; }

    /// Empty trajectory on this operator's grid, history filled in.
    Trajectory skeleton() const { return Trajectory::skeleton(prob_, grid_); }

    /// S(t) phi(0) + K(t) varphi(0) on [0, T], history on [-d, 0), no jumps.
    Trajectory initial_guess() const {
        Trajectory tr = skeleton();
        for (std::size_t j = 0; j < grid_.times.size(); ++j) {
            State v = homogeneous(j);
            tr.values[tr.left_node[j]] = v;
            tr.values[tr.right_node[j]] = std::move(v);
        }
        return tr;
    }

    /// Forcing samples f(t_i, u(rho)) at every node of `in` from the origin on.
    std::vector<State> forcing_samples(const Trajectory& in) const {
        std::vector<State> out(in.size());
        for (std::size_t i = in.origin; i < in.size(); ++i) {
            out[i] = forcing_at_node(prob_, in, i);
        }
        return out;
    }

    /// int_0^{t_j} T(t_j - s) f(s) ds at distinct time index j.
    State convolution(const Trajectory& layout, const std::vector<State>& f, std::size_t j) const {
        const std::size_t dim = prob_.dimension();
        State out(dim, 0.0);
        for (std::size_t c = 0; c < j; ++c) {
            const State& fa = f[layout.right_node[c]];
            const State& fb = f[layout.left_node[c + 1]];
            for (std::size_t n = 0; n < dim; ++n) {
                const auto [wa, wb] = weights(n, j, c);
                out[n] += wa * fa[n] + wb * fb[n];
            }
        }
        return out;
    }

    Trajectory apply(const Trajectory& in) const {
        check_layout(in);
        const std::size_t dim = prob_.dimension();
        const std::vector<State> f = forcing_samples(in);

        Trajectory out = in;
        std::vector<State> jumps;
        std::vector<State> djumps;
        std::size_t next_imp = 0;

        for (std::size_t j = 0; j < grid_.times.size(); ++j) {
            State v;
            if (j == 0) {
                v = phi0_;
            } else {
                v = homogeneous(j);
                for (std::size_t k = 0; k < jumps.size(); ++k) {
                    const std::size_t off = j - grid_.impulse_at[k];
                    const std::vector<double>& s_mult = impulse_s_[k];
                    const std::vector<double>& k_mult = impulse_k_[k];
                    for (std::size_t n = 0; n < dim; ++n) {
                        v[n] += s_mult[off * dim + n] * jumps[k][n] + k_mult[off * dim + n] * djumps[k][n];
                    }
                }
                const State conv = convolution(in, f, j);
                for (std::size_t n = 0; n < dim; ++n) {
                    v[n] += conv[n];
                }
            }
            out.values[out.left_node[j]] = v;

            if (next_imp < grid_.impulse_at.size() && grid_.impulse_at[next_imp] == j) {
                const Impulse& imp = prob_.impulses[next_imp];
                State jump = imp.jump(v);
                State djump = imp.derivative_jump(v);
                if (jump.size() != dim || djump.size() != dim) {
                    throw ShapeError("impulse map returned a state of the wrong dimension");
                }
                State right = v;
                for (std::size_t n = 0; n < dim; ++n) {
                    right[n] += jump[n];
                }
                out.values[out.right_node[j]] = std::move(right);
                jumps.push_back(std::move(jump));
                djumps.push_back(std::move(djump));
                ++next_imp;
            }
        }
        return out;
    }

private:
    State homogeneous(std::size_t j) const {
        const std::size_t dim = prob_.dimension();
        State v(dim);
        for (std::size_t n = 0; n < dim; ++n) {
            v[n] = s_mult_[j * dim + n] * phi0_[n] + k_mult_[j * dim + n] * varphi0_[n];
        }
        return v;
    }

    std::pair<double, double> weights(std::size_t n, std::size_t j, std::size_t c) const {
        if (grid_.uniform_step) {
            const std::size_t off = j - 1 - c;
            return toeplitz_[n][off];
        }
        return full_[j][c * prob_.dimension() + n];
    }

    void check_layout(const Trajectory& in) const {
        const std::size_t expected = grid_.history_times.size() + grid_.times.size() + grid_.impulse_at.size();
        if (in.size() != expected || in.dimension() != prob_.dimension() ||
            in.left_node.size() != grid_.times.size()) {
            throw ShapeError("apply_P: trajectory is not laid out on the solver grid");
        }
    }

    void tabulate() {
        const std::size_t dim = prob_.dimension();
        const std::size_t nt = grid_.times.size();
        const double alpha = prob_.alpha;

        s_mult_.resize(nt * dim);
        k_mult_.resize(nt * dim);
        for (std::size_t j = 0; j < nt; ++j) {
            for (std::size_t n = 0; n < dim; ++n) {
                const double mu = prob_.op.eigenvalue(n);
                s_mult_[j * dim + n] = opfunc_multiplier(OpKind::S, alpha, mu, grid_.times[j]);
                k_mult_[j * dim + n] = opfunc_multiplier(OpKind::K, alpha, mu, grid_.times[j]);
            }
        }

        for (std::size_t idx : grid_.impulse_at) {
            std::vector<double> sm((nt - idx) * dim);
            std::vector<double> km((nt - idx) * dim);
            for (std::size_t j = idx; j < nt; ++j) {
                const double dt = grid_.times[j] - grid_.times[idx];
                for (std::size_t n = 0; n < dim; ++n) {
                    const double mu = prob_.op.eigenvalue(n);
                    sm[(j - idx) * dim + n] = opfunc_multiplier(OpKind::S, alpha, mu, dt);
                    km[(j - idx) * dim + n] = opfunc_multiplier(OpKind::K, alpha, mu, dt);
                }
            }
            impulse_s_.push_back(std::move(sm));
            impulse_k_.push_back(std::move(km));
        }

        if (grid_.uniform_step) {
            // Weights depend on the offset j-1-c only: cell [t-(off+1)h, t-off h].
            const double h = *grid_.uniform_step;
            toeplitz_.assign(dim, std::vector<std::pair<double, double>>(nt));
            for (std::size_t n = 0; n < dim; ++n) {
                const double mu = prob_.op.eigenvalue(n);
                for (std::size_t off = 0; off + 1 < nt; ++off) {
                    const double t = static_cast<double>(off + 1) * h;
                    toeplitz_[n][off] = solver_detail::cell_weights(alpha, mu, t, 0.0, h, cfg_.quad_refine);
                }
            }
        } else {
            full_.resize(nt);
            for (std::size_t j = 1; j < nt; ++j) {
                full_[j].resize(j * dim);
                for (std::size_t c = 0; c < j; ++c) {
                    for (std::size_t n = 0; n < dim; ++n) {
                        full_[j][c * dim + n] =
                            solver_detail::cell_weights(alpha, prob_.op.eigenvalue(n), grid_.times[j],
                                                        grid_.times[c], grid_.times[c + 1], cfg_.quad_refine);
                    }
                }
            }
        }
    }

    ProblemSpec prob_;
    SolverConfig cfg_;
    GridLayout grid_;
    State phi0_;
    State varphi0_;
    std::vector<double> s_mult_;
    std::vector<double> k_mult_;
    std::vector<std::vector<double>> impulse_s_;
    std::vector<std::vector<double>> impulse_k_;
    std::vector<std::vector<std::pair<double, double>>> toeplitz_;
    std::vector<std::vector<std::pair<double, double>>> full_;
};

/// One application of P to a trajectory laid out on the grid of cfg.h.
inline Trajectory apply_P(const Trajectory& traj, const ProblemSpec& prob, const SolverConfig& cfg) {
    return MildSolutionOperator(prob, cfg).apply(traj);
}

struct SolveResult {
    Trajectory trajectory;
    std::size_t iterations = 0;
    /// Last ratio ||u(n+1) - u(n)|| / ||u(n) - u(n-1)||; 0 when undefined.
    double final_delta = 0.0;
    /// Sup-norm difference of each iterate from its predecessor.
    std::vector<double> differences;
};

/// Picard iteration u(n+1) = P u(n) from the homogeneous initial guess
/// until the sup-norm update is at most cfg.tol.
///
/// `certified_delta`, when given, is a contraction constant established
/// independently; failure to converge with it below one is reported as an
/// internal inconsistency.
inline SolveResult picard_solve(const ProblemSpec& prob, const SolverConfig& cfg,
                                std::optional<double> certified_delta = std::nullopt) {
    const MildSolutionOperator P(prob, cfg);
    SolveResult res;
    Trajectory current = P.initial_guess();
    for (std::size_t it = 1; it <= cfg.max_iter; ++it) {
        Trajectory next = P.apply(current);
        const double diff = solver_detail::sup_difference(next, current);
        res.differences.push_back(diff);
        if (res.differences.size() >= 2) {
            const double prev = res.differences[res.differences.size() - 2];
            res.final_delta = prev > 0.0 ? diff / prev : 0.0;
        }
        current = std::move(next);
        res.iterations = it;
        if (diff <= cfg.tol) {
            res.trajectory = std::move(current);
            return res;
        }
        if (!std::isfinite(diff)) {
            break;
        }
    }
    const bool inconsistent = certified_delta && *certified_delta < 1.0;
    std::ostringstream os;
    os << "picard_solve: no convergence after " << res.iterations << " iterations (last update "
       << (res.differences.empty() ? 0.0 : res.differences.back()) << ", last ratio " << res.final_delta << ")";
    if (inconsistent) {
        os << "; internal inconsistency: contraction constant " << *certified_delta << " < 1 was certified";
    }
    throw ConvergenceError(os.str(), res.final_delta, inconsistent);
}

}  // namespace fracdelay
