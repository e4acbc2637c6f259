#pragma once

// Reference solver that marches the Volterra form
//   u(t) = u0 + u1 t + sum_i chi(t > t_i) [ I_i + Q_i (t - t_i) ]
//        + 1/Gamma(alpha) int_0^t (t-s)^{alpha-1} [ A u(s) + f(s, u(rho)) ] ds
// directly, with right-endpoint product rectangles. It uses neither
// Mittag-Leffler functions nor operator functions, so agreement with the
// mild-solution solver is an independent check of both.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <vector>

#include "fracdelay/errors.hpp"
#include "fracdelay/problem.hpp"
#include "fracdelay/state.hpp"

namespace fracdelay {

struct OracleConfig {
    double h = 1.0 / 256.0;
    std::size_t picard_inner = 200;
    double tol_inner = 1e-14;
};

inline Trajectory volterra_solve(const ProblemSpec& prob, const OracleConfig& cfg) {
    prob.validate();
    if (!(cfg.h > 0.0) || cfg.picard_inner < 1 || !(cfg.tol_inner > 0.0)) {
        throw DomainError("oracle config: need h > 0, picard_inner >= 1, tol_inner > 0");
    }
    const GridLayout grid = GridLayout::build(prob, cfg.h);
    Trajectory tr = Trajectory::skeleton(prob, grid);
    const std::size_t dim = prob.dimension();
    const double alpha = prob.alpha;
    const double inv_gamma = 1.0 / std::tgamma(alpha + 1.0);
    const State u0 = prob.phi0();
    const State u1 = prob.varphi0();
    const auto ev = prob.op.eigenvalues();

    // g(s_c) = A u(s_c) + f(s_c, .) at the left copy of each distinct time:
    // the right endpoint of the cell ending there.
    std::vector<State> g(grid.times.size());
    std::vector<State> jumps;
    std::vector<State> djumps;
    std::size_t next_imp = 0;

    auto integrand = [&](std::size_t node) {
        State out = forcing_at_node(prob, tr, node);
        for (std::size_t n = 0; n < dim; ++n) {
            out[n] += ev[n] * tr.values[node][n];
        }
        return out;
    };

    for (std::size_t j = 0; j < grid.times.size(); ++j) {
        const std::size_t node = tr.left_node[j];
        if (j == 0) {
            tr.values[node] = u0;
        } else {
            const double t = grid.times[j];
            State known(dim);
            for (std::size_t n = 0; n < dim; ++n) {
                known[n] = u0[n] + u1[n] * t;
            }
            for (std::size_t k = 0; k < jumps.size(); ++k) {
                const double tk = prob.impulses[k].time;
                for (std::size_t n = 0; n < dim; ++n) {
                    known[n] += jumps[k][n] + djumps[k][n] * (t - tk);
                }
            }
            for (std::size_t c = 1; c < j; ++c) {
                const double w =
                    (std::pow(t - grid.times[c - 1], alpha) - std::pow(t - grid.times[c], alpha)) * inv_gamma;
                for (std::size_t n = 0; n < dim; ++n) {
                    known[n] += w * g[c][n];
                }
            }
            const double w_last = std::pow(t - grid.times[j - 1], alpha) * inv_gamma;

            // u_j = known + w_last g(u_j): implicit in the last cell.
            tr.values[node] = tr.values[tr.right_node[j - 1]];
            bool converged = false;
            for (std::size_t it = 0; it < cfg.picard_inner; ++it) {
                const State gj = integrand(node);
                State next(dim);
                double change = 0.0;
                double scale = 1.0;
                for (std::size_t n = 0; n < dim; ++n) {
                    next[n] = known[n] + w_last * gj[n];
                    change = std::max(change, std::abs(next[n] - tr.values[node][n]));
                    scale = std::max(scale, std::abs(next[n]));
                }
                tr.values[node] = std::move(next);
                if (!std::isfinite(change)) {
                    break;
                }
                if (change <= cfg.tol_inner * scale) {
                    converged = true;
                    break;
                }
            }
            if (!converged) {
                std::ostringstream os;
                os << "volterra_solve: inner iteration did not converge at t=" << t
                   << " (step too large for the operator norm)";
                throw ConvergenceError(os.str(), 1.0);
            }
        }
        g[j] = integrand(node);

        if (next_imp < grid.impulse_at.size() && grid.impulse_at[next_imp] == j) {
            const Impulse& imp = prob.impulses[next_imp];
            const State& left = tr.values[node];
            State jump = imp.jump(left);
            State djump = imp.derivative_jump(left);
            if (jump.size() != dim || djump.size() != dim) {
                throw ShapeError("impulse map returned a state of the wrong dimension");
            }
            State right = left;
            for (std::size_t n = 0; n < dim; ++n) {
                right[n] += jump[n];
            }
            tr.values[tr.right_node[j]] = std::move(right);
            jumps.push_back(std::move(jump));
            djumps.push_back(std::move(djump));
            ++next_imp;
        }
    }
    return tr;
}

struct Comparison {
    double sup_gap = 0.0;
    std::vector<double> per_piece_gaps;
};

/// Sup-norm gap between two trajectories of the same problem, sampled at
/// the solution nodes of the coarser one (side-aware at impulse times).
inline Comparison compare(const Trajectory& a, const Trajectory& b) {
    if (std::abs(a.horizon() - b.horizon()) > 1e-12 * std::max(1.0, a.horizon())) {
        throw ShapeError("compare: trajectories have different horizons");
    }
    if (a.dimension() != b.dimension()) {
        throw ShapeError("compare: trajectories have different state dimensions");
    }
    const std::vector<double> ia = a.impulse_times();
    const std::vector<double> ib = b.impulse_times();
    if (ia.size() != ib.size()) {
        throw ShapeError("compare: trajectories have different impulse counts");
    }

    const Trajectory& coarse = a.size() <= b.size() ? a : b;
    const Trajectory& fine = a.size() <= b.size() ? b : a;

    Comparison out;
    out.per_piece_gaps.assign(ia.size() + 1, 0.0);
    std::size_t piece = 0;
    for (std::size_t i = coarse.origin; i < coarse.size(); ++i) {
        const double t = coarse.times[i];
        if (coarse.sides[i] == Side::Right) {
            ++piece;
        }
        const State other = coarse.sides[i] == Side::Right ? fine.right_limit(t) : fine.at(t);
        double gap = 0.0;
        for (std::size_t c = 0; c < other.size(); ++c) {
            gap = std::max(gap, std::abs(coarse.values[i][c] - other[c]));
        }
        out.per_piece_gaps[piece] = std::max(out.per_piece_gaps[piece], gap);
        out.sup_gap = std::max(out.sup_gap, gap);
    }
    return out;
}

}  // namespace fracdelay
