#pragma once

// Residual of the differential form D^alpha u = A u + f(t, u(rho)) for a
// computed trajectory.
//
// Impulses make u discontinuous, so the Caputo derivative is taken of
//   v(t) = u(t) - sum_{t_i < t} [ I_i(u(t_i^-)) + Q_i(u(t_i^-)) (t - t_i) ],
// which is C^1 on [0, T] and satisfies D^alpha v = A u + f with lower limit 0.
// Residuals are reported on the interior of each smooth piece only.
//
// The forcing also jumps wherever the delayed argument crosses an impulse
// time, which no finite difference resolves; a few cells around each such
// crossing are skipped.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "fracdelay/errors.hpp"
#include "fracdelay/fraccalc.hpp"
#include "fracdelay/problem.hpp"
#include "fracdelay/state.hpp"

namespace fracdelay {

struct PieceResidual {
    double start = 0.0;
    double end = 0.0;
    std::size_t nodes = 0;  ///< interior nodes inspected
    std::size_t skipped = 0;  ///< interior nodes next to a delayed jump
    double max_residual = 0.0;
};

struct ResidualReport {
    /// Largest |u - phi| on the history nodes and at t = 0.
    PieceResidual history;
    std::vector<PieceResidual> pieces;

    double max_residual() const noexcept {
        double m = history.max_residual;
        for (const auto& p : pieces) {
            m = std::max(m, p.max_residual);
        }
        return m;
    }
};

/// Cells skipped on each side of a delayed jump.
inline constexpr std::size_t kDelayedJumpGuard = 2;

/// `margin` is the fraction of each piece's length excluded at both ends.
inline ResidualReport verify_residual(const ProblemSpec& prob, const Trajectory& traj, double margin = 0.1) {
    if (traj.dimension() != prob.dimension()) {
        throw ShapeError("verify_residual: trajectory dimension differs from the problem");
    }
    if (!(margin >= 0.0 && margin < 0.5)) {
        throw DomainError("verify_residual: margin must lie in [0, 0.5)");
    }
    const std::size_t dim = prob.dimension();
    const std::vector<double> impulse_times = traj.impulse_times();
    if (impulse_times.size() != prob.impulses.size()) {
        throw ShapeError("verify_residual: trajectory and problem disagree on the impulse count");
    }

    ResidualReport report;
    report.history.start = traj.start();
    for (std::size_t i = 0; i <= traj.origin; ++i) {
        const State expected = prob.phi(traj.times[i]);
        for (std::size_t c = 0; c < dim; ++c) {
            report.history.max_residual = std::max(report.history.max_residual, std::abs(traj.values[i][c] - expected[c]));
        }
        ++report.history.nodes;
    }

    // Left values on the distinct solution times.
    SampledFunction v;
    std::vector<std::size_t> node_of;
    for (std::size_t i = traj.origin; i < traj.size(); ++i) {
        if (traj.sides[i] == Side::Right) {
            continue;
        }
        v.grid.push_back(traj.times[i]);
        v.values.push_back(traj.values[i]);
        node_of.push_back(i);
    }

    std::vector<State> jump(impulse_times.size());
    std::vector<State> djump(impulse_times.size());
    for (std::size_t k = 0; k < impulse_times.size(); ++k) {
        const State left = traj.at(impulse_times[k]);
        jump[k] = prob.impulses[k].jump(left);
        djump[k] = prob.impulses[k].derivative_jump(left);
    }
    for (std::size_t j = 0; j < v.size(); ++j) {
        const double t = v.grid[j];
        for (std::size_t k = 0; k < impulse_times.size() && impulse_times[k] < t; ++k) {
            for (std::size_t c = 0; c < dim; ++c) {
                v.values[j][c] -= jump[k][c] + djump[k][c] * (t - impulse_times[k]);
            }
        }
    }

    const SampledFunction dv = caputo_derivative(v, traj.u1, prob.alpha);

    // Delayed reads see u(t_k^+) once the target passes t_k.
    std::vector<bool> near_jump(v.size(), false);
    std::vector<double> target(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) {
        target[j] = prob.delay.target(v.grid[j], traj.values[node_of[j]], prob.depth);
    }
    for (std::size_t j = 1; j < v.size(); ++j) {
        for (double tk : impulse_times) {
            if ((target[j - 1] > tk) == (target[j] > tk)) {
                continue;
            }
            const std::size_t lo = j - 1 >= kDelayedJumpGuard ? j - 1 - kDelayedJumpGuard : 0;
            const std::size_t hi = std::min(v.size() - 1, j + kDelayedJumpGuard);
            for (std::size_t i = lo; i <= hi; ++i) {
                near_jump[i] = true;
            }
        }
    }

    std::vector<double> breaks{0.0};
    breaks.insert(breaks.end(), impulse_times.begin(), impulse_times.end());
    breaks.push_back(traj.horizon());

    for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
        PieceResidual piece;
        piece.start = breaks[p];
        piece.end = breaks[p + 1];
        const double len = piece.end - piece.start;
        const double lo = piece.start + margin * len;
        const double hi = piece.end - margin * len;
        for (std::size_t j = 0; j < v.size(); ++j) {
            const double t = v.grid[j];
            if (t <= piece.start || t >= piece.end || t < lo || t > hi) {
                continue;
            }
            if (near_jump[j]) {
                ++piece.skipped;
                continue;
            }
            const std::size_t node = node_of[j];
            const State f = forcing_at_node(prob, traj, node);
            for (std::size_t c = 0; c < dim; ++c) {
                const double r = dv.values[j][c] - prob.op.eigenvalue(c) * traj.values[node][c] - f[c];
                piece.max_residual = std::max(piece.max_residual, std::abs(r));
            }
            ++piece.nodes;
        }
        report.pieces.push_back(piece);
    }
    return report;
}

}  // namespace fracdelay
