#pragma once

// Discrete Riemann-Liouville integrals and Caputo derivatives of sampled
// vector-valued functions. Lower limit is always the first grid node.

#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include "fracdelay/errors.hpp"
#include "fracdelay/mittag_leffler.hpp"
#include "fracdelay/state.hpp"

namespace fracdelay {

/// Samples of a function R -> R^N on a strictly increasing grid.
struct SampledFunction {
    std::vector<double> grid;
    std::vector<State> values;

    std::size_t size() const noexcept { return grid.size(); }
    std::size_t dimension() const noexcept { return values.empty() ? 0 : values.front().size(); }

    void validate() const {
        if (grid.size() != values.size()) {
            throw ShapeError("SampledFunction: grid and values differ in length");
        }
        for (std::size_t i = 1; i < grid.size(); ++i) {
            if (!(grid[i] > grid[i - 1])) {
                throw ShapeError("SampledFunction: grid must be strictly increasing");
            }
        }
        for (const auto& v : values) {
            if (v.size() != dimension()) {
                throw ShapeError("SampledFunction: inconsistent state dimension");
            }
        }
    }
};

namespace fraccalc_detail {

/// Weights (w_left, w_right) such that
///   int_a^b (t - s)^{alpha-1} p(s) ds = w_left p(a) + w_right p(b)
/// for every linear p, with t >= b.
inline std::pair<double, double> linear_moments(double t, double a, double b, double alpha) {
    const double ta = t - a;
    const double tb = t - b;
    const double h = b - a;
    const double i0 = (std::pow(ta, alpha) - std::pow(tb, alpha)) / alpha;
    // int (t-s)^{alpha-1} (s - a) ds
    const double i1 = ta * i0 - (std::pow(ta, alpha + 1.0) - std::pow(tb, alpha + 1.0)) / (alpha + 1.0);
    return {i0 - i1 / h, i1 / h};
}

inline double uniform_step(std::span<const double> grid) {
    const double h = (grid.back() - grid.front()) / static_cast<double>(grid.size() - 1);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (std::abs((grid[i] - grid[i - 1]) - h) > 1e-9 * h) {
            throw ShapeError("caputo_derivative: grid is not uniform");
        }
    }
    return h;
}

}  // namespace fraccalc_detail

/// (J^alpha f)(t_j) at every node by product-trapezoidal quadrature: f is
/// replaced by its piecewise-linear interpolant and integrated exactly
/// against (t_j - s)^{alpha-1} / Gamma(alpha).
inline SampledFunction rl_integral(const SampledFunction& f, double alpha) {
    f.validate();
    if (f.size() < 2) {
        throw ShapeError("rl_integral: need at least two grid points");
    }
    if (!(alpha > 0.0)) {
        throw DomainError("rl_integral: alpha must be positive");
    }

    const std::size_t n = f.size();
    const std::size_t dim = f.dimension();
    const double scale = 1.0 / gamma(alpha);

    SampledFunction out;
    out.grid = f.grid;
    out.values.assign(n, State(dim, 0.0));
    for (std::size_t j = 1; j < n; ++j) {
        State& acc = out.values[j];
        for (std::size_t i = 0; i < j; ++i) {
            const auto [wl, wr] = fraccalc_detail::linear_moments(f.grid[j], f.grid[i], f.grid[i + 1], alpha);
            for (std::size_t c = 0; c < dim; ++c) {
                acc[c] += wl * f.values[i][c] + wr * f.values[i + 1][c];
            }
        }
        for (double& v : acc) {
            v *= scale;
        }
    }
    return out;
}

/// Caputo derivative of order alpha in (1,2) on a uniform grid.
///
/// Uses D^alpha u = d^2/dt^2 J^{2-alpha}[u - u(a) - u1 (t - a)], where u1 is
/// u'(a). The bracket vanishes to second order at a, so the fractional
/// integral is C^2 even when u'' blows up like (t-a)^{alpha-2}; its second
/// derivative is then taken by central differences (one-sided, second
/// order, at the two ends).
inline SampledFunction caputo_derivative(const SampledFunction& u, std::span<const double> u1, double alpha) {
    u.validate();
    if (!(alpha > 1.0 && alpha < 2.0)) {
        throw DomainError("caputo_derivative: alpha must lie in (1,2)");
    }
    if (u.size() < 5) {
        throw ShapeError("caputo_derivative: need at least five grid points");
    }
    if (u1.size() != u.dimension()) {
        throw ShapeError("caputo_derivative: initial derivative has wrong dimension");
    }
    const double h = fraccalc_detail::uniform_step(u.grid);
    const std::size_t n = u.size();
    const std::size_t dim = u.dimension();
    const double a = u.grid.front();

    SampledFunction shifted;
    shifted.grid = u.grid;
    shifted.values.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        shifted.values[j].resize(dim);
        for (std::size_t c = 0; c < dim; ++c) {
            shifted.values[j][c] = u.values[j][c] - u.values[0][c] - u1[c] * (u.grid[j] - a);
        }
    }
    const SampledFunction w = rl_integral(shifted, 2.0 - alpha);

    SampledFunction out;
    out.grid = u.grid;
    out.values.assign(n, State(dim, 0.0));
    const double inv_h2 = 1.0 / (h * h);
    for (std::size_t c = 0; c < dim; ++c) {
        auto at = [&](std::size_t j) { return w.values[j][c]; };
        out.values[0][c] = (2.0 * at(0) - 5.0 * at(1) + 4.0 * at(2) - at(3)) * inv_h2;
        for (std::size_t j = 1; j + 1 < n; ++j) {
            out.values[j][c] = (at(j + 1) - 2.0 * at(j) + at(j - 1)) * inv_h2;
        }
        const std::size_t e = n - 1;
        out.values[e][c] = (2.0 * at(e) - 5.0 * at(e - 1) + 4.0 * at(e - 2) - at(e - 3)) * inv_h2;
    }
    return out;
}

}  // namespace fracdelay
