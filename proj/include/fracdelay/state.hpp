#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace fracdelay {

/// A point of the state space in eigen-coordinates.
using State = std::vector<double>;

using ScalarFn = std::function<double(double)>;

/// Largest absolute coordinate.
inline double max_abs(std::span<const double> v) noexcept {
    double m = 0.0;
    for (double x : v) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

/// Euclidean norm; equals the L2 norm of the represented function when the
/// coordinates refer to an orthonormal basis.
inline double euclidean_norm(std::span<const double> v) noexcept {
    double s = 0.0;
    for (double x : v) {
        s += x * x;
    }
    return std::sqrt(s);
}

}  // namespace fracdelay
