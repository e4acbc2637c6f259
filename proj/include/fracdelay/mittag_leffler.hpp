#pragma once

// Two-parameter Mittag-Leffler function E_{a,b}(z) on the real line.
//
// Evaluation routes:
//   * |z| <= kSeriesRadius or z > 0: compensated power series.
//   * z < -kSeriesRadius, 0 < a < 2: Hankel contour collapsed onto the branch
//     cut, i.e. a real integral over (0, inf) plus the residues of the two
//     conjugate poles when a > 1.
//   * b >= a + 1 on the negative axis: downward recurrence
//     E_{a,b}(z) = (E_{a,b-a}(z) - 1/Gamma(b-a)) / z, since the cut integral
//     diverges at the origin for those b.
// Whenever a route cannot guarantee kAbsTol it raises AccuracyError.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <sstream>
#include <utility>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "fracdelay/errors.hpp"

namespace fracdelay {

/// Euler gamma function with explicit pole and overflow reporting.
inline double gamma(double x) {
    if (!std::isfinite(x)) {
        throw DomainError("gamma: argument is not finite");
    }
    if (x <= 0.0 && x == std::floor(x)) {
        std::ostringstream os;
        os << "gamma: pole at non-positive integer " << x;
        throw DomainError(os.str());
    }
    const double g = std::tgamma(x);
    if (!std::isfinite(g)) {
        std::ostringstream os;
        os << "gamma: result overflows for x = " << x;
        throw OverflowError(os.str());
    }
    return g;
}

/// Parameters (alpha, beta) of E_{alpha,beta}; both strictly positive.
class MLParams {
public:
    MLParams(double alpha, double beta) : alpha_(alpha), beta_(beta) {
        if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
            std::ostringstream os;
            os << "MLParams: alpha and beta must be positive and finite (got alpha=" << alpha
               << ", beta=" << beta << ")";
            throw DomainError(os.str());
        }
    }

    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }

private:
    double alpha_;
    double beta_;
};

namespace ml_detail {

inline constexpr double kSeriesRadius = 10.0;
inline constexpr double kAbsTol = 1e-10;
inline constexpr std::size_t kMaxTerms = 20000;

struct SeriesSum {
    double value = 0.0;
    double max_term = 0.0;
};

/// Kahan-summed sum_k z^k / Gamma(a k + b).
inline SeriesSum series(double a, double b, double z) {
    SeriesSum out;
    double sum = 0.0;
    double carry = 0.0;
    const double log_abs_z = z != 0.0 ? std::log(std::abs(z)) : 0.0;
    double prev_abs = std::numeric_limits<double>::infinity();

    for (std::size_t k = 0; k < kMaxTerms; ++k) {
        const double arg = a * static_cast<double>(k) + b;
        double term;
        if (k == 0) {
            term = 1.0 / std::tgamma(b);
        } else if (z == 0.0) {
            break;
        } else {
            const double kd = static_cast<double>(k);
            if (arg < 170.0 && kd * log_abs_z < 600.0) {
                term = std::pow(z, kd) / std::tgamma(arg);
            } else {
                term = std::exp(kd * log_abs_z - std::lgamma(arg));
                if (z < 0.0 && (k % 2 == 1)) {
                    term = -term;
                }
            }
        }
        const double y = term - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;

        const double abs_term = std::abs(term);
        out.max_term = std::max(out.max_term, abs_term);
        const bool decreasing = abs_term <= prev_abs;
        prev_abs = abs_term;
        if (k > 2 && decreasing && abs_term <= 1e-17 * std::max(std::abs(sum), 1e-300)) {
            break;
        }
        if (k > 2 && decreasing && abs_term == 0.0) {
            break;
        }
    }
    out.value = sum;
    return out;
}

inline bool series_trustworthy(const SeriesSum& s) {
    const double err = 8.0 * std::numeric_limits<double>::epsilon() * s.max_term;
    return std::isfinite(s.value) && err <= 0.1 * kAbsTol * std::max(1.0, std::abs(s.value));
}

// integrate() is not const-qualified for one-argument integrands in older
// Boost releases, so each thread keeps its own mutable rule.
inline boost::math::quadrature::tanh_sinh<double>& tanh_sinh_rule() {
    thread_local boost::math::quadrature::tanh_sinh<double> rule;
    return rule;
}

/// Integral over [lo, hi] with lo >= 0. Segments starting near 0 can carry
/// the r^{a-b} singularity and use tanh-sinh. Boost 1.74's tanh-sinh may
/// evaluate the integrand exactly at a left endpoint of size 0.5 or more, so
/// those segments, which are smooth, use adaptive Gauss-Kronrod.
///
/// The bisection depth is capped: on short segments rounding noise in the
/// integrand can keep the error estimate above tol forever, and each extra
/// level doubles the work.
inline constexpr unsigned kKronrodDepth = 10;

template <class F>
double integrate_segment(const F& f, double lo, double hi, double tol) {
    if (lo < 0.5) {
        return tanh_sinh_rule().integrate(f, lo, hi, tol);
    }
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, kKronrodDepth, tol);
}

/// E_{a,b}(-x) for x > 0, 0 < a < 2, a != 1, b < a + 1.
inline double negative_axis_integral(double a, double b, double x) {
    constexpr double pi = std::numbers::pi;
    const double sb = std::sin(pi * b);
    const double sab = std::sin(pi * (a - b));
    const double c = std::cos(pi * a);

    auto integrand = [=](double r) {
        if (r <= 0.0) {
            return 0.0;
        }
        // Divided through by x so that x^2 never forms (it overflows past 1e154).
        const double q = std::pow(r, a) / x;
        const double den = x * (q * q + 2.0 * q * c + 1.0);
        return std::pow(r, a - b) * std::exp(-r) * (q * sb - sab) / den;
    };

    // e^{-r} is below 1e-26 past the cutoff.
    constexpr double cutoff = 60.0;
    double breaks[5] = {0.0, 1.0, std::pow(x, 1.0 / a), std::pow(x * std::abs(c), 1.0 / a), cutoff};
    std::sort(std::begin(breaks), std::end(breaks));

    double total = 0.0;
    double lo = 0.0;
    for (double hi : breaks) {
        if (hi <= lo || hi > cutoff) {
            continue;
        }
        total += integrate_segment(integrand, lo, hi, 1e-13);
        lo = hi;
    }
    total /= pi;

    if (a > 1.0) {
        const std::complex<double> pole = std::polar(std::pow(x, 1.0 / a), pi / a);
        total += (2.0 / a) * std::real(std::pow(pole, 1.0 - b) * std::exp(pole));
    }
    return total;
}

inline double evaluate(double a, double b, double z, int depth) {
    if (z == 0.0) {
        return 1.0 / gamma(b);
    }

    const bool prefer_series = z > 0.0 || std::abs(z) <= kSeriesRadius;
    if (prefer_series) {
        const SeriesSum s = series(a, b, z);
        if (!std::isfinite(s.value)) {
            std::ostringstream os;
            os << "ml_e: E_{" << a << "," << b << "}(" << z << ") overflows";
            throw OverflowError(os.str());
        }
        if (series_trustworthy(s)) {
            return s.value;
        }
        if (z > 0.0) {
            // Positive terms: relative accuracy is what the series delivers.
            return s.value;
        }
    }

    if (b >= a + 1.0 && depth < 64) {
        return (evaluate(a, b - a, z, depth + 1) - 1.0 / gamma(b - a)) / z;
    }
    if (a < 2.0 && std::abs(std::sin(std::numbers::pi * a)) > 1e-3) {
        return negative_axis_integral(a, b, -z);
    }

    const SeriesSum s = series(a, b, z);
    if (series_trustworthy(s)) {
        return s.value;
    }
    std::ostringstream os;
    os << "ml_e: cannot reach tolerance " << kAbsTol << " for E_{" << a << "," << b << "}(" << z
       << ") (series cancellation, largest term " << s.max_term << ")";
    throw AccuracyError(os.str());
}

}  // namespace ml_detail

/// E_{alpha,beta}(z) for real z.
///
/// Absolute accuracy is kAbsTol for values of order one; for large positive
/// arguments, where the function grows like exp(z^{1/alpha}), the bound is
/// relative.
inline double ml_e(const MLParams& params, double z) {
    if (!std::isfinite(z)) {
        throw DomainError("ml_e: argument is not finite");
    }
    return ml_detail::evaluate(params.alpha(), params.beta(), z, 0);
}

/// Both sides of the Laplace pair
///   int_0^inf e^{-lambda t} t^{beta-1} E_{alpha,beta}(omega t^alpha) dt
///     = lambda^{alpha-beta} / (lambda^alpha - omega),
/// the left one by quadrature. Valid for lambda > omega^{1/alpha}, omega > 0.
inline std::pair<double, double> ml_laplace_check(const MLParams& params, double omega, double lambda) {
    const double a = params.alpha();
    const double b = params.beta();
    if (!(omega > 0.0)) {
        throw DomainError("ml_laplace_check: omega must be positive");
    }
    const double abscissa = std::pow(omega, 1.0 / a);
    if (!(lambda > abscissa)) {
        std::ostringstream os;
        os << "ml_laplace_check: lambda=" << lambda << " must exceed omega^(1/alpha)=" << abscissa;
        throw DomainError(os.str());
    }

    const double rhs = std::pow(lambda, a - b) / (std::pow(lambda, a) - omega);

    auto integrand = [&](double t) {
        if (t <= 0.0) {
            return 0.0;
        }
        return std::exp(-lambda * t) * std::pow(t, b - 1.0) * ml_e(params, omega * std::pow(t, a));
    };

    // The integrand decays like exp(-(lambda - omega^{1/alpha}) t).
    const double gap = lambda - abscissa;
    const double t_end = 1.0 + 45.0 / gap;
    double lhs = ml_detail::integrate_segment(integrand, 0.0, 1.0, 1e-12);
    double lo = 1.0;
    const double seg = std::max(1.0, 4.0 / gap);
    while (lo < t_end) {
        const double hi = std::min(t_end, lo + seg);
        lhs += ml_detail::integrate_segment(integrand, lo, hi, 1e-12);
        lo = hi;
    }
    return {lhs, rhs};
}

}  // namespace fracdelay
