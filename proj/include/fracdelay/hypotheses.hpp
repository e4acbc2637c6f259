#pragma once

// Checkable constants of the three existence results:
//   contraction      Delta = M [ m l_i + m l_j + int_0^T l_f ] < 1
//   Krasnoselskii    Theta = M int_0^T m_f < 1, ball radius r_min
//   Leray-Schauder   M int_0^T m_f < int_{C'}^inf ds / Omega_f(s),
//                    C' = M [ |phi(0)| + |varphi(0)| + m C_i + m C_j ]
//
// The Krasnoselskii and Leray-Schauder checks share the growth weight m_f
// but read the growth of f differently: a bounded-ball estimate for the
// first, the comparison function Omega_f for the second.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fracdelay/errors.hpp"
#include "fracdelay/state.hpp"

namespace fracdelay {

struct LipschitzData {
    ScalarFn l_f = [](double) { return 0.0; };      ///< Lipschitz function of f
    double l_i = 0.0;                               ///< Lipschitz constant of the impulse maps I_k
    double l_j = 0.0;                               ///< Lipschitz constant of the maps Q_k
    ScalarFn m_f = [](double) { return 0.0; };      ///< growth weight of f
    double C_i = 0.0;                               ///< bound on |I_k|
    double C_j = 0.0;                               ///< bound on |Q_k|
    ScalarFn Omega_f = [](double s) { return 1.0 + s; };
    std::size_t m = 0;                              ///< impulse count
    double M = 1.0;                                 ///< operator-function bound
    double phi0_norm = 0.0;
    double varphi0_norm = 0.0;

    void validate() const {
        if (!l_f || !m_f || !Omega_f) {
            throw DomainError("LipschitzData: l_f, m_f and Omega_f are required");
        }
        for (double x : {l_i, l_j, C_i, C_j, M, phi0_norm, varphi0_norm}) {
            if (!(x >= 0.0) || !std::isfinite(x)) {
                throw DomainError("LipschitzData: constants must be finite and non-negative");
            }
        }
    }
};

namespace hypotheses_detail {

/// Adaptive Gauss-Kronrod on [a, b].
inline double integrate(const ScalarFn& fn, double a, double b) {
    if (b <= a) {
        return 0.0;
    }
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(fn, a, b, 15, 1e-12);
}

/// int_a^b ds / Omega(s) with a log substitution beyond a + 1.
inline double reciprocal_integral(const ScalarFn& omega, double a, double b) {
    auto inv = [&](double s) {
        const double w = omega(s);
        if (!(w > 0.0)) {
            std::ostringstream os;
            os << "Omega_f must be positive, got Omega_f(" << s << ") = " << w;
            throw DomainError(os.str());
        }
        return 1.0 / w;
    };
    const double mid = std::min(b, a + 1.0);
    double total = integrate(inv, a, mid);
    if (b > mid) {
        const double lo = std::log(mid);
        const double hi = std::log(b);
        // Split the log range so every panel is resolved.
        const int panels = std::max(1, static_cast<int>(std::ceil(hi - lo)));
        for (int p = 0; p < panels; ++p) {
            const double x0 = lo + (hi - lo) * p / panels;
            const double x1 = lo + (hi - lo) * (p + 1) / panels;
            total += integrate([&](double x) { return std::exp(x) * inv(std::exp(x)); }, x0, x1);
        }
    }
    return total;
}

inline void check_horizon(double T) {
    if (!(T > 0.0) || !std::isfinite(T)) {
        throw DomainError("hypotheses: horizon T must be positive");
    }
}

}  // namespace hypotheses_detail

struct ContractionCheck {
    double delta = 0.0;
    bool pass = false;
};

inline ContractionCheck check_contraction(const LipschitzData& data, double T) {
    data.validate();
    hypotheses_detail::check_horizon(T);
    const double m = static_cast<double>(data.m);
    const double lf = hypotheses_detail::integrate(data.l_f, 0.0, T);
    ContractionCheck out;
    out.delta = data.M * (m * data.l_i + m * data.l_j + lf);
    out.pass = out.delta < 1.0;
    return out;
}

struct KrasnoselskiiCheck {
    double theta = 0.0;
    std::optional<double> r_min;  ///< none when theta >= 1
    bool pass = false;
};

inline double growth_constant(const LipschitzData& data) {
    const double m = static_cast<double>(data.m);
    return data.M * (data.phi0_norm + data.varphi0_norm + m * data.C_i + m * data.C_j);
}

inline KrasnoselskiiCheck check_krasnoselskii(const LipschitzData& data, double T) {
    data.validate();
    hypotheses_detail::check_horizon(T);
    KrasnoselskiiCheck out;
    out.theta = data.M * hypotheses_detail::integrate(data.m_f, 0.0, T);
    out.pass = out.theta < 1.0;
    if (out.pass) {
        out.r_min = growth_constant(data) / (1.0 - out.theta);
    }
    return out;
}

struct LeraySchauderCheck {
    double C_prime = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;        ///< truncated at s_max
    bool rhs_infinite = false;  ///< tail judged divergent
    double s_max = 0.0;
    bool pass = false;
};

/// Default truncation of the improper integral.
inline constexpr double kDefaultSMax = 1e6;

inline LeraySchauderCheck check_leray_schauder(const LipschitzData& data, double T, double s_max = kDefaultSMax) {
    data.validate();
    hypotheses_detail::check_horizon(T);
    LeraySchauderCheck out;
    out.C_prime = growth_constant(data);
    out.s_max = s_max;
    if (!(s_max > out.C_prime)) {
        std::ostringstream os;
        os << "check_leray_schauder: s_max=" << s_max << " must exceed C'=" << out.C_prime;
        throw DomainError(os.str());
    }
    out.lhs = data.M * hypotheses_detail::integrate(data.m_f, 0.0, T);
    out.rhs = hypotheses_detail::reciprocal_integral(data.Omega_f, out.C_prime, s_max);

    // Divergence heuristic: s / Omega(s) not decaying over the last two
    // decades means 1/Omega is not integrable at infinity.
    const double lo = std::max(out.C_prime + 1.0, s_max / 100.0);
    const double tail_hi = s_max / data.Omega_f(s_max);
    const double tail_lo = lo / data.Omega_f(lo);
    out.rhs_infinite = tail_lo > 0.0 && tail_hi >= 0.8 * tail_lo;

    out.pass = out.rhs_infinite ? std::isfinite(out.lhs) : out.lhs < out.rhs;
    return out;
}

struct HypothesisReport {
    ContractionCheck contraction;
    KrasnoselskiiCheck krasnoselskii;
    LeraySchauderCheck leray_schauder;

    bool any_pass() const noexcept {
        return contraction.pass || krasnoselskii.pass || leray_schauder.pass;
    }
};

inline HypothesisReport check_all(const LipschitzData& data, double T, double s_max = kDefaultSMax) {
    return {check_contraction(data, T), check_krasnoselskii(data, T), check_leray_schauder(data, T, s_max)};
}

}  // namespace fracdelay
