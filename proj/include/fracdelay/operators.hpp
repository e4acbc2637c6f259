#pragma once

// Sectorial operators given by a real spectral decomposition, and the
// operator functions W_{alpha,beta}(t) they generate:
//   S(t) = E_{a,1}(A t^a),  K(t) = t E_{a,2}(A t^a),  T(t) = t^{a-1} E_{a,a}(A t^a),
// evaluated mode by mode in eigen-coordinates.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fracdelay/errors.hpp"
#include "fracdelay/mittag_leffler.hpp"
#include "fracdelay/state.hpp"

namespace fracdelay {

/// Sector data (M, theta, alpha, mu) attached to an operator.
struct SectorialParams {
    double M = 1.0;
    double theta = 0.75 * std::numbers::pi;
    double alpha = 1.5;
    double mu = 0.0;
};

class SpectralOperator {
public:
    explicit SpectralOperator(std::vector<double> eigenvalues, std::string label = {},
                              std::optional<SectorialParams> sectorial = std::nullopt)
        : eigenvalues_(std::move(eigenvalues)), label_(std::move(label)), sectorial_(sectorial) {
        if (eigenvalues_.empty()) {
            throw DomainError("SpectralOperator: at least one eigenvalue is required");
        }
        for (double mu : eigenvalues_) {
            if (!std::isfinite(mu)) {
                throw DomainError("SpectralOperator: eigenvalues must be finite");
            }
        }
        if (sectorial_) {
            const auto& s = *sectorial_;
            if (!(s.M >= 1.0) || !(s.theta > std::numbers::pi / 2 && s.theta < std::numbers::pi) ||
                !(s.alpha > 1.0 && s.alpha < 2.0)) {
                throw DomainError("SpectralOperator: sectorial parameters need M >= 1, theta in (pi/2, pi), "
                                  "alpha in (1,2)");
            }
        }
    }

    std::size_t size() const noexcept { return eigenvalues_.size(); }
    std::span<const double> eigenvalues() const noexcept { return eigenvalues_; }
    double eigenvalue(std::size_t n) const { return eigenvalues_.at(n); }
    const std::string& label() const noexcept { return label_; }
    const std::optional<SectorialParams>& sectorial() const noexcept { return sectorial_; }

    /// Accepted as sectorial of the attached type when mu <= 0 and the whole
    /// spectrum lies at or left of mu. Only checkable for real spectra.
    bool is_sectorial() const noexcept {
        if (!sectorial_) {
            return false;
        }
        const double mu = sectorial_->mu;
        return mu <= 0.0 && std::all_of(eigenvalues_.begin(), eigenvalues_.end(), [mu](double e) { return e <= mu; });
    }

private:
    std::vector<double> eigenvalues_;
    std::string label_;
    std::optional<SectorialParams> sectorial_;
};

/// Dirichlet Laplacian on (0, pi) truncated to its first n_modes sine modes.
inline SpectralOperator make_heat_operator(std::size_t n_modes) {
    if (n_modes == 0) {
        throw DomainError("make_heat_operator: n_modes must be at least 1");
    }
    std::vector<double> ev(n_modes);
    for (std::size_t n = 1; n <= n_modes; ++n) {
        const double nd = static_cast<double>(n);
        ev[n - 1] = -nd * nd;
    }
    return SpectralOperator(std::move(ev), "heat");
}

/// Which operator function: S (beta = 1), K (beta = 2) or T (beta = alpha).
enum class OpKind { S, K, T };

inline double beta_of(OpKind kind, double alpha) noexcept {
    switch (kind) {
    case OpKind::S:
        return 1.0;
    case OpKind::K:
        return 2.0;
    case OpKind::T:
        return alpha;
    }
    return 1.0;
}

inline const char* to_string(OpKind kind) noexcept {
    switch (kind) {
    case OpKind::S:
        return "S";
    case OpKind::K:
        return "K";
    case OpKind::T:
        return "T";
    }
    return "?";
}

/// Scalar multiplier of one eigenmode: t^{beta-1} E_{alpha,beta}(mu t^alpha).
inline double opfunc_multiplier(OpKind kind, double alpha, double mu, double t) {
    if (t < 0.0) {
        throw DomainError("opfunc_multiplier: t must be non-negative");
    }
    const double beta = beta_of(kind, alpha);
    if (t == 0.0) {
        return kind == OpKind::S ? 1.0 : 0.0;
    }
    const double e = ml_e(MLParams(alpha, beta), mu * std::pow(t, alpha));
    switch (kind) {
    case OpKind::S:
        return e;
    case OpKind::K:
        return t * e;
    case OpKind::T:
        return std::pow(t, alpha - 1.0) * e;
    }
    return e;
}

inline State apply_opfunc(const SpectralOperator& op, OpKind kind, double alpha, double t, std::span<const double> v) {
    if (v.size() != op.size()) {
        std::ostringstream os;
        os << "apply_opfunc: vector has " << v.size() << " coordinates, operator has " << op.size() << " modes";
        throw ShapeError(os.str());
    }
    if (!(alpha > 1.0 && alpha < 2.0)) {
        throw DomainError("apply_opfunc: alpha must lie in (1,2)");
    }
    if (t < 0.0) {
        throw DomainError("apply_opfunc: t must be non-negative");
    }
    State out(v.size());
    for (std::size_t n = 0; n < v.size(); ++n) {
        out[n] = opfunc_multiplier(kind, alpha, op.eigenvalue(n), t) * v[n];
    }
    return out;
}

/// Grid estimate of sup_{0<=t<=T} ||W(t)|| over the requested kinds: the
/// largest |multiplier| on 1000 equispaced points, inflated by 5%.
inline double bound_M(const SpectralOperator& op, double alpha, double T, std::span<const OpKind> kinds) {
    if (!(T > 0.0)) {
        throw DomainError("bound_M: T must be positive");
    }
    constexpr std::size_t kPoints = 1000;
    constexpr double kMargin = 1.05;
    double sup = 0.0;
    for (OpKind kind : kinds) {
        for (std::size_t i = 0; i < kPoints; ++i) {
            const double t = T * static_cast<double>(i) / static_cast<double>(kPoints - 1);
            for (double mu : op.eigenvalues()) {
                sup = std::max(sup, std::abs(opfunc_multiplier(kind, alpha, mu, t)));
            }
        }
    }
    return kMargin * sup;
}

inline double bound_M(const SpectralOperator& op, double alpha, double T, std::initializer_list<OpKind> kinds) {
    return bound_M(op, alpha, T, std::span<const OpKind>(kinds.begin(), kinds.size()));
}

}  // namespace fracdelay
