#pragma once

// Problem builders shared by the test programs.

#include <string>
#include <vector>

#include "fracdelay/io/problem_file.hpp"
#include "fracdelay/problem.hpp"

namespace fracdelay::testing {

inline std::string problem_path(const std::string& name) { return std::string(FRACDELAY_PROBLEMS_DIR) + "/" + name; }

inline io::ProblemFile load_problem_file(const std::string& name) { return io::ProblemFile::load(problem_path(name)); }

/// Scalar equation D^alpha u = mu u + c with constant history (u0, u1 t).
inline ProblemSpec scalar_problem(double mu, double c, double u0, double u1, double alpha = 1.5, double T = 1.0) {
    return ProblemSpec{
        .alpha = alpha,
        .horizon = T,
        .depth = 0.0,
        .op = SpectralOperator({mu}),
        .phi = [=](double t) { return State{u0 + u1 * t}; },
        .varphi = [=](double) { return State{u1}; },
        .forcing = [=](double, std::span<const double>) { return State{c}; },
        .delay = DelaySpec::none(),
        .impulses = {},
    };
}

inline Impulse constant_impulse(double t, double jump, double derivative_jump) {
    return Impulse{t, [=](std::span<const double> u) { return State(u.size(), jump); },
                   [=](std::span<const double> u) { return State(u.size(), derivative_jump); }};
}

}  // namespace fracdelay::testing
