#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "fracdelay/hypotheses.hpp"
#include "fracdelay/mittag_leffler.hpp"
#include "fracdelay/solver.hpp"
#include "support.hpp"

using namespace fracdelay;
using namespace fracdelay::testing;
using Catch::Matchers::WithinAbs;

namespace {

double jump_defect(const ProblemSpec& prob, const Trajectory& tr) {
    double worst = 0.0;
    const auto times = tr.impulse_times();
    REQUIRE(times.size() == prob.impulses.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        const State left = tr.at(times[k]);
        const State right = tr.right_limit(times[k]);
        const State jump = prob.impulses[k].jump(left);
        for (std::size_t c = 0; c < left.size(); ++c) {
            worst = std::max(worst, std::abs(right[c] - left[c] - jump[c]));
        }
    }
    return worst;
}

Trajectory random_input(const MildSolutionOperator& P, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    Trajectory tr = P.skeleton();
    for (std::size_t i = tr.origin + 1; i < tr.size(); ++i) {
        for (double& x : tr.values[i]) x = U(gen);
    }
    return tr;
}

}  // namespace

TEST_CASE("grid layout duplicates impulse times and aligns cells", "[grid]") {
    ProblemSpec prob = scalar_problem(-1.0, 0.0, 1.0, 0.0);
    prob.depth = 0.1;
    prob.impulses.push_back(constant_impulse(0.3, 1.0, 0.0));
    const GridLayout g = GridLayout::build(prob, 0.07);
    REQUIRE(g.impulse_at.size() == 1);
    CHECK(g.times[g.impulse_at[0]] == 0.3);
    CHECK(g.times.front() == 0.0);
    CHECK(g.times.back() == 1.0);
    CHECK_FALSE(g.uniform_step.has_value());
    for (std::size_t j = 1; j < g.times.size(); ++j) CHECK(g.times[j] - g.times[j - 1] <= 0.07 + 1e-15);
    CHECK(g.history_times.front() == -0.1);
    CHECK(g.history_times.back() < 0.0);

    const Trajectory tr = Trajectory::skeleton(prob, g);
    const std::size_t j = g.impulse_at[0];
    CHECK(tr.sides[tr.left_node[j]] == Side::Left);
    CHECK(tr.sides[tr.right_node[j]] == Side::Right);
    CHECK(tr.right_node[j] == tr.left_node[j] + 1);

    const GridLayout u = GridLayout::build(prob, 1.0 / 256);
    CHECK_FALSE(u.uniform_step.has_value());  // 0.3 is not a multiple of 1/256
    prob.impulses[0].time = 0.375;
    CHECK(GridLayout::build(prob, 1.0 / 256).uniform_step.has_value());
}

TEST_CASE("history segments read the trajectory left-continuously", "[history]") {
    ProblemSpec prob = scalar_problem(0.0, 0.0, 2.0, 1.0);
    prob.depth = 0.5;
    prob.impulses.push_back(constant_impulse(0.5, 3.0, 0.0));
    const auto res = picard_solve(prob, SolverConfig{.h = 1.0 / 64});
    const Trajectory& tr = res.trajectory;
    CHECK(eval_history_segment(tr, prob.depth, 0.0, 0.0)[0] == 2.0);
    CHECK_THAT(eval_history_segment(tr, prob.depth, 0.5, 0.0)[0], WithinAbs(2.5, 1e-14));
    CHECK_THAT(tr.right_limit(0.5)[0], WithinAbs(5.5, 1e-14));
    // Linear on [-d, 0]: interpolation reproduces it off the nodes.
    CHECK_THAT(eval_history_segment(tr, prob.depth, 0.1, -0.3037)[0], WithinAbs(2.0 + (0.1 - 0.3037), 1e-13));
    CHECK_THROWS_AS(eval_history_segment(tr, prob.depth, 0.1, -0.6), DomainError);
    CHECK_THROWS_AS(eval_history_segment(tr, prob.depth, 1.5, 0.0), DomainError);
}

TEST_CASE("P ignores its input when A = 0 and f = 0", "[apply_P]") {
    const ProblemSpec prob = scalar_problem(0.0, 0.0, 1.5, -0.5);
    const SolverConfig cfg{.h = 1.0 / 32};
    const MildSolutionOperator P(prob, cfg);
    const Trajectory out = P.apply(random_input(P, 3));
    for (std::size_t i = out.origin; i < out.size(); ++i) {
        CHECK_THAT(out.values[i][0], WithinAbs(1.5 - 0.5 * out.times[i], 1e-14));
    }
}

TEST_CASE("P integrates a constant forcing exactly", "[apply_P]") {
    const ProblemSpec prob = scalar_problem(0.0, 1.0, 0.0, 0.0);
    const Trajectory out = apply_P(random_input(MildSolutionOperator(prob, {}), 5), prob, SolverConfig{});
    const double g = std::tgamma(2.5);
    for (std::size_t i = out.origin; i < out.size(); ++i) {
        CHECK_THAT(out.values[i][0], WithinAbs(std::pow(out.times[i], 1.5) / g, 1e-12));
    }
}

TEST_CASE("P adds impulse terms after the impulse time", "[apply_P]") {
    ProblemSpec prob = scalar_problem(0.0, 0.0, 1.0, 2.0);
    prob.impulses.push_back(constant_impulse(0.4, 0.7, -1.2));
    const MildSolutionOperator P(prob, SolverConfig{.h = 0.05});
    const Trajectory out = P.apply(random_input(P, 9));
    for (std::size_t i = out.origin; i < out.size(); ++i) {
        const double t = out.times[i];
        const bool after = t > 0.4 || out.sides[i] == Side::Right;
        const double expect = 1.0 + 2.0 * t + (after ? 0.7 - 1.2 * (t - 0.4) : 0.0);
        CHECK_THAT(out.values[i][0], WithinAbs(expect, 1e-13));
    }
}

TEST_CASE("convolve_T reproduces exact moments", "[convolve]") {
    for (const auto& [fn, expect] : {std::pair<double (*)(double), double>{[](double) { return 1.0; }, 0.752252778063675},
                                     {[](double s) { return s; }, 0.30090111122547}}) {
        const ProblemSpec prob = scalar_problem(0.0, 0.0, 0.0, 0.0);
        SampledFunction f;
        for (int j = 0; j <= 64; ++j) {
            f.grid.push_back(j / 64.0);
            f.values.push_back({fn(j / 64.0)});
        }
        CHECK_THAT(convolve_T(prob, f, 1.0)[0], WithinAbs(expect, 1e-12));
    }
}

TEST_CASE("convolve_T converges to the quadrature reference", "[convolve]") {
    // int_0^1 tau^0.5 E_{1.5,1.5}(-tau^1.5) dtau = E_{1.5,2.5}(-1), 50 digits.
    const double ref = 0.60337063468191191551;
    const ProblemSpec prob = scalar_problem(-1.0, 0.0, 0.0, 0.0);
    std::vector<double> errs;
    for (int n : {16, 32, 64, 128, 256}) {
        SampledFunction f;
        for (int j = 0; j <= n; ++j) {
            f.grid.push_back(static_cast<double>(j) / n);
            f.values.push_back({1.0});
        }
        errs.push_back(std::abs(convolve_T(prob, f, 1.0)[0] - ref));
    }
    CHECK(errs.back() <= 1e-6);
    for (std::size_t i = 1; i < errs.size(); ++i) {
        INFO(errs[i - 1] << " -> " << errs[i]);
        CHECK(std::log2(errs[i - 1] / errs[i]) >= 1.0);
    }
}

TEST_CASE("convolve_T checks its arguments", "[convolve]") {
    const ProblemSpec prob = scalar_problem(-1.0, 0.0, 0.0, 0.0);
    SampledFunction f{{0.0, 0.5, 1.0}, {{1.0}, {1.0}, {1.0}}};
    CHECK_THROWS_AS(convolve_T(prob, f, 0.7), ShapeError);
    SampledFunction g{{0.0, 1.0}, {{1.0, 2.0}, {1.0, 2.0}}};
    CHECK_THROWS_AS(convolve_T(prob, g, 1.0), ShapeError);
}

TEST_CASE("picard_solve reaches the piecewise-linear solution when P is constant", "[picard]") {
    ProblemSpec prob = scalar_problem(0.0, 0.0, 1.0, 2.0);
    prob.impulses.push_back(constant_impulse(0.5, 0.25, 1.0));
    const auto res = picard_solve(prob, SolverConfig{.h = 1.0 / 64});
    CHECK(res.iterations <= 2);
    const Trajectory& tr = res.trajectory;
    for (std::size_t i = tr.origin; i < tr.size(); ++i) {
        const double t = tr.times[i];
        const bool after = t > 0.5 || tr.sides[i] == Side::Right;
        CHECK(tr.values[i][0] == Catch::Approx(1.0 + 2.0 * t + (after ? 0.25 + (t - 0.5) : 0.0)).margin(1e-14));
    }
}

TEST_CASE("picard_solve matches the Mittag-Leffler closed form", "[picard]") {
    const ProblemSpec prob = scalar_problem(-1.0, 0.0, 1.0, 0.0);
    const auto res = picard_solve(prob, SolverConfig{.h = 1.0 / 256});
    const Trajectory& tr = res.trajectory;
    double worst = 0.0;
    for (std::size_t i = tr.origin; i < tr.size(); ++i) {
        worst = std::max(worst, std::abs(tr.values[i][0] - ml_e(MLParams(1.5, 1.0), -std::pow(tr.times[i], 1.5))));
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("picard_solve on the heat problem contracts as certified", "[picard]") {
    const auto pf = load_problem_file("heat_impulse.fde");
    const ProblemSpec prob = pf.build();
    const LipschitzData data = pf.lipschitz_data(prob, 1.0);
    const double delta = check_contraction(data, prob.horizon).delta;
    const auto res = picard_solve(prob, pf.solver, delta);
    CHECK(res.iterations <= 10);
    for (std::size_t i = 1; i < res.differences.size(); ++i) {
        CHECK(res.differences[i] / res.differences[i - 1] <= delta + 0.05);
    }
    CHECK(jump_defect(prob, res.trajectory) <= 1e-12);

    // Fixed-point residual.
    const Trajectory again = apply_P(res.trajectory, prob, pf.solver);
    CHECK(solver_detail::sup_difference(again, res.trajectory) <= 2.0 * pf.solver.tol);

    // History is phi and u(0) = phi(0).
    const Trajectory& tr = res.trajectory;
    for (std::size_t i = 0; i <= tr.origin; ++i) {
        const State expect = prob.phi(tr.times[i]);
        for (std::size_t c = 0; c < expect.size(); ++c) CHECK(tr.values[i][c] == expect[c]);
    }
}

TEST_CASE("picard_solve is Cauchy under grid refinement", "[picard]") {
    const ProblemSpec prob = load_problem_file("scalar_impulse.fde").build();
    std::vector<Trajectory> sols;
    for (double h : {1.0 / 32, 1.0 / 64, 1.0 / 128}) {
        sols.push_back(picard_solve(prob, SolverConfig{.h = h}).trajectory);
    }
    auto gap = [](const Trajectory& a, const Trajectory& b) {
        double g = 0.0;
        for (std::size_t i = a.origin; i < a.size(); ++i) {
            const State other = a.sides[i] == Side::Right ? b.right_limit(a.times[i]) : b.at(a.times[i]);
            g = std::max(g, std::abs(a.values[i][0] - other[0]));
        }
        return g;
    };
    const double g1 = gap(sols[0], sols[1]);
    const double g2 = gap(sols[1], sols[2]);
    INFO(g1 << " -> " << g2);
    CHECK(g1 / g2 >= 1.5);
}

TEST_CASE("picard_solve reports non-convergence", "[picard]") {
    const auto pf = load_problem_file("heat_impulse.fde");
    const ProblemSpec prob = pf.build();
    SolverConfig cfg = pf.solver;
    cfg.max_iter = 1;
    try {
        picard_solve(prob, cfg, 0.1229);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.inconsistent());
    }
    CHECK_THROWS_AS(picard_solve(prob, cfg), ConvergenceError);
}

TEST_CASE("delay targets outside the history window are errors", "[delay]") {
    ProblemSpec prob = scalar_problem(-1.0, 0.0, 1.0, 0.0);
    prob.depth = 0.1;
    prob.delay = DelaySpec::constant(0.2);
    prob.forcing = [](double, std::span<const double> u) { return State{0.1 * u[0]}; };
    CHECK_THROWS_AS(picard_solve(prob, SolverConfig{.h = 1.0 / 32}), DelayError);

    // A negative lag would read the future.
    prob.delay = DelaySpec::state_dependent([](double) { return -0.05; }, [](double) { return 1.0; });
    CHECK_THROWS_AS(picard_solve(prob, SolverConfig{.h = 1.0 / 32}), DelayError);
}

TEST_CASE("state-dependent delay uses rho1(t) rho2(|u(t)|)", "[delay]") {
    const DelaySpec d = DelaySpec::state_dependent([](double t) { return 0.5 * t; }, [](double x) { return 1.0 / (1.0 + x); });
    const std::vector<double> u{3.0, 4.0};
    CHECK_THAT(d.target(0.6, u, 1.0), WithinAbs(0.6 - 0.3 / 6.0, 1e-15));
    CHECK(DelaySpec::none().target(0.6, u, 0.0) == 0.6);
}

TEST_CASE("problem validation enforces ordered impulse times", "[problem]") {
    ProblemSpec prob = scalar_problem(-1.0, 0.0, 1.0, 0.0);
    prob.impulses.push_back(constant_impulse(0.6, 1.0, 0.0));
    prob.impulses.push_back(constant_impulse(0.4, 1.0, 0.0));
    CHECK_THROWS_AS(prob.validate(), DomainError);
    prob.impulses = {constant_impulse(1.0, 1.0, 0.0)};
    CHECK_THROWS_AS(prob.validate(), DomainError);
    CHECK_THROWS_AS((SolverConfig{.h = 0.0}.validate()), DomainError);
}
