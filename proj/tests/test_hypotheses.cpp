#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "fracdelay/hypotheses.hpp"

using namespace fracdelay;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ScalarFn constant(double c) {
    return [c](double) { return c; };
}

}  // namespace

TEST_CASE("contraction constant", "[contraction]") {
    LipschitzData zero;
    const auto z = check_contraction(zero, 1.0);
    CHECK(z.delta == 0.0);
    CHECK(z.pass);

    LipschitzData heat;
    heat.M = 1.0;
    heat.m = 1;
    heat.l_i = 1.0 / 25;
    heat.l_j = 1.0 / 16;
    heat.l_f = constant(1.0 / 49);
    const auto h = check_contraction(heat, 1.0);
    CHECK_THAT(h.delta, WithinAbs(0.12290816326530612245, 1e-12));
    CHECK(h.pass);

    LipschitzData big;
    big.M = 10;
    big.m = 2;
    big.l_i = big.l_j = 0.1;
    const auto b = check_contraction(big, 1.0);
    CHECK_THAT(b.delta, WithinAbs(4.0, 1e-12));
    CHECK_FALSE(b.pass);
}

TEST_CASE("contraction integrates a functional l_f", "[contraction]") {
    LipschitzData d;
    d.l_f = [](double t) { return t * t; };
    CHECK_THAT(check_contraction(d, 3.0).delta, WithinAbs(9.0, 1e-12));
}

TEST_CASE("Krasnoselskii constant and ball radius", "[krasnoselskii]") {
    LipschitzData a;
    a.M = 2.0;
    a.m = 1;
    a.C_i = 0.5;
    a.C_j = 0.25;
    a.phi0_norm = 1.0;
    a.varphi0_norm = 2.0;
    const auto ka = check_krasnoselskii(a, 1.0);
    CHECK(ka.theta == 0.0);
    REQUIRE(ka.r_min);
    CHECK_THAT(*ka.r_min, WithinAbs(2.0 * (1 + 2 + 0.5 + 0.25), 1e-12));

    LipschitzData b;
    b.M = 1.0;
    b.m = 1;
    b.m_f = constant(0.5);
    b.phi0_norm = 1.0;
    b.C_i = b.C_j = 1.0;
    const auto kb = check_krasnoselskii(b, 1.0);
    CHECK_THAT(kb.theta, WithinAbs(0.5, 1e-12));
    REQUIRE(kb.r_min);
    CHECK_THAT(*kb.r_min, WithinAbs(6.0, 1e-10));
    CHECK(kb.pass);

    LipschitzData c;
    c.M = 2.0;
    c.m_f = constant(1.0);
    const auto kc = check_krasnoselskii(c, 1.0);
    CHECK_THAT(kc.theta, WithinAbs(2.0, 1e-12));
    CHECK_FALSE(kc.r_min);
    CHECK_FALSE(kc.pass);
}

TEST_CASE("Leray-Schauder with linear growth diverges", "[leray]") {
    LipschitzData d;
    d.M = 1.0;
    d.m_f = constant(3.0);
    d.Omega_f = [](double s) { return 1.0 + s; };
    const auto r = check_leray_schauder(d, 1.0);
    CHECK(r.rhs_infinite);
    CHECK(r.pass);
    CHECK_THAT(r.rhs, WithinRel(std::log((1.0 + 1e6) / (1.0 + r.C_prime)), 1e-9));
}

TEST_CASE("Leray-Schauder with quadratic growth has a finite bound", "[leray]") {
    LipschitzData d;
    d.M = 1.0;
    d.phi0_norm = 1.0;  // C' = 1
    d.Omega_f = [](double s) { return (1.0 + s) * (1.0 + s); };
    d.m_f = constant(0.4);
    const auto pass = check_leray_schauder(d, 1.0, 1e9);
    CHECK_FALSE(pass.rhs_infinite);
    CHECK_THAT(pass.rhs, WithinAbs(0.5, 1e-8));
    CHECK(pass.pass);
    d.m_f = constant(0.6);
    CHECK_FALSE(check_leray_schauder(d, 1.0, 1e9).pass);
}

TEST_CASE("Leray-Schauder for the heat data", "[leray]") {
    LipschitzData d;
    d.M = 1.0;
    d.m = 1;
    d.C_i = d.C_j = 1.0;
    d.phi0_norm = 1.3;
    d.m_f = constant(1.0 / 49);
    d.Omega_f = [](double s) { return s / 49 + 1e-3; };
    const auto r = check_leray_schauder(d, 1.0, 1e6);
    CHECK(r.rhs_infinite);
    CHECK(r.rhs > r.lhs);
    CHECK(r.pass);
}

TEST_CASE("Leray-Schauder needs s_max above C'", "[leray]") {
    LipschitzData d;
    d.phi0_norm = 10.0;
    CHECK_THROWS_AS(check_leray_schauder(d, 1.0, 5.0), DomainError);
}

TEST_CASE("invalid data is rejected", "[hypotheses]") {
    LipschitzData d;
    d.l_i = -1.0;
    CHECK_THROWS_AS(check_contraction(d, 1.0), DomainError);
    LipschitzData e;
    CHECK_THROWS_AS(check_contraction(e, 0.0), DomainError);
    LipschitzData f;
    f.Omega_f = [](double) { return -1.0; };
    CHECK_THROWS_AS(check_leray_schauder(f, 1.0), DomainError);
}

TEST_CASE("constants are monotone and scale with M", "[hypotheses][property]") {
    std::mt19937 gen(23);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        LipschitzData d;
        d.M = 1.0 + U(gen);
        d.m = static_cast<std::size_t>(U(gen) * 4);
        d.l_i = U(gen);
        d.l_j = U(gen);
        const double lf = U(gen), mf = U(gen);
        d.l_f = constant(lf);
        d.m_f = constant(mf);
        const double T = 0.5 + U(gen);
        const double delta = check_contraction(d, T).delta;
        const double theta = check_krasnoselskii(d, T).theta;

        LipschitzData bigger = d;
        bigger.l_i += U(gen);
        bigger.l_j += U(gen);
        bigger.m += 1;
        bigger.l_f = constant(lf + U(gen));
        bigger.m_f = constant(mf + U(gen));
        CHECK(check_contraction(bigger, T).delta >= delta);
        CHECK(check_krasnoselskii(bigger, T).theta >= theta);

        LipschitzData twice = d;
        twice.M *= 2.0;
        CHECK_THAT(check_contraction(twice, T).delta, WithinRel(2.0 * delta, 1e-14));
        CHECK_THAT(check_krasnoselskii(twice, T).theta, WithinRel(2.0 * theta, 1e-14));
    }
}

TEST_CASE("check_all bundles the verdicts", "[hypotheses]") {
    LipschitzData d;
    d.M = 100.0;
    d.m = 1;
    d.l_i = 1.0;
    d.m_f = constant(1.0);
    d.Omega_f = [](double s) { return (1.0 + s) * (1.0 + s); };
    const auto r = check_all(d, 1.0);
    CHECK_FALSE(r.contraction.pass);
    CHECK_FALSE(r.krasnoselskii.pass);
    CHECK_FALSE(r.leray_schauder.pass);
    CHECK_FALSE(r.any_pass());
}
