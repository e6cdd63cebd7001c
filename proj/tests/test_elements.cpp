#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "kep/elements.hpp"

#include "support/oracles.hpp"

using namespace kep;

namespace {

const PhysicalConstants kC{};

double wrap(double angle) {
    double w = std::fmod(angle, 2.0 * M_PI);
    return w < 0.0 ? w + 2.0 * M_PI : w;
}

/// Angular difference on the circle, in [0, pi].
double angle_gap(double a, double b) {
    const double d = std::fabs(wrap(a) - wrap(b));
    return std::min(d, 2.0 * M_PI - d);
}

}  // namespace

TEST_CASE("classical elements recover the perifocal construction") {
    std::mt19937_64 rng(91u);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int i = 0; i < 300; ++i) {
        const double a = kC.r_c * (1.2 + 3.0 * u01(rng));
        const double e = 0.05 + 0.7 * u01(rng);
        const double inc = 0.05 + 2.9 * u01(rng);  // clearly non-equatorial, below pi
        const double omega = 2.0 * M_PI * u01(rng);
        const double raan = 2.0 * M_PI * u01(rng);
        const double theta = 2.0 * M_PI * u01(rng);

        const StateVector x = oracle::state_from_coe(a, e, inc, omega, raan, theta, kC.mu);
        const Coe coe = coe_from_state(x, kC.mu);

        CHECK(coe.a == doctest::Approx(a).epsilon(1e-10));
        CHECK(coe.e == doctest::Approx(e).epsilon(1e-9));
        CHECK(coe.inc == doctest::Approx(inc).epsilon(1e-10));
        CHECK(angle_gap(coe.omega, omega) < 1e-9);
        CHECK(angle_gap(coe.raan, raan) < 1e-9);
        CHECK(angle_gap(coe.theta, theta) < 1e-9);
    }
}

TEST_CASE("equinoctial elements match the classical route on regular orbits") {
    std::mt19937_64 rng(92u);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int i = 0; i < 300; ++i) {
        Coe coe;
        coe.a = kC.r_c * (1.2 + 3.0 * u01(rng));
        coe.e = 0.05 + 0.7 * u01(rng);
        coe.inc = 0.05 + 2.5 * u01(rng);
        coe.omega = 2.0 * M_PI * u01(rng);
        coe.raan = 2.0 * M_PI * u01(rng);
        coe.theta = 2.0 * M_PI * u01(rng);

        const StateVector via_classical =
            oracle::state_from_coe(coe.a, coe.e, coe.inc, coe.omega, coe.raan, coe.theta, kC.mu);
        const StateVector via_equinoctial = state_from_meoe(meoe_from_coe(coe), kC.mu);

        CHECK((via_classical.r - via_equinoctial.r).norm() < 1e-9 * via_classical.r.norm());
        CHECK((via_classical.v - via_equinoctial.v).norm() < 1e-9 * via_classical.v.norm());
    }
}

TEST_CASE("state -> meoe -> state roundtrip is tight on random bound states") {
    oracle::BoundStateSampler sampler(kC, 777u);
    for (int i = 0; i < 500; ++i) {
        const StateVector x = sampler.sample();
        const Meoe m = meoe_from_state(x, kC.mu);
        const StateVector back = state_from_meoe(m, kC.mu);
        CHECK((back.r - x.r).norm() < 1e-9 * x.r.norm());
        CHECK((back.v - x.v).norm() < 1e-9 * x.v.norm());
    }
}

TEST_CASE("meoe -> state -> meoe roundtrip preserves elements") {
    std::mt19937_64 rng(93u);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int i = 0; i < 300; ++i) {
        Meoe m;
        m.p = kC.r_c * (1.1 + 2.0 * u01(rng));
        const double ecc = 0.8 * u01(rng);
        const double arg = 2.0 * M_PI * u01(rng);
        m.ex = ecc * std::cos(arg);
        m.ey = ecc * std::sin(arg);
        const double tani2 = 2.0 * u01(rng);
        const double node = 2.0 * M_PI * u01(rng);
        m.hx = tani2 * std::cos(node);
        m.hy = tani2 * std::sin(node);
        m.l = 2.0 * M_PI * u01(rng);
        if (1.0 + m.ex * std::cos(m.l) + m.ey * std::sin(m.l) < 0.05) continue;

        const Meoe back = meoe_from_state(state_from_meoe(m, kC.mu), kC.mu);
        CHECK(back.p == doctest::Approx(m.p).epsilon(1e-10));
        CHECK(back.ex == doctest::Approx(m.ex).epsilon(1e-9).scale(1.0));
        CHECK(back.ey == doctest::Approx(m.ey).epsilon(1e-9).scale(1.0));
        CHECK(back.hx == doctest::Approx(m.hx).epsilon(1e-9).scale(1.0));
        CHECK(back.hy == doctest::Approx(m.hy).epsilon(1e-9).scale(1.0));
        CHECK(angle_gap(back.l, m.l) < 1e-9);
    }
}

TEST_CASE("equinoctial elements handle circular and equatorial orbits") {
    // equatorial prograde, mildly eccentric: classical set is singular
    const StateVector equatorial = state_from_scalars(
        6'484'000.0, 7879.5, 5.0 * M_PI / 180.0, Vec3::UnitX(), Vec3::UnitY());
    CHECK_THROWS_AS(coe_from_state(equatorial, kC.mu), Error);
    const Meoe m_eq = meoe_from_state(equatorial, kC.mu);
    CHECK(m_eq.hx == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(m_eq.hy == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    const StateVector back = state_from_meoe(m_eq, kC.mu);
    CHECK((back.r - equatorial.r).norm() < 1e-9 * equatorial.r.norm());
    CHECK((back.v - equatorial.v).norm() < 1e-9 * equatorial.v.norm());

    // circular inclined: classical set is singular, equinoctial is not
    const double r = kC.r_c + 600'000.0;
    const double vc = std::sqrt(kC.mu / r);
    const Vec3 e1 = Vec3(1.0, 0.0, 1.0).normalized();
    const Vec3 e2 = Vec3(-1.0, 0.0, 1.0).normalized();
    const StateVector circular = state_from_scalars(r, vc, 0.0, e1, e2);
    CHECK_THROWS_AS(coe_from_state(circular, kC.mu), Error);
    const Meoe m_circ = meoe_from_state(circular, kC.mu);
    CHECK(std::hypot(m_circ.ex, m_circ.ey) < 1e-10);
    const StateVector back2 = state_from_meoe(m_circ, kC.mu);
    CHECK((back2.r - circular.r).norm() < 1e-9 * circular.r.norm());
    CHECK((back2.v - circular.v).norm() < 1e-9 * circular.v.norm());
}

TEST_CASE("element maps reject states and sets outside their domain") {
    // hyperbolic state: no closed-orbit elements
    const double r = kC.r_c + 500'000.0;
    const double v = 1.05 * std::sqrt(2.0 * kC.mu / r);
    const StateVector hyper = state_from_scalars(r, v, 0.0, Vec3::UnitX(), Vec3::UnitY());
    CHECK_THROWS_AS(coe_from_state(hyper, kC.mu), Error);
    CHECK_THROWS_AS(meoe_from_state(hyper, kC.mu), Error);

    // retrograde equatorial limit
    Coe retro;
    retro.a = 2.0 * kC.r_c;
    retro.e = 0.1;
    retro.inc = M_PI;
    CHECK_THROWS_AS(meoe_from_coe(retro), Error);

    // non-positive semi-latus rectum
    Meoe bad;
    bad.p = 0.0;
    CHECK_THROWS_AS(state_from_meoe(bad, kC.mu), Error);

    // radius denominator W <= 0 (hyperbolic element set evaluated past the asymptote)
    Meoe past_asymptote;
    past_asymptote.p = 2.0 * kC.r_c;
    past_asymptote.ex = 1.5;
    past_asymptote.l = M_PI;
    CHECK_THROWS_AS(state_from_meoe(past_asymptote, kC.mu), Error);
}
