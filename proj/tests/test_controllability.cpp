#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "kep/controllability.hpp"

#include "support/oracles.hpp"

using namespace kep;

namespace {

const PhysicalConstants kC{};

SatelliteState pminus_seed() {
    const StateVector x = state_from_scalars(6'484'000.0, 7879.5, 5.0 * M_PI / 180.0,
                                             Vec3::UnitX(), Vec3::UnitY());
    return make_satellite_state(x, 150.0);
}

Meoe meoe_of(double radius, double speed, double eta_deg, const Vec3& e1, const Vec3& e2) {
    return meoe_from_state(
        state_from_scalars(radius, speed, eta_deg * M_PI / 180.0, e1, e2), kC.mu);
}

}  // namespace

TEST_CASE("the linearization matches a finite-difference Jacobian of the drift") {
    oracle::BoundStateSampler sampler(kC, 4242u);
    for (int i = 0; i < 50; ++i) {
        const StateVector x = sampler.sample();
        const LinearizedPair lp = linearize(x, kC.mu);

        const auto drift = [&](const Eigen::VectorXd& y) {
            return oracle::drift6(y, kC.mu);
        };
        Eigen::VectorXd y(6);
        y << x.r, x.v;
        const Eigen::MatrixXd J = oracle::fd_jacobian(drift, y, 0.5);

        CHECK((lp.a - J).norm() < 1e-6 * J.norm());
        CHECK(lp.b.topRows<3>().isZero(0.0));
        CHECK(lp.b.bottomRows<3>().isIdentity(0.0));
    }
}

TEST_CASE("the Kalman controllability matrix has full rank everywhere sampled") {
    oracle::BoundStateSampler sampler(kC, 515151u);
    for (int i = 0; i < 500; ++i) {
        CHECK(rank_condition(linearize(sampler.sample(), kC.mu)) == 6);
    }
}

TEST_CASE("admissible-region paths keep the radius affine and above the atmosphere") {
    const Meoe from = meoe_of(kC.r_c + 150'000.0, 7700.0, 3.0, Vec3::UnitX(), Vec3::UnitY());
    const Vec3 f1 = Vec3(1.0, 0.2, 0.1).normalized();
    const Vec3 f2 = f1.unitOrthogonal();
    const Meoe to = meoe_of(kC.r_c + 900'000.0, 7100.0, -10.0, f1, f2);

    const int n = 41;
    const std::vector<Meoe> path = meoe_path(from, to, PathMode::AdmissibleA, n, kC);
    REQUIRE(static_cast<int>(path.size()) == n);

    const double r0 = state_from_meoe(from, kC.mu).r.norm();
    const double r1 = state_from_meoe(to, kC.mu).r.norm();
    for (int i = 0; i < n; ++i) {
        const double lambda = static_cast<double>(i) / (n - 1);
        const StateVector x = state_from_meoe(path[i], kC.mu);
        const double r_expected = (1.0 - lambda) * r0 + lambda * r1;
        CHECK(x.r.norm() == doctest::Approx(r_expected).epsilon(1e-9));
        CHECK(x.r.norm() > kC.r_c);
    }
    // endpoints reproduced exactly (up to the element -> state map)
    CHECK((state_from_meoe(path.front(), kC.mu).r -
           state_from_meoe(from, kC.mu).r).norm() < 1e-6);
    CHECK((state_from_meoe(path.back(), kC.mu).r -
           state_from_meoe(to, kC.mu).r).norm() < 1e-6);
}

TEST_CASE("stable-region paths keep the perigee affine and stay in P-plus") {
    const Meoe from = meoe_of(kC.r_c + 200'000.0, 7720.0, 0.0, Vec3::UnitX(), Vec3::UnitY());
    const Vec3 f1 = Vec3(0.3, 1.0, 0.2).normalized();
    const Vec3 f2 = f1.unitOrthogonal();
    const Meoe to = meoe_of(kC.r_c + 1'200'000.0, 7100.0, 2.0, f1, f2);

    REQUIRE(classify(state_from_meoe(from, kC.mu), kC) == RegionClass::PPlus);
    REQUIRE(classify(state_from_meoe(to, kC.mu), kC) == RegionClass::PPlus);

    const int n = 41;
    const std::vector<Meoe> path = meoe_path(from, to, PathMode::StablePPlus, n, kC);

    const double rp0 = perigee_apogee(state_from_meoe(from, kC.mu), kC.mu).perigee;
    const double rp1 = perigee_apogee(state_from_meoe(to, kC.mu), kC.mu).perigee;
    for (int i = 0; i < n; ++i) {
        const double lambda = static_cast<double>(i) / (n - 1);
        const StateVector x = state_from_meoe(path[i], kC.mu);
        const double rp = perigee_apogee(x, kC.mu).perigee;
        CHECK(rp == doctest::Approx((1.0 - lambda) * rp0 + lambda * rp1).epsilon(1e-9));
        CHECK(classify(x, kC) == RegionClass::PPlus);
    }
}

TEST_CASE("paths reject endpoints outside the requested region") {
    // P-minus state: perigee dips below the boundary
    const Meoe dipping = meoe_from_state(pminus_seed().x, kC.mu);
    const Meoe good = meoe_of(kC.r_c + 500'000.0, 7300.0, 0.0, Vec3::UnitX(), Vec3::UnitY());

    CHECK_THROWS_AS(meoe_path(dipping, good, PathMode::StablePPlus, 11, kC), Error);
    CHECK_THROWS_AS(meoe_path(good, dipping, PathMode::StablePPlus, 11, kC), Error);
    CHECK_THROWS_AS(meoe_path(good, good, PathMode::AdmissibleA, 1, kC), Error);

    // AdmissibleA only needs the position above the boundary: the dipping
    // orbit's current radius is above r_c, so it is a valid endpoint there.
    CHECK_NOTHROW(meoe_path(dipping, good, PathMode::AdmissibleA, 11, kC));
}

TEST_CASE("spiral closed forms agree with integrating the thrust law numerically") {
    const SatelliteState seed = pminus_seed();
    const EngineParameters engine = EngineParameters::from_isp(2000.0, kC.g0, 600.0, 0.0);
    const SpiralResult spiral = spiral_construct(seed, kC, engine);

    REQUIRE(!spiral.samples.empty());
    CHECK(spiral.t_bar > 0.0);
    CHECK(std::isfinite(spiral.tau_bar));

    // exit condition: terminal perigee just above the boundary
    const ApsisRadii ap = perigee_apogee(spiral.terminal.x, kC.mu);
    CHECK(ap.perigee == doctest::Approx(kC.r_c * 1.001).epsilon(1e-9));
    CHECK(ap.perigee > kC.r_c);

    // reconstruct the spiral's initial state and integrate the feedback law
    const double r_i = spiral.samples.front().r;
    const double vmag = spiral.c0 / std::sqrt(2.0 * r_i);
    StateVector x0;
    x0.r = r_i * spiral.e1;
    x0.v = vmag * (spiral.radial_coeff * spiral.e1 + spiral.transverse_coeff * spiral.e2);
    const SatelliteState s0 = make_satellite_state(x0, seed.m);

    const ControlLaw law = spiral_thrust_law(spiral, kC);
    const Trajectory traj =
        propagate(s0, law, spiral.t_bar, {}, Direction::Forward, kC, engine);

    const SatelliteState& end = traj.terminal().state;
    CHECK((end.x.r - spiral.terminal.x.r).norm() < 1e-8 * spiral.terminal.x.r.norm());
    CHECK((end.x.v - spiral.terminal.x.v).norm() < 1e-8 * spiral.terminal.x.v.norm());
    CHECK(end.m == doctest::Approx(spiral.terminal.m).epsilon(1e-8));

    // sampled mid-points: radius, angle and mass follow the closed forms
    const SpiralSample& mid = spiral.samples[spiral.samples.size() / 2];
    const double a = spiral.radial_coeff;
    const double r_closed = std::pow(
        std::pow(r_i, 1.5) + 3.0 * a * spiral.c0 / (2.0 * std::sqrt(2.0)) * mid.t, 2.0 / 3.0);
    CHECK(mid.r == doctest::Approx(r_closed).epsilon(1e-12));
    CHECK(mid.theta == doctest::Approx((spiral.transverse_coeff / a) *
                                       std::log(mid.r / r_i)).epsilon(1e-12));

    // kappa is the constant perigee/radius ratio
    CHECK(spiral.kappa == doctest::Approx(ap.perigee / spiral.terminal.x.r.norm())
                              .epsilon(1e-9));

    // monotone radius, angle and strictly decreasing mass
    for (std::size_t i = 1; i < spiral.samples.size(); ++i) {
        CHECK(spiral.samples[i].r > spiral.samples[i - 1].r);
        CHECK(spiral.samples[i].theta > spiral.samples[i - 1].theta);
        CHECK(spiral.samples[i].m < spiral.samples[i - 1].m);
    }
}

TEST_CASE("spiral construction rejects seeds outside P-minus") {
    const double r = kC.r_c + 600'000.0;
    const StateVector pplus = state_from_scalars(r, std::sqrt(kC.mu / r), 0.0,
                                                 Vec3::UnitX(), Vec3::UnitY());
    const EngineParameters engine = EngineParameters::from_isp(2000.0, kC.g0, 600.0, 0.0);
    CHECK_THROWS_AS(spiral_construct(make_satellite_state(pplus, 100.0), kC, engine), Error);
}

TEST_CASE("gramian steering contracts offsets quadratically") {
    const double r = kC.r_c + 600'000.0;
    const StateVector x_ref = state_from_scalars(r, std::sqrt(kC.mu / r), 0.0,
                                                 Vec3::UnitX(), Vec3::UnitY());

    const Vec3 dr(2000.0, -1500.0, 800.0);   // metres
    const Vec3 dv(1.5, 2.0, -1.0);           // m/s
    const SteerResult big = verify_local_steer(x_ref, dr, dv, kC);
    CHECK(big.success);
    CHECK(big.gramian_min_sv > 0.0);
    CHECK(big.miss_norm < 0.1 * big.offset_norm);

    const SteerResult small = verify_local_steer(x_ref, 0.1 * dr, 0.1 * dv, kC);
    CHECK(small.success);
    // quadratic miss: a 10x smaller offset contracts at least ~10x better
    CHECK(small.contraction() < 0.2 * big.contraction());
}
