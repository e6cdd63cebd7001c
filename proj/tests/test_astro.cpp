#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "kep/astro.hpp"

#include "support/oracles.hpp"

using namespace kep;

namespace {

const PhysicalConstants kC{};

/// Mission anchor used throughout: r = 6484 km, v = 7879.5 m/s, eta = +5 deg,
/// prograde in the xy plane.
StateVector insertion_anchor() {
    return state_from_scalars(6'484'000.0, 7879.5, 5.0 * M_PI / 180.0, Vec3::UnitX(),
                              Vec3::UnitY());
}

}  // namespace

TEST_CASE("constants validate and reject nonsense") {
    CHECK_NOTHROW(validate(kC));
    PhysicalConstants bad = kC;
    bad.r_c = bad.r_e - 1.0;
    CHECK_THROWS_AS(validate(bad), Error);
    bad = kC;
    bad.mu = 0.0;
    CHECK_THROWS_AS(validate(bad), Error);
}

TEST_CASE("engine parameters from isp satisfy the mass-flow identity") {
    const EngineParameters e = EngineParameters::from_isp(2000.0, kC.g0, 20.0, 0.0);
    CHECK(e.beta == doctest::Approx(5.102040816326531e-05).epsilon(1e-14));
    CHECK_NOTHROW(validate(e, kC.g0));

    EngineParameters broken = e;
    broken.beta *= 1.0 + 1e-6;
    CHECK_THROWS_AS(validate(broken, kC.g0), Error);
}

TEST_CASE("state_from_scalars builds the advertised geometry") {
    const StateVector x = insertion_anchor();
    CHECK(x.r.norm() == doctest::Approx(6'484'000.0).epsilon(1e-15));
    CHECK(x.v.norm() == doctest::Approx(7879.5).epsilon(1e-15));
    CHECK(flight_path_angle(x) == doctest::Approx(5.0 * M_PI / 180.0).epsilon(1e-12));
    CHECK(x.r.z() == 0.0);
    CHECK(x.v.z() == 0.0);
    // prograde: h points along +z
    CHECK(angular_momentum(x).z() > 0.0);

    CHECK_THROWS_AS(state_from_scalars(1.0, 1.0, 0.0, Vec3::UnitX(), Vec3::UnitX()), Error);
    CHECK_THROWS_AS(state_from_scalars(-1.0, 1.0, 0.0, Vec3::UnitX(), Vec3::UnitY()), Error);
}

TEST_CASE("first integrals of the insertion anchor match independent values") {
    const StateVector x = insertion_anchor();
    CHECK(angular_momentum(x).norm() == doctest::Approx(5.0896262546e10).epsilon(1e-9));
    CHECK(specific_energy(x, kC.mu) == doctest::Approx(-3.0431210881e7).epsilon(1e-9));
    CHECK(laplace_vector(x, kC.mu).norm() / kC.mu ==
          doctest::Approx(0.087718273539).epsilon(1e-9));

    const ApsisRadii ap = perigee_apogee(x, kC.mu);
    CHECK(ap.perigee == doctest::Approx(5'974'719.940774).epsilon(1e-9));
    CHECK(ap.apogee == doctest::Approx(7'123'689.832159).epsilon(1e-9));
    CHECK(orbital_period(x, kC.mu) == doctest::Approx(5274.6522).epsilon(1e-7));
}

TEST_CASE("first integrals of the entry-interface anchor match independent values") {
    const StateVector x = state_from_scalars(6'496'000.0, 7879.5, -15.0 * M_PI / 180.0,
                                             Vec3::UnitX(), Vec3::UnitY());
    CHECK(laplace_vector(x, kC.mu).norm() / kC.mu ==
          doctest::Approx(0.2590709714).epsilon(1e-9));
    const ApsisRadii ap = perigee_apogee(x, kC.mu);
    CHECK(ap.perigee == doctest::Approx(4'870'672.072).epsilon(1e-9));
    CHECK(ap.apogee == doctest::Approx(8'276'800.585).epsilon(1e-9));
    CHECK(orbital_period(x, kC.mu) == doctest::Approx(5304.316).epsilon(1e-6));
}

TEST_CASE("perigee and apogee agree with the vis-viva oracle on random states") {
    oracle::BoundStateSampler sampler(kC, 20260814u);
    for (int i = 0; i < 200; ++i) {
        const StateVector x = sampler.sample();
        const double E = specific_energy(x, kC.mu);
        const double a = -kC.mu / (2.0 * E);
        const double e = laplace_vector(x, kC.mu).norm() / kC.mu;
        const ApsisRadii ap = perigee_apogee(x, kC.mu);
        CHECK(ap.perigee == doctest::Approx(a * (1.0 - e)).epsilon(1e-9));
        CHECK(ap.apogee == doctest::Approx(a * (1.0 + e)).epsilon(1e-9));
    }
}

TEST_CASE("classification covers every region with the documented precedence") {
    // mission anchor: elliptic, above the atmosphere, perigee below it
    CHECK(classify(insertion_anchor(), kC) == RegionClass::PMinus);

    // circular orbit well above the boundary: P-plus
    const double r_hi = kC.r_c + 500'000.0;
    const StateVector circ = state_from_scalars(r_hi, std::sqrt(kC.mu / r_hi), 0.0,
                                                Vec3::UnitX(), Vec3::UnitY());
    CHECK(classify(circ, kC) == RegionClass::PPlus);

    // same speed but inside the boundary
    const StateVector inside = state_from_scalars(kC.r_c - 1.0, 7000.0, 0.0, Vec3::UnitX(),
                                                  Vec3::UnitY());
    CHECK(classify(inside, kC) == RegionClass::PInsideAtmosphere);

    // above escape speed: non-elliptic even though the position is inside
    const double v_esc = std::sqrt(2.0 * kC.mu / (kC.r_c - 1.0));
    const StateVector hyper = state_from_scalars(kC.r_c - 1.0, 1.0001 * v_esc, 0.0,
                                                 Vec3::UnitX(), Vec3::UnitY());
    CHECK(classify(hyper, kC) == RegionClass::NonElliptic);

    // radial motion beats everything
    StateVector radial;
    radial.r = Vec3(r_hi, 0.0, 0.0);
    radial.v = Vec3(100.0, 0.0, 0.0);
    CHECK(classify(radial, kC) == RegionClass::Colinear);

    // boundary case: perigee exactly at r_c classifies as P-minus
    const double a = (kC.r_c + (kC.r_c + 1'000'000.0)) / 2.0;
    const double e = 1.0 - kC.r_c / a;
    const double r_apo = a * (1.0 + e);
    const double v_apo = std::sqrt(kC.mu * (2.0 / r_apo - 1.0 / a));
    const StateVector at_boundary = state_from_scalars(r_apo, v_apo, 0.0, Vec3::UnitX(),
                                                       Vec3::UnitY());
    CHECK(classify(at_boundary, kC) == RegionClass::PMinus);
}

TEST_CASE("factories reject invalid inputs") {
    CHECK_THROWS_AS(make_state(Vec3::Zero(), Vec3::UnitX()), Error);
    CHECK_THROWS_AS(make_state(Vec3(std::nan(""), 0, 0), Vec3::Zero()), Error);
    CHECK_THROWS_AS(make_satellite_state(insertion_anchor(), 0.0), Error);
    CHECK_THROWS_AS(make_satellite_state(insertion_anchor(), -5.0), Error);
    StateVector still;
    still.r = Vec3(7e6, 0, 0);
    CHECK_THROWS_AS(flight_path_angle(still), Error);
}

TEST_CASE("error codes carry stable names") {
    CHECK(std::string(error_code_name(ErrorCode::NotPeriodic)) == "NotPeriodic");
    const Error err(ErrorCode::BoundViolated, "bound exceeded");
    CHECK(err.code() == ErrorCode::BoundViolated);
    CHECK(std::string(err.what()).find("bound exceeded") != std::string::npos);
}
