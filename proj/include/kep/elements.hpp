#pragma once

#include "kep/astro.hpp"

namespace kep {

/// Classical orbital elements of a closed orbit. Angles in radians,
/// normalized to [0, 2*pi).
struct Coe {
    double a = 0.0;     ///< semi-major axis [m]
    double e = 0.0;     ///< eccentricity
    double inc = 0.0;   ///< inclination [rad]
    double omega = 0.0; ///< argument of perigee [rad]
    double raan = 0.0;  ///< right ascension of the ascending node [rad]
    double theta = 0.0; ///< true anomaly [rad]
};

/// Modified equinoctial elements. Nonsingular at e = 0 and i = 0; the
/// retrograde limit i = pi is excluded (hx, hy blow up there).
struct Meoe {
    double p = 0.0;  ///< semi-latus rectum [m], > 0
    double ex = 0.0; ///< e*cos(raan + omega)
    double ey = 0.0; ///< e*sin(raan + omega)
    double hx = 0.0; ///< tan(i/2)*cos(raan)
    double hy = 0.0; ///< tan(i/2)*sin(raan)
    double l = 0.0;  ///< true longitude raan + omega + theta [rad]
};

/// Classical elements of the osculating orbit through x.
/// Throws NotPeriodic when E >= 0, SingularElements when the orbit is too
/// close to circular (e < 1e-10) or too close to equatorial
/// (sin(i) < 1e-10): omega, raan and theta are then individually undefined.
Coe coe_from_state(const StateVector& x, double mu);

/// Equinoctial elements from classical ones. Throws SingularElements at
/// the retrograde limit (i = pi), InvalidParameter when a*(1-e^2) <= 0.
Meoe meoe_from_coe(const Coe& coe);

/// Cartesian state from equinoctial elements. Throws NonPositiveW when
/// the radius denominator W = 1 + ex*cos(l) + ey*sin(l) is not positive,
/// InvalidParameter when p <= 0.
StateVector state_from_meoe(const Meoe& m, double mu);

/// Equinoctial elements straight from a Cartesian state, bypassing the
/// classical set so circular and equatorial orbits pose no difficulty.
/// Throws NotPeriodic when E >= 0 (the element set here describes closed
/// orbits: ex^2 + ey^2 < 1), SingularElements at i = pi.
Meoe meoe_from_state(const StateVector& x, double mu);

} // namespace kep
