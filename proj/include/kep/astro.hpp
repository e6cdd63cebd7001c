#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "kep/errors.hpp"

namespace kep {

using Vec3 = Eigen::Vector3d;

/// Environment constants. SI units throughout: metres, seconds, kilograms.
struct PhysicalConstants {
    double mu = 3.9860047e14;        ///< gravitational parameter [m^3/s^2]
    double r_e = 6'374'000.0;        ///< planetary radius [m]
    double r_c = 6'374'000.0 + 90'000.0; ///< atmospheric boundary radius [m]
    double g0 = 9.8;                 ///< reference gravity for Isp conversion [m/s^2]
};

/// Throws InvalidParameter unless mu > 0, 0 < r_e < r_c and g0 > 0.
void validate(const PhysicalConstants& c);

/// Thruster description. beta is the propellant mass-flow coefficient:
/// mdot = -beta * |tau|, so beta * isp * g0 == 1.
struct EngineParameters {
    double isp = 0.0;       ///< specific impulse [s]
    double beta = 0.0;      ///< mass-flow coefficient [s/m]
    double tau_bound = 0.0; ///< admissible thrust-magnitude bound [N]
    double m_dry = 0.0;     ///< structural (dry) mass floor [kg]

    /// Builds a consistent parameter set from Isp; beta = 1/(isp*g0).
    static EngineParameters from_isp(double isp_s, double g0, double tau_bound_n,
                                     double m_dry_kg);
};

/// Throws InvalidParameter unless isp > 0, tau_bound >= 0, m_dry >= 0 and
/// beta*isp*g0 == 1 within 1e-12 relative.
void validate(const EngineParameters& e, double g0);

/// Translational state: inertial position [m] and velocity [m/s].
struct StateVector {
    Vec3 r = Vec3::Zero();
    Vec3 v = Vec3::Zero();
};

/// Validating factory; throws InvalidParameter when |r| == 0 or any
/// component is non-finite.
StateVector make_state(const Vec3& r, const Vec3& v);

/// Full satellite state: translational state plus wet mass [kg] (> 0).
struct SatelliteState {
    StateVector x;
    double m = 0.0;
};

/// Validating factory; throws InvalidParameter unless m > 0 and x is valid.
SatelliteState make_satellite_state(const StateVector& x, double m);

/// Phase-space classification used by mission logic.
enum class RegionClass {
    NonElliptic,        ///< specific energy >= 0: not on a closed orbit
    Colinear,           ///< r and v parallel (h = 0): degenerate radial motion
    PPlus,              ///< elliptic, above the atmosphere, perigee above it too
    PMinus,             ///< elliptic, above the atmosphere, perigee at or below it
    PInsideAtmosphere,  ///< position at or below the atmospheric boundary
};

const char* region_name(RegionClass region);

/// Specific angular momentum h = r x v [m^2/s].
Vec3 angular_momentum(const StateVector& x);

/// Laplace (eccentricity) vector L = v x h - mu * r/|r| [m^3/s^2].
/// |L|/mu is the eccentricity; L points from focus to perigee.
Vec3 laplace_vector(const StateVector& x, double mu);

/// Specific orbital energy E = |v|^2/2 - mu/|r| [m^2/s^2].
double specific_energy(const StateVector& x, double mu);

/// Perigee and apogee radii [m] of the osculating orbit.
/// Throws NotPeriodic when the orbit is not elliptic (E >= 0).
struct ApsisRadii {
    double perigee = 0.0;
    double apogee = 0.0;
};
ApsisRadii perigee_apogee(const StateVector& x, double mu);

/// Keplerian period 2*pi*sqrt(a^3/mu) [s]; throws NotPeriodic when E >= 0.
double orbital_period(const StateVector& x, double mu);

/// Flight-path angle eta = asin(rhat . vhat) [rad], positive ascending.
/// Throws ZeroVelocity when |v| == 0.
double flight_path_angle(const StateVector& x);

/// Builds the state with radius rnorm, speed vnorm and flight-path angle
/// eta [rad] in the plane spanned by the orthonormal pair (e1, e2):
/// r = rnorm*e1, v = vnorm*(sin(eta)*e1 + cos(eta)*e2), so motion is
/// prograde in the e1->e2 sense. Throws DegenerateBasis when (e1, e2) is
/// not orthonormal within 1e-9, InvalidParameter when rnorm <= 0 or
/// vnorm < 0.
StateVector state_from_scalars(double rnorm, double vnorm, double eta,
                               const Vec3& e1, const Vec3& e2);

/// Total classification of any valid state. Precedence: Colinear (h = 0),
/// then NonElliptic (E >= 0), then PInsideAtmosphere (|r| <= r_c), then
/// the perigee test (perigee > r_c gives PPlus, otherwise PMinus; the
/// boundary case perigee == r_c classifies as PMinus).
RegionClass classify(const StateVector& x, const PhysicalConstants& c);

} // namespace kep
