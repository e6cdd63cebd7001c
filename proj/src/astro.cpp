#include "kep/astro.hpp"

#include <cmath>

namespace kep {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidParameter: return "InvalidParameter";
        case ErrorCode::NotPeriodic: return "NotPeriodic";
        case ErrorCode::ZeroVelocity: return "ZeroVelocity";
        case ErrorCode::DegenerateBasis: return "DegenerateBasis";
        case ErrorCode::SingularElements: return "SingularElements";
        case ErrorCode::NonPositiveW: return "NonPositiveW";
        case ErrorCode::OriginSingularity: return "OriginSingularity";
        case ErrorCode::NonPositiveMass: return "NonPositiveMass";
        case ErrorCode::StepSizeUnderflow: return "StepSizeUnderflow";
        case ErrorCode::BoundViolated: return "BoundViolated";
        case ErrorCode::NotInPMinus: return "NotInPMinus";
        case ErrorCode::GramianSingular: return "GramianSingular";
        case ErrorCode::EndpointOutsideRegion: return "EndpointOutsideRegion";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::EventNeverFires: return "EventNeverFires";
        case ErrorCode::BracketFailure: return "BracketFailure";
        case ErrorCode::InnerSolverFailure: return "InnerSolverFailure";
        case ErrorCode::ScenarioError: return "ScenarioError";
        case ErrorCode::MissingTrajectory: return "MissingTrajectory";
        case ErrorCode::IoError: return "IoError";
    }
    return "UnknownError";
}

const char* region_name(RegionClass region) {
    switch (region) {
        case RegionClass::NonElliptic: return "NonElliptic";
        case RegionClass::Colinear: return "Colinear";
        case RegionClass::PPlus: return "PPlus";
        case RegionClass::PMinus: return "PMinus";
        case RegionClass::PInsideAtmosphere: return "PInsideAtmosphere";
    }
    return "Unknown";
}

void validate(const PhysicalConstants& c) {
    if (!(c.mu > 0.0))
        throw Error(ErrorCode::InvalidParameter, "mu must be positive");
    if (!(c.r_e > 0.0))
        throw Error(ErrorCode::InvalidParameter, "r_e must be positive");
    if (!(c.r_c > c.r_e))
        throw Error(ErrorCode::InvalidParameter,
                    "atmospheric boundary r_c must exceed the planetary radius r_e");
    if (!(c.g0 > 0.0))
        throw Error(ErrorCode::InvalidParameter, "g0 must be positive");
}

EngineParameters EngineParameters::from_isp(double isp_s, double g0,
                                            double tau_bound_n, double m_dry_kg) {
    if (!(isp_s > 0.0) || !(g0 > 0.0))
        throw Error(ErrorCode::InvalidParameter, "isp and g0 must be positive");
    EngineParameters e;
    e.isp = isp_s;
    e.beta = 1.0 / (isp_s * g0);
    e.tau_bound = tau_bound_n;
    e.m_dry = m_dry_kg;
    validate(e, g0);
    return e;
}

void validate(const EngineParameters& e, double g0) {
    if (!(e.isp > 0.0))
        throw Error(ErrorCode::InvalidParameter, "isp must be positive");
    if (!(e.tau_bound >= 0.0))
        throw Error(ErrorCode::InvalidParameter, "tau_bound must be non-negative");
    if (!(e.m_dry >= 0.0))
        throw Error(ErrorCode::InvalidParameter, "m_dry must be non-negative");
    const double product = e.beta * e.isp * g0;
    if (std::abs(product - 1.0) > 1e-12)
        throw Error(ErrorCode::InvalidParameter,
                    "beta, isp and g0 are inconsistent: beta*isp*g0 = " +
                        std::to_string(product));
}

StateVector make_state(const Vec3& r, const Vec3& v) {
    if (!r.allFinite() || !v.allFinite())
        throw Error(ErrorCode::InvalidParameter, "state components must be finite");
    if (r.norm() == 0.0)
        throw Error(ErrorCode::InvalidParameter, "position must be nonzero");
    return StateVector{r, v};
}

SatelliteState make_satellite_state(const StateVector& x, double m) {
    if (!(m > 0.0) || !std::isfinite(m))
        throw Error(ErrorCode::InvalidParameter, "mass must be positive and finite");
    make_state(x.r, x.v);
    return SatelliteState{x, m};
}

Vec3 angular_momentum(const StateVector& x) { return x.r.cross(x.v); }

Vec3 laplace_vector(const StateVector& x, double mu) {
    return x.v.cross(angular_momentum(x)) - mu * x.r.normalized();
}

double specific_energy(const StateVector& x, double mu) {
    return 0.5 * x.v.squaredNorm() - mu / x.r.norm();
}

ApsisRadii perigee_apogee(const StateVector& x, double mu) {
    const double energy = specific_energy(x, mu);
    if (!(energy < 0.0))
        throw Error(ErrorCode::NotPeriodic, "apsis radii require an elliptic orbit");
    const double a = -mu / (2.0 * energy);
    const double e = laplace_vector(x, mu).norm() / mu;
    const double h2 = angular_momentum(x).squaredNorm();
    ApsisRadii out;
    out.perigee = h2 / (mu * (1.0 + e));
    // 2a - r_p stays finite in the rectilinear limit e -> 1, h -> 0.
    out.apogee = 2.0 * a - out.perigee;
    return out;
}

double orbital_period(const StateVector& x, double mu) {
    const double energy = specific_energy(x, mu);
    if (!(energy < 0.0))
        throw Error(ErrorCode::NotPeriodic, "period requires an elliptic orbit");
    const double a = -mu / (2.0 * energy);
    return 2.0 * M_PI * std::sqrt(a * a * a / mu);
}

double flight_path_angle(const StateVector& x) {
    const double vn = x.v.norm();
    if (vn == 0.0)
        throw Error(ErrorCode::ZeroVelocity, "flight-path angle undefined at rest");
    const double s = x.r.normalized().dot(x.v) / vn;
    return std::asin(std::clamp(s, -1.0, 1.0));
}

StateVector state_from_scalars(double rnorm, double vnorm, double eta,
                               const Vec3& e1, const Vec3& e2) {
    if (!(rnorm > 0.0))
        throw Error(ErrorCode::InvalidParameter, "radius must be positive");
    if (!(vnorm >= 0.0))
        throw Error(ErrorCode::InvalidParameter, "speed must be non-negative");
    const double tol = 1e-9;
    if (std::abs(e1.norm() - 1.0) > tol || std::abs(e2.norm() - 1.0) > tol ||
        std::abs(e1.dot(e2)) > tol)
        throw Error(ErrorCode::DegenerateBasis, "plane basis must be orthonormal");
    StateVector x;
    x.r = rnorm * e1;
    x.v = vnorm * (std::sin(eta) * e1 + std::cos(eta) * e2);
    return x;
}

RegionClass classify(const StateVector& x, const PhysicalConstants& c) {
    const Vec3 h = angular_momentum(x);
    const double scale = x.r.norm() * x.v.norm();
    if (h.norm() <= 1e-12 * scale || scale == 0.0)
        return RegionClass::Colinear;
    if (!(specific_energy(x, c.mu) < 0.0))
        return RegionClass::NonElliptic;
    if (x.r.norm() <= c.r_c)
        return RegionClass::PInsideAtmosphere;
    const ApsisRadii ap = perigee_apogee(x, c.mu);
    return ap.perigee > c.r_c ? RegionClass::PPlus : RegionClass::PMinus;
}

} // namespace kep
