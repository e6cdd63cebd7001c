#pragma once

#include <vector>

#include "kep/astro.hpp"
#include "kep/elements.hpp"
#include "kep/propagator.hpp"

namespace kep {

using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat63 = Eigen::Matrix<double, 6, 3>;
using Vec6 = Eigen::Matrix<double, 6, 1>;

/// Linearization of the mass-normalized dynamics about a state:
/// d(delta)/dt = a*delta + b*u with delta = (dr, dv).
struct LinearizedPair {
    Mat6 a = Mat6::Zero();
    Mat63 b = Mat63::Zero();
};

/// A = [[0, I], [mu*(3*rhat*rhat^T - I)/|r|^3, 0]], B = [0; I].
/// Throws OriginSingularity when |r| < 1 m.
LinearizedPair linearize(const StateVector& x, double mu);

/// Numerical rank of the Kalman controllability matrix [B AB ... A^5B],
/// counting singular values above threshold_factor * sigma_max.
int rank_condition(const LinearizedPair& lp, double threshold_factor = 1e-8);

/// Region-respecting element interpolation modes.
enum class PathMode {
    AdmissibleA, ///< endpoints above the atmosphere; radius varies affinely
    StablePPlus, ///< endpoints in P-plus; perigee radius varies affinely
};

/// Interpolates between two element sets with (ex, ey, hx, hy) linear, the
/// true longitude along the shorter arc, and the semi-latus rectum chosen
/// so that the mode's radius quantity is affine in the path parameter:
/// AdmissibleA keeps |r| affine (so every sample stays above the
/// atmosphere), StablePPlus keeps the perigee radius affine (so every
/// sample stays in P-plus). n_samples >= 2 includes both endpoints.
/// Throws EndpointOutsideRegion when an endpoint violates the mode's
/// region, InvalidParameter when n_samples < 2.
std::vector<Meoe> meoe_path(const Meoe& from, const Meoe& to, PathMode mode,
                            int n_samples, const PhysicalConstants& c);

/// Coefficients of the logarithmic-spiral velocity field
/// v(r) = c0/sqrt(2r) * (radial_coeff*rhat + transverse_coeff*thetahat).
struct SpiralConfig {
    double radial_coeff = 1.0;
    double transverse_coeff = 1.0;
    double exit_margin = 1e-3; ///< relative perigee overshoot above r_c at exit
    int n_samples = 200;
};

struct SpiralSample {
    double t = 0.0;     ///< [s]
    double r = 0.0;     ///< radius [m]
    double theta = 0.0; ///< in-plane polar angle from the initial radius [rad]
    double m = 0.0;     ///< mass [kg]
    double tau = 0.0;   ///< thrust magnitude [N]
};

/// Closed-form escape spiral out of the P-minus region. The polar angle is
/// measured in the plane of the seed state's orbit; the seed's speed sets
/// c0 while its velocity direction is replaced by the spiral field.
struct SpiralResult {
    double t_bar = 0.0;    ///< exit time: perigee first clears r_c (with margin) [s]
    double tau_bar = 0.0;  ///< peak thrust magnitude along the spiral [N]
    double c0 = 0.0;       ///< field constant sqrt(2*r_i)*|v_i|/hypot(a,b) [m^1.5/s]
    double kappa = 0.0;    ///< perigee/radius ratio (constant along the spiral)
    double radial_coeff = 1.0;     ///< a, copied from the configuration
    double transverse_coeff = 1.0; ///< b, copied from the configuration
    std::vector<SpiralSample> samples; ///< uniformly spaced in t over [0, t_bar]
    SatelliteState terminal;
    Vec3 e1 = Vec3::Zero(); ///< in-plane basis: initial radial direction
    Vec3 e2 = Vec3::Zero(); ///< in-plane transverse direction
};

/// Builds the spiral from a P-minus seed. Radius, polar angle and perigee
/// radius are strictly increasing in time; eccentricity and kappa are
/// constant; mass is positive and strictly decreasing.
/// Throws NotInPMinus when the seed is not in P-minus, ZeroVelocity when
/// its speed vanishes, InvalidParameter for non-positive coefficients.
SpiralResult spiral_construct(const SatelliteState& s_i,
                              const PhysicalConstants& c,
                              const EngineParameters& engine,
                              const SpiralConfig& cfg = {});

/// Feedback thrust law tau(t, s) = s.m * u(s.r) realizing the spiral field,
/// for cross-checking the closed forms against numerical integration.
ControlLaw spiral_thrust_law(const SpiralResult& spiral,
                             const PhysicalConstants& c);

/// Outcome of the one-period Gramian steering check.
struct SteerResult {
    double offset_norm = 0.0; ///< initial deviation, nondimensional (r_c, sqrt(mu/r_c))
    double miss_norm = 0.0;   ///< final deviation after steering, same norm
    double gramian_min_sv = 0.0;
    bool success = false;     ///< miss below 10% of the offset
    double contraction() const {
        return offset_norm > 0.0 ? miss_norm / offset_norm : 0.0;
    }
};

/// Steers a position/velocity offset (dr [m], dv [m/s]) back onto the
/// reference orbit of x_ref over one osculating period, using the
/// minimum-energy control of the linearized dynamics; that control is then
/// applied to the full nonlinear system and the residual miss is reported.
/// Linear theory predicts miss = O(offset^2).
/// Throws NotPeriodic for open reference orbits, GramianSingular when the
/// steering Gramian is numerically rank-deficient.
SteerResult verify_local_steer(const StateVector& x_ref, const Vec3& dr,
                               const Vec3& dv, const PhysicalConstants& c);

} // namespace kep
