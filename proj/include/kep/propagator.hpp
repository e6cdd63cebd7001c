#pragma once

#include <functional>
#include <vector>

#include "kep/astro.hpp"

namespace kep {

/// Integration sense. Forward integrates the thrusted two-body system with
/// mdot = -beta*|tau|. BackwardMassGrowing integrates the time-reversed
/// system: identical translational dynamics (the caller supplies the
/// velocity-negated anchor state) but mdot = +beta*|tau|, so propellant is
/// "restored" while stepping toward the mission start.
enum class Direction { Forward, BackwardMassGrowing };

/// Thrust command [N] as a function of time and current satellite state.
/// The propagator verifies |tau| <= tau_bound (within rounding slack) at
/// every evaluation and throws BoundViolated otherwise.
class ControlLaw {
  public:
    using Steering = std::function<Vec3(double, const SatelliteState&)>;

    /// Coast law: tau = 0 everywhere.
    static ControlLaw zero();
    /// Fixed inertial thrust vector.
    static ControlLaw constant(const Vec3& tau);
    /// Arbitrary feedback steering function.
    static ControlLaw steering(Steering f);

    Vec3 thrust(double t, const SatelliteState& s) const;
    bool is_zero() const { return kind_ == Kind::Zero; }

  private:
    enum class Kind { Zero, Constant, SteeringFn };
    Kind kind_ = Kind::Zero;
    Vec3 constant_ = Vec3::Zero();
    Steering fn_;
};

/// Events the propagator can watch for. All are terminal: integration stops
/// at the first (earliest) triggered event.
enum class EventKind {
    PerigeeMatch,       ///< osculating perigee radius equals current radius
    AtmosphereCrossing, ///< |r| crosses the atmospheric boundary r_c
    MassFloor,          ///< mass reaches the dry-mass floor m_dry
};

enum class TerminalReason {
    TimeExhausted,
    PerigeeMatch,
    AtmosphereCrossing,
    MassFloor,
};

const char* event_name(EventKind kind);
const char* terminal_reason_name(TerminalReason reason);

struct EventRecord {
    double t = 0.0;          ///< refined event time [s]
    EventKind kind = EventKind::PerigeeMatch;
    double residual = 0.0;   ///< |g| at the refined time (metres or kg)
};

struct TrajectorySample {
    double t = 0.0;          ///< elapsed integration time [s], >= 0
    SatelliteState state;
    Vec3 tau = Vec3::Zero(); ///< thrust command at this sample [N]
};

/// Integration result. Sample times are strictly increasing; mass is
/// non-increasing for Forward runs and non-decreasing for backward runs.
/// Events are sorted by time; the terminal reason matches the earliest
/// event when one fired, else TimeExhausted.
struct Trajectory {
    std::vector<TrajectorySample> samples;
    std::vector<EventRecord> events;
    TerminalReason terminal_reason = TerminalReason::TimeExhausted;

    const TrajectorySample& terminal() const { return samples.back(); }
    double duration() const { return samples.back().t; }
};

/// Adaptive Runge-Kutta settings. Tolerances are stated in SI units and
/// converted to the internal nondimensional scales.
struct IntegratorOptions {
    double rtol = 1e-12;       ///< relative tolerance, all components
    double atol_r = 1e-6;      ///< absolute position tolerance [m]
    double atol_v = 1e-9;      ///< absolute velocity tolerance [m/s]
    double atol_m = 1e-9;      ///< absolute mass tolerance [kg]
    double event_residual_tol = 1e-6; ///< required |g| at refined event times
    long max_steps = 5'000'000;
    bool record_samples = true; ///< keep per-step samples (terminal sample always kept)
};

/// Derivative of the drift (coast) system: (v, -mu*r/|r|^3).
/// Throws OriginSingularity when |r| < 1 m.
StateVector drift_rhs(const StateVector& x, double mu);

/// Full thrusted derivative. dm carries the direction-dependent sign.
/// Throws OriginSingularity when |r| < 1 m, NonPositiveMass when m <= 0.
struct SatelliteDerivative {
    Vec3 dr = Vec3::Zero();
    Vec3 dv = Vec3::Zero();
    double dm = 0.0;
};
SatelliteDerivative controlled_rhs(const SatelliteState& s, const Vec3& tau,
                                   Direction direction, double mu, double beta);

/// Integrates the controlled two-body system from s0 for at most t_max
/// seconds of |elapsed| time, stopping early at the first watched event.
///
/// Internally the system is nondimensionalized by (r_c, sqrt(mu/r_c), s0.m)
/// and stepped with an embedded Dormand-Prince 5(4) pair. Event times are
/// refined until the event residual falls below opts.event_residual_tol.
///
/// The perigee-match event g1 = |r| - perigee(x) touches zero tangentially
/// (along any in-plane thrust arc the perigee radius is stationary exactly
/// at perigee passage), so its zeros are located through the transversal
/// surrogate vr = rhat.v crossing zero from below, guarded by a radius test
/// against the semi-latus rectum to reject apoapsis. The event arms only
/// once g1 has been strictly positive at an accepted sample; near-circular
/// states (e < 1e-9) fire immediately, since g1 then vanishes identically.
///
/// Throws OriginSingularity, NonPositiveMass, StepSizeUnderflow,
/// BoundViolated (control exceeding engine.tau_bound).
Trajectory propagate(const SatelliteState& s0, const ControlLaw& law,
                     double t_max, const std::vector<EventKind>& events,
                     Direction direction, const PhysicalConstants& constants,
                     const EngineParameters& engine,
                     const IntegratorOptions& opts = {});

/// Default horizon helper: 10 osculating periods of s0 (NotPeriodic if the
/// orbit is open).
double default_time_horizon(const SatelliteState& s0, const PhysicalConstants& c);

/// Lifts a mass-normalized control u(t, x) with |u| <= eps [m/s^2] into a
/// thrust law tau(t, s) = s.m * u(t, s.x) for the full system. Requires
/// engine.tau_bound >= eps * m_start (throws BoundViolated otherwise): along
/// any forward trajectory the mass only shrinks, so the bound then holds
/// throughout.
ControlLaw rescale_control(std::function<Vec3(double, const StateVector&)> u,
                           double eps, double m_start,
                           const EngineParameters& engine);

} // namespace kep
