#include "kep/propagator.hpp"

#include <algorithm>
#include <cmath>

#include "detail/dopri5.hpp"

namespace kep {

ControlLaw ControlLaw::zero() { return ControlLaw{}; }

ControlLaw ControlLaw::constant(const Vec3& tau) {
    ControlLaw law;
    law.kind_ = Kind::Constant;
    law.constant_ = tau;
    return law;
}

ControlLaw ControlLaw::steering(Steering f) {
    if (!f)
        throw Error(ErrorCode::InvalidParameter, "steering function must be callable");
    ControlLaw law;
    law.kind_ = Kind::SteeringFn;
    law.fn_ = std::move(f);
    return law;
}

Vec3 ControlLaw::thrust(double t, const SatelliteState& s) const {
    switch (kind_) {
        case Kind::Zero: return Vec3::Zero();
        case Kind::Constant: return constant_;
        case Kind::SteeringFn: return fn_(t, s);
    }
    return Vec3::Zero();
}

const char* event_name(EventKind kind) {
    switch (kind) {
        case EventKind::PerigeeMatch: return "PerigeeMatch";
        case EventKind::AtmosphereCrossing: return "AtmosphereCrossing";
        case EventKind::MassFloor: return "MassFloor";
    }
    return "Unknown";
}

const char* terminal_reason_name(TerminalReason reason) {
    switch (reason) {
        case TerminalReason::TimeExhausted: return "TimeExhausted";
        case TerminalReason::PerigeeMatch: return "PerigeeMatch";
        case TerminalReason::AtmosphereCrossing: return "AtmosphereCrossing";
        case TerminalReason::MassFloor: return "MassFloor";
    }
    return "Unknown";
}

StateVector drift_rhs(const StateVector& x, double mu) {
    const double rn = x.r.norm();
    if (rn < 1.0)
        throw Error(ErrorCode::OriginSingularity,
                    "position within 1 m of the gravitational singularity");
    StateVector d;
    d.r = x.v;
    d.v = -mu / (rn * rn * rn) * x.r;
    return d;
}

SatelliteDerivative controlled_rhs(const SatelliteState& s, const Vec3& tau,
                                   Direction direction, double mu, double beta) {
    if (!(s.m > 0.0))
        throw Error(ErrorCode::NonPositiveMass,
                    "mass must stay positive along the trajectory");
    const StateVector dx = drift_rhs(s.x, mu);
    SatelliteDerivative d;
    d.dr = dx.r;
    d.dv = dx.v + tau / s.m;
    const double flow = beta * tau.norm();
    d.dm = direction == Direction::Forward ? -flow : flow;
    return d;
}

namespace {

using detail::VectorXd;

/// Nondimensional scales: lengths by r_c, speeds by the circular speed at
/// r_c, masses by the start mass. mu and r_c both become 1.
struct Scales {
    double length, speed, time, mass, force;

    Scales(const PhysicalConstants& c, double m_ref)
        : length(c.r_c),
          speed(std::sqrt(c.mu / c.r_c)),
          time(length / speed),
          mass(m_ref),
          force(mass * speed / time) {}
};

struct NondimView {
    Vec3 r, v;
    double m;

    explicit NondimView(const VectorXd& y)
        : r(y[0], y[1], y[2]), v(y[3], y[4], y[5]), m(y[6]) {}

    double rn() const { return r.norm(); }
    double vr() const { return r.dot(v) / r.norm(); }
    double energy() const { return 0.5 * v.squaredNorm() - 1.0 / r.norm(); }
    Vec3 hvec() const { return r.cross(v); }
    Vec3 lvec() const { return v.cross(hvec()) - r.normalized(); }
    double ecc() const { return lvec().norm(); }
    /// periapsis radius of the osculating conic, valid for any conic
    double rp() const { return hvec().squaredNorm() / (1.0 + ecc()); }
    double semilatus() const { return hvec().squaredNorm(); }
};

SatelliteState to_si(const VectorXd& y, const Scales& sc) {
    SatelliteState s;
    s.x.r = Vec3(y[0], y[1], y[2]) * sc.length;
    s.x.v = Vec3(y[3], y[4], y[5]) * sc.speed;
    s.m = y[6] * sc.mass;
    return s;
}

struct EventCandidate {
    double t;  // nondim
    EventKind kind;
    VectorXd y;
    double residual; // SI units (m for radius events, kg for the mass floor)
};

} // namespace

double default_time_horizon(const SatelliteState& s0, const PhysicalConstants& c) {
    return 10.0 * orbital_period(s0.x, c.mu);
}

Trajectory propagate(const SatelliteState& s0, const ControlLaw& law,
                     double t_max, const std::vector<EventKind>& events,
                     Direction direction, const PhysicalConstants& constants,
                     const EngineParameters& engine, const IntegratorOptions& opts) {
    make_satellite_state(s0.x, s0.m);
    if (!(t_max > 0.0))
        throw Error(ErrorCode::InvalidParameter, "t_max must be positive");

    const Scales sc(constants, s0.m);
    const double beta_nd = engine.beta * sc.speed;
    const double singular_nd = 1.0 / sc.length; // 1 m guard radius
    const double mdry_nd = engine.m_dry / sc.mass;
    // Rounding slack on the admissibility check: the stated 1e-12 absolute
    // slack plus the same amount relative, so large thrust magnitudes are not
    // rejected for last-bit noise in the norm.
    const double tau_limit = engine.tau_bound * (1.0 + 1e-12) + 1e-12;

    const bool watch_perigee =
        std::find(events.begin(), events.end(), EventKind::PerigeeMatch) != events.end();
    const bool watch_atmosphere =
        std::find(events.begin(), events.end(), EventKind::AtmosphereCrossing) != events.end();
    const bool watch_mass =
        std::find(events.begin(), events.end(), EventKind::MassFloor) != events.end();

    const detail::Rhs rhs = [&](double t_nd, const VectorXd& y, VectorXd& dydt) {
        NondimView s(y);
        if (s.rn() < singular_nd)
            throw Error(ErrorCode::OriginSingularity,
                        "position within 1 m of the gravitational singularity");
        if (!(s.m > 0.0))
            throw Error(ErrorCode::NonPositiveMass,
                        "mass must stay positive along the trajectory");
        const Vec3 tau_si = law.thrust(t_nd * sc.time, to_si(y, sc));
        const double tau_mag = tau_si.norm();
        if (tau_mag > tau_limit)
            throw Error(ErrorCode::BoundViolated,
                        "control magnitude " + std::to_string(tau_mag) +
                            " N exceeds bound " + std::to_string(engine.tau_bound) + " N");
        const Vec3 tau_nd = tau_si / sc.force;
        const double inv_r3 = 1.0 / (s.rn() * s.rn() * s.rn());
        const Vec3 acc = -inv_r3 * s.r + tau_nd / s.m;
        dydt[0] = s.v[0];
        dydt[1] = s.v[1];
        dydt[2] = s.v[2];
        dydt[3] = acc[0];
        dydt[4] = acc[1];
        dydt[5] = acc[2];
        dydt[6] = (direction == Direction::Forward ? -1.0 : 1.0) * beta_nd * tau_nd.norm();
    };

    VectorXd y0(7);
    y0 << s0.x.r[0] / sc.length, s0.x.r[1] / sc.length, s0.x.r[2] / sc.length,
        s0.x.v[0] / sc.speed, s0.x.v[1] / sc.speed, s0.x.v[2] / sc.speed, 1.0;

    detail::AdaptiveOptions aopt;
    aopt.rtol = opts.rtol;
    aopt.atol.resize(7);
    const double atol_r_nd = opts.atol_r / sc.length;
    const double atol_v_nd = opts.atol_v / sc.speed;
    aopt.atol << atol_r_nd, atol_r_nd, atol_r_nd, atol_v_nd, atol_v_nd, atol_v_nd,
        opts.atol_m / sc.mass;
    aopt.max_steps = opts.max_steps;

    const double t_end = t_max / sc.time;
    const double arm_tol_nd = 1e-6 / sc.length;        // 1 micrometre in SI
    const double circular_ecc_tol = 1e-9;

    Trajectory out;
    bool armed = NondimView(y0).rn() - NondimView(y0).rp() > arm_tol_nd;

    const auto record = [&](double t_nd, const VectorXd& y) {
        TrajectorySample smp;
        smp.t = t_nd * sc.time;
        smp.state = to_si(y, sc);
        smp.tau = law.thrust(smp.t, smp.state);
        out.samples.push_back(std::move(smp));
    };
    record(0.0, y0);

    detail::Dopri5Work substep_work;
    substep_work.resize(7);
    VectorXd ysub(7), esub(7);

    // Locates the zero of `sign_of` inside an accepted step by bisection,
    // re-stepping from (ta0, ya0, fa0) each probe. `low_side` is the sign at
    // the step start. Returns the state on the event side of the bracket.
    const auto refine = [&](double ta0, const VectorXd& ya0, const VectorXd& fa0,
                            double tb, const VectorXd& yb,
                            const std::function<double(const NondimView&)>& sign_of)
        -> std::pair<double, VectorXd> {
        double lo = ta0, hi = tb;
        VectorXd yhi = yb;
        const double s_lo = sign_of(NondimView(ya0));
        for (int it = 0; it < 60 && (hi - lo) > 1e-14 * std::max(std::abs(hi), 1.0);
             ++it) {
            const double tm = 0.5 * (lo + hi);
            detail::dopri5_step(rhs, ta0, ya0, tm - ta0, fa0, substep_work, ysub, esub);
            const double sm = sign_of(NondimView(ysub));
            if ((s_lo < 0.0 && sm < 0.0) || (s_lo > 0.0 && sm > 0.0)) {
                lo = tm;
            } else {
                hi = tm;
                yhi = ysub;
            }
        }
        return {hi, yhi};
    };

    bool fired = false;
    VectorXd f0copy(7);

    const auto on_step = [&](double t0, const VectorXd& ya, double t1,
                             const VectorXd& yb, const VectorXd& f0) -> detail::StepFlow {
        NondimView sa(ya), sb(yb);
        std::vector<EventCandidate> candidates;

        if (watch_perigee) {
            if (sb.ecc() < circular_ecc_tol) {
                // Degenerate near-circular case: the radius equals the
                // perigee radius identically, so the match holds now.
                candidates.push_back({t1, EventKind::PerigeeMatch, yb,
                                      std::abs(sb.rn() - sb.rp()) * sc.length});
            } else if (armed && sa.vr() < 0.0 && sb.vr() >= 0.0) {
                auto [te, ye] = refine(t0, ya, f0, t1, yb,
                                       [](const NondimView& s) { return s.vr(); });
                NondimView se(ye);
                // Radial velocity also vanishes at apoapsis; only the
                // periapsis branch (r below the semi-latus rectum) matches.
                if (se.rn() < se.semilatus())
                    candidates.push_back({te, EventKind::PerigeeMatch, ye,
                                          std::abs(se.rn() - se.rp()) * sc.length});
            }
        }
        if (watch_atmosphere) {
            const double ga = sa.rn() - 1.0;
            const double gb = sb.rn() - 1.0;
            if ((ga > 0.0 && gb <= 0.0) || (ga < 0.0 && gb >= 0.0)) {
                auto [te, ye] = refine(t0, ya, f0, t1, yb, [](const NondimView& s) {
                    return s.rn() - 1.0;
                });
                candidates.push_back({te, EventKind::AtmosphereCrossing, ye,
                                      std::abs(NondimView(ye).rn() - 1.0) * sc.length});
            }
        }
        if (watch_mass) {
            const double ga = sa.m - mdry_nd;
            const double gb = sb.m - mdry_nd;
            if (ga > 0.0 && gb <= 0.0) {
                auto [te, ye] = refine(t0, ya, f0, t1, yb, [&](const NondimView& s) {
                    return s.m - mdry_nd;
                });
                candidates.push_back({te, EventKind::MassFloor, ye,
                                      std::abs(NondimView(ye).m - mdry_nd) * sc.mass});
            }
        }

        if (!candidates.empty()) {
            std::sort(candidates.begin(), candidates.end(),
                      [](const EventCandidate& a, const EventCandidate& b) {
                          return a.t < b.t;
                      });
            for (const auto& cand : candidates)
                out.events.push_back({cand.t * sc.time, cand.kind, cand.residual});
            const auto& first = candidates.front();
            record(first.t, first.y);
            switch (first.kind) {
                case EventKind::PerigeeMatch:
                    out.terminal_reason = TerminalReason::PerigeeMatch;
                    break;
                case EventKind::AtmosphereCrossing:
                    out.terminal_reason = TerminalReason::AtmosphereCrossing;
                    break;
                case EventKind::MassFloor:
                    out.terminal_reason = TerminalReason::MassFloor;
                    break;
            }
            fired = true;
            return detail::StepFlow::Stop;
        }

        if (opts.record_samples || t1 >= t_end) record(t1, yb);
        armed = armed || (sb.rn() - sb.rp() > arm_tol_nd);
        return detail::StepFlow::Continue;
    };

    detail::integrate_adaptive(rhs, 0.0, y0, t_end, aopt, on_step);

    if (!fired) out.terminal_reason = TerminalReason::TimeExhausted;

    // Residuals are measured on the computed state at the refined time
    // (metres for the radius events, kilograms for the mass floor), so the
    // same numeric tolerance applies to each.
    for (const auto& ev : out.events) {
        if (ev.residual > opts.event_residual_tol)
            throw Error(ErrorCode::StepSizeUnderflow,
                        std::string("event refinement stalled: residual ") +
                            std::to_string(ev.residual) + " for " + event_name(ev.kind));
    }
    return out;
}

ControlLaw rescale_control(std::function<Vec3(double, const StateVector&)> u,
                           double eps, double m_start, const EngineParameters& engine) {
    if (!u)
        throw Error(ErrorCode::InvalidParameter, "control function must be callable");
    if (!(eps >= 0.0) || !(m_start > 0.0))
        throw Error(ErrorCode::InvalidParameter,
                    "eps must be non-negative and m_start positive");
    if (eps * m_start > engine.tau_bound * (1.0 + 1e-12) + 1e-12)
        throw Error(ErrorCode::BoundViolated,
                    "normalized bound eps*m_start = " + std::to_string(eps * m_start) +
                        " N exceeds engine tau_bound " +
                        std::to_string(engine.tau_bound) + " N");
    return ControlLaw::steering(
        [u = std::move(u)](double t, const SatelliteState& s) -> Vec3 {
            return s.m * u(t, s.x);
        });
}

} // namespace kep
