#include "kep/ocp.hpp"

#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <future>

#include "detail/bfgs.hpp"
#include "detail/cubic_spline.hpp"

namespace kep {

namespace {

using Eigen::VectorXd;

/// Perigee radius of the osculating conic, defined for any conic so the
/// objective stays total while the optimizer explores.
double osculating_rp(const StateVector& x, double mu) {
    const double h2 = angular_momentum(x).squaredNorm();
    const double e = laplace_vector(x, mu).norm() / mu;
    return h2 / (mu * (1.0 + e));
}

double sigmoid(double q) { return 1.0 / (1.0 + std::exp(-q)); }

/// Parameter vector layout: in-plane angles at the knots, then optional
/// out-of-plane angles, then optional raw throttle values.
struct ParamLayout {
    int k = 0;
    bool oop = false;
    bool throttle = false;
    int size() const { return k * (1 + (oop ? 1 : 0) + (throttle ? 1 : 0)); }
};

ControlLaw build_law(const std::vector<double>& times, const VectorXd& p,
                     const ParamLayout& lay, double tau, const Vec3& normal) {
    std::vector<double> alpha(p.data(), p.data() + lay.k);
    detail::CubicSpline alpha_s(times, alpha);
    detail::CubicSpline gamma_s, throttle_s;
    if (lay.oop)
        gamma_s = detail::CubicSpline(
            times, std::vector<double>(p.data() + lay.k, p.data() + 2 * lay.k));
    if (lay.throttle) {
        const int off = lay.k * (lay.oop ? 2 : 1);
        throttle_s = detail::CubicSpline(
            times, std::vector<double>(p.data() + off, p.data() + off + lay.k));
    }
    const bool oop = lay.oop, thr = lay.throttle;
    return ControlLaw::steering([=](double t, const SatelliteState& s) -> Vec3 {
        const Vec3 vhat = s.x.v.normalized();
        const Vec3 phat = normal.cross(vhat);
        const double a = alpha_s(t);
        Vec3 dir = std::cos(a) * vhat + std::sin(a) * phat;
        if (oop) {
            const double g = gamma_s(t);
            dir = std::cos(g) * dir + std::sin(g) * normal;
        }
        const double mag = thr ? sigmoid(throttle_s(t)) : 1.0;
        return (tau * mag) * dir;
    });
}

struct InnerProblem {
    const OcpScenario* sc = nullptr;
    const SolverOptions* opts = nullptr;
    EngineParameters engine_eff;
    double tau = 0.0;
    Vec3 normal = Vec3::UnitZ();
    Direction direction = Direction::Forward;
    std::vector<EventKind> events;
    double t_max = 0.0;
    std::vector<double> knot_times;
    double m_start = 0.0; ///< Oip: m_i; Dop: current backward mass estimate
    ParamLayout layout;
    std::atomic<int>* props = nullptr;

    Trajectory run(const VectorXd& p, bool record) const {
        const ControlLaw law = build_law(knot_times, p, layout, tau, normal);
        SatelliteState s0{sc->anchor, m_start};
        IntegratorOptions io = opts->integrator;
        io.record_samples = record;
        ++(*props);
        return propagate(s0, law, t_max, events, direction, sc->constants,
                         engine_eff, io);
    }

    /// Objective: negated terminal perigee radius, nondimensionalized by r_c.
    /// Failed propagations rank worse than any physical outcome.
    double objective(const VectorXd& p) const {
        try {
            const Trajectory traj = run(p, false);
            const double rp =
                osculating_rp(traj.terminal().state.x, sc->constants.mu);
            return -rp / sc->constants.r_c;
        } catch (const Error&) {
            return 10.0;
        }
    }
};

struct StageOutcome {
    detail::BfgsResult bfgs;
    int seed_index = -1;
};

/// Runs one quasi-Newton descent per seed and keeps the best objective;
/// ties resolve to the lowest seed index so reruns are reproducible.
StageOutcome run_seeds(const InnerProblem& prob,
                       const std::vector<VectorXd>& seeds, int max_iters) {
    detail::BfgsOptions bopt;
    bopt.max_iterations = max_iters;
    bopt.fd_step = prob.opts->fd_step;
    bopt.step_tol = prob.opts->step_tol;
    bopt.f_stall_tol = prob.opts->stall_tol / prob.sc->constants.r_c;
    bopt.stall_iters = prob.opts->stall_iters;

    const auto objective = [&prob](const VectorXd& p) { return prob.objective(p); };

    std::vector<detail::BfgsResult> results(seeds.size());
    if (prob.opts->parallel_starts && seeds.size() > 1) {
        std::vector<std::future<detail::BfgsResult>> futures;
        futures.reserve(seeds.size());
        for (const auto& seed : seeds)
            futures.push_back(std::async(std::launch::async, [&, seed] {
                return detail::bfgs_minimize(objective, seed, bopt);
            }));
        for (size_t i = 0; i < futures.size(); ++i) results[i] = futures[i].get();
    } else {
        for (size_t i = 0; i < seeds.size(); ++i)
            results[i] = detail::bfgs_minimize(objective, seeds[i], bopt);
    }

    StageOutcome best;
    for (size_t i = 0; i < results.size(); ++i) {
        if (best.seed_index < 0 || results[i].f < best.bfgs.f) {
            best.bfgs = results[i];
            best.seed_index = static_cast<int>(i);
        }
    }
    return best;
}

std::vector<double> uniform_grid(double t_end, int k) {
    std::vector<double> t(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i)
        t[static_cast<size_t>(i)] = t_end * static_cast<double>(i) / (k - 1);
    return t;
}

/// Resamples knot values (first block of the layout) onto a new grid via
/// the same spline family the law uses; extra blocks restart at defaults.
VectorXd resample_params(const std::vector<double>& old_times,
                         const VectorXd& old_p, const ParamLayout& old_lay,
                         const std::vector<double>& new_times,
                         const ParamLayout& new_lay) {
    VectorXd p = VectorXd::Zero(new_lay.size());
    detail::CubicSpline alpha(
        old_times, std::vector<double>(old_p.data(), old_p.data() + old_lay.k));
    for (int i = 0; i < new_lay.k; ++i) p[i] = alpha(new_times[static_cast<size_t>(i)]);
    if (new_lay.oop && old_lay.oop) {
        detail::CubicSpline gamma(
            old_times,
            std::vector<double>(old_p.data() + old_lay.k, old_p.data() + 2 * old_lay.k));
        for (int i = 0; i < new_lay.k; ++i)
            p[new_lay.k + i] = gamma(new_times[static_cast<size_t>(i)]);
    }
    if (new_lay.throttle) {
        const int off = new_lay.k * (new_lay.oop ? 2 : 1);
        if (old_lay.throttle) {
            const int old_off = old_lay.k * (old_lay.oop ? 2 : 1);
            detail::CubicSpline thr(
                old_times, std::vector<double>(old_p.data() + old_off,
                                               old_p.data() + old_off + old_lay.k));
            for (int i = 0; i < new_lay.k; ++i)
                p[off + i] = thr(new_times[static_cast<size_t>(i)]);
        } else {
            for (int i = 0; i < new_lay.k; ++i) p[off + i] = 6.0; // throttle ~ 1
        }
    }
    return p;
}

/// Coast time from the anchor to its first perigee passage, used to size
/// the steering-knot horizon.
double coast_time_to_perigee(const OcpScenario& sc, const SolverOptions& opts) {
    SatelliteState s0{sc.anchor, sc.anchor_mass};
    IntegratorOptions io = opts.integrator;
    io.record_samples = false;
    EngineParameters coast_engine = sc.engine;
    coast_engine.tau_bound = 0.0;
    const double period = orbital_period(sc.anchor, sc.constants.mu);
    const Trajectory traj =
        propagate(s0, ControlLaw::zero(), 2.0 * period, {EventKind::PerigeeMatch},
                  Direction::Forward, sc.constants, coast_engine, io);
    if (traj.terminal_reason != TerminalReason::PerigeeMatch)
        throw Error(ErrorCode::EventNeverFires,
                    "anchor coast never reaches perigee; check the anchor state");
    return std::max(traj.duration(), 0.05 * period);
}

} // namespace

OcpSolution solve_ocp(const OcpScenario& sc, double tau, const SolverOptions& opts,
                      const OcpSolution* warm) {
    validate(sc.constants);
    validate(sc.engine, sc.constants.g0);
    make_satellite_state(StateVector{sc.anchor.r, sc.anchor.v}, sc.anchor_mass);
    if (!(tau >= 0.0))
        throw Error(ErrorCode::InvalidParameter, "thrust magnitude must be non-negative");
    const RegionClass region = classify(sc.anchor, sc.constants);
    if (sc.kind == MissionKind::Oip && region != RegionClass::PMinus)
        throw Error(ErrorCode::InvalidParameter,
                    std::string("insertion anchor must lie in P-minus, got ") +
                        region_name(region));
    if (sc.kind == MissionKind::Dop &&
        (region == RegionClass::NonElliptic || region == RegionClass::Colinear))
        throw Error(ErrorCode::InvalidParameter,
                    "de-orbit anchor must be on a closed, non-degenerate orbit");

    const double period = orbital_period(sc.anchor, sc.constants.mu);
    const double t_coast = coast_time_to_perigee(sc, opts);
    const double t_horizon = opts.horizon_factor * t_coast;

    InnerProblem prob;
    std::atomic<int> prop_count{0};
    prob.sc = &sc;
    prob.opts = &opts;
    prob.engine_eff = sc.engine;
    prob.engine_eff.tau_bound = tau;
    prob.tau = tau;
    prob.normal = angular_momentum(sc.anchor).normalized();
    prob.direction = sc.kind == MissionKind::Oip ? Direction::Forward
                                                 : Direction::BackwardMassGrowing;
    prob.events = {EventKind::PerigeeMatch};
    if (sc.kind == MissionKind::Oip && sc.engine.m_dry > 0.0)
        prob.events.push_back(EventKind::MassFloor);
    prob.t_max = opts.t_max_periods * period;
    prob.props = &prop_count;

    ParamLayout lay1{opts.knots, opts.out_of_plane, !opts.full_thrust};
    const std::vector<double> times1 = uniform_grid(t_horizon, opts.knots);

    OcpDiagnostics diag;

    // Seeds for the first stage: a resampled warm start when available,
    // otherwise (or additionally) the constant steering profiles.
    std::vector<VectorXd> seeds;
    bool warm_seeded = false;
    if (warm && !warm->knot_times.empty()) {
        ParamLayout wlay{static_cast<int>(warm->knot_times.size()), false, false};
        VectorXd wp = VectorXd::Zero(wlay.size());
        for (int i = 0; i < wlay.k; ++i) wp[i] = warm->knot_angles[static_cast<size_t>(i)];
        seeds.push_back(resample_params(warm->knot_times, wp, wlay, times1, lay1));
        warm_seeded = true;
    }
    const std::vector<double> start_angles =
        opts.multi_start && !warm_seeded
            ? std::vector<double>{0.0, M_PI, M_PI / 4.0, -M_PI / 4.0}
            : std::vector<double>{0.0};
    for (const double a0 : start_angles) {
        VectorXd p = VectorXd::Zero(lay1.size());
        for (int i = 0; i < lay1.k; ++i) p[i] = a0;
        if (lay1.throttle) {
            const int off = lay1.k * (lay1.oop ? 2 : 1);
            for (int i = 0; i < lay1.k; ++i) p[off + i] = 6.0;
        }
        seeds.push_back(p);
    }

    // Dop anchors the backward run's terminal mass at m_i through a fixed
    // point on the start mass: m_f = m_i - beta*tau*t_f(m_f). Oip runs one
    // round with the anchor mass itself.
    double m_start = sc.anchor_mass;
    if (sc.kind == MissionKind::Dop) {
        double t_guess = t_coast;
        if (warm && warm->t_f > 0.0) t_guess = warm->t_f;
        m_start = sc.anchor_mass - sc.engine.beta * tau * t_guess;
        if (!(m_start > 0.0))
            throw Error(ErrorCode::NoConvergence,
                        "thrust-duration product exceeds the anchor mass");
    }

    VectorXd best_p;
    detail::BfgsResult best_bfgs;
    int best_seed = -1;
    double t_f = 0.0;
    const int rounds = sc.kind == MissionKind::Dop ? opts.mass_fixed_point_max : 1;
    bool mass_converged = sc.kind == MissionKind::Oip;

    for (int round = 0; round < rounds; ++round) {
        prob.m_start = m_start;
        prob.layout = lay1;
        prob.knot_times = times1;

        StageOutcome stage = run_seeds(prob, seeds, opts.max_iterations);
        best_p = stage.bfgs.x;
        best_bfgs = stage.bfgs;
        best_seed = stage.seed_index;
        diag.iterations += stage.bfgs.iterations;

        if (opts.refine && opts.refined_knots > opts.knots) {
            ParamLayout lay2{opts.refined_knots, opts.out_of_plane, !opts.full_thrust};
            const std::vector<double> times2 = uniform_grid(t_horizon, opts.refined_knots);
            VectorXd p2 = resample_params(times1, best_p, lay1, times2, lay2);
            InnerProblem prob2 = prob;
            prob2.layout = lay2;
            prob2.knot_times = times2;
            detail::BfgsOptions bopt2;
            bopt2.max_iterations = opts.refine_max_iterations;
            bopt2.fd_step = opts.fd_step;
            bopt2.step_tol = opts.step_tol;
            bopt2.f_stall_tol = opts.stall_tol / sc.constants.r_c;
            bopt2.stall_iters = opts.stall_iters;
            const auto obj2 = [&prob2](const VectorXd& p) { return prob2.objective(p); };
            detail::BfgsResult refined = detail::bfgs_minimize(obj2, p2, bopt2);
            diag.iterations += refined.iterations;
            if (refined.f <= best_bfgs.f) {
                best_bfgs = refined;
                best_p = refined.x;
                prob.layout = lay2;
                prob.knot_times = times2;
            }
        }

        if (sc.kind == MissionKind::Oip) break;

        // Close the backward mass identity m_f = m_i - beta*tau*t_f(m_f) on
        // the frozen incumbent steering. With the control fixed this map is
        // smooth and strongly contractive (beta*tau*dt_f/dm << 1), so it
        // reaches the tight tolerance that solver-to-solver jitter in t_f
        // would otherwise mask.
        const double m_used = m_start;
        double m_closed = m_used;
        for (int inner = 0; inner < 40; ++inner) {
            prob.m_start = m_closed;
            const Trajectory probe = prob.run(best_p, false);
            t_f = probe.duration();
            const double m_next = sc.anchor_mass - sc.engine.beta * tau * t_f;
            if (!(m_next > 0.0))
                throw Error(ErrorCode::NoConvergence,
                            "thrust-duration product exceeds the anchor mass");
            const bool closed =
                std::abs(m_next - m_closed) <= opts.mass_fixed_point_tol * sc.anchor_mass;
            m_closed = m_next;
            if (closed) break;
        }
        diag.mass_rounds = round + 1;
        m_start = m_closed;

        // The steering was optimized at m_used; refit only while the closed
        // mass moved it materially, otherwise accept the incumbent.
        if (std::abs(m_closed - m_used) <= 1e-4 * sc.anchor_mass) {
            mass_converged = true;
            break;
        }
        // Later rounds continue from the incumbent knots only.
        seeds.assign(1, best_p);
        if (prob.layout.k != lay1.k)
            seeds[0] = resample_params(prob.knot_times, best_p, prob.layout, times1, lay1);
    }

    if (sc.kind == MissionKind::Dop && !mass_converged)
        diag.notes.push_back("backward mass fixed point hit its round limit");

    prob.m_start = m_start;
    Trajectory traj = prob.run(best_p, true);
    if (traj.terminal_reason != TerminalReason::PerigeeMatch)
        throw Error(ErrorCode::EventNeverFires,
                    std::string("trajectory ended with ") +
                        terminal_reason_name(traj.terminal_reason) +
                        " instead of a perigee match");

    OcpSolution sol;
    sol.t_f = traj.duration();
    sol.terminal_rp = osculating_rp(traj.terminal().state.x, sc.constants.mu);
    sol.tau = tau;
    sol.converged = best_bfgs.converged && mass_converged;
    sol.backward_start_mass = m_start;
    sol.knot_times = prob.knot_times;
    sol.knot_angles.assign(best_p.data(), best_p.data() + prob.layout.k);
    sol.trajectory = std::move(traj);
    diag.propagations = prop_count.load();
    diag.best_start = warm_seeded && best_seed == 0 ? -1 : best_seed;
    sol.diagnostics = std::move(diag);
    return sol;
}

double shooting_s(const OcpScenario& sc, double tau, const SolverOptions& opts,
                  const OcpSolution* warm, OcpSolution* solution_out) {
    OcpSolution sol = solve_ocp(sc, tau, opts, warm);
    const double s = sol.terminal_rp - sc.constants.r_c;
    if (solution_out) *solution_out = std::move(sol);
    return s;
}

Trajectory forward_mission(const OcpScenario& sc, const OcpSolution& sol) {
    if (sc.kind == MissionKind::Oip) return sol.trajectory;

    const TrajectorySample& end = sol.trajectory.terminal();
    SatelliteState start;
    start.x.r = end.state.x.r;
    start.x.v = -end.state.x.v;
    start.m = end.state.m;

    // The reversed burn uses the mirrored steering angle against the
    // forward velocity and the forward orbit normal (the backward normal is
    // its negative), which reproduces the backward thrust history exactly.
    detail::CubicSpline alpha(sol.knot_times, sol.knot_angles);
    const Vec3 normal_f = -angular_momentum(sc.anchor).normalized();
    const double t_f = sol.t_f;
    const double tau = sol.tau;
    ControlLaw law = ControlLaw::steering(
        [=](double t, const SatelliteState& s) -> Vec3 {
            const double a = M_PI - alpha(t_f - t);
            const Vec3 vhat = s.x.v.normalized();
            const Vec3 phat = normal_f.cross(vhat);
            return tau * (std::cos(a) * vhat + std::sin(a) * phat);
        });

    EngineParameters engine_eff = sc.engine;
    engine_eff.tau_bound = sol.tau;
    return propagate(start, law, t_f, {}, Direction::Forward, sc.constants,
                     engine_eff, IntegratorOptions{});
}

uint64_t scenario_hash(const OcpScenario& sc) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "%s|%d|%.17g,%.17g,%.17g|%.17g,%.17g,%.17g|%.17g|%.17g,%.17g,%.17g,%.17g|"
                  "%.17g,%.17g,%.17g,%.17g",
                  sc.name.c_str(), sc.kind == MissionKind::Oip ? 0 : 1, sc.anchor.r[0],
                  sc.anchor.r[1], sc.anchor.r[2], sc.anchor.v[0], sc.anchor.v[1],
                  sc.anchor.v[2], sc.anchor_mass, sc.engine.isp, sc.engine.beta,
                  sc.engine.tau_bound, sc.engine.m_dry, sc.constants.mu,
                  sc.constants.r_e, sc.constants.r_c, sc.constants.g0);
    uint64_t hash = 1469598103934665603ull; // FNV-1a 64
    for (const char* p = buf; *p; ++p) {
        hash ^= static_cast<unsigned char>(*p);
        hash *= 1099511628211ull;
    }
    return hash;
}

std::string summary_record(const OcpScenario& sc, const OcpSolution& sol) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "{\"scenario\":\"%s\",\"kind\":\"%s\",\"hash\":\"%016" PRIx64
                  "\",\"tau_n\":%.15g,\"t_f_s\":%.15g,\"terminal_rp_m\":%.15g,"
                  "\"converged\":%s,\"iterations\":%d}",
                  sc.name.c_str(), sc.kind == MissionKind::Oip ? "oip" : "dop",
                  scenario_hash(sc), sol.tau, sol.t_f, sol.terminal_rp,
                  sol.converged ? "true" : "false", sol.diagnostics.iterations);
    return buf;
}

} // namespace kep
