#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "json.hpp"

#include "kep/ocp.hpp"

using namespace kep;

namespace {

const PhysicalConstants kC{};

OcpScenario insertion_scenario() {
    OcpScenario sc;
    sc.kind = MissionKind::Oip;
    sc.anchor = state_from_scalars(6'484'000.0, 7879.5, 5.0 * M_PI / 180.0, Vec3::UnitX(),
                                   Vec3::UnitY());
    sc.anchor_mass = 150.0;
    sc.engine = EngineParameters::from_isp(2000.0, kC.g0, 25.0, 0.0);
    sc.constants = kC;
    sc.name = "oip_test";
    return sc;
}

OcpScenario deorbit_scenario() {
    OcpScenario sc;
    sc.kind = MissionKind::Dop;
    const StateVector ei = state_from_scalars(6'496'000.0, 7879.5, -15.0 * M_PI / 180.0,
                                              Vec3::UnitX(), Vec3::UnitY());
    sc.anchor = make_state(ei.r, -ei.v);
    sc.anchor_mass = 95'254.38;
    sc.engine = EngineParameters::from_isp(313.0, kC.g0, 53'378.6, 0.0);
    sc.constants = kC;
    sc.name = "dop_test";
    return sc;
}

SolverOptions cheap_options() {
    SolverOptions opts;
    opts.knots = 8;
    opts.refine = false;
    opts.max_iterations = 40;
    opts.multi_start = false;
    return opts;
}

}  // namespace

TEST_CASE("a vanishing thrust bound recovers the coasting perigee") {
    const OcpScenario sc = insertion_scenario();
    const double rp_coast = perigee_apogee(sc.anchor, kC.mu).perigee;
    const double s = shooting_s(sc, 1e-6, cheap_options(), nullptr, nullptr);
    CHECK(s < 0.0);
    CHECK(s == doctest::Approx(rp_coast - kC.r_c).epsilon(1e-5));
}

TEST_CASE("the shooting function increases with the thrust bound") {
    const OcpScenario sc = insertion_scenario();
    const SolverOptions opts = cheap_options();
    double prev = -1e18;
    for (const double tau : {2.0, 8.0, 14.0, 20.0}) {
        const double s = shooting_s(sc, tau, opts, nullptr, nullptr);
        CHECK(s > prev);
        prev = s;
    }
    CHECK(prev > 0.0);  // 20 N is comfortably feasible
}

TEST_CASE("insertion solutions expose a consistent perigee-match trajectory") {
    const OcpScenario sc = insertion_scenario();
    OcpSolution sol;
    const double s = shooting_s(sc, 8.0, cheap_options(), nullptr, &sol);

    CHECK(sol.tau == 8.0);
    CHECK(sol.t_f > 0.0);
    CHECK(sol.t_f == doctest::Approx(sol.trajectory.duration()));
    CHECK(sol.trajectory.terminal_reason == TerminalReason::PerigeeMatch);
    CHECK(s == doctest::Approx(sol.terminal_rp - kC.r_c));

    // the returned perigee is the osculating perigee of the terminal state
    const StateVector& xe = sol.trajectory.terminal().state.x;
    CHECK(sol.terminal_rp == doctest::Approx(perigee_apogee(xe, kC.mu).perigee).epsilon(1e-12));
    // the event means: current radius equals the osculating perigee radius
    CHECK(xe.r.norm() == doctest::Approx(sol.terminal_rp).epsilon(1e-9));

    // thrust runs at the bound along the whole arc
    for (const TrajectorySample& smp : sol.trajectory.samples) {
        CHECK(smp.tau.norm() == doctest::Approx(8.0).epsilon(1e-9));
    }
    // mass decreases at exactly beta*tau
    const double m_end = sol.trajectory.terminal().state.m;
    CHECK(m_end == doctest::Approx(150.0 - sc.engine.beta * 8.0 * sol.t_f).epsilon(1e-10));

    // forward replay of an insertion is the trajectory itself
    const Trajectory fwd = forward_mission(sc, sol);
    CHECK(fwd.samples.size() == sol.trajectory.samples.size());
    CHECK((fwd.terminal().state.x.r - xe.r).norm() < 1e-9);
}

TEST_CASE("warm starts reproduce the cold solution cheaply") {
    const OcpScenario sc = insertion_scenario();
    const SolverOptions opts = cheap_options();
    OcpSolution cold;
    const double s_cold = shooting_s(sc, 8.0, opts, nullptr, &cold);

    OcpSolution warm;
    const double s_warm = shooting_s(sc, 8.5, opts, &cold, &warm);
    CHECK(std::fabs(s_warm - s_cold) < 100'000.0);  // same basin, nearby thrust
    CHECK(s_warm > s_cold);                         // monotone in tau
    CHECK(warm.diagnostics.best_start == -1);       // the warm seed won
}

TEST_CASE("de-orbit solves anchor the backward mass at the start mass") {
    const OcpScenario sc = deorbit_scenario();
    SolverOptions opts = cheap_options();
    opts.mass_fixed_point_tol = 1e-9;

    OcpSolution sol;
    const double s = shooting_s(sc, 13'000.0, opts, nullptr, &sol);
    CHECK(s < 0.0);  // below the limiting thrust: start orbit still dips

    // the backward run starts at EI with the converged m_f and must end at
    // the declared mission start mass
    const double m_terminal = sol.trajectory.terminal().state.m;
    CHECK(m_terminal == doctest::Approx(sc.anchor_mass).epsilon(1e-8));
    CHECK(sol.backward_start_mass ==
          doctest::Approx(sc.anchor_mass - sc.engine.beta * 13'000.0 * sol.t_f)
              .epsilon(1e-8));
    CHECK(sol.backward_start_mass < sc.anchor_mass);
    CHECK(sol.diagnostics.mass_rounds >= 1);

    // backward integration grows mass monotonically
    CHECK(sol.trajectory.samples.front().state.m ==
          doctest::Approx(sol.backward_start_mass));
}

TEST_CASE("replaying a de-orbit forward in time reproduces the entry interface") {
    const OcpScenario sc = deorbit_scenario();
    OcpSolution sol;
    shooting_s(sc, 13'000.0, cheap_options(), nullptr, &sol);

    const Trajectory fwd = forward_mission(sc, sol);

    // forward start = velocity-mirrored backward endpoint (the mission start)
    const SatelliteState& b_end = sol.trajectory.terminal().state;
    CHECK((fwd.samples.front().state.x.r - b_end.x.r).norm() < 1e-9);
    CHECK((fwd.samples.front().state.x.v + b_end.x.v).norm() < 1e-9);

    // forward endpoint = entry interface state with the mission-start mass
    // consumed down to the backward anchor mass
    const SatelliteState& f_end = fwd.terminal().state;
    CHECK((f_end.x.r - sc.anchor.r).norm() < 1e-6 * sc.anchor.r.norm());
    CHECK((f_end.x.v + sc.anchor.v).norm() < 1e-6 * sc.anchor.v.norm());
    CHECK(f_end.m == doctest::Approx(sol.backward_start_mass).epsilon(1e-6));
}

TEST_CASE("solve validations reject ill-posed missions") {
    // insertion anchor must be in P-minus
    OcpScenario sc = insertion_scenario();
    const double r = kC.r_c + 600'000.0;
    sc.anchor = state_from_scalars(r, std::sqrt(kC.mu / r), 0.0, Vec3::UnitX(),
                                   Vec3::UnitY());
    CHECK_THROWS_AS(solve_ocp(sc, 8.0, cheap_options()), Error);

    // negative thrust bound
    OcpScenario sc2 = insertion_scenario();
    CHECK_THROWS_AS(solve_ocp(sc2, -1.0, cheap_options()), Error);

    // de-orbit anchor must describe a bound orbit
    OcpScenario sc3 = deorbit_scenario();
    sc3.anchor.v *= 2.0;
    CHECK_THROWS_AS(solve_ocp(sc3, 13'000.0, cheap_options()), Error);

    // thrust-duration product beyond the start mass cannot be anchored
    OcpScenario sc4 = deorbit_scenario();
    CHECK_THROWS_AS(solve_ocp(sc4, 150'000.0, cheap_options()), Error);
}

TEST_CASE("scenario hashes are stable and input-sensitive") {
    const OcpScenario a = insertion_scenario();
    OcpScenario b = insertion_scenario();
    CHECK(scenario_hash(a) == scenario_hash(b));

    b.anchor_mass += 1.0;
    CHECK(scenario_hash(a) != scenario_hash(b));

    OcpScenario c = insertion_scenario();
    c.kind = MissionKind::Dop;
    CHECK(scenario_hash(a) != scenario_hash(c));
}

TEST_CASE("summary records are single-line JSON with the solve facts") {
    const OcpScenario sc = insertion_scenario();
    OcpSolution sol;
    shooting_s(sc, 8.0, cheap_options(), nullptr, &sol);

    const std::string line = summary_record(sc, sol);
    CHECK(line.find('\n') == std::string::npos);

    const nlohmann::json j = nlohmann::json::parse(line);
    CHECK(j.at("scenario").get<std::string>() == "oip_test");
    CHECK(j.at("kind").get<std::string>() == "oip");
    CHECK(j.at("tau_n").get<double>() == doctest::Approx(8.0));
    CHECK(j.at("t_f_s").get<double>() == doctest::Approx(sol.t_f));
    CHECK(j.at("terminal_rp_m").get<double>() == doctest::Approx(sol.terminal_rp));
    CHECK(j.contains("hash"));
    CHECK(j.contains("converged"));
}
