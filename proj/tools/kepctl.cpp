/// @file kepctl.cpp
/// @brief Command-line front end: classify states, convert elements,
/// propagate coasts, construct spirals and element paths, solve single
/// missions, and search for the limiting thrust.
///
/// Exit codes: 0 on success, 2 for unusable input (bad arguments, scenario
/// violations, unreadable files, states outside the required region), 3 for
/// computation failures (no convergence, no bracket, missed events).

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "kep/csv.hpp"
#include "kep/elements.hpp"
#include "kep/scenario.hpp"

namespace fs = std::filesystem;
using namespace kep;

namespace {

std::string g15(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

std::string deg(double rad) { return g15(rad * 180.0 / M_PI); }

/// Input-side failures exit with 2, computation failures with 3.
int exit_code_for(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidParameter:
    case ErrorCode::NotPeriodic:
    case ErrorCode::ZeroVelocity:
    case ErrorCode::DegenerateBasis:
    case ErrorCode::SingularElements:
    case ErrorCode::NonPositiveW:
    case ErrorCode::NotInPMinus:
    case ErrorCode::EndpointOutsideRegion:
    case ErrorCode::ScenarioError:
    case ErrorCode::MissingTrajectory:
    case ErrorCode::IoError:
        return 2;
    case ErrorCode::OriginSingularity:
    case ErrorCode::NonPositiveMass:
    case ErrorCode::StepSizeUnderflow:
    case ErrorCode::BoundViolated:
    case ErrorCode::GramianSingular:
    case ErrorCode::NoConvergence:
    case ErrorCode::EventNeverFires:
    case ErrorCode::BracketFailure:
    case ErrorCode::InnerSolverFailure:
        return 3;
    }
    return 3;
}

/// Output directory precedence: --out flag, KEPCTL_OUTPUT_DIR, the
/// scenario's output_dir, the working directory.
fs::path resolve_out_dir(const std::string& flag, const ScenarioFile& sc) {
    std::string dir;
    if (!flag.empty()) {
        dir = flag;
    } else if (const char* env = std::getenv("KEPCTL_OUTPUT_DIR"); env && *env) {
        dir = env;
    } else if (!sc.output_dir.empty()) {
        dir = sc.output_dir;
    } else {
        dir = ".";
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create output directory: " + dir);
    return dir;
}

std::string out_file(const fs::path& dir, const std::string& name,
                     const std::string& suffix) {
    return (dir / (name + suffix)).string();
}

void print_wrote(const std::string& path) { std::cout << "wrote: " << path << '\n'; }

int run_classify(const std::string& scenario_path) {
    const ScenarioFile sc = load_scenario(scenario_path);
    const RegionClass region = classify(sc.state, sc.constants);

    std::cout << "scenario: " << sc.name << '\n';
    std::cout << "region: " << region_name(region) << '\n';
    std::cout << "radius_m: " << g15(sc.state.r.norm()) << '\n';
    std::cout << "speed_m_s: " << g15(sc.state.v.norm()) << '\n';
    if (sc.state.v.norm() > 0.0) {
        std::cout << "flight_path_angle_deg: " << deg(flight_path_angle(sc.state)) << '\n';
    }
    std::cout << "energy_m2_s2: " << g15(specific_energy(sc.state, sc.constants.mu)) << '\n';
    std::cout << "angular_momentum_m2_s: " << g15(angular_momentum(sc.state).norm())
              << '\n';
    if (region != RegionClass::NonElliptic && region != RegionClass::Colinear) {
        const ApsisRadii pa = perigee_apogee(sc.state, sc.constants.mu);
        std::cout << "rp_m: " << g15(pa.perigee) << '\n';
        std::cout << "ra_m: " << g15(pa.apogee) << '\n';
        std::cout << "period_s: " << g15(orbital_period(sc.state, sc.constants.mu))
                  << '\n';
        std::cout << "rp_above_atmosphere_m: " << g15(pa.perigee - sc.constants.r_c)
                  << '\n';
    }
    return 0;
}

int run_elements(const std::string& scenario_path) {
    const ScenarioFile sc = load_scenario(scenario_path);
    std::cout << "scenario: " << sc.name << '\n';
    try {
        const Coe coe = coe_from_state(sc.state, sc.constants.mu);
        std::cout << "coe.a_m: " << g15(coe.a) << '\n';
        std::cout << "coe.e: " << g15(coe.e) << '\n';
        std::cout << "coe.i_deg: " << deg(coe.inc) << '\n';
        std::cout << "coe.raan_deg: " << deg(coe.raan) << '\n';
        std::cout << "coe.omega_deg: " << deg(coe.omega) << '\n';
        std::cout << "coe.theta_deg: " << deg(coe.theta) << '\n';
    } catch (const Error& err) {
        if (err.code() != ErrorCode::SingularElements && err.code() != ErrorCode::NotPeriodic)
            throw;
        std::cout << "coe: undefined (" << err.what() << ")\n";
    }
    try {
        const Meoe meoe = meoe_from_state(sc.state, sc.constants.mu);
        std::cout << "meoe.p_m: " << g15(meoe.p) << '\n';
        std::cout << "meoe.ex: " << g15(meoe.ex) << '\n';
        std::cout << "meoe.ey: " << g15(meoe.ey) << '\n';
        std::cout << "meoe.hx: " << g15(meoe.hx) << '\n';
        std::cout << "meoe.hy: " << g15(meoe.hy) << '\n';
        std::cout << "meoe.l_rad: " << g15(meoe.l) << '\n';
    } catch (const Error& err) {
        if (err.code() != ErrorCode::SingularElements) throw;
        std::cout << "meoe: undefined (" << err.what() << ")\n";
    }
    return 0;
}

int run_propagate(const std::string& scenario_path, double t_max_flag,
                  const std::string& out_flag, bool figures) {
    const ScenarioFile sc = load_scenario(scenario_path);
    const fs::path dir = resolve_out_dir(out_flag, sc);

    double t_max = t_max_flag > 0.0 ? t_max_flag : sc.t_max_s;
    if (t_max <= 0.0) {
        try {
            t_max = orbital_period(sc.state, sc.constants.mu);
        } catch (const Error&) {
            throw Error(ErrorCode::InvalidParameter,
                        "state is not periodic; give --t-max or t_max_s");
        }
    }

    const Trajectory traj =
        propagate(sc.satellite(), ControlLaw::zero(), t_max, {}, Direction::Forward,
                  sc.constants, sc.engine, IntegratorOptions{});

    std::cout << "scenario: " << sc.name << '\n';
    std::cout << "duration_s: " << g15(traj.duration()) << '\n';
    std::cout << "samples: " << traj.samples.size() << '\n';
    const StateVector& xe = traj.terminal().state.x;
    std::cout << "terminal_radius_m: " << g15(xe.r.norm()) << '\n';
    std::cout << "terminal_speed_m_s: " << g15(xe.v.norm()) << '\n';

    const std::string traj_path = out_file(dir, sc.name, "_trajectory.csv");
    write_trajectory_csv(traj_path, traj, sc.constants.mu);
    print_wrote(traj_path);
    if (figures) {
        const std::string radius_path = out_file(dir, sc.name, "_radius_vs_time.csv");
        write_figure_csv(radius_path, traj, FigureKind::RadiusAndPerigeeVsTime,
                         sc.constants);
        print_wrote(radius_path);
        const std::string plane_path = out_file(dir, sc.name, "_plane.csv");
        write_figure_csv(plane_path, traj, FigureKind::PlanarTrajectory, sc.constants);
        print_wrote(plane_path);
    }
    return 0;
}

int run_spiral(const std::string& scenario_path, int samples,
               const std::string& out_flag) {
    const ScenarioFile sc = load_scenario(scenario_path);
    if (sc.engine.beta <= 0.0) {
        throw Error(ErrorCode::InvalidParameter,
                    "engine.isp_s is required for spiral construction");
    }
    const fs::path dir = resolve_out_dir(out_flag, sc);

    SpiralConfig cfg;
    cfg.n_samples = samples;
    const SpiralResult spiral = spiral_construct(sc.satellite(), sc.constants, sc.engine, cfg);

    std::cout << "scenario: " << sc.name << '\n';
    std::cout << "duration_s: " << g15(spiral.t_bar) << '\n';
    std::cout << "thrust_bound_n: " << g15(spiral.tau_bar) << '\n';
    std::cout << "speed_coefficient: " << g15(spiral.c0) << '\n';
    std::cout << "curvature: " << g15(spiral.kappa) << '\n';
    std::cout << "terminal_radius_m: " << g15(spiral.terminal.x.r.norm()) << '\n';
    std::cout << "terminal_rp_m: "
              << g15(perigee_apogee(spiral.terminal.x, sc.constants.mu).perigee) << '\n';

    const std::string path = out_file(dir, sc.name, "_spiral.csv");
    write_spiral_csv(path, spiral);
    print_wrote(path);
    return 0;
}

int run_path(const std::string& scenario_path, const std::string& target_path,
             const std::string& mode_name, int samples, const std::string& out_flag) {
    const ScenarioFile sc = load_scenario(scenario_path);
    const ScenarioFile target = load_scenario(target_path);
    if ((sc.constants.mu != target.constants.mu) ||
        (sc.constants.r_c != target.constants.r_c)) {
        throw Error(ErrorCode::ScenarioError,
                    "constants: scenario and target must share the same constants");
    }
    const PathMode mode = mode_name == "admissible" ? PathMode::AdmissibleA
                                                    : PathMode::StablePPlus;
    const fs::path dir = resolve_out_dir(out_flag, sc);

    const Meoe from = meoe_from_state(sc.state, sc.constants.mu);
    const Meoe to = meoe_from_state(target.state, target.constants.mu);
    const std::vector<Meoe> path = meoe_path(from, to, mode, samples, sc.constants);

    std::cout << "scenario: " << sc.name << '\n';
    std::cout << "target: " << target.name << '\n';
    std::cout << "mode: " << (mode == PathMode::AdmissibleA ? "admissible" : "stable-pplus")
              << '\n';
    std::cout << "samples: " << path.size() << '\n';

    const std::string csv_path = out_file(dir, sc.name + "_to_" + target.name, "_path.csv");
    write_meoe_path_csv(csv_path, path, sc.constants.mu);
    print_wrote(csv_path);
    return 0;
}

int run_ocp(const std::string& scenario_path, double tau, const std::string& out_flag,
            bool figures) {
    const ScenarioFile sc = load_scenario(scenario_path);
    const fs::path dir = resolve_out_dir(out_flag, sc);

    const OcpScenario mission = sc.ocp();
    const OcpSolution sol = solve_ocp(mission, tau, sc.solver);
    const Trajectory forward = forward_mission(mission, sol);

    std::cout << "scenario: " << sc.name << '\n';
    std::cout << "tau_n: " << g15(sol.tau) << '\n';
    std::cout << "t_f_s: " << g15(sol.t_f) << '\n';
    std::cout << "terminal_rp_m: " << g15(sol.terminal_rp) << '\n';
    std::cout << "s_m: " << g15(sol.terminal_rp - sc.constants.r_c) << '\n';
    std::cout << "converged: " << (sol.converged ? "yes" : "no") << '\n';
    std::cout << "iterations: " << sol.diagnostics.iterations << '\n';
    if (mission.kind == MissionKind::Dop) {
        std::cout << "mass_at_entry_kg: " << g15(sol.backward_start_mass) << '\n';
    }

    const std::string mission_path = out_file(dir, sc.name, "_mission.csv");
    write_trajectory_csv(mission_path, forward, sc.constants.mu);
    print_wrote(mission_path);
    const std::string summary_path = out_file(dir, sc.name, "_summary.json");
    write_lines(summary_path, {summary_record(mission, sol)});
    print_wrote(summary_path);
    if (figures) {
        const std::string radius_path = out_file(dir, sc.name, "_radius_vs_time.csv");
        write_figure_csv(radius_path, forward, FigureKind::RadiusAndPerigeeVsTime,
                         sc.constants);
        print_wrote(radius_path);
        const std::string plane_path = out_file(dir, sc.name, "_plane.csv");
        write_figure_csv(plane_path, forward, FigureKind::PlanarTrajectory, sc.constants);
        print_wrote(plane_path);
    }
    return 0;
}

int run_tau_max(const std::string& scenario_path, double tau_lo_flag, double tau_hi_flag,
                double tol_flag, const std::string& out_flag) {
    const ScenarioFile sc = load_scenario(scenario_path);
    const fs::path dir = resolve_out_dir(out_flag, sc);

    const double tau_lo = tau_lo_flag > 0.0 ? tau_lo_flag : sc.tau_lo;
    const double tau_hi = tau_hi_flag > 0.0 ? tau_hi_flag : sc.tau_hi;
    if (tau_lo <= 0.0 || tau_hi <= 0.0) {
        throw Error(ErrorCode::InvalidParameter,
                    "bracket missing: give bisection.tau_lo_n/tau_hi_n or --tau-lo/--tau-hi");
    }
    BisectionOptions opts = sc.bisection;
    if (tol_flag > 0.0) opts.tol = tol_flag;

    const BisectionReport report = find_tau_max(sc.ocp(), tau_lo, tau_hi, opts);

    std::cout << "scenario: " << sc.name << '\n';
    std::cout << "tau_max_n: " << g15(report.tau_max) << '\n';
    std::cout << "s_at_tau_max_m: " << g15(report.s_at_tau_max) << '\n';
    std::cout << "tau_at_width_tol_n: " << g15(report.tau_at_width_tol) << '\n';
    std::cout << "bracket_width_n: " << g15(report.tolerance_achieved) << '\n';
    std::cout << "evaluations: " << report.evaluations << '\n';
    for (const std::string& w : report.warnings) std::cout << "warning: " << w << '\n';

    const std::string report_path = out_file(dir, sc.name, "_search.txt");
    write_bisection_report(report_path, report);
    print_wrote(report_path);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Controlled Keplerian motion: mission feasibility under bounded thrust"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string target_path;
    std::string out_flag;
    std::string mode_name = "stable-pplus";
    double t_max_flag = 0.0;
    double tau = 0.0;
    double tau_lo_flag = 0.0;
    double tau_hi_flag = 0.0;
    double tol_flag = 0.0;
    int spiral_samples = 200;
    int path_samples = 101;
    bool figures = false;

    CLI::App* classify_cmd =
        app.add_subcommand("classify", "Report the region and first integrals of a state");
    classify_cmd->add_option("--scenario", scenario_path, "Scenario file")->required();

    CLI::App* elements_cmd =
        app.add_subcommand("elements", "Convert the scenario state to orbital elements");
    elements_cmd->add_option("--scenario", scenario_path, "Scenario file")->required();

    CLI::App* propagate_cmd =
        app.add_subcommand("propagate", "Integrate the coasting motion and export CSV");
    propagate_cmd->add_option("--scenario", scenario_path, "Scenario file")->required();
    propagate_cmd->add_option("--t-max", t_max_flag, "Horizon [s] (default: t_max_s or one period)");
    propagate_cmd->add_option("--out", out_flag, "Output directory");
    propagate_cmd->add_flag("--figures", figures, "Also write figure CSV files");

    CLI::App* spiral_cmd = app.add_subcommand(
        "spiral", "Construct the analytic exit spiral from the scenario state");
    spiral_cmd->add_option("--scenario", scenario_path, "Scenario file")->required();
    spiral_cmd->add_option("--samples", spiral_samples, "Sample count")
        ->check(CLI::PositiveNumber);
    spiral_cmd->add_option("--out", out_flag, "Output directory");

    CLI::App* path_cmd = app.add_subcommand(
        "path", "Sample an element-space path between two scenario states");
    path_cmd->add_option("--scenario", scenario_path, "Start scenario file")->required();
    path_cmd->add_option("--target", target_path, "Target scenario file")->required();
    path_cmd->add_option("--mode", mode_name, "Path mode")
        ->check(CLI::IsMember({"stable-pplus", "admissible"}));
    path_cmd->add_option("--samples", path_samples, "Sample count")
        ->check(CLI::PositiveNumber);
    path_cmd->add_option("--out", out_flag, "Output directory");

    CLI::App* ocp_cmd = app.add_subcommand(
        "ocp", "Solve one mission at a fixed thrust bound and export the burn");
    ocp_cmd->add_option("--scenario", scenario_path, "Scenario file")->required();
    ocp_cmd->add_option("--tau", tau, "Thrust bound [N]")->required();
    ocp_cmd->add_option("--out", out_flag, "Output directory");
    ocp_cmd->add_flag("--figures", figures, "Also write figure CSV files");

    CLI::App* tau_max_cmd = app.add_subcommand(
        "tau-max", "Search for the limiting thrust separating mission feasibility");
    tau_max_cmd->add_option("--scenario", scenario_path, "Scenario file")->required();
    tau_max_cmd->add_option("--tau-lo", tau_lo_flag, "Bracket lower bound [N]");
    tau_max_cmd->add_option("--tau-hi", tau_hi_flag, "Bracket upper bound [N]");
    tau_max_cmd->add_option("--tol", tol_flag, "Bracket width stop [N]");
    tau_max_cmd->add_option("--out", out_flag, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (classify_cmd->parsed()) return run_classify(scenario_path);
        if (elements_cmd->parsed()) return run_elements(scenario_path);
        if (propagate_cmd->parsed())
            return run_propagate(scenario_path, t_max_flag, out_flag, figures);
        if (spiral_cmd->parsed()) return run_spiral(scenario_path, spiral_samples, out_flag);
        if (path_cmd->parsed())
            return run_path(scenario_path, target_path, mode_name, path_samples, out_flag);
        if (ocp_cmd->parsed()) return run_ocp(scenario_path, tau, out_flag, figures);
        if (tau_max_cmd->parsed())
            return run_tau_max(scenario_path, tau_lo_flag, tau_hi_flag, tol_flag, out_flag);
    } catch (const Error& err) {
        std::cerr << "kepctl: " << err.what() << '\n';
        return exit_code_for(err.code());
    } catch (const std::exception& e) {
        std::cerr << "kepctl: " << e.what() << '\n';
        return 3;
    }
    return 2;
}
