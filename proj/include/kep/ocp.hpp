#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kep/propagator.hpp"

namespace kep {

/// Mission family. Oip drives the anchor state forward to its first
/// perigee passage; Dop integrates the time-reversed system from the entry
/// interface (the caller supplies the velocity-negated anchor), restoring
/// propellant as it goes.
enum class MissionKind { Oip, Dop };

struct OcpScenario {
    MissionKind kind = MissionKind::Oip;
    StateVector anchor;        ///< Oip: mission start. Dop: (r_f, -v_f) at entry interface.
    double anchor_mass = 0.0;  ///< mission start mass m_i [kg]
    EngineParameters engine;   ///< tau_bound here acts as a default; solves take tau explicitly
    PhysicalConstants constants;
    std::string name;          ///< label used in exported records
};

/// Direct-parameterization settings for the inner perigee-maximization.
struct SolverOptions {
    int knots = 16;               ///< steering knots for the main stage
    int refined_knots = 64;       ///< knots for the refinement stage
    bool refine = true;           ///< run the refinement stage
    int max_iterations = 120;     ///< quasi-Newton cap, main stage
    int refine_max_iterations = 40;
    double fd_step = 1e-6;        ///< forward-difference step on knot angles [rad]
    double step_tol = 1e-10;      ///< termination on the step infinity-norm [rad]
    double stall_tol = 1e-4;      ///< objective stall threshold [m]
    int stall_iters = 5;
    double horizon_factor = 1.6;  ///< knot horizon over the coast time-to-perigee
    double t_max_periods = 10.0;  ///< event horizon in osculating periods
    bool multi_start = true;      ///< tangential/antitangential/+-45 degree seeds
    bool parallel_starts = true;  ///< run seeds through std::async
    bool full_thrust = true;      ///< false adds throttle knots (diagnostic mode)
    bool out_of_plane = false;    ///< adds a second steering angle profile
    double mass_fixed_point_tol = 1e-9; ///< relative, Dop backward mass anchoring
    int mass_fixed_point_max = 12;
    IntegratorOptions integrator;
};

struct OcpDiagnostics {
    int iterations = 0;       ///< quasi-Newton iterations, winning seed (all stages)
    int propagations = 0;     ///< objective evaluations across all seeds
    int best_start = -1;      ///< index of the winning seed (-1: warm start won)
    int mass_rounds = 0;      ///< Dop backward-mass fixed-point rounds
    std::vector<std::string> notes;
};

/// Result of one inner solve at a fixed thrust magnitude.
struct OcpSolution {
    Trajectory trajectory;     ///< anchor-time trajectory; Dop runs carry growing mass
    double t_f = 0.0;          ///< time of the perigee-match event [s]
    double terminal_rp = 0.0;  ///< osculating perigee radius at t_f [m]
    double tau = 0.0;          ///< thrust magnitude used [N]
    bool converged = false;
    double backward_start_mass = 0.0; ///< Dop: converged anchor mass m_f [kg]; Oip: anchor_mass
    std::vector<double> knot_times;   ///< steering grid [s]
    std::vector<double> knot_angles;  ///< in-plane steering angles at the knots [rad]
    OcpDiagnostics diagnostics;
};

/// Maximizes the perigee radius reached at the first perigee-match event
/// under constant-magnitude thrust tau [N], steering parameterized as a
/// cubic spline of the angle from the instantaneous velocity direction.
/// An optional warm start seeds the solve with a previous solution's knots
/// (and, for Dop, its backward mass estimate).
/// Throws EventNeverFires when the best trajectory never matches perigee
/// within the horizon, NoConvergence when no seed produces a usable
/// solution, InvalidParameter for tau < 0 or an anchor of the wrong region.
OcpSolution solve_ocp(const OcpScenario& sc, double tau,
                      const SolverOptions& opts = {},
                      const OcpSolution* warm = nullptr);

/// Shooting function s(tau) = terminal_rp - r_c [m]. Negative values mean
/// the thrust bound is too small to finish the mission above the
/// atmosphere. Optionally returns the full solution for warm starting.
double shooting_s(const OcpScenario& sc, double tau,
                  const SolverOptions& opts = {},
                  const OcpSolution* warm = nullptr,
                  OcpSolution* solution_out = nullptr);

/// Real-time mission trajectory. For Oip this copies the solution
/// trajectory. For Dop it forward-integrates the de-orbit burn from the
/// reversed terminal state with the time-mirrored control; the endpoint
/// reproduces the entry-interface anchor (position exactly, velocity
/// negated) to integration accuracy.
Trajectory forward_mission(const OcpScenario& sc, const OcpSolution& sol);

/// Stable fingerprint of a scenario's physical content (name, kind, anchor,
/// mass, engine, constants), for correlating exported records.
uint64_t scenario_hash(const OcpScenario& sc);

/// One line of the machine-readable run record (JSON object per line):
/// scenario hash, thrust, event time, terminal perigee, convergence flag,
/// iteration count.
std::string summary_record(const OcpScenario& sc, const OcpSolution& sol);

} // namespace kep
