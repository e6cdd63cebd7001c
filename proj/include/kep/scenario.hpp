#pragma once

/// @file scenario.hpp
/// @brief JSON scenario files: strict parsing with mandatory unit suffixes.
///
/// A scenario file bundles everything a mission computation needs: physical
/// constants, engine data, an anchor state, and optional solver/bisection
/// settings.  Parsing is strict by design: unknown keys are rejected with the
/// offending field named, every dimensional quantity carries a unit suffix
/// (radius_m / radius_km, speed_m_s / speed_km_s, angle_rad / angle_deg), and
/// exactly one state representation must be present.

#include <string>

#include "kep/astro.hpp"
#include "kep/limiting_thrust.hpp"
#include "kep/ocp.hpp"

namespace kep {

/// @brief Parsed contents of a scenario file.
///
/// The @c state member always holds the physically declared state.  For
/// de-orbit problems that is the entry-interface state (position and the
/// forward-time velocity at atmosphere arrival); ocp() negates the velocity
/// to form the anchor of the backward system.
struct ScenarioFile {
    std::string name;             ///< identifier used in output file names
    MissionKind kind = MissionKind::Oip;  ///< problem type
    std::string notes;            ///< free-form commentary, not interpreted
    PhysicalConstants constants;  ///< gravitational and boundary constants
    EngineParameters engine;      ///< propulsion data (tau_bound optional)
    double mass = 0.0;            ///< wet mass at the anchor epoch [kg]
    StateVector state;            ///< declared anchor state (SI)

    SolverOptions solver;         ///< inner-solver settings with overrides applied
    BisectionOptions bisection;   ///< outer-search settings with overrides applied
    double tau_lo = 0.0;          ///< bisection bracket, lower thrust bound [N] (0 = unset)
    double tau_hi = 0.0;          ///< bisection bracket, upper thrust bound [N] (0 = unset)

    double t_max_s = 0.0;         ///< propagation horizon [s] (0 = derive from period)
    std::string output_dir;       ///< optional output directory

    /// @brief Builds the optimal-control scenario (negates velocity for Dop).
    OcpScenario ocp() const;

    /// @brief Satellite state (declared state plus anchor mass).
    SatelliteState satellite() const;
};

/// @brief Parses scenario JSON text.  @p origin names the source in errors.
/// @throws Error ScenarioError naming the offending field on any violation.
ScenarioFile parse_scenario(const std::string& json_text, const std::string& origin);

/// @brief Loads and parses a scenario file from disk.
/// @throws Error IoError if unreadable, ScenarioError on content violations.
ScenarioFile load_scenario(const std::string& path);

}  // namespace kep
