#pragma once

/// @file csv.hpp
/// @brief Deterministic CSV and report emission for trajectories and searches.
///
/// All numbers are written with "%.15g", so repeated runs of the same
/// computation produce byte-identical files.  No timestamps or environment
/// data are embedded.

#include <string>
#include <vector>

#include "kep/astro.hpp"
#include "kep/controllability.hpp"
#include "kep/limiting_thrust.hpp"
#include "kep/propagator.hpp"

namespace kep {

/// @brief Writes one row per trajectory sample:
/// t_s, rx_m..rz_m, vx_m_s..vz_m_s, m_kg, taux_n..tauz_n, rp_m, ra_m, e, energy_m2_s2.
/// ra_m is nan on non-elliptic samples (escape arcs have no apogee).
/// @throws Error MissingTrajectory when there are no samples, IoError on write failure.
void write_trajectory_csv(const std::string& path, const Trajectory& traj, double mu);

/// Plot-ready data sets derived from a trajectory.
enum class FigureKind {
    RadiusAndPerigeeVsTime,  ///< t_s, r_m, rp_m, rc_m
    PlanarTrajectory,        ///< series (path|boundary), x_m, y_m in the initial orbit plane
};

/// @brief Writes figure data for @p kind.
///
/// PlanarTrajectory projects every sample onto the plane spanned by the first
/// sample's radial direction and its in-plane transverse companion, then
/// appends a 512-point circle of radius r_c labelled "boundary".
/// @throws Error MissingTrajectory when there are no samples, IoError on write failure.
void write_figure_csv(const std::string& path, const Trajectory& traj, FigureKind kind,
                      const PhysicalConstants& constants);

/// @brief Writes spiral samples: t_s, r_m, theta_rad, m_kg, tau_n.
/// @throws Error IoError on write failure.
void write_spiral_csv(const std::string& path, const SpiralResult& spiral);

/// @brief Writes an element-space path: lambda, p_m, ex, ey, hx, hy, l_rad, rp_m, ra_m.
/// @throws Error InvalidParameter when @p path_points is empty, IoError on write failure.
void write_meoe_path_csv(const std::string& path, const std::vector<Meoe>& path_points,
                         double mu);

/// @brief Writes a human-readable account of a limiting-thrust search:
/// the verdict block followed by one line per evaluation in search order.
/// @throws Error IoError on write failure.
void write_bisection_report(const std::string& path, const BisectionReport& report);

/// @brief Replaces @p path with the given lines (newline appended to each).
/// Overwrites rather than appends so reruns stay byte-identical.
/// @throws Error IoError on write failure.
void write_lines(const std::string& path, const std::vector<std::string>& lines);

}  // namespace kep
