#include "kep/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "kep/elements.hpp"

namespace kep {
namespace {

std::string g15(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

std::ofstream open_truncated(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open for writing: " + path);
    return out;
}

void close_checked(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "write failed: " + path);
}

/// Conic shape row: perigee always exists, apogee only when elliptic.
struct ConicRow {
    double rp = 0.0;
    double ra = std::numeric_limits<double>::quiet_NaN();
    double e = 0.0;
    double energy = 0.0;
};

ConicRow conic_row(const StateVector& x, double mu) {
    ConicRow row;
    const double h = angular_momentum(x).norm();
    row.e = laplace_vector(x, mu).norm() / mu;
    row.energy = specific_energy(x, mu);
    row.rp = h * h / (mu * (1.0 + row.e));
    if (row.energy < 0.0) {
        const double a = -mu / (2.0 * row.energy);
        row.ra = 2.0 * a - row.rp;
    }
    return row;
}

}  // namespace

void write_trajectory_csv(const std::string& path, const Trajectory& traj, double mu) {
    if (traj.samples.empty()) {
        throw Error(ErrorCode::MissingTrajectory, "no samples to write: " + path);
    }
    std::ofstream out = open_truncated(path);
    out << "t_s,rx_m,ry_m,rz_m,vx_m_s,vy_m_s,vz_m_s,m_kg,"
           "taux_n,tauy_n,tauz_n,rp_m,ra_m,e,energy_m2_s2\n";
    for (const TrajectorySample& s : traj.samples) {
        const ConicRow row = conic_row(s.state.x, mu);
        out << g15(s.t) << ',' << g15(s.state.x.r.x()) << ',' << g15(s.state.x.r.y()) << ','
            << g15(s.state.x.r.z()) << ',' << g15(s.state.x.v.x()) << ','
            << g15(s.state.x.v.y()) << ',' << g15(s.state.x.v.z()) << ',' << g15(s.state.m)
            << ',' << g15(s.tau.x()) << ',' << g15(s.tau.y()) << ',' << g15(s.tau.z()) << ','
            << g15(row.rp) << ',' << g15(row.ra) << ',' << g15(row.e) << ','
            << g15(row.energy) << '\n';
    }
    close_checked(out, path);
}

void write_figure_csv(const std::string& path, const Trajectory& traj, FigureKind kind,
                      const PhysicalConstants& constants) {
    if (traj.samples.empty()) {
        throw Error(ErrorCode::MissingTrajectory, "no samples to write: " + path);
    }
    std::ofstream out = open_truncated(path);
    if (kind == FigureKind::RadiusAndPerigeeVsTime) {
        out << "t_s,r_m,rp_m,rc_m\n";
        for (const TrajectorySample& s : traj.samples) {
            const ConicRow row = conic_row(s.state.x, constants.mu);
            out << g15(s.t) << ',' << g15(s.state.x.r.norm()) << ',' << g15(row.rp) << ','
                << g15(constants.r_c) << '\n';
        }
    } else {
        const StateVector& first = traj.samples.front().state.x;
        const Vec3 e1 = first.r.normalized();
        Vec3 normal = angular_momentum(first);
        if (normal.norm() < 1e-12 * first.r.norm() * first.v.norm() + 1e-300) {
            normal = e1.unitOrthogonal();
        }
        const Vec3 e2 = normal.normalized().cross(e1);
        out << "series,x_m,y_m\n";
        for (const TrajectorySample& s : traj.samples) {
            out << "path," << g15(s.state.x.r.dot(e1)) << ',' << g15(s.state.x.r.dot(e2))
                << '\n';
        }
        constexpr int kCirclePoints = 512;
        for (int i = 0; i <= kCirclePoints; ++i) {
            const double phi = 2.0 * M_PI * i / kCirclePoints;
            out << "boundary," << g15(constants.r_c * std::cos(phi)) << ','
                << g15(constants.r_c * std::sin(phi)) << '\n';
        }
    }
    close_checked(out, path);
}

void write_spiral_csv(const std::string& path, const SpiralResult& spiral) {
    std::ofstream out = open_truncated(path);
    out << "t_s,r_m,theta_rad,m_kg,tau_n\n";
    for (const SpiralSample& s : spiral.samples) {
        out << g15(s.t) << ',' << g15(s.r) << ',' << g15(s.theta) << ',' << g15(s.m) << ','
            << g15(s.tau) << '\n';
    }
    close_checked(out, path);
}

void write_meoe_path_csv(const std::string& path, const std::vector<Meoe>& path_points,
                         double mu) {
    if (path_points.empty()) {
        throw Error(ErrorCode::InvalidParameter, "empty element path: " + path);
    }
    std::ofstream out = open_truncated(path);
    out << "lambda,p_m,ex,ey,hx,hy,l_rad,rp_m,ra_m\n";
    const std::size_t n = path_points.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Meoe& m = path_points[i];
        const double lambda = (n == 1) ? 0.0 : static_cast<double>(i) / (n - 1);
        const ConicRow row = conic_row(state_from_meoe(m, mu), mu);
        out << g15(lambda) << ',' << g15(m.p) << ',' << g15(m.ex) << ',' << g15(m.ey) << ','
            << g15(m.hx) << ',' << g15(m.hy) << ',' << g15(m.l) << ',' << g15(row.rp) << ','
            << g15(row.ra) << '\n';
    }
    close_checked(out, path);
}

void write_bisection_report(const std::string& path, const BisectionReport& report) {
    std::ofstream out = open_truncated(path);
    out << "limiting-thrust search\n";
    out << "tau_max_n: " << g15(report.tau_max) << '\n';
    out << "s_at_tau_max_m: " << g15(report.s_at_tau_max) << '\n';
    out << "tau_at_width_tol_n: " << g15(report.tau_at_width_tol) << '\n';
    out << "bracket_width_n: " << g15(report.tolerance_achieved) << '\n';
    out << "stopped_on_s_tol: " << (report.stopped_on_s_tol ? "yes" : "no") << '\n';
    out << "evaluations: " << report.evaluations << '\n';
    if (!report.history.empty()) {
        const BracketRecord& last = report.final_bracket();
        out << "final_bracket_n: [" << g15(last.lo) << ", " << g15(last.hi) << "]\n";
    }
    for (const std::string& w : report.warnings) out << "warning: " << w << '\n';
    out << "history (lo_n, hi_n, s_lo_m, s_hi_m):\n";
    for (const BracketRecord& b : report.history) {
        out << "  " << g15(b.lo) << ", " << g15(b.hi) << ", " << g15(b.s_lo) << ", "
            << g15(b.s_hi) << '\n';
    }
    close_checked(out, path);
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream out = open_truncated(path);
    for (const std::string& line : lines) out << line << '\n';
    close_checked(out, path);
}

}  // namespace kep
