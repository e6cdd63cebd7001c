#pragma once

/// @file oracles.hpp
/// @brief Independent reference implementations for tests.
///
/// Everything here is deliberately written against textbook formulas and a
/// plain fixed-step integrator, sharing no code with the library's
/// production paths, so tests compare two independent derivations.

#include <cmath>
#include <functional>
#include <random>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "kep/astro.hpp"

namespace oracle {

using kep::Vec3;

/// State assembled in the perifocal frame from classical elements, then
/// rotated by the 3-1-3 sequence (raan, inc, omega). Independent of the
/// library's equinoctial route.
inline kep::StateVector state_from_coe(double a, double e, double inc, double omega,
                                       double raan, double theta, double mu) {
    const double p = a * (1.0 - e * e);
    const double r = p / (1.0 + e * std::cos(theta));
    const Vec3 r_pf(r * std::cos(theta), r * std::sin(theta), 0.0);
    const double vs = std::sqrt(mu / p);
    const Vec3 v_pf(-vs * std::sin(theta), vs * (e + std::cos(theta)), 0.0);

    const Eigen::AngleAxisd R3_raan(raan, Vec3::UnitZ());
    const Eigen::AngleAxisd R1_inc(inc, Vec3::UnitX());
    const Eigen::AngleAxisd R3_omega(omega, Vec3::UnitZ());
    const Eigen::Matrix3d rot = (R3_raan * R1_inc * R3_omega).toRotationMatrix();

    kep::StateVector x;
    x.r = rot * r_pf;
    x.v = rot * v_pf;
    return x;
}

/// Classic fixed-step fourth-order Runge-Kutta on an Eigen vector ODE.
inline Eigen::VectorXd rk4(const std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>& f,
                           Eigen::VectorXd y, double t0, double t1, int steps) {
    const double h = (t1 - t0) / steps;
    double t = t0;
    for (int i = 0; i < steps; ++i) {
        const Eigen::VectorXd k1 = f(t, y);
        const Eigen::VectorXd k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
        const Eigen::VectorXd k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
        const Eigen::VectorXd k4 = f(t + h, y + h * k3);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
    }
    return y;
}

/// Two-body drift right-hand side on a packed (r, v) 6-vector.
inline Eigen::VectorXd drift6(const Eigen::VectorXd& y, double mu) {
    Eigen::VectorXd dy(6);
    const Vec3 r = y.head<3>();
    const Vec3 v = y.tail<3>();
    dy.head<3>() = v;
    dy.tail<3>() = -mu * r / std::pow(r.norm(), 3);
    return dy;
}

/// Central finite-difference Jacobian of f at x.
inline Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double h) {
    const Eigen::VectorXd f0 = f(x);
    Eigen::MatrixXd J(f0.size(), x.size());
    for (int j = 0; j < x.size(); ++j) {
        Eigen::VectorXd xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        J.col(j) = (f(xp) - f(xm)) / (2.0 * h);
    }
    return J;
}

/// Deterministic sampler of bound, elliptic states above the atmosphere.
/// Draws radius in [1.01, 4] * r_c, a sub-escape speed well away from both
/// zero and the parabolic limit, and a flight-path angle in (-80, 80) deg,
/// then rejects anything that is not elliptic with h > 0 and r > r_c.
class BoundStateSampler {
  public:
    BoundStateSampler(const kep::PhysicalConstants& c, std::uint64_t seed)
        : c_(c), rng_(seed) {}

    kep::StateVector sample() {
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        for (;;) {
            const double r = c_.r_c * (1.01 + 2.99 * u01(rng_));
            const double v_esc = std::sqrt(2.0 * c_.mu / r);
            const double v = v_esc * (0.30 + 0.65 * u01(rng_));
            const double eta = (u01(rng_) * 2.0 - 1.0) * (80.0 * M_PI / 180.0);
            const Vec3 axis = random_unit();
            const Vec3 e1 = axis.unitOrthogonal();
            const Vec3 e2 = axis.cross(e1).normalized();
            kep::StateVector x;
            x.r = r * e1;
            x.v = v * (std::sin(eta) * e1 + std::cos(eta) * e2);
            if (kep::specific_energy(x, c_.mu) >= -1e-3 * c_.mu / r) continue;
            if (kep::angular_momentum(x).norm() < 1e-6 * r * v) continue;
            return x;
        }
    }

    /// Sample whose whole osculating orbit stays above the atmosphere.
    kep::StateVector sample_pplus() {
        for (;;) {
            const kep::StateVector x = sample();
            if (kep::classify(x, c_) == kep::RegionClass::PPlus) return x;
        }
    }

    Vec3 random_unit() {
        std::normal_distribution<double> n01(0.0, 1.0);
        for (;;) {
            const Vec3 v(n01(rng_), n01(rng_), n01(rng_));
            if (v.norm() > 1e-3) return v.normalized();
        }
    }

    std::mt19937_64& rng() { return rng_; }

  private:
    kep::PhysicalConstants c_;
    std::mt19937_64 rng_;
};

}  // namespace oracle
