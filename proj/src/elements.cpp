#include "kep/elements.hpp"

#include <cmath>

namespace kep {

namespace {

double wrap_two_pi(double angle) {
    double w = std::fmod(angle, 2.0 * M_PI);
    if (w < 0.0) w += 2.0 * M_PI;
    return w;
}

/// Equinoctial in-plane basis (fhat, ghat) from hx, hy. Columns are unit
/// vectors; fhat points toward l = 0.
void equinoctial_basis(double hx, double hy, Vec3& fhat, Vec3& ghat) {
    const double c = 1.0 + hx * hx + hy * hy;
    fhat = Vec3(1.0 + hx * hx - hy * hy, 2.0 * hx * hy, -2.0 * hy) / c;
    ghat = Vec3(2.0 * hx * hy, 1.0 - hx * hx + hy * hy, 2.0 * hx) / c;
}

} // namespace

Coe coe_from_state(const StateVector& x, double mu) {
    const double energy = specific_energy(x, mu);
    if (!(energy < 0.0))
        throw Error(ErrorCode::NotPeriodic, "classical elements require an elliptic orbit");

    const Vec3 h = angular_momentum(x);
    const double hn = h.norm();
    const Vec3 e_vec = laplace_vector(x, mu) / mu;
    const double e = e_vec.norm();

    Coe coe;
    coe.a = -mu / (2.0 * energy);
    coe.e = e;
    coe.inc = std::acos(std::clamp(h.z() / hn, -1.0, 1.0));

    if (e < 1e-10)
        throw Error(ErrorCode::SingularElements,
                    "argument of perigee undefined for near-circular orbit");
    if (std::sin(coe.inc) < 1e-10)
        throw Error(ErrorCode::SingularElements,
                    "node undefined for near-equatorial orbit");

    const Vec3 hhat = h / hn;
    const Vec3 node(-h.y(), h.x(), 0.0); // zhat x h, points to ascending node
    const Vec3 nhat = node.normalized();
    const Vec3 ehat = e_vec / e;

    coe.raan = wrap_two_pi(std::atan2(node.y(), node.x()));
    coe.omega = wrap_two_pi(std::atan2(ehat.dot(hhat.cross(nhat)), ehat.dot(nhat)));
    const Vec3 rhat = x.r.normalized();
    coe.theta = wrap_two_pi(std::atan2(rhat.dot(hhat.cross(ehat)), rhat.dot(ehat)));
    return coe;
}

Meoe meoe_from_coe(const Coe& coe) {
    const double p = coe.a * (1.0 - coe.e * coe.e);
    if (!(p > 0.0))
        throw Error(ErrorCode::InvalidParameter, "semi-latus rectum must be positive");
    const double half = 0.5 * coe.inc;
    const double c = std::cos(half);
    if (std::abs(c) < 1e-12)
        throw Error(ErrorCode::SingularElements,
                    "equinoctial elements undefined at the retrograde limit i = pi");
    const double t = std::sin(half) / c;
    Meoe m;
    m.p = p;
    m.ex = coe.e * std::cos(coe.omega + coe.raan);
    m.ey = coe.e * std::sin(coe.omega + coe.raan);
    m.hx = t * std::cos(coe.raan);
    m.hy = t * std::sin(coe.raan);
    m.l = wrap_two_pi(coe.raan + coe.omega + coe.theta);
    return m;
}

StateVector state_from_meoe(const Meoe& m, double mu) {
    if (!(m.p > 0.0))
        throw Error(ErrorCode::InvalidParameter, "semi-latus rectum must be positive");
    const double cl = std::cos(m.l);
    const double sl = std::sin(m.l);
    const double w = 1.0 + m.ex * cl + m.ey * sl;
    if (!(w > 0.0))
        throw Error(ErrorCode::NonPositiveW,
                    "radius denominator non-positive at this longitude");
    Vec3 fhat, ghat;
    equinoctial_basis(m.hx, m.hy, fhat, ghat);
    StateVector x;
    x.r = (m.p / w) * (cl * fhat + sl * ghat);
    x.v = std::sqrt(mu / m.p) * (ghat * (m.ex + cl) - fhat * (m.ey + sl));
    return x;
}

Meoe meoe_from_state(const StateVector& x, double mu) {
    if (!(specific_energy(x, mu) < 0.0))
        throw Error(ErrorCode::NotPeriodic,
                    "equinoctial element set here describes closed orbits only");
    const Vec3 h = angular_momentum(x);
    const Vec3 hhat = h.normalized();
    const double denom = 1.0 + hhat.z();
    if (denom < 1e-12)
        throw Error(ErrorCode::SingularElements,
                    "equinoctial elements undefined at the retrograde limit i = pi");
    Meoe m;
    m.hx = -hhat.y() / denom;
    m.hy = hhat.x() / denom;
    Vec3 fhat, ghat;
    equinoctial_basis(m.hx, m.hy, fhat, ghat);
    const Vec3 e_vec = laplace_vector(x, mu) / mu;
    m.ex = e_vec.dot(fhat);
    m.ey = e_vec.dot(ghat);
    m.p = h.squaredNorm() / mu;
    m.l = wrap_two_pi(std::atan2(x.r.dot(ghat), x.r.dot(fhat)));
    return m;
}

} // namespace kep
