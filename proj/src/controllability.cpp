#include "kep/controllability.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "detail/dopri5.hpp"

namespace kep {

LinearizedPair linearize(const StateVector& x, double mu) {
    const double rn = x.r.norm();
    if (rn < 1.0)
        throw Error(ErrorCode::OriginSingularity,
                    "position within 1 m of the gravitational singularity");
    const Vec3 rhat = x.r / rn;
    LinearizedPair lp;
    lp.a.block<3, 3>(0, 3) = Eigen::Matrix3d::Identity();
    lp.a.block<3, 3>(3, 0) =
        mu / (rn * rn * rn) * (3.0 * rhat * rhat.transpose() - Eigen::Matrix3d::Identity());
    lp.b.block<3, 3>(3, 0) = Eigen::Matrix3d::Identity();
    return lp;
}

int rank_condition(const LinearizedPair& lp, double threshold_factor) {
    Eigen::Matrix<double, 6, 18> kalman;
    Mat63 block = lp.b;
    for (int i = 0; i < 6; ++i) {
        kalman.block<6, 3>(0, 3 * i) = block;
        block = lp.a * block;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(kalman);
    const auto& sv = svd.singularValues();
    const double cutoff = threshold_factor * sv(0);
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff) ++rank;
    return rank;
}

namespace {

double wrap_two_pi(double angle) {
    double w = std::fmod(angle, 2.0 * M_PI);
    if (w < 0.0) w += 2.0 * M_PI;
    return w;
}

} // namespace

std::vector<Meoe> meoe_path(const Meoe& from, const Meoe& to, PathMode mode,
                            int n_samples, const PhysicalConstants& c) {
    if (n_samples < 2)
        throw Error(ErrorCode::InvalidParameter, "a path needs at least two samples");

    const StateVector x0 = state_from_meoe(from, c.mu);
    const StateVector x1 = state_from_meoe(to, c.mu);
    if (mode == PathMode::AdmissibleA) {
        if (x0.r.norm() <= c.r_c || x1.r.norm() <= c.r_c)
            throw Error(ErrorCode::EndpointOutsideRegion,
                        "both endpoints must sit above the atmospheric boundary");
    } else {
        if (classify(x0, c) != RegionClass::PPlus)
            throw Error(ErrorCode::EndpointOutsideRegion, "start not in P-plus");
        if (classify(x1, c) != RegionClass::PPlus)
            throw Error(ErrorCode::EndpointOutsideRegion, "target not in P-plus");
    }

    const double r0 = x0.r.norm(), r1 = x1.r.norm();
    const double e0 = std::hypot(from.ex, from.ey);
    const double e1 = std::hypot(to.ex, to.ey);
    const double rp0 = from.p / (1.0 + e0), rp1 = to.p / (1.0 + e1);
    const double dl = std::remainder(to.l - from.l, 2.0 * M_PI);

    std::vector<Meoe> path;
    path.reserve(static_cast<size_t>(n_samples));
    for (int j = 0; j < n_samples; ++j) {
        const double lam = static_cast<double>(j) / (n_samples - 1);
        Meoe m;
        m.ex = (1.0 - lam) * from.ex + lam * to.ex;
        m.ey = (1.0 - lam) * from.ey + lam * to.ey;
        m.hx = (1.0 - lam) * from.hx + lam * to.hx;
        m.hy = (1.0 - lam) * from.hy + lam * to.hy;
        m.l = wrap_two_pi(from.l + lam * dl);
        if (mode == PathMode::AdmissibleA) {
            const double radius = (1.0 - lam) * r0 + lam * r1;
            const double w = 1.0 + m.ex * std::cos(m.l) + m.ey * std::sin(m.l);
            m.p = radius * w;
        } else {
            const double rp = (1.0 - lam) * rp0 + lam * rp1;
            m.p = rp * (1.0 + std::hypot(m.ex, m.ey));
        }
        path.push_back(m);
    }
    // Interpolated eccentricity never exceeds the endpoint hull, so W > 0
    // and every sample maps back to a valid state.
    return path;
}

SpiralResult spiral_construct(const SatelliteState& s_i, const PhysicalConstants& c,
                              const EngineParameters& engine, const SpiralConfig& cfg) {
    const double a = cfg.radial_coeff, b = cfg.transverse_coeff;
    if (!(a > 0.0) || !(b > 0.0))
        throw Error(ErrorCode::InvalidParameter, "spiral coefficients must be positive");
    if (!(cfg.exit_margin > 0.0))
        throw Error(ErrorCode::InvalidParameter, "exit margin must be positive");
    if (cfg.n_samples < 2)
        throw Error(ErrorCode::InvalidParameter, "need at least two spiral samples");
    if (s_i.x.v.norm() == 0.0)
        throw Error(ErrorCode::ZeroVelocity, "spiral needs a nonzero seed speed");
    if (classify(s_i.x, c) != RegionClass::PMinus)
        throw Error(ErrorCode::NotInPMinus,
                    "spiral construction starts from the P-minus region");

    const double mu = c.mu;
    const double r_i = s_i.x.r.norm();
    const double v_i = s_i.x.v.norm();
    const double ab2 = a * a + b * b;
    const double c0 = std::sqrt(2.0 * r_i) * v_i / std::sqrt(ab2);
    const double c0sq = c0 * c0;

    // Seed in P-minus implies E < 0, i.e. (a^2+b^2) c0^2 / 4 < mu.
    const double lr = 0.5 * b * b * c0sq - mu;       // radial Laplace component
    const double lt = -0.5 * a * b * c0sq;           // transverse Laplace component
    const double ecc = std::hypot(lr, lt) / mu;
    const double kappa = 0.5 * b * b * c0sq / (mu * (1.0 + ecc));

    // Exit when the perigee radius kappa*r(t) clears r_c with the margin.
    const double r_exit = c.r_c * (1.0 + cfg.exit_margin) / kappa;
    const double growth = 3.0 * a * c0 / (2.0 * std::sqrt(2.0)); // d(r^{3/2})/dt
    const double t_bar =
        (std::pow(r_exit, 1.5) - std::pow(r_i, 1.5)) / growth;
    if (!(t_bar > 0.0))
        throw Error(ErrorCode::InvalidParameter,
                    "seed perigee already clears the atmosphere with margin");

    // Control acceleration u = (1/r^2) [ (mu - c0^2(a^2/4 + b^2/2)) rhat
    //                                  + (a b c0^2 / 4) thetahat ].
    const double ur = mu - c0sq * (0.25 * a * a + 0.5 * b * b);
    const double ut = 0.25 * a * b * c0sq;
    const double k_mag = std::hypot(ur, ut);
    // m(t) = m_i exp(-beta * (2 sqrt2 K / (a c0)) (r_i^{-1/2} - r^{-1/2}))
    const double mass_rate = 2.0 * std::sqrt(2.0) * k_mag / (a * c0);

    SpiralResult out;
    out.t_bar = t_bar;
    out.c0 = c0;
    out.kappa = kappa;
    out.radial_coeff = a;
    out.transverse_coeff = b;
    out.tau_bar = k_mag * s_i.m / (r_i * r_i);
    out.e1 = s_i.x.r.normalized();
    const Vec3 normal = angular_momentum(s_i.x).normalized();
    out.e2 = normal.cross(out.e1);

    out.samples.reserve(static_cast<size_t>(cfg.n_samples));
    for (int j = 0; j < cfg.n_samples; ++j) {
        const double t = t_bar * static_cast<double>(j) / (cfg.n_samples - 1);
        const double r = std::pow(std::pow(r_i, 1.5) + growth * t, 2.0 / 3.0);
        SpiralSample smp;
        smp.t = t;
        smp.r = r;
        smp.theta = (b / a) * std::log(r / r_i);
        smp.m = s_i.m * std::exp(-engine.beta * mass_rate *
                                 (1.0 / std::sqrt(r_i) - 1.0 / std::sqrt(r)));
        smp.tau = smp.m * k_mag / (r * r);
        out.samples.push_back(smp);
    }

    const SpiralSample& last = out.samples.back();
    const Vec3 rhat = std::cos(last.theta) * out.e1 + std::sin(last.theta) * out.e2;
    const Vec3 that = normal.cross(rhat);
    out.terminal.x.r = last.r * rhat;
    out.terminal.x.v = c0 / std::sqrt(2.0 * last.r) * (a * rhat + b * that);
    out.terminal.m = last.m;
    return out;
}

ControlLaw spiral_thrust_law(const SpiralResult& spiral, const PhysicalConstants& c) {
    const Vec3 normal = spiral.e1.cross(spiral.e2);
    const double c0sq = spiral.c0 * spiral.c0;
    const double a = spiral.radial_coeff;
    const double b = spiral.transverse_coeff;
    const double ur = c.mu - c0sq * (0.25 * a * a + 0.5 * b * b);
    const double ut = 0.25 * a * b * c0sq;
    return ControlLaw::steering([=](double, const SatelliteState& s) -> Vec3 {
        const double r = s.x.r.norm();
        const Vec3 rhat = s.x.r / r;
        const Vec3 that = normal.cross(rhat);
        return s.m / (r * r) * (ur * rhat + ut * that);
    });
}

SteerResult verify_local_steer(const StateVector& x_ref, const Vec3& dr,
                               const Vec3& dv, const PhysicalConstants& c) {
    const double period_si = orbital_period(x_ref, c.mu); // throws NotPeriodic
    const double ls = c.r_c;
    const double vs = std::sqrt(c.mu / c.r_c);
    const double ts = ls / vs;
    const double t_end = period_si / ts;

    const auto pack_ref = [&](Vec6& y) {
        y << x_ref.r / ls, x_ref.v / vs;
    };
    const auto accel = [](const Eigen::Ref<const Vec3>& r) -> Vec3 {
        const double rn = r.norm();
        return -r / (rn * rn * rn);
    };
    const auto a_matrix = [](const Eigen::Ref<const Vec3>& r) -> Eigen::Matrix3d {
        const double rn = r.norm();
        const Vec3 rhat = r / rn;
        return (3.0 * rhat * rhat.transpose() - Eigen::Matrix3d::Identity()) /
               (rn * rn * rn);
    };

    // Pass 1: reference orbit + inverse transition matrix + Gramian
    // N = integral of (Minv B)(Minv B)^T. Layout: [ref(6), Minv(36), N(36)].
    detail::Rhs rhs1 = [&](double, const detail::VectorXd& y, detail::VectorXd& dy) {
        const Vec3 r = y.segment<3>(0);
        const Vec3 v = y.segment<3>(3);
        Mat6 minv = Eigen::Map<const Mat6>(y.data() + 6);
        Mat6 a = Mat6::Zero();
        a.block<3, 3>(0, 3) = Eigen::Matrix3d::Identity();
        a.block<3, 3>(3, 0) = a_matrix(r);
        const Mat6 dminv = -minv * a;
        const Mat63 minv_b = minv.rightCols<3>();
        const Mat6 dn = minv_b * minv_b.transpose();
        dy.segment<3>(0) = v;
        dy.segment<3>(3) = accel(r);
        Eigen::Map<Mat6>(dy.data() + 6) = dminv;
        Eigen::Map<Mat6>(dy.data() + 42) = dn;
    };

    detail::VectorXd y1(78);
    Vec6 ref0;
    pack_ref(ref0);
    y1.segment<6>(0) = ref0;
    Eigen::Map<Mat6>(y1.data() + 6) = Mat6::Identity();
    Eigen::Map<Mat6>(y1.data() + 42) = Mat6::Zero();

    detail::AdaptiveOptions aopt;
    aopt.rtol = 1e-12;
    aopt.atol = detail::VectorXd::Constant(78, 1e-12);

    detail::VectorXd y1_end = y1;
    detail::integrate_adaptive(
        rhs1, 0.0, y1, t_end, aopt,
        [&](double, const detail::VectorXd&, double, const detail::VectorXd& yb,
            const detail::VectorXd&) {
            y1_end = yb;
            return detail::StepFlow::Continue;
        });

    const Mat6 gramian = Eigen::Map<const Mat6>(y1_end.data() + 42);
    Eigen::JacobiSVD<Mat6> svd(gramian, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    SteerResult result;
    result.gramian_min_sv = sv(5);
    if (sv(5) < 1e-12 * sv(0))
        throw Error(ErrorCode::GramianSingular,
                    "steering Gramian is numerically rank-deficient");

    Vec6 delta0;
    delta0 << dr / ls, dv / vs;
    result.offset_norm = delta0.norm();
    const Vec6 w0 = svd.solve(delta0);

    // Pass 2: perturbed nonlinear state driven by u(t) = -(Minv B)^T w0,
    // alongside the reference and Minv. Layout: [pert(6), ref(6), Minv(36)].
    detail::Rhs rhs2 = [&](double, const detail::VectorXd& y, detail::VectorXd& dy) {
        const Vec3 rp = y.segment<3>(0);
        const Vec3 vp = y.segment<3>(3);
        const Vec3 rr = y.segment<3>(6);
        const Vec3 vr = y.segment<3>(9);
        Mat6 minv = Eigen::Map<const Mat6>(y.data() + 12);
        Mat6 a = Mat6::Zero();
        a.block<3, 3>(0, 3) = Eigen::Matrix3d::Identity();
        a.block<3, 3>(3, 0) = a_matrix(rr);
        const Mat63 minv_b = minv.rightCols<3>();
        const Vec3 u = -(minv_b.transpose() * w0);
        dy.segment<3>(0) = vp;
        dy.segment<3>(3) = accel(rp) + u;
        dy.segment<3>(6) = vr;
        dy.segment<3>(9) = accel(rr);
        Eigen::Map<Mat6>(dy.data() + 12) = -minv * a;
    };

    detail::VectorXd y2(48);
    y2.segment<6>(0) = ref0 + delta0;
    y2.segment<6>(6) = ref0;
    Eigen::Map<Mat6>(y2.data() + 12) = Mat6::Identity();

    detail::AdaptiveOptions aopt2;
    aopt2.rtol = 1e-12;
    aopt2.atol = detail::VectorXd::Constant(48, 1e-12);

    detail::VectorXd y2_end = y2;
    detail::integrate_adaptive(
        rhs2, 0.0, y2, t_end, aopt2,
        [&](double, const detail::VectorXd&, double, const detail::VectorXd& yb,
            const detail::VectorXd&) {
            y2_end = yb;
            return detail::StepFlow::Continue;
        });

    const Vec6 miss = y2_end.segment<6>(0) - y2_end.segment<6>(6);
    result.miss_norm = miss.norm();
    result.success = result.miss_norm < 0.1 * result.offset_norm;
    return result;
}

} // namespace kep
