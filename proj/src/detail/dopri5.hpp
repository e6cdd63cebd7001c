#pragma once

#include <Eigen/Core>
#include <cmath>
#include <functional>
#include <limits>

#include "kep/errors.hpp"

namespace kep::detail {

using Eigen::VectorXd;

/// y' = f(t, y); f writes into dydt (pre-sized to y.size()).
using Rhs = std::function<void(double, const VectorXd&, VectorXd&)>;

/// Dormand-Prince 5(4) tableau (the RK45 pair with FSAL: the 7th stage of an
/// accepted step is the first stage of the next).
struct Dopri5Work {
    VectorXd k[7];
    VectorXd ytmp;

    void resize(Eigen::Index n) {
        for (auto& ki : k) ki.resize(n);
        ytmp.resize(n);
    }
};

/// One embedded step of size h from (t, y). k1 must hold f(t, y) on entry;
/// on exit w.k[6] holds f(t + h, y1) (FSAL). err is the 5th-minus-4th order
/// difference of the two embedded solutions.
inline void dopri5_step(const Rhs& f, double t, const VectorXd& y, double h,
                        const VectorXd& k1, Dopri5Work& w, VectorXd& y1,
                        VectorXd& err) {
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                            a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600,
                            e3 = 500.0 / 1113 - 7571.0 / 16695,
                            e4 = 125.0 / 192 - 393.0 / 640,
                            e5 = -2187.0 / 6784 + 92097.0 / 339200,
                            e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                            c5 = 8.0 / 9;

    w.k[0] = k1;
    w.ytmp = y + h * (a21 * w.k[0]);
    f(t + c2 * h, w.ytmp, w.k[1]);
    w.ytmp = y + h * (a31 * w.k[0] + a32 * w.k[1]);
    f(t + c3 * h, w.ytmp, w.k[2]);
    w.ytmp = y + h * (a41 * w.k[0] + a42 * w.k[1] + a43 * w.k[2]);
    f(t + c4 * h, w.ytmp, w.k[3]);
    w.ytmp = y + h * (a51 * w.k[0] + a52 * w.k[1] + a53 * w.k[2] + a54 * w.k[3]);
    f(t + c5 * h, w.ytmp, w.k[4]);
    w.ytmp = y + h * (a61 * w.k[0] + a62 * w.k[1] + a63 * w.k[2] + a64 * w.k[3] +
                      a65 * w.k[4]);
    f(t + h, w.ytmp, w.k[5]);
    y1 = y + h * (b1 * w.k[0] + b3 * w.k[2] + b4 * w.k[3] + b5 * w.k[4] +
                  b6 * w.k[5]);
    f(t + h, y1, w.k[6]);
    err = h * (e1 * w.k[0] + e3 * w.k[2] + e4 * w.k[3] + e5 * w.k[4] +
               e6 * w.k[5] + e7 * w.k[6]);
}

/// Weighted RMS of err against per-component scale atol_i + rtol*max(|y0|,|y1|).
inline double error_norm(const VectorXd& err, const VectorXd& y0,
                         const VectorXd& y1, const VectorXd& atol, double rtol) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double sc =
            atol[i] + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double q = err[i] / sc;
        sum += q * q;
    }
    return std::sqrt(sum / static_cast<double>(err.size()));
}

struct AdaptiveOptions {
    double rtol = 1e-12;
    VectorXd atol;     ///< per-component absolute tolerances
    double h_init = 0; ///< 0 selects the starting step automatically
    double h_max = std::numeric_limits<double>::infinity();
    long max_steps = 5'000'000;
};

enum class StepFlow { Continue, Stop };

/// Called after every accepted step with the bracketing states and the FSAL
/// derivative at t0 (useful for re-stepping inside [t0, t1]).
using StepCallback = std::function<StepFlow(double t0, const VectorXd& y0,
                                            double t1, const VectorXd& y1,
                                            const VectorXd& f_t0)>;

/// Starting-step heuristic (Hairer/Norsett/Wanner style, one trial step).
inline double initial_step(const Rhs& f, double t0, const VectorXd& y0,
                           const VectorXd& f0, double t_end,
                           const AdaptiveOptions& opt, Dopri5Work& w) {
    const double d0 = error_norm(y0, y0, y0, opt.atol, opt.rtol);
    const double d1 = error_norm(f0, y0, y0, opt.atol, opt.rtol);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * (d0 / d1);
    h0 = std::min(h0, t_end - t0);
    w.ytmp = y0 + h0 * f0;
    VectorXd f1(y0.size());
    f(t0 + h0, w.ytmp, f1);
    const double d2 = error_norm(f1 - f0, y0, y0, opt.atol, opt.rtol) / h0;
    double h1;
    if (std::max(d1, d2) <= 1e-15)
        h1 = std::max(1e-6, h0 * 1e-3);
    else
        h1 = std::pow(0.01 / std::max(d1, d2), 0.2);
    return std::min({100.0 * h0, h1, t_end - t0, opt.h_max});
}

/// Drives dopri5_step from t0 to t_end, adapting h to keep the weighted
/// error norm at 1. Throws StepSizeUnderflow when the controller stalls.
inline void integrate_adaptive(const Rhs& f, double t0, VectorXd y, double t_end,
                               const AdaptiveOptions& opt,
                               const StepCallback& on_step) {
    Dopri5Work w;
    w.resize(y.size());
    VectorXd y1(y.size()), err(y.size()), fcur(y.size());
    double t = t0;
    f(t, y, fcur);
    double h = opt.h_init > 0 ? std::min(opt.h_init, t_end - t0)
                              : initial_step(f, t0, y, fcur, t_end, opt, w);
    long steps = 0;
    while (t < t_end) {
        if (++steps > opt.max_steps)
            throw Error(ErrorCode::StepSizeUnderflow,
                        "step budget exhausted before reaching the horizon");
        if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), 1.0))
            throw Error(ErrorCode::StepSizeUnderflow,
                        "step size underflow at t = " + std::to_string(t));
        bool last = false;
        if (t + h >= t_end) {
            h = t_end - t;
            last = true;
        }
        dopri5_step(f, t, y, h, fcur, w, y1, err);
        const double en = error_norm(err, y, y1, opt.atol, opt.rtol);
        if (en <= 1.0) {
            const double t1 = last ? t_end : t + h;
            if (on_step(t, y, t1, y1, fcur) == StepFlow::Stop) return;
            t = t1;
            y.swap(y1);
            fcur = w.k[6]; // FSAL
        }
        const double factor =
            std::clamp(0.9 * std::pow(std::max(en, 1e-30), -0.2), 0.2, 5.0);
        h = std::min(h * factor, opt.h_max);
    }
}

} // namespace kep::detail
