#pragma once

#include <vector>

#include "kep/errors.hpp"

namespace kep::detail {

/// Natural cubic spline on a strictly increasing knot grid, with constant
/// extrapolation outside the grid (the steering angle holds its end value).
class CubicSpline {
  public:
    CubicSpline() = default;

    CubicSpline(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)) {
        const size_t n = x_.size();
        if (n < 2 || y_.size() != n)
            throw Error(ErrorCode::InvalidParameter,
                        "spline needs matching grids of at least two knots");
        for (size_t i = 1; i < n; ++i)
            if (!(x_[i] > x_[i - 1]))
                throw Error(ErrorCode::InvalidParameter,
                            "spline knots must be strictly increasing");
        ypp_.assign(n, 0.0);
        // Tridiagonal solve for second derivatives, natural end conditions.
        std::vector<double> u(n, 0.0);
        for (size_t i = 1; i + 1 < n; ++i) {
            const double sig = (x_[i] - x_[i - 1]) / (x_[i + 1] - x_[i - 1]);
            const double p = sig * ypp_[i - 1] + 2.0;
            ypp_[i] = (sig - 1.0) / p;
            const double d = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]) -
                             (y_[i] - y_[i - 1]) / (x_[i] - x_[i - 1]);
            u[i] = (6.0 * d / (x_[i + 1] - x_[i - 1]) - sig * u[i - 1]) / p;
        }
        for (size_t k = n - 1; k-- > 1;)
            ypp_[k] = ypp_[k] * ypp_[k + 1] + u[k];
        ypp_.front() = ypp_.back() = 0.0;
    }

    double operator()(double t) const {
        if (t <= x_.front()) return y_.front();
        if (t >= x_.back()) return y_.back();
        size_t lo = 0, hi = x_.size() - 1;
        while (hi - lo > 1) {
            const size_t mid = (lo + hi) / 2;
            (x_[mid] > t ? hi : lo) = mid;
        }
        const double h = x_[hi] - x_[lo];
        const double a = (x_[hi] - t) / h;
        const double b = (t - x_[lo]) / h;
        return a * y_[lo] + b * y_[hi] +
               ((a * a * a - a) * ypp_[lo] + (b * b * b - b) * ypp_[hi]) * h * h / 6.0;
    }

    const std::vector<double>& knots() const { return x_; }
    const std::vector<double>& values() const { return y_; }

  private:
    std::vector<double> x_, y_, ypp_;
};

} // namespace kep::detail
