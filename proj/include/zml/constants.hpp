#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "zml/error.hpp"
#include "zml/parallel.hpp"

namespace zml {

struct ConstantsAt {
    double h = 0.0;
    double theta = 0.0;
    double a_val = 0.0;
    double b_val = 0.0;
    double A_val = 0.0;
};

struct OptimalH {
    double theta = 0.0;
    double h_star = 0.0;
    double A_star = 0.0;
    int grid_size = 0;
    double tol = 0.0;
};

struct ThetaSweep {
    std::vector<OptimalH> points;
    double max_violation = 0.0;  // largest h(theta_{i+1}) - h(theta_i) > 0
};

struct CorollaryValues {
    double B_k = 0.0;
    double c0 = 0.0;
};

namespace detail {

// Templated so the complex-step derivative can reuse the exact formulas.
template <class T>
T a_branch(T h) {
    const T h2 = h * h;
    const T q = 4.0 * h2 - 1.0;
    const T lead = q * q * (1.0 + h2) / (8.0 * (4.0 * h2 + 1.0) * (1.0 - h2));
    using std::log;
    return 1.0 + lead * log(1.0 + 2.0 * (2.0 * h2 - 1.0) * (4.0 * h2 + 1.0) / ((h2 + 1.0) * q * q));
}

template <class T>
T b_formula(T h) {
    const T h2 = h * h;
    return std::numbers::pi * (1.0 + h2) * (1.0 + h2) / (2.0 * (1.0 - h2));
}

inline void check_h(double h) {
    if (!(h > 0.0 && h < 1.0)) throw DomainError("constants: h must lie in (0, 1)");
}

}  // namespace detail

inline constexpr double kAlphaBranch = 0.70710678118654752440;  // 1/sqrt(2)

/// a(h): 1 up to 1/sqrt(2), logarithmic branch above.
inline double a_of_h(double h) {
    detail::check_h(h);
    return h <= kAlphaBranch ? 1.0 : detail::a_branch(h);
}

inline double b_of_h(double h) {
    detail::check_h(h);
    return detail::b_formula(h);
}

inline double A_of(double h, double theta) {
    return h / (a_of_h(h) * std::abs(std::cos(theta)) + b_of_h(h) * std::abs(std::sin(theta)));
}

inline ConstantsAt eval_constants(double h, double theta) {
    ConstantsAt c;
    c.h = h;
    c.theta = theta;
    c.a_val = a_of_h(h);
    c.b_val = b_of_h(h);
    c.A_val = h / (c.a_val * std::abs(std::cos(theta)) + c.b_val * std::abs(std::sin(theta)));
    return c;
}

namespace detail {

/// dA/dh up to the positive factor 1/D^2: D(h) - h D'(h), with D' by
/// complex step on the analytic branches.
inline double a_slope_numerator(double h, double theta) {
    constexpr double step = 1e-30;
    const std::complex<double> hc(h, step);
    const double c = std::abs(std::cos(theta)), s = std::abs(std::sin(theta));
    const double da = h <= kAlphaBranch ? 0.0 : std::imag(a_branch(hc)) / step;
    const double db = std::imag(b_formula(hc)) / step;
    const double d = a_of_h(h) * c + b_of_h(h) * s;
    return d - h * (da * c + db * s);
}

}  // namespace detail

/// Maximizer of A(., theta) over (0, 1): 1001-point grid on [0.35, 0.8], then
/// golden-section search in the neighbouring cells down to `tol`, then a
/// root polish of dA/dh (golden section alone stalls near sqrt(eps)).
inline OptimalH optimize_h(double theta, double tol = 1e-12) {
    if (!(tol >= 1e-12)) throw DomainError("optimize_h: tol must be at least 1e-12");
    constexpr int grid = 1001;
    constexpr double lo = 0.35, hi = 0.8;
    const double dh = (hi - lo) / (grid - 1);
    int best = 0;
    double best_val = -1.0;
    for (int i = 0; i < grid; ++i) {
        const double v = A_of(lo + i * dh, theta);
        if (v > best_val + tol) {  // ties within tol keep the smallest h
            best_val = v;
            best = i;
        }
    }
    double a = lo + std::max(0, best - 1) * dh;
    double b = lo + std::min(grid - 1, best + 1) * dh;
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    double f1 = A_of(x1, theta), f2 = A_of(x2, theta);
    while (b - a > tol) {
        if (f1 >= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = A_of(x1, theta);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = A_of(x2, theta);
        }
    }
    double h = 0.5 * (a + b);
    // Widen to the grid cells and polish on the slope if it changes sign there.
    const double pa = std::max(1e-6, h - 2 * dh), pb = std::min(1.0 - 1e-6, h + 2 * dh);
    const double sa = detail::a_slope_numerator(pa, theta), sb = detail::a_slope_numerator(pb, theta);
    if (sa > 0.0 && sb < 0.0) {
        std::uintmax_t iters = 200;
        auto f = [&](double x) { return detail::a_slope_numerator(x, theta); };
        auto r = boost::math::tools::toms748_solve(
            f, pa, pb, sa, sb, [](double x, double y) { return std::abs(x - y) < 1e-15; }, iters);
        const double polished = 0.5 * (r.first + r.second);
        if (A_of(polished, theta) >= A_of(h, theta) - 1e-15) h = polished;
    }
    return {theta, h, A_of(h, theta), grid, tol};
}

/// Optimal h on an n-point uniform grid of [0, pi/2] with a monotonicity
/// report.
inline ThetaSweep theta_sweep(int n, double tol = 1e-12) {
    if (n < 2) throw DomainError("theta_sweep: need at least 2 grid points");
    ThetaSweep sweep;
    sweep.points.resize(static_cast<std::size_t>(n));
    parallel_for(sweep.points.size(), [&](std::size_t i) {
        const double theta = (std::numbers::pi / 2.0) * static_cast<double>(i) / static_cast<double>(n - 1);
        sweep.points[i] = optimize_h(theta, tol);
    });
    for (std::size_t i = 1; i < sweep.points.size(); ++i)
        sweep.max_violation = std::max(sweep.max_violation, sweep.points[i].h_star - sweep.points[i - 1].h_star);
    return sweep;
}

/// c0 = (4/3) A(h, pi/2) = 2/(3 pi).
inline constexpr double kCorollaryC0 = 2.0 / (3.0 * std::numbers::pi);

inline CorollaryValues corollary_values(double k) {
    if (!(k >= 0.0)) throw DomainError("corollary_values: k must be non-negative");
    if (k >= kCorollaryC0) throw DomainError("corollary_values: k must be below c0 = 2/(3 pi)");
    const double c0 = kCorollaryC0;
    return {k * k * (1.0 + k / (c0 - k)) + 4.0 * k / c0, c0};
}

}  // namespace zml
