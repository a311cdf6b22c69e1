#pragma once

// Evaluation of zeta on and near the critical line.
//
// Fast path: Riemann–Siegel theta (asymptotic series) and Hardy's Z via the
// Riemann–Siegel formula with up to four correction terms.
// Oracle: Euler–Maclaurin summation carried out in 50-digit binary floating
// point. It shares no code with the fast path.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/bernoulli.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>

#include "zml/error.hpp"
#include "zml/zero_table_types.hpp"

namespace zml {

using cdouble = std::complex<double>;

/// Lower validity limit of the asymptotic theta series and hence of every
/// Riemann–Siegel based evaluation.
inline constexpr double kThetaFloor = 10.0;

/// Correction-order sentinel selecting the most accurate fast evaluation.
inline constexpr int kAutoOrder = -1;
inline constexpr double kRiemannSiegelCrossover = 200.0;

struct CriticalPoint {
    double t = 0.0;
    double z_value = 0.0;
    double theta_value = 0.0;
    cdouble zeta_value{};
};

struct LogZetaValue {
    double t = 0.0;
    double re_log = 0.0;  // log|zeta(1/2+it)|
    double im_log = 0.0;  // pi * S(t)
    double s_of_t = 0.0;
};

/// Riemann–Siegel theta function theta(t) for t >= 10.
inline double rs_theta(double t) {
    if (!(t >= kThetaFloor)) throw DomainError("rs_theta: t below validity floor 10");
    constexpr double pi = std::numbers::pi;
    const double inv = 1.0 / t;
    return 0.5 * t * std::log(t / (2.0 * pi)) - 0.5 * t - pi / 8.0 + inv / 48.0 +
           7.0 * inv * inv * inv / 5760.0;
}

/// d theta / dt from the same series.
inline double rs_theta_prime(double t) {
    if (!(t >= kThetaFloor)) throw DomainError("rs_theta_prime: t below validity floor 10");
    const double inv2 = 1.0 / (t * t);
    return 0.5 * std::log(t / (2.0 * std::numbers::pi)) - inv2 / 48.0 - 7.0 * inv2 * inv2 / 1920.0;
}

/// Mean spacing of zeros near height t.
inline double mean_zero_gap(double t) { return 2.0 * std::numbers::pi / std::log(t / (2.0 * std::numbers::pi)); }

namespace detail {

/// Power-series coefficients (in x = p - 1/2) of the Riemann–Siegel
/// correction functions C_0..C_4, derived once from
///   Psi(p) = cos(2 pi (p^2 - p - 1/16)) / cos(2 pi p)
/// by series division, then differentiated. The division loses roughly 4^n
/// (removable singularities at p = 1/4, 3/4), hence the 120-digit work type.
class RiemannSiegelCoefficients {
public:
    static constexpr int kDegree = 150;
    static constexpr int kMaxOrder = 4;

    static const RiemannSiegelCoefficients& instance() {
        static const RiemannSiegelCoefficients c;
        return c;
    }

    /// C_k evaluated at fractional part p of sqrt(t / 2 pi).
    double eval(int k, double p) const {
        const double x = p - 0.5;
        const auto& c = poly_[static_cast<std::size_t>(k)];
        double acc = 0.0;
        for (int n = kDegree; n >= 0; --n) acc = acc * x + c[static_cast<std::size_t>(n)];
        return acc;
    }

    /// Coefficient of x^n in C_k.
    double coefficient(int k, int n) const { return poly_[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)]; }

private:
    using Real = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<120>>;
    using Series = std::vector<Real>;

    RiemannSiegelCoefficients() {
        // Psi(1/2 + x) = -cos(2 pi x^2 - 5 pi / 8) / cos(2 pi x)
        const int n_work = kDegree + 14;
        const Real pi = boost::math::constants::pi<Real>();
        const Real two_pi = 2 * pi;
        Series num(n_work + 1, Real(0)), den(n_work + 1, Real(0));
        const Real c58 = cos(5 * pi / 8), s58 = sin(5 * pi / 8);
        // cos(2 pi y) and sin(2 pi y) in y = x^2
        Real term = 1;
        for (int m = 0; 2 * m <= n_work; ++m) {
            // term = (2 pi)^m / m!
            const int sign_c = (m % 4 == 0) ? 1 : (m % 4 == 2 ? -1 : 0);
            const int sign_s = (m % 4 == 1) ? 1 : (m % 4 == 3 ? -1 : 0);
            num[static_cast<std::size_t>(2 * m)] += term * (sign_c * c58 + sign_s * s58);
            term *= two_pi / (m + 1);
        }
        term = 1;
        for (int m = 0; m <= n_work; ++m) {
            const int sign = (m % 4 == 0) ? 1 : (m % 4 == 2 ? -1 : 0);
            den[static_cast<std::size_t>(m)] = -term * sign;
            term *= two_pi / (m + 1);
        }
        Series psi(n_work + 1, Real(0));
        for (int n = 0; n <= n_work; ++n) {
            Real acc = num[static_cast<std::size_t>(n)];
            for (int k = 1; k <= n; ++k) acc -= den[static_cast<std::size_t>(k)] * psi[static_cast<std::size_t>(n - k)];
            psi[static_cast<std::size_t>(n)] = acc / den[0];
        }
        auto deriv = [&](int order) {
            Series d(n_work + 1, Real(0));
            for (int n = 0; n + order <= n_work; ++n) {
                Real f = psi[static_cast<std::size_t>(n + order)];
                for (int j = 1; j <= order; ++j) f *= (n + j);
                d[static_cast<std::size_t>(n)] = f;
            }
            return d;
        };
        const Real pi2 = pi * pi, pi4 = pi2 * pi2, pi6 = pi4 * pi2, pi8 = pi4 * pi4;
        std::array<Series, kMaxOrder + 1> c;
        const Series d1 = deriv(1), d2 = deriv(2), d3 = deriv(3), d4 = deriv(4), d5 = deriv(5), d6 = deriv(6),
                     d8 = deriv(8), d9 = deriv(9), d12 = deriv(12);
        for (auto& s : c) s.assign(n_work + 1, Real(0));
        for (std::size_t n = 0; n <= static_cast<std::size_t>(n_work); ++n) {
            c[0][n] = psi[n];
            c[1][n] = -d3[n] / (96 * pi2);
            c[2][n] = d2[n] / (64 * pi2) + d6[n] / (18432 * pi4);
            c[3][n] = -d1[n] / (64 * pi2) - d5[n] / (3840 * pi4) - d9[n] / (5308416 * pi6);
            c[4][n] = psi[n] / (128 * pi2) + 19 * d4[n] / (24576 * pi4) + 11 * d8[n] / (5898240 * pi6) +
                      d12[n] / (Real(2038431744) * pi8);
        }
        for (int k = 0; k <= kMaxOrder; ++k)
            for (int n = 0; n <= kDegree; ++n)
                poly_[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)] =
                    static_cast<double>(c[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)]);
    }

    std::array<std::array<double, kDegree + 1>, kMaxOrder + 1> poly_{};
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Euler–Maclaurin summation

namespace detail {

/// Generic Euler–Maclaurin sum with N head terms and M Bernoulli corrections.
/// `Complex` is std::complex<double> or a multiprecision complex.
template <class Complex, class Real>
Complex euler_maclaurin(const Complex& s, long head, int corrections) {
    using std::exp;
    using std::log;
    Complex sum(0);
    for (long n = 1; n < head; ++n) sum += exp(-s * Real(log(Real(n))));
    const Real big_n(head);
    const Real log_n = log(big_n);
    const Complex n_pow = exp(-s * log_n);  // N^{-s}
    sum += n_pow * big_n / (s - Real(1));
    sum += n_pow / Real(2);
    // T_k = B_{2k}/(2k)! * s(s+1)...(s+2k-2) * N^{-s-2k+1}
    Complex rising = s;  // s(s+1)...(s+2k-2)
    Complex npow = n_pow / big_n;
    Real fact(2);  // (2k)!
    for (int k = 1; k <= corrections; ++k) {
        const Real b2k = boost::math::bernoulli_b2n<Real>(k);
        sum += rising * npow * (b2k / fact);
        rising *= (s + Real(2 * k - 1)) * (s + Real(2 * k));
        npow /= big_n * big_n;
        fact *= Real((2 * k + 1) * (2 * k + 2));
    }
    return sum;
}

/// log10 of the Euler–Maclaurin remainder bound after M corrections:
/// |T_{M+1}| * |s + 2M + 1| / (sigma + 2M + 1).
inline double em_log10_remainder(cdouble s, long head, int corrections) {
    const int m = corrections + 1;  // first omitted index
    double lg = 0.0;
    // |s(s+1)...(s+2m-2)|
    for (int j = 0; j <= 2 * m - 2; ++j) lg += std::log(std::abs(s + static_cast<double>(j)));
    // |B_{2m}|/(2m)! ~ 2/(2 pi)^{2m} (exact to ~1e-6 for m >= 2)
    lg += std::log(2.0) - 2.0 * m * std::log(2.0 * std::numbers::pi);
    lg += (-s.real() - 2.0 * m + 1.0) * std::log(static_cast<double>(head));
    lg += std::log(std::abs(s + static_cast<double>(2 * m - 1)) / (s.real() + 2.0 * m - 1.0));
    return lg / std::log(10.0);
}

struct EmPlan {
    long head;
    int corrections;
};

inline EmPlan em_plan(cdouble s, int target_digits) {
    long head = std::max<long>(10, static_cast<long>(std::abs(s.imag()) / (2.0 * std::numbers::pi)) + 10);
    for (;;) {
        for (int m = 2; m <= 60; ++m) {
            if (s.real() + 2.0 * (m + 1) - 1.0 <= 0.0) continue;
            if (em_log10_remainder(s, head, m) < -(target_digits + 1)) return {head, m};
        }
        head *= 2;
    }
}

}  // namespace detail

using OracleReal = boost::multiprecision::cpp_bin_float_50;
using OracleComplex = boost::multiprecision::cpp_complex_50;

/// Working precision of the oracle minus a guard for cancellation.
inline constexpr int kOracleMaxDigits = 30;

/// zeta(s) to absolute error below 10^-target_digits via Euler–Maclaurin in
/// 50-digit arithmetic, returned at full working precision.
inline OracleComplex zeta_oracle_mp(const OracleComplex& s, int target_digits) {
    const double re = static_cast<double>(s.real()), im = static_cast<double>(s.imag());
    if (re == 1.0 && im == 0.0) throw PoleError("zeta_oracle: pole at s = 1");
    if (target_digits > kOracleMaxDigits)
        throw PrecisionError("zeta_oracle: requested digits exceed the working-precision budget of 30");
    if (re < -10.0) throw PrecisionError("zeta_oracle: Re s < -10 outside the oracle's accuracy envelope");
    const auto plan = detail::em_plan({re, im}, std::max(target_digits, 1));
    return detail::euler_maclaurin<OracleComplex, OracleReal>(s, plan.head, plan.corrections);
}

inline cdouble zeta_oracle(cdouble s, int target_digits = 15) {
    const OracleComplex z = zeta_oracle_mp(OracleComplex(OracleReal(s.real()), OracleReal(s.imag())), target_digits);
    return {static_cast<double>(z.real()), static_cast<double>(z.imag())};
}

/// zeta'/zeta(s) by a central difference of the oracle at working precision.
inline cdouble zeta_log_derivative_oracle(cdouble s, int target_digits = 25) {
    const OracleComplex s0(OracleReal(s.real()), OracleReal(s.imag()));
    const OracleReal h("1e-12");
    const OracleComplex up = zeta_oracle_mp(s0 + OracleComplex(h), target_digits);
    const OracleComplex dn = zeta_oracle_mp(s0 - OracleComplex(h), target_digits);
    const OracleComplex mid = zeta_oracle_mp(s0, target_digits);
    const OracleComplex d = (up - dn) / (2 * h) / mid;
    return {static_cast<double>(d.real()), static_cast<double>(d.imag())};
}

/// Double-precision Euler–Maclaurin zeta for use off the critical line
/// (argument tracking); accuracy ~1e-12 relative.
inline cdouble zeta_em(cdouble s) {
    if (s == cdouble(1.0, 0.0)) throw PoleError("zeta_em: pole at s = 1");
    const auto plan = detail::em_plan(s, 13);
    return detail::euler_maclaurin<cdouble, double>(s, plan.head, plan.corrections);
}

/// S(t) = (1/pi) arg zeta(1/2+it) by continuous variation along the segment
/// from 3 + it to 1/2 + it, independent of any zero table.
inline double s_function_by_argument(double t) {
    constexpr double pi = std::numbers::pi;
    double sigma = 3.0;
    cdouble prev = zeta_em({sigma, t});
    double arg = std::arg(prev);
    double step = 0.125;
    while (sigma > 0.5) {
        const double next_sigma = std::max(0.5, sigma - step);
        const cdouble cur = zeta_em({next_sigma, t});
        const double delta = std::arg(cur / prev);
        if (std::abs(delta) > pi / 8.0 && step > 1e-6) {
            step *= 0.5;
            continue;
        }
        arg += delta;
        prev = cur;
        sigma = next_sigma;
        if (std::abs(delta) < pi / 64.0) step = std::min(0.125, step * 2.0);
    }
    return arg / pi;
}

/// Hardy's Z(t) by the Riemann–Siegel formula with correction terms
/// C_0..C_{correction_order}. Truncation error is O(t^{-(2*order+3)/4}).
/// With kAutoOrder, heights below kRiemannSiegelCrossover go through
/// double-precision Euler–Maclaurin (the asymptotic formula is limited to
/// ~3e-6 at t = 20) and higher ones use order 4.
inline double hardy_z(double t, int correction_order = kAutoOrder) {
    if (!(t >= kThetaFloor)) throw DomainError("hardy_z: t below validity floor 10");
    if (correction_order == kAutoOrder) {
        if (t < kRiemannSiegelCrossover) return std::real(std::polar(1.0, rs_theta(t)) * zeta_em({0.5, t}));
        correction_order = 4;
    }
    if (correction_order < 0 || correction_order > 4) throw DomainError("hardy_z: correction order must be 0..4");
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double theta = rs_theta(t);
    const double a = std::sqrt(t / two_pi);
    const auto n_terms = static_cast<long>(std::floor(a));
    const double p = a - static_cast<double>(n_terms);
    double main = 0.0;
    for (long n = 1; n <= n_terms; ++n) {
        const double dn = static_cast<double>(n);
        main += std::cos(theta - t * std::log(dn)) / std::sqrt(dn);
    }
    main *= 2.0;
    const auto& rs = detail::RiemannSiegelCoefficients::instance();
    const double step = std::sqrt(two_pi / t);
    double corr = 0.0, scale = 1.0;
    for (int k = 0; k <= correction_order; ++k) {
        corr += rs.eval(k, p) * scale;
        scale *= step;
    }
    const double sign = ((n_terms - 1) % 2 == 0) ? 1.0 : -1.0;
    return main + sign * std::sqrt(step) * corr;
}

/// zeta(1/2 + it) assembled from Z and theta.
inline CriticalPoint zeta_critical(double t, int correction_order = kAutoOrder) {
    CriticalPoint cp;
    cp.t = t;
    cp.theta_value = rs_theta(t);
    cp.z_value = hardy_z(t, correction_order);
    cp.zeta_value = cp.z_value * std::polar(1.0, -cp.theta_value);
    return cp;
}

/// Default exclusion radius around zero ordinates: 1e-4 of the mean gap.
inline double default_exclusion_radius(double t) { return 1e-4 * mean_zero_gap(t); }

/// log zeta(1/2+it) = log|Z(t)| + i*pi*S(t), with S from the table count:
/// S(t) = N(t) - theta(t)/pi - 1.
inline LogZetaValue log_zeta_critical(double t, const ZeroTable& table, double exclusion_radius = -1.0,
                                      int correction_order = kAutoOrder) {
    if (!(t >= kThetaFloor)) throw DomainError("log_zeta_critical: t below validity floor 10");
    if (!table.covers(0.0, t)) throw CoverageError("log_zeta_critical: zero table does not cover [0, t]");
    const double radius = exclusion_radius < 0.0 ? default_exclusion_radius(t) : exclusion_radius;
    auto [first, last] = table.window(t - radius, t + radius);
    if (first != last) throw ProximityError("log_zeta_critical: t lies within the exclusion radius of a zero");
    LogZetaValue v;
    v.t = t;
    v.re_log = std::log(std::abs(hardy_z(t, correction_order)));
    v.s_of_t = static_cast<double>(table.count_up_to(t)) - rs_theta(t) / std::numbers::pi - 1.0;
    v.im_log = std::numbers::pi * v.s_of_t;
    return v;
}

}  // namespace zml
