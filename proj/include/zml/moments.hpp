#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "zml/constants.hpp"
#include "zml/error.hpp"
#include "zml/parallel.hpp"
#include "zml/quadrature.hpp"
#include "zml/zero_table.hpp"
#include "zml/zeta_engine.hpp"

namespace zml {

inline constexpr double kEulerGamma = 0.57721566490153286061;

struct PanelSpec {
    std::size_t order = 16;
    double rel_tol = 1e-9;
    int max_depth = 12;
    int min_depth = 0;
};

struct MomentEstimate {
    double k = 0.0;
    double theta = 0.0;
    double T = 0.0;
    double value = 0.0;
    double error_estimate = 0.0;
    std::size_t n_panels = 0;       // panels between consecutive zeros
    std::size_t subintervals = 0;   // after adaptive bisection
    std::size_t evaluations = 0;
    std::size_t order = 16;
};

/// Re e^{-i theta} log zeta(1/2 + it) for t off the zero ordinates, with S
/// from the table.
inline double re_rotated_log_zeta(double t, double theta, const ZeroTable& table) {
    const double z = std::abs(hardy_z(t));
    const double s = static_cast<double>(table.count_up_to(t)) - rs_theta(t) / std::numbers::pi - 1.0;
    return std::cos(theta) * std::log(z) + std::sin(theta) * std::numbers::pi * s;
}

/// M_{k,theta}(T) = int_T^{2T} exp(2k Re e^{-i theta} log zeta(1/2+it)) dt,
/// integrated panel by panel between consecutive zeros.
inline MomentEstimate moment_estimate(double k, double theta, double T, const ZeroTable& table,
                                      const PanelSpec& spec = {}) {
    if (!(k >= 0.0)) throw DomainError("moment_estimate: k must be non-negative");
    if (!(T >= kThetaFloor)) throw DomainError("moment_estimate: T below validity floor 10");
    if (!table.covers(0.0, 2.0 * T)) throw CoverageError("moment_estimate: zero table does not cover [0, 2T]");
    MomentEstimate est;
    est.k = k;
    est.theta = theta;
    est.T = T;
    est.order = spec.order;
    if (k == 0.0) {
        est.value = T;
        est.n_panels = 1;
        return est;
    }
    std::vector<double> breaks{T};
    auto [first, last] = table.window(T, 2.0 * T);
    for (auto it = first; it != last; ++it)
        if (it->gamma > breaks.back()) breaks.push_back(it->gamma);
    if (breaks.back() < 2.0 * T) breaks.push_back(2.0 * T);
    const std::size_t n = breaks.size() - 1;
    est.n_panels = n;
    const double c = std::cos(theta), s = std::sin(theta);
    const auto rule = gauss_legendre(spec.order);
    std::vector<QuadResult> parts(n);
    parallel_for(n, [&](std::size_t i) {
        const double a = breaks[i], b = breaks[i + 1];
        // N(t) is constant on the open panel
        const double count = static_cast<double>(table.count_up_to(0.5 * (a + b)));
        auto f = [&](double t) {
            const double z = std::abs(hardy_z(t));
            const double sv = count - rs_theta(t) / std::numbers::pi - 1.0;
            const double expo = 2.0 * k * s * std::numbers::pi * sv;
            const double zpow = c == 0.0 ? 1.0 : std::pow(z, 2.0 * k * c);
            if (expo > 700.0 || !std::isfinite(zpow))
                throw OverflowGuardError("moment_estimate: integrand overflows; reduce k");
            return zpow * std::exp(expo);
        };
        parts[i] = adaptive_gauss(rule, f, a, b, spec.rel_tol, 0.0, spec.max_depth, spec.min_depth);
    });
    std::vector<double> vals(n), errs(n);
    for (std::size_t i = 0; i < n; ++i) {
        vals[i] = parts[i].value;
        errs[i] = parts[i].error;
        est.subintervals += parts[i].subintervals;
        est.evaluations += parts[i].evaluations;
    }
    est.value = pairwise_sum(vals);
    est.error_estimate = pairwise_sum(errs);
    return est;
}

/// Hardy–Littlewood mean square over [T, 2T]:
/// 2T log(2T/2pi) - T log(T/2pi) + (2 gamma - 1) T.
inline double second_moment_asymptotic(double T) {
    const double tp = 2.0 * std::numbers::pi;
    return 2.0 * T * std::log(2.0 * T / tp) - T * std::log(T / tp) + (2.0 * kEulerGamma - 1.0) * T;
}

/// Least-squares slope of log(M/T) against log log T.
inline double fit_log_exponent(const std::vector<double>& T, const std::vector<double>& M) {
    const std::size_t n = T.size();
    if (n < 2 || M.size() != n) throw DomainError("fit_log_exponent: need matching vectors of length >= 2");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = std::log(std::log(T[i])), y = std::log(M[i] / T[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---------------------------------------------------------------------------
// Tail distribution

struct TailCurve {
    double theta = 0.0;
    double T = 0.0;
    std::size_t n_samples = 0;
    std::vector<std::pair<double, double>> points;  // (V, survival)
    double sample_min = 0.0;
    double sample_max = 0.0;
};

/// Equispaced samples t_i = T + (i + 1/2) T / n, nudged off zero ordinates.
inline std::vector<double> tail_samples(double T, std::size_t n, const ZeroTable& table) {
    std::vector<double> ts(n);
    for (std::size_t i = 0; i < n; ++i) {
        double t = T + (static_cast<double>(i) + 0.5) * T / static_cast<double>(n);
        const double r = default_exclusion_radius(t);
        for (int tries = 0; tries < 8; ++tries) {
            auto [f, l] = table.window(t - r, t + r);
            if (f == l) break;
            t += 2.5 * r;
        }
        ts[i] = t;
    }
    return ts;
}

inline std::vector<double> rotated_log_zeta_samples(double theta, const std::vector<double>& ts,
                                                    const ZeroTable& table) {
    std::vector<double> v(ts.size());
    parallel_for(ts.size(), [&](std::size_t i) { v[i] = re_rotated_log_zeta(ts[i], theta, table); });
    return v;
}

inline TailCurve survival_curve(double theta, double T, const std::vector<double>& values,
                                const std::vector<double>& V_grid) {
    TailCurve c;
    c.theta = theta;
    c.T = T;
    c.n_samples = values.size();
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    c.sample_min = sorted.empty() ? 0.0 : sorted.front();
    c.sample_max = sorted.empty() ? 0.0 : sorted.back();
    for (double V : V_grid) {
        const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), V);
        c.points.push_back({V, sorted.empty() ? 0.0 : static_cast<double>(above) / sorted.size()});
    }
    return c;
}

/// Empirical P_T(Re e^{-i theta} log zeta > V) on the grid.
inline TailCurve tail_survival(double theta, double T, const std::vector<double>& V_grid, std::size_t n_samples,
                               const ZeroTable& table) {
    if (n_samples < 10000) throw DomainError("tail_survival: need at least 1e4 samples");
    if (!(T >= kThetaFloor)) throw DomainError("tail_survival: T below validity floor 10");
    if (!table.covers(0.0, 2.0 * T)) throw CoverageError("tail_survival: zero table does not cover [0, 2T]");
    const auto ts = tail_samples(T, n_samples, table);
    return survival_curve(theta, T, rotated_log_zeta_samples(theta, ts, table), V_grid);
}

/// Shape of the three-term tail bound at V (constants set to 1).
struct TailBoundShape {
    double gaussian = 0.0;
    double vlogv = 0.0;
    double zero_density = 0.0;
    double total = 0.0;
};

inline TailBoundShape tail_bound_shape(double V, double T, double K, double theta, double lambda, double phi_at_T) {
    const double A = optimize_h(theta).A_star;
    const double llT = std::log(std::log(T));
    TailBoundShape s;
    s.gaussian = std::exp(-V * V / (4.0 * std::numbers::e * K * K * llT));
    s.vlogv = V > 1.0 ? std::exp(-(A / K) * V * std::log(V)) : 1.0;
    s.zero_density =
        std::exp(K) * phi_at_T * V / std::log(T) * std::exp(-(1.0 - 1.0 / K) * 2.0 * A * lambda * V);
    s.total = s.gaussian + s.vlogv + s.zero_density;
    return s;
}

// ---------------------------------------------------------------------------
// Theorem-level bound evaluation

enum class PhiKind { ingham, selberg, user };

struct PhiSpec {
    PhiKind kind = PhiKind::ingham;
    std::function<double(double)> user;

    double operator()(double T) const {
        switch (kind) {
            case PhiKind::ingham: return std::pow(std::log(T), 5.0);
            case PhiKind::selberg: return std::log(T);
            case PhiKind::user:
                if (!user) throw DomainError("PhiSpec: user function missing");
                return user(T);
        }
        return 0.0;
    }
};

struct TheoremBound {
    double term_main = 0.0;      // exp(C1 e^{C1 k}) T (log T)^{k^2}
    double term_density = 0.0;   // C1 T (log T)^{k^2 (1 + (k+eps)/(A lambda - (k+eps)))} (Phi/log T)^{(k+eps)/(A lambda)}
    double term_zero = 0.0;      // C1 T Phi / log T
    double total = 0.0;
    double A = 0.0;
    double h = 0.0;
    std::optional<double> corollary_envelope;  // T (log T)^{B(k) + eps} at theta = +-pi/2
};

inline TheoremBound theorem_bound_eval(double k, double theta, double lambda, const PhiSpec& phi, double T,
                                       double eps, double C1 = 1.0) {
    if (!(k >= 0.0)) throw DomainError("theorem_bound_eval: k must be non-negative");
    if (!(eps > 0.0 && eps <= 0.01)) throw DomainError("theorem_bound_eval: eps must lie in (0, 1/100]");
    if (!(lambda > 0.0)) throw DomainError("theorem_bound_eval: lambda must be positive");
    if (!(T > std::numbers::e)) throw DomainError("theorem_bound_eval: T must exceed e");
    const auto opt = optimize_h(theta);
    TheoremBound b;
    b.A = opt.A_star;
    b.h = opt.h_star;
    const double Al = b.A * lambda;
    if (k >= Al - eps)
        throw HypothesisError("theorem_bound_eval: k must be below A(h, theta) lambda - eps = " + std::to_string(Al - eps));
    const double lT = std::log(T), ph = phi(T);
    const double ke = k + eps;
    b.term_main = std::exp(C1 * std::exp(C1 * k)) * T * std::pow(lT, k * k);
    b.term_density = C1 * T * std::pow(lT, k * k * (1.0 + ke / (Al - ke))) * std::pow(ph / lT, ke / Al);
    b.term_zero = C1 * T * ph / lT;
    b.total = b.term_main + b.term_density + b.term_zero;
    if (std::abs(std::abs(theta) - std::numbers::pi / 2.0) < 1e-12 && k < kCorollaryC0)
        b.corollary_envelope = T * std::pow(lT, corollary_values(k).B_k + eps);
    return b;
}

}  // namespace zml
