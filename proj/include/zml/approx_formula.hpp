#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "zml/constants.hpp"
#include "zml/error.hpp"
#include "zml/parallel.hpp"
#include "zml/primes.hpp"
#include "zml/quadrature.hpp"
#include "zml/zero_table.hpp"
#include "zml/zeta_engine.hpp"

namespace zml {

// ---------------------------------------------------------------------------
// Kernel and weight

inline const double kKernelLo = std::exp(1.0 / 3.0);
inline const double kKernelMid = std::exp(2.0 / 3.0);

/// u(x): supported on [e^{1/3}, e], a triangle in log x peaking at e^{2/3}.
inline double kernel_u(double x) {
    if (!(x >= kKernelLo && x <= std::numbers::e)) return 0.0;
    const double lx = std::log(x);
    return (x <= kKernelMid ? 9.0 * lx - 3.0 : 9.0 - 9.0 * lx) / x;
}

/// Mellin transform evaluated at 1 - z: int u(x) x^{-z} dx
/// = 9 (e^{-z/6} - e^{-z/2})^2 / z^2 = e^{-z} (expm1(z/3) / (z/3))^2.
inline cdouble kernel_u_tilde(cdouble z) {
    const cdouble w = z / 3.0;
    cdouble ratio;
    if (std::abs(w) < 0.5) {
        // (e^w - 1)/w = sum w^n/(n+1)!
        cdouble term = 1.0;
        ratio = 1.0;
        for (int n = 1; n <= 18; ++n) {
            term *= w / static_cast<double>(n + 1);
            ratio += term;
        }
    } else {
        ratio = (std::exp(w) - 1.0) / w;
    }
    return std::exp(-z) * ratio * ratio;
}

/// w_X(y) = int_{y^{1/log X}}^inf u(x) dx in closed form.
inline double weight_w(double y, double X) {
    if (!(X >= 3.0)) throw DomainError("weight_w: X must be at least 3");
    if (!(y >= 1.0)) throw DomainError("weight_w: y must be at least 1");
    const double a = std::log(y) / std::log(X);
    if (a <= 1.0 / 3.0) return 1.0;
    if (a <= 2.0 / 3.0) return 0.5 + 3.0 * a - 4.5 * a * a;
    if (a < 1.0) return 4.5 * (1.0 - a) * (1.0 - a);
    return 0.0;
}

/// The weight with the middle branch exactly as printed in the source
/// formula; discontinuous at y = X^{1/3} (value 3.75 there).
inline double weight_w_printed(double y, double X) {
    if (!(X >= 3.0)) throw DomainError("weight_w_printed: X must be at least 3");
    if (!(y >= 1.0)) throw DomainError("weight_w_printed: y must be at least 1");
    const double lX = std::log(X), ly = std::log(y);
    if (ly <= lX / 3.0) return 1.0;
    if (ly <= 2.0 * lX / 3.0) {
        const double l1 = lX - ly, l2 = 2.0 * lX / 3.0 - ly, d = 2.0 * lX / 3.0;
        return (9.0 * l1 * l1 - 6.0 * l2 * l2) / (2.0 * d * d);
    }
    if (ly <= lX) return 9.0 * (lX - ly) * (lX - ly) / (2.0 * lX * lX);
    return 0.0;
}

struct WeightDiscrepancyRow {
    double a = 0.0;  // log y / log X
    double integral_form = 0.0;
    double printed_form = 0.0;
    double difference = 0.0;
};

struct WeightDiscrepancyReport {
    std::vector<WeightDiscrepancyRow> rows;
    double max_abs_difference = 0.0;
    double printed_jump_at_third = 0.0;  // printed(X^{1/3}+) - 1
};

/// Compares both middle branches on n points of a in [1/3, 2/3].
inline WeightDiscrepancyReport weight_discrepancy_report(int n = 21, double X = 1e6) {
    if (n < 2) throw DomainError("weight_discrepancy_report: need at least 2 points");
    WeightDiscrepancyReport rep;
    const double lX = std::log(X);
    for (int i = 0; i < n; ++i) {
        const double a = 1.0 / 3.0 + (1.0 / 3.0) * i / (n - 1);
        const double y = std::exp(a * lX);
        WeightDiscrepancyRow r{a, weight_w(y, X), weight_w_printed(y, X), 0.0};
        r.difference = r.printed_form - r.integral_form;
        rep.max_abs_difference = std::max(rep.max_abs_difference, std::abs(r.difference));
        rep.rows.push_back(r);
    }
    rep.printed_jump_at_third = weight_w_printed(std::exp(lX / 3.0) * (1.0 + 1e-12), X) - 1.0;
    return rep;
}

// ---------------------------------------------------------------------------
// Parameters and sigma

struct ApproxParams {
    double theta = 0.0;
    double K = 50.0;
    double h = 0.5;
    double X = 3.0;
};

/// Parameters with h = h(theta) from the optimizer.
inline ApproxParams make_params(double theta, double K, double X) {
    if (!(K >= 1.0)) throw DomainError("ApproxParams: K must be at least 1");
    if (!(X >= 3.0)) throw DomainError("ApproxParams: X must be at least 3");
    return {theta, K, optimize_h(theta).h_star, X};
}

inline void check_params(const ApproxParams& p) {
    if (!(p.K >= 1.0)) throw DomainError("ApproxParams: K must be at least 1");
    if (!(p.h > 0.0 && p.h < 1.0)) throw DomainError("ApproxParams: h must lie in (0, 1)");
    if (!(p.X >= 3.0)) throw DomainError("ApproxParams: X must be at least 3");
}

struct SigmaValue {
    double sigma = 0.5;
    double floor = 0.5;
    std::optional<ZeroEntry> attained_by;
};

namespace detail {

/// Visits zeros rho (stored ones and their conjugates) with signed ordinate
/// in [t - W, t + W].
template <class F>
void for_each_zero_near(const ZeroTable& table, double t, double W, F&& fn) {
    auto [first, last] = table.window(t - W, t + W);
    for (auto it = first; it != last; ++it) fn(*it, it->gamma);
    if (W > t) {
        auto [cf, cl] = table.window(0.0, W - t);
        for (auto it = cf; it != cl; ++it) fn(*it, -it->gamma);
    }
}

/// Tables without a covered range are explicit finite zero sets; coverage is
/// only enforced for tables that claim completeness on a range.
inline void require_coverage(const ZeroTable& table, double lo, double hi, const char* who) {
    if (!table.covered) return;
    if (!table.covers(std::max(lo, 0.0), hi))
        throw CoverageError(std::string(who) + ": zero table does not cover [" + std::to_string(std::max(lo, 0.0)) +
                            ", " + std::to_string(hi) + "]");
}

inline double density_at(double x) {
    x = std::abs(x);
    return x > 2.0 * std::numbers::pi ? std::log(x / (2.0 * std::numbers::pi)) / (2.0 * std::numbers::pi) : 0.0;
}

}  // namespace detail

/// sigma_{theta,K}(t, X): 1/2 + (1/h) max{beta - 1/2, K/log X} over zeros with
/// |t - gamma| <= K X^{|beta - 1/2|} / log X.
inline SigmaValue sigma_select(double t, const ApproxParams& p, const ZeroTable& table) {
    check_params(p);
    const double lX = std::log(p.X);
    const double base = p.K / lX;
    const double W = p.K * std::sqrt(p.X) / lX;
    detail::require_coverage(table, t - W, t + W, "sigma_select");
    SigmaValue out;
    out.floor = 0.5 + base / p.h;
    double best = base;
    detail::for_each_zero_near(table, t, W, [&](const ZeroEntry& z, double g) {
        const double dev = z.beta - 0.5;
        if (std::abs(t - g) > p.K * std::pow(p.X, std::abs(dev)) / lX) return;
        if (dev > best) {
            best = dev;
            out.attained_by = z;
        }
    });
    out.sigma = 0.5 + best / p.h;
    return out;
}

/// Membership in E_K(X, T) at t by its definition: no zero with
/// beta > 1/2 + K/log X and |t - gamma| <= K X^{beta - 1/2} / log X.
inline bool in_exceptional_free_set(double t, double K, double X, const ZeroTable& table) {
    const double lX = std::log(X);
    const double W = K * std::sqrt(X) / lX;
    bool ok = true;
    detail::for_each_zero_near(table, t, W, [&](const ZeroEntry& z, double g) {
        if (z.beta > 0.5 + K / lX && std::abs(t - g) <= K * std::pow(X, z.beta - 0.5) / lX) ok = false;
    });
    return ok;
}

// ---------------------------------------------------------------------------
// Prime sums

struct PrimeSums {
    cdouble P;              // P_{theta,K}(t, X)
    double weighted_log = 0.0;  // Re sum w_X(p) log p p^{-s}
};

inline PrimeSums prime_sums(double t, double sigma, double X, const PrimeList& primes) {
    std::vector<double> re, im, wl;
    re.reserve(primes.size());
    im.reserve(primes.size());
    wl.reserve(primes.size());
    for (auto pi : primes) {
        const double p = static_cast<double>(pi);
        if (p > X) break;
        const double lp = std::log(p);
        const double w = weight_w(p, X);
        const cdouble ps = std::polar(std::exp(-sigma * lp), -t * lp);  // p^{-s}
        const cdouble term = w * ps * (1.0 + (sigma - 0.5) * lp) + 0.5 * ps * ps;
        re.push_back(term.real());
        im.push_back(term.imag());
        wl.push_back(w * lp * ps.real());
    }
    return {{pairwise_sum(re), pairwise_sum(im)}, pairwise_sum(wl)};
}

inline cdouble dirichlet_P(double t, const ApproxParams& p, const ZeroTable& table, const PrimeList& primes) {
    const auto sig = sigma_select(t, p, table);
    return prime_sums(t, sig.sigma, p.X, primes).P;
}

inline cdouble dirichlet_P(double t, const ApproxParams& p, const ZeroTable& table) {
    check_params(p);
    return dirichlet_P(t, p, table, sieve_primes(p.X));
}

// ---------------------------------------------------------------------------
// Zero term Y

struct YValue {
    double value = 0.0;          // includes tail_estimate when windowed
    double summed = 0.0;         // sum over table zeros
    double tail_estimate = 0.0;  // smooth-density estimate of omitted zeros
    double tail_bound = 0.0;
    double window = 0.0;         // half-width W of the summed range (inf: whole table)
    std::size_t n_terms = 0;
};

namespace detail {

inline double y_term(double t, double sigma, double beta, double g) {
    const double u2 = (t - g) * (t - g);
    const double d = sigma - 0.5, db = beta - 0.5;
    if (std::abs(db) > std::sqrt(0.5 * d * d + u2)) return 0.0;  // outside the set S
    return 0.5 * std::log1p(((sigma - beta) * (sigma - beta) - db * db) / (db * db + u2));
}

/// int_W^inf (rho(t+u) + rho(t-u)) d^2 / (2u^2) du: bound for critical-line
/// zeros (and conjugates) beyond distance W.
inline double y_tail_bound(double t, double d, double W) {
    auto f = [&](double u) { return (density_at(t + u) + density_at(t - u)) * d * d / (2.0 * u * u); };
    return integrate(f, W, std::numeric_limits<double>::infinity(), 1e-10).value;
}

}  // namespace detail

/// Y_{theta,K}(t, X) truncated to |gamma - t| <= W, W chosen so that the tail
/// bound is below tail_tol. Throws CoverageError when W leaves the table.
inline YValue zero_term_Y(double t, const ApproxParams& p, const ZeroTable& table, double tail_tol = 1e-9) {
    if (!(tail_tol > 0.0)) throw DomainError("zero_term_Y: tail_tol must be positive");
    const auto sig = sigma_select(t, p, table);
    const double d = sig.sigma - 0.5;
    YValue y;
    if (!table.covered) {
        y.window = std::numeric_limits<double>::infinity();
    } else {
        double W = std::max(1.0, d * d * detail::density_at(t + 1.0) / tail_tol);
        for (int i = 0; i < 60 && detail::y_tail_bound(t, d, W) >= tail_tol; ++i) W *= 1.5;
        detail::require_coverage(table, t - W, t + W, "zero_term_Y");
        y.window = W;
        y.tail_bound = detail::y_tail_bound(t, d, W);
    }
    std::vector<double> terms;
    const double W = y.window;
    if (std::isinf(W)) {
        for (const auto& z : table.entries) {
            terms.push_back(z.multiplicity * detail::y_term(t, sig.sigma, z.beta, z.gamma));
            terms.push_back(z.multiplicity * detail::y_term(t, sig.sigma, z.beta, -z.gamma));
        }
    } else {
        detail::for_each_zero_near(table, t, W, [&](const ZeroEntry& z, double g) {
            terms.push_back(z.multiplicity * detail::y_term(t, sig.sigma, z.beta, g));
        });
    }
    y.n_terms = terms.size();
    y.summed = pairwise_sum(terms);
    y.value = y.summed;
    return y;
}

/// Y summed over every zero of the table (with conjugates), plus a
/// smooth-density estimate for the ordinates outside the covered range.
inline YValue zero_term_Y_windowed(double t, const ApproxParams& p, const ZeroTable& table) {
    const auto sig = sigma_select(t, p, table);
    const double d = sig.sigma - 0.5;
    YValue y;
    y.window = std::numeric_limits<double>::infinity();
    std::vector<double> terms;
    for (const auto& z : table.entries) {
        terms.push_back(z.multiplicity * detail::y_term(t, sig.sigma, z.beta, z.gamma));
        terms.push_back(z.multiplicity * detail::y_term(t, sig.sigma, z.beta, -z.gamma));
    }
    y.n_terms = terms.size();
    y.summed = pairwise_sum(terms);
    if (table.covered) {
        const double hi = table.covered->hi;
        const double lo = table.covers_from_zero() ? 0.0 : table.covered->lo;
        auto est = [&](double g) {
            return detail::density_at(g) *
                   (0.5 * std::log1p(d * d / ((t - g) * (t - g))) + 0.5 * std::log1p(d * d / ((t + g) * (t + g))));
        };
        auto bnd = [&](double g) {
            return detail::density_at(g) * (d * d / (2.0 * (t - g) * (t - g)) + d * d / (2.0 * (t + g) * (t + g)));
        };
        const double inf = std::numeric_limits<double>::infinity();
        y.tail_estimate = integrate(est, hi, inf, 1e-10).value;
        y.tail_bound = integrate(bnd, hi, inf, 1e-10).value;
        if (lo > 0.0) {
            y.tail_estimate += integrate(est, 0.0, lo, 1e-10).value;
            y.tail_bound += integrate(bnd, 0.0, lo, 1e-10).value;
        }
    }
    y.value = y.summed + y.tail_estimate;
    return y;
}

// ---------------------------------------------------------------------------
// Residuals of the approximate formula

struct ResidualRow {
    double t = 0.0;
    double X = 0.0;
    double sigma = 0.0;
    double lhs = 0.0;
    double rhs_factor = 0.0;
    double core_term = 0.0;
    double min_C1 = 0.0;
    double Y_value = 0.0;
    double Y_tail_bound = 0.0;
};

struct ResidualReport {
    std::vector<ResidualRow> rows;
    double max_min_C1 = -std::numeric_limits<double>::infinity();
    double min_Y = std::numeric_limits<double>::infinity();
};

using ParamsPolicy = std::function<ApproxParams(double)>;

/// Evaluates both sides of the approximate formula at each t and the least
/// C1 that makes the inequality hold there.
inline ResidualRow residual_at(double t, const ApproxParams& p, const ZeroTable& table, const PrimeList& primes) {
    check_params(p);
    if (!(std::abs(t) >= 3.0)) throw PreconditionError("residual: |t| must be at least 3");
    if (p.X > std::pow(std::abs(t), 6.0)) throw PreconditionError("residual: X must not exceed |t|^6");
    const auto sig = sigma_select(t, p, table);
    const auto lz = log_zeta_critical(t, table);
    const auto ps = prime_sums(t, sig.sigma, p.X, primes);
    const auto y = zero_term_Y_windowed(t, p, table);
    const double c = std::cos(p.theta), s = std::sin(p.theta);
    ResidualRow r;
    r.t = t;
    r.X = p.X;
    r.sigma = sig.sigma;
    r.Y_value = y.value;
    r.Y_tail_bound = y.tail_bound;
    r.lhs = std::abs(c * (lz.re_log - ps.P.real() + y.value) + s * (lz.im_log - ps.P.imag()));
    r.rhs_factor = (p.h / A_of(p.h, p.theta) + 9.0 / p.K) * (sig.sigma - 0.5);
    r.core_term = 0.5 * std::log(std::abs(t)) - ps.weighted_log;
    r.min_C1 = (r.lhs / r.rhs_factor - r.core_term) / std::log(p.X);
    return r;
}

inline ResidualReport residual_report(const std::vector<double>& t_samples, const ParamsPolicy& policy,
                                      const ZeroTable& table) {
    ResidualReport rep;
    rep.rows.resize(t_samples.size());
    std::vector<ApproxParams> params(t_samples.size());
    double max_X = 3.0;
    for (std::size_t i = 0; i < t_samples.size(); ++i) {
        params[i] = policy(t_samples[i]);
        check_params(params[i]);
        if (!(std::abs(t_samples[i]) >= 3.0)) throw PreconditionError("residual: |t| must be at least 3");
        if (params[i].X > std::pow(std::abs(t_samples[i]), 6.0))
            throw PreconditionError("residual: X must not exceed |t|^6");
        max_X = std::max(max_X, params[i].X);
    }
    const auto primes = sieve_primes(max_X);
    parallel_for(t_samples.size(), [&](std::size_t i) { rep.rows[i] = residual_at(t_samples[i], params[i], table, primes); });
    for (const auto& r : rep.rows) {
        rep.max_min_C1 = std::max(rep.max_min_C1, r.min_C1);
        rep.min_Y = std::min(rep.min_Y, r.Y_value);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Explicit formula for zeta'/zeta

struct ExplicitFormulaResult {
    cdouble lhs;         // -sum_{n <= N} Lambda(n) n^{-s}
    cdouble rhs;
    cdouble prime_term;
    cdouble zero_term;
    cdouble trivial_term;
    cdouble pole_term;
    double residual = 0.0;
    double dirichlet_tail_bound = 0.0;
    double zero_tail_bound = 0.0;
    double trivial_tail_bound = 0.0;
    double rounding_allowance = 0.0;
    double budget = 0.0;
    std::size_t zeros_used = 0;
    std::uint64_t dirichlet_terms = 0;
    cdouble oracle;  // zeta'/zeta(s) from the high-precision oracle
    double oracle_residual = 0.0;
    bool passed = false;
    std::vector<std::string> warnings;
};

namespace detail {

/// Upper bound for |S(T)| (Trudgian-type explicit constants).
inline double s_bound(double T) { return 0.112 * std::log(T) + 0.278 * std::log(std::log(T)) + 2.51; }

}  // namespace detail

/// Residual of the smoothed explicit formula at s (Re s >= 1.5) against the
/// Dirichlet series of -zeta'/zeta truncated at N, with tail bounds for every
/// truncated piece.
inline ExplicitFormulaResult explicit_formula_check(cdouble s, double X, std::size_t n_zeros, const ZeroTable& table,
                                                    std::uint64_t N = 2000000) {
    if (!(s.real() >= 1.5)) throw DomainError("explicit_formula_check: Re s must be at least 1.5");
    if (!(X >= 3.0)) throw DomainError("explicit_formula_check: X must be at least 3");
    const double sigma = s.real(), tau = s.imag();
    const double lX = std::log(X);
    N = std::max<std::uint64_t>(N, static_cast<std::uint64_t>(X));
    ExplicitFormulaResult r;
    r.dirichlet_terms = N;

    const auto lam = von_mangoldt_table(N);
    std::vector<double> lre, lim, pre, pim;
    for (std::uint64_t n = 2; n <= N; ++n) {
        if (lam[n] == 0.0) continue;
        const double ln = std::log(static_cast<double>(n));
        const cdouble term = lam[n] * std::polar(std::exp(-sigma * ln), -tau * ln);
        lre.push_back(-term.real());
        lim.push_back(-term.imag());
        if (static_cast<double>(n) <= X) {
            const double w = weight_w(static_cast<double>(n), X);
            pre.push_back(-w * term.real());
            pim.push_back(-w * term.imag());
        }
    }
    r.lhs = {pairwise_sum(lre), pairwise_sum(lim)};
    r.prime_term = {pairwise_sum(pre), pairwise_sum(pim)};
    r.dirichlet_tail_bound = 1.03883 * sigma * std::pow(static_cast<double>(N), 1.0 - sigma) / (sigma - 1.0);

    const std::size_t used = std::min(n_zeros, table.size());
    if (used < n_zeros) r.warnings.push_back("table holds fewer zeros than requested");
    r.zeros_used = used;
    std::vector<double> zre, zim;
    for (std::size_t i = 0; i < used; ++i) {
        const auto& z = table.entries[i];
        for (double g : {z.gamma, -z.gamma}) {
            const cdouble d = s - cdouble(z.beta, g);
            const cdouble term = static_cast<double>(z.multiplicity) * kernel_u_tilde(d * lX) / d;
            zre.push_back(term.real());
            zim.push_back(term.imag());
        }
    }
    r.zero_term = {pairwise_sum(zre), pairwise_sum(zim)};

    // Zeros beyond the last one used: |u~(1-z)/(s-rho)| <= 36 e^{-(sigma-1) log X / 3} / (|gamma -/+ tau|^3 log^2 X),
    // with 0 < beta < 1, bounded by partial summation against N(T) <= theta/pi + 1 + |S|.
    if (used > 0) {
        const double G = table.entries[used - 1].gamma;
        const double C = 36.0 * std::exp(-(sigma - 1.0) * lX / 3.0) / (lX * lX);
        const double shift = std::abs(tau);
        if (G > shift + 1.0) {
            auto excess = [&](double g) {
                return (rs_theta(g) - rs_theta(G)) / std::numbers::pi + detail::s_bound(g) + detail::s_bound(G);
            };
            auto f = [&](double g) { return 3.0 * C * excess(g) / std::pow(g - shift, 4.0); };
            const double inf = std::numeric_limits<double>::infinity();
            // boundary term at G is nonpositive after partial summation; both rho and its conjugate
            r.zero_tail_bound = 2.0 * integrate(f, G, inf, 1e-10).value;
        } else {
            r.warnings.push_back("zero truncation below Im s; tail bound not available");
            r.zero_tail_bound = std::numeric_limits<double>::infinity();
        }
    } else {
        r.zero_tail_bound = std::numeric_limits<double>::infinity();
    }

    cdouble triv = 0.0;
    int n = 1;
    for (; n < 100000; ++n) {
        const cdouble d = s + 2.0 * n;
        const cdouble term = kernel_u_tilde(d * lX) / d;
        triv += term;
        if (std::abs(term) < 1e-300 || std::abs(term) < 1e-20 * std::abs(triv)) break;
    }
    r.trivial_term = triv;
    {
        // same kernel bound as for the zeros, geometric in n with ratio e^{-2 log X / 3}
        const double m = sigma + 2.0 * (n + 1);
        const double next = 36.0 * std::exp(-m * lX / 3.0) / (m * m * m * lX * lX);
        r.trivial_tail_bound = next / (1.0 - std::exp(-2.0 * lX / 3.0));
    }
    const cdouble dp = s - 1.0;
    r.pole_term = -kernel_u_tilde(dp * lX) / dp;
    r.rhs = r.prime_term + r.zero_term + r.trivial_term + r.pole_term;
    r.residual = std::abs(r.lhs - r.rhs);
    r.rounding_allowance = 1e-13 * (std::abs(r.lhs) + std::abs(r.prime_term) + std::abs(r.zero_term) + 1.0);
    r.budget = r.dirichlet_tail_bound + r.zero_tail_bound + r.trivial_tail_bound + r.rounding_allowance;
    r.oracle = zeta_log_derivative_oracle(s);
    r.oracle_residual = std::abs(r.oracle - r.rhs);
    r.passed = r.residual <= r.budget;
    return r;
}

// ---------------------------------------------------------------------------
// Zero/prime balance

struct BalanceReport {
    double zero_side = 0.0;
    double zero_tail_estimate = 0.0;
    double prime_side = 0.0;  // (1/2) log|t| - Re sum w log p p^{-s}
    double ratio = 0.0;       // zero_side / prime_side (nan if degenerate)
    double sigma = 0.0;
    std::size_t n_terms = 0;
};

inline BalanceReport zero_prime_balance(double t, const ApproxParams& p, const ZeroTable& table,
                                        const PrimeList& primes) {
    if (!(std::abs(t) >= 3.0)) throw PreconditionError("zero_prime_balance: |t| must be at least 3");
    if (!(p.X >= 3.0) || p.X > std::pow(std::abs(t), 6.0))
        throw PreconditionError("zero_prime_balance: need 3 <= X <= |t|^6");
    const auto sig = sigma_select(t, p, table);
    const double sg = sig.sigma;
    BalanceReport b;
    b.sigma = sg;
    std::vector<double> terms;
    for (const auto& z : table.entries) {
        for (double g : {z.gamma, -z.gamma}) {
            const double a = sg - z.beta;
            terms.push_back(z.multiplicity * a / (a * a + (t - g) * (t - g)));
        }
    }
    b.n_terms = terms.size();
    double summed = pairwise_sum(terms);
    if (table.covered) {
        const double d = sg - 0.5;
        auto est = [&](double g) {
            return detail::density_at(g) * (d / (d * d + (t - g) * (t - g)) + d / (d * d + (t + g) * (t + g)));
        };
        const double inf = std::numeric_limits<double>::infinity();
        b.zero_tail_estimate = integrate(est, table.covered->hi, inf, 1e-10).value;
        if (!table.covers_from_zero()) b.zero_tail_estimate += integrate(est, 0.0, table.covered->lo, 1e-10).value;
    }
    b.zero_side = summed + b.zero_tail_estimate;
    b.prime_side = 0.5 * std::log(std::abs(t)) - prime_sums(t, sg, p.X, primes).weighted_log;
    b.ratio = b.prime_side != 0.0 ? b.zero_side / b.prime_side : std::numeric_limits<double>::quiet_NaN();
    return b;
}

inline BalanceReport zero_prime_balance(double t, const ApproxParams& p, const ZeroTable& table) {
    check_params(p);
    return zero_prime_balance(t, p, table, sieve_primes(p.X));
}

// ---------------------------------------------------------------------------
// Zero-sum inequality and constant checks

struct ZeroSumInequality {
    double lhs = 0.0;  // sum (sigma - 1/2) / ((sigma - beta)^2 + (t - gamma)^2)
    double rhs = 0.0;  // (1+h^2)/(1-h^2) sum (sigma - beta) / (...)
    bool holds = false;
};

/// Both sides of the zero-sum inequality for an explicit list of zeros
/// (conjugates are not added).
inline ZeroSumInequality zero_sum_inequality(double t, double sigma, double h, const std::vector<ZeroEntry>& zeros) {
    std::vector<double> l, r;
    for (const auto& z : zeros) {
        const double den = (sigma - z.beta) * (sigma - z.beta) + (t - z.gamma) * (t - z.gamma);
        l.push_back(z.multiplicity * (sigma - 0.5) / den);
        r.push_back(z.multiplicity * (sigma - z.beta) / den);
    }
    ZeroSumInequality out;
    out.lhs = pairwise_sum(l);
    out.rhs = (1.0 + h * h) / (1.0 - h * h) * pairwise_sum(r);
    out.holds = out.lhs <= out.rhs * (1.0 + 1e-12) + 1e-300;
    return out;
}

/// (1 + h^2) / (h (1 - h)).
inline double h_ratio(double h) {
    detail::check_h(h);
    return (1.0 + h * h) / (h * (1.0 - h));
}

}  // namespace zml
