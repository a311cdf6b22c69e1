#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "zml/approx_formula.hpp"
#include "zml/constants.hpp"
#include "zml/error.hpp"
#include "zml/parallel.hpp"
#include "zml/primes.hpp"
#include "zml/quadrature.hpp"
#include "zml/zero_table.hpp"

namespace zml {

struct RegimeOverrides {
    std::optional<double> L;
    std::optional<double> K;
    std::optional<double> log_threshold;  // replaces -80 A kappa K
    std::optional<std::vector<double>> delta;  // explicit ladder, delta[0] = 0
    double a_threshold_scale = 1.0;            // multiplies the A(i,j) thresholds
};

struct RegimeParams {
    double T = 0.0;
    double log_T = 0.0;
    double k = 0.0;
    double kappa = 3.0;
    double K = 1.0;
    double theta = 0.0;
    double h = 0.5;
    double A = 0.0;
    double L = 0.0;
    double log_threshold = 0.0;  // log of the cutoff e^{-80 A kappa K}
    std::vector<double> delta;   // delta[0] = 0, ..., ladder
    int I_index = 1;
    double a_threshold_scale = 1.0;
    bool overridden = false;

    /// log T^{delta_j}.
    double log_X(int j) const { return delta.at(static_cast<std::size_t>(j)) * log_T; }
    double X(int j) const { return std::exp(log_X(j)); }
};

/// Regime from log T, so that heights beyond double range stay usable.
inline RegimeParams build_regime_log(double log_T, double k, double K, double theta, const RegimeOverrides& ov = {}) {
    if (!(log_T >= std::log(100.0) - 1e-12)) throw DomainError("build_regime: T must be at least 100");
    if (!(k >= 0.0)) throw DomainError("build_regime: k must be non-negative");
    RegimeParams r;
    r.log_T = log_T;
    r.T = std::exp(log_T);
    r.k = k;
    r.kappa = k + 3.0;
    r.K = ov.K.value_or(K);
    if (!(r.K >= 1.0)) throw DomainError("build_regime: K must be at least 1");
    r.theta = theta;
    const auto opt = optimize_h(theta);
    r.h = opt.h_star;
    r.A = opt.A_star;
    r.L = ov.L.value_or(std::pow(log_T / std::log(log_T), 1.0 / 8.0));
    r.log_threshold = ov.log_threshold.value_or(-80.0 * r.A * r.kappa * r.K);
    r.a_threshold_scale = ov.a_threshold_scale;
    r.overridden = ov.L || ov.K || ov.log_threshold || ov.delta || ov.a_threshold_scale != 1.0;
    if (ov.delta) {
        r.delta = *ov.delta;
        if (r.delta.size() < 2 || r.delta[0] != 0.0) throw DomainError("build_regime: delta override must start at 0");
        for (std::size_t i = 1; i < r.delta.size(); ++i)
            if (!(r.delta[i] > r.delta[i - 1])) throw DomainError("build_regime: delta override must increase");
    } else {
        r.delta.push_back(0.0);
        const int top = std::max(1, static_cast<int>(std::ceil(r.L - 1e-12)));
        for (int i = 1; i <= top; ++i) r.delta.push_back(1.0 / std::pow(r.L + 1.0 - i, 8.0));
    }
    int imax = 0;
    for (std::size_t i = 0; i < r.delta.size(); ++i)
        if (r.delta[i] == 0.0 || std::log(r.delta[i]) <= r.log_threshold) imax = static_cast<int>(i);
    r.I_index = std::min<int>(1 + imax, static_cast<int>(r.delta.size()) - 1);
    return r;
}

inline RegimeParams build_regime(double T, double k, double K, double theta, const RegimeOverrides& ov = {}) {
    if (!(T >= 100.0)) throw DomainError("build_regime: T must be at least 100");
    auto r = build_regime_log(std::log(T), k, K, theta, ov);
    r.T = T;
    return r;
}

// ---------------------------------------------------------------------------
// Coefficients and polynomials

struct PhiPsi {
    cdouble phi;
    cdouble psi;
};

inline void check_j(const RegimeParams& r, int j) {
    if (j < 1 || j > r.I_index) throw IndexError("harper: index j outside 1..I = " + std::to_string(r.I_index));
}

inline PhiPsi coeffs_phi_psi(double p, int j, const RegimeParams& r) {
    check_j(r, j);
    const double lXj = r.log_X(j);
    const double lp = std::log(p);
    if (lp > lXj * (1.0 + 1e-12)) throw PreconditionError("coeffs_phi_psi: p exceeds T^{delta_j}");
    const cdouble rot = std::polar(1.0, -r.theta);
    const double a = std::min(1.0, lp / lXj);
    double w = 1.0;  // w_{X}(p) through a = log p / log X
    if (a > 2.0 / 3.0) w = 4.5 * (1.0 - a) * (1.0 - a);
    else if (a > 1.0 / 3.0) w = 0.5 + 3.0 * a - 4.5 * a * a;
    const double damp = std::exp(-r.K * lp / (r.h * lXj));
    PhiPsi out;
    out.phi = w * damp * (rot + rot * (r.K * lp / (r.h * lXj)) - (r.K / r.A + 9.0 / r.h) * lp / lXj);
    out.psi = rot * std::exp(-2.0 * r.K * lp / (r.h * lXj));
    return out;
}

/// One prime of a window with its coefficients for level j.
struct WindowPrime {
    double p = 0.0;
    double log_p = 0.0;
    cdouble c1;  // phi_j(p) / sqrt(p)
    cdouble c2;  // psi_j(p) / (2p)
};

/// Primes T^{delta_{i-1}} < p <= T^{delta_i} with level-j coefficients;
/// at most `cap` primes when cap > 0.
inline std::vector<WindowPrime> window_primes(int i, int j, const RegimeParams& r, std::size_t cap = 0,
                                              double sieve_limit = 1e8) {
    check_j(r, j);
    if (i < 1 || i > j) throw IndexError("harper: need 1 <= i <= j");
    const double lo = std::exp(r.log_X(i - 1)), hi = std::exp(r.log_X(i));
    std::vector<WindowPrime> out;
    if (hi < 2.0) return out;
    const double top = std::min(hi * (1.0 + 1e-12), sieve_limit);
    // with a cap, sieve a growing range until enough primes are found
    double bound = cap > 0 ? std::min(top, lo + 64.0 + 4.0 * cap * std::log(lo + 64.0 + cap)) : top;
    for (;;) {
        out.clear();
        for (auto pi : sieve_primes(std::max(2.0, bound), sieve_limit)) {
            const double p = static_cast<double>(pi);
            if (p <= lo || p > hi * (1.0 + 1e-12)) continue;
            const auto c = coeffs_phi_psi(std::min(p, hi), j, r);
            out.push_back({p, std::log(p), c.phi / std::sqrt(p), c.psi / (2.0 * p)});
            if (cap > 0 && out.size() >= cap) return out;
        }
        if (bound >= top) return out;
        bound = std::min(top, 4.0 * bound);
    }
}

/// sum over the window of Re(c1 p^{-it} + c2 p^{-2it}).
inline double poly_G_window(double t, const std::vector<WindowPrime>& w) {
    double s = 0.0;
    for (const auto& q : w) {
        const cdouble e1 = std::polar(1.0, -t * q.log_p);
        s += (q.c1 * e1 + q.c2 * e1 * e1).real();
    }
    return s;
}

inline double poly_G(double t, int i, int j, const RegimeParams& r) { return poly_G_window(t, window_primes(i, j, r)); }

/// Threshold 1 / (20 e^2 kappa (j + 1 - i)^2 delta_i) of A(i, j), times the
/// regime's scale.
inline double a_threshold(int i, int j, const RegimeParams& r) {
    const double d = r.delta.at(static_cast<std::size_t>(i));
    const double m = j + 1 - i;
    return r.a_threshold_scale / (20.0 * std::exp(2.0) * r.kappa * m * m * d);
}

// ---------------------------------------------------------------------------
// Classification

struct Membership {
    double t = 0.0;
    int I = 1;
    std::vector<std::vector<char>> in_A;  // in_A[i][j], 1 <= i <= j <= I
    std::vector<char> in_B;               // in_B[j], 1 <= j <= I
    std::vector<char> in_B_direct;        // E_K(T^{delta_j}, T) by definition
    bool in_T = false;
    std::vector<char> in_S;  // in_S[j], 0 <= j <= I - 1
    bool s0_by_B = false;    // t in B(1)^c
    bool covered() const {
        if (in_T) return true;
        for (char c : in_S)
            if (c) return true;
        return false;
    }
    bool b_equivalence() const { return in_B == in_B_direct; }
};

/// Precomputed windows of a regime so repeated classification only evaluates
/// trigonometric sums.
struct PartitionContext {
    RegimeParams regime;
    std::vector<std::vector<std::vector<WindowPrime>>> windows;  // windows[i][j]

    explicit PartitionContext(RegimeParams r) : regime(std::move(r)) {
        const int I = regime.I_index;
        windows.assign(static_cast<std::size_t>(I) + 1, std::vector<std::vector<WindowPrime>>(static_cast<std::size_t>(I) + 1));
        for (int j = 1; j <= I; ++j)
            for (int i = 1; i <= j; ++i) windows[i][j] = window_primes(i, j, regime);
    }
};

inline Membership classify_t(double t, const PartitionContext& ctx, const ZeroTable& table) {
    const auto& r = ctx.regime;
    if (t < r.T * (1.0 - 1e-12) || t > 2.0 * r.T * (1.0 + 1e-12))
        throw DomainError("classify_t: t outside [T, 2T]");
    const int I = r.I_index;
    Membership m;
    m.t = t;
    m.I = I;
    m.in_B.assign(static_cast<std::size_t>(I) + 1, 0);
    m.in_B_direct.assign(static_cast<std::size_t>(I) + 1, 0);
    m.in_A.assign(static_cast<std::size_t>(I) + 1, std::vector<char>(static_cast<std::size_t>(I) + 1, 0));
    for (int j = 1; j <= I; ++j) {
        const double X = std::exp(r.log_X(j));
        if (X < 3.0) throw PreconditionError("classify_t: T^{delta_j} below 3");
        const ApproxParams ap{r.theta, r.K, r.h, X};
        const auto sig = sigma_select(t, ap, table);
        m.in_B[j] = sig.sigma == sig.floor;
        m.in_B_direct[j] = in_exceptional_free_set(t, r.K, X, table);
        for (int i = 1; i <= j; ++i)
            m.in_A[i][j] = std::abs(poly_G_window(t, ctx.windows[i][j])) <= a_threshold(i, j, r);
    }
    bool tset = m.in_B[I];
    for (int i = 1; i <= I; ++i) tset = tset && m.in_A[i][I];
    m.in_T = tset;
    m.in_S.assign(static_cast<std::size_t>(I), 0);
    // S(0): A(1, l)^c for some l, or B(1)^c
    bool s0 = !m.in_B[1];
    m.s0_by_B = s0;
    for (int l = 1; l <= I; ++l) s0 = s0 || !m.in_A[1][l];
    m.in_S[0] = s0;
    for (int j = 1; j <= I - 1; ++j) {
        bool good = m.in_B[j];
        for (int i = 1; i <= j; ++i) good = good && m.in_A[i][j];
        bool fail_next = !m.in_B[j + 1];
        for (int l = j + 1; l <= I; ++l) fail_next = fail_next || !m.in_A[j + 1][l];
        m.in_S[j] = good && fail_next;
    }
    return m;
}

inline Membership classify_t(double t, const RegimeParams& r, const ZeroTable& table) {
    return classify_t(t, PartitionContext(r), table);
}

// ---------------------------------------------------------------------------
// Monte Carlo measure of the partition

struct BucketEstimate {
    std::string bucket;
    double estimate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t hits = 0;
};

struct PartitionReport {
    std::vector<BucketEstimate> buckets;
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
    std::size_t uncovered = 0;          // samples with no bucket
    std::size_t b_equivalence_failures = 0;
    double total_measure = 0.0;         // sum of bucket estimates (overlap allowed)
};

/// Wilson score interval at z = 1.96.
inline std::pair<double, double> wilson_interval(std::size_t hits, std::size_t n, double z = 1.959963984540054) {
    if (n == 0) return {0.0, 1.0};
    const double nn = static_cast<double>(n), ph = static_cast<double>(hits) / nn;
    const double den = 1.0 + z * z / nn;
    const double centre = (ph + z * z / (2.0 * nn)) / den;
    const double half = z * std::sqrt(ph * (1.0 - ph) / nn + z * z / (4.0 * nn * nn)) / den;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

/// splitmix64 finalizer; the counter-based core of every random stream here.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline double unit_double(std::uint64_t x) { return static_cast<double>(x >> 11) * 0x1.0p-53; }

inline PartitionReport measure_partition(const RegimeParams& regime, const ZeroTable& table, std::size_t n_samples,
                                         std::uint64_t seed) {
    if (n_samples < 1000) throw DomainError("measure_partition: need at least 1000 samples");
    const PartitionContext ctx(regime);
    const int I = regime.I_index;
    const std::size_t n_buckets = static_cast<std::size_t>(I) + 2;  // T, S(0..I-1), S(0) by B
    constexpr std::size_t kChunk = 1024;
    const std::size_t n_chunks = (n_samples + kChunk - 1) / kChunk;
    std::vector<std::vector<std::size_t>> counts(n_chunks, std::vector<std::size_t>(n_buckets + 2, 0));
    parallel_for(n_chunks, [&](std::size_t c) {
        const std::uint64_t chunk_seed = mix64(seed ^ mix64(c + 1));
        auto& cnt = counts[c];
        for (std::size_t s = c * kChunk; s < std::min(n_samples, (c + 1) * kChunk); ++s) {
            const double u = unit_double(mix64(chunk_seed + s));
            const double t = regime.T * (1.0 + u);
            const auto m = classify_t(t, ctx, table);
            if (m.in_T) ++cnt[0];
            for (int j = 0; j < I; ++j)
                if (m.in_S[j]) ++cnt[1 + j];
            if (m.s0_by_B) ++cnt[n_buckets - 1];
            if (!m.covered()) ++cnt[n_buckets];
            if (!m.b_equivalence()) ++cnt[n_buckets + 1];
        }
    });
    std::vector<std::size_t> total(n_buckets + 2, 0);
    for (const auto& c : counts)
        for (std::size_t b = 0; b < total.size(); ++b) total[b] += c[b];
    PartitionReport rep;
    rep.n_samples = n_samples;
    rep.seed = seed;
    auto add = [&](std::string name, std::size_t hits) {
        const auto [lo, hi] = wilson_interval(hits, n_samples);
        rep.buckets.push_back({std::move(name), static_cast<double>(hits) / n_samples, lo, hi, hits});
    };
    add("T", total[0]);
    for (int j = 0; j < I; ++j) add("S" + std::to_string(j), total[1 + j]);
    for (std::size_t b = 0; b + 1 < n_buckets; ++b) rep.total_measure += static_cast<double>(total[b]) / n_samples;
    add("S0_B", total[n_buckets - 1]);
    rep.uncovered = total[n_buckets];
    rep.b_equivalence_failures = total[n_buckets + 1];
    return rep;
}

// ---------------------------------------------------------------------------
// Mean value of Dirichlet polynomials

struct MeanValueResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;  // lhs / rhs (0 when rhs = 0)
    double step = 0.0;
    std::size_t panels = 0;
};

/// lhs = int_T^{2T} |sum a(p) p^{-it}|^{2k} dt by composite Gauss–Legendre on
/// panels of length 2 pi / (8 k log X); rhs = T k! (sum |a(p)|^2)^k.
inline MeanValueResult mean_value_check(const std::map<std::uint64_t, cdouble>& a, int k, double T, double X) {
    if (k < 1) throw PreconditionError("mean_value_check: k must be at least 1");
    if (!(X >= 2.0)) throw PreconditionError("mean_value_check: X must be at least 2");
    if (std::pow(X, k) > T) throw PreconditionError("mean_value_check: X^k must not exceed T");
    std::vector<double> logs;
    std::vector<cdouble> coef;
    double norm2 = 0.0;
    for (const auto& [p, c] : a) {
        if (static_cast<double>(p) > X) continue;
        logs.push_back(std::log(static_cast<double>(p)));
        coef.push_back(c);
        norm2 += std::norm(c);
    }
    MeanValueResult out;
    out.rhs = T * std::tgamma(k + 1.0) * std::pow(norm2, k);
    out.step = 2.0 * std::numbers::pi / (8.0 * k * std::log(X));
    const auto n_panels = static_cast<std::size_t>(std::ceil(T / out.step));
    const double h = T / static_cast<double>(n_panels);
    out.panels = n_panels;
    if (coef.empty()) return out;
    const auto rule = gauss_legendre(6);
    const std::size_t nodes = rule.nodes.size();
    constexpr std::size_t kChunk = 4096;
    const std::size_t n_chunks = (n_panels + kChunk - 1) / kChunk;
    std::vector<double> partial(n_chunks, 0.0);
    parallel_for(n_chunks, [&](std::size_t c) {
        const std::size_t first = c * kChunk, last = std::min(n_panels, first + kChunk);
        // phase[q][m] = p_q^{-i t} at node m of the current panel, advanced by p^{-i h}
        std::vector<cdouble> phase(coef.size() * nodes), step(coef.size());
        const double t0 = T + static_cast<double>(first) * h;
        for (std::size_t q = 0; q < coef.size(); ++q) {
            step[q] = std::polar(1.0, -h * logs[q]);
            for (std::size_t m = 0; m < nodes; ++m) {
                const double t = t0 + 0.5 * h * (1.0 + rule.nodes[m]);
                phase[q * nodes + m] = coef[q] * std::polar(1.0, -t * logs[q]);
            }
        }
        std::vector<double> acc;
        acc.reserve(last - first);
        for (std::size_t panel = first; panel < last; ++panel) {
            double v = 0.0;
            for (std::size_t m = 0; m < nodes; ++m) {
                cdouble s = 0.0;
                for (std::size_t q = 0; q < coef.size(); ++q) s += phase[q * nodes + m];
                v += rule.weights[m] * std::pow(std::norm(s), k);
            }
            acc.push_back(0.5 * h * v);
            for (std::size_t q = 0; q < coef.size(); ++q)
                for (std::size_t m = 0; m < nodes; ++m) phase[q * nodes + m] *= step[q];
        }
        partial[c] = pairwise_sum(acc);
    });
    out.lhs = pairwise_sum(partial);
    out.ratio = out.rhs > 0.0 ? out.lhs / out.rhs : 0.0;
    return out;
}

/// Measure bound K e^K (Phi / log X) exp(-lambda K log T / log X) for the
/// complement of E_K(X, T), relative to T.
inline double exceptional_measure_bound(double T, double X, double K, double lambda, double phi_at_T) {
    const double lX = std::log(X);
    return K * std::exp(K) * phi_at_T / lX * std::exp(-lambda * K * std::log(T) / lX);
}

}  // namespace zml
