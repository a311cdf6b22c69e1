#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "zml/error.hpp"
#include "zml/harper_partition.hpp"
#include "zml/parallel.hpp"
#include "zml/primes.hpp"
#include "zml/quadrature.hpp"

namespace zml {

/// Independent uniform unit-circle variables X(p), one stream per trial.
/// Every value is a pure function of (seed, p, trial).
struct UnitSampler {
    std::uint64_t seed = 0;

    double angle(std::uint64_t p, std::uint64_t trial) const {
        const std::uint64_t key = mix64(seed ^ mix64(p * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL));
        return 2.0 * std::numbers::pi * unit_double(mix64(key + trial));
    }
    cdouble operator()(std::uint64_t p, std::uint64_t trial) const { return std::polar(1.0, angle(p, trial)); }
};

struct MonomialSpec {
    std::vector<std::pair<std::uint64_t, int>> numerator;
    std::vector<std::pair<std::uint64_t, int>> denominator;
};

/// E[prod X(p_i)^{a_i} / prod X(q_j)^{b_j}]: 1 when the two prime-power
/// products coincide, else 0.
inline int expect_monomial(const MonomialSpec& m) {
    std::map<std::uint64_t, long> net;
    for (const auto& [p, a] : m.numerator) net[p] += a;
    for (const auto& [q, b] : m.denominator) net[q] -= b;
    for (const auto& [p, e] : net)
        if (e != 0) return 0;
    return 1;
}

inline constexpr double kExpansionGuard = 1e7;

namespace detail {

inline double binomial(double n, double k) {
    if (k < 0 || k > n) return 0.0;
    return std::exp(std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1));
}

}  // namespace detail

/// E[G^n] for G = sum_p Re(c1 X(p) + c2 X(p)^2) by full multinomial
/// expansion over the 4 monomials per prime, (c1/2)X, (conj c1/2)/X,
/// (c2/2)X^2, (conj c2/2)/X^2, keeping only balanced monomials.
inline double exact_G_moment(int n, const std::vector<WindowPrime>& window) {
    if (n < 0) throw DomainError("exact_G_moment: n must be non-negative");
    if (n == 0) return 1.0;
    const std::size_t atoms = 4 * window.size();
    if (atoms == 0) return 0.0;
    if (detail::binomial(static_cast<double>(n + atoms - 1), n) > kExpansionGuard)
        throw CombinatorialError("exact_G_moment: expansion exceeds 1e7 terms");
    struct Atom {
        cdouble c;
        int power;
    };
    std::vector<Atom> list;
    for (const auto& w : window) {
        list.push_back({0.5 * w.c1, 1});
        list.push_back({0.5 * std::conj(w.c1), -1});
        list.push_back({0.5 * w.c2, 2});
        list.push_back({0.5 * std::conj(w.c2), -2});
    }
    std::vector<double> fact(static_cast<std::size_t>(n) + 1, 1.0);
    for (int i = 1; i <= n; ++i) fact[i] = fact[i - 1] * i;
    cdouble total = 0.0;
    // choose multiplicities atom by atom; a prime's exponent must balance once its 4 atoms are fixed
    auto rec = [&](auto&& self, std::size_t a, int left, int net, cdouble weight) -> void {
        if (a % 4 == 0 && a > 0 && net != 0) return;
        if (a % 4 == 0) net = 0;
        if (a == list.size()) {
            if (left == 0) total += weight;
            return;
        }
        cdouble pw = 1.0;
        for (int m = 0; m <= left; ++m) {
            self(self, a + 1, left - m, net + m * list[a].power, weight * pw / fact[m]);
            pw *= list[a].c;
        }
    };
    rec(rec, 0, n, 0, cdouble(fact[n], 0.0));
    return total.real();
}

// ---------------------------------------------------------------------------
// Monte Carlo

struct McResult {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t trials = 0;
};

namespace detail {

/// Chunked mean / standard error of sample(trial); chunk boundaries are fixed,
/// so the result does not depend on the thread count.
template <class Sample>
McResult mc_run(std::size_t trials, Sample&& sample) {
    if (trials < 1000) throw DomainError("mc_estimate: need at least 1000 trials");
    constexpr std::size_t kChunk = 2048;
    const std::size_t n_chunks = (trials + kChunk - 1) / kChunk;
    std::vector<double> sums(n_chunks), squares(n_chunks);
    parallel_for(n_chunks, [&](std::size_t c) {
        const std::size_t first = c * kChunk, last = std::min(trials, first + kChunk);
        std::vector<double> v, v2;
        v.reserve(last - first);
        v2.reserve(last - first);
        for (std::size_t i = first; i < last; ++i) {
            const double x = sample(static_cast<std::uint64_t>(i));
            v.push_back(x);
            v2.push_back(x * x);
        }
        sums[c] = pairwise_sum(v);
        squares[c] = pairwise_sum(v2);
    });
    const double n = static_cast<double>(trials);
    McResult r;
    r.trials = trials;
    r.mean = pairwise_sum(sums) / n;
    const double var = std::max(0.0, (pairwise_sum(squares) - n * r.mean * r.mean) / (n - 1.0));
    r.std_error = std::sqrt(var / n);
    return r;
}

inline double sample_G(const std::vector<WindowPrime>& w, const UnitSampler& u, std::uint64_t trial) {
    double g = 0.0;
    for (const auto& q : w) {
        const cdouble x = u(static_cast<std::uint64_t>(q.p), trial);
        g += (q.c1 * x + q.c2 * x * x).real();
    }
    return g;
}

}  // namespace detail

/// E[G^n] by sampling.
inline McResult mc_G_moment(int n, const std::vector<WindowPrime>& window, std::size_t trials, std::uint64_t seed) {
    const UnitSampler u{seed};
    return detail::mc_run(trials, [&](std::uint64_t i) { return std::pow(detail::sample_G(window, u, i), n); });
}

/// E[exp(2k sum G)] by sampling, over the union of the given primes.
inline McResult mc_exp_moment(double k, const std::vector<WindowPrime>& primes, std::size_t trials,
                              std::uint64_t seed) {
    const UnitSampler u{seed};
    return detail::mc_run(trials, [&](std::uint64_t i) {
        return k == 0.0 ? 1.0 : std::exp(2.0 * k * detail::sample_G(primes, u, i));
    });
}

/// E|sum a(p) X(p)^l|^{2k} by sampling.
inline McResult mc_abs_moment(const std::map<std::uint64_t, cdouble>& a, int k, int l, std::size_t trials,
                              std::uint64_t seed) {
    const UnitSampler u{seed};
    return detail::mc_run(trials, [&](std::uint64_t i) {
        cdouble s = 0.0;
        for (const auto& [p, c] : a) s += c * std::polar(1.0, l * u.angle(p, i));
        return std::pow(std::norm(s), k);
    });
}

/// Per-prime factor E[exp(2k Re(c1 X + c2 X^2))] by the 256-point trapezoid
/// rule on the circle.
inline double exp_factor_circle(double k, cdouble c1, cdouble c2, int points = 256) {
    std::vector<double> v(static_cast<std::size_t>(points));
    for (int m = 0; m < points; ++m) {
        const cdouble x = std::polar(1.0, 2.0 * std::numbers::pi * m / points);
        v[m] = std::exp(2.0 * k * (c1 * x + c2 * x * x).real());
    }
    return pairwise_sum(v) / points;
}

/// prod_p E[exp(2k a(p, X))], the product form of the exponential moment.
inline double exp_moment_product(double k, const std::vector<WindowPrime>& primes) {
    double log_prod = 0.0;
    for (const auto& q : primes) log_prod += std::log(exp_factor_circle(k, q.c1, q.c2));
    return std::exp(log_prod);
}

// ---------------------------------------------------------------------------
// Moment bound for |sum a(p) X(p)^l|^{2k}

struct MomentBoundCheck {
    double value = 0.0;
    double std_error = 0.0;  // 0 when exact
    double bound = 0.0;      // k! (sum |a|^2)^k
    bool exact = false;
    bool violated = false;   // value > bound + 4 SE
};

inline MomentBoundCheck check_moment_bound(const std::map<std::uint64_t, cdouble>& a, int k, int l,
                                           std::size_t trials = 100000, std::uint64_t seed = 1) {
    if (k < 1) throw DomainError("check_moment_bound: k must be at least 1");
    if (l == 0) throw DomainError("check_moment_bound: l must be nonzero");
    double norm2 = 0.0;
    std::vector<std::uint64_t> primes;
    std::vector<cdouble> coef;
    for (const auto& [p, c] : a) {
        primes.push_back(p);
        coef.push_back(c);
        norm2 += std::norm(c);
    }
    MomentBoundCheck out;
    out.bound = std::tgamma(k + 1.0) * std::pow(norm2, k);
    if (primes.size() <= 6 && k <= 3) {
        out.exact = true;
        // enumerate exponent vectors m, m' with |m| = |m'| = k
        std::vector<std::vector<int>> comps;
        std::vector<int> cur(primes.size(), 0);
        auto gen = [&](auto&& self, std::size_t i, int left) -> void {
            if (i + 1 == primes.size()) {
                cur[i] = left;
                comps.push_back(cur);
                return;
            }
            for (int m = 0; m <= left; ++m) {
                cur[i] = m;
                self(self, i + 1, left - m);
            }
        };
        if (!primes.empty()) gen(gen, 0, k);
        const int al = std::abs(l);
        auto multinom = [&](const std::vector<int>& m) {
            double r = std::tgamma(k + 1.0);
            for (int x : m) r /= std::tgamma(x + 1.0);
            return r;
        };
        cdouble total = 0.0;
        for (const auto& m : comps) {
            for (const auto& mp : comps) {
                MonomialSpec spec;
                for (std::size_t i = 0; i < primes.size(); ++i) {
                    if (m[i]) spec.numerator.push_back({primes[i], al * m[i]});
                    if (mp[i]) spec.denominator.push_back({primes[i], al * mp[i]});
                }
                if (!expect_monomial(spec)) continue;
                cdouble w = multinom(m) * multinom(mp);
                for (std::size_t i = 0; i < primes.size(); ++i)
                    w *= std::pow(coef[i], m[i]) * std::pow(std::conj(coef[i]), mp[i]);
                total += w;
            }
        }
        out.value = total.real();
        out.violated = out.value > out.bound * (1.0 + 1e-12);
    } else {
        const auto mc = mc_abs_moment(a, k, l, trials, seed);
        out.value = mc.mean;
        out.std_error = mc.std_error;
        out.violated = out.value > out.bound + 4.0 * out.std_error;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Time average versus expectation

struct TimeAverageReport {
    std::vector<int> n_list;
    std::vector<std::vector<double>> window_primes;
    double time_average = 0.0;  // (1/T) int_T^{2T} prod G_i^{n_i}
    double expectation = 0.0;   // prod E[G_i^{n_i}]
    double difference = 0.0;
    double budget = 0.0;        // 10 T^{-1/2} prod (sum (8 sqrt p + 1))^{n_i}
    std::vector<std::string> notes;
    bool passed = false;
};

/// Compares the time average of prod_i G_{(i,j)}(t)^{n_i} over [T, 2T] with the
/// product of the exact random-model expectations, with j the number of
/// windows and at most prime_cap primes per window.
inline TimeAverageReport time_average_vs_expectation(const std::vector<int>& n_list, const RegimeParams& regime,
                                                     double T, std::size_t prime_cap = 3) {
    if (n_list.empty()) throw DomainError("time_average: empty exponent list");
    const int j = static_cast<int>(n_list.size());
    check_j(regime, j);
    TimeAverageReport rep;
    rep.n_list = n_list;
    std::vector<std::vector<WindowPrime>> windows;
    double freq = 0.0, scale = 1.0;
    rep.expectation = 1.0;
    for (int i = 1; i <= j; ++i) {
        auto w = window_primes(i, j, regime, prime_cap);
        const int n = n_list[i - 1];
        if (n < 0) throw DomainError("time_average: exponents must be non-negative");
        const double delta_next = regime.delta.at(static_cast<std::size_t>(i));
        if (n > 1.0 / (2.0 * delta_next))
            rep.notes.push_back("n_" + std::to_string(i) + " exceeds the cap 1/(2 delta_" + std::to_string(i) + ")");
        std::vector<double> ps;
        double sw = 0.0;
        for (const auto& q : w) {
            ps.push_back(q.p);
            sw += 8.0 * std::sqrt(q.p) + 1.0;
        }
        if (!w.empty()) freq += 2.0 * n * w.back().log_p;
        scale *= std::pow(sw, n);
        rep.expectation *= exact_G_moment(n, w);
        rep.window_primes.push_back(std::move(ps));
        windows.push_back(std::move(w));
    }
    rep.budget = 10.0 * scale / std::sqrt(T);
    if (freq == 0.0) {
        rep.time_average = rep.expectation;
        rep.passed = true;
        return rep;
    }
    std::vector<WindowPrime> flat;
    std::vector<std::size_t> owner;
    for (std::size_t i = 0; i < windows.size(); ++i)
        for (const auto& q : windows[i]) {
            flat.push_back(q);
            owner.push_back(i);
        }
    const double step = 2.0 * std::numbers::pi / (8.0 * freq);
    const auto n_panels = static_cast<std::size_t>(std::ceil(T / step));
    const double h = T / static_cast<double>(n_panels);
    const auto rule = gauss_legendre(6);
    const std::size_t nodes = rule.nodes.size();
    constexpr std::size_t kChunk = 8192;
    const std::size_t n_chunks = (n_panels + kChunk - 1) / kChunk;
    std::vector<double> partial(n_chunks);
    parallel_for(n_chunks, [&](std::size_t c) {
        const std::size_t first = c * kChunk, last = std::min(n_panels, first + kChunk);
        // phase[q][m] = p_q^{-i t} at node m of the current panel, advanced by p^{-i h}
        std::vector<cdouble> phase(flat.size() * nodes), advance(flat.size());
        const double t0 = T + static_cast<double>(first) * h;
        for (std::size_t q = 0; q < flat.size(); ++q) {
            advance[q] = std::polar(1.0, -h * flat[q].log_p);
            for (std::size_t m = 0; m < nodes; ++m)
                phase[q * nodes + m] = std::polar(1.0, -(t0 + 0.5 * h * (1.0 + rule.nodes[m])) * flat[q].log_p);
        }
        std::vector<double> acc, g(windows.size());
        acc.reserve(last - first);
        for (std::size_t panel = first; panel < last; ++panel) {
            double v = 0.0;
            for (std::size_t m = 0; m < nodes; ++m) {
                std::fill(g.begin(), g.end(), 0.0);
                for (std::size_t q = 0; q < flat.size(); ++q) {
                    const cdouble e = phase[q * nodes + m];
                    g[owner[q]] += (flat[q].c1 * e + flat[q].c2 * e * e).real();
                }
                double f = 1.0;
                for (std::size_t i = 0; i < g.size(); ++i)
                    for (int r = 0; r < n_list[i]; ++r) f *= g[i];
                v += rule.weights[m] * f;
            }
            acc.push_back(0.5 * h * v);
            for (std::size_t q = 0; q < flat.size(); ++q)
                for (std::size_t m = 0; m < nodes; ++m) phase[q * nodes + m] *= advance[q];
        }
        partial[c] = pairwise_sum(acc);
    });
    rep.time_average = pairwise_sum(partial) / T;
    rep.difference = std::abs(rep.time_average - rep.expectation);
    rep.passed = rep.difference < rep.budget;
    return rep;
}

// ---------------------------------------------------------------------------
// Exponential-moment shape

struct ExpMomentShape {
    double k = 0.0;
    double log_X = 0.0;
    double log_product = 0.0;     // log prod_{p <= X} E[exp(2k a(p))] (exact part + smooth tail)
    double exact_cutoff = 0.0;    // primes up to here are multiplied exactly
    double normalized = 0.0;      // product / (log X)^{k^2}
    double reference = 0.0;       // e^{-k^2 log log kappa}
    double ratio_to_reference = 0.0;
};

/// Product-form exponential moment at the top level of a regime, exact over
/// primes up to `exact_cutoff` and by the second-cumulant prime-number-theorem
/// integral beyond; compared with the e^{-k^2 log log kappa} (log X)^{k^2}
/// shape. Report only.
inline ExpMomentShape exp_moment_shape(double k, const RegimeParams& regime, double exact_cutoff = 1e6) {
    const int I = regime.I_index;
    ExpMomentShape s;
    s.k = k;
    s.log_X = regime.log_X(I);
    s.exact_cutoff = std::min(exact_cutoff, std::exp(s.log_X));
    double lp = 0.0;
    for (auto pi : sieve_primes(std::max(2.0, s.exact_cutoff))) {
        const double p = static_cast<double>(pi);
        const auto c = coeffs_phi_psi(p, I, regime);
        lp += std::log(exp_factor_circle(k, c.phi / std::sqrt(p), c.psi / (2.0 * p)));
    }
    if (s.log_X > std::log(s.exact_cutoff)) {
        auto f = [&](double v) {
            const auto c = coeffs_phi_psi(std::exp(v), I, regime);
            return k * k * (std::norm(c.phi) + std::norm(c.psi) * std::exp(-v) / 4.0) / v;
        };
        lp += integrate(f, std::log(s.exact_cutoff), s.log_X, 1e-10).value;
    }
    s.log_product = lp;
    s.normalized = std::exp(lp - k * k * std::log(s.log_X));
    s.reference = std::exp(-k * k * std::log(std::log(regime.kappa)));
    s.ratio_to_reference = s.normalized / s.reference;
    return s;
}

}  // namespace zml
