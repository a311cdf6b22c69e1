#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "test_support.hpp"
#include "zml/approx_formula.hpp"

using namespace zml;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double u_integral_from(double lo) {
    std::vector<double> breaks{lo};
    for (double b : {kKernelLo, kKernelMid, std::numbers::e})
        if (b > lo) breaks.push_back(b);
    if (breaks.size() < 2) return 0.0;
    return integrate_pieces(kernel_u, breaks, 1e-14).value;
}

ZeroTable finite_set(std::vector<ZeroEntry> zeros) {
    ZeroTable t;
    for (auto& z : zeros) z.origin = ZeroOrigin::synthetic;
    t.entries = std::move(zeros);
    t.reindex();
    return t;
}

}  // namespace

TEST_CASE("sieve", "[approx][primes]") {
    CHECK(sieve_primes(10.0) == PrimeList{2, 3, 5, 7});
    const auto p = sieve_primes(1e6);
    // independent trial-division-free simple sieve
    std::vector<bool> composite(1000001, false);
    std::size_t count = 0;
    for (std::size_t i = 2; i <= 1000000; ++i) {
        if (composite[i]) continue;
        ++count;
        for (std::size_t j = i * i; j <= 1000000; j += i) composite[j] = true;
    }
    CHECK(p.size() == count);
    CHECK(p.size() == 78498);
    double recip = 0.0;
    for (auto q : p) recip += 1.0 / static_cast<double>(q);
    CHECK_THAT(recip - std::log(std::log(1e6)), WithinAbs(0.2615, 1e-3));
    CHECK_THROWS_AS(sieve_primes(1.0), DomainError);
    CHECK_THROWS_AS(sieve_primes(2e9), CapacityError);
}

TEST_CASE("kernel integrates to one", "[approx][kernel]") {
    CHECK_THAT(u_integral_from(1.0), WithinAbs(1.0, 1e-10));
    CHECK(kernel_u(1.0) == 0.0);
    CHECK(kernel_u(3.0) == 0.0);
    CHECK_THAT(kernel_u(kKernelMid), WithinAbs(3.0 / kKernelMid, 1e-14));
}

TEST_CASE("kernel transform closed form", "[approx][kernel]") {
    CHECK(std::abs(kernel_u_tilde(0.0) - cdouble(1.0)) < 1e-15);
    zml_test::Draw draw(21);
    std::vector<cdouble> zs{{2.0, 3.0}};
    while (zs.size() < 20) zs.push_back({draw.uniform(-3.0, 6.0), draw.uniform(-15.0, 15.0)});
    for (const cdouble z : zs) {
        const std::vector<double> breaks{kKernelLo, kKernelMid, std::numbers::e};
        const double re = integrate_pieces([&](double x) { return kernel_u(x) * std::pow(cdouble(x), -z).real(); }, breaks, 1e-14).value;
        const double im = integrate_pieces([&](double x) { return kernel_u(x) * std::pow(cdouble(x), -z).imag(); }, breaks, 1e-14).value;
        CHECK(std::abs(kernel_u_tilde(z) - cdouble(re, im)) < 1e-8);
        const cdouble printed = 9.0 * std::pow(std::exp(-z / 6.0) - std::exp(-z / 2.0), 2) / (z * z);
        CHECK(std::abs(kernel_u_tilde(z) - printed) < 1e-12 * std::max(1.0, std::abs(printed)));
    }
}

TEST_CASE("weight branches", "[approx][weight]") {
    const double X = 1e6;
    CHECK(weight_w(1.0, X) == 1.0);
    CHECK(weight_w(std::pow(X, 0.3), X) == 1.0);
    CHECK(weight_w(X, X) == 0.0);
    CHECK(weight_w(X * 10, X) == 0.0);
    CHECK_THAT(weight_w(std::sqrt(X), X), WithinAbs(0.875, 1e-12));
    CHECK_THAT(weight_w(2.0, 3.0), WithinAbs(0.60146366797654227, 1e-12));
    CHECK_THROWS_AS(weight_w(2.0, 2.0), DomainError);
    CHECK_THROWS_AS(weight_w(0.5, 10.0), DomainError);
}

TEST_CASE("weight matches the kernel integral at 1000 random points", "[approx][weight][property]") {
    zml_test::Draw draw(22);
    for (int i = 0; i < 1000; ++i) {
        const double X = std::exp(draw.uniform(std::log(3.0), std::log(1e12)));
        const double y = std::exp(draw.uniform(0.0, 1.2 * std::log(X)));
        CHECK_THAT(weight_w(y, X), WithinAbs(u_integral_from(std::pow(y, 1.0 / std::log(X))), 1e-10));
    }
}

TEST_CASE("weight is continuous and non-increasing", "[approx][weight][property]") {
    const double X = 1e8;
    double prev = weight_w(1.0, X);
    for (int i = 1; i <= 20000; ++i) {
        const double y = std::exp(1.1 * std::log(X) * i / 20000.0);
        const double w = weight_w(y, X);
        CHECK(w <= prev + 1e-15);
        CHECK(prev - w < 1e-3);
        prev = w;
    }
}

TEST_CASE("printed middle branch discrepancy report", "[approx][weight]") {
    const auto rep = weight_discrepancy_report(21, 1e6);
    CHECK(rep.rows.size() == 21);
    CHECK_THAT(rep.printed_jump_at_third, WithinAbs(2.75, 1e-9));
    CHECK_THAT(weight_w_printed(std::cbrt(1e6) * (1 + 1e-12), 1e6), WithinAbs(3.75, 1e-6));
    CHECK(rep.max_abs_difference > 1.0);
    // at a = 2/3 the printed branch gives 9/8 against 1/2
    CHECK_THAT(std::abs(rep.rows.back().difference), WithinAbs(0.625, 1e-9));
}

TEST_CASE("sigma floor for an empty table", "[approx][sigma]") {
    const ZeroTable empty;
    const ApproxParams p{0.0, 50.0, 0.5, std::exp(100.0)};
    const auto s = sigma_select(1e6, p, empty);
    CHECK_THAT(s.sigma, WithinAbs(1.5, 1e-14));
    CHECK_FALSE(s.attained_by.has_value());
}

TEST_CASE("an off-line zero at t lifts sigma", "[approx][sigma]") {
    const double t = 1e6;
    const auto table = finite_set({{0.6, t, 1}});
    const ApproxParams p{0.0, 1.0, 0.5, std::exp(100.0)};
    const auto s = sigma_select(t, p, table);
    CHECK_THAT(s.sigma, WithinAbs(0.7, 1e-14));
    REQUIRE(s.attained_by.has_value());
    CHECK(s.attained_by->beta == 0.6);
    CHECK_THAT(s.floor, WithinAbs(0.52, 1e-14));
}

TEST_CASE("real zeros leave sigma at the floor", "[approx][sigma]") {
    const auto& table = zml_test::scanned_table();
    const auto p = make_params(0.0, 50.0, 1e4);
    zml_test::Draw draw(23);
    for (int i = 0; i < 50; ++i) {
        const double t = draw.uniform(200.0, 3000.0);
        const auto s = sigma_select(t, p, table);
        CHECK(s.sigma == s.floor);
    }
    const auto far = make_params(0.0, 50.0, 1e10);
    CHECK_THROWS_AS(sigma_select(1000.0, far, table), CoverageError);
}

TEST_CASE("sigma never decreases when zeros are added", "[approx][sigma][property]") {
    zml_test::Draw draw(24);
    const ApproxParams p{0.3, 2.0, 0.6, 1e4};
    const double t = 5000.0;
    ZeroTable table;
    double prev = sigma_select(t, p, table).sigma;
    for (int i = 0; i < 200; ++i) {
        auto zeros = table.entries;
        zeros.push_back({draw.uniform(0.5, 0.99), t + draw.uniform(-30.0, 30.0), 1});
        std::sort(zeros.begin(), zeros.end(), [](auto& a, auto& b) { return a.gamma < b.gamma; });
        table = finite_set(zeros);
        const auto s = sigma_select(t, p, table);
        CHECK(s.sigma >= prev);
        CHECK(s.sigma >= s.floor);
        prev = s.sigma;
    }
}

TEST_CASE("Dirichlet polynomial with X = 3", "[approx][dirichlet]") {
    const ZeroTable empty;
    const ApproxParams p{0.0, 1.0, 0.7, 3.0};
    const double t = 100.0, sigma = 0.5 + (1.0 / std::log(3.0)) / 0.7;
    cdouble expect = 0.0;
    for (double q : {2.0, 3.0}) {
        const cdouble s(sigma, t);
        const cdouble ps = std::pow(cdouble(q), -s);
        expect += weight_w(q, 3.0) * ps * (1.0 + (sigma - 0.5) * std::log(q)) + 0.5 * std::pow(cdouble(q), -2.0 * s);
    }
    CHECK(std::abs(dirichlet_P(t, p, empty) - expect) < 1e-12);
    CHECK_THAT(weight_w(2.0, 3.0), WithinAbs(0.6015, 1e-4));
    CHECK(weight_w(3.0, 3.0) == 0.0);
}

TEST_CASE("P depends on theta only through h", "[approx][dirichlet]") {
    const auto& table = zml_test::scanned_table();
    const ApproxParams a{0.0, 5.0, 0.6, 1e4}, b{1.2, 5.0, 0.6, 1e4};
    CHECK(dirichlet_P(777.7, a, table) == dirichlet_P(777.7, b, table));
}

TEST_CASE("zero term Y", "[approx][Y]") {
    const ZeroTable empty;
    const ApproxParams p{0.0, 50.0, 0.7, 1e6};
    CHECK(zero_term_Y(1000.0, p, empty).value == 0.0);

    const double t = 1000.0;
    const auto one = finite_set({{0.5, t + 1.0, 1}});
    const double d = (50.0 / std::log(1e6)) / 0.7;
    const auto y = zero_term_Y(t, p, one);
    CHECK_THAT(y.value, WithinAbs(0.5 * std::log(1.0 + d * d), 1e-5));
    const double with_conjugate = 0.5 * std::log1p(d * d) + 0.5 * std::log1p(d * d / ((2 * t + 1) * (2 * t + 1)));
    CHECK_THAT(y.value, WithinAbs(with_conjugate, 1e-14));
}

TEST_CASE("strict Y truncation needs a wide table", "[approx][Y]") {
    const auto& table = zml_test::scanned_table();
    const auto p = make_params(0.0, 50.0, 1e6);
    CHECK_THROWS_AS(zero_term_Y(1000.5, p, table, 1e-9), CoverageError);
    const auto loose = zero_term_Y(1000.5, p, table, 1e-2);
    CHECK(loose.tail_bound < 1e-2);
    CHECK(loose.value >= 0.0);
}

TEST_CASE("Y is non-negative on real and synthetic tables", "[approx][Y][property]") {
    const auto& base = zml_test::scanned_table();
    zml_test::Draw draw(25);
    std::vector<ZeroEntry> syn;
    for (int i = 0; i < 30; ++i) {
        const double b = draw.uniform(0.5, 0.95), g = draw.uniform(300.0, 1000.0);
        syn.push_back({b, g, 1});
        syn.push_back({1.0 - b, g, 1});
    }
    const auto mixed = inject_synthetic(base, syn);
    for (int i = 0; i < 200; ++i) {
        const double t = draw.uniform(300.0, 1000.0);
        const auto p = make_params(draw.uniform(0.0, 1.6), draw.uniform(1.0, 60.0), std::pow(t, draw.uniform(0.5, 2.0)));
        if (std::abs(t - base.entries[base.count_up_to(t)].gamma) < 1e-6) continue;
        CHECK(zero_term_Y_windowed(t, p, base).value >= 0.0);
        CHECK(zero_term_Y_windowed(t, p, mixed).value >= 0.0);
    }
}

TEST_CASE("residual rows", "[approx][residual]") {
    const auto& table = zml_test::scanned_table();
    std::vector<double> ts;
    zml_test::Draw draw(26);
    for (int i = 0; i < 20; ++i) ts.push_back(draw.uniform(100.0, 1000.0));
    for (double theta : {0.0, std::numbers::pi / 2}) {
        const double h = optimize_h(theta).h_star;
        const auto rep = residual_report(ts, [&](double t) { return ApproxParams{theta, 50.0, h, t * t}; }, table);
        REQUIRE(rep.rows.size() == ts.size());
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const auto& r = rep.rows[i];
            CHECK(r.t == ts[i]);
            CHECK(r.Y_value >= 0.0);
            CHECK(r.rhs_factor > 0.0);
            CHECK_THAT(r.min_C1, WithinRel((r.lhs / r.rhs_factor - r.core_term) / std::log(r.X), 1e-12));
        }
        CHECK(rep.min_Y >= 0.0);
        CHECK(rep.max_min_C1 < 100.0);
    }
}

TEST_CASE("residual preconditions", "[approx][residual]") {
    const auto& table = zml_test::scanned_table();
    const auto primes = sieve_primes(100.0);
    CHECK_THROWS_AS(residual_at(2.0, make_params(0.0, 50.0, 3.0), table, primes), PreconditionError);
    ApproxParams p = make_params(0.0, 50.0, 3.0);
    p.X = std::pow(10.0, 6.0) * 2.0;
    CHECK_THROWS_AS(residual_at(10.0, p, table, primes), PreconditionError);
}

TEST_CASE("explicit formula at 2 + 10i and at 2", "[approx][explicit]") {
    const auto& table = zml_test::scanned_table();
    for (cdouble s : {cdouble(2.0, 10.0), cdouble(2.0, 0.0)}) {
        const auto r = explicit_formula_check(s, 1e4, 650, table);
        CHECK(r.zeros_used == 650);
        CHECK(r.residual < r.budget);
        CHECK(r.passed);
        CHECK(r.oracle_residual < 1e-8);
        CHECK(std::abs(r.lhs - (r.prime_term + r.zero_term + r.trivial_term + r.pole_term)) == Catch::Approx(r.residual).margin(1e-15));
    }
    CHECK_THROWS_AS(explicit_formula_check({1.2, 0.0}, 1e4, 650, table), DomainError);
}

TEST_CASE("prime term tends to the full series as X grows", "[approx][explicit]") {
    const auto& table = zml_test::scanned_table();
    const cdouble s(3.0, 5.0);
    double prev = std::numeric_limits<double>::infinity();
    for (double X : {1e2, 1e3, 1e4, 1e5}) {
        const auto r = explicit_formula_check(s, X, 100, table, 200000);
        const double gap = std::abs(r.lhs - r.prime_term);
        CHECK(gap < prev);
        prev = gap;
    }
    CHECK(prev < 1e-4);
}

TEST_CASE("zero and prime sides balance", "[approx][balance]") {
    const auto& table = zml_test::scanned_table();
    const auto b500 = zero_prime_balance(500.0, make_params(0.0, 50.0, 500.0 * 500.0), table);
    const auto b1000 = zero_prime_balance(1000.0, make_params(0.0, 50.0, 1000.0 * 1000.0), table);
    CHECK(b500.zero_side > 0.0);
    CHECK(b500.ratio > 0.3);
    CHECK(b500.ratio < 3.0);
    CHECK(b1000.zero_side > b500.zero_side);
    const ZeroTable empty;
    const auto e = zero_prime_balance(500.0, make_params(0.0, 50.0, 500.0 * 500.0), empty);
    CHECK(e.zero_side == 0.0);
    CHECK(e.n_terms == 0);
}

TEST_CASE("zero-sum inequality with symmetric pairs", "[approx][zero_sum][property]") {
    zml_test::Draw draw(27);
    for (int trial = 0; trial < 1000; ++trial) {
        const double h = draw.uniform(0.05, 0.95), sigma = 0.5 + draw.uniform(0.001, 2.0), t = draw.uniform(10.0, 1e5);
        std::vector<ZeroEntry> zeros;
        const int pairs = 1 + static_cast<int>(draw.below(8));
        for (int i = 0; i < pairs; ++i) {
            const double dev = draw.uniform(0.0, h * (sigma - 0.5));
            const double g = t + draw.uniform(-5.0, 5.0);
            zeros.push_back({0.5 + dev, g, 1});
            zeros.push_back({0.5 - dev, g, 1});
        }
        const auto r = zero_sum_inequality(t, sigma, h, zeros);
        CHECK(r.holds);
    }
}

TEST_CASE("h ratio is at most 25/3 on [2/5, 3/4]", "[approx][zero_sum]") {
    for (int i = 0; i <= 3500; ++i) {
        const double h = 0.4 + 0.35 * i / 3500.0;
        CHECK(h_ratio(h) <= 25.0 / 3.0 + 1e-12);
    }
    CHECK_THAT(h_ratio(0.75), WithinAbs(25.0 / 3.0, 1e-12));
}
