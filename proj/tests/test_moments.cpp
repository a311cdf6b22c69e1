#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "test_support.hpp"
#include "zml/moments.hpp"

using namespace zml;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

constexpr double kPi = std::numbers::pi;

namespace {

const ZeroTable& wide_table() {
    static const ZeroTable t = scan_zeros(10.0, 8200.0, 8.0).table;
    return t;
}

}  // namespace

TEST_CASE("M at k = 0 is T for every theta", "[moments][estimate]") {
    for (double th : {0.0, 0.7, kPi / 2, -2.0}) {
        const auto m = moment_estimate(0.0, th, 1000.0, zml_test::scanned_table());
        CHECK(m.value == 1000.0);
    }
}

TEST_CASE("second moment at T = 2000", "[moments][estimate]") {
    const auto& table = zml_test::scanned_table();
    const auto m = moment_estimate(1.0, 0.0, 2000.0, table);
    CHECK_THAT(m.value, WithinRel(second_moment_asymptotic(2000.0), 0.05));
    CHECK(m.n_panels > 1000);
    PanelSpec finer;
    finer.min_depth = 1;
    const auto m2 = moment_estimate(1.0, 0.0, 2000.0, table, finer);
    CHECK(std::abs(m2.value - m.value) <= std::max(m.error_estimate, 1e-12 * m.value));
}

TEST_CASE("fitted log exponent of the second moment", "[moments][estimate]") {
    std::vector<double> Ts{500.0, 1000.0, 2000.0, 4000.0}, Ms;
    for (double T : Ts) Ms.push_back(moment_estimate(1.0, 0.0, T, wide_table()).value);
    const double slope = fit_log_exponent(Ts, Ms);
    CHECK(slope > 0.7);
    CHECK(slope < 1.3);
    CHECK_THROWS_AS(fit_log_exponent({1000.0}, {1.0}), DomainError);
}

TEST_CASE("moment estimate argument checks", "[moments][estimate]") {
    const auto& table = zml_test::scanned_table();
    CHECK_THROWS_AS(moment_estimate(-0.5, 0.0, 1000.0, table), DomainError);
    CHECK_THROWS_AS(moment_estimate(1.0, 0.0, 3000.0, table), CoverageError);
    CHECK_THROWS_AS(moment_estimate(200.0, kPi / 2, 1000.0, table), OverflowGuardError);
}

TEST_CASE("Jensen lower bound", "[moments][property]") {
    const auto& table = zml_test::scanned_table();
    const double T = 1000.0;
    const auto ts = tail_samples(T, 20000, table);
    for (double th : {0.0, kPi / 4, kPi / 2}) {
        const auto v = rotated_log_zeta_samples(th, ts, table);
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        for (double k : {0.25, 0.5, 1.0}) CHECK(moment_estimate(k, th, T, table).value >= T * std::exp(2.0 * k * mean));
    }
}

TEST_CASE("M grows with k on the critical line", "[moments][property]") {
    const auto& table = zml_test::scanned_table();
    double prev = 0.0;
    for (double k : {0.0, 0.5, 1.0, 1.5}) {
        const double v = moment_estimate(k, 0.0, 1000.0, table).value;
        CHECK(v > 0.0);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("tail survival basics", "[moments][tail]") {
    const auto& table = zml_test::scanned_table();
    const auto c = tail_survival(0.0, 1000.0, {-50.0, 0.0, 1.0, 1.5, 2.0, 3.0}, 10000, table);
    REQUIRE(c.points.size() == 6);
    CHECK(c.points[0].second == 1.0);
    CHECK(c.sample_min > -50.0);
    const double at1 = c.points[2].second;
    CHECK(at1 > 0.0);
    CHECK(at1 < 1.0);
    for (std::size_t i = 1; i < c.points.size(); ++i) {
        CHECK(c.points[i].second <= c.points[i - 1].second);
        CHECK(c.points[i].second >= 0.0);
    }
    CHECK_THROWS_AS(tail_survival(0.0, 1000.0, {1.0}, 9999, table), DomainError);
    CHECK_THROWS_AS(tail_survival(0.0, 3000.0, {1.0}, 10000, table), CoverageError);
}

TEST_CASE("tail curves for theta and -theta agree", "[moments][tail]") {
    const auto& table = zml_test::scanned_table();
    const std::vector<double> grid{-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0};
    const std::size_t n = 20000;
    for (double th : {kPi / 4, kPi / 2}) {
        const auto plus = tail_survival(th, 1000.0, grid, n, table);
        const auto minus = tail_survival(-th, 1000.0, grid, n, table);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double p = 0.5 * (plus.points[i].second + minus.points[i].second);
            const double se = std::sqrt(2.0 * p * (1.0 - p) / static_cast<double>(n));
            CHECK(std::abs(plus.points[i].second - minus.points[i].second) <= 4.0 * se + 1e-12);
        }
    }
}

TEST_CASE("tail bound shape decays in V", "[moments][tail]") {
    double prev = 1e300;
    for (double V = 2.0; V <= 20.0; V += 1.0) {
        const auto s = tail_bound_shape(V, 1e6, 10.0, 0.0, 4.0 / 3.0, std::pow(std::log(1e6), 5));
        CHECK(s.total == s.gaussian + s.vlogv + s.zero_density);
        CHECK(s.gaussian <= 1.0);
        CHECK(s.total <= prev);
        prev = s.total;
    }
}

TEST_CASE("theorem bound at k = 0", "[moments][bound]") {
    const double T = 1e6, lT = std::log(T), phi = std::pow(lT, 5);
    const auto b = theorem_bound_eval(0.0, 0.0, 4.0 / 3.0, PhiSpec{}, T, 0.01);
    CHECK_THAT(b.term_main, WithinRel(std::numbers::e * T, 1e-14));
    CHECK_THAT(b.term_zero, WithinRel(T * phi / lT, 1e-14));
    CHECK_THAT(b.term_density, WithinRel(T * std::pow(phi / lT, 0.01 / (b.A * 4.0 / 3.0)), 1e-12));
    CHECK(std::isfinite(b.total));
    CHECK(b.total > 0.0);
    CHECK_FALSE(b.corollary_envelope.has_value());
}

TEST_CASE("theorem bound near the corollary threshold", "[moments][bound]") {
    CHECK_THAT(kCorollaryC0, WithinAbs(2.0 / (3.0 * kPi), 1e-10));
    const auto b = theorem_bound_eval(kCorollaryC0 - 0.05, kPi / 2, 4.0 / 3.0, PhiSpec{}, 1e6, 0.01);
    CHECK(std::isfinite(b.total));
    REQUIRE(b.corollary_envelope.has_value());
    CHECK(std::isfinite(*b.corollary_envelope));
    CHECK_THROWS_AS(theorem_bound_eval(kCorollaryC0, kPi / 2, 4.0 / 3.0, PhiSpec{}, 1e6, 0.01), HypothesisError);
    CHECK_THROWS_AS(theorem_bound_eval(0.1, 0.0, 4.0 / 3.0, PhiSpec{}, 1e6, 0.5), DomainError);
}

TEST_CASE("second term of the bound increases in k", "[moments][bound]") {
    for (PhiKind kind : {PhiKind::ingham, PhiKind::selberg}) {
        const PhiSpec phi{kind, {}};
        const double top = optimize_h(0.0).A_star * 4.0 / 3.0 - 0.01;
        double prev = 0.0;
        for (int i = 0; i < 200; ++i) {
            const double k = top * i / 200.0;
            const double v = theorem_bound_eval(k, 0.0, 4.0 / 3.0, phi, 1e6, 0.01).term_density;
            CHECK(v > prev);
            prev = v;
        }
    }
}

TEST_CASE("user Phi", "[moments][bound]") {
    PhiSpec phi{PhiKind::user, [](double T) { return std::sqrt(std::log(T)); }};
    const auto b = theorem_bound_eval(0.1, 0.0, 1.0, phi, 1e4, 0.01);
    CHECK_THAT(b.term_zero, WithinRel(1e4 * std::sqrt(std::log(1e4)) / std::log(1e4), 1e-14));
    CHECK_THROWS_AS(theorem_bound_eval(0.1, 0.0, 1.0, PhiSpec{PhiKind::user, {}}, 1e4, 0.01), DomainError);
}
