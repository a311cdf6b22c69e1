#include <catch_amalgamated.hpp>

#include <atomic>
#include <cmath>
#include <numbers>

#include "test_support.hpp"
#include "zml/parallel.hpp"
#include "zml/zeta_engine.hpp"

using namespace zml;
using Catch::Matchers::WithinAbs;

TEST_CASE("theta vanishes at the first Gram point", "[zeta_engine][theta]") {
    CHECK(std::abs(rs_theta(17.8455995405)) < 1e-6);
}

TEST_CASE("theta makes e^{i theta} zeta real on the critical line", "[zeta_engine][theta]") {
    for (double t : {100.0, 250.5, 1000.0}) {
        const cdouble z = zeta_oracle({0.5, t}, 14);
        const cdouble rotated = z * std::polar(1.0, rs_theta(t));
        CHECK(std::abs(rotated.imag()) / std::abs(z) < 1e-9);
    }
}

TEST_CASE("theta below the validity floor is a domain error", "[zeta_engine][theta]") {
    CHECK_THROWS_AS(rs_theta(9.0), DomainError);
    CHECK_THROWS_AS(rs_theta_prime(9.0), DomainError);
    CHECK_THROWS_AS(hardy_z(9.0), DomainError);
}

TEST_CASE("theta derivative matches a central difference", "[zeta_engine][theta]") {
    for (double t : {20.0, 300.0, 5000.0}) {
        const double h = 1e-4;
        CHECK_THAT(rs_theta_prime(t), WithinAbs((rs_theta(t + h) - rs_theta(t - h)) / (2 * h), 1e-7));
    }
}

TEST_CASE("Z is small at the first zero", "[zeta_engine][hardy_z]") {
    CHECK(std::abs(hardy_z(14.1347251)) < 1e-4);
}

TEST_CASE("Z matches the oracle modulus at t = 20", "[zeta_engine][hardy_z]") {
    CHECK_THAT(std::abs(hardy_z(20.0)), WithinAbs(std::abs(zeta_oracle({0.5, 20.0}, 12)), 1e-6));
}

TEST_CASE("correction orders 2 and 4 agree at 1e6", "[zeta_engine][hardy_z]") {
    const double t = 1e6 + 0.5;
    CHECK(std::abs(hardy_z(t, 4) - hardy_z(t, 2)) < 1e-6);
    CHECK_THROWS_AS(hardy_z(t, 5), DomainError);
}

TEST_CASE("oracle reproduces classical values", "[zeta_engine][oracle]") {
    CHECK_THAT(zeta_oracle({2.0, 0.0}, 15).real(), WithinAbs(std::numbers::pi * std::numbers::pi / 6.0, 1e-12));
    CHECK_THAT(zeta_oracle({0.5, 0.0}, 12).real(), WithinAbs(-1.4603545088095868, 1e-7));
    CHECK(std::abs(zeta_oracle({0.5, 14.1347251}, 12)) < 1e-5);
}

TEST_CASE("oracle rejects the pole and excessive precision", "[zeta_engine][oracle]") {
    CHECK_THROWS_AS(zeta_oracle({1.0, 0.0}, 10), PoleError);
    CHECK_THROWS_AS(zeta_oracle({2.0, 0.0}, 31), PrecisionError);
}

TEST_CASE("critical point invariants", "[zeta_engine][critical]") {
    for (double t : {30.0, 150.0, 777.7}) {
        const auto cp = zeta_critical(t);
        CHECK_THAT(std::abs(cp.zeta_value), WithinAbs(std::abs(cp.z_value), 1e-12));
        const cdouble expect = cp.z_value * std::polar(1.0, -cp.theta_value);
        CHECK(std::abs(cp.zeta_value - expect) < 1e-12);
    }
}

TEST_CASE("log zeta between the first two zeros", "[zeta_engine][log_zeta]") {
    const auto& table = zml_test::scanned_table();
    const double mid = 0.5 * (table.entries[0].gamma + table.entries[1].gamma);
    const auto v = log_zeta_critical(mid, table);
    CHECK(std::isfinite(v.re_log));
    CHECK(std::abs(v.s_of_t) < 2.0);
    CHECK(v.im_log == std::numbers::pi * v.s_of_t);
}

TEST_CASE("log zeta at a zero ordinate is a proximity error", "[zeta_engine][log_zeta]") {
    const auto& table = zml_test::scanned_table();
    CHECK_THROWS_AS(log_zeta_critical(table.entries[0].gamma, table), ProximityError);
}

TEST_CASE("S(t) at 1000.25 comes from the table count", "[zeta_engine][log_zeta]") {
    const auto& table = zml_test::scanned_table();
    const double t = 1000.25;
    const auto v = log_zeta_critical(t, table);
    const double expect = static_cast<double>(table.count_up_to(t)) - rs_theta(t) / std::numbers::pi - 1.0;
    CHECK(v.s_of_t == expect);
    CHECK(v.im_log == std::numbers::pi * v.s_of_t);
    CHECK(table.count_up_to(t) == 649);
}

TEST_CASE("log zeta needs table coverage", "[zeta_engine][log_zeta]") {
    const auto small = scan_zeros(10.0, 100.0, 8.0).table;
    CHECK_THROWS_AS(log_zeta_critical(500.0, small), CoverageError);
}

TEST_CASE("fast path agrees with the oracle at 1000 random heights", "[zeta_engine][property]") {
    zml_test::Draw draw(20240611);
    std::vector<double> ts(1000);
    for (auto& t : ts) t = draw.uniform(20.0, 2000.0);
    std::vector<double> err(ts.size());
    parallel_for(ts.size(), [&](std::size_t i) {
        err[i] = std::abs(std::abs(zeta_critical(ts[i]).zeta_value) - std::abs(zeta_oracle({0.5, ts[i]}, 8)));
    });
    CHECK(*std::max_element(err.begin(), err.end()) < 1e-6);
}

TEST_CASE("S(t) has near-zero mean on [100, 1000]", "[zeta_engine][property]") {
    const auto& table = zml_test::scanned_table();
    double sum = 0.0;
    int n = 0;
    for (int i = 0; i < 9000; ++i) {
        const double t = 100.0 + (i + 0.5) * 0.1;
        try {
            sum += log_zeta_critical(t, table).s_of_t;
            ++n;
        } catch (const ProximityError&) {
        }
    }
    REQUIRE(n > 8900);
    CHECK(std::abs(sum / n) < 0.05);
}

TEST_CASE("S(t) jumps by the multiplicity and otherwise falls like -theta/pi", "[zeta_engine][property]") {
    const auto& base = zml_test::scanned_table();
    const double g = 0.5 * (base.entries[99].gamma + base.entries[100].gamma);
    const auto table = inject_synthetic(base, {{0.5, g, 2, ZeroOrigin::synthetic}});
    const double eps = 1e-3;
    const double before = log_zeta_critical(g - eps, table).s_of_t;
    const double after = log_zeta_critical(g + eps, table).s_of_t;
    const double drift = -(rs_theta(g + eps) - rs_theta(g - eps)) / std::numbers::pi;
    CHECK_THAT(after - before, WithinAbs(2.0 + drift, 1e-9));

    zml_test::Draw draw(7);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t k = 1 + draw.below(600);
        const double lo = base.entries[k].gamma, hi = base.entries[k + 1].gamma, w = hi - lo;
        const double a = lo + w * draw.uniform(0.05, 0.45), b = lo + w * draw.uniform(0.55, 0.95);
        const double ds = log_zeta_critical(b, base).s_of_t - log_zeta_critical(a, base).s_of_t;
        CHECK_THAT(ds, WithinAbs(-(rs_theta(b) - rs_theta(a)) / std::numbers::pi, 1e-9));
    }
}
