#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "test_support.hpp"
#include "zml/zero_table.hpp"

using namespace zml;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / ("zml_test_" + name);
    std::ofstream(path, std::ios::binary) << content;
    return path;
}

}  // namespace

TEST_CASE("scan of [10, 100] finds 29 zeros", "[zero_table][scan]") {
    const auto r = scan_zeros(10.0, 100.0, 8.0);
    CHECK(r.table.size() == 29);
    CHECK(r.audit.passed);
    CHECK_THAT(r.table.entries.front().gamma, WithinAbs(14.134725, 1e-6));
    for (const auto& e : r.table.entries) {
        CHECK(e.beta == 0.5);
        CHECK(e.origin == ZeroOrigin::computed);
    }
}

TEST_CASE("scan of [10, 1000] finds 649 zeros", "[zero_table][scan]") {
    const auto r = scan_zeros(10.0, 1000.0, 8.0);
    CHECK(r.table.size() == 649);
    CHECK(r.audit.expected == 649);
    CHECK(r.audit.found == 649);
    CHECK(r.table.covers(0.0, 1000.0));
    CHECK_NOTHROW(validate(r.table));
}

TEST_CASE("a coarse grid either refines to success or reports the interval", "[zero_table][scan]") {
    try {
        const auto r = scan_zeros(10.0, 20.0, 1.0);
        CHECK(r.audit.passed);
        CHECK(r.table.size() == 1);
    } catch (const AuditMismatchError& e) {
        CHECK(e.lo() >= 10.0);
        CHECK(e.hi() <= 20.0);
        CHECK(e.expected() != e.found());
    }
}

TEST_CASE("scan argument checks", "[zero_table][scan]") {
    CHECK_THROWS_AS(scan_zeros(5.0, 100.0, 8.0), DomainError);
    CHECK_THROWS_AS(scan_zeros(100.0, 50.0, 8.0), DomainError);
}

TEST_CASE("scanned ordinates are located to high accuracy", "[zero_table][scan]") {
    const auto& table = zml_test::scanned_table();
    // published low ordinates
    const double known[] = {14.134725141734693, 21.022039638771555, 25.010857580145688, 30.424876125859513,
                            32.935061587739189};
    for (int i = 0; i < 5; ++i) CHECK_THAT(table.entries[i].gamma, WithinAbs(known[i], 1e-9));
    for (std::size_t i : {std::size_t{10}, std::size_t{500}, std::size_t{2000}}) {
        const double g = table.entries[i].gamma, d = 1e-8;
        CHECK(hardy_z(g - d) * hardy_z(g + d) < 0.0);
    }
}

TEST_CASE("ingest reads ordinates and skips comments", "[zero_table][ingest]") {
    const auto path = temp_file("two.txt", "# low zeros\n14.134725142\n\n21.022039639\n");
    const auto t = ingest_zeros(path.string());
    REQUIRE(t.size() == 2);
    CHECK(t.entries[0].origin == ZeroOrigin::ingested);
    CHECK(t.entries[0].beta == 0.5);
    CHECK(t.entries[1].gamma == 21.022039639);
}

TEST_CASE("ingest rejects descending and malformed input", "[zero_table][ingest]") {
    std::istringstream desc("21.0\n14.1\n");
    CHECK_THROWS_AS(parse_zero_text(desc), MonotonicityError);
    std::istringstream junk("14.1\nabc\n");
    try {
        parse_zero_text(junk, "junk");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("junk:2") != std::string::npos);
    }
}

TEST_CASE("empty ingest gives an empty table with no coverage", "[zero_table][ingest]") {
    std::istringstream empty("");
    const auto t = parse_zero_text(empty);
    CHECK(t.empty());
    CHECK_FALSE(t.covered.has_value());
}

TEST_CASE("ingested low zeros match the scan", "[zero_table][ingest][property]") {
    const auto& scanned = zml_test::scanned_table();
    std::ostringstream text;
    text.precision(12);
    for (std::size_t i = 0; i < 100; ++i) text << scanned.entries[i].gamma << '\n';
    const auto path = temp_file("hundred.txt", text.str());
    const auto ing = ingest_zeros(path.string());
    REQUIRE(ing.size() == 100);
    for (std::size_t i = 0; i < 100; ++i) CHECK_THAT(ing.entries[i].gamma, WithinAbs(scanned.entries[i].gamma, 1e-6));
}

TEST_CASE("binary cache round-trips bit for bit", "[zero_table][cache]") {
    const auto& table = zml_test::scanned_table();
    const auto bytes = encode_cache(table);
    CHECK(bytes.substr(0, 4) == "ZMLZ");
    CHECK(bytes.size() == 32 + 8 * table.size());
    const auto back = decode_cache(bytes);
    REQUIRE(back.size() == table.size());
    for (std::size_t i = 0; i < table.size(); ++i)
        CHECK(std::bit_cast<std::uint64_t>(back.entries[i].gamma) == std::bit_cast<std::uint64_t>(table.entries[i].gamma));
    CHECK(back.covered->lo == table.covered->lo);
    CHECK(back.covered->hi == table.covered->hi);
    CHECK(encode_cache(back) == bytes);

    const auto path = std::filesystem::temp_directory_path() / "zml_test_cache.zmlz";
    write_cache(table, path.string());
    CHECK(encode_cache(read_cache(path.string())) == bytes);
}

TEST_CASE("cache header is little-endian with version 1", "[zero_table][cache]") {
    const auto t = make_table({14.5, 21.0}, ZeroOrigin::computed, Interval{10.0, 22.0}, "x");
    const auto bytes = encode_cache(t);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    CHECK(p[4] == 1);
    CHECK(p[5] == 0);
    CHECK(p[8] == 2);
    std::uint64_t lo_bits = 0;
    for (int i = 0; i < 8; ++i) lo_bits |= static_cast<std::uint64_t>(p[16 + i]) << (8 * i);
    CHECK(std::bit_cast<double>(lo_bits) == 10.0);
}

TEST_CASE("corrupt caches are rejected", "[zero_table][cache]") {
    const auto t = make_table({14.5, 21.0}, ZeroOrigin::computed, Interval{10.0, 22.0}, "x");
    auto bytes = encode_cache(t);
    CHECK_THROWS_AS(decode_cache("ZMLY" + bytes.substr(4)), FormatError);
    CHECK_THROWS_AS(decode_cache(bytes.substr(0, bytes.size() - 1)), FormatError);
    auto bad_version = bytes;
    bad_version[4] = 2;
    CHECK_THROWS_AS(decode_cache(bad_version), FormatError);
}

TEST_CASE("synthetic zeros are never cached", "[zero_table][cache]") {
    const auto& base = zml_test::scanned_table();
    const auto with = inject_synthetic(base, {{0.7, 500.0, 1, ZeroOrigin::computed}});
    CHECK(encode_cache(with) == encode_cache(base));
}

TEST_CASE("N(sigma, T) counts off-line zeros", "[zero_table][density]") {
    const auto& base = zml_test::scanned_table();
    CHECK(count_n_sigma(base, 0.6, 1000.0) == 0);
    const auto with = inject_synthetic(base, {{0.7, 500.0, 1, ZeroOrigin::synthetic}});
    CHECK(count_n_sigma(with, 0.6, 1000.0) == 1);
    CHECK(count_n_sigma(with, 0.75, 1000.0) == 0);
    CHECK(count_n_sigma(with, 0.6, 400.0) == 0);
    CHECK_THAT(zero_density_bound(1000.0, 0.6, 4.0 / 3.0, std::pow(std::log(1000.0), 5)),
               WithinRel(6261591.2957063031857, 1e-12));
}

TEST_CASE("N(sigma, T) preconditions", "[zero_table][density]") {
    const auto& base = zml_test::scanned_table();
    CHECK_THROWS_AS(count_n_sigma(base, 0.4, 1000.0), DomainError);
    CHECK_THROWS_AS(count_n_sigma(base, 0.6, 1e5), CoverageError);
}

TEST_CASE("inject_synthetic merges in order and checks beta", "[zero_table][synthetic]") {
    const auto& base = zml_test::scanned_table();
    const auto one = inject_synthetic(base, {{0.6, 300.0, 1, ZeroOrigin::computed}});
    CHECK(one.size() == base.size() + 1);
    auto [f, l] = one.window(299.99, 300.01);
    REQUIRE(std::distance(f, l) == 1);
    CHECK(f->beta == 0.6);
    CHECK(f->origin == ZeroOrigin::synthetic);
    CHECK_NOTHROW(validate(one));
    CHECK(std::is_sorted(one.entries.begin(), one.entries.end(),
                         [](const ZeroEntry& a, const ZeroEntry& b) { return a.gamma < b.gamma; }));

    CHECK_THROWS_AS(inject_synthetic(base, {{1.2, 300.0, 1, ZeroOrigin::synthetic}}), RangeError);

    const auto pair = inject_synthetic(base, {{0.6, 300.0, 1, ZeroOrigin::synthetic}, {0.4, 300.0, 1, ZeroOrigin::synthetic}});
    auto [pf, pl] = pair.window(300.0, 300.0);
    REQUIRE(std::distance(pf, pl) == 2);
    CHECK(pf->beta == 0.4);
    CHECK(std::next(pf)->beta == 0.6);
}

TEST_CASE("N(T) equals the argument-principle count at 100 random heights", "[zero_table][property]") {
    const auto& table = zml_test::scanned_table();
    zml_test::Draw draw(99);
    for (int i = 0; i < 100; ++i) {
        double T = draw.uniform(50.0, 1000.0);
        const double r = default_exclusion_radius(T);
        while (table.window(T - 100 * r, T + 100 * r).first != table.window(T - 100 * r, T + 100 * r).second)
            T += 200 * r;
        const long expected = std::lround(rs_theta(T) / std::numbers::pi + 1.0 + s_function_by_argument(T));
        CHECK(table.count_up_to(T) == expected);
    }
}

TEST_CASE("N(sigma, T) is non-increasing in sigma", "[zero_table][property]") {
    const auto& base = zml_test::scanned_table();
    zml_test::Draw draw(5);
    std::vector<ZeroEntry> syn;
    for (int i = 0; i < 40; ++i) syn.push_back({draw.uniform(0.51, 0.99), draw.uniform(20.0, 1500.0), 1 + static_cast<int>(draw.below(2)), ZeroOrigin::synthetic});
    const auto table = inject_synthetic(base, syn);
    for (double T : {300.0, 900.0, 1500.0}) {
        long prev = count_n_sigma(table, 0.5 + 1.0 / std::log(T), T);
        for (double s = 0.5 + 1.0 / std::log(T); s < 1.0; s += 0.01) {
            const long n = count_n_sigma(table, s, T);
            CHECK(n <= prev);
            prev = n;
        }
    }
}

TEST_CASE("smooth zero count tracks the table", "[zero_table][count]") {
    const auto& table = zml_test::scanned_table();
    CHECK(std::abs(static_cast<double>(table.count_up_to(4000.0)) - smooth_zero_count(4000.0)) < 3.0);
    CHECK_THAT(zero_density(1000.0), WithinRel(std::log(1000.0 / (2 * std::numbers::pi)) / (2 * std::numbers::pi), 1e-2));
}
