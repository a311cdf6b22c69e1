#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/special_functions/lambert_w.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "zml/error.hpp"
#include "zml/parallel.hpp"
#include "zml/zero_table_types.hpp"
#include "zml/zeta_engine.hpp"

namespace zml {

// ---------------------------------------------------------------------------
// Counting

/// Smooth part of the zero count, theta(t)/pi + 1.
inline double smooth_zero_count(double t) { return rs_theta(t) / std::numbers::pi + 1.0; }

/// Zero density d/dt of the smooth count, log(t / 2 pi) / (2 pi).
inline double zero_density(double t) {
    return t > 2.0 * std::numbers::pi ? std::log(t / (2.0 * std::numbers::pi)) / (2.0 * std::numbers::pi) : 0.0;
}

/// N(t) by the argument principle: theta(t)/pi + 1 + S(t) with S from
/// continuous variation of arg zeta; independent of any table.
inline double zero_count_by_argument(double t) { return smooth_zero_count(t) + s_function_by_argument(t); }

/// Number of zeros with beta > sigma and 0 <= gamma <= T, counted with
/// multiplicity.
inline long count_n_sigma(const ZeroTable& table, double sigma, double T) {
    if (!(T > std::numbers::e)) throw DomainError("count_n_sigma: T must exceed e");
    if (!(sigma >= 0.5)) throw DomainError("count_n_sigma: sigma must be at least 1/2");
    if (!table.covers(0.0, T)) throw CoverageError("count_n_sigma: T outside the table's covered range");
    long n = 0;
    for (const auto& e : table.entries)
        if (e.gamma <= T && e.beta > sigma) n += e.multiplicity;
    return n;
}

/// Right-hand side T^{1 - lambda (sigma - 1/2)} Phi(T) of a zero-density
/// estimate, for comparison reports.
inline double zero_density_bound(double T, double sigma, double lambda, double phi_at_T) {
    return std::pow(T, 1.0 - lambda * (sigma - 0.5)) * phi_at_T;
}

// ---------------------------------------------------------------------------
// Construction

/// Checks ordering and beta ranges. Throws on violation.
inline void validate(const ZeroTable& table) {
    for (std::size_t i = 0; i < table.entries.size(); ++i) {
        const auto& e = table.entries[i];
        if (!(e.beta > 0.0 && e.beta < 1.0)) throw RangeError("zero table: beta outside (0, 1)");
        if (!(e.gamma > 0.0)) throw RangeError("zero table: gamma must be positive");
        if (e.multiplicity < 1) throw RangeError("zero table: multiplicity must be positive");
        if (e.origin != ZeroOrigin::synthetic && e.beta != 0.5)
            throw RangeError("zero table: real zeros must have beta = 1/2");
        if (i > 0) {
            const auto& p = table.entries[i - 1];
            if (e.gamma < p.gamma || (e.gamma == p.gamma && e.beta == p.beta))
                throw MonotonicityError("zero table: entries not ascending");
        }
    }
}

/// Merges synthetic zeros into a copy of `table`. The symmetric partner
/// 1 - beta is not added; callers that need it pass it explicitly.
inline ZeroTable inject_synthetic(const ZeroTable& table, std::vector<ZeroEntry> zeros) {
    for (auto& z : zeros) {
        if (!(z.beta > 0.0 && z.beta < 1.0)) throw RangeError("inject_synthetic: beta outside (0, 1)");
        if (!(z.gamma > 0.0)) throw RangeError("inject_synthetic: gamma must be positive");
        if (z.multiplicity < 1) throw RangeError("inject_synthetic: multiplicity must be positive");
        z.origin = ZeroOrigin::synthetic;
    }
    ZeroTable out = table;
    out.entries.insert(out.entries.end(), zeros.begin(), zeros.end());
    std::stable_sort(out.entries.begin(), out.entries.end(), [](const ZeroEntry& a, const ZeroEntry& b) {
        return a.gamma < b.gamma || (a.gamma == b.gamma && a.beta < b.beta);
    });
    out.provenance += (out.provenance.empty() ? "" : "; ") + std::string("synthetic+") + std::to_string(zeros.size());
    out.reindex();
    return out;
}

/// Table of critical-line zeros from ascending ordinates.
inline ZeroTable make_table(const std::vector<double>& ordinates, ZeroOrigin origin, std::optional<Interval> covered,
                            std::string provenance) {
    ZeroTable t;
    t.entries.reserve(ordinates.size());
    for (double g : ordinates) t.entries.push_back({0.5, g, 1, origin});
    t.covered = covered;
    t.provenance = std::move(provenance);
    t.reindex();
    return t;
}

// ---------------------------------------------------------------------------
// Text ingest

/// Reads one decimal ordinate per line ('#' comments and blank lines
/// skipped). Ordinates must be strictly ascending.
inline ZeroTable parse_zero_text(std::istream& in, const std::string& source = "<stream>") {
    std::vector<double> ords;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto last = line.find_last_not_of(" \t\r");
        const char* b = line.data() + first;
        const char* e = line.data() + last + 1;
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(b, e, v);
        if (ec != std::errc() || ptr != e || !std::isfinite(v) || v <= 0.0)
            throw ParseError(source + ":" + std::to_string(lineno) + ": not a positive decimal ordinate");
        if (!ords.empty() && !(v > ords.back()))
            throw MonotonicityError(source + ":" + std::to_string(lineno) + ": ordinates must be strictly ascending");
        ords.push_back(v);
    }
    std::optional<Interval> covered;
    if (!ords.empty()) covered = Interval{ords.front(), ords.back()};
    return make_table(ords, ZeroOrigin::ingested, covered, "ingested:" + source);
}

inline ZeroTable ingest_zeros(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("ingest_zeros: cannot open " + path);
    return parse_zero_text(in, path);
}

// ---------------------------------------------------------------------------
// Binary cache: "ZMLZ" | u32 version | u64 count | f64 lo | f64 hi | count x f64
// all little-endian.

inline constexpr std::uint32_t kCacheVersion = 1;

namespace detail {
template <class U>
void put_le(std::string& buf, U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
template <class U>
U get_le(const unsigned char* p) {
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(p[i]) << (8 * i);
    return v;
}
}  // namespace detail

/// Serializes the non-synthetic ordinates of `table`. Synthetic entries are
/// never written to the real-zero cache.
inline std::string encode_cache(const ZeroTable& table) {
    std::vector<double> ords;
    for (const auto& e : table.entries)
        if (e.origin != ZeroOrigin::synthetic) ords.push_back(e.gamma);
    std::string buf = "ZMLZ";
    detail::put_le<std::uint32_t>(buf, kCacheVersion);
    detail::put_le<std::uint64_t>(buf, ords.size());
    const Interval range = table.covered.value_or(Interval{1.0, 0.0});
    detail::put_le<std::uint64_t>(buf, std::bit_cast<std::uint64_t>(range.lo));
    detail::put_le<std::uint64_t>(buf, std::bit_cast<std::uint64_t>(range.hi));
    for (double g : ords) detail::put_le<std::uint64_t>(buf, std::bit_cast<std::uint64_t>(g));
    return buf;
}

inline ZeroTable decode_cache(const std::string& bytes, const std::string& source = "<cache>") {
    constexpr std::size_t header = 4 + 4 + 8 + 16;
    if (bytes.size() < header || bytes.compare(0, 4, "ZMLZ") != 0) throw FormatError(source + ": bad cache magic");
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const auto version = detail::get_le<std::uint32_t>(p + 4);
    if (version != kCacheVersion) throw FormatError(source + ": unsupported cache version " + std::to_string(version));
    const auto count = detail::get_le<std::uint64_t>(p + 8);
    if (bytes.size() != header + 8 * count) throw FormatError(source + ": truncated or oversized cache");
    const Interval range{std::bit_cast<double>(detail::get_le<std::uint64_t>(p + 16)),
                         std::bit_cast<double>(detail::get_le<std::uint64_t>(p + 24))};
    std::vector<double> ords(count);
    for (std::uint64_t i = 0; i < count; ++i)
        ords[i] = std::bit_cast<double>(detail::get_le<std::uint64_t>(p + header + 8 * i));
    for (std::size_t i = 1; i < ords.size(); ++i)
        if (!(ords[i] > ords[i - 1])) throw MonotonicityError(source + ": cached ordinates not ascending");
    std::optional<Interval> covered;
    if (!range.empty()) covered = range;
    return make_table(ords, ZeroOrigin::computed, covered, "cache:" + source);
}

inline void write_cache(const ZeroTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("write_cache: cannot open " + path);
    const std::string bytes = encode_cache(table);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("write_cache: write failed for " + path);
}

inline ZeroTable read_cache(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("read_cache: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return decode_cache(ss.str(), path);
}

// ---------------------------------------------------------------------------
// Scanning

struct AuditSegment {
    double lo = 0.0, hi = 0.0;
    long expected = 0, found = 0;
    int refinements = 0;
};

struct ScanAudit {
    long expected = 0;  // argument-principle count on (t_lo, t_hi]
    long found = 0;
    double s_lo = 0.0, s_hi = 0.0;  // S(t) at the endpoints
    std::vector<AuditSegment> refined;
    std::vector<std::string> warnings;
    bool passed = false;
};

struct ScanResult {
    ZeroTable table;
    ScanAudit audit;
};

namespace detail {

/// Gram point g_n: theta(g_n) = n pi, by Newton from the asymptotic guess.
inline double gram_point(long n) {
    constexpr double pi = std::numbers::pi;
    // g_n ~ 2 pi exp(1 + W((8n + 1) / (8e)))
    double t = 2.0 * pi * std::exp(1.0 + boost::math::lambert_w0((8.0 * n + 1.0) / (8.0 * std::numbers::e)));
    t = std::max(t, kThetaFloor);
    for (int i = 0; i < 100; ++i) {
        const double f = rs_theta(t) - n * pi;
        const double step = f / rs_theta_prime(t);
        t = std::max(kThetaFloor, t - step);
        if (std::abs(step) < 1e-12 * t) break;
    }
    return t;
}

inline double locate_root(double a, double za, double b, double zb) {
    std::uintmax_t iters = 200;
    auto f = [](double t) { return hardy_z(t); };
    auto tol = [](double x, double y) { return std::abs(x - y) < 1e-11; };
    const auto r = boost::math::tools::toms748_solve(f, a, b, za, zb, tol, iters);
    return 0.5 * (r.first + r.second);
}

/// Sign changes of Z on (lo, hi], sampling every gap/grid_factor.
inline std::vector<double> sign_change_roots(double lo, double hi, double grid_factor) {
    std::vector<double> roots;
    double t0 = lo;
    double z0 = hardy_z(t0);
    while (t0 < hi) {
        const double step = mean_zero_gap(t0) / grid_factor;
        const double t1 = std::min(hi, t0 + step);
        const double z1 = hardy_z(t1);
        if (z1 == 0.0)
            roots.push_back(t1);
        else if (z0 != 0.0 && (z0 < 0.0) != (z1 < 0.0))
            roots.push_back(locate_root(t0, z0, t1, z1));
        t0 = t1;
        z0 = z1;
    }
    return roots;
}

inline long count_in(const std::vector<double>& roots, double lo, double hi) {
    return std::upper_bound(roots.begin(), roots.end(), hi) - std::upper_bound(roots.begin(), roots.end(), lo);
}

}  // namespace detail

struct ScanOptions {
    int max_refinements = 4;  // each multiplies the local grid by 4
    double chunk_gaps = 512;  // scan chunk length in mean gaps
};

/// Locates all sign changes of Z(t) on (t_lo, t_hi] to ~1e-10 and audits
/// the count against theta(t)/pi + 1 + S(t) (S by argument tracking).
/// Segments between good Gram points whose count falls short are rescanned
/// on finer grids; a persistent shortfall raises AuditMismatchError.
inline ScanResult scan_zeros(double t_lo, double t_hi, double grid_factor, ScanOptions opt = {}) {
    if (!(t_lo >= kThetaFloor)) throw DomainError("scan_zeros: t_lo below 10");
    if (!(t_hi > t_lo)) throw DomainError("scan_zeros: empty range");
    if (!(grid_factor > 0.0)) throw DomainError("scan_zeros: grid_factor must be positive");
    ScanResult result;
    auto& audit = result.audit;
    if (grid_factor < 4.0) audit.warnings.push_back("grid_factor below 4 samples per mean gap");

    // Fixed chunking (independent of thread count) keeps output reproducible.
    std::vector<double> cuts{t_lo};
    while (cuts.back() < t_hi) cuts.push_back(std::min(t_hi, cuts.back() + opt.chunk_gaps * mean_zero_gap(cuts.back())));
    std::vector<std::vector<double>> pieces(cuts.size() - 1);
    parallel_for(pieces.size(), [&](std::size_t i) { pieces[i] = detail::sign_change_roots(cuts[i], cuts[i + 1], grid_factor); });
    std::vector<double> roots;
    for (auto& p : pieces) roots.insert(roots.end(), p.begin(), p.end());

    audit.s_lo = s_function_by_argument(t_lo);
    audit.s_hi = s_function_by_argument(t_hi);
    const double n_lo = smooth_zero_count(t_lo) + audit.s_lo;
    const double n_hi = smooth_zero_count(t_hi) + audit.s_hi;
    audit.expected = std::lround(n_hi) - std::lround(n_lo);
    audit.found = static_cast<long>(roots.size());

    if (audit.found != audit.expected) {
        // Segment boundaries: the endpoints plus good Gram points inside.
        constexpr double pi = std::numbers::pi;
        std::vector<std::pair<double, double>> marks{{t_lo, n_lo}};
        const long g_first = static_cast<long>(std::ceil(rs_theta(t_lo) / pi));
        const long g_last = static_cast<long>(std::floor(rs_theta(t_hi) / pi));
        for (long n = std::max(g_first, 0L); n <= g_last; ++n) {
            const double g = detail::gram_point(n);
            if (g <= t_lo || g >= t_hi) continue;
            if (((n % 2 == 0) ? 1.0 : -1.0) * hardy_z(g) > 0.0) marks.push_back({g, static_cast<double>(n + 1)});
        }
        marks.push_back({t_hi, n_hi});
        for (std::size_t i = 0; i + 1 < marks.size(); ++i) {
            const auto [a, na] = marks[i];
            const auto [b, nb] = marks[i + 1];
            AuditSegment seg{a, b, std::lround(nb) - std::lround(na), detail::count_in(roots, a, b), 0};
            if (seg.found == seg.expected) continue;
            double factor = grid_factor;
            while (seg.found < seg.expected && seg.refinements < opt.max_refinements) {
                factor *= 4.0;
                ++seg.refinements;
                auto local = detail::sign_change_roots(a, b, factor);
                if (static_cast<long>(local.size()) > seg.found) {
                    auto lo_it = std::upper_bound(roots.begin(), roots.end(), a);
                    auto hi_it = std::upper_bound(roots.begin(), roots.end(), b);
                    lo_it = roots.erase(lo_it, hi_it);
                    roots.insert(lo_it, local.begin(), local.end());
                    seg.found = static_cast<long>(local.size());
                }
            }
            audit.refined.push_back(seg);
            if (seg.found != seg.expected) {
                std::ostringstream msg;
                msg << "scan_zeros: audit mismatch on [" << a << ", " << b << "]: expected " << seg.expected
                    << ", found " << seg.found;
                throw AuditMismatchError(msg.str(), a, b, seg.expected, seg.found);
            }
            audit.warnings.push_back("local refinement recovered missing zeros");
        }
        audit.found = static_cast<long>(roots.size());
        if (audit.found != audit.expected) {
            std::ostringstream msg;
            msg << "scan_zeros: total mismatch on [" << t_lo << ", " << t_hi << "]: expected " << audit.expected
                << ", found " << audit.found;
            throw AuditMismatchError(msg.str(), t_lo, t_hi, audit.expected, audit.found);
        }
    }
    audit.passed = true;
    std::ostringstream prov;
    prov << "scan:[" << t_lo << "," << t_hi << "] grid_factor=" << grid_factor;
    result.table = make_table(roots, ZeroOrigin::computed, Interval{t_lo, t_hi}, prov.str());
    return result;
}

}  // namespace zml
