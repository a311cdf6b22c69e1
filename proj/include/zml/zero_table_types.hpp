#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace zml {

enum class ZeroOrigin { computed, ingested, synthetic };

inline const char* to_string(ZeroOrigin o) {
    switch (o) {
        case ZeroOrigin::computed: return "computed";
        case ZeroOrigin::ingested: return "ingested";
        case ZeroOrigin::synthetic: return "synthetic";
    }
    return "?";
}

/// A nontrivial zero beta + i*gamma with gamma > 0. The conjugate zero is
/// implied and never stored.
struct ZeroEntry {
    double beta = 0.5;
    double gamma = 0.0;
    int multiplicity = 1;
    ZeroOrigin origin = ZeroOrigin::computed;

    friend bool operator==(const ZeroEntry&, const ZeroEntry&) = default;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool empty() const { return !(hi >= lo); }
    bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Lowest nontrivial-zero ordinate. A table whose covered range starts at or
/// below it is complete down to height 0.
inline constexpr double kFirstZeroOrdinate = 14.134725141734693;

/// Nontrivial zeros ascending by gamma, with the ordinate range over which the
/// list is known to be complete.
struct ZeroTable {
    std::vector<ZeroEntry> entries;
    std::optional<Interval> covered;
    std::string provenance;
    std::vector<long> cumulative;  // multiplicity prefix sums, see reindex()

    /// Recomputes the multiplicity prefix sums; call after editing entries.
    void reindex() {
        cumulative.resize(entries.size());
        long n = 0;
        for (std::size_t i = 0; i < entries.size(); ++i) cumulative[i] = (n += entries[i].multiplicity);
    }

    std::size_t size() const { return entries.size(); }
    bool empty() const { return entries.empty(); }

    bool covers_from_zero() const { return covered && covered->lo <= kFirstZeroOrdinate + 1e-9; }

    /// Completeness on [lo, hi]; the part of [lo, hi] below the first zero is
    /// covered whenever the table starts at or below that ordinate.
    bool covers(double lo, double hi) const {
        if (!covered || covered->empty()) return false;
        const double need_lo = covers_from_zero() ? std::max(lo, covered->lo) : lo;
        return need_lo >= covered->lo && hi <= covered->hi;
    }

    /// Number of zeros (with multiplicity) with 0 < gamma <= t.
    long count_up_to(double t) const {
        auto end = std::upper_bound(entries.begin(), entries.end(), t,
                                    [](double v, const ZeroEntry& e) { return v < e.gamma; });
        const auto k = static_cast<std::size_t>(end - entries.begin());
        if (cumulative.size() == entries.size()) return k == 0 ? 0 : cumulative[k - 1];
        long n = 0;
        for (auto it = entries.begin(); it != end; ++it) n += it->multiplicity;
        return n;
    }

    /// Iterator range of entries with gamma in [lo, hi].
    auto window(double lo, double hi) const {
        auto first = std::lower_bound(entries.begin(), entries.end(), lo,
                                      [](const ZeroEntry& e, double v) { return e.gamma < v; });
        auto last = std::upper_bound(first, entries.end(), hi,
                                     [](double v, const ZeroEntry& e) { return v < e.gamma; });
        return std::pair{first, last};
    }

    /// Largest |beta - 1/2| over the stored entries (0 for a real table).
    double max_beta_deviation() const {
        double d = 0.0;
        for (const auto& e : entries) d = std::max(d, std::abs(e.beta - 0.5));
        return d;
    }
};

}  // namespace zml
