#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "zml/zml.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string num(double x) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return ec == std::errc() ? std::string(buf, end) : std::string("nan");
}

// JSON cannot carry inf/nan; those become strings.
json jnum(double x) {
    if (std::isfinite(x)) return x;
    return num(x);
}

class Csv {
public:
    explicit Csv(std::vector<std::string> header) : header_(std::move(header)) {}
    void row(std::vector<std::string> r) { rows_.push_back(std::move(r)); }
    std::size_t size() const { return rows_.size(); }

    void write(std::ostream& os) const {
        auto line = [&](const std::vector<std::string>& r) {
            for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
            os << '\n';
        };
        line(header_);
        for (const auto& r : rows_) line(r);
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

struct Global {
    std::string out;
    std::string summary;
    std::string cache_dir;
    std::string threads = "auto";
    std::uint64_t seed = 1;
};

struct Outcome {
    std::unique_ptr<Csv> csv;
    json results = json::object();
    int status = 0;
};

/// Thrown when a run completes but an invariant check fails.
struct InvariantFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string resolved_cache_dir(const Global& g) {
    if (const char* env = std::getenv("ZML_CACHE_DIR"); env && *env) return env;
    return g.cache_dir;
}

zml::ZeroTable load_table_file(const std::string& path) {
    if (path.size() > 5 && path.substr(path.size() - 5) == ".zmlz") return zml::read_cache(path);
    return zml::ingest_zeros(path);
}

/// Half-width K sqrt(X) / log X of the zero window used by sigma selection.
double sigma_reach(double K, double X) { return K * std::sqrt(X) / std::log(X); }

std::string cache_name(double lo, double hi) { return "zeros_" + num(lo) + "_" + num(hi) + ".zmlz"; }

/// A table complete on [0, hi]: the first cached one that covers it, else a
/// fresh scan (cached when a cache directory is configured).
zml::ZeroTable acquire_table(double hi, const Global& g, json& results) {
    const auto dir = resolved_cache_dir(g);
    if (!dir.empty() && fs::is_directory(dir)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(dir))
            if (e.path().extension() == ".zmlz") files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            try {
                auto t = zml::read_cache(f.string());
                if (t.covers(0.0, hi)) {
                    results["zero_table"] = f.filename().string();
                    return t;
                }
            } catch (const zml::Error&) {
            }
        }
    }
    const double top = std::ceil(hi * 1.02 + 20.0);
    auto scan = zml::scan_zeros(10.0, top, 8.0);
    results["zero_table"] = "scan [10, " + num(top) + "]";
    if (!dir.empty()) {
        fs::create_directories(dir);
        zml::write_cache(scan.table, (fs::path(dir) / cache_name(10.0, top)).string());
    }
    return std::move(scan.table);
}

std::map<std::uint64_t, zml::cdouble> prime_coefficients(double up_to) {
    std::map<std::uint64_t, zml::cdouble> a;
    for (auto p : zml::sieve_primes(up_to)) a[p] = 1.0 / std::sqrt(static_cast<double>(p));
    return a;
}

/// Echo of every option of the selected leaf command, defaults included.
json resolved_parameters(const CLI::App* leaf) {
    json p = json::object();
    for (const CLI::Option* o : leaf->get_options()) {
        const std::string name = o->get_single_name();
        if (name.empty() || name == "help" || name == "config") continue;
        if (o->count() > 0) {
            const auto& r = o->results();
            if (r.size() == 1)
                p[name] = r.front();
            else
                p[name] = r;
        } else if (!o->get_default_str().empty()) {
            p[name] = o->get_default_str();
        } else {
            p[name] = nullptr;
        }
    }
    return p;
}

std::string timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Expands `--config FILE` into `--key=value` flags placed right after the
/// subcommand words, so explicit flags given later take precedence.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + static_cast<long>(i));
            break;
        }
    }
    if (path.empty()) return args;
    std::ifstream in(path);
    if (!in) throw CLI::FileError::Missing(path);
    std::vector<std::string> extra;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw CLI::ConversionError(path + ":" + std::to_string(lineno) + ": expected key = value");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r"), b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (key.empty()) throw CLI::ConversionError(path + ":" + std::to_string(lineno) + ": empty key");
        // vector options take a space-separated list
        std::istringstream parts(value);
        std::string item;
        bool any = false;
        while (parts >> item) {
            extra.push_back("--" + key + "=" + item);
            any = true;
        }
        if (!any) extra.push_back("--" + key + "=");
    }
    std::size_t pos = 1;
    while (pos < args.size() && !args[pos].empty() && args[pos][0] != '-') ++pos;
    args.insert(args.begin() + static_cast<long>(pos), extra.begin(), extra.end());
    return args;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"zml: zeta moments laboratory", "zml"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    Global g;
    std::vector<CLI::App*> leaves;
    std::function<Outcome()> action;
    std::string command;

    auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& desc) {
        auto* s = parent->add_subcommand(name, desc);
        s->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
        s->add_option("--config", "key = value file; flags on the command line override it");
        s->add_option("--out", g.out, "CSV output path (default: standard output)");
        s->add_option("--summary", g.summary, "JSON summary path (default: <out>.json, or standard error)");
        s->add_option("--seed", g.seed, "64-bit seed")->capture_default_str();
        s->add_option("--threads", g.threads, "worker threads or 'auto'")->capture_default_str();
        s->add_option("--cache-dir", g.cache_dir, "zero cache directory (ZML_CACHE_DIR overrides)");
        leaves.push_back(s);
        return s;
    };
    auto group = [&](const std::string& name, const std::string& desc) {
        auto* s = app.add_subcommand(name, desc);
        s->require_subcommand(1);
        return s;
    };

    // constants-sweep
    int sweep_n = 101;
    {
        auto* s = leaf(&app, "constants-sweep", "optimal h(theta) and A(theta) on an even theta grid over [0, pi/2]");
        s->add_option("--n", sweep_n, "number of theta points")->capture_default_str()->check(CLI::Range(2, 100000));
        s->callback([&] {
            command = "constants-sweep";
            action = [&] {
                Outcome o;
                const auto sw = zml::theta_sweep(sweep_n);
                o.csv = std::make_unique<Csv>(std::vector<std::string>{"theta", "h_star", "A_star", "a", "b"});
                for (const auto& p : sw.points)
                    o.csv->row({num(p.theta), num(p.h_star), num(p.A_star), num(zml::a_of_h(p.h_star)),
                                num(zml::b_of_h(p.h_star))});
                o.results["h_at_0"] = sw.points.front().h_star;
                o.results["A_at_0"] = sw.points.front().A_star;
                o.results["h_at_half_pi"] = sw.points.back().h_star;
                o.results["A_at_half_pi"] = sw.points.back().A_star;
                o.results["max_monotonicity_violation"] = sw.max_violation;
                if (sw.max_violation >= 1e-5) throw InvariantFailure("h(theta) is not non-increasing");
                return o;
            };
        });
    }

    // zeros
    double z_from = 10.0, z_to = 1000.0, z_grid = 8.0;
    bool z_cache = false;
    std::string z_file;
    {
        auto* zg = group("zeros", "zero table scan, ingestion and audit");
        auto* scan = leaf(zg, "scan", "locate zeros on the critical line by sign changes of Z(t) and audit the count");
        scan->add_option("--from", z_from, "lower height (>= 10)")->capture_default_str();
        scan->add_option("--to", z_to, "upper height")->capture_default_str();
        scan->add_option("--grid", z_grid, "grid points per mean zero gap")->capture_default_str();
        scan->add_flag("--cache", z_cache, "store the table in the cache directory");
        scan->callback([&] {
            command = "zeros scan";
            action = [&] {
                Outcome o;
                zml::ScanResult r;
                try {
                    r = zml::scan_zeros(z_from, z_to, z_grid);
                } catch (const zml::AuditMismatchError& e) {
                    o.results["audit_lo"] = e.lo();
                    o.results["audit_hi"] = e.hi();
                    o.results["expected"] = e.expected();
                    o.results["found"] = e.found();
                    throw;
                }
                o.csv = std::make_unique<Csv>(std::vector<std::string>{"index", "gamma"});
                for (std::size_t i = 0; i < r.table.size(); ++i) o.csv->row({std::to_string(i + 1), num(r.table.entries[i].gamma)});
                o.results["count"] = r.table.size();
                o.results["expected"] = r.audit.expected;
                o.results["found"] = r.audit.found;
                o.results["audit_passed"] = r.audit.passed;
                o.results["refined_segments"] = r.audit.refined.size();
                if (!r.table.empty()) o.results["first_zero"] = r.table.entries.front().gamma;
                o.results["warnings"] = r.audit.warnings;
                if (z_cache) {
                    const auto dir = resolved_cache_dir(g);
                    if (dir.empty()) throw CLI::ValidationError("--cache needs --cache-dir or ZML_CACHE_DIR");
                    fs::create_directories(dir);
                    const auto path = (fs::path(dir) / cache_name(z_from, z_to)).string();
                    zml::write_cache(r.table, path);
                    o.results["cache_file"] = path;
                }
                if (!r.audit.passed) throw InvariantFailure("zero count audit failed");
                return o;
            };
        });

        auto* ing = leaf(zg, "ingest", "read a plain-text ordinate list (one per line)");
        ing->add_option("--file", z_file, "input path")->required()->check(CLI::ExistingFile);
        ing->add_flag("--cache", z_cache, "store the table in the cache directory");
        ing->callback([&] {
            command = "zeros ingest";
            action = [&] {
                Outcome o;
                const auto t = zml::ingest_zeros(z_file);
                o.csv = std::make_unique<Csv>(std::vector<std::string>{"index", "gamma"});
                for (std::size_t i = 0; i < t.size(); ++i) o.csv->row({std::to_string(i + 1), num(t.entries[i].gamma)});
                o.results["count"] = t.size();
                if (t.covered) o.results["covered"] = {t.covered->lo, t.covered->hi};
                if (z_cache) {
                    const auto dir = resolved_cache_dir(g);
                    if (dir.empty()) throw CLI::ValidationError("--cache needs --cache-dir or ZML_CACHE_DIR");
                    fs::create_directories(dir);
                    const double lo = t.covered ? t.covered->lo : 0.0, hi = t.covered ? t.covered->hi : 0.0;
                    const auto path = (fs::path(dir) / cache_name(lo, hi)).string();
                    zml::write_cache(t, path);
                    o.results["cache_file"] = path;
                }
                return o;
            };
        });

        auto* aud = leaf(zg, "audit", "check a stored table against the argument-principle count");
        aud->add_option("--file", z_file, "table path (.zmlz cache or plain text)")->required()->check(CLI::ExistingFile);
        aud->callback([&] {
            command = "zeros audit";
            action = [&] {
                Outcome o;
                const auto t = load_table_file(z_file);
                zml::validate(t);
                if (!t.covered || !t.covers_from_zero())
                    throw zml::CoverageError("zeros audit: table is not complete from height 0");
                const double hi = t.covered->hi;
                const long expected = std::lround(zml::zero_count_by_argument(hi));
                const long found = t.count_up_to(hi);
                o.csv = std::make_unique<Csv>(std::vector<std::string>{"height", "expected", "found"});
                o.csv->row({num(hi), std::to_string(expected), std::to_string(found)});
                o.results["height"] = hi;
                o.results["expected"] = expected;
                o.results["found"] = found;
                o.results["passed"] = expected == found;
                if (expected != found) throw InvariantFailure("stored table disagrees with the argument-principle count");
                return o;
            };
        });
    }

    // approx
    std::size_t ap_samples = 500;
    double ap_tmin = 100.0, ap_tmax = 1000.0, ap_K = 50.0, ap_theta = 0.0, ap_xpow = 2.0;
    double ef_re = 2.0, ef_im = 10.0, ef_X = 1e4, ef_N = 2e6;
    std::size_t ef_zeros = 650;
    double bal_t = 500.0, bal_X = 0.0;
    {
        auto* ag = group("approx", "approximate formula for log zeta on the critical line");
        auto* res = leaf(ag, "residual", "minimal C1 and the zero term Y at random heights, X = t^p");
        res->add_option("--samples", ap_samples, "number of random heights")->capture_default_str()->check(CLI::PositiveNumber);
        res->add_option("--t-min", ap_tmin, "lowest height")->capture_default_str();
        res->add_option("--t-max", ap_tmax, "highest height")->capture_default_str();
        res->add_option("--K", ap_K, "zero-density parameter K >= 1")->capture_default_str();
        res->add_option("--theta", ap_theta, "rotation angle")->capture_default_str();
        res->add_option("--x-power", ap_xpow, "X = t^p with 0 < p <= 6")->capture_default_str();
        res->callback([&] {
            command = "approx residual";
            action = [&] {
                Outcome o;
                if (!(ap_tmin >= 3.0 && ap_tmax > ap_tmin)) throw CLI::ValidationError("need 3 <= t-min < t-max");
                const auto table = acquire_table(ap_tmax + sigma_reach(ap_K, std::pow(ap_tmax, ap_xpow)) + 50.0, g, o.results);
                std::vector<double> ts(ap_samples);
                for (std::size_t i = 0; i < ap_samples; ++i)
                    ts[i] = ap_tmin + (ap_tmax - ap_tmin) * zml::unit_double(zml::mix64(g.seed * 0x9e3779b97f4a7c15ULL + i));
                const double h = zml::optimize_h(ap_theta).h_star;
                const auto rep = zml::residual_report(
                    ts, [&](double t) { return zml::ApproxParams{ap_theta, ap_K, h, std::pow(t, ap_xpow)}; }, table);
                o.csv = std::make_unique<Csv>(std::vector<std::string>{"t", "X", "sigma", "lhs", "rhs_factor", "core_term",
                                                                       "min_C1", "Y", "Y_tail_bound"});
                for (const auto& r : rep.rows)
                    o.csv->row({num(r.t), num(r.X), num(r.sigma), num(r.lhs), num(r.rhs_factor), num(r.core_term),
                                num(r.min_C1), num(r.Y_value), num(r.Y_tail_bound)});
                o.results["max_min_C1"] = jnum(rep.max_min_C1);
                o.results["min_Y"] = jnum(rep.min_Y);
                o.results["h"] = h;
                if (rep.min_Y < 0.0) throw InvariantFailure("zero term Y is negative at some sample");
                return o;
            };
        });

        auto* ef = leaf(ag, "explicit-formula", "truncated explicit formula for zeta'/zeta(s) against its tail budget");
        ef->add_option("--re", ef_re, "Re s (> 1)")->capture_default_str();
        ef->add_option("--im", ef_im, "Im s")->capture_default_str();
        ef->add_option("--X", ef_X, "smoothing length")->capture_default_str();
        ef->add_option("--zeros", ef_zeros, "number of zeros summed")->capture_default_str();
        ef->add_option("--terms", ef_N, "Dirichlet series terms on the left side")->capture_default_str();
        ef->callback([&] {
            command = "approx explicit-formula";
            action = [&] {
                Outcome o;
                double hi = 1100.0;
                zml::ZeroTable table = acquire_table(hi, g, o.results);
                while (table.count_up_to(hi) < static_cast<long>(ef_zeros)) table = acquire_table(hi *= 1.5, g, o.results);
                const auto r = zml::explicit_formula_check({ef_re, ef_im}, ef_X, ef_zeros, table,
                                                           static_cast<std::uint64_t>(ef_N));
                o.csv = std::make_unique<Csv>(std::vector<std::string>{"part", "re", "im"});
                o.csv->row({"lhs", num(r.lhs.real()), num(r.lhs.imag())});
                o.csv->row({"rhs", num(r.rhs.real()), num(r.rhs.imag())});
                o.csv->row({"prime_term", num(r.prime_term.real()), num(r.prime_term.imag())});
                o.csv->row({"zero_term", num(r.zero_term.real()), num(r.zero_term.imag())});
                o.csv->row({"trivial_term", num(r.trivial_term.real()), num(r.trivial_term.imag())});
                o.csv->row({"pole_term", num(r.pole_term.real()), num(r.pole_term.imag())});
                o.csv->row({"oracle", num(r.oracle.real()), num(r.oracle.imag())});
                o.results["residual"] = r.residual;
                o.results["budget"] = r.budget;
                o.results["dirichlet_tail_bound"] = r.dirichlet_tail_bound;
                o.results["zero_tail_bound"] = r.zero_tail_bound;
                o.results["trivial_tail_bound"] = r.trivial_tail_bound;
                o.results["oracle_residual"] = r.oracle_residual;
                o.results["zeros_used"] = r.zeros_used;
                o.results["passed"] = r.passed;
                o.results["warnings"] = r.warnings;
                if (!r.passed) throw InvariantFailure("explicit formula residual exceeds its budget");
                return o;
            };
        });

        auto* bal = leaf(ag, "balance", "zero side against prime side of the approximate formula at one height");
        bal->add_option("--t", bal_t, "height")->capture_default_str();
        bal->add_option("--K", ap_K, "zero-density parameter K >= 1")->capture_default_str();
        bal->add_option("--theta", ap_theta, "rotation angle")->capture_default_str();
        bal->add_option("--X", bal_X, "smoothing length (default t^2)");
        bal->callback([&] {
            command = "approx balance";
            action = [&] {
                Outcome o;
                const double X = bal_X > 0.0 ? bal_X : bal_t * bal_t;
                const auto table = acquire_table(std::abs(bal_t) + sigma_reach(ap_K, X) + 200.0, g, o.results);
                const auto b = zml::zero_prime_balance(bal_t, zml::make_params(ap_theta, ap_K, X), table);
                o.csv = std::make_unique<Csv>(
                    std::vector<std::string>{"t", "X", "sigma", "zero_side", "zero_tail_estimate", "prime_side", "ratio"});
                o.csv->row({num(bal_t), num(X), num(b.sigma), num(b.zero_side), num(b.zero_tail_estimate),
                            num(b.prime_side), num(b.ratio)});
                o.results["ratio"] = jnum(b.ratio);
                o.results["sigma"] = b.sigma;
                o.results["n_terms"] = b.n_terms;
                return o;
            };
        });
    }

    // moment
    double m_k = 1.0, m_theta = 0.0, m_T = 1000.0, m_tol = 1e-9;
    {
        auto* s = leaf(&app, "moment", "M_{k,theta}(T) by quadrature between consecutive zeros");
        s->add_option("--k", m_k, "moment parameter")->capture_default_str();
        s->add_option("--theta", m_theta, "rotation angle")->capture_default_str();
        s->add_option("--T", m_T, "window [T, 2T]")->capture_default_str();
        s->add_option("--rel-tol", m_tol, "per-panel relative tolerance")->capture_default_str();
        s->callback([&] {
            command = "moment";
            action = [&] {
                Outcome o;
                const auto table = acquire_table(2.0 * m_T, g, o.results);
                zml::PanelSpec spec;
                spec.rel_tol = m_tol;
                const auto e = zml::moment_estimate(m_k, m_theta, m_T, table, spec);
                o.csv = std::make_unique<Csv>(
                    std::vector<std::string>{"k", "theta", "T", "estimate", "error_estimate", "n_panels"});
                o.csv->row({num(e.k), num(e.theta), num(e.T), num(e.value), num(e.error_estimate), std::to_string(e.n_panels)});
                o.results["estimate"] = e.value;
                o.results["error_estimate"] = e.error_estimate;
                o.results["n_panels"] = e.n_panels;
                o.results["evaluations"] = e.evaluations;
                if (m_k == 1.0 && m_theta == 0.0) o.results["second_moment_asymptotic"] = zml::second_moment_asymptotic(m_T);
                return o;
            };
        });
    }

    // tail
    double tl_theta = 0.0, tl_T = 1000.0, tl_vmin = -3.0, tl_vmax = 3.0, tl_vstep = 0.25;
    std::size_t tl_n = 10000;
    {
        auto* s = leaf(&app, "tail", "empirical survival of Re e^{-i theta} log zeta(1/2+it) on [T, 2T]");
        s->add_option("--theta", tl_theta, "rotation angle")->capture_default_str();
        s->add_option("--T", tl_T, "window [T, 2T]")->capture_default_str();
        s->add_option("--samples", tl_n, "sample count (>= 10000)")->capture_default_str();
        s->add_option("--v-min", tl_vmin, "first threshold")->capture_default_str();
        s->add_option("--v-max", tl_vmax, "last threshold")->capture_default_str();
        s->add_option("--v-step", tl_vstep, "threshold step")->capture_default_str()->check(CLI::PositiveNumber);
        s->callback([&] {
            command = "tail";
            action = [&] {
                Outcome o;
                const auto table = acquire_table(2.0 * tl_T, g, o.results);
                std::vector<double> grid;
                for (int i = 0; tl_vmin + i * tl_vstep <= tl_vmax + 1e-12; ++i) grid.push_back(tl_vmin + i * tl_vstep);
                const auto c = zml::tail_survival(tl_theta, tl_T, grid, tl_n, table);
                o.csv = std::make_unique<Csv>(std::vector<std::string>{"V", "survival"});
                for (const auto& [V, s] : c.points) o.csv->row({num(V), num(s)});
                o.results["n_samples"] = c.n_samples;
                o.results["sample_min"] = c.sample_min;
                o.results["sample_max"] = c.sample_max;
                return o;
            };
        });
    }

    // partition
    double pt_T = 1000.0, pt_k = 1.0, pt_K = 1.0, pt_theta = 0.0, pt_ascale = 1.0, pt_L = 0.0, pt_logthr = 0.0;
    std::size_t pt_n = 10000;
    std::vector<double> pt_delta;
    {
        auto* s = leaf(&app, "partition", "Monte Carlo measure of the good set and the exceptional sets on [T, 2T]");
        s->add_option("--T", pt_T, "window [T, 2T]")->capture_default_str();
        s->add_option("--k", pt_k, "moment parameter")->capture_default_str();
        s->add_option("--K", pt_K, "zero-density parameter K >= 1")->capture_default_str();
        s->add_option("--theta", pt_theta, "rotation angle")->capture_default_str();
        s->add_option("--samples", pt_n, "sample count (>= 1000)")->capture_default_str();
        auto* oL = s->add_option("--L", pt_L, "override the ladder length L");
        auto* oT = s->add_option("--log-threshold", pt_logthr, "override the log cutoff for the ladder index");
        s->add_option("--delta", pt_delta, "explicit ladder 0 < d1 < ... (repeat the flag)")->multi_option_policy(
            CLI::MultiOptionPolicy::TakeAll);
        s->add_option("--a-scale", pt_ascale, "multiplier on the A(i,j) thresholds")->capture_default_str();
        s->callback([&, oL, oT] {
            command = "partition";
            action = [&, oL, oT] {
                Outcome o;
                zml::RegimeOverrides ov;
                if (oL->count()) ov.L = pt_L;
                if (oT->count()) ov.log_threshold = pt_logthr;
                if (!pt_delta.empty()) {
                    ov.delta = pt_delta;
                    if (ov.delta->front() != 0.0) ov.delta->insert(ov.delta->begin(), 0.0);
                }
                ov.a_threshold_scale = pt_ascale;
                const auto reg = zml::build_regime(pt_T, pt_k, pt_K, pt_theta, ov);
                double reach = 0.0;
                for (int j = 1; j <= reg.I_index; ++j) reach = std::max(reach, sigma_reach(reg.K, reg.X(j)));
                const auto table = acquire_table(2.0 * pt_T + reach + 100.0, g, o.results);
                const auto rep = zml::measure_partition(reg, table, pt_n, g.seed);
                o.csv = std::make_unique<Csv>(std::vector<std::string>{"bucket", "estimate", "ci_low", "ci_high", "hits"});
                for (const auto& b : rep.buckets)
                    o.csv->row({b.bucket, num(b.estimate), num(b.ci_low), num(b.ci_high), std::to_string(b.hits)});
                o.results["I"] = reg.I_index;
                o.results["L"] = reg.L;
                o.results["delta"] = reg.delta;
                o.results["n_samples"] = rep.n_samples;
                o.results["uncovered"] = rep.uncovered;
                o.results["b_equivalence_failures"] = rep.b_equivalence_failures;
                o.results["total_measure"] = rep.total_measure;
                if (rep.uncovered || rep.b_equivalence_failures)
                    throw InvariantFailure("partition coverage or equivalence check failed");
                return o;
            };
        });
    }

    // random
    double rd_upto = 10.0;
    int rd_k = 1, rd_l = 1, rd_specs = 50;
    std::size_t rd_trials = 100000;
    {
        auto* rg = group("random", "random Euler product model");
        auto* mc = leaf(rg, "mc", "Monte Carlo E|sum_{p <= P} p^{-1/2} X(p)^l|^{2k}");
        auto* ex = leaf(rg, "exact", "exact E|sum_{p <= P} p^{-1/2} X(p)^l|^{2k} by orthogonality");
        auto* bc = leaf(rg, "bound-check", "moment bound E|sum a X^l|^{2k} <= k! (sum |a|^2)^k on random specs");
        for (auto* s : {mc, ex, bc}) {
            s->add_option("--k", rd_k, "half the moment order")->capture_default_str()->check(CLI::Range(1, 12));
            s->add_option("--l", rd_l, "power of X(p)")->capture_default_str();
        }
        for (auto* s : {mc, ex}) s->add_option("--primes-up-to", rd_upto, "prime cutoff P")->capture_default_str();
        for (auto* s : {mc, bc}) s->add_option("--trials", rd_trials, "Monte Carlo trials (>= 1000)")->capture_default_str();
        bc->add_option("--specs", rd_specs, "number of random coefficient specs")->capture_default_str()->check(
            CLI::PositiveNumber);

        mc->callback([&] {
            command = "random mc";
            action = [&] {
                Outcome o;
                const auto r = zml::mc_abs_moment(prime_coefficients(rd_upto), rd_k, rd_l, rd_trials, g.seed);
                o.csv = std::make_unique<Csv>(std::vector<std::string>{"k", "l", "primes_up_to", "mean", "std_error", "trials"});
                o.csv->row({std::to_string(rd_k), std::to_string(rd_l), num(rd_upto), num(r.mean), num(r.std_error),
                            std::to_string(r.trials)});
                o.results["mean"] = r.mean;
                o.results["std_error"] = r.std_error;
                return o;
            };
        });
        ex->callback([&] {
            command = "random exact";
            action = [&] {
                Outcome o;
                const auto a = prime_coefficients(rd_upto);
                if (a.size() > 6 || rd_k > 3)
                    throw CLI::ValidationError("exact evaluation supports at most 6 primes and k <= 3");
                const auto r = zml::check_moment_bound(a, rd_k, rd_l);
                o.csv = std::make_unique<Csv>(std::vector<std::string>{"k", "l", "primes_up_to", "value", "bound"});
                o.csv->row({std::to_string(rd_k), std::to_string(rd_l), num(rd_upto), num(r.value), num(r.bound)});
                o.results["value"] = r.value;
                o.results["bound"] = r.bound;
                return o;
            };
        });
        bc->callback([&] {
            command = "random bound-check";
            action = [&] {
                Outcome o;
                o.csv = std::make_unique<Csv>(
                    std::vector<std::string>{"spec", "n_primes", "value", "std_error", "bound", "exact", "violated"});
                const auto primes = zml::sieve_primes(50);
                int violations = 0;
                for (int sp = 0; sp < rd_specs; ++sp) {
                    const std::uint64_t key = zml::mix64(g.seed ^ zml::mix64(0xb0b0ULL + static_cast<std::uint64_t>(sp)));
                    const std::size_t np = 1 + zml::mix64(key) % 8;
                    std::map<std::uint64_t, zml::cdouble> a;
                    for (std::size_t i = 0; a.size() < np; ++i) {
                        const auto p = primes[zml::mix64(key + 2 * i + 1) % primes.size()];
                        const double r = zml::unit_double(zml::mix64(key + 1000 + i));
                        const double ph = 2.0 * std::numbers::pi * zml::unit_double(zml::mix64(key + 5000 + i));
                        a[p] = std::polar(r, ph);
                    }
                    const auto c = zml::check_moment_bound(a, rd_k, rd_l, rd_trials, key);
                    violations += c.violated;
                    o.csv->row({std::to_string(sp), std::to_string(a.size()), num(c.value), num(c.std_error), num(c.bound),
                                c.exact ? "1" : "0", c.violated ? "1" : "0"});
                }
                o.results["specs"] = rd_specs;
                o.results["violations"] = violations;
                if (violations) throw InvariantFailure("moment bound violated beyond 4 standard errors");
                return o;
            };
        });
    }

    // bound-eval
    double be_k = 0.1, be_theta = std::numbers::pi / 2.0, be_lambda = 2.0, be_T = 1e6, be_eps = 0.01, be_C1 = 1.0;
    std::string be_phi = "ingham";
    {
        auto* s = leaf(&app, "bound-eval", "evaluate the three-term moment bound shape and its corollary envelope");
        s->add_option("--k", be_k, "moment parameter")->capture_default_str();
        s->add_option("--theta", be_theta, "rotation angle")->capture_default_str();
        s->add_option("--lambda", be_lambda, "zero-density exponent")->capture_default_str();
        s->add_option("--phi", be_phi, "zero-density factor: ingham or selberg")->capture_default_str()->check(
            CLI::IsMember({"ingham", "selberg"}));
        s->add_option("--T", be_T, "height")->capture_default_str();
        s->add_option("--eps", be_eps, "epsilon in (0, 0.01]")->capture_default_str();
        s->add_option("--C1", be_C1, "constant C1")->capture_default_str();
        s->callback([&] {
            command = "bound-eval";
            action = [&] {
                Outcome o;
                zml::PhiSpec phi;
                phi.kind = be_phi == "selberg" ? zml::PhiKind::selberg : zml::PhiKind::ingham;
                const auto b = zml::theorem_bound_eval(be_k, be_theta, be_lambda, phi, be_T, be_eps, be_C1);
                o.csv = std::make_unique<Csv>(
                    std::vector<std::string>{"k", "theta", "T", "term_main", "term_density", "term_zero", "total", "envelope"});
                o.csv->row({num(be_k), num(be_theta), num(be_T), num(b.term_main), num(b.term_density), num(b.term_zero),
                            num(b.total), b.corollary_envelope ? num(*b.corollary_envelope) : ""});
                o.results["A"] = b.A;
                o.results["h"] = b.h;
                o.results["total"] = jnum(b.total);
                if (b.corollary_envelope) o.results["corollary_envelope"] = jnum(*b.corollary_envelope);
                return o;
            };
        });
    }

    std::vector<std::string> args(argv, argv + argc);
    try {
        args = expand_config(std::move(args));
        std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
        app.parse(std::move(rev));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (g.threads != "auto") {
        unsigned n = 0;
        auto [p, ec] = std::from_chars(g.threads.data(), g.threads.data() + g.threads.size(), n);
        if (ec != std::errc() || p != g.threads.data() + g.threads.size() || n == 0) {
            std::cerr << "error: --threads must be a positive integer or 'auto'\n";
            return 2;
        }
        zml::set_thread_count(n);
    }

    const CLI::App* selected = nullptr;
    for (const auto* l : leaves)
        if (l->parsed()) selected = l;

    json summary;
    summary["command"] = command;
    summary["parameters"] = resolved_parameters(selected);
    summary["parameters"]["cache_dir_resolved"] = resolved_cache_dir(g);
    const auto t0 = std::chrono::steady_clock::now();
    int status = 0;
    Outcome outcome;
    try {
        outcome = action();
    } catch (const InvariantFailure& e) {
        std::cerr << "invariant failure: " << e.what() << '\n';
        summary["error"] = {{"kind", "invariant"}, {"message", e.what()}};
        status = 1;
    } catch (const zml::AuditMismatchError& e) {
        std::cerr << "audit mismatch: " << e.what() << '\n';
        summary["error"] = {{"kind", e.kind()}, {"message", e.what()}, {"lo", e.lo()}, {"hi", e.hi()},
                            {"expected", e.expected()}, {"found", e.found()}};
        status = 1;
    } catch (const zml::Error& e) {
        std::cerr << "error (" << e.kind() << "): " << e.what() << '\n';
        summary["error"] = {{"kind", e.kind()}, {"message", e.what()}};
        status = 2;
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        summary["error"] = {{"kind", "usage"}, {"message", e.what()}};
        status = 2;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (outcome.csv) {
        if (g.out.empty()) {
            outcome.csv->write(std::cout);
        } else {
            std::ofstream os(g.out, std::ios::binary);
            if (!os) {
                std::cerr << "error: cannot write " << g.out << '\n';
                return 2;
            }
            outcome.csv->write(os);
        }
    }
    summary["results"] = outcome.results;
    summary["exit_status"] = status;
    summary["wall_time_s"] = wall;
    summary["timestamp"] = timestamp();
    const std::string summary_path = !g.summary.empty() ? g.summary : (!g.out.empty() ? g.out + ".json" : "");
    if (summary_path.empty()) {
        std::cerr << summary.dump(2) << '\n';
    } else {
        std::ofstream js(summary_path, std::ios::binary);
        js << summary.dump(2) << '\n';
    }
    return status;
}
