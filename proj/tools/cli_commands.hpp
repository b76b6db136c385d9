#pragma once

// Commands of the poncelet command-line tool. Each command maps a RunConfig to
// a text body (CSV or JSON), an optional JSON sidecar, and an exit code.

#include <cmath>
#include <cstdint>
#include <locale>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "poncelet/poncelet.hpp"

namespace poncelet::cli {

using nlohmann::ordered_json;

inline constexpr int exit_ok = 0;
inline constexpr int exit_invalid = 2;
inline constexpr int exit_check_failed = 3;

struct RunConfig {
    std::string command;
    double R = 1.0;
    double c = 0.0;
    double t = 0.5;
    int steps = 10;
    double theta0 = 0.0;
    std::string family = "poncelet";
    double K = 0.5;
    int points = 101;
    int n_min = 3;
    int n_max = 12;
    std::string x;
    int random = 0;
    int terms = 25;
    std::uint64_t seed = 1;
    double eps = 0.5;
    std::optional<double> tau;
    std::string out;
    std::string format;  ///< empty: the command's default
    std::optional<double> tol;
};

struct CommandResult {
    std::string body;
    std::string sidecar;  ///< JSON verdict accompanying a CSV table, may be empty
    int exit_code = exit_ok;
    std::string error;    ///< message for exit_invalid
};

inline ordered_json to_json(const RunConfig& cfg) {
    ordered_json j;
    j["command"] = cfg.command;
    j["R"] = cfg.R;
    j["c"] = cfg.c;
    j["t"] = cfg.t;
    j["steps"] = cfg.steps;
    j["theta0"] = cfg.theta0;
    j["family"] = cfg.family;
    j["K"] = cfg.K;
    j["points"] = cfg.points;
    j["n_min"] = cfg.n_min;
    j["n_max"] = cfg.n_max;
    j["x"] = cfg.x;
    j["random"] = cfg.random;
    j["terms"] = cfg.terms;
    j["seed"] = cfg.seed;
    j["eps"] = cfg.eps;
    j["tau"] = cfg.tau ? ordered_json(*cfg.tau) : ordered_json(nullptr);
    j["out"] = cfg.out;
    j["format"] = cfg.format;
    j["tol"] = cfg.tol ? ordered_json(*cfg.tol) : ordered_json(nullptr);
    return j;
}

/// CSV writer: header row, `.` decimal point, 17 significant digits for reals.
class CsvWriter {
public:
    explicit CsvWriter(const std::vector<std::string>& header) {
        out_.imbue(std::locale::classic());
        out_.precision(17);
        row(header);
    }

    template <class... Ts>
    void values(const Ts&... vs) {
        bool first = true;
        ((write_sep(first), write(vs)), ...);
        out_ << "\r\n";
    }

    std::string str() const { return out_.str(); }

private:
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            out_ << (i ? "," : "") << quote(cells[i]);
        }
        out_ << "\r\n";
    }

    void write_sep(bool& first) {
        if (!first) {
            out_ << ',';
        }
        first = false;
    }

    void write(double v) { out_ << v; }
    void write(int v) { out_ << v; }
    void write(long long v) { out_ << v; }
    void write(std::size_t v) { out_ << v; }
    void write(bool v) { out_ << (v ? "true" : "false"); }
    void write(const std::string& v) { out_ << quote(v); }
    void write(const char* v) { out_ << quote(v); }

    static std::string quote(const std::string& s) {
        if (s.find_first_of(",\"\r\n") == std::string::npos) {
            return s;
        }
        std::string q = "\"";
        for (char ch : s) {
            q += ch;
            if (ch == '"') {
                q += '"';
            }
        }
        return q + "\"";
    }

    std::ostringstream out_;
};

inline std::string resolved_format(const RunConfig& cfg, const char* fallback) {
    const std::string f = cfg.format.empty() ? fallback : cfg.format;
    if (f != "csv" && f != "json") {
        throw InvalidConfig("format must be csv or json");
    }
    return f;
}

inline std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

inline ordered_json to_json(const RotationEstimate& e) {
    ordered_json j;
    j["value"] = e.value;
    j["error_radius"] = e.error_radius;
    j["iterations"] = e.iterations;
    if (e.lock) {
        j["lock"] = {{"p", e.lock->p}, {"q", e.lock->q}, {"x0", e.lock->x0}, {"residual", e.lock->residual}};
    } else {
        j["lock"] = nullptr;
    }
    return j;
}

// ---------------------------------------------------------------------------

/// Rows (k, theta_k, phi_k, x_k, y_k, residual) of the billiard orbit tangent to
/// the circle of radius t; the residual is the distance from the invariant circle.
inline CommandResult cmd_orbit(const RunConfig& cfg) {
    if (cfg.steps < 0) {
        throw InvalidConfig("steps must be nonnegative");
    }
    const PonceletConfig geo{cfg.R, cfg.c, cfg.t};
    const auto circle = invariant_circle_phi(geo);
    const std::string format = resolved_format(cfg, "csv");

    AngleState s = AngleState::reduced(cfg.theta0, 0.0);
    s.phi = poncelet_map_geometric(s.theta, geo).phi;
    double max_residual = 0.0;
    CsvWriter csv{{"k", "theta", "phi", "x", "y", "residual"}};
    ordered_json rows = ordered_json::array();
    for (int k = 0; k <= cfg.steps; ++k) {
        const TorusPoint p = to_torus(s);
        const double residual = circle.residual(p);
        max_residual = std::max(max_residual, residual);
        if (format == "csv") {
            csv.values(k, s.theta, s.phi, p.x, p.y, residual);
        } else {
            rows.push_back({{"k", k}, {"theta", s.theta}, {"phi", s.phi}, {"x", p.x}, {"y", p.y}, {"residual", residual}});
        }
        s = poncelet_map_analytic(s, geo).state;
    }
    CommandResult res;
    res.exit_code = max_residual < 1e-9 ? exit_ok : exit_check_failed;
    if (format == "csv") {
        res.body = csv.str();
    } else {
        ordered_json j;
        j["config"] = to_json(cfg);
        j["rows"] = rows;
        j["max_residual"] = max_residual;
        res.body = dump(j);
    }
    return res;
}

// ---------------------------------------------------------------------------

/// Family selected by name, increasing or decreasing in its own parameter.
inline MonotoneCircleFamily select_family(const RunConfig& cfg) {
    if (cfg.family == "poncelet") {
        return poncelet_family(cfg.R, cfg.c);
    }
    if (cfg.family == "arnold") {
        return arnold_family(cfg.K);
    }
    if (cfg.family == "rigid") {
        return rigid_family();
    }
    throw InvalidConfig("family must be poncelet, arnold or rigid");
}

inline CommandResult cmd_staircase(const RunConfig& cfg) {
    if (cfg.points < 2) {
        throw InvalidConfig("staircase needs at least two points");
    }
    const auto family = select_family(cfg);
    const std::string format = resolved_format(cfg, "csv");
    const double tol = cfg.tol.value_or(1e-6);
    const auto report = staircase(family, linear_grid(family.a, family.b, static_cast<std::size_t>(cfg.points)), tol);

    std::size_t locked = 0;
    for (const auto& s : report.samples) {
        locked += s.estimate.locked() ? 1 : 0;
    }
    ordered_json verdict;
    verdict["config"] = to_json(cfg);
    verdict["family"] = family.name;
    verdict["direction"] = to_string(report.direction);
    verdict["monotone"] = report.monotone;
    verdict["violations"] = report.violations;
    verdict["locked_samples"] = locked;

    CommandResult res;
    res.exit_code = report.monotone ? exit_ok : exit_check_failed;
    if (format == "csv") {
        CsvWriter csv{{"t", "r", "error_radius", "lock_p", "lock_q"}};
        for (const auto& s : report.samples) {
            const auto& e = s.estimate;
            csv.values(s.t, e.value, e.error_radius, e.lock ? std::to_string(e.lock->p) : std::string{},
                       e.lock ? std::to_string(e.lock->q) : std::string{});
        }
        res.body = csv.str();
        res.sidecar = dump(verdict);
    } else {
        ordered_json samples = ordered_json::array();
        for (const auto& s : report.samples) {
            ordered_json row = to_json(s.estimate);
            row["t"] = s.t;
            samples.push_back(row);
        }
        verdict["samples"] = samples;
        res.body = dump(verdict);
    }
    return res;
}

// ---------------------------------------------------------------------------

inline CommandResult cmd_count(const RunConfig& cfg) {
    if (cfg.n_min < 3 || cfg.n_max < cfg.n_min) {
        throw InvalidConfig("count needs 3 <= n-min <= n-max");
    }
    const std::string format = resolved_format(cfg, "json");
    CountOptions opts;
    opts.tol = cfg.tol.value_or(opts.tol);
    opts.seed = cfg.seed;

    std::vector<int> ns;
    for (int n = cfg.n_min; n <= cfg.n_max; ++n) {
        ns.push_back(n);
    }
    const auto reports = parallel_map(ns, [&](int n) { return count_poncelet_pairs(cfg.R, cfg.c, n, opts); });
    bool all_pass = true;
    for (const auto& r : reports) {
        all_pass = all_pass && r.pass;
    }

    CommandResult res;
    res.exit_code = all_pass ? exit_ok : exit_check_failed;
    if (format == "csv") {
        CsvWriter csv{{"n", "p", "t", "closure_residual", "expected", "count", "pass"}};
        for (const auto& r : reports) {
            for (const auto& pair : r.pairs) {
                csv.values(r.n, pair.p, pair.t, pair.closure_residual, r.expected, r.pairs.size(), r.pass);
            }
        }
        res.body = csv.str();
        return res;
    }
    ordered_json j;
    j["config"] = to_json(cfg);
    ordered_json per_n = ordered_json::array();
    for (const auto& r : reports) {
        ordered_json item;
        item["n"] = r.n;
        item["expected"] = r.expected;
        item["count"] = r.pairs.size();
        item["pass"] = r.pass;
        item["r_inner"] = to_json(r.r_inner);
        item["r_outer"] = to_json(r.r_outer);
        ordered_json pairs = ordered_json::array();
        for (std::size_t i = 0; i < r.pairs.size(); ++i) {
            const auto& pair = r.pairs[i];
            const auto& cl = r.closures[i];
            pairs.push_back({{"p", pair.p},
                             {"t", pair.t},
                             {"closure_residual", pair.closure_residual},
                             {"min_early_distance", cl.min_early_distance},
                             {"winding_ok", cl.winding_ok},
                             {"closed", cl.ok()}});
        }
        item["pairs"] = pairs;
        per_n.push_back(item);
    }
    j["results"] = per_n;
    j["all_pass"] = all_pass;
    res.body = dump(j);
    return res;
}

// ---------------------------------------------------------------------------

/// A parsed `--x` value: a floating number, or an exact rational written p/q.
struct CfInput {
    std::string label;
    double value = 0.0;
    std::optional<Rational> exact;
};

inline CfInput parse_cf_input(const std::string& text) {
    if (text == "golden") {
        return {text, (std::sqrt(5.0) - 1.0) / 2.0, std::nullopt};
    }
    const auto slash = text.find('/');
    try {
        if (slash != std::string::npos) {
            const BigInt p{text.substr(0, slash)};
            const BigInt q{text.substr(slash + 1)};
            if (q == 0) {
                throw InvalidConfig("denominator must be nonzero");
            }
            const Rational r{p, q};
            return {text, r.convert_to<double>(), r};
        }
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size() || !std::isfinite(v)) {
            throw InvalidConfig("not a number: " + text);
        }
        return {text, v, std::nullopt};
    } catch (const InvalidConfig&) {
        throw;
    } catch (const std::exception&) {
        throw InvalidConfig("cannot parse --x value '" + text + "'");
    }
}

inline ordered_json cf_report(const CfInput& in, const RunConfig& cfg, std::size_t& violations) {
    ordered_json j;
    j["x"] = in.label;
    j["value"] = in.value;
    const auto terms = static_cast<std::size_t>(cfg.terms);
    ContinuedFractionExpansion cf;
    if (in.exact) {
        cf = cf_expand(*in.exact, terms + 1);
    } else {
        try {
            cf = cf_expand(in.value, terms + 1, Exhaustion::raise);
        } catch (const PrecisionExhausted& e) {
            j["precision_note"] = e.what();
            cf = cf_expand(in.value, terms + 1, Exhaustion::truncate);
        }
    }
    j["a0"] = to_string(cf.a0);
    ordered_json quotients = ordered_json::array();
    for (const auto& a : cf.partial_quotients) {
        quotients.push_back(to_string(a));
    }
    j["quotients"] = quotients;
    ordered_json convs = ordered_json::array();
    for (const auto& c : cf.convergents) {
        convs.push_back({{"p", to_string(c.p)}, {"q", to_string(c.q)}});
    }
    j["convergents"] = convs;
    j["terminated"] = cf.terminated;
    j["precision_limited"] = cf.precision_limited;

    ordered_json records = ordered_json::array();
    if (in.value > 0.0 && in.value < 1.0 && !in.exact) {
        const auto series = remainder_series(in.value, terms);
        for (const auto& r : series.records) {
            records.push_back({{"n", r.n},
                               {"log_qn", r.log_qn},
                               {"gauss_sum", r.gauss_sum},
                               {"remainder", r.remainder},
                               {"within_bound", r.within_bound}});
        }
        violations += series.violations;
        j["bound_violations"] = series.violations;

        ordered_json pairs = ordered_json::array();
        for (const auto& pr : find_balanced_pairs(in.value, cfg.eps, terms)) {
            pairs.push_back({{"index", pr.index},
                             {"excess", to_string(pr.excess.p) + "/" + to_string(pr.excess.q)},
                             {"defect", to_string(pr.defect.p) + "/" + to_string(pr.defect.q)},
                             {"ratio", pr.ratio},
                             {"gap_flag", pr.gap_flag}});
        }
        j["pairs"] = pairs;
    } else {
        j["bound_violations"] = 0;
        j["pairs"] = ordered_json::array();
    }
    j["remainders"] = records;
    return j;
}

inline CommandResult cmd_cf(const RunConfig& cfg) {
    if (cfg.terms < 1) {
        throw InvalidConfig("terms must be positive");
    }
    if (cfg.x.empty() == (cfg.random <= 0)) {
        throw InvalidConfig("give exactly one of --x or --random N");
    }
    if (!(cfg.eps > 0.0 && cfg.eps < 1.0)) {
        throw InvalidConfig("eps must lie in (0, 1)");
    }
    const std::string format = resolved_format(cfg, "json");
    std::vector<CfInput> inputs;
    if (!cfg.x.empty()) {
        inputs.push_back(parse_cf_input(cfg.x));
    } else {
        std::mt19937_64 rng{cfg.seed};
        for (int i = 0; i < cfg.random; ++i) {
            const double v = uniform_open_dyadic(rng);
            std::ostringstream label;
            label.imbue(std::locale::classic());
            label.precision(17);
            label << v;
            inputs.push_back({label.str(), v, std::nullopt});
        }
    }
    std::size_t violations = 0;
    ordered_json reports = ordered_json::array();
    for (const auto& in : inputs) {
        reports.push_back(cf_report(in, cfg, violations));
    }

    CommandResult res;
    res.exit_code = violations == 0 ? exit_ok : exit_check_failed;
    if (format == "csv") {
        CsvWriter csv{{"sample", "x", "n", "a_n", "p_n", "q_n", "remainder", "within_bound"}};
        for (std::size_t i = 0; i < reports.size(); ++i) {
            const auto& r = reports[i];
            const auto& convs = r["convergents"];
            for (std::size_t n = 0; n < convs.size(); ++n) {
                const std::string a = n == 0 ? r["a0"].get<std::string>() : r["quotients"][n - 1].get<std::string>();
                std::string rem;
                std::string ok;
                for (const auto& rec : r["remainders"]) {
                    if (rec["n"].get<std::size_t>() == n) {
                        std::ostringstream s;
                        s.imbue(std::locale::classic());
                        s.precision(17);
                        s << rec["remainder"].get<double>();
                        rem = s.str();
                        ok = rec["within_bound"].get<bool>() ? "true" : "false";
                    }
                }
                csv.values(i, r["x"].get<std::string>(), n, a, convs[n]["p"].get<std::string>(),
                           convs[n]["q"].get<std::string>(), rem, ok);
            }
        }
        res.body = csv.str();
        return res;
    }
    ordered_json j;
    j["config"] = to_json(cfg);
    j["F"] = fibonacci_constant();
    j["K_eps"] = k_epsilon(cfg.eps);
    j["reports"] = reports;
    j["bound_violations"] = violations;
    res.body = dump(j);
    return res;
}

// ---------------------------------------------------------------------------

/// The selected family, oriented so that r increases in the parameter. For the
/// Poncelet family the parameter is s = -t.
inline MonotoneCircleFamily increasing_family(const RunConfig& cfg) {
    auto fam = select_family(cfg);
    return cfg.family == "poncelet" ? reversed(fam) : fam;
}

inline CommandResult cmd_prop2(const RunConfig& cfg) {
    const auto family = increasing_family(cfg);
    const std::string format = resolved_format(cfg, "json");
    const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
    double tau = 0.0;
    if (cfg.tau) {
        tau = cfg.family == "poncelet" ? -*cfg.tau : *cfg.tau;
    } else if (cfg.family == "rigid") {
        tau = golden;
    } else {
        // Heuristic irrational: golden mean, or its conjugate share 1 - golden for families with r < 1/2.
        const auto lo = rotation_number(family.lift(family.a), 0.0, 1e-6);
        const auto hi = rotation_number(family.lift(family.b), 0.0, 1e-6);
        const double target = golden < hi.lower() && golden > lo.upper() ? golden : 1.0 - golden;
        tau = locate_rotation(family, target, family.a, family.b);
    }
    SecondOrderOptions opts;
    opts.tol = cfg.tol.value_or(1e-6);
    opts.epsilon = cfg.eps;
    const auto rep = second_order_estimate(family, tau, opts);

    CommandResult res;
    res.exit_code = rep.applicable && !rep.pass ? exit_check_failed : exit_ok;
    if (format == "csv") {
        CsvWriter csv{{"delta", "t1", "t2", "ratio", "from_convergents", "excess", "defect"}};
        for (const auto& s : rep.samples) {
            csv.values(s.delta, s.t1, s.t2, s.ratio, s.from_convergents, s.excess, s.defect);
        }
        res.body = csv.str();
        ordered_json verdict;
        verdict["config"] = to_json(cfg);
        verdict["status"] = rep.status;
        verdict["best_ratio"] = rep.applicable ? ordered_json(rep.best_ratio) : ordered_json(nullptr);
        verdict["bound"] = rep.bound;
        res.sidecar = dump(verdict);
        return res;
    }
    ordered_json j;
    j["config"] = to_json(cfg);
    j["family"] = family.name;
    j["tau"] = rep.tau;
    j["r_tau"] = to_json(rep.r_tau);
    j["m"] = rep.m;
    j["epsilon"] = rep.epsilon;
    j["bound"] = rep.bound;
    j["applicable"] = rep.applicable;
    j["best_ratio"] = rep.applicable ? ordered_json(rep.best_ratio) : ordered_json(nullptr);
    j["pass"] = rep.pass;
    j["status"] = rep.status;
    ordered_json samples = ordered_json::array();
    for (const auto& s : rep.samples) {
        samples.push_back({{"delta", s.delta},
                           {"t1", s.t1},
                           {"t2", s.t2},
                           {"ratio", s.ratio},
                           {"from_convergents", s.from_convergents},
                           {"excess", s.excess},
                           {"defect", s.defect}});
    }
    j["samples"] = samples;
    j["running_best"] = rep.running_best;
    res.body = dump(j);
    return res;
}

// ---------------------------------------------------------------------------

/// Dispatches on cfg.command; configuration errors become exit code 2 with the message as body.
inline CommandResult run(const RunConfig& cfg) {
    try {
        if (cfg.command == "orbit") {
            return cmd_orbit(cfg);
        }
        if (cfg.command == "staircase") {
            return cmd_staircase(cfg);
        }
        if (cfg.command == "count") {
            return cmd_count(cfg);
        }
        if (cfg.command == "cf") {
            return cmd_cf(cfg);
        }
        if (cfg.command == "prop2") {
            return cmd_prop2(cfg);
        }
        throw InvalidConfig("unknown command '" + cfg.command + "'");
    } catch (const InvalidConfig& e) {
        return {{}, {}, exit_invalid, e.what()};
    } catch (const DegenerateTangency& e) {
        return {{}, {}, exit_invalid, e.what()};
    }
}

} // namespace poncelet::cli
