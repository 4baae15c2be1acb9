/**
 * @file cli.hpp
 * @brief Command-line front end: configuration merging, scenario dispatch, output.
 *
 * Precedence is flags over config file over scenario defaults. Exit codes:
 * 0 when every hard check passes, 1 on a hard failure or runtime error,
 * 2 on a usage error.
 */
#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fnlab/experiments.hpp"
#include "fnlab/parallel.hpp"
#include "fnlab/report.hpp"

namespace fnlab::cli {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string scenario;
    std::uint64_t seed = 0;
    std::optional<int> radius;
    std::optional<std::vector<int>> radii;
    std::optional<std::vector<Index>> dims;
    std::optional<std::vector<std::uint64_t>> seeds;
    std::optional<std::size_t> levels;
    std::optional<std::vector<double>> t_grid;
    std::optional<std::vector<double>> s_grid;
    std::optional<double> t;
    std::optional<double> tol;
    std::optional<double> check_tol;
    std::optional<Index> sigma_dim;
    std::optional<Index> contrast_dim;
    std::optional<bool> compare_doubled;
    int threads = default_thread_count();
    std::string out;
    std::string format = "json";
};

/// Subcommand name -> report id.
inline const std::vector<std::pair<std::string, std::string>>& scenario_names() {
    static const std::vector<std::pair<std::string, std::string>> names{
        {"kesten", "scn_kesten"},
        {"haagerup", "scn_haagerup"},
        {"fell", "scn_fell"},
        {"tensor-bound", "scn_tensor_bound"},
        {"rho-flatness", "scn_rho_flatness"},
        {"m-decomp", "scn_M_decomposition"},
        {"equicont", "scn_equicontinuity"},
        {"replike", "scn_replike_refutation"},
        {"semiinv", "scn_semiinv"},
    };
    return names;
}

/// Accepts a subcommand name or a report id; returns the subcommand name or "all".
inline std::string canonical_scenario(const std::string& name) {
    if (name == "all") return name;
    for (const auto& [cmd, id] : scenario_names()) {
        if (name == cmd || name == id) return cmd;
    }
    throw UsageError("unknown scenario '" + name + "'");
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& key, const std::string& v) {
    std::vector<std::string> parts;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw UsageError("--" + key + ": empty list entry in '" + v + "'");
        parts.push_back(item);
    }
    if (parts.empty()) throw UsageError("--" + key + ": empty list");
    return parts;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
    const std::string s = trim(text);
    T value{};
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if constexpr (std::is_unsigned_v<T>) {
        if (!s.empty() && s[0] == '-') throw UsageError("--" + key + ": expected a nonnegative integer, got '" + s + "'");
    }
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (s.empty() || ec != std::errc{} || ptr != last) throw UsageError("--" + key + ": malformed value '" + s + "'");
    return value;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
    std::vector<T> out;
    for (const auto& item : split_list(key, text)) out.push_back(parse_number<T>(key, item));
    return out;
}

inline void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw UsageError("--" + key + ": " + what);
}

}  // namespace detail

/// Keys accepted on the command line (as --key) and in config files.
inline const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{"seed",  "radius",      "radii",     "dims",         "seeds",
                                               "levels", "t-grid",     "s-grid",    "t",            "tol",
                                               "check-tol", "sigma-dim", "contrast-dim", "compare-doubled", "threads",
                                               "out",   "format"};
    return keys;
}

/// Parses and validates one key, storing it into cfg.
inline void apply_key(RunConfig& cfg, const std::string& key, const std::string& value) {
    using detail::parse_list;
    using detail::parse_number;
    using detail::require;
    if (key == "seed") {
        cfg.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "radius") {
        const int r = parse_number<int>(key, value);
        require(r >= 1, key, "radius must be at least 1");
        cfg.radius = r;
    } else if (key == "radii") {
        const auto v = parse_list<int>(key, value);
        for (int r : v) require(r >= 0, key, "radii must be nonnegative");
        cfg.radii = v;
    } else if (key == "dims") {
        const auto v = parse_list<Index>(key, value);
        for (Index d : v) require(d >= 1, key, "dimensions must be positive");
        cfg.dims = v;
    } else if (key == "seeds") {
        cfg.seeds = parse_list<std::uint64_t>(key, value);
    } else if (key == "levels") {
        const auto l = parse_number<long long>(key, value);
        require(l >= 2, key, "need at least two levels");
        cfg.levels = static_cast<std::size_t>(l);
    } else if (key == "t-grid") {
        const auto v = parse_list<double>(key, value);
        for (double t : v) require(t >= 0.0, key, "t values must be nonnegative");
        cfg.t_grid = v;
    } else if (key == "s-grid") {
        const auto v = parse_list<double>(key, value);
        for (double s : v) require(s >= 0.0 && s <= 1.0, key, "s values must lie in [0, 1]");
        cfg.s_grid = v;
    } else if (key == "t") {
        const double t = parse_number<double>(key, value);
        require(t >= 0.0, key, "t must be nonnegative");
        cfg.t = t;
    } else if (key == "tol") {
        const double t = parse_number<double>(key, value);
        require(t > 0.0, key, "tolerance must be positive");
        cfg.tol = t;
    } else if (key == "check-tol") {
        const double t = parse_number<double>(key, value);
        require(t >= 0.0, key, "tolerance must be nonnegative");
        cfg.check_tol = t;
    } else if (key == "sigma-dim") {
        const auto d = parse_number<Index>(key, value);
        require(d >= 1, key, "dimension must be positive");
        cfg.sigma_dim = d;
    } else if (key == "contrast-dim") {
        const auto d = parse_number<Index>(key, value);
        require(d >= 0, key, "dimension must be nonnegative");
        cfg.contrast_dim = d;
    } else if (key == "compare-doubled") {
        const std::string v = detail::trim(value);
        require(v == "true" || v == "false" || v == "1" || v == "0", key, "expected true or false, got '" + v + "'");
        cfg.compare_doubled = (v == "true" || v == "1");
    } else if (key == "threads") {
        const int n = parse_number<int>(key, value);
        require(n >= 1, key, "need at least one thread");
        cfg.threads = n;
    } else if (key == "out") {
        cfg.out = detail::trim(value);
    } else if (key == "format") {
        const std::string v = detail::trim(value);
        require(v == "json" || v == "csv", key, "expected json or csv, got '" + v + "'");
        cfg.format = v;
    } else {
        throw UsageError("unknown key '" + key + "'");
    }
}

/// Flat `key = value` lines; '#' starts a comment.
inline std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("--config: cannot open '" + path + "'");
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key = detail::trim(line.substr(0, eq));
        if (std::find(config_keys().begin(), config_keys().end(), key) == config_keys().end()) {
            throw UsageError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
        entries.emplace_back(key, detail::trim(line.substr(eq + 1)));
    }
    return entries;
}

/// argv[1..] -> RunConfig. Throws UsageError; a request for help throws CLI::CallForHelp.
inline RunConfig parse_config(const std::vector<std::string>& args) {
    CLI::App app{"fnlab: norm experiments for the free group on two generators", "fnlab"};
    std::vector<std::string> positional;
    std::string config_path;
    std::map<std::string, std::string> flags;
    app.add_option("scenario", positional, "kesten | haagerup | fell | tensor-bound | rho-flatness | m-decomp | "
                                           "equicont | replike | semiinv | all, or: run <scn_id>");
    app.add_option("--config", config_path, "flat key = value file");
    for (const auto& key : config_keys()) {
        app.add_option("--" + key, flags[key])->type_name("VALUE");
    }
    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::CallForHelp&) {
        throw;
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    RunConfig cfg;
    if (positional.empty()) throw UsageError("missing scenario name");
    std::size_t used = 1;
    if (positional[0] == "run") {
        if (positional.size() < 2) throw UsageError("run: missing scenario id");
        cfg.scenario = canonical_scenario(positional[1]);
        used = 2;
    } else {
        cfg.scenario = canonical_scenario(positional[0]);
    }
    if (positional.size() > used) throw UsageError("unexpected argument '" + positional[used] + "'");

    if (!config_path.empty()) {
        for (const auto& [k, v] : read_config_file(config_path)) apply_key(cfg, k, v);
    }
    for (const auto& key : config_keys()) {
        if (app.get_option("--" + key)->count() > 0) apply_key(cfg, key, flags[key]);
    }
    return cfg;
}

inline NormOptions norm_options(const RunConfig& c) {
    NormOptions o;
    if (c.tol) o.tol = *c.tol;
    o.seed = rng::derive_seed(c.seed, 0x6e6f726d);
    return o;
}

inline TowerConfig tower_config(const RunConfig& c) {
    TowerConfig t;
    t.seed = c.seed;
    if (c.radius) t.radius = *c.radius;
    if (c.dims) t.dims = *c.dims;
    try {
        t.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return t;
}

/// Runs one scenario by subcommand name with the configured overrides.
inline ExperimentReport run_scenario(const std::string& name, const RunConfig& c) {
    const NormOptions norm = norm_options(c);
    if (name == "kesten") {
        KestenParams p;
        if (c.radii) {
            p.radii = *c.radii;
        } else if (c.radius) {
            p.radii = {*c.radius};
        }
        if (c.levels) p.levels = *c.levels;
        p.norm = norm;
        return scn_kesten(p);
    }
    if (name == "haagerup") {
        HaagerupParams p;
        if (c.dims) p.dims = *c.dims;
        if (c.seeds) p.seeds = *c.seeds;
        if (c.levels) p.levels = *c.levels;
        if (c.radius) p.reference_radius = *c.radius;
        p.seed = c.seed;
        p.norm = norm;
        p.threads = c.threads;
        return scn_haagerup(p);
    }
    if (name == "fell") {
        FellParams p;
        if (c.radius) p.radius = *c.radius;
        if (c.sigma_dim) p.sigma_dim = *c.sigma_dim;
        if (c.seeds) p.seeds = *c.seeds;
        if (c.check_tol) p.check_tol = *c.check_tol;
        p.seed = c.seed;
        p.norm = norm;
        return scn_fell(p);
    }
    if (name == "tensor-bound") {
        TensorBoundParams p;
        if (c.dims) p.dims = *c.dims;
        if (c.contrast_dim) p.contrast_dim = *c.contrast_dim;
        p.seed = c.seed;
        p.norm = norm;
        return scn_tensor_bound(p);
    }
    if (name == "rho-flatness") {
        FlatnessParams p;
        p.tower = tower_config(c);
        if (c.t_grid) p.t_grid = *c.t_grid;
        if (c.compare_doubled) p.compare_doubled = *c.compare_doubled;
        p.norm = norm;
        p.threads = c.threads;
        return scn_rho_flatness(p);
    }
    if (name == "m-decomp") {
        MDecompParams p;
        p.tower = tower_config(c);
        if (c.t) p.t = *c.t;
        p.norm = norm;
        p.threads = c.threads;
        return scn_M_decomposition(p);
    }
    if (name == "equicont") {
        EquicontParams p;
        if (c.radius) p.radius = *c.radius;
        if (c.sigma_dim) p.sigma_dim = *c.sigma_dim;
        if (c.s_grid) p.s_grid = *c.s_grid;
        p.seed = c.seed;
        p.norm = norm;
        p.threads = c.threads;
        return scn_equicontinuity(p);
    }
    if (name == "replike") {
        ReplikeParams p;
        p.tower = tower_config(c);
        if (c.t_grid) p.t_grid = *c.t_grid;
        if (c.levels) p.levels = *c.levels;
        p.norm = norm;
        p.threads = c.threads;
        return scn_replike_refutation(p);
    }
    if (name == "semiinv") {
        SemiinvParams p;
        p.tower = tower_config(c);
        if (c.t) p.t = *c.t;
        return scn_semiinv(p);
    }
    throw UsageError("unknown scenario '" + name + "'");
}

inline std::vector<ExperimentReport> run_all(const RunConfig& c) {
    std::vector<ExperimentReport> reports;
    if (c.scenario == "all") {
        for (const auto& [cmd, id] : scenario_names()) reports.push_back(run_scenario(cmd, c));
    } else {
        reports.push_back(run_scenario(c.scenario, c));
    }
    return reports;
}

inline void write_reports(std::ostream& os, const std::vector<ExperimentReport>& reports, const std::string& format) {
    if (format == "csv") {
        write_csv(os, reports);
    } else {
        os << reports_to_json(reports).dump(2) << '\n';
    }
}

/// Runs the configured scenarios and writes the report; returns the process exit code.
inline int dispatch(const RunConfig& c, std::ostream& log = std::cerr) {
    std::vector<ExperimentReport> reports;
    try {
        reports = run_all(c);
    } catch (const UsageError& e) {
        log << "fnlab: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        log << "fnlab: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        log << "fnlab: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        log << "fnlab: error: " << e.what() << '\n';
        return 1;
    }
    if (c.out.empty()) {
        write_reports(std::cout, reports, c.format);
    } else {
        std::ofstream f(c.out, std::ios::binary);
        if (!f) {
            log << "fnlab: cannot write '" << c.out << "'\n";
            return 1;
        }
        write_reports(f, reports, c.format);
    }
    bool ok = true;
    for (const auto& r : reports) {
        ok = ok && r.hard_passed();
        log << r.scenario() << ": " << (r.hard_passed() ? "pass" : "FAIL");
        if (r.warnings() > 0) log << " (" << r.warnings() << " warning" << (r.warnings() > 1 ? "s" : "") << ")";
        log << "  " << r.wall_time << " s\n";
        for (const auto& ch : r.checks) {
            if (!ch.passed) {
                log << "  " << (ch.severity == Severity::hard ? "failed" : "warning") << ": " << ch.name << " value "
                    << ch.value << " bound " << ch.bound << '\n';
            }
        }
    }
    return ok ? 0 : 1;
}

inline int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    RunConfig cfg;
    try {
        cfg = parse_config(args);
    } catch (const CLI::CallForHelp&) {
        std::cout << "usage: fnlab <scenario> [--seed N] [--radius R] [--radii list] [--dims list] [--seeds list]\n"
                     "             [--levels L] [--t-grid list] [--s-grid list] [--t T] [--tol X] [--check-tol X]\n"
                     "             [--sigma-dim D] [--contrast-dim D] [--compare-doubled BOOL] [--threads N]\n"
                     "             [--out FILE] [--format json|csv] [--config FILE]\n"
                     "scenarios: kesten haagerup fell tensor-bound rho-flatness m-decomp equicont replike semiinv all\n"
                     "           (or: run scn_kesten, ...)\n";
        return 0;
    } catch (const UsageError& e) {
        std::cerr << "fnlab: usage error: " << e.what() << '\n';
        return 2;
    }
    return dispatch(cfg);
}

}  // namespace fnlab::cli
