/**
 * @file report.hpp
 * @brief Structured scenario output: parameters, measurement rows, checks.
 *
 * Everything except the "metadata" object is a pure function of the scenario
 * parameters, so two runs with the same parameters serialize identically once
 * metadata is dropped.
 */
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fnlab/normest.hpp"

namespace fnlab {

inline constexpr const char* report_schema = "free-norm-lab/1";

using ojson = nlohmann::ordered_json;

enum class Severity { hard, soft };

struct Check {
    std::string name;
    Severity severity = Severity::hard;
    bool passed = false;
    double value = 0.0;
    double bound = 0.0;
    std::string detail;
};

class ExperimentReport {
public:
    explicit ExperimentReport(std::string scenario = {}) : scenario_(std::move(scenario)) {}

    [[nodiscard]] const std::string& scenario() const noexcept { return scenario_; }

    ojson params = ojson::object();
    std::vector<std::uint64_t> seeds;
    std::vector<ojson> rows;
    ojson summary = ojson::object();
    std::vector<Check> checks;
    double wall_time = 0.0;

    Check& check(std::string name, Severity severity, bool passed, double value = 0.0, double bound = 0.0,
                 std::string detail = {}) {
        checks.push_back({std::move(name), severity, passed, value, bound, std::move(detail)});
        return checks.back();
    }
    /// value <= bound
    Check& check_le(std::string name, Severity severity, double value, double bound, std::string detail = {}) {
        return check(std::move(name), severity, value <= bound, value, bound, std::move(detail));
    }
    /// value >= bound
    Check& check_ge(std::string name, Severity severity, double value, double bound, std::string detail = {}) {
        return check(std::move(name), severity, value >= bound, value, bound, std::move(detail));
    }

    [[nodiscard]] bool hard_passed() const {
        for (const auto& c : checks) {
            if (c.severity == Severity::hard && !c.passed) return false;
        }
        return true;
    }
    [[nodiscard]] std::size_t warnings() const {
        std::size_t n = 0;
        for (const auto& c : checks) n += (c.severity == Severity::soft && !c.passed) ? 1 : 0;
        return n;
    }
    [[nodiscard]] const Check* find_check(const std::string& name) const {
        for (const auto& c : checks) {
            if (c.name == name) return &c;
        }
        return nullptr;
    }

    [[nodiscard]] ojson to_json(bool with_metadata = true) const {
        ojson j;
        j["schema"] = report_schema;
        j["scenario"] = scenario_;
        j["params"] = params;
        j["seeds"] = seeds;
        j["summary"] = summary;
        j["rows"] = rows;
        auto cs = ojson::array();
        for (const auto& c : checks) {
            cs.push_back({{"name", c.name},
                          {"severity", c.severity == Severity::hard ? "hard" : "soft"},
                          {"passed", c.passed},
                          {"value", finite_or_null(c.value)},
                          {"bound", finite_or_null(c.bound)},
                          {"detail", c.detail}});
        }
        j["checks"] = cs;
        j["passed"] = hard_passed();
        j["warnings"] = warnings();
        if (with_metadata) j["metadata"] = {{"wall_time_s", wall_time}};
        return j;
    }

    static ojson finite_or_null(double x) { return std::isfinite(x) ? ojson(x) : ojson(nullptr); }

private:
    std::string scenario_;
};

/// Times a scenario body and stores the elapsed seconds in the report metadata.
template <class F>
ExperimentReport timed(F&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentReport r = body();
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

inline ojson estimate_json(const NormEstimate& e) {
    return {{"norm", e.value},
            {"certified_lower", e.certified_lower},
            {"method", to_string(e.method)},
            {"iterations", e.iterations},
            {"residual", e.residual},
            {"converged", e.converged}};
}

/// One document for one or more reports.
inline ojson reports_to_json(const std::vector<ExperimentReport>& reports, bool with_metadata = true) {
    if (reports.size() == 1) return reports.front().to_json(with_metadata);
    ojson j;
    j["schema"] = report_schema;
    auto arr = ojson::array();
    bool ok = true;
    double total = 0.0;
    for (const auto& r : reports) {
        arr.push_back(r.to_json(with_metadata));
        ok = ok && r.hard_passed();
        total += r.wall_time;
    }
    j["reports"] = arr;
    j["passed"] = ok;
    if (with_metadata) j["metadata"] = {{"wall_time_s", total}};
    return j;
}

/// Removes every "metadata" member, recursively.
inline void strip_metadata(ojson& j) {
    if (j.is_object()) {
        j.erase("metadata");
        for (auto& [k, v] : j.items()) strip_metadata(v);
    } else if (j.is_array()) {
        for (auto& v : j) strip_metadata(v);
    }
}

namespace detail {

inline std::string csv_cell(const ojson& v) {
    if (v.is_null()) return "";
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) {
            if (c == '"') q += '"';
            q += c;
        }
        return q + "\"";
    }
    if (v.is_array() || v.is_object()) return csv_cell(ojson(v.dump()));
    return v.dump();
}

}  // namespace detail

/// Measurement rows of all reports as one CSV table; the header is the union of row keys
/// in first-seen order, preceded by the scenario id.
inline void write_csv(std::ostream& os, const std::vector<ExperimentReport>& reports) {
    std::vector<std::string> cols;
    for (const auto& r : reports) {
        for (const auto& row : r.rows) {
            for (const auto& [k, v] : row.items()) {
                if (std::find(cols.begin(), cols.end(), k) == cols.end()) cols.push_back(k);
            }
        }
    }
    os << "scenario";
    for (const auto& c : cols) os << ',' << detail::csv_cell(ojson(c));
    os << '\n';
    for (const auto& r : reports) {
        for (const auto& row : r.rows) {
            os << r.scenario();
            for (const auto& c : cols) {
                os << ',';
                if (row.contains(c)) os << detail::csv_cell(row.at(c));
            }
            os << '\n';
        }
    }
}

}  // namespace fnlab
