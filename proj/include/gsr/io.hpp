#pragma once

#include <cstdio>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gsr/accuracy.hpp"
#include "gsr/calibration.hpp"
#include "gsr/mc.hpp"
#include "gsr/metrics.hpp"

namespace gsr::io {

using nlohmann::json;

/// CSV columns of a convergence table, in order.
inline constexpr const char* convergence_csv_header = "N,value,rate,err_est,bound,method";

inline std::string format_number(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

inline std::string format_optional(const std::optional<double>& v, int precision) {
    return v ? format_number(*v, precision) : std::string{};
}

inline json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json to_json(const PerformanceReport& r) {
    return json{
        {"model", r.model},
        {"theta", optional_json(r.theta)},
        {"A", r.threshold},
        {"r", r.headstart},
        {"N", r.n},
        {"method", std::string(to_string(r.method))},
        {"arl", r.arl},
        {"stadd", r.stadd},
        {"delta0", optional_json(r.delta0)},
        {"iadd", optional_json(r.iadd)},
        {"rate", optional_json(r.rate)},
        {"err_est", optional_json(r.error_estimate)},
        {"bound", optional_json(r.error_bound)},
    };
}

inline json diagnostics_json(const PerformanceReport& r) {
    return json{{"operator_norm", r.operator_norm},
                {"residual_ell", r.residual_ell},
                {"residual_xi", r.residual_xi},
                {"h_max", r.h_max}};
}

inline json to_json(const ConvergenceRow& row) {
    json j{{"N", row.n},
           {"method", std::string(to_string(row.method))},
           {"failed", row.failed},
           {"value", row.failed ? json("NaN") : optional_json(row.value)},
           {"arl", optional_json(row.arl)},
           {"rate", optional_json(row.rate)},
           {"err_est", optional_json(row.error_estimate)},
           {"bound", optional_json(row.bound)}};
    return j;
}

inline json to_json(const McEstimate& e) {
    return json{{"mean", e.mean},
                {"se", e.standard_error},
                {"replications", e.replications},
                {"truncated", e.truncated},
                {"warning", !e.warnings.empty()},
                {"warnings", e.warnings}};
}

inline void write_convergence_csv(std::ostream& out, std::span<const ConvergenceRow> rows, int precision) {
    out << convergence_csv_header << '\n';
    for (const auto& row : rows) {
        out << row.n << ',' << (row.failed ? std::string("NaN") : format_optional(row.value, precision)) << ','
            << format_optional(row.rate, precision) << ',' << format_optional(row.error_estimate, precision) << ','
            << format_optional(row.bound, precision) << ',' << to_string(row.method) << '\n';
    }
}

inline void write_report_csv(std::ostream& out, const PerformanceReport& r, int precision) {
    out << "theta,A,r,N,method,arl,stadd,delta0,iadd,operator_norm,residual_ell,residual_xi,h_max\n";
    out << format_optional(r.theta, precision) << ',' << format_number(r.threshold, precision) << ','
        << format_number(r.headstart, precision) << ',' << r.n << ',' << to_string(r.method) << ','
        << format_number(r.arl, precision) << ',' << format_number(r.stadd, precision) << ','
        << format_optional(r.delta0, precision) << ',' << format_optional(r.iadd, precision) << ','
        << format_number(r.operator_norm, precision) << ',' << format_number(r.residual_ell, precision) << ','
        << format_number(r.residual_xi, precision) << ',' << format_number(r.h_max, precision) << '\n';
}

inline void write_calibration_csv(std::ostream& out, double gamma, const CalibrationResult& c, int precision) {
    const auto& r = c.report;
    out << "theta,gamma,r,N,method,A,arl,stadd,rate,err_est,iterations\n";
    out << format_optional(r.theta, precision) << ',' << format_number(gamma, precision) << ','
        << format_number(r.headstart, precision) << ',' << r.n << ',' << to_string(r.method) << ','
        << format_number(c.threshold, precision) << ',' << format_number(r.arl, precision) << ','
        << format_number(r.stadd, precision) << ',' << format_optional(r.rate, precision) << ','
        << format_optional(r.error_estimate, precision) << ',' << c.iterations << '\n';
}

inline void write_estimate_csv(std::ostream& out, const std::string& mode, const McEstimate& e, int precision) {
    out << "mode,mean,se,replications,truncated,warning\n";
    out << mode << ',' << format_number(e.mean, precision) << ',' << format_number(e.standard_error, precision)
        << ',' << e.replications << ',' << e.truncated << ',' << (e.warnings.empty() ? 0 : 1) << '\n';
}

}  // namespace gsr::io
