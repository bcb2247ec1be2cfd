#pragma once

// Command-line front end: compute | calibrate | converge | simulate.
//
// Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gsr/accuracy.hpp"
#include "gsr/calibration.hpp"
#include "gsr/io.hpp"
#include "gsr/mc.hpp"
#include "gsr/metrics.hpp"
#include "gsr/model.hpp"

namespace gsr::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 2;
inline constexpr int exit_numerical = 3;

class ConfigError : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Everything a command can be asked to do.
struct RunConfig {
    std::string command;
    double theta = 1.0;
    std::optional<double> threshold;
    std::optional<double> gamma;
    double headstart = 0.0;
    std::size_t n = 0;
    std::string n_list;
    std::string method = "hat";
    bool verify = false;

    double rel_tol = 1e-4;
    std::size_t max_iters = 60;
    std::optional<double> overshoot;

    std::string mode = "arl";
    std::uint64_t replications = 100000;
    std::uint64_t seed = 1;
    std::optional<std::uint64_t> nu;
    std::optional<std::uint64_t> k_max;
    std::uint64_t cap = 0;
    std::uint64_t steps = 20;

    std::string format = "json";
    std::string output;
    int precision = 6;
};

/// Reads flat `key = value` lines ('#' starts a comment) into the
/// equivalent command-line tokens. Boolean keys become bare flags.
inline std::vector<std::string> config_file_tokens(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    std::vector<std::string> tokens;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
        if (key == "verify") {
            if (value == "true" || value == "1" || value == "yes") tokens.push_back("--verify");
            continue;
        }
        tokens.push_back("--" + key);
        tokens.push_back(value);
    }
    return tokens;
}

inline std::vector<std::size_t> parse_n_list(const std::string& text) {
    std::vector<std::size_t> ns;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const long long v = std::stoll(item, &used);
            if (v < 2) throw ConfigError("N-list entries must be >= 2");
            ns.push_back(static_cast<std::size_t>(v));
        } catch (const std::logic_error&) {
            throw ConfigError("invalid N-list entry '" + item + "'");
        }
    }
    return ns;
}

inline bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

inline void require_threshold(const RunConfig& cfg) {
    if (cfg.gamma) throw ConfigError(cfg.command + ": give a threshold --A, not --gamma");
    if (!cfg.threshold) throw ConfigError(cfg.command + ": --A is required");
    if (!(*cfg.threshold > 0.0) || !std::isfinite(*cfg.threshold))
        throw ConfigError("threshold A must be positive");
    if (!(cfg.headstart >= 0.0 && cfg.headstart <= *cfg.threshold))
        throw ConfigError("headstart r must lie in [0, A]");
}

inline void check_common(const RunConfig& cfg) {
    if (!(cfg.theta > 0.0) || !std::isfinite(cfg.theta)) throw ConfigError("theta must be positive");
    if (cfg.format != "csv" && cfg.format != "json") throw ConfigError("format must be csv or json");
    if (cfg.precision < 1 || cfg.precision > 17) throw ConfigError("precision must be in 1..17");
}

inline Method method_of(const RunConfig& cfg) {
    try {
        return parse_method(cfg.method);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

inline nlohmann::json config_json(const RunConfig& cfg) {
    nlohmann::json j{{"command", cfg.command}, {"theta", cfg.theta}, {"r", cfg.headstart}, {"method", cfg.method}};
    if (cfg.threshold) j["A"] = *cfg.threshold;
    if (cfg.gamma) j["gamma"] = *cfg.gamma;
    if (cfg.n) j["N"] = cfg.n;
    return j;
}

struct Output {
    std::ostream* stream;
    std::ofstream file;

    explicit Output(const RunConfig& cfg, std::ostream& fallback) : stream(&fallback) {
        if (!cfg.output.empty()) {
            file.open(cfg.output);
            if (!file) throw ConfigError("cannot open output file '" + cfg.output + "'");
            stream = &file;
        }
    }
    std::ostream& operator*() { return *stream; }
};

inline void emit_json(Output& out, const nlohmann::json& doc) { *out << doc.dump(2) << '\n'; }

inline int cmd_compute(const RunConfig& cfg, std::ostream& os) {
    check_common(cfg);
    require_threshold(cfg);
    const std::size_t n = cfg.n ? cfg.n : 1024;
    if (n < 2) throw ConfigError("N must be at least 2");
    const GaussianMeanShift model(cfg.theta);
    EvaluateOptions opts;
    opts.verify_delay_components = cfg.verify;
    opts.theta = cfg.theta;
    PerformanceReport rep = evaluate(model, method_of(cfg), *cfg.threshold, cfg.headstart, n, opts);

    Output out(cfg, os);
    if (cfg.format == "csv") {
        io::write_report_csv(*out, rep, cfg.precision);
    } else {
        auto cfg_json = config_json(cfg);
        cfg_json["N"] = n;
        emit_json(out, {{"config", cfg_json}, {"results", {io::to_json(rep)}}, {"diagnostics", io::diagnostics_json(rep)}});
    }
    return exit_ok;
}

inline int cmd_calibrate(const RunConfig& cfg, std::ostream& os, std::ostream& es) {
    check_common(cfg);
    if (cfg.threshold) throw ConfigError("calibrate: give a target --gamma, not --A");
    if (!cfg.gamma) throw ConfigError("calibrate: --gamma is required");
    if (!(*cfg.gamma > 1.0)) throw ConfigError("gamma must exceed 1");
    if (!(cfg.headstart >= 0.0)) throw ConfigError("headstart r must be nonnegative");

    CalibrationSpec spec;
    spec.gamma = *cfg.gamma;
    spec.headstart = cfg.headstart;
    spec.n = cfg.n ? cfg.n : 2048;
    spec.rel_tol = cfg.rel_tol;
    spec.max_iters = cfg.max_iters;
    spec.method = method_of(cfg);
    spec.overshoot_hint = cfg.overshoot;
    validate(spec);

    const GaussianMeanShift model(cfg.theta);
    CalibrationResult res = calibrate(model, spec);
    res.report.theta = cfg.theta;
    for (const auto& w : res.warnings) es << "warning: " << w << '\n';

    Output out(cfg, os);
    if (cfg.format == "csv") {
        io::write_calibration_csv(*out, spec.gamma, res, cfg.precision);
    } else {
        auto result = io::to_json(res.report);
        result["gamma"] = spec.gamma;
        auto cfg_json = config_json(cfg);
        cfg_json["N"] = spec.n;
        emit_json(out, {{"config", cfg_json},
                        {"results", {result}},
                        {"diagnostics",
                         {{"iterations", res.iterations}, {"warnings", res.warnings},
                          {"operator_norm", res.report.operator_norm}}}});
    }
    return exit_ok;
}

inline int cmd_converge(const RunConfig& cfg, std::ostream& os) {
    check_common(cfg);
    require_threshold(cfg);
    std::vector<std::size_t> ns;
    if (!cfg.n_list.empty()) {
        ns = parse_n_list(cfg.n_list);
    } else if (cfg.n) {
        ns = {cfg.n};
    } else {
        for (std::size_t n = 2; n <= 4096; n *= 2) ns.push_back(n);
    }
    for (std::size_t n : ns)
        if (!is_power_of_two(n)) throw ConfigError("N-list entries must be powers of two");
    try {
        check_doubling(ns);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    std::vector<Method> methods;
    if (cfg.method == "both") methods = {Method::hat, Method::midpoint};
    else methods = {method_of(cfg)};

    const GaussianMeanShift model(cfg.theta);
    std::vector<ConvergenceRow> rows;
    for (Method m : methods) {
        auto part = convergence_table(model, *cfg.threshold, cfg.headstart, ns, m);
        rows.insert(rows.end(), part.begin(), part.end());
    }

    Output out(cfg, os);
    if (cfg.format == "csv") {
        io::write_convergence_csv(*out, rows, cfg.precision);
    } else {
        nlohmann::json results = nlohmann::json::array();
        std::size_t failed = 0;
        for (const auto& row : rows) {
            results.push_back(io::to_json(row));
            failed += row.failed;
        }
        emit_json(out, {{"config", config_json(cfg)}, {"results", results}, {"diagnostics", {{"failed_rows", failed}}}});
    }
    return exit_ok;
}

inline int cmd_simulate(const RunConfig& cfg, std::ostream& os, std::ostream& es) {
    check_common(cfg);
    require_threshold(cfg);
    if (cfg.replications < 1) throw ConfigError("M must be at least 1");

    const GaussianMeanShift model(cfg.theta);
    McConfig mc;
    mc.threshold = *cfg.threshold;
    mc.headstart = cfg.headstart;
    mc.replications = cfg.replications;
    mc.seed = cfg.seed;
    mc.cap = cfg.cap;
    mc.change_point = cfg.nu ? *cfg.nu : static_cast<std::uint64_t>(std::ceil(50.0 * *cfg.threshold));

    McEstimate est;
    nlohmann::json extra = nlohmann::json::object();
    if (cfg.mode == "arl") {
        est = estimate_arl(model, mc);
    } else if (cfg.mode == "delay0") {
        est = estimate_delay0(model, mc);
    } else if (cfg.mode == "stadd") {
        est = estimate_stadd_multicyclic(model, mc);
        extra["nu"] = mc.change_point;
    } else if (cfg.mode == "riadd") {
        const std::uint64_t k_max = cfg.k_max ? *cfg.k_max : effective_cap(mc);
        const RiaddEstimate r = estimate_riadd_truncated(model, mc, k_max);
        est = r.riadd;
        extra = {{"k_max", k_max}, {"arl", r.arl}, {"iadd", r.iadd}, {"delay0", r.delay0},
                 {"tail_fraction", r.tail_fraction}, {"generalized", io::to_json(r.generalized)}};
    } else if (cfg.mode == "martingale") {
        est = estimate_martingale(model, cfg.steps, cfg.headstart, cfg.replications, cfg.seed);
        extra["steps"] = cfg.steps;
    } else {
        throw ConfigError("mode must be one of arl, delay0, stadd, riadd, martingale");
    }
    for (const auto& w : est.warnings) es << "warning: " << w << '\n';

    Output out(cfg, os);
    if (cfg.format == "csv") {
        io::write_estimate_csv(*out, cfg.mode, est, cfg.precision);
    } else {
        auto cfg_json = config_json(cfg);
        cfg_json["mode"] = cfg.mode;
        cfg_json["M"] = cfg.replications;
        cfg_json["seed"] = cfg.seed;
        auto result = io::to_json(est);
        result["mode"] = cfg.mode;
        emit_json(out, {{"config", cfg_json}, {"results", {result}}, {"diagnostics", extra}});
    }
    return exit_ok;
}

inline void add_common(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--theta", cfg.theta, "post-change mean (unit variance)");
    sub->add_option("--r", cfg.headstart, "headstart R_0 = r");
    sub->add_option("--method", cfg.method, "hat | midpoint");
    sub->add_option("--format", cfg.format, "csv | json");
    sub->add_option("--output", cfg.output, "write results to this file instead of stdout");
    sub->add_option("--precision", cfg.precision, "significant digits in CSV output");
}

/// Runs one command. `args` excludes the program name.
inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    RunConfig cfg;
    try {
        // --config is expanded in place, ahead of the command-line flags so
        // that flags win (every option keeps its last value).
        std::vector<std::string> file_tokens;
        for (std::size_t i = 0; i < args.size(); ++i) {
            std::string path;
            if (args[i] == "--config" && i + 1 < args.size()) {
                path = args[i + 1];
                args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
            } else if (args[i].rfind("--config=", 0) == 0) {
                path = args[i].substr(9);
                args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
            } else {
                continue;
            }
            auto t = config_file_tokens(path);
            file_tokens.insert(file_tokens.end(), t.begin(), t.end());
            --i;
        }
        if (!file_tokens.empty()) {
            if (args.empty()) throw ConfigError("no command given");
            args.insert(args.begin() + 1, file_tokens.begin(), file_tokens.end());
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return exit_config;
    }

    CLI::App app{"Performance evaluation of the Generalized Shiryaev-Roberts procedure", "gsr"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);

    std::optional<double> threshold, gamma;
    std::size_t n = 0;

    auto* compute = app.add_subcommand("compute", "ARL and STADD at threshold A");
    add_common(compute, cfg);
    compute->add_option("--A", threshold, "detection threshold");
    compute->add_option("--N", n, "partition size");
    compute->add_flag("--verify", cfg.verify, "also solve the delta_0 / psi equations");

    auto* calib = app.add_subcommand("calibrate", "threshold A giving ARL = gamma");
    add_common(calib, cfg);
    calib->add_option("--gamma", gamma, "target ARL to false alarm");
    calib->add_option("--A", threshold, "(rejected: calibrate solves for A)");
    calib->add_option("--N", n, "partition size");
    calib->add_option("--rel-tol", cfg.rel_tol, "relative tolerance on the ARL");
    calib->add_option("--max-iters", cfg.max_iters, "root-finder iteration limit");
    calib->add_option("--overshoot", cfg.overshoot, "limiting overshoot xi, seeds A_0 = xi (gamma + r)");

    auto* conv = app.add_subcommand("converge", "convergence table over doubling N");
    add_common(conv, cfg);
    conv->add_option("--A", threshold, "detection threshold");
    conv->add_option("--gamma", gamma, "(rejected: converge needs A)");
    conv->add_option("--N", n, "single partition size");
    conv->add_option("--N-list", cfg.n_list, "comma-separated doubling sizes, default 2,4,...,4096");

    auto* sim = app.add_subcommand("simulate", "Monte Carlo estimates");
    add_common(sim, cfg);
    sim->add_option("--A", threshold, "detection threshold");
    sim->add_option("--gamma", gamma, "(rejected: simulate needs A)");
    sim->add_option("--mode", cfg.mode, "arl | delay0 | stadd | riadd | martingale");
    sim->add_option("--M", cfg.replications, "replications");
    sim->add_option("--seed", cfg.seed, "random seed");
    sim->add_option("--nu", cfg.nu, "change point for --mode stadd (default 50 A)");
    sim->add_option("--k-max", cfg.k_max, "last change point for --mode riadd");
    sim->add_option("--cap", cfg.cap, "run-length cap (at least 100 A)");
    sim->add_option("--steps", cfg.steps, "n for --mode martingale");

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_config;
    }

    cfg.threshold = threshold;
    cfg.gamma = gamma;
    cfg.n = n;
    try {
        if (compute->parsed()) {
            cfg.command = "compute";
            return cmd_compute(cfg, out);
        }
        if (calib->parsed()) {
            cfg.command = "calibrate";
            return cmd_calibrate(cfg, out, err);
        }
        if (conv->parsed()) {
            cfg.command = "converge";
            return cmd_converge(cfg, out);
        }
        cfg.command = "simulate";
        return cmd_simulate(cfg, out, err);
    } catch (const SingularSystemError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return exit_numerical;
    } catch (const InconsistentOperatorError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return exit_numerical;
    } catch (const CalibrationError& e) {
        err << "calibration failure: " << e.what() << '\n';
        return exit_numerical;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return exit_numerical;
    }
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace gsr::cli
