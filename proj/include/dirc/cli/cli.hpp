#pragma once

#include <dirc/certify/report.hpp>
#include <dirc/quantum/serialization.hpp>
#include <dirc/sos/certificate.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

// Exit codes: 0 success, 1 solver did not converge or the identity failed
// (output is still written), 2 bad configuration.

namespace dirc::cli {

inline constexpr const char* version = "0.1.0";

enum Exit { ok = 0, not_converged = 1, config_error = 2 };

/// Configuration mistake; the message names the offending flag.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string command;
    std::string setup;
    std::string level = "1+AB";
    std::string target;
    std::string visibility;
    std::string mode;
    std::optional<double> delta;
    std::optional<double> k;
    std::string format = "json";
    std::string output;
    std::string certificate = "elegant";
    std::optional<int> functional;
    int jobs = 1;
    bool verbose = false;
    sdp::SolverSettings solver;
};

namespace detail {

inline bool is_preset(const std::string& s) { return s == "construction-one" || s == "construction-two" || s == "fork"; }

inline Setup load(const RunConfig& c) {
    if (c.setup.empty()) throw ConfigError("--setup is required");
    if (is_preset(c.setup)) {
        if (c.delta && c.setup != "fork") throw ConfigError("--delta applies only to --setup fork");
        if (c.k && c.setup == "construction-one") throw ConfigError("--k applies only to --setup fork or construction-two");
        PresetParams p;
        if (c.delta) p.delta = *c.delta;
        if (c.k) p.k = *c.k;
        try {
            return preset(c.setup, p);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("--delta/--k: ") + e.what());
        }
    }
    if (c.delta || c.k) throw ConfigError("--delta/--k apply only to presets, not setup files");
    if (!std::filesystem::exists(c.setup))
        throw ConfigError("--setup: '" + c.setup + "' is neither a preset (construction-one, construction-two, fork) nor a readable file");
    try {
        return load_setup(c.setup);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("--setup: ") + e.what());
    }
}

inline npa::LevelSpec level(const RunConfig& c) {
    try {
        return npa::parse_level(c.level);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("--level: ") + e.what());
    }
}

inline GuessTarget target(const RunConfig& c, const Setup& s) {
    try {
        const GuessTarget t = c.target.empty() ? s.default_target : GuessTarget::parse(c.target);
        t.validate(s.scenario());
        return t;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("--target: ") + e.what());
    }
}

inline Mode mode(const RunConfig& c, const Setup& s) {
    try {
        return parse_mode(c.mode.empty() ? s.default_mode : c.mode);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("--mode: ") + e.what());
    }
}

inline double number(const std::string& text, const char* flag) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(std::string(flag) + ": '" + text + "' is not a number");
    }
}

inline double single_visibility(const RunConfig& c) {
    if (c.visibility.empty()) return 1.0;
    if (c.visibility.find(':') != std::string::npos) throw ConfigError("--visibility: grid specs are only accepted by sweep");
    const double v = number(c.visibility, "--visibility");
    if (!(v >= 0 && v <= 1)) throw ConfigError("--visibility must lie in [0,1]");
    return v;
}

/// "start:stop:count", or a single value.
inline std::vector<double> grid(const RunConfig& c) {
    if (c.visibility.empty()) return default_visibility_grid();
    std::vector<std::string> parts;
    std::stringstream ss(c.visibility);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() == 1) return {single_visibility(c)};
    if (parts.size() != 3) throw ConfigError("--visibility: expected start:stop:count");
    const double a = number(parts[0], "--visibility"), b = number(parts[1], "--visibility");
    const double n = number(parts[2], "--visibility");
    if (!(a >= 0 && b <= 1 && a <= b)) throw ConfigError("--visibility: need 0 <= start <= stop <= 1");
    if (!(n >= 1 && n == std::floor(n) && n <= 100000)) throw ConfigError("--visibility: count must be a positive integer");
    return linear_grid(a, b, static_cast<int>(n));
}

inline void require_format(const RunConfig& c, std::initializer_list<const char*> allowed) {
    for (const char* f : allowed)
        if (c.format == f) return;
    std::string list;
    for (const char* f : allowed) list += (list.empty() ? "" : ", ") + std::string(f);
    throw ConfigError("--format: '" + c.format + "' not supported by " + c.command + " (use " + list + ")");
}

inline nlohmann::json provenance(const RunConfig& c, const Setup* s) {
    nlohmann::json j = {{"tool", "dirc"},
                        {"version", version},
                        {"command", c.command},
                        {"solver_settings",
                         {{"max_iterations", c.solver.max_iterations},
                          {"gap_tolerance", c.solver.gap_tolerance},
                          {"feasibility_tolerance", c.solver.feasibility_tolerance},
                          {"step_fraction", c.solver.step_fraction}}}};
    if (s) {
        j["setup"] = s->name;
        j["source"] = is_preset(c.setup) ? "preset" : "file";
        j["parameters"] = s->parameters;
    }
    return j;
}

inline std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

inline int behavior(const RunConfig& c, std::ostream& out) {
    require_format(c, {"csv", "json"});
    const Setup s = load(c);
    const double v = single_visibility(c);
    const Behavior p = mix_visibility(s.behavior(), v);
    if (c.format == "csv") {
        out << behavior_csv(p);
        return ok;
    }
    nlohmann::json rows = nlohmann::json::array();
    const Scenario& sc = p.scenario();
    for (int x = 0; x < sc.settings(Party::alice); ++x)
        for (int y = 0; y < sc.settings(Party::bob); ++y)
            for (int a = 0; a < sc.outcomes(Party::alice, x); ++a)
                for (int b = 0; b < sc.outcomes(Party::bob, y); ++b) rows.push_back({x, y, a, b, p(a, b, x, y)});
    nlohmann::json fv = nlohmann::json::object();
    for (const auto& f : s.functionals) fv[f.name()] = eval_functional(f, p);
    out << dump({{"provenance", provenance(c, &s)}, {"visibility", v}, {"columns", {"x", "y", "a", "b", "p"}}, {"behavior", rows},
                 {"functional_values", fv}});
    return ok;
}

inline int bell_max(const RunConfig& c, std::ostream& out) {
    require_format(c, {"json"});
    const Setup s = load(c);
    const auto l = level(c);
    std::vector<int> which;
    if (c.functional) {
        if (*c.functional < 1 || *c.functional > static_cast<int>(s.functionals.size()))
            throw ConfigError("--functional: index outside 1.." + std::to_string(s.functionals.size()));
        which.push_back(*c.functional - 1);
    } else {
        for (int i = 0; i < static_cast<int>(s.functionals.size()); ++i) which.push_back(i);
    }
    nlohmann::json results = nlohmann::json::array();
    bool all = true;
    for (int i : which) {
        const auto t = tsirelson(s, i, l, c.solver);
        auto j = to_json(t);
        const auto& f = s.functionals[static_cast<std::size_t>(i)];
        j["functional"] = f.name();
        if (f.quantum_bound) j["known_quantum_bound"] = *f.quantum_bound;
        all = all && t.solution.converged();
        results.push_back(j);
    }
    out << dump({{"provenance", provenance(c, &s)}, {"level", l.to_string()}, {"results", results}});
    return all ? ok : not_converged;
}

inline int certify(const RunConfig& c, std::ostream& out) {
    require_format(c, {"json", "csv"});
    const Setup s = load(c);
    const auto l = level(c);
    const auto t = target(c, s);
    const auto m = mode(c, s);
    const double v = single_visibility(c);
    const auto r = certify_randomness(s, t, l, m, v, c.solver);
    if (c.format == "csv") {
        SweepPoint p;
        p.visibility = v;
        p.result = r;
        out << curve_csv({p});
    } else {
        out << dump({{"provenance", provenance(c, &s)}, {"result", to_json(r)}});
    }
    return r.converged() ? ok : not_converged;
}

inline int sweep(const RunConfig& c, std::ostream& out) {
    require_format(c, {"csv", "json"});
    const Setup s = load(c);
    const auto l = level(c);
    const auto t = target(c, s);
    const auto m = mode(c, s);
    const auto g = grid(c);
    if (c.jobs < 1) throw ConfigError("--jobs must be at least 1");
    const auto curve = visibility_sweep(s, t, l, g, m, c.solver, c.jobs);
    if (c.format == "csv") out << curve_csv(curve);
    else
        out << dump({{"provenance", provenance(c, &s)},
                     {"level", l.to_string()},
                     {"target", t.to_string()},
                     {"mode", to_string(m)},
                     {"nonincreasing_in_noise", nonincreasing_in_noise(curve)},
                     {"points", to_json(curve)}});
    for (const auto& p : curve)
        if (!p.result || !p.result->converged()) return not_converged;
    return ok;
}

inline int sos_verify(const RunConfig& c, std::ostream& out) {
    require_format(c, {"text", "json"});
    sos::SosCertificate cert;
    try {
        cert = sos::sos_certificate(c.certificate);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("--certificate: ") + e.what());
    }
    const auto check = sos::verify_sos(cert);
    if (c.format == "json") {
        out << dump({{"provenance", provenance(c, nullptr)},
                     {"certificate", sos::to_json(cert)},
                     {"verified", check.holds},
                     {"difference", sos::to_json(check.difference)}});
    } else {
        out << sos::to_text(cert);
        if (check.holds) out << "exact identity verified\n";
        else out << "identity FAILED; difference = " << check.difference.to_string() << "\n";
    }
    return check.holds ? ok : not_converged;
}

inline void validate(const RunConfig& c) {
    const bool solves = c.command == "bell-max" || c.command == "certify" || c.command == "sweep";
    if (c.command != "sweep" && c.jobs != 1) throw ConfigError("--jobs applies only to sweep");
    if (c.command == "sos-verify" && !c.setup.empty()) throw ConfigError("--setup does not apply to sos-verify");
    if (c.command != "bell-max" && c.functional) throw ConfigError("--functional applies only to bell-max");
    if (!solves && c.verbose) throw ConfigError("--verbose applies only to solver commands");
    if (c.command == "bell-max" && !c.visibility.empty()) throw ConfigError("--visibility does not apply to bell-max");
    try {
        c.solver.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("solver flags: ") + e.what());
    }
}

}  // namespace detail

/// Runs one command against an already-parsed configuration.
inline int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
    try {
        detail::validate(c);
        if (c.command == "behavior") return detail::behavior(c, out);
        if (c.command == "bell-max") return detail::bell_max(c, out);
        if (c.command == "certify") return detail::certify(c, out);
        if (c.command == "sweep") return detail::sweep(c, out);
        if (c.command == "sos-verify") return detail::sos_verify(c, out);
        throw ConfigError("unknown command '" + c.command + "'");
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return config_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return not_converged;
    }
}

/// Parses argv (without the program name handling done by CLI11) and runs.
inline int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Device-independent randomness certification with the NPA hierarchy", "dirc"};
    app.set_version_flag("--version", version);
    app.require_subcommand(1, 1);
    RunConfig c;
    std::string format;

    auto common = [&](CLI::App* s, bool solver) {
        s->add_option("--output,-o", c.output, "Write results to this file instead of standard output");
        if (!solver) return;
        s->add_option("--level", c.level, "NPA level, e.g. 1, 1+AB, 2, 2+AAB+ABB")->capture_default_str();
        s->add_option("--max-iterations", c.solver.max_iterations)->capture_default_str();
        s->add_option("--gap-tolerance", c.solver.gap_tolerance)->capture_default_str();
        s->add_option("--feasibility-tolerance", c.solver.feasibility_tolerance)->capture_default_str();
        s->add_option("--step-fraction", c.solver.step_fraction)->capture_default_str();
        s->add_flag("--verbose,-v", c.verbose, "Print the solver iteration log to standard error");
    };
    auto setup_flags = [&](CLI::App* s) {
        s->add_option("--setup", c.setup, "Preset name (construction-one, construction-two, fork) or setup file")->required();
        s->add_option("--delta", c.delta, "fork: tilt parameter");
        s->add_option("--k", c.k, "fork / construction-two: weight of the added term");
    };

    auto* beh = app.add_subcommand("behavior", "Print the honest (optionally noisy) behavior");
    setup_flags(beh);
    beh->add_option("--visibility", c.visibility, "Visibility v in [0,1]");
    beh->add_option("--format", format, "csv or json");
    common(beh, false);

    auto* bm = app.add_subcommand("bell-max", "Upper-bound each functional and compare with its honest value");
    setup_flags(bm);
    bm->add_option("--functional", c.functional, "1-based functional index (default: all)");
    bm->add_option("--format", format, "json");
    common(bm, true);

    auto* cert = app.add_subcommand("certify", "Certify randomness for one configuration");
    setup_flags(cert);
    cert->add_option("--target", c.target, "local:A:x, local:B:y or global:x:y (1-based)");
    cert->add_option("--mode", c.mode, "behavior or bell-value");
    cert->add_option("--visibility", c.visibility, "Visibility v in [0,1]");
    cert->add_option("--format", format, "json or csv");
    common(cert, true);

    auto* sw = app.add_subcommand("sweep", "Certify over a visibility grid");
    setup_flags(sw);
    sw->add_option("--target", c.target, "local:A:x, local:B:y or global:x:y (1-based)");
    sw->add_option("--mode", c.mode, "behavior or bell-value");
    sw->add_option("--visibility", c.visibility, "start:stop:count (default 0.85:1:31)");
    sw->add_option("--jobs,-j", c.jobs, "Grid points solved concurrently")->capture_default_str();
    sw->add_option("--format", format, "csv or json");
    common(sw, true);

    auto* sos = app.add_subcommand("sos-verify", "Check a sum-of-squares certificate in exact arithmetic");
    sos->add_option("--certificate", c.certificate, "Certificate name")->capture_default_str();
    sos->add_option("--format", format, "text or json");
    common(sos, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::CallForVersion& e) {
        out << version << "\n";
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return config_error;
    }

    c.command = app.get_subcommands().front()->get_name();
    if (c.command == "sweep" || c.command == "behavior") c.format = format.empty() ? "csv" : format;
    else if (c.command == "sos-verify") c.format = format.empty() ? "text" : format;
    else c.format = format.empty() ? "json" : format;
    if (c.verbose) c.solver.log = &err;

    if (c.output.empty()) return run(c, out, err);
    std::ostringstream buffer;
    const int code = run(c, buffer, err);
    std::ofstream file(c.output);
    if (!file) {
        err << "error: --output: cannot write '" << c.output << "'\n";
        return config_error;
    }
    file << buffer.str();
    return code;
}

}  // namespace dirc::cli
