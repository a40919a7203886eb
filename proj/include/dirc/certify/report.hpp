#pragma once

#include <dirc/certify/certify.hpp>

#include <nlohmann/json.hpp>

#include <charconv>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

// Bits are truncated to 1e-4 wherever they are printed. The untruncated value
// is kept under "bits_exact" for regression work.

namespace dirc {

inline nlohmann::json to_json(const RandomnessResult& r) {
    nlohmann::json bell = nlohmann::json::array();
    for (const auto& [name, value] : r.constraint.bell_values) bell.push_back({{"functional", name}, {"value", value}});
    nlohmann::json j = {
        {"setup", r.setup},
        {"target", r.target.to_string()},
        {"level", r.level.to_string()},
        {"mode", to_string(r.mode)},
        {"visibility", r.visibility},
        {"guessing_bound", r.guessing_bound},
        {"bits", truncate_bits(r.bits)},
        {"bits_exact", r.bits},
        {"ceiling", r.ceiling},
        {"certified", r.certified()},
        {"constraint", {{"description", r.constraint.description}, {"bell_values", bell}}},
        {"moment_structure", r.moment_summary},
        {"solver",
         {{"status", sdp::to_string(r.status)},
          {"message", r.solver_message},
          {"primal_objective", r.primal_objective},
          {"dual_objective", r.dual_objective},
          {"duality_gap", r.duality_gap},
          {"primal_residual", r.primal_residual},
          {"dual_residual", r.dual_residual},
          {"iterations", r.iterations},
          {"certificate_rigorous", r.rigorous}}},
    };
    if (r.analytic_bits) j["analytic"] = {{"bits", *r.analytic_bits}, {"basis", "proof"}, {"sdp_role", "numerical check of an analytic result"}};
    return j;
}

inline nlohmann::json to_json(const std::vector<SweepPoint>& curve) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : curve) {
        if (p.result) pts.push_back(to_json(*p.result));
        else pts.push_back({{"visibility", p.visibility}, {"bits", 0.0}, {"guessing_bound", 1.0}, {"certified", false}, {"error", p.error}});
    }
    return pts;
}

/// Shortest text that reads back to the same double.
inline std::string shortest(double x) {
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return {buf, end};
}

/// Header v,bits,guessing_bound,status; one row per grid point.
inline std::string curve_csv(const std::vector<SweepPoint>& curve) {
    std::ostringstream os;
    os << "v,bits,guessing_bound,status\n";
    for (const auto& p : curve) {
        os << shortest(p.visibility) << ',' << std::fixed << std::setprecision(4) << truncate_bits(p.bits()) << ','
           << shortest(p.guessing_bound()) << ',' << p.status() << '\n';
    }
    return os.str();
}

inline nlohmann::json to_json(const TsirelsonResult& t) {
    nlohmann::json j = {{"upper_bound", t.upper_bound},
                        {"certificate_rigorous", t.solution.certificate_rigorous},
                        {"solver",
                         {{"status", sdp::to_string(t.solution.status)},
                          {"message", t.solution.message},
                          {"primal_objective", t.solution.primal_objective},
                          {"dual_objective", t.solution.dual_objective},
                          {"iterations", t.solution.iterations}}}};
    if (t.honest) j["honest"] = *t.honest;
    if (t.gap) j["gap"] = *t.gap;
    return j;
}

}  // namespace dirc
