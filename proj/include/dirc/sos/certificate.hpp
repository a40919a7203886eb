#pragma once

#include <dirc/sos/operator_poly.hpp>

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace dirc::sos {

struct SosCertificate {
    std::string name;
    OperatorPoly target;
    std::vector<OperatorPoly> terms;
    QuadExt scale;
};

struct SosCheck {
    bool holds = false;
    /// scale·Σ Pλ†Pλ − target; zero exactly when the identity holds.
    OperatorPoly difference;
};

inline SosCheck verify_sos(const OperatorPoly& target, const std::vector<OperatorPoly>& terms, const QuadExt& scale) {
    OperatorPoly sum;
    for (const auto& p : terms) sum += p.adjoint() * p;
    SosCheck c;
    c.difference = scale * sum - target;
    c.holds = c.difference.is_zero();
    return c;
}

inline SosCheck verify_sos(const SosCertificate& c) { return verify_sos(c.target, c.terms, c.scale); }

/// Σ_x A_x ⊗ Σ_y s(x,y) B_y over the three-setting / four-setting observables.
inline OperatorPoly elegant_operator() {
    static constexpr int sign[3][4] = {{1, 1, -1, -1}, {1, -1, 1, -1}, {1, -1, -1, 1}};
    OperatorPoly beta;
    for (int x = 0; x < 3; ++x)
        for (int y = 0; y < 4; ++y) beta += QuadExt(sign[x][y]) * (OperatorPoly::alice(x + 1) * OperatorPoly::bob(y + 1));
    return beta;
}

/// 4√3·1 − β_el = (√3/2) Σ_λ Pλ†Pλ with Pλ = (±A₁ ± A₂ ± A₃)/√3 − B_λ.
inline SosCertificate elegant_certificate() {
    static constexpr int sign[4][3] = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
    const QuadExt inv_sqrt3{0, Rational(1, 3)};
    SosCertificate c;
    c.name = "elegant";
    c.target = OperatorPoly(QuadExt(0, 4)) - elegant_operator();
    for (int l = 0; l < 4; ++l) {
        OperatorPoly p;
        for (int x = 0; x < 3; ++x) p += (QuadExt(sign[l][x]) * inv_sqrt3) * OperatorPoly::alice(x + 1);
        p -= OperatorPoly::bob(l + 1);
        c.terms.push_back(std::move(p));
    }
    c.scale = QuadExt(0, Rational(1, 2));
    return c;
}

inline SosCertificate sos_certificate(const std::string& name) {
    if (name == "elegant") return elegant_certificate();
    throw std::invalid_argument("unknown certificate '" + name + "' (available: elegant)");
}

/// Lists of [word, p, q] with coefficient p + q√3, p and q as exact fraction strings.
inline nlohmann::json to_json(const OperatorPoly& poly) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [w, c] : poly.terms()) out.push_back({w.to_string(), c.rational_part().str(), c.sqrt3_part().str()});
    return out;
}

inline nlohmann::json to_json(const SosCertificate& c) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : c.terms) terms.push_back(to_json(t));
    return {{"name", c.name},
            {"target", to_json(c.target)},
            {"scale", {c.scale.rational_part().str(), c.scale.sqrt3_part().str()}},
            {"terms", terms}};
}

inline std::string to_text(const SosCertificate& c) {
    std::string s = "target = " + c.target.to_string() + "\nscale  = " + c.scale.to_string() + "\n";
    for (std::size_t i = 0; i < c.terms.size(); ++i) s += "P" + std::to_string(i + 1) + "     = " + c.terms[i].to_string() + "\n";
    return s;
}

}  // namespace dirc::sos
