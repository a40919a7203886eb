#pragma once

#include <dirc/npa/moment_structure.hpp>
#include <dirc/quantum/functional.hpp>
#include <dirc/quantum/target.hpp>
#include <dirc/sdp/problem.hpp>

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dirc::npa {

/// f(P) as a linear form; the functional's constant sits on ⟨1⟩.
inline LinearForm compile(const MomentStructure& ms, const BellFunctional& f) {
    if (!(f.scenario() == ms.scenario())) throw std::invalid_argument("functional '" + f.name() + "' does not match the scenario");
    LinearForm out;
    for (const auto& [k, c] : f.coefficients()) out += ms.probability(k.a, k.b, k.x, k.y).scaled(c);
    out.add(0, f.constant());
    return out;
}

namespace detail {

/// Γ as a block. Class c maps to variable offset + c; with unit_identity the
/// ⟨1⟩ entries become the constant 1 and class 0 has no variable.
inline sdp::Block moment_block(const MomentStructure& ms, int offset, bool unit_identity) {
    sdp::Block b(ms.size());
    for (int i = 0; i < ms.size(); ++i)
        for (int j = i; j < ms.size(); ++j) {
            const int c = ms.entry(i, j);
            if (c == MomentStructure::zero) continue;
            if (unit_identity && c == 0) b.add_constant(i, j, 1);
            else b.add(offset + c - (unit_identity ? 1 : 0), i, j, 1);
        }
    return b;
}

inline std::optional<double> variable_bound(const MomentStructure& ms) {
    // |Γ_ij| ≤ √(Γ_ii Γ_jj) ≤ ⟨1⟩ ≤ 1 once the basis is prefix closed
    if (ms.prefix_closed()) return 1.0;
    return std::nullopt;
}

}  // namespace detail

/// Upper bound on the quantum maximum of f at the structure's level.
inline sdp::Problem bell_max_sdp(const MomentStructure& ms, const BellFunctional& f) {
    const LinearForm obj = compile(ms, f);
    sdp::Problem p;
    p.num_vars = ms.num_classes() - 1;
    p.objective.assign(static_cast<std::size_t>(p.num_vars), 0.0);
    for (const auto& [c, v] : obj.terms) {
        if (c == 0) p.objective_offset += v;
        else p.objective[static_cast<std::size_t>(c - 1)] += v;
    }
    p.blocks.push_back(detail::moment_block(ms, 0, true));
    p.variable_bound = detail::variable_bound(ms);
    p.description = "maximize " + f.name() + "; " + ms.summary();
    return p;
}

inline sdp::Problem bell_max_sdp(const BellFunctional& f, const LevelSpec& l) { return bell_max_sdp(MomentStructure(f.scenario(), l), f); }

/// A functional and the value it is pinned to.
struct BellConstraint {
    BellFunctional functional;
    double value = 0;
};

namespace detail {

/// Blocks, normalization and objective shared by both guessing modes.
/// Branch e owns variables e·classes … (e+1)·classes − 1.
inline sdp::Problem guessing_skeleton(const MomentStructure& ms, const GuessTarget& t) {
    const Scenario& s = ms.scenario();
    t.validate(s);
    const int branches = t.branches(s);
    if (branches < 2) throw std::invalid_argument("guessing target needs at least two outcomes");
    const int nc = ms.num_classes();
    sdp::Problem p;
    p.num_vars = branches * nc;
    p.objective.assign(static_cast<std::size_t>(p.num_vars), 0.0);
    sdp::Equality norm;
    norm.rhs = 1;
    for (int e = 0; e < branches; ++e) {
        p.blocks.push_back(moment_block(ms, e * nc, false));
        norm.terms.emplace_back(e * nc, 1.0);
        LinearForm guess;
        if (t.kind == GuessTarget::Kind::local) {
            guess = ms.projector(t.party, e, t.setting);
        } else {
            const int rb = s.outcomes(Party::bob, t.partner_setting);
            guess = ms.probability(e / rb, e % rb, t.setting, t.partner_setting);
        }
        for (const auto& [c, v] : guess.terms) p.objective[static_cast<std::size_t>(e * nc + c)] += v;
    }
    p.equalities.push_back(std::move(norm));
    p.variable_bound = variable_bound(ms);
    return p;
}

inline sdp::Equality summed_over_branches(const LinearForm& f, int branches, int nc, double rhs) {
    sdp::Equality eq;
    eq.rhs = rhs;
    for (int e = 0; e < branches; ++e)
        for (const auto& [c, v] : f.terms) eq.terms.emplace_back(e * nc + c, v);
    return eq;
}

}  // namespace detail

/// Eve's guessing probability given the full behavior: Σ_e Γ_e reproduces
/// every one- and two-letter moment of P.
inline sdp::Problem guessing_sdp(const MomentStructure& ms, const Behavior& behavior, const GuessTarget& t) {
    const Scenario& s = ms.scenario();
    if (!(behavior.scenario() == s)) throw std::invalid_argument("behavior does not match the scenario");
    behavior.validate(1e-9);  // also rejects signalling

    sdp::Problem p = detail::guessing_skeleton(ms, t);
    const int branches = t.branches(s), nc = ms.num_classes();
    const auto la = letters(s, Party::alice), lb = letters(s, Party::bob);
    auto pin = [&](const Monomial& m, double value) {
        LinearForm f;
        f.add(ms.class_of(m), 1);
        p.equalities.push_back(detail::summed_over_branches(f, branches, nc, value));
    };
    for (const auto& a : la) pin({{a}, {}}, behavior.alice_marginal(a.outcome, a.setting));
    for (const auto& b : lb) pin({{}, {b}}, behavior.bob_marginal(b.outcome, b.setting));
    for (const auto& a : la)
        for (const auto& b : lb) pin({{a}, {b}}, behavior(a.outcome, b.outcome, a.setting, b.setting));
    p.description = "guess " + t.to_string() + " from the full behavior; " + std::to_string(branches) + " branches; " + ms.summary();
    return p;
}

/// Eve's guessing probability given only Bell values: Σ_e f(P_e) = β for each pin.
inline sdp::Problem guessing_sdp(const MomentStructure& ms, const std::vector<BellConstraint>& pins, const GuessTarget& t) {
    if (pins.empty()) throw std::invalid_argument("bell-value mode needs at least one functional");
    sdp::Problem p = detail::guessing_skeleton(ms, t);
    const int branches = t.branches(ms.scenario()), nc = ms.num_classes();
    std::string names;
    for (const auto& pin : pins) {
        if (!std::isfinite(pin.value)) throw std::invalid_argument("bell value must be finite");
        p.equalities.push_back(detail::summed_over_branches(compile(ms, pin.functional), branches, nc, pin.value));
        names += (names.empty() ? "" : ", ") + pin.functional.name();
    }
    p.description = "guess " + t.to_string() + " from Bell values of " + names + "; " + std::to_string(branches) + " branches; " +
                    ms.summary();
    return p;
}

}  // namespace dirc::npa
