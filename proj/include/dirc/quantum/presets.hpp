#pragma once

#include <dirc/quantum/born.hpp>
#include <dirc/quantum/functional.hpp>
#include <dirc/quantum/target.hpp>

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace dirc {

/// A state, the two parties' measurements and the Bell functionals that go
/// with them.
struct Setup {
    std::string name;
    TwoQubit4 state = phi_plus();
    std::vector<QubitMeasurement> alice;
    std::vector<QubitMeasurement> bob;
    std::vector<BellFunctional> functionals;
    /// Functionals pinned in bell-value mode.
    std::vector<int> certifying;
    GuessTarget default_target;
    std::string default_mode = "behavior";
    std::map<std::string, double> parameters;

    Scenario scenario() const { return scenario_of(alice, bob); }
    Behavior behavior() const { return born_behavior(state, alice, bob); }

    void validate() const {
        validate_state(state);
        for (std::size_t i = 0; i < alice.size(); ++i) require_valid(alice[i], "alice", i);
        for (std::size_t i = 0; i < bob.size(); ++i) require_valid(bob[i], "bob", i);
        const Scenario s = scenario();
        for (const auto& f : functionals)
            if (!(f.scenario() == s)) throw std::invalid_argument("setup: functional '" + f.name() + "' has a different scenario");
        for (int i : certifying)
            if (i < 0 || i >= static_cast<int>(functionals.size())) throw std::out_of_range("setup: certifying index");
        default_target.validate(s);
    }
};

struct PresetParams {
    double delta = 0.0676946;
    double k = 1;
};

namespace presets {

/// Complex conjugate of n·σ as a Bloch vector. On |φ⁺⟩ the correlation
/// ⟨(a·σ) ⊗ (b·σ)⟩ equals a·conj(b).
inline Bloch conj(const Bloch& n) { return {n(0), -n(1), n(2)}; }

inline Setup construction_one() {
    const double r = 1 / std::sqrt(2.0);
    Setup s;
    s.name = "construction-one";
    s.alice = {QubitMeasurement::observable({1, 0, 0}), QubitMeasurement::observable({0, 1, 0}),
               QubitMeasurement::observable({0, 0, 1})};
    // (σx±σy)/√2, (σx±σz)/√2, (σy±σz)/√2, measured as complex conjugates so
    // each pair maximally violates CHSH with the matching Pauli pair.
    const Bloch listed[] = {{r, r, 0}, {r, -r, 0}, {r, 0, r}, {r, 0, -r}, {0, r, r}, {0, r, -r}};
    for (const auto& n : listed) s.bob.push_back(QubitMeasurement::observable(conj(n)));
    const double t = 1 / std::sqrt(3.0);
    s.bob.push_back(QubitMeasurement::from_bloch({{t, t, t}, {t, -t, -t}, {-t, t, -t}, {-t, -t, t}}));
    const Scenario sc = s.scenario();
    s.functionals = {functionals::chsh(sc, 0, 1, 0, 1, "CHSH(1,2;1,2)"), functionals::chsh(sc, 0, 2, 2, 3, "CHSH(1,3;3,4)"),
                     functionals::chsh(sc, 1, 2, 4, 5, "CHSH(2,3;5,6)")};
    s.certifying = {0, 1, 2};
    s.default_target = GuessTarget::local(Party::bob, 6);
    s.default_mode = "behavior";
    return s;
}

/// Bob's elegant-inequality observables B_1..B_4 (tetrahedron).
inline std::vector<Bloch> elegant_bob_vectors() {
    const double t = 1 / std::sqrt(3.0);
    return {{t, -t, t}, {t, t, -t}, {-t, -t, -t}, {-t, t, t}};
}

inline Setup construction_two(const PresetParams& p = {}) {
    if (!(p.k > 0)) throw std::invalid_argument("construction-two: k must be positive");
    Setup s;
    s.name = "construction-two";
    s.alice = {QubitMeasurement::observable({1, 0, 0}), QubitMeasurement::observable({0, 1, 0}),
               QubitMeasurement::observable({0, 0, 1})};
    std::vector<Bloch> anti;
    for (const auto& n : elegant_bob_vectors()) {
        s.bob.push_back(QubitMeasurement::observable(n));
        anti.push_back(-conj(n));
    }
    s.alice.push_back(QubitMeasurement::from_bloch(anti));
    const Scenario sc = s.scenario();
    s.functionals = {functionals::elegant(sc), functionals::modified_elegant(sc, 3, p.k)};
    s.certifying = {1};
    s.default_target = GuessTarget::local(Party::alice, 3);
    s.default_mode = "bell-value";
    s.parameters = {{"k", p.k}};
    return s;
}

inline Setup fork(const PresetParams& p = {}) {
    if (!(p.delta > 0 && p.delta < 1)) throw std::invalid_argument("fork: delta must lie in (0,1)");
    if (!(p.k > 0)) throw std::invalid_argument("fork: k must be positive");
    const double d = p.delta, c = 1 / std::sqrt(1 + d * d);
    const std::vector<Bloch> u = {c * Bloch(-1, d, 0), c * Bloch(-1, -d, 0), c * Bloch(1, 0, -d), c * Bloch(1, 0, d)};
    const std::vector<Bloch> v = {c * Bloch(-d, 0, -1), c * Bloch(d, 0, -1), c * Bloch(0, -d, 1), c * Bloch(0, d, 1)};
    Setup s;
    s.name = "fork";
    s.alice = {QubitMeasurement::observable({1, 0, 0}), QubitMeasurement::observable({0, 1, 0}),
               QubitMeasurement::observable({0, 0, 1})};
    s.bob = {QubitMeasurement::observable({1, 0, 0}), QubitMeasurement::observable({0, -1, 0}),
             QubitMeasurement::observable({0, 0, 1})};
    for (int i = 0; i < 4; ++i) {
        s.alice.push_back(QubitMeasurement::observable(-v[static_cast<std::size_t>(i)]));
        s.bob.push_back(QubitMeasurement::observable(-u[static_cast<std::size_t>(i)]));
    }
    std::vector<Bloch> ua, vb;
    for (int i = 0; i < 4; ++i) {
        ua.push_back(presets::conj(u[static_cast<std::size_t>(i)]));
        vb.push_back(presets::conj(v[static_cast<std::size_t>(i)]));
    }
    s.alice.push_back(QubitMeasurement::from_bloch(ua));
    s.bob.push_back(QubitMeasurement::from_bloch(vb));
    const Scenario sc = s.scenario();
    s.functionals = {functionals::fork(sc, d), functionals::modified_fork(sc, d, p.k)};
    s.certifying = {1};
    s.default_target = GuessTarget::global(7, 7);
    s.default_mode = "bell-value";
    s.parameters = {{"delta", d}, {"k", p.k}};
    return s;
}

}  // namespace presets

inline Setup preset(const std::string& name, const PresetParams& p = {}) {
    if (name == "construction-one") return presets::construction_one();
    if (name == "construction-two") return presets::construction_two(p);
    if (name == "fork") return presets::fork(p);
    throw std::invalid_argument("unknown preset '" + name + "'");
}

}  // namespace dirc
