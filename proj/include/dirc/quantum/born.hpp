#pragma once

#include <dirc/quantum/measurement.hpp>
#include <dirc/quantum/scenario.hpp>

#include <Eigen/Eigenvalues>
#include <stdexcept>
#include <string>

namespace dirc {

inline Scenario scenario_of(const std::vector<QubitMeasurement>& alice, const std::vector<QubitMeasurement>& bob) {
    std::vector<int> ra, rb;
    for (const auto& m : alice) ra.push_back(m.outcomes());
    for (const auto& m : bob) rb.push_back(m.outcomes());
    return Scenario(std::move(ra), std::move(rb));
}

/// Throws std::invalid_argument unless ρ is Hermitian, PSD and has unit trace.
inline void validate_state(const TwoQubit4& rho, double tol = 1e-12) {
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > tol) throw std::invalid_argument("state: not Hermitian");
    if (std::abs(rho.trace() - Complex(1, 0)) > tol) throw std::invalid_argument("state: trace differs from 1");
    Eigen::SelfAdjointEigenSolver<TwoQubit4> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol) throw std::invalid_argument("state: not positive semidefinite");
}

inline void require_valid(const QubitMeasurement& m, const char* who, std::size_t index) {
    const auto d = validate_measurement(m);
    if (!d.valid())
        throw std::invalid_argument(std::string("measurement ") + who + "[" + std::to_string(index) +
                                    "]: " + (!d.hermitian ? "non-Hermitian element" : !d.psd ? "element not PSD" : "elements do not sum to identity"));
}

inline TwoQubit4 kron(const Qubit2& a, const Qubit2& b) {
    TwoQubit4 k;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) k.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return k;
}

/// |φ⁺⟩⟨φ⁺| with |φ⁺⟩ = (|00⟩ + |11⟩)/√2.
inline TwoQubit4 phi_plus() {
    Eigen::Vector4cd v(1, 0, 0, 1);
    v /= std::sqrt(2.0);
    return v * v.adjoint();
}

/// P(ab|xy) = Tr[(A_{a|x} ⊗ B_{b|y}) ρ].
inline Behavior born_behavior(const TwoQubit4& rho, const std::vector<QubitMeasurement>& alice,
                              const std::vector<QubitMeasurement>& bob) {
    validate_state(rho);
    for (std::size_t i = 0; i < alice.size(); ++i) require_valid(alice[i], "alice", i);
    for (std::size_t i = 0; i < bob.size(); ++i) require_valid(bob[i], "bob", i);
    Behavior p(scenario_of(alice, bob));
    for (std::size_t x = 0; x < alice.size(); ++x)
        for (std::size_t y = 0; y < bob.size(); ++y)
            for (std::size_t a = 0; a < alice[x].elements.size(); ++a)
                for (std::size_t b = 0; b < bob[y].elements.size(); ++b) {
                    const Complex v = (kron(alice[x].elements[a], bob[y].elements[b]) * rho).trace();
                    if (std::abs(v.imag()) > 1e-12) throw std::domain_error("born rule: complex probability");
                    p(static_cast<int>(a), static_cast<int>(b), static_cast<int>(x), static_cast<int>(y)) =
                        std::max(0.0, v.real());
                }
    p.validate();
    return p;
}

/// v·P + (1 − v)·uniform noise.
inline Behavior mix_visibility(const Behavior& p, double v) {
    if (!(v >= 0 && v <= 1)) throw std::invalid_argument("visibility outside [0,1]");
    const Scenario& s = p.scenario();
    Behavior out(s);
    for (int x = 0; x < s.settings(Party::alice); ++x)
        for (int y = 0; y < s.settings(Party::bob); ++y) {
            const int ra = s.outcomes(Party::alice, x), rb = s.outcomes(Party::bob, y);
            const double noise = 1.0 / (ra * rb);
            for (int a = 0; a < ra; ++a)
                for (int b = 0; b < rb; ++b) out(a, b, x, y) = v * p(a, b, x, y) + (1 - v) * noise;
        }
    return out;
}

}  // namespace dirc
