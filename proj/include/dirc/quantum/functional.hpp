#pragma once

#include <dirc/quantum/scenario.hpp>

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>

namespace dirc {

/// (a, b, x, y) key of a joint probability P(ab|xy).
struct ProbIndex {
    int a = 0, b = 0, x = 0, y = 0;
    friend auto operator<=>(const ProbIndex&, const ProbIndex&) = default;
};

/// Linear functional Σ c(a,b,x,y) P(ab|xy) + constant on behaviors.
/// Correlator terms are compiled into probability coefficients on insertion.
class BellFunctional {
public:
    BellFunctional() = default;
    BellFunctional(Scenario s, std::string name) : scenario_(std::move(s)), name_(std::move(name)) {}

    const Scenario& scenario() const { return scenario_; }
    const std::string& name() const { return name_; }
    const std::map<ProbIndex, double>& coefficients() const { return coefficients_; }
    double constant() const { return constant_; }

    std::optional<double> quantum_bound;
    std::optional<double> classical_bound;

    BellFunctional& add_probability(int a, int b, int x, int y, double w) {
        if (!scenario_.valid(a, b, x, y)) throw std::out_of_range("functional: probability index outside scenario");
        double& c = coefficients_[{a, b, x, y}];
        c += w;
        if (c == 0) coefficients_.erase({a, b, x, y});
        return *this;
    }

    /// w·E_xy with E_xy = P(a=b) − P(a≠b); both settings must be two-outcome.
    BellFunctional& add_correlator(int x, int y, double w) {
        require_binary(scenario_, x, y);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) add_probability(a, b, x, y, a == b ? w : -w);
        return *this;
    }

    BellFunctional& add_constant(double c) {
        constant_ += c;
        return *this;
    }

    BellFunctional& set_name(std::string n) {
        name_ = std::move(n);
        return *this;
    }

    static void require_binary(const Scenario& s, int x, int y) {
        if (x < 0 || y < 0 || x >= s.settings(Party::alice) || y >= s.settings(Party::bob))
            throw std::out_of_range("correlator: setting outside scenario");
        if (s.outcomes(Party::alice, x) != 2 || s.outcomes(Party::bob, y) != 2)
            throw std::invalid_argument("correlator: setting with more than two outcomes");
    }

private:
    Scenario scenario_;
    std::string name_;
    std::map<ProbIndex, double> coefficients_;
    double constant_ = 0;
};

/// E_xy = Σ_ab χ(a,b) P(ab|xy), χ = +1 iff a = b.
inline double correlator(const Behavior& p, int x, int y) {
    BellFunctional::require_binary(p.scenario(), x, y);
    return p(0, 0, x, y) + p(1, 1, x, y) - p(0, 1, x, y) - p(1, 0, x, y);
}

inline double eval_functional(const BellFunctional& f, const Behavior& p) {
    if (!(f.scenario() == p.scenario())) throw std::invalid_argument("functional: scenario mismatch");
    double v = f.constant();
    for (const auto& [k, c] : f.coefficients()) v += c * p(k.a, k.b, k.x, k.y);
    return v;
}

namespace functionals {

/// E_ik + E_il + E_jk − E_jl (0-based settings).
inline BellFunctional chsh(const Scenario& s, int i, int j, int k, int l, std::string name = "CHSH") {
    BellFunctional f(s, std::move(name));
    f.add_correlator(i, k, 1).add_correlator(i, l, 1).add_correlator(j, k, 1).add_correlator(j, l, -1);
    f.quantum_bound = 2 * std::sqrt(2.0);
    f.classical_bound = 2;
    return f;
}

/// E₁₁ + δE₂₁ + E₁₂ − δE₂₂ on the 2×2 binary scenario.
inline BellFunctional tilted_chsh(double delta) {
    BellFunctional f(Scenario({2, 2}, {2, 2}), "tilted-CHSH");
    f.add_correlator(0, 0, 1).add_correlator(1, 0, delta).add_correlator(0, 1, 1).add_correlator(1, 1, -delta);
    f.quantum_bound = 2 * std::sqrt(1 + delta * delta);
    return f;
}

/// Elegant inequality on Alice settings 0..2 and Bob settings 0..3.
inline BellFunctional elegant(const Scenario& s) {
    static constexpr int sign[3][4] = {{1, 1, -1, -1}, {1, -1, 1, -1}, {1, -1, -1, 1}};
    BellFunctional f(s, "elegant");
    for (int x = 0; x < 3; ++x)
        for (int y = 0; y < 4; ++y) f.add_correlator(x, y, sign[x][y]);
    f.quantum_bound = 4 * std::sqrt(3.0);
    f.classical_bound = 6;
    return f;
}

/// Elegant functional minus k Σ_i P(a=i, b=0 | x=pov, y=i).
inline BellFunctional modified_elegant(const Scenario& s, int povm_setting, double k) {
    BellFunctional f = elegant(s);
    f.set_name("modified-elegant");
    for (int i = 0; i < 4; ++i) f.add_probability(i, 0, povm_setting, i, -k);
    return f;
}

/// Seven-setting fork inequality; settings 0..6 of both parties.
inline BellFunctional fork(const Scenario& s, double d) {
    BellFunctional f(s, "fork");
    const std::tuple<int, int, double> terms[] = {
        {1, 1, 1},  {2, 2, 1},  {3, 3, 1},  {1, 4, 1},  {2, 4, d},  {1, 5, 1},  {2, 5, -d}, {1, 6, -1}, {3, 6, d},
        {1, 7, -1}, {3, 7, -d}, {4, 1, d},  {4, 3, 1},  {5, 1, -d}, {5, 3, 1},  {6, 2, d},  {6, 3, -1}, {7, 2, -d},
        {7, 3, -1}};
    for (const auto& [x, y, w] : terms) f.add_correlator(x - 1, y - 1, w);
    f.quantum_bound = 3 + 8 * std::sqrt(1 + d * d);
    f.classical_bound = 11;
    return f;
}

/// Fork functional minus the alignment penalties on the four-outcome
/// settings (index 7 for both parties).
inline BellFunctional modified_fork(const Scenario& s, double d, double k) {
    BellFunctional f = fork(s, d);
    f.set_name("modified-fork");
    for (int i = 0; i < 4; ++i) {
        f.add_probability(i, 0, 7, i + 3, -k);
        f.add_probability(0, i, i + 3, 7, -k);
    }
    return f;
}

}  // namespace functionals

}  // namespace dirc
