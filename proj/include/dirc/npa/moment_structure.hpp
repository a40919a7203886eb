#pragma once

#include <dirc/npa/level.hpp>
#include <dirc/npa/monomial.hpp>
#include <dirc/quantum/measurement.hpp>

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace dirc::npa {

namespace detail {

inline void words_of_length(const std::vector<Letter>& alphabet, std::size_t n, std::vector<Letter>& cur,
                            std::vector<std::vector<Letter>>& out) {
    if (cur.size() == n) {
        out.push_back(cur);
        return;
    }
    for (const auto& l : alphabet) {
        if (!cur.empty() && cur.back().setting == l.setting) continue;
        cur.push_back(l);
        words_of_length(alphabet, n, cur, out);
        cur.pop_back();
    }
}

inline std::vector<std::vector<Letter>> words_of_length(const std::vector<Letter>& alphabet, std::size_t n) {
    std::vector<std::vector<Letter>> out;
    std::vector<Letter> cur;
    words_of_length(alphabet, n, cur, out);
    return out;
}

inline bool basis_less(const Monomial& u, const Monomial& v) {
    if (u.length() != v.length()) return u.length() < v.length();
    if (u.pattern() != v.pattern()) return u.pattern() < v.pattern();
    return u < v;
}

}  // namespace detail

/// Reduced monomials spanning the moment matrix, sorted by length, party
/// pattern, then letters.
inline std::vector<Monomial> monomial_basis(const Scenario& s, const LevelSpec& l) {
    if (l.base_level < 0) throw std::invalid_argument("level: negative base");
    const auto la = letters(s, Party::alice), lb = letters(s, Party::bob);
    std::set<std::pair<int, int>> shapes;
    for (int n = 0; n <= l.base_level; ++n)
        for (int a = 0; a <= n; ++a) shapes.insert({a, n - a});
    for (const auto& c : l.extra_counts()) shapes.insert(c);
    std::vector<Monomial> basis;
    for (const auto& [na, nb] : shapes) {
        const auto wa = detail::words_of_length(la, static_cast<std::size_t>(na));
        const auto wb = detail::words_of_length(lb, static_cast<std::size_t>(nb));
        for (const auto& a : wa)
            for (const auto& b : wb) basis.push_back({a, b});
    }
    std::sort(basis.begin(), basis.end(), detail::basis_less);
    return basis;
}

/// Affine expression Σ coef·⟨class⟩ in moment classes.
struct LinearForm {
    std::map<int, double> terms;

    void add(int cls, double c) {
        if (c == 0) return;
        if ((terms[cls] += c) == 0) terms.erase(cls);
    }
    LinearForm& operator+=(const LinearForm& o) {
        for (const auto& [k, v] : o.terms) add(k, v);
        return *this;
    }
    LinearForm scaled(double f) const {
        LinearForm r;
        for (const auto& [k, v] : terms) r.add(k, v * f);
        return r;
    }
    double evaluate(const std::vector<double>& moments) const {
        double s = 0;
        for (const auto& [k, v] : terms) s += v * moments[static_cast<std::size_t>(k)];
        return s;
    }
};

/// Moment matrix Γ_ij = ⟨m_i† m_j⟩ with entries grouped into classes.
/// Class 0 is ⟨1⟩.
class MomentStructure {
public:
    static constexpr int zero = -1;

    MomentStructure(const Scenario& s, const LevelSpec& l) : scenario_(s), level_(l), basis_(monomial_basis(s, l)) {
        if (basis_.empty() || !basis_.front().is_identity()) throw std::logic_error("moment basis must start with 1");
        const int n = size();
        entry_.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), zero);
        class_id({});
        std::vector<Monomial> adj;
        for (const auto& m : basis_) adj.push_back(adjoint(m));
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                const auto w = multiply(adj[static_cast<std::size_t>(i)], basis_[static_cast<std::size_t>(j)]);
                const int c = w ? class_id(symmetric_key(*w)) : zero;
                entry_[idx(i, j)] = entry_[idx(j, i)] = c;
            }
    }

    const Scenario& scenario() const { return scenario_; }
    const LevelSpec& level() const { return level_; }
    const std::vector<Monomial>& basis() const { return basis_; }
    int size() const { return static_cast<int>(basis_.size()); }
    int num_classes() const { return static_cast<int>(keys_.size()); }
    const Monomial& class_key(int c) const { return keys_.at(static_cast<std::size_t>(c)); }

    /// Class of entry (i,j), or zero.
    int entry(int i, int j) const { return entry_[idx(i, j)]; }

    std::size_t zero_entries() const {
        return static_cast<std::size_t>(std::count(entry_.begin(), entry_.end(), zero));
    }

    /// Class holding ⟨m⟩; throws if the level does not produce it.
    int class_of(const Monomial& m) const {
        const auto it = index_.find(symmetric_key(m));
        if (it == index_.end())
            throw std::invalid_argument("level " + level_.to_string() + " has no moment for " + to_string(m));
        return it->second;
    }

    /// ⟨Π_{a|x}⟩ with the eliminated outcome written as 1 − Σ others.
    LinearForm projector(Party p, int outcome, int setting) const {
        const int r = scenario_.outcomes(p, setting);
        if (outcome < 0 || outcome >= r) throw std::out_of_range("projector outcome");
        LinearForm f;
        auto single = [&](int a) {
            Monomial m;
            (p == Party::alice ? m.alice : m.bob).push_back({p, setting, a});
            return class_of(m);
        };
        if (outcome + 1 < r) {
            f.add(single(outcome), 1);
        } else {
            f.add(0, 1);
            for (int a = 0; a + 1 < r; ++a) f.add(single(a), -1);
        }
        return f;
    }

    /// P(ab|xy) as a linear form in moment classes.
    LinearForm probability(int a, int b, int x, int y) const {
        if (!scenario_.valid(a, b, x, y)) throw std::out_of_range("probability index outside scenario");
        const auto fa = letter_terms(Party::alice, a, x), fb = letter_terms(Party::bob, b, y);
        LinearForm f;
        for (const auto& [la, ca] : fa)
            for (const auto& [lb, cb] : fb) {
                Monomial m;
                if (la) m.alice.push_back(*la);
                if (lb) m.bob.push_back(*lb);
                f.add(class_of(m), ca * cb);
            }
        return f;
    }

    LinearForm alice_marginal(int a, int x) const { return projector(Party::alice, a, x); }
    LinearForm bob_marginal(int b, int y) const { return projector(Party::bob, b, y); }

    /// True when each non-identity basis word keeps a basis word after
    /// dropping one leading letter; then every diagonal moment is ≤ ⟨1⟩ and
    /// every |moment| ≤ ⟨1⟩ on the feasible set.
    bool prefix_closed() const {
        std::set<Monomial> in(basis_.begin(), basis_.end());
        for (const auto& m : basis_) {
            if (m.is_identity()) continue;
            bool ok = false;
            if (!m.alice.empty()) {
                Monomial r{std::vector<Letter>(m.alice.begin() + 1, m.alice.end()), m.bob};
                ok = in.count(r) > 0;
            }
            if (!ok && !m.bob.empty()) {
                Monomial r{m.alice, std::vector<Letter>(m.bob.begin() + 1, m.bob.end())};
                ok = in.count(r) > 0;
            }
            if (!ok) return false;
        }
        return true;
    }

    std::string summary() const {
        return "level " + level_.to_string() + ", moment matrix " + std::to_string(size()) + "x" + std::to_string(size()) +
               ", " + std::to_string(num_classes()) + " moment classes";
    }

private:
    Scenario scenario_;
    LevelSpec level_;
    std::vector<Monomial> basis_;
    std::vector<int> entry_;
    std::vector<Monomial> keys_;
    std::map<Monomial, int> index_;

    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * basis_.size() + static_cast<std::size_t>(j); }

    int class_id(const Monomial& key) {
        const auto [it, fresh] = index_.try_emplace(key, static_cast<int>(keys_.size()));
        if (fresh) keys_.push_back(key);
        return it->second;
    }

    /// Π_{a|x} as Σ coef·letter, where an empty letter means 1.
    std::vector<std::pair<std::optional<Letter>, double>> letter_terms(Party p, int a, int x) const {
        const int r = scenario_.outcomes(p, x);
        if (a + 1 < r) return {{Letter{p, x, a}, 1.0}};
        std::vector<std::pair<std::optional<Letter>, double>> t{{std::nullopt, 1.0}};
        for (int o = 0; o + 1 < r; ++o) t.push_back({Letter{p, x, o}, -1.0});
        return t;
    }
};

/// Moment of every class on an explicit two-qubit model (real parts).
inline std::vector<double> moment_vector(const MomentStructure& ms, const TwoQubit4& rho, const std::vector<QubitMeasurement>& alice,
                                         const std::vector<QubitMeasurement>& bob) {
    std::vector<double> out;
    for (int c = 0; c < ms.num_classes(); ++c) {
        const Monomial& m = ms.class_key(c);
        Qubit2 a = Qubit2::Identity(), b = Qubit2::Identity();
        for (const auto& l : m.alice) a = a * alice.at(static_cast<std::size_t>(l.setting)).elements.at(static_cast<std::size_t>(l.outcome));
        for (const auto& l : m.bob) b = b * bob.at(static_cast<std::size_t>(l.setting)).elements.at(static_cast<std::size_t>(l.outcome));
        TwoQubit4 op;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) op.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
        out.push_back((rho * op).trace().real());
    }
    return out;
}

}  // namespace dirc::npa
