#pragma once

#include <dirc/quantum/scenario.hpp>

#include <compare>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dirc::npa {

/// Projector Π_{outcome|setting} of one party. The last outcome of every
/// setting never appears as a letter; it is 1 minus the others.
struct Letter {
    Party party = Party::alice;
    int setting = 0;
    int outcome = 0;

    auto operator<=>(const Letter&) const = default;
};

/// Product of projectors with the two parties' letters kept apart (they
/// commute). Each word is reduced: no two neighbours share a setting.
struct Monomial {
    std::vector<Letter> alice;
    std::vector<Letter> bob;

    std::size_t length() const { return alice.size() + bob.size(); }
    bool is_identity() const { return alice.empty() && bob.empty(); }
    /// "AAB"-style pattern: Alice's count of A then Bob's count of B.
    std::string pattern() const { return std::string(alice.size(), 'A') + std::string(bob.size(), 'B'); }

    auto operator<=>(const Monomial&) const = default;
};

inline std::string to_string(const Letter& l) {
    return std::string(1, party_letter(l.party)) + "(" + std::to_string(l.outcome) + "|" + std::to_string(l.setting) + ")";
}

inline std::string to_string(const Monomial& m) {
    if (m.is_identity()) return "1";
    std::string s;
    for (const auto& l : m.alice) s += to_string(l);
    for (const auto& l : m.bob) s += to_string(l);
    return s;
}

/// Letters available to a party: outcomes 0..r−2 of every setting.
inline std::vector<Letter> letters(const Scenario& s, Party p) {
    std::vector<Letter> out;
    for (int x = 0; x < s.settings(p); ++x)
        for (int a = 0; a + 1 < s.outcomes(p, x); ++a) out.push_back({p, x, a});
    return out;
}

inline void require_letter(const Scenario& s, const Letter& l) {
    if (l.setting < 0 || l.setting >= s.settings(l.party) || l.outcome < 0 || l.outcome + 1 >= s.outcomes(l.party, l.setting))
        throw std::invalid_argument("invalid projector letter " + to_string(l));
}

namespace detail {

/// Appends l to a reduced word; false when the product vanishes.
inline bool push_reduced(std::vector<Letter>& w, const Letter& l) {
    if (!w.empty() && w.back().setting == l.setting) {
        if (w.back().outcome != l.outcome) return false;  // orthogonal outcomes
        return true;                                      // idempotent
    }
    w.push_back(l);
    return true;
}

}  // namespace detail

/// Normal form of a raw product, or nullopt when it is zero.
inline std::optional<Monomial> canonicalize(const std::vector<Letter>& word, const Scenario& s) {
    Monomial m;
    for (const auto& l : word) {
        require_letter(s, l);
        if (!detail::push_reduced(l.party == Party::alice ? m.alice : m.bob, l)) return std::nullopt;
    }
    return m;
}

/// Product u·v reduced; nullopt when zero. Inputs must already be reduced.
inline std::optional<Monomial> multiply(const Monomial& u, const Monomial& v) {
    Monomial m = u;
    for (const auto& l : v.alice)
        if (!detail::push_reduced(m.alice, l)) return std::nullopt;
    for (const auto& l : v.bob)
        if (!detail::push_reduced(m.bob, l)) return std::nullopt;
    return m;
}

inline Monomial adjoint(const Monomial& m) {
    return {std::vector<Letter>(m.alice.rbegin(), m.alice.rend()), std::vector<Letter>(m.bob.rbegin(), m.bob.rend())};
}

/// Representative shared by w and w† in a real-symmetric moment matrix.
inline Monomial symmetric_key(const Monomial& m) { return std::min(m, adjoint(m)); }

/// Letters of m in operator order, Alice's first.
inline std::vector<Letter> flatten(const Monomial& m) {
    std::vector<Letter> w = m.alice;
    w.insert(w.end(), m.bob.begin(), m.bob.end());
    return w;
}

}  // namespace dirc::npa
