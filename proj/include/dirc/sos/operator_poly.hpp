#pragma once

#include <dirc/sos/quad_ext.hpp>

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace dirc::sos {

/// Product of one party's dichotomic observables, letters numbered from 1.
/// Reduced words have no two equal adjacent letters.
using PartyWord = std::vector<int>;

/// Alice's word and Bob's word; the parties commute, so this is a normal form.
struct Word {
    PartyWord alice;
    PartyWord bob;

    friend auto operator<=>(const Word& a, const Word& b) {
        if (a.alice.size() + a.bob.size() != b.alice.size() + b.bob.size())
            return a.alice.size() + a.bob.size() <=> b.alice.size() + b.bob.size();
        if (auto c = a.alice <=> b.alice; c != 0) return c;
        return a.bob <=> b.bob;
    }
    friend bool operator==(const Word&, const Word&) = default;

    std::string to_string() const {
        if (alice.empty() && bob.empty()) return "1";
        std::string s;
        for (int l : alice) s += "A" + std::to_string(l);
        for (int l : bob) s += "B" + std::to_string(l);
        return s;
    }
};

/// a·b with X² = 1 applied at the junction (inputs are reduced).
inline PartyWord concat_reduce(const PartyWord& a, const PartyWord& b) {
    PartyWord out = a;
    for (int l : b) {
        if (!out.empty() && out.back() == l) out.pop_back();
        else out.push_back(l);
    }
    return out;
}

inline PartyWord reduce(const PartyWord& w) { return concat_reduce({}, w); }

/// Finite sum of words with coefficients in ℚ(√3); zero coefficients are never stored.
class OperatorPoly {
public:
    OperatorPoly() = default;
    OperatorPoly(QuadExt c) { add(Word{}, std::move(c)); }
    OperatorPoly(int c) : OperatorPoly(QuadExt(c)) {}

    static OperatorPoly alice(int letter) { return term({{letter}, {}}); }
    static OperatorPoly bob(int letter) { return term({{}, {letter}}); }
    static OperatorPoly term(Word w, QuadExt c = 1) {
        OperatorPoly p;
        w.alice = reduce(w.alice);
        w.bob = reduce(w.bob);
        p.add(std::move(w), std::move(c));
        return p;
    }

    const std::map<Word, QuadExt>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    QuadExt coefficient(const Word& w) const {
        auto it = terms_.find(w);
        return it == terms_.end() ? QuadExt{} : it->second;
    }

    OperatorPoly& operator+=(const OperatorPoly& o) {
        for (const auto& [w, c] : o.terms_) add(w, c);
        return *this;
    }
    OperatorPoly& operator-=(const OperatorPoly& o) {
        for (const auto& [w, c] : o.terms_) add(w, -c);
        return *this;
    }
    OperatorPoly operator-() const {
        OperatorPoly r;
        r -= *this;
        return r;
    }

    friend OperatorPoly operator+(OperatorPoly a, const OperatorPoly& b) { return a += b; }
    friend OperatorPoly operator-(OperatorPoly a, const OperatorPoly& b) { return a -= b; }

    friend OperatorPoly operator*(const OperatorPoly& a, const OperatorPoly& b) {
        OperatorPoly r;
        for (const auto& [wa, ca] : a.terms_)
            for (const auto& [wb, cb] : b.terms_)
                r.add({concat_reduce(wa.alice, wb.alice), concat_reduce(wa.bob, wb.bob)}, ca * cb);
        return r;
    }
    friend OperatorPoly operator*(const QuadExt& s, const OperatorPoly& p) {
        OperatorPoly r;
        if (s.is_zero()) return r;
        for (const auto& [w, c] : p.terms_) r.terms_.emplace(w, s * c);
        return r;
    }

    /// Letters are Hermitian, so the adjoint reverses each party word and
    /// conjugates nothing (coefficients are real).
    OperatorPoly adjoint() const {
        OperatorPoly r;
        for (const auto& [w, c] : terms_) {
            Word v{{w.alice.rbegin(), w.alice.rend()}, {w.bob.rbegin(), w.bob.rend()}};
            r.add(std::move(v), c);
        }
        return r;
    }

    friend bool operator==(const OperatorPoly&, const OperatorPoly&) = default;

    std::string to_string() const {
        if (terms_.empty()) return "0";
        std::string s;
        for (const auto& [w, c] : terms_) {
            if (!s.empty()) s += " + ";
            s += "(" + c.to_string() + ")";
            if (!w.alice.empty() || !w.bob.empty()) s += "·" + w.to_string();
        }
        return s;
    }

private:
    void add(Word w, QuadExt c) {
        if (c.is_zero()) return;
        auto [it, fresh] = terms_.try_emplace(std::move(w), c);
        if (fresh) return;
        it->second += c;
        if (it->second.is_zero()) terms_.erase(it);
    }

    std::map<Word, QuadExt> terms_;
};

}  // namespace dirc::sos
