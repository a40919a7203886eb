#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace dirc {

enum class Party { alice, bob };

inline char party_letter(Party p) { return p == Party::alice ? 'A' : 'B'; }

/// Bipartite Bell scenario: outcome count for every measurement setting of
/// each party. Settings and outcomes are 0-based everywhere in the library.
class Scenario {
public:
    Scenario() = default;
    Scenario(std::vector<int> alice_outcomes, std::vector<int> bob_outcomes)
        : alice_(std::move(alice_outcomes)), bob_(std::move(bob_outcomes)) {
        check(alice_, "alice");
        check(bob_, "bob");
    }

    const std::vector<int>& alice_outcomes() const { return alice_; }
    const std::vector<int>& bob_outcomes() const { return bob_; }
    const std::vector<int>& outcomes(Party p) const { return p == Party::alice ? alice_ : bob_; }

    int settings(Party p) const { return static_cast<int>(outcomes(p).size()); }
    int outcomes(Party p, int setting) const { return outcomes(p).at(static_cast<std::size_t>(setting)); }

    bool valid(int a, int b, int x, int y) const {
        return x >= 0 && y >= 0 && x < settings(Party::alice) && y < settings(Party::bob) && a >= 0 &&
               b >= 0 && a < alice_[static_cast<std::size_t>(x)] && b < bob_[static_cast<std::size_t>(y)];
    }

    friend bool operator==(const Scenario&, const Scenario&) = default;

private:
    static void check(const std::vector<int>& v, const char* who) {
        if (v.empty()) throw std::invalid_argument(std::string("scenario: no settings for ") + who);
        for (int r : v)
            if (r < 2) throw std::invalid_argument(std::string("scenario: setting with fewer than 2 outcomes for ") + who);
    }

    std::vector<int> alice_;
    std::vector<int> bob_;
};

/// Conditional probability table P(ab|xy) over a Scenario.
class Behavior {
public:
    Behavior() = default;
    explicit Behavior(Scenario s) : scenario_(std::move(s)) {
        const int ma = scenario_.settings(Party::alice);
        const int mb = scenario_.settings(Party::bob);
        offsets_.resize(static_cast<std::size_t>(ma * mb));
        std::size_t total = 0;
        for (int x = 0; x < ma; ++x)
            for (int y = 0; y < mb; ++y) {
                offsets_[static_cast<std::size_t>(x * mb + y)] = total;
                total += static_cast<std::size_t>(scenario_.outcomes(Party::alice, x) * scenario_.outcomes(Party::bob, y));
            }
        table_.assign(total, 0.0);
    }

    const Scenario& scenario() const { return scenario_; }

    double operator()(int a, int b, int x, int y) const { return table_[index(a, b, x, y)]; }
    double& operator()(int a, int b, int x, int y) { return table_[index(a, b, x, y)]; }

    double alice_marginal(int a, int x, int y = 0) const {
        double s = 0;
        for (int b = 0; b < scenario_.outcomes(Party::bob, y); ++b) s += (*this)(a, b, x, y);
        return s;
    }
    double bob_marginal(int b, int y, int x = 0) const {
        double s = 0;
        for (int a = 0; a < scenario_.outcomes(Party::alice, x); ++a) s += (*this)(a, b, x, y);
        return s;
    }

    const std::vector<double>& data() const { return table_; }

    /// Throws std::domain_error naming the first violated invariant
    /// (range, normalization, no-signalling).
    void validate(double tol = 1e-12) const {
        const int ma = scenario_.settings(Party::alice);
        const int mb = scenario_.settings(Party::bob);
        for (double p : table_)
            if (!(p >= -tol && p <= 1 + tol)) throw std::domain_error("behavior: probability outside [0,1]");
        for (int x = 0; x < ma; ++x)
            for (int y = 0; y < mb; ++y) {
                double s = 0;
                for (int a = 0; a < scenario_.outcomes(Party::alice, x); ++a)
                    for (int b = 0; b < scenario_.outcomes(Party::bob, y); ++b) s += (*this)(a, b, x, y);
                if (std::abs(s - 1) > tol) throw std::domain_error("behavior: not normalized");
            }
        for (int x = 0; x < ma; ++x)
            for (int a = 0; a < scenario_.outcomes(Party::alice, x); ++a)
                for (int y = 1; y < mb; ++y)
                    if (std::abs(alice_marginal(a, x, y) - alice_marginal(a, x, 0)) > tol)
                        throw std::domain_error("behavior: Alice marginal depends on y");
        for (int y = 0; y < mb; ++y)
            for (int b = 0; b < scenario_.outcomes(Party::bob, y); ++b)
                for (int x = 1; x < ma; ++x)
                    if (std::abs(bob_marginal(b, y, x) - bob_marginal(b, y, 0)) > tol)
                        throw std::domain_error("behavior: Bob marginal depends on x");
    }

    bool is_valid(double tol = 1e-12) const {
        try {
            validate(tol);
            return true;
        } catch (const std::domain_error&) {
            return false;
        }
    }

private:
    std::size_t index(int a, int b, int x, int y) const {
        if (!scenario_.valid(a, b, x, y)) throw std::out_of_range("behavior: index outside scenario");
        const int mb = scenario_.settings(Party::bob);
        return offsets_[static_cast<std::size_t>(x * mb + y)] +
               static_cast<std::size_t>(a * scenario_.outcomes(Party::bob, y) + b);
    }

    Scenario scenario_;
    std::vector<std::size_t> offsets_;
    std::vector<double> table_;
};

}  // namespace dirc
