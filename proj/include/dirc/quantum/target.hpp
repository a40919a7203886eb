#pragma once

#include <dirc/quantum/scenario.hpp>

#include <charconv>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dirc {

/// Outcome(s) Eve tries to guess. Settings are 0-based; the text form
/// ("local:B:7", "global:8:8") uses 1-based settings.
struct GuessTarget {
    enum class Kind { local, global };
    Kind kind = Kind::local;
    Party party = Party::alice;  // local only
    int setting = 0;             // x̄ (global) or the local party's setting
    int partner_setting = 0;     // ȳ, global only

    static GuessTarget local(Party p, int s) { return {Kind::local, p, s, 0}; }
    static GuessTarget global(int x, int y) { return {Kind::global, Party::alice, x, y}; }

    void validate(const Scenario& s) const {
        if (kind == Kind::local) {
            if (setting < 0 || setting >= s.settings(party)) throw std::out_of_range("target: setting outside scenario");
        } else if (setting < 0 || setting >= s.settings(Party::alice) || partner_setting < 0 ||
                   partner_setting >= s.settings(Party::bob)) {
            throw std::out_of_range("target: setting outside scenario");
        }
    }

    /// Number of guess branches (outcomes or outcome pairs).
    int branches(const Scenario& s) const {
        validate(s);
        if (kind == Kind::local) return s.outcomes(party, setting);
        return s.outcomes(Party::alice, setting) * s.outcomes(Party::bob, partner_setting);
    }

    std::string to_string() const {
        if (kind == Kind::local)
            return std::string("local:") + party_letter(party) + ":" + std::to_string(setting + 1);
        return "global:" + std::to_string(setting + 1) + ":" + std::to_string(partner_setting + 1);
    }

    static GuessTarget parse(std::string_view text) {
        auto fail = [&] { return std::invalid_argument("malformed target '" + std::string(text) + "'"); };
        auto number = [&](std::string_view s) {
            int v = 0;
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc() || p != s.data() + s.size() || v < 1) throw fail();
            return v - 1;
        };
        auto c1 = text.find(':');
        if (c1 == std::string_view::npos) throw fail();
        auto c2 = text.find(':', c1 + 1);
        if (c2 == std::string_view::npos) throw fail();
        const auto kind = text.substr(0, c1), first = text.substr(c1 + 1, c2 - c1 - 1), second = text.substr(c2 + 1);
        if (kind == "local") {
            if (first != "A" && first != "B") throw fail();
            return local(first == "A" ? Party::alice : Party::bob, number(second));
        }
        if (kind == "global") return global(number(first), number(second));
        throw fail();
    }

    friend bool operator==(const GuessTarget&, const GuessTarget&) = default;
};

}  // namespace dirc
