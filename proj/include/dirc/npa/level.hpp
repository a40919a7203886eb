#pragma once

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dirc::npa {

/// "INT(+PATTERN)*": every word of length ≤ base, plus the words whose party
/// pattern matches one of the extras (e.g. "1+AB", "2+AAB+ABB").
struct LevelSpec {
    int base_level = 1;
    std::vector<std::string> extra_classes;

    /// (#A, #B) of every extra pattern, in order of appearance.
    std::vector<std::pair<int, int>> extra_counts() const {
        std::vector<std::pair<int, int>> out;
        for (const auto& p : extra_classes) {
            const auto a = static_cast<int>(std::count(p.begin(), p.end(), 'A'));
            out.emplace_back(a, static_cast<int>(p.size()) - a);
        }
        return out;
    }

    std::string to_string() const {
        std::string s = std::to_string(base_level);
        for (const auto& p : extra_classes) s += "+" + p;
        return s;
    }

    bool operator==(const LevelSpec&) const = default;
};

inline LevelSpec parse_level(const std::string& text) {
    auto fail = [&](const std::string& why) { return std::invalid_argument("level '" + text + "': " + why); };
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
        const auto plus = text.find('+', start);
        parts.push_back(text.substr(start, plus == std::string::npos ? std::string::npos : plus - start));
        if (plus == std::string::npos) break;
        start = plus + 1;
    }
    const std::string& base = parts.front();
    if (base.empty() || !std::all_of(base.begin(), base.end(), [](unsigned char c) { return std::isdigit(c); }))
        throw fail("expected a non-negative integer before any '+'");
    if (base.size() > 2) throw fail("base level too large");
    LevelSpec l;
    l.base_level = std::stoi(base);
    for (std::size_t i = 1; i < parts.size(); ++i) {
        std::string p = parts[i];
        if (p.empty()) throw fail("empty pattern");
        for (char c : p)
            if (c != 'A' && c != 'B') throw fail(std::string("unknown party letter '") + c + "'");
        if (p.size() < 2) throw fail("patterns need at least two letters");
        // parties commute, so only the counts matter
        std::sort(p.begin(), p.end());
        if (std::find(l.extra_classes.begin(), l.extra_classes.end(), p) == l.extra_classes.end()) l.extra_classes.push_back(p);
    }
    return l;
}

}  // namespace dirc::npa
