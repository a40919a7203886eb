#pragma once

#include <dirc/sdp/problem.hpp>

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

// SDPA sparse format. SDPA minimizes Σ cᵢyᵢ subject to Σ yᵢFᵢ − F₀ ⪰ 0, so a
// Problem is written with c and F₀ negated. Equalities become a diagonal
// block holding a·y − g ≥ 0 and g − a·y ≥ 0; a comment line marks that block
// so read_sdpa can restore them.

namespace dirc::sdp {

inline void write_sdpa(std::ostream& os, const Problem& p) {
    p.validate();
    os << std::setprecision(17);
    std::string desc = p.description.empty() ? "dirc problem" : p.description;
    for (char& ch : desc)
        if (ch == '\n') ch = ' ';
    os << "\"" << desc << "\n";
    os << "\"dirc offset: " << p.objective_offset << "\n";
    if (p.variable_bound) os << "\"dirc variable-bound: " << *p.variable_bound << "\n";
    const std::size_t nb = p.blocks.size();
    if (!p.equalities.empty()) os << "\"dirc equalities: block " << nb + 1 << "\n";
    os << p.num_vars << "\n" << nb + (p.equalities.empty() ? 0 : 1) << "\n";
    for (const auto& b : p.blocks) os << b.dim << ' ';
    if (!p.equalities.empty()) os << -2 * static_cast<long>(p.equalities.size());
    os << "\n";
    for (int i = 0; i < p.num_vars; ++i) os << -p.objective[static_cast<std::size_t>(i)] << (i + 1 < p.num_vars ? " " : "\n");
    if (p.num_vars == 0) os << "\n";
    for (std::size_t k = 0; k < nb; ++k) {
        const auto& b = p.blocks[k];
        for (const auto& e : b.constant)
            if (e.value != 0) os << 0 << ' ' << k + 1 << ' ' << e.row + 1 << ' ' << e.col + 1 << ' ' << -e.value << "\n";
        for (const auto& [v, es] : b.terms)
            for (const auto& e : es)
                if (e.value != 0) os << v + 1 << ' ' << k + 1 << ' ' << e.row + 1 << ' ' << e.col + 1 << ' ' << e.value << "\n";
    }
    for (std::size_t r = 0; r < p.equalities.size(); ++r) {
        const auto& eq = p.equalities[r];
        const std::size_t lo = 2 * r + 1, hi = 2 * r + 2;
        if (eq.rhs != 0) {
            os << 0 << ' ' << nb + 1 << ' ' << lo << ' ' << lo << ' ' << eq.rhs << "\n";
            os << 0 << ' ' << nb + 1 << ' ' << hi << ' ' << hi << ' ' << -eq.rhs << "\n";
        }
        for (const auto& [v, a] : eq.terms) {
            os << v + 1 << ' ' << nb + 1 << ' ' << lo << ' ' << lo << ' ' << a << "\n";
            os << v + 1 << ' ' << nb + 1 << ' ' << hi << ' ' << hi << ' ' << -a << "\n";
        }
    }
}

inline void write_sdpa(const std::string& path, const Problem& p) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    write_sdpa(out, p);
}

inline Problem read_sdpa(std::istream& in) {
    Problem p;
    std::string line, body;
    long equality_block = -1;
    bool header_done = false;
    while (std::getline(in, line)) {
        if (!header_done && !line.empty() && (line[0] == '"' || line[0] == '*')) {
            std::istringstream c(line.substr(1));
            std::string a, b;
            c >> a >> b;
            if (a == "dirc" && b == "offset:") c >> p.objective_offset;
            else if (a == "dirc" && b == "variable-bound:") {
                double v;
                if (c >> v) p.variable_bound = v;
            } else if (a == "dirc" && b == "equalities:") {
                std::string word;
                c >> word >> equality_block;
            } else if (p.description.empty() && a != "dirc") {
                p.description = line.substr(1);
            }
            continue;
        }
        header_done = true;
        for (char& ch : line)
            if (ch == ',' || ch == '{' || ch == '}' || ch == '(' || ch == ')') ch = ' ';
        body += line + "\n";
    }
    std::istringstream is(body);
    long m = 0, nb = 0;
    if (!(is >> m >> nb) || m < 0 || nb <= 0) throw std::invalid_argument("sdpa: bad header");
    std::vector<long> dims(static_cast<std::size_t>(nb));
    for (auto& d : dims)
        if (!(is >> d) || d == 0) throw std::invalid_argument("sdpa: bad block structure");
    p.num_vars = static_cast<int>(m);
    p.objective.resize(static_cast<std::size_t>(m));
    for (auto& c : p.objective) {
        if (!(is >> c)) throw std::invalid_argument("sdpa: bad objective");
        c = -c;
    }
    // diagonal blocks are split into 1×1 blocks; first_block maps SDPA block → our first block
    std::vector<int> first_block(static_cast<std::size_t>(nb), -1);
    for (long k = 0; k < nb; ++k) {
        if (k + 1 == equality_block) continue;
        first_block[static_cast<std::size_t>(k)] = static_cast<int>(p.blocks.size());
        const long d = dims[static_cast<std::size_t>(k)];
        if (d > 0) p.blocks.emplace_back(static_cast<int>(d));
        else
            for (long i = 0; i < -d; ++i) p.blocks.emplace_back(1);
    }
    if (equality_block > 0) {
        if (equality_block > nb || dims[static_cast<std::size_t>(equality_block - 1)] >= 0 ||
            dims[static_cast<std::size_t>(equality_block - 1)] % 2 != 0)
            throw std::invalid_argument("sdpa: equality block marker does not match the block structure");
        p.equalities.resize(static_cast<std::size_t>(-dims[static_cast<std::size_t>(equality_block - 1)] / 2));
    }
    long mat, blk, i, j;
    double v;
    while (is >> mat >> blk >> i >> j >> v) {
        if (mat < 0 || mat > m || blk < 1 || blk > nb) throw std::invalid_argument("sdpa: entry out of range");
        const long d = dims[static_cast<std::size_t>(blk - 1)];
        const long n = std::abs(d);
        if (i < 1 || j < 1 || i > n || j > n) throw std::invalid_argument("sdpa: entry index out of range");
        if (blk == equality_block) {
            if (i != j) throw std::invalid_argument("sdpa: off-diagonal entry in diagonal block");
            if ((i - 1) % 2 == 1) continue;  // mirror row
            auto& eq = p.equalities[static_cast<std::size_t>((i - 1) / 2)];
            if (mat == 0) eq.rhs += v;
            else eq.terms.emplace_back(static_cast<int>(mat - 1), v);
            continue;
        }
        if (d < 0) {
            if (i != j) throw std::invalid_argument("sdpa: off-diagonal entry in diagonal block");
            auto& b = p.blocks[static_cast<std::size_t>(first_block[static_cast<std::size_t>(blk - 1)] + i - 1)];
            if (mat == 0) b.add_constant(0, 0, -v);
            else b.add(static_cast<int>(mat - 1), 0, 0, v);
            continue;
        }
        auto& b = p.blocks[static_cast<std::size_t>(first_block[static_cast<std::size_t>(blk - 1)])];
        if (mat == 0) b.add_constant(static_cast<int>(i - 1), static_cast<int>(j - 1), -v);
        else b.add(static_cast<int>(mat - 1), static_cast<int>(i - 1), static_cast<int>(j - 1), v);
    }
    if (!is.eof()) throw std::invalid_argument("sdpa: malformed entry line");
    p.validate();
    return p;
}

inline Problem read_sdpa(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read '" + path + "'");
    return read_sdpa(in);
}

}  // namespace dirc::sdp
