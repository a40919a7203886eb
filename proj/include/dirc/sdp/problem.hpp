#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dirc::sdp {

/// Upper-triangle entry (row <= col) of a symmetric coefficient matrix; the
/// mirrored entry is implied.
struct Entry {
    int row = 0;
    int col = 0;
    double value = 0;
};

/// Symmetric affine map y ↦ F₀ + Σ yᵢ Fᵢ of size dim × dim.
struct Block {
    int dim = 0;
    std::vector<Entry> constant;
    std::map<int, std::vector<Entry>> terms;

    explicit Block(int n = 0) : dim(n) {}

    void add_constant(int r, int c, double v) { constant.push_back(ordered(r, c, v)); }
    void add(int var, int r, int c, double v) { terms[var].push_back(ordered(r, c, v)); }

    static Eigen::MatrixXd dense(int n, const std::vector<Entry>& es) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
        for (const auto& e : es) {
            m(e.row, e.col) += e.value;
            if (e.row != e.col) m(e.col, e.row) += e.value;
        }
        return m;
    }

    Eigen::MatrixXd evaluate(const Eigen::VectorXd& y) const {
        Eigen::MatrixXd m = dense(dim, constant);
        for (const auto& [v, es] : terms)
            for (const auto& e : es) {
                m(e.row, e.col) += y(v) * e.value;
                if (e.row != e.col) m(e.col, e.row) += y(v) * e.value;
            }
        return m;
    }

private:
    static Entry ordered(int r, int c, double v) { return r <= c ? Entry{r, c, v} : Entry{c, r, v}; }
};

struct Equality {
    std::vector<std::pair<int, double>> terms;
    double rhs = 0;
};

/// maximize  c·y + offset
/// s.t.      F₀ᵏ + Σ yᵢ Fᵢᵏ ⪰ 0 for every block k,  A y = g.
struct Problem {
    int num_vars = 0;
    std::vector<Block> blocks;
    std::vector<Equality> equalities;
    std::vector<double> objective;
    double objective_offset = 0;
    /// A priori bound on |yᵢ| over the feasible set; makes the dual
    /// certificate rigorous when set.
    std::optional<double> variable_bound;
    std::string description;

    void validate() const {
        if (num_vars < 0) throw std::invalid_argument("sdp: negative variable count");
        if (static_cast<int>(objective.size()) != num_vars) throw std::invalid_argument("sdp: objective size mismatch");
        if (blocks.empty()) throw std::invalid_argument("sdp: no blocks");
        std::vector<char> seen(static_cast<std::size_t>(num_vars), 0);
        for (const auto& b : blocks) {
            if (b.dim <= 0) throw std::invalid_argument("sdp: empty block");
            auto check = [&](const Entry& e) {
                if (e.row < 0 || e.col >= b.dim || e.row > e.col) throw std::invalid_argument("sdp: entry outside block");
                if (!std::isfinite(e.value)) throw std::invalid_argument("sdp: non-finite coefficient");
            };
            for (const auto& e : b.constant) check(e);
            for (const auto& [v, es] : b.terms) {
                if (v < 0 || v >= num_vars) throw std::invalid_argument("sdp: variable index out of range");
                seen[static_cast<std::size_t>(v)] = 1;
                for (const auto& e : es) check(e);
            }
        }
        for (int v = 0; v < num_vars; ++v)
            if (!seen[static_cast<std::size_t>(v)])
                throw std::invalid_argument("sdp: variable " + std::to_string(v) + " appears in no block");
        for (const auto& eq : equalities)
            for (const auto& [v, a] : eq.terms)
                if (v < 0 || v >= num_vars) throw std::invalid_argument("sdp: equality references unknown variable");
    }

    double objective_value(const Eigen::VectorXd& y) const {
        double v = objective_offset;
        for (int i = 0; i < num_vars; ++i) v += objective[static_cast<std::size_t>(i)] * y(i);
        return v;
    }

    /// Largest |A y − g| and smallest block eigenvalue at y.
    struct Residuals {
        double equality = 0;
        double min_eigenvalue = 0;
    };

    Residuals residuals(const Eigen::VectorXd& y) const {
        Residuals r;
        for (const auto& eq : equalities) {
            double s = -eq.rhs;
            for (const auto& [v, a] : eq.terms) s += a * y(v);
            r.equality = std::max(r.equality, std::abs(s));
        }
        r.min_eigenvalue = std::numeric_limits<double>::infinity();
        for (const auto& b : blocks) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.evaluate(y), Eigen::EigenvaluesOnly);
            r.min_eigenvalue = std::min(r.min_eigenvalue, es.eigenvalues().minCoeff());
        }
        return r;
    }

    /// Largest absolute coefficient anywhere in the data.
    double coefficient_scale() const {
        double s = 0;
        for (const auto& b : blocks) {
            for (const auto& e : b.constant) s = std::max(s, std::abs(e.value));
            for (const auto& [v, es] : b.terms)
                for (const auto& e : es) s = std::max(s, std::abs(e.value));
        }
        for (double c : objective) s = std::max(s, std::abs(c));
        for (const auto& eq : equalities) {
            s = std::max(s, std::abs(eq.rhs));
            for (const auto& [v, a] : eq.terms) s = std::max(s, std::abs(a));
        }
        return s;
    }
};

}  // namespace dirc::sdp
