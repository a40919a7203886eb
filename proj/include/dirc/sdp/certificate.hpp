#pragma once

#include <dirc/sdp/problem.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <vector>

namespace dirc::sdp {

struct Certificate {
    /// Upper bound on c·y + offset over every feasible y.
    double bound = std::numeric_limits<double>::infinity();
    /// True when the bound used Problem::variable_bound rather than a guess.
    bool rigorous = false;
    /// ‖c + F*(X̃) − Aᵀλ‖₁ after clipping X̃ to the PSD cone.
    double residual_l1 = 0;
    /// Most negative eigenvalue removed by the clipping.
    double clipped = 0;
};

namespace detail {

struct DualTerms {
    Eigen::VectorXd grad;  // c + F*(X)
    double f0x = 0;        // Σ⟨F₀,X⟩
    double magnitude = 0;  // Σ|F₀|·|X| for the rounding allowance
};

inline DualTerms dual_terms(const Problem& p, const std::vector<Eigen::MatrixXd>& x) {
    DualTerms t;
    t.grad = Eigen::Map<const Eigen::VectorXd>(p.objective.data(), p.num_vars);
    for (std::size_t k = 0; k < x.size(); ++k) {
        const auto& b = p.blocks[k];
        for (const auto& e : b.constant) {
            const double v = e.row == e.col ? e.value * x[k](e.row, e.row) : 2 * e.value * x[k](e.row, e.col);
            t.f0x += v;
            t.magnitude += std::abs(v);
        }
        for (const auto& [v, es] : b.terms) {
            double s = 0;
            for (const auto& e : es) s += e.row == e.col ? e.value * x[k](e.row, e.row) : 2 * e.value * x[k](e.row, e.col);
            t.grad(v) += s;
        }
    }
    return t;
}

/// Nearest PSD matrix in Frobenius norm; reports the most negative eigenvalue.
inline Eigen::MatrixXd clip_psd(const Eigen::MatrixXd& m, double& most_negative) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es((m + m.transpose()) / 2);
    Eigen::VectorXd ev = es.eigenvalues();
    most_negative = std::min(most_negative, ev.minCoeff());
    ev = ev.cwiseMax(0.0);
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace detail

/// Turns an approximate dual point into a valid upper bound. X is projected
/// onto the PSD cone, λ is refit by least squares, and whatever stationarity
/// residual r remains is paid for with B·‖r‖₁, where B bounds |yᵢ|:
///
///   c·y = r·y − Σ⟨F(y),X̃⟩ + Σ⟨F₀,X̃⟩ + g·λ ≤ B‖r‖₁ + Σ⟨F₀,X̃⟩ + g·λ.
///
/// Between rounds X̃ is nudged along Σ wᵢFᵢ to cancel r (exact when the Fᵢ
/// have disjoint supports) and clipped again; every round yields a valid
/// bound and the smallest is kept.
inline Certificate dual_certificate(const Problem& p, const std::vector<Eigen::MatrixXd>& x, const Eigen::VectorXd& y_hint = {},
                                    int rounds = 4) {
    if (x.size() != p.blocks.size()) throw std::invalid_argument("certificate: block count mismatch");
    const int m = p.num_vars;
    const auto q = static_cast<Eigen::Index>(p.equalities.size());
    Eigen::MatrixXd at = Eigen::MatrixXd::Zero(m, q);
    Eigen::VectorXd g(q);
    for (Eigen::Index i = 0; i < q; ++i) {
        const auto& eq = p.equalities[static_cast<std::size_t>(i)];
        for (const auto& [v, a] : eq.terms) at(v, i) += a;
        g(i) = eq.rhs;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
    if (q > 0) qr.compute(at);

    // ⟨Fᵢ,Fᵢ⟩ summed over blocks
    Eigen::VectorXd gram = Eigen::VectorXd::Zero(m);
    for (const auto& b : p.blocks)
        for (const auto& [v, es] : b.terms)
            for (const auto& e : es) gram(v) += (e.row == e.col ? 1 : 2) * e.value * e.value;

    double big_b;
    bool rigorous = false;
    if (p.variable_bound) {
        big_b = *p.variable_bound;
        rigorous = true;
    } else {
        big_b = 10 * std::max(1.0, y_hint.size() ? y_hint.cwiseAbs().maxCoeff() : 1.0);
    }

    Certificate best;
    std::vector<Eigen::MatrixXd> xt(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) xt[k] = detail::clip_psd(x[k], best.clipped);
    for (int round = 0; round < std::max(1, rounds); ++round) {
        const auto t = detail::dual_terms(p, xt);
        Eigen::VectorXd r = t.grad;
        double bound = p.objective_offset + t.f0x, magnitude = std::abs(p.objective_offset) + t.magnitude;
        if (q > 0) {
            const Eigen::VectorXd lambda = qr.solve(t.grad);
            r = t.grad - at * lambda;
            bound += g.dot(lambda);
            magnitude += (g.cwiseAbs().array() * lambda.cwiseAbs().array()).sum();
        }
        const double l1 = r.lpNorm<1>();
        // floating-point slack on the sums above
        const double rounding = 1e-13 * static_cast<double>(m + 10) * (1 + magnitude);
        const double candidate = bound + big_b * l1 + rounding;
        if (round == 0 || candidate < best.bound) {
            best.bound = candidate;
            best.residual_l1 = l1;
        }
        if (l1 == 0 || round + 1 == rounds) break;
        for (std::size_t k = 0; k < xt.size(); ++k) {
            for (const auto& [v, es] : p.blocks[k].terms) {
                if (gram(v) == 0) continue;
                const double w = -r(v) / gram(v);
                for (const auto& e : es) {
                    xt[k](e.row, e.col) += w * e.value;
                    if (e.row != e.col) xt[k](e.col, e.row) += w * e.value;
                }
            }
            double ignored = 0;
            xt[k] = detail::clip_psd(xt[k], ignored);
        }
    }
    best.rigorous = rigorous;
    return best;
}

}  // namespace dirc::sdp
