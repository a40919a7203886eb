#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <limits>
#include <vector>

namespace dirc {

using Complex = std::complex<double>;
using Qubit2 = Eigen::Matrix2cd;
using TwoQubit4 = Eigen::Matrix4cd;
using Bloch = Eigen::Vector3d;

namespace pauli {

inline Qubit2 identity() { return Qubit2::Identity(); }
inline Qubit2 x() {
    Qubit2 m;
    m << 0, 1, 1, 0;
    return m;
}
inline Qubit2 y() {
    Qubit2 m;
    m << 0, Complex(0, -1), Complex(0, 1), 0;
    return m;
}
inline Qubit2 z() {
    Qubit2 m;
    m << 1, 0, 0, -1;
    return m;
}

/// n·σ for a real 3-vector n.
inline Qubit2 dot(const Bloch& n) { return n(0) * x() + n(1) * y() + n(2) * z(); }

/// Coefficients r^μ with m = Σ_μ r^μ σ_μ, μ = 0 (identity), x, y, z.
inline Eigen::Vector4cd expansion(const Qubit2& m) {
    Eigen::Vector4cd r;
    r(0) = m.trace() / 2.0;
    r(1) = (x() * m).trace() / 2.0;
    r(2) = (y() * m).trace() / 2.0;
    r(3) = (z() * m).trace() / 2.0;
    return r;
}

}  // namespace pauli

/// Qubit POVM; element b is the operator for outcome b.
struct QubitMeasurement {
    std::vector<Qubit2> elements;

    int outcomes() const { return static_cast<int>(elements.size()); }

    /// Two-outcome projective measurement of the observable n·σ (|n| = 1);
    /// outcome 0 is the +1 eigenspace.
    static QubitMeasurement observable(const Bloch& n) {
        const Qubit2 o = pauli::dot(n);
        return {{(pauli::identity() + o) / 2.0, (pauli::identity() - o) / 2.0}};
    }

    /// Elements (1/r)(1 + w_b·σ) for the given Bloch vectors.
    static QubitMeasurement from_bloch(const std::vector<Bloch>& w) {
        QubitMeasurement m;
        const double weight = 1.0 / static_cast<double>(w.size());
        for (const auto& v : w) m.elements.push_back(weight * (pauli::identity() + pauli::dot(v)));
        return m;
    }
};

struct MeasurementDiagnostics {
    bool psd = true;
    bool complete = true;
    bool hermitian = true;
    double min_eigenvalue = 0;
    double completeness_error = 0;
    std::vector<int> ranks;
    /// Every element rank-1 and the Pauli 4-vectors linearly independent.
    /// Sufficient for extremality of a qubit POVM with at most 4 outcomes.
    bool extremal_hint = false;

    bool valid() const { return psd && complete && hermitian; }
};

inline MeasurementDiagnostics validate_measurement(const QubitMeasurement& m, double tol = 1e-12) {
    MeasurementDiagnostics d;
    if (m.elements.empty()) {
        d.complete = false;
        d.completeness_error = 1;
        return d;
    }
    Qubit2 sum = Qubit2::Zero();
    d.min_eigenvalue = std::numeric_limits<double>::infinity();
    bool all_rank_one = true;
    Eigen::MatrixXd vectors(4, static_cast<Eigen::Index>(m.elements.size()));
    for (std::size_t k = 0; k < m.elements.size(); ++k) {
        const Qubit2& e = m.elements[k];
        sum += e;
        if ((e - e.adjoint()).norm() > tol) d.hermitian = false;
        Eigen::SelfAdjointEigenSolver<Qubit2> es((e + e.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
        const auto ev = es.eigenvalues();
        d.min_eigenvalue = std::min(d.min_eigenvalue, ev.minCoeff());
        int rank = 0;
        for (int i = 0; i < 2; ++i)
            if (std::abs(ev(i)) > 1e-10) ++rank;
        d.ranks.push_back(rank);
        if (rank != 1) all_rank_one = false;
        vectors.col(static_cast<Eigen::Index>(k)) = pauli::expansion(e).real();
    }
    d.psd = d.min_eigenvalue >= -tol;
    d.completeness_error = (sum - pauli::identity()).cwiseAbs().maxCoeff();
    d.complete = d.completeness_error <= tol;
    if (all_rank_one && m.elements.size() <= 4) {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(vectors);
        lu.setThreshold(1e-10);
        d.extremal_hint = lu.rank() == static_cast<Eigen::Index>(m.elements.size());
    }
    return d;
}

}  // namespace dirc
