#pragma once

#include <dirc/sdp/certificate.hpp>
#include <dirc/sdp/problem.hpp>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

// Primal-dual path-following method for
//
//   maximize c·y  s.t.  S = F₀ + Σ yᵢFᵢ ⪰ 0,  A y = g
//   minimize ⟨F₀,X⟩ + g·λ  s.t.  cᵢ + ⟨Fᵢ,X⟩ − (Aᵀλ)ᵢ = 0,  X ⪰ 0
//
// with the HKM search direction and Mehrotra predictor-corrector steps,
// starting from an infeasible interior point. Blocks that share variables
// form a group; the Schur complement H is block diagonal over groups and the
// equalities are handled through the bordered system
//
//   [H  Aᵀ] [Δy]   [rhs ]
//   [A  0 ] [Δλ] = [−r_eq]
//
// via K = A H⁻¹ Aᵀ, so no group ever sees another group's variables.

namespace dirc::sdp {

struct SolverSettings {
    int max_iterations = 200;
    double gap_tolerance = 1e-9;
    double feasibility_tolerance = 1e-9;
    double step_fraction = 0.98;
    /// Iteration log (iteration, objectives, gap, residuals, steps) goes here when set.
    std::ostream* log = nullptr;

    void validate() const {
        if (max_iterations <= 0) throw std::invalid_argument("solver: max_iterations must be positive");
        if (!(gap_tolerance > 0) || !(feasibility_tolerance > 0))
            throw std::invalid_argument("solver: tolerances must be positive");
        if (!(step_fraction > 0 && step_fraction < 1)) throw std::invalid_argument("solver: step_fraction must lie in (0,1)");
    }
};

enum class Status { optimal, near_optimal, infeasible, iteration_limit };

inline const char* to_string(Status s) {
    switch (s) {
        case Status::optimal: return "optimal";
        case Status::near_optimal: return "near-optimal";
        case Status::infeasible: return "infeasible";
        case Status::iteration_limit: return "iteration-limit";
    }
    return "unknown";
}

struct Solution {
    Status status = Status::iteration_limit;
    double primal_objective = 0;
    double dual_objective = 0;
    double duality_gap = 0;
    double primal_residual = 0;
    double dual_residual = 0;
    /// Upper bound on the optimum from the dual certificate.
    double certified_bound = std::numeric_limits<double>::infinity();
    bool certificate_rigorous = false;
    int iterations = 0;
    bool weak_duality_held = true;
    double min_primal_eigenvalue = 0;
    std::string message;

    Eigen::VectorXd y;
    std::vector<Eigen::MatrixXd> dual_blocks;
    Eigen::VectorXd multipliers;

    bool converged() const { return status == Status::optimal || status == Status::near_optimal; }
};

namespace detail {

inline double inner(const std::vector<Entry>& es, const Eigen::MatrixXd& m) {
    double s = 0;
    for (const auto& e : es) s += e.row == e.col ? e.value * m(e.row, e.row) : e.value * (m(e.row, e.col) + m(e.col, e.row));
    return s;
}

inline void accumulate(Eigen::MatrixXd& m, const std::vector<Entry>& es, double w) {
    for (const auto& e : es) {
        m(e.row, e.col) += w * e.value;
        if (e.row != e.col) m(e.col, e.row) += w * e.value;
    }
}

inline Eigen::MatrixXd sym(const Eigen::MatrixXd& m) { return (m + m.transpose()) / 2; }

/// Largest α with M + α·dM ⪰ 0 (M positive definite); +∞ if unbounded.
inline double max_step(const Eigen::MatrixXd& m, const Eigen::MatrixXd& dm) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) return 0;
    Eigen::MatrixXd w = llt.matrixL().solve(dm);
    w = llt.matrixL().solve(w.transpose().eval());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym(w), Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    return lo < 0 ? -1 / lo : std::numeric_limits<double>::infinity();
}

struct CompiledBlock {
    int dim = 0;
    Eigen::MatrixXd f0;
    std::vector<int> var;    // global variable of each term
    std::vector<int> local;  // position of that variable inside its group
    std::vector<std::vector<Entry>> entries;
};

struct Group {
    std::vector<int> vars;
    std::vector<int> blocks;
    bool homogeneous = false;  // every block has F₀ = 0
    Eigen::MatrixXd schur;     // Cholesky factor in the lower triangle after factorization
    Eigen::MatrixXd a;         // equality rows restricted to this group (p × m_g)
    Eigen::MatrixXd hinv_at;   // H_g⁻¹ A_gᵀ, or R⁻¹[Ãᵀ b] when deflated

    // Deflation of the scaling direction u = y_g (see Engine::factorize).
    bool deflated = false;
    Eigen::VectorXd u, hu;     // u and H u from the exact formula
    Eigen::VectorXd hv;        // Householder vector, P = I − τ·hv·hvᵀ maps u to the last axis
    double tau = 0;
    Eigen::MatrixXd border;    // rows 0..m_g−2 of [P A_gᵀ | P H P e_last]
    Eigen::VectorXd a_last;    // last row of P A_gᵀ

    void reflect(Eigen::Ref<Eigen::VectorXd> x) const { x.noalias() -= (tau * hv.dot(x)) * hv; }
};

class Engine {
public:
    Engine(const Problem& p, const SolverSettings& s) : prob_(p), set_(s) {
        p.validate();
        s.validate();
        m_ = p.num_vars;
        compile();
    }

    Solution run() {
        Solution sol;
        if (!preprocess_equalities(sol)) return sol;
        initialize();
        Snapshot best;
        double best_merit = std::numeric_limits<double>::infinity();
        double progress_merit = best_merit;
        int progress_it = 0, stalled = 0, it = 0;
        auto give_up = [&](const char* why) {
            if (quality() > best_merit) {
                restore(best);
                evaluate_residuals();
                record(sol, it, false);
            }
            sol.status = near_optimal() ? Status::near_optimal : Status::iteration_limit;
            sol.message = why;
        };
        for (;; ++it) {
            evaluate_residuals();
            record(sol, it, true);
            if (converged()) {
                sol.status = Status::optimal;
                break;
            }
            if (detect_infeasibility(sol)) break;
            const double mf = quality();
            if (mf < best_merit) {
                best_merit = mf;
                best = snapshot();
            }
            if (mf < 0.5 * progress_merit) {
                progress_merit = mf;
                progress_it = it;
            }
            if (it >= set_.max_iterations) {
                give_up("iteration limit reached");
                break;
            }
            // rounding noise has taken over once the merit runs away from its
            // best or stops halving
            if ((best_merit < 1e-4 && mf > 1e3 * best_merit) || it - progress_it >= 12) {
                give_up("no further progress; returning the best iterate");
                break;
            }
            if (!factorize()) {
                give_up("numerical breakdown: Schur complement lost positive definiteness");
                break;
            }
            const auto [ap, ad] = step();
            if (ap < 1e-8 && ad < 1e-8) ++stalled;
            else stalled = 0;
            if (stalled >= 3) {
                ++it;
                evaluate_residuals();
                record(sol, it, true);
                give_up("stalled: step lengths vanished");
                break;
            }
        }
        finish(sol);
        return sol;
    }

private:
    const Problem& prob_;
    SolverSettings set_;
    int m_ = 0;
    std::vector<CompiledBlock> blocks_;
    std::vector<Group> groups_;
    std::vector<int> var_group_, var_local_, block_group_;

    std::vector<Equality> eqs_;  // independent rows only
    std::vector<int> kept_;      // their positions in the problem
    // Reduced system in (deflated coordinates, Δλ), equilibrated by small_scale_.
    Eigen::FullPivLU<Eigen::MatrixXd> small_;
    Eigen::VectorXd small_scale_;
    std::vector<int> deflated_;  // groups with a deflated coordinate, in order
    Eigen::VectorXd c_;
    Eigen::VectorXd gram_;      // ⟨Fᵢ,Fᵢ⟩ summed over blocks
    bool orthogonal_ = true;   // no matrix position carries two variables

    Eigen::VectorXd y_, lambda_;
    std::vector<Eigen::MatrixXd> s_, x_, sinv_, rp_;
    Eigen::VectorXd req_, rd_;
    double kkt_error_ = 0, regularization_ = 0;
    double pobj_ = 0, dobj_ = 0, mu_ = 0, pinf_ = 0, dinf_ = 0, scale_ = 1;
    long total_dim_ = 0;

    void compile() {
        const int nb = static_cast<int>(prob_.blocks.size());
        std::vector<int> parent(static_cast<std::size_t>(nb));
        std::iota(parent.begin(), parent.end(), 0);
        auto find = [&](int a) {
            while (parent[static_cast<std::size_t>(a)] != a) a = parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
            return a;
        };
        std::vector<int> first_block(static_cast<std::size_t>(m_), -1);
        for (int k = 0; k < nb; ++k)
            for (const auto& [v, es] : prob_.blocks[static_cast<std::size_t>(k)].terms) {
                int& fb = first_block[static_cast<std::size_t>(v)];
                if (fb < 0) fb = k;
                else parent[static_cast<std::size_t>(find(k))] = find(fb);
            }
        std::vector<int> group_of_root(static_cast<std::size_t>(nb), -1);
        for (int k = 0; k < nb; ++k) {
            const int r = find(k);
            if (group_of_root[static_cast<std::size_t>(r)] < 0) {
                group_of_root[static_cast<std::size_t>(r)] = static_cast<int>(groups_.size());
                groups_.emplace_back();
            }
            groups_[static_cast<std::size_t>(group_of_root[static_cast<std::size_t>(r)])].blocks.push_back(k);
        }
        var_group_.assign(static_cast<std::size_t>(m_), -1);
        var_local_.assign(static_cast<std::size_t>(m_), -1);
        for (int v = 0; v < m_; ++v) {
            const int g = group_of_root[static_cast<std::size_t>(find(first_block[static_cast<std::size_t>(v)]))];
            var_group_[static_cast<std::size_t>(v)] = g;
            auto& vars = groups_[static_cast<std::size_t>(g)].vars;
            var_local_[static_cast<std::size_t>(v)] = static_cast<int>(vars.size());
            vars.push_back(v);
        }
        for (const auto& b : prob_.blocks) {
            CompiledBlock cb;
            cb.dim = b.dim;
            cb.f0 = Block::dense(b.dim, b.constant);
            for (const auto& [v, es] : b.terms) {
                cb.var.push_back(v);
                cb.local.push_back(var_local_[static_cast<std::size_t>(v)]);
                cb.entries.push_back(es);
            }
            total_dim_ += b.dim;
            blocks_.push_back(std::move(cb));
        }
        block_group_.assign(static_cast<std::size_t>(nb), -1);
        for (std::size_t gi = 0; gi < groups_.size(); ++gi)
            for (int k : groups_[gi].blocks) block_group_[static_cast<std::size_t>(k)] = static_cast<int>(gi);
        for (auto& g : groups_)
            g.homogeneous = std::all_of(g.blocks.begin(), g.blocks.end(),
                                        [&](int k) { return blocks_[static_cast<std::size_t>(k)].f0.isZero(0); });
        gram_ = Eigen::VectorXd::Zero(m_);
        for (const auto& b : blocks_) {
            const auto n = static_cast<std::size_t>(b.dim);
            std::vector<int> owner(n * n, -1);
            std::vector<double> value(n * n, 0.0);
            for (std::size_t t = 0; t < b.var.size(); ++t)
                for (const auto& e : b.entries[t]) {
                    const std::size_t at = static_cast<std::size_t>(e.row) * n + static_cast<std::size_t>(e.col);
                    if (owner[at] >= 0 && owner[at] != b.var[t]) orthogonal_ = false;
                    owner[at] = b.var[t];
                    value[at] += e.value;
                }
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = r; c < n; ++c)
                    if (const int v = owner[r * n + c]; v >= 0) gram_(v) += (r == c ? 1 : 2) * value[r * n + c] * value[r * n + c];
        }
        c_ = Eigen::Map<const Eigen::VectorXd>(prob_.objective.data(), m_);
        scale_ = 1 + prob_.coefficient_scale();
    }

    bool preprocess_equalities(Solution& sol) {
        const int p = static_cast<int>(prob_.equalities.size());
        if (p == 0) return true;
        Eigen::MatrixXd at = Eigen::MatrixXd::Zero(m_, p);
        for (int r = 0; r < p; ++r)
            for (const auto& [v, a] : prob_.equalities[static_cast<std::size_t>(r)].terms) at(v, r) += a;
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(at);
        qr.setThreshold(1e-12);
        const int rank = static_cast<int>(qr.rank());
        std::vector<int> keep;
        for (int i = 0; i < rank; ++i) keep.push_back(qr.colsPermutation().indices()(i));
        std::sort(keep.begin(), keep.end());
        if (rank < p) {
            // dependent rows must be consistent with the kept ones
            Eigen::MatrixXd ak(m_, rank);
            Eigen::VectorXd gk(rank);
            for (int i = 0; i < rank; ++i) {
                ak.col(i) = at.col(keep[static_cast<std::size_t>(i)]);
                gk(i) = prob_.equalities[static_cast<std::size_t>(keep[static_cast<std::size_t>(i)])].rhs;
            }
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qk(ak);
            for (int r = 0; r < p; ++r) {
                if (std::binary_search(keep.begin(), keep.end(), r)) continue;
                const Eigen::VectorXd coef = qk.solve(at.col(r));
                const double predicted = coef.dot(gk);
                if (std::abs(predicted - prob_.equalities[static_cast<std::size_t>(r)].rhs) > 1e-9 * scale_) {
                    sol.status = Status::infeasible;
                    sol.message = "inconsistent equality constraints";
                    sol.y = Eigen::VectorXd::Zero(m_);
                    return false;
                }
            }
        }
        for (int r : keep) eqs_.push_back(prob_.equalities[static_cast<std::size_t>(r)]);
        kept_ = keep;
        const int q = static_cast<int>(eqs_.size());
        for (auto& g : groups_) g.a = Eigen::MatrixXd::Zero(q, static_cast<Eigen::Index>(g.vars.size()));
        for (int r = 0; r < q; ++r)
            for (const auto& [v, a] : eqs_[static_cast<std::size_t>(r)].terms)
                groups_[static_cast<std::size_t>(var_group_[static_cast<std::size_t>(v)])].a(r, var_local_[static_cast<std::size_t>(v)]) += a;
        return true;
    }

    void initialize() {
        const double xi = 10 * scale_;
        y_ = Eigen::VectorXd::Zero(m_);
        lambda_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(eqs_.size()));
        for (const auto& b : blocks_) {
            s_.push_back(xi * Eigen::MatrixXd::Identity(b.dim, b.dim));
            x_.push_back(xi * Eigen::MatrixXd::Identity(b.dim, b.dim));
        }
        sinv_.resize(blocks_.size());
        rp_.resize(blocks_.size());
    }

    void evaluate_residuals() {
        pinf_ = 0;
        double xs = 0;
        pobj_ = c_.dot(y_) + prob_.objective_offset;
        dobj_ = prob_.objective_offset;
        rd_ = c_;
        for (std::size_t k = 0; k < blocks_.size(); ++k) {
            const auto& b = blocks_[k];
            Eigen::MatrixXd f = b.f0;
            for (std::size_t t = 0; t < b.var.size(); ++t) {
                accumulate(f, b.entries[t], y_(b.var[t]));
                rd_(b.var[t]) += inner(b.entries[t], x_[k]);
            }
            rp_[k] = s_[k] - f;
            pinf_ = std::max(pinf_, rp_[k].cwiseAbs().maxCoeff());
            xs += (x_[k].array() * s_[k].array()).sum();
            dobj_ += (b.f0.array() * x_[k].array()).sum();
            Eigen::LLT<Eigen::MatrixXd> llt(s_[k]);
            sinv_[k] = llt.solve(Eigen::MatrixXd::Identity(b.dim, b.dim));
        }
        req_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(eqs_.size()));
        for (std::size_t r = 0; r < eqs_.size(); ++r) {
            double s = -eqs_[r].rhs;
            for (const auto& [v, a] : eqs_[r].terms) {
                s += a * y_(v);
                rd_(v) -= a * lambda_(static_cast<Eigen::Index>(r));
            }
            req_(static_cast<Eigen::Index>(r)) = s;
            dobj_ += eqs_[r].rhs * lambda_(static_cast<Eigen::Index>(r));
        }
        if (req_.size() > 0) pinf_ = std::max(pinf_, req_.cwiseAbs().maxCoeff());
        pinf_ /= scale_;
        dinf_ = m_ > 0 ? rd_.cwiseAbs().maxCoeff() / scale_ : 0;
        mu_ = xs / static_cast<double>(total_dim_);
    }

    double gap() const { return std::abs(dobj_ - pobj_); }

    double merit() const { return std::max({gap() / (1 + std::abs(dobj_)), pinf_, dinf_}); }

    // Ranks iterates for the fallback. The gap alone can close by accident
    // while the primal is still infeasible, Σ⟨X,S⟩ cannot.
    double quality() const { return std::max(merit(), mu_ * static_cast<double>(total_dim_) / (1 + std::abs(dobj_))); }

    struct Snapshot {
        Eigen::VectorXd y, lambda;
        std::vector<Eigen::MatrixXd> s, x;
    };

    Snapshot snapshot() const { return {y_, lambda_, s_, x_}; }

    void restore(const Snapshot& b) {
        y_ = b.y;
        lambda_ = b.lambda;
        s_ = b.s;
        x_ = b.x;
    }

    bool converged() const {
        return gap() <= set_.gap_tolerance * (1 + std::abs(dobj_)) && pinf_ <= set_.feasibility_tolerance &&
               dinf_ <= set_.feasibility_tolerance;
    }

    /// Loose convergence: every measure within 1e-4, or 1000× the requested tolerances.
    bool near_optimal() const {
        return merit() <= std::max({1e-4, 1e3 * set_.gap_tolerance, 1e3 * set_.feasibility_tolerance});
    }

    void record(Solution& sol, int it, bool log) {
        sol.iterations = it;
        sol.primal_objective = pobj_;
        sol.dual_objective = dobj_;
        sol.duality_gap = dobj_ - pobj_;
        sol.primal_residual = pinf_;
        sol.dual_residual = dinf_;
        // dobj − pobj = Σ⟨X,S⟩ − λ·r_eq − Σ⟨X,R_P⟩ − r_d·y, and Σ⟨X,S⟩ ≥ 0
        double slack = std::abs(lambda_.dot(req_)) + std::abs(rd_.dot(y_));
        for (std::size_t k = 0; k < blocks_.size(); ++k) slack += std::abs((x_[k].array() * rp_[k].array()).sum());
        const double rounding = 1e-10 * (1 + std::abs(pobj_) + std::abs(dobj_) + slack);
        if (dobj_ + slack + rounding < pobj_) sol.weak_duality_held = false;
        if (log && set_.log) {
            double xmax = lambda_.size() ? lambda_.cwiseAbs().maxCoeff() : 0;
            for (const auto& x : x_) xmax = std::max(xmax, x.cwiseAbs().maxCoeff());
            char line[260];
            std::snprintf(line, sizeof line,
                          "%4d  pobj % .12e  dobj % .12e  gap %.2e  pinf %.2e  dinf %.2e  mu %.2e  |X| %.1e  kkt %.1e  reg %.1e\n", it,
                          pobj_, dobj_, gap(), pinf_, dinf_, mu_, xmax, kkt_error_, regularization_);
            *set_.log << line << std::flush;
        }
    }

    bool detect_infeasibility(Solution& sol) {
        double xnorm = lambda_.size() ? lambda_.cwiseAbs().maxCoeff() : 0;
        for (const auto& x : x_) xnorm = std::max(xnorm, x.cwiseAbs().maxCoeff());
        const double ynorm = m_ > 0 ? y_.cwiseAbs().maxCoeff() : 0;
        const double big = 1e8 * scale_;
        // improving ray of the minimization side: the maximization is infeasible
        if (xnorm > big && (dobj_ - prob_.objective_offset) / xnorm < -1e-8 &&
            rd_.cwiseAbs().maxCoeff() / xnorm < 1e-6) {
            sol.status = Status::infeasible;
            sol.message = "primal infeasible: dual objective diverges along an improving ray";
            return true;
        }
        if (ynorm > big && (pobj_ - prob_.objective_offset) / ynorm > 1e-8 && pinf_ * scale_ / ynorm < 1e-6) {
            sol.status = Status::infeasible;
            sol.message = "dual infeasible: objective unbounded above";
            return true;
        }
        return false;
    }

    // Blocks with F₀ = 0 (the branches of a guessing problem) make the
    // scaling direction u = y_g nearly free: uᵀHu = ⟨X,S⟩ → 0 while the rest
    // of H grows like 1/μ, so near a rank-deficient optimum H is singular to
    // working precision along u. Such groups are rotated so u is the last
    // coordinate, whose row comes from the exact identity F(u) = S − R_P
    //   H u = (⟨Fᵢ, X (S − R_P) S⁻¹⟩)ᵢ,
    // and only the well-conditioned remainder R is factored. The deflated
    // coordinates join Δλ in a small quasi-definite system
    //   [diag(σ)  C ] [t ]
    //   [Cᵀ      −K ] [Δλ]
    // solved by pivoted LU.
    bool factorize() {
        regularization_ = 0;
        const int p = static_cast<int>(eqs_.size());
        deflated_.clear();
        std::vector<double> sigma;
        std::vector<Eigen::VectorXd> coupling;
        Eigen::MatrixXd k = Eigen::MatrixXd::Zero(p, p);
        for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
            auto& g = groups_[gi];
            const auto mg = static_cast<Eigen::Index>(g.vars.size());
            g.deflated = g.homogeneous && mg >= 2 && prepare_deflation(g);
            const Eigen::Index nf = g.deflated ? mg - 1 : mg;
            double reg = 0, sg = 0;
            for (int attempt = 0;; ++attempt) {
                assemble(g);
                if (reg > 0) g.schur.diagonal().array() += reg * g.schur.diagonal().cwiseAbs().maxCoeff();
                Eigen::Ref<Eigen::MatrixXd> lead = g.schur.topLeftCorner(nf, nf);
                Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(lead);
                bool ok = llt.info() == Eigen::Success;
                if (ok) {
                    if (g.deflated) {
                        // B = [Ãᵀ_rest | b], W = L⁻¹B
                        Eigen::MatrixXd at = g.a.transpose();
                        for (Eigen::Index c = 0; c < at.cols(); ++c) g.reflect(at.col(c));
                        g.border.resize(nf, p + 1);
                        g.border.leftCols(p) = at.topRows(nf);
                        g.border.col(p) = g.schur.row(mg - 1).head(nf).transpose();
                        g.a_last = at.row(mg - 1).transpose();
                        g.hinv_at = g.border;
                        g.schur.topLeftCorner(nf, nf).triangularView<Eigen::Lower>().solveInPlace(g.hinv_at);
                        const auto wa = g.hinv_at.leftCols(p);
                        const auto wb = g.hinv_at.col(p);
                        sg = g.schur(mg - 1, mg - 1) - wb.squaredNorm();
                        ok = sg > 0 && std::isfinite(sg);
                        if (ok) {
                            k.selfadjointView<Eigen::Lower>().rankUpdate(wa.transpose());
                            coupling.push_back(g.a_last - wa.transpose() * wb);
                        }
                    } else if (p > 0) {
                        g.hinv_at = g.a.transpose();
                        g.schur.triangularView<Eigen::Lower>().solveInPlace(g.hinv_at);
                        k.selfadjointView<Eigen::Lower>().rankUpdate(g.hinv_at.transpose());
                    }
                }
                if (ok) break;
                if (attempt == 3) return false;
                reg = reg == 0 ? 1e-13 : reg * 1e3;
                regularization_ = std::max(regularization_, reg);
            }
            if (g.deflated || p > 0)
                g.schur.topLeftCorner(nf, nf).transpose().triangularView<Eigen::Upper>().solveInPlace(g.hinv_at);
            if (g.deflated) {
                deflated_.push_back(static_cast<int>(gi));
                sigma.push_back(sg);
            }
        }
        const auto nd = static_cast<Eigen::Index>(deflated_.size());
        const Eigen::Index n = nd + p;
        if (n == 0) return true;
        Eigen::MatrixXd mtx = Eigen::MatrixXd::Zero(n, n);
        for (Eigen::Index i = 0; i < nd; ++i) {
            mtx(i, i) = sigma[static_cast<std::size_t>(i)];
            mtx.block(i, nd, 1, p) = coupling[static_cast<std::size_t>(i)].transpose();
            mtx.block(nd, i, p, 1) = coupling[static_cast<std::size_t>(i)];
        }
        mtx.bottomRightCorner(p, p) = -Eigen::MatrixXd(k.selfadjointView<Eigen::Lower>());
        small_scale_ = mtx.diagonal().cwiseAbs().unaryExpr([](double d) { return d > 0 ? 1 / std::sqrt(d) : 1.0; });
        small_.compute(small_scale_.asDiagonal() * mtx * small_scale_.asDiagonal());
        return small_.isInvertible();
    }

    /// Sets u, H u and the reflector for a homogeneous group; false when y_g = 0.
    bool prepare_deflation(Group& g) {
        const auto mg = static_cast<Eigen::Index>(g.vars.size());
        g.u.resize(mg);
        for (Eigen::Index i = 0; i < mg; ++i) g.u(i) = y_(g.vars[static_cast<std::size_t>(i)]);
        const double nu = g.u.norm();
        if (!(nu > 0) || !std::isfinite(nu)) return false;
        g.hu = Eigen::VectorXd::Zero(mg);
        for (int kb : g.blocks) {
            const auto k = static_cast<std::size_t>(kb);
            const auto& b = blocks_[k];
            const Eigen::MatrixXd m = x_[k] - x_[k] * rp_[k] * sinv_[k];
            for (std::size_t t = 0; t < b.var.size(); ++t) g.hu(b.local[t]) += inner(b.entries[t], m);
        }
        const Eigen::VectorXd q = g.u / nu;
        g.hv = q;
        const double s = q(mg - 1) >= 0 ? 1.0 : -1.0;
        g.hv(mg - 1) += s;  // P q = −s·e_last
        g.tau = 2 / g.hv.squaredNorm();
        return true;
    }

    /// Fills the lower triangle of g.schur with H, or with P H P for a
    /// deflated group (last row taken from the exact H u).
    void assemble(Group& g) const {
        const auto mg = static_cast<Eigen::Index>(g.vars.size());
        g.schur.setZero(mg, mg);
        for (int k : g.blocks) add_schur(static_cast<std::size_t>(k), g.schur);
        if (!g.deflated) return;
        const Eigen::VectorXd w = g.schur.selfadjointView<Eigen::Lower>() * g.hv;
        const Eigen::VectorXd z = g.tau * w - (g.tau * g.tau / 2 * g.hv.dot(w)) * g.hv;
        g.schur.selfadjointView<Eigen::Lower>().rankUpdate(g.hv, z, -1);
        const double nu = g.u.norm();
        const double s = g.hv(mg - 1) - g.u(mg - 1) / nu > 0 ? 1.0 : -1.0;
        // P H P e_last = −s·P(H q)
        Eigen::VectorXd col = g.hu / nu;
        g.reflect(col);
        g.schur.row(mg - 1) = -s * col.transpose();
        g.schur(mg - 1, mg - 1) = g.u.dot(g.hu) / (nu * nu);
    }

    /// H_ij += tr(Fᵢ X Fⱼ S⁻¹) for the variables of block k (lower triangle).
    void add_schur(std::size_t k, Eigen::MatrixXd& h) const {
        const auto& b = blocks_[k];
        const Eigen::MatrixXd& x = x_[k];
        const Eigen::MatrixXd& si = sinv_[k];
        const std::size_t nt = b.var.size();
        Eigen::MatrixXd m(b.dim, b.dim);
        for (std::size_t i = 0; i < nt; ++i) {
            m.setZero();
            for (const auto& e : b.entries[i]) {
                m.noalias() += e.value * x.col(e.row) * si.row(e.col);
                if (e.row != e.col) m.noalias() += e.value * x.col(e.col) * si.row(e.row);
            }
            const int li = b.local[i];
            for (std::size_t j = 0; j < nt; ++j) {
                const int lj = b.local[j];
                if (lj < li) continue;
                h(lj, li) += inner(b.entries[j], m);
            }
        }
    }

    /// Solves H Δy + AᵀΔλ = rhs, A Δy = eq_rhs with the factored groups.
    Eigen::VectorXd solve_bordered(const Eigen::VectorXd& rhs, const Eigen::VectorXd& eq_rhs, Eigen::VectorXd& dlambda) {
        const int p = static_cast<int>(eqs_.size());
        const auto nd = static_cast<Eigen::Index>(deflated_.size());
        std::vector<Eigen::VectorXd> sol(groups_.size());
        Eigen::VectorXd small_rhs = Eigen::VectorXd::Zero(nd + p);
        if (p > 0) small_rhs.tail(p) = eq_rhs;
        Eigen::Index di = 0;
        for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
            const auto& g = groups_[gi];
            const auto mg = static_cast<Eigen::Index>(g.vars.size());
            Eigen::VectorXd r(mg);
            for (Eigen::Index i = 0; i < mg; ++i) r(i) = rhs(g.vars[static_cast<std::size_t>(i)]);
            const Eigen::Index nf = g.deflated ? mg - 1 : mg;
            if (g.deflated) g.reflect(r);
            auto head = r.head(nf);
            g.schur.topLeftCorner(nf, nf).triangularView<Eigen::Lower>().solveInPlace(head);
            g.schur.topLeftCorner(nf, nf).transpose().triangularView<Eigen::Upper>().solveInPlace(head);
            if (g.deflated) {
                small_rhs(di++) = r(mg - 1) - g.border.col(p).dot(head);
                if (p > 0) small_rhs.tail(p).noalias() -= g.border.leftCols(p).transpose() * head;
            } else if (p > 0) {
                small_rhs.tail(p).noalias() -= g.a * head;
            }
            sol[gi] = std::move(r);
        }
        Eigen::VectorXd z = Eigen::VectorXd::Zero(nd + p);
        if (nd + p > 0) z = small_scale_.asDiagonal() * small_.solve(small_scale_.asDiagonal() * small_rhs);
        dlambda = z.tail(p);
        Eigen::VectorXd dy(m_);
        di = 0;
        for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
            const auto& g = groups_[gi];
            auto& d = sol[gi];
            const auto mg = static_cast<Eigen::Index>(g.vars.size());
            if (g.deflated) {
                const double t = z(di++);
                if (p > 0) d.head(mg - 1).noalias() -= g.hinv_at.leftCols(p) * dlambda;
                d.head(mg - 1) -= t * g.hinv_at.col(p);
                d(mg - 1) = t;
                g.reflect(d);
            } else if (p > 0) {
                d.noalias() -= g.hinv_at * dlambda;
            }
            for (Eigen::Index i = 0; i < mg; ++i) dy(g.vars[static_cast<std::size_t>(i)]) = d(i);
        }
        return dy;
    }

    /// H·v through the operator itself, v ↦ (⟨Fᵢ, X F(v) S⁻¹⟩)ᵢ; the
    /// component along a deflated u goes through the exact H u instead.
    Eigen::VectorXd apply_schur(const Eigen::VectorXd& v) const {
        Eigen::VectorXd rest = v;
        Eigen::VectorXd out = Eigen::VectorXd::Zero(m_);
        for (int gi : deflated_) {
            const auto& g = groups_[static_cast<std::size_t>(gi)];
            double along = 0;
            for (std::size_t i = 0; i < g.vars.size(); ++i) along += g.u(static_cast<Eigen::Index>(i)) * v(g.vars[i]);
            along /= g.u.squaredNorm();
            for (std::size_t i = 0; i < g.vars.size(); ++i) {
                rest(g.vars[i]) -= along * g.u(static_cast<Eigen::Index>(i));
                out(g.vars[i]) += along * g.hu(static_cast<Eigen::Index>(i));
            }
        }
        for (std::size_t k = 0; k < blocks_.size(); ++k) {
            const auto& b = blocks_[k];
            Eigen::MatrixXd f = Eigen::MatrixXd::Zero(b.dim, b.dim);
            for (std::size_t i = 0; i < b.var.size(); ++i) accumulate(f, b.entries[i], rest(b.var[i]));
            const Eigen::MatrixXd w = x_[k] * f * sinv_[k];
            for (std::size_t i = 0; i < b.var.size(); ++i) out(b.var[i]) += inner(b.entries[i], w);
        }
        return out;
    }

    Eigen::VectorXd apply_a(const Eigen::VectorXd& v) const {
        Eigen::VectorXd out(static_cast<Eigen::Index>(eqs_.size()));
        for (std::size_t r = 0; r < eqs_.size(); ++r) {
            double s = 0;
            for (const auto& [j, a] : eqs_[r].terms) s += a * v(j);
            out(static_cast<Eigen::Index>(r)) = s;
        }
        return out;
    }

    Eigen::VectorXd apply_at(const Eigen::VectorXd& l) const {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(m_);
        for (std::size_t r = 0; r < eqs_.size(); ++r)
            for (const auto& [j, a] : eqs_[r].terms) out(j) += a * l(static_cast<Eigen::Index>(r));
        return out;
    }

    /// Bordered solve with iterative refinement against the exact operator;
    /// the factored H loses digits as the iterates approach a rank-deficient
    /// optimum.
    Eigen::VectorXd solve_kkt(const Eigen::VectorXd& rhs, Eigen::VectorXd& dlambda) {
        const Eigen::VectorXd eq_rhs = -req_;
        Eigen::VectorXd dy = solve_bordered(rhs, eq_rhs, dlambda);
        double prev = std::numeric_limits<double>::infinity();
        for (int pass = 0; pass < 3; ++pass) {
            const Eigen::VectorXd r1 = rhs - apply_schur(dy) - apply_at(dlambda);
            const Eigen::VectorXd r2 = eq_rhs - apply_a(dy);
            const double err = std::max(r1.size() ? r1.cwiseAbs().maxCoeff() : 0.0, r2.size() ? r2.cwiseAbs().maxCoeff() : 0.0);
            if (pass == 0) kkt_error_ = err;
            if (!(err < prev) || err == 0) break;
            prev = err;
            kkt_error_ = err;
            Eigen::VectorXd cl;
            const Eigen::VectorXd cy = solve_bordered(r1, r2, cl);
            dy += cy;
            if (cl.size()) dlambda += cl;
        }
        return dy;
    }

    /// ΔS = α·S + D per block, with α the component of Δy along a deflated u.
    struct Direction {
        Eigen::VectorXd dy, dlambda;
        std::vector<double> alpha;
        std::vector<Eigen::MatrixXd> d, ds, dx;
    };

    /// HKM direction targeting XS = σμ·I with an optional second-order term.
    Direction direction(double target_mu, const Direction* predictor) {
        Direction d;
        std::vector<Eigen::MatrixXd> t(blocks_.size());
        Eigen::VectorXd rhs = rd_;
        for (std::size_t k = 0; k < blocks_.size(); ++k) {
            const auto& b = blocks_[k];
            t[k] = target_mu * sinv_[k] - x_[k];
            if (predictor)
                t[k].noalias() -= predictor->alpha[k] * predictor->dx[k] + predictor->dx[k] * predictor->d[k] * sinv_[k];
            const Eigen::MatrixXd rhs_mat = t[k] + x_[k] * rp_[k] * sinv_[k];
            for (std::size_t i = 0; i < b.var.size(); ++i) rhs(b.var[i]) += inner(b.entries[i], rhs_mat);
        }
        d.dy = solve_kkt(rhs, d.dlambda);
        // along u, F(u) = S − R_P keeps X ΔS S⁻¹ free of the ill-conditioned S⁻¹
        Eigen::VectorXd rest = d.dy;
        std::vector<double> along(groups_.size(), 0.0);
        for (int gi : deflated_) {
            const auto& g = groups_[static_cast<std::size_t>(gi)];
            double a = 0;
            for (std::size_t i = 0; i < g.vars.size(); ++i) a += g.u(static_cast<Eigen::Index>(i)) * d.dy(g.vars[i]);
            a /= g.u.squaredNorm();
            for (std::size_t i = 0; i < g.vars.size(); ++i) rest(g.vars[i]) -= a * g.u(static_cast<Eigen::Index>(i));
            along[static_cast<std::size_t>(gi)] = a;
        }
        for (std::size_t k = 0; k < blocks_.size(); ++k) {
            const auto& b = blocks_[k];
            const double a = along[static_cast<std::size_t>(block_group_[k])];
            Eigen::MatrixXd dn = -(1 + a) * rp_[k];
            for (std::size_t i = 0; i < b.var.size(); ++i) accumulate(dn, b.entries[i], rest(b.var[i]));
            d.dx.push_back(sym(t[k] - a * x_[k] - x_[k] * dn * sinv_[k]));
            d.ds.push_back(a * s_[k] + dn);
            d.alpha.push_back(a);
            d.d.push_back(std::move(dn));
        }
        if (orthogonal_) {
            // put ΔX back on ⟨Fᵢ,ΔX⟩ − (AᵀΔλ)ᵢ = −r_dᵢ; rounding in X D S⁻¹
            // grows with |X|·|S⁻¹| and otherwise leaks into the dual residual
            Eigen::VectorXd rho = rd_ - apply_at(d.dlambda);
            for (std::size_t k = 0; k < blocks_.size(); ++k) {
                const auto& b = blocks_[k];
                for (std::size_t i = 0; i < b.var.size(); ++i) rho(b.var[i]) += inner(b.entries[i], d.dx[k]);
            }
            if (m_ > 0 && rho.cwiseAbs().maxCoeff() > 0.1 * set_.feasibility_tolerance * scale_)
                for (std::size_t k = 0; k < blocks_.size(); ++k) {
                    const auto& b = blocks_[k];
                    for (std::size_t i = 0; i < b.var.size(); ++i)
                        if (gram_(b.var[i]) > 0) accumulate(d.dx[k], b.entries[i], -rho(b.var[i]) / gram_(b.var[i]));
                }
        }
        return d;
    }

    std::pair<double, double> step_lengths(const Direction& d) const {
        double ap = std::numeric_limits<double>::infinity(), ad = ap;
        for (std::size_t k = 0; k < blocks_.size(); ++k) {
            ap = std::min(ap, max_step(s_[k], d.ds[k]));
            ad = std::min(ad, max_step(x_[k], d.dx[k]));
        }
        return {ap, ad};
    }

    std::pair<double, double> step() {
        const Direction pred = direction(0, nullptr);
        auto [ap, ad] = step_lengths(pred);
        ap = std::min(1.0, ap);
        ad = std::min(1.0, ad);
        double xs_aff = 0;
        for (std::size_t k = 0; k < blocks_.size(); ++k)
            xs_aff += ((x_[k] + ad * pred.dx[k]).array() * (s_[k] + ap * pred.ds[k]).array()).sum();
        const double mu_aff = xs_aff / static_cast<double>(total_dim_);
        double sigma = mu_ > 0 ? std::pow(std::max(0.0, mu_aff / mu_), 3) : 0;
        sigma = std::clamp(sigma, 0.0, 1.0);

        const Direction corr = direction(sigma * mu_, &pred);
        std::tie(ap, ad) = step_lengths(corr);
        ap = std::min(1.0, set_.step_fraction * ap);
        ad = std::min(1.0, set_.step_fraction * ad);

        y_ += ap * corr.dy;
        lambda_ += ad * corr.dlambda;
        for (std::size_t k = 0; k < blocks_.size(); ++k) {
            s_[k] = (1 + ap * corr.alpha[k]) * s_[k] + ap * corr.d[k];
            x_[k] += ad * corr.dx[k];
        }
        return {ap, ad};
    }

    void finish(Solution& sol) {
        sol.y = y_;
        sol.multipliers = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(prob_.equalities.size()));
        for (std::size_t q = 0; q < kept_.size(); ++q) sol.multipliers(kept_[q]) = lambda_(static_cast<Eigen::Index>(q));
        sol.dual_blocks = x_;
        double lo = std::numeric_limits<double>::infinity();
        for (const auto& b : prob_.blocks) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.evaluate(y_), Eigen::EigenvaluesOnly);
            lo = std::min(lo, es.eigenvalues().minCoeff());
        }
        sol.min_primal_eigenvalue = lo;
    }
};

}  // namespace detail

/// Runs the interior-point method and attaches the dual certificate.
inline Solution solve(const Problem& p, const SolverSettings& s = {}) {
    Solution sol = detail::Engine(p, s).run();
    if (sol.status != Status::infeasible && !sol.dual_blocks.empty()) {
        const Certificate c = dual_certificate(p, sol.dual_blocks, sol.y);
        sol.certified_bound = c.bound;
        sol.certificate_rigorous = c.rigorous;
        const double loose = std::max(1e-6, 1e3 * s.gap_tolerance) * (1 + std::abs(sol.dual_objective));
        if (sol.status == Status::optimal && c.bound - sol.dual_objective > loose) {
            sol.status = Status::near_optimal;
            sol.message = "dual iterate too infeasible to certify tightly";
        }
    }
    return sol;
}

}  // namespace dirc::sdp
