#pragma once

#include <dirc/npa/programs.hpp>
#include <dirc/quantum/presets.hpp>
#include <dirc/sdp/solver.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace dirc {

enum class Mode { behavior, bell_value };

inline const char* to_string(Mode m) { return m == Mode::behavior ? "behavior" : "bell-value"; }

inline Mode parse_mode(const std::string& s) {
    if (s == "behavior") return Mode::behavior;
    if (s == "bell-value") return Mode::bell_value;
    throw std::invalid_argument("unknown mode '" + s + "' (expected behavior or bell-value)");
}

/// (local bits, global bits) that a d-dimensional system can certify at most:
/// extremal POVMs have at most d² outcomes.
inline std::pair<double, double> povm_ceiling(int d) {
    if (d < 2) throw std::invalid_argument("povm_ceiling: dimension must be at least 2");
    const double l = std::log2(static_cast<double>(d));
    return {2 * l, 4 * l};
}

/// −log₂ G, clamped at 0 because G ≤ 1 holds trivially.
inline double bits_from_bound(double g) {
    if (!(g > 0)) throw std::domain_error("guessing bound must be positive");
    return g >= 1 ? 0.0 : -std::log2(g);
}

/// Rounds bits down to 1e-4 for display, so printed values stay lower bounds.
inline double truncate_bits(double bits) { return std::floor(bits * 1e4) / 1e4; }

/// Most bits the target can yield: log₂ of its outcome count, capped by the
/// qubit POVM ceiling.
inline double randomness_ceiling(const Scenario& s, const GuessTarget& t) {
    const auto [local, global] = povm_ceiling(2);
    const double raw = std::log2(static_cast<double>(t.branches(s)));
    return std::min(raw, t.kind == GuessTarget::Kind::local ? local : global);
}

/// What was pinned in the guessing SDP.
struct ImposedConstraint {
    std::string description;
    /// Bell-value mode only: functional name and the value it was pinned to.
    std::vector<std::pair<std::string, double>> bell_values;
};

struct RandomnessResult {
    std::string setup;
    GuessTarget target;
    npa::LevelSpec level;
    Mode mode = Mode::behavior;
    double visibility = 1;

    /// Certified upper bound on Eve's guessing probability.
    double guessing_bound = 1;
    /// −log₂(guessing_bound), untruncated.
    double bits = 0;
    double ceiling = 0;
    /// Bits proven analytically for this configuration, when known.
    std::optional<double> analytic_bits;

    ImposedConstraint constraint;
    std::string moment_summary;

    sdp::Status status = sdp::Status::iteration_limit;
    std::string solver_message;
    double primal_objective = 0;
    double dual_objective = 0;
    double duality_gap = 0;
    double primal_residual = 0;
    double dual_residual = 0;
    int iterations = 0;
    bool rigorous = false;

    bool converged() const { return status == sdp::Status::optimal || status == sdp::Status::near_optimal; }
    bool certified() const { return rigorous && status != sdp::Status::infeasible && std::isfinite(guessing_bound); }
};

namespace detail {

inline bool is_construction_one_marginal(const Setup& s, const GuessTarget& t, double v) {
    return s.name == "construction-one" && v == 1 && t == GuessTarget::local(Party::bob, 6);
}

/// Value each certifying functional is pinned to: its value on the mixed
/// behavior, but never above the level's own maximum minus 1e-8.
inline std::vector<npa::BellConstraint> bell_pins(const Setup& setup, const npa::MomentStructure& ms, const Behavior& mixed,
                                                  const sdp::SolverSettings& settings) {
    if (setup.certifying.empty()) throw std::invalid_argument("setup '" + setup.name + "' has no certifying functional");
    std::vector<npa::BellConstraint> pins;
    for (int i : setup.certifying) {
        const auto& f = setup.functionals.at(static_cast<std::size_t>(i));
        double beta = eval_functional(f, mixed);
        // the level maximum is ≥ the quantum bound, so far below it needs no solve
        if (!f.quantum_bound || beta > *f.quantum_bound - 1e-6) {
            sdp::SolverSettings quiet = settings;
            quiet.log = nullptr;
            const auto top = sdp::solve(npa::bell_max_sdp(ms, f), quiet);
            if (top.status == sdp::Status::infeasible) throw std::runtime_error("bell-max SDP for " + f.name() + " is infeasible");
            // the honest model attains its own value, so the pin never has
            // to sit below it even when the bell-max primal stops short
            beta = std::min(beta, std::max(top.primal_objective, beta) - 1e-8);
        }
        pins.push_back({f, beta});
    }
    return pins;
}

}  // namespace detail

/// Builds and solves the guessing SDP for one configuration. Bits always come
/// from the dual certificate, never from the primal objective.
inline RandomnessResult certify_randomness(const Setup& setup, const GuessTarget& target, const npa::LevelSpec& level, Mode mode,
                                           double v, const sdp::SolverSettings& settings = {}) {
    setup.validate();
    const Scenario sc = setup.scenario();
    target.validate(sc);
    if (target.branches(sc) < 2) throw std::invalid_argument("target has a single outcome");
    const Behavior mixed = mix_visibility(setup.behavior(), v);
    const npa::MomentStructure ms(sc, level);

    RandomnessResult r;
    r.setup = setup.name;
    r.target = target;
    r.level = level;
    r.mode = mode;
    r.visibility = v;
    r.ceiling = randomness_ceiling(sc, target);
    r.moment_summary = ms.summary();
    if (detail::is_construction_one_marginal(setup, target, v)) r.analytic_bits = 2.0;

    sdp::Problem p;
    if (mode == Mode::behavior) {
        p = npa::guessing_sdp(ms, mixed, target);
        r.constraint.description = "full behavior at visibility " + std::to_string(v);
    } else {
        const auto pins = detail::bell_pins(setup, ms, mixed, settings);
        p = npa::guessing_sdp(ms, pins, target);
        r.constraint.description = "Bell values at visibility " + std::to_string(v);
        for (const auto& pin : pins) r.constraint.bell_values.emplace_back(pin.functional.name(), pin.value);
    }
    if (settings.log) *settings.log << p.description << '\n';

    const auto sol = sdp::solve(p, settings);
    r.status = sol.status;
    r.solver_message = sol.message;
    r.primal_objective = sol.primal_objective;
    r.dual_objective = sol.dual_objective;
    r.duality_gap = sol.duality_gap;
    r.primal_residual = sol.primal_residual;
    r.dual_residual = sol.dual_residual;
    r.iterations = sol.iterations;
    r.rigorous = sol.certificate_rigorous;
    if (sol.status == sdp::Status::infeasible) {
        if (mode == Mode::bell_value) throw std::runtime_error("the pinned Bell value is infeasible at level " + level.to_string());
        throw std::runtime_error("guessing SDP is infeasible: " + sol.message);
    }
    r.guessing_bound = std::min(1.0, sol.certified_bound);
    r.bits = bits_from_bound(r.guessing_bound);
    return r;
}

inline RandomnessResult certify_randomness(const Setup& setup, const npa::LevelSpec& level, double v = 1,
                                           const sdp::SolverSettings& settings = {}) {
    return certify_randomness(setup, setup.default_target, level, parse_mode(setup.default_mode), v, settings);
}

struct SweepPoint {
    double visibility = 0;
    std::optional<RandomnessResult> result;
    std::string error;

    /// Certified bits, 0 when the point failed (0 is always a valid lower bound).
    double bits() const { return result ? result->bits : 0.0; }
    double guessing_bound() const { return result ? result->guessing_bound : 1.0; }
    std::string status() const { return result ? sdp::to_string(result->status) : "error"; }
};

/// n evenly spaced values from start to stop inclusive.
inline std::vector<double> linear_grid(double start, double stop, int n) {
    if (n < 1) throw std::invalid_argument("grid needs at least one point");
    if (n == 1) return {start};
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = i + 1 == n ? stop : start + (stop - start) * i / (n - 1);
    return g;
}

inline std::vector<double> default_visibility_grid() { return linear_grid(0.85, 1.0, 31); }

/// One result per grid point, in grid order. Failures stay in the curve.
inline std::vector<SweepPoint> visibility_sweep(const Setup& setup, const GuessTarget& target, const npa::LevelSpec& level,
                                                const std::vector<double>& grid, Mode mode, const sdp::SolverSettings& settings = {},
                                                int jobs = 1) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= 0 && grid[i] <= 1)) throw std::invalid_argument("visibility grid values must lie in [0,1]");
        if (i > 0 && grid[i] < grid[i - 1]) throw std::invalid_argument("visibility grid must be sorted");
    }
    std::vector<SweepPoint> curve(grid.size());
    sdp::SolverSettings quiet = settings;
    if (jobs > 1) quiet.log = nullptr;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < grid.size();) {
            curve[i].visibility = grid[i];
            try {
                curve[i].result = certify_randomness(setup, target, level, mode, grid[i], quiet);
            } catch (const std::exception& e) {
                curve[i].error = e.what();
            }
        }
    };
    const int n = std::clamp(jobs, 1, static_cast<int>(std::max<std::size_t>(grid.size(), 1)));
    {
        std::vector<std::jthread> pool;
        for (int t = 1; t < n; ++t) pool.emplace_back(worker);
        worker();
    }
    return curve;
}

/// True when bits never increase as v decreases.
inline bool nonincreasing_in_noise(const std::vector<SweepPoint>& curve, double slack = 0) {
    for (std::size_t i = 1; i < curve.size(); ++i)
        if (curve[i - 1].bits() > curve[i].bits() + slack) return false;
    return true;
}

struct TsirelsonResult {
    double upper_bound = 0;
    std::optional<double> honest;
    /// upper_bound − honest, when the honest value is known.
    std::optional<double> gap;
    sdp::Solution solution;
};

inline TsirelsonResult tsirelson(const BellFunctional& f, const npa::LevelSpec& level, const sdp::SolverSettings& settings = {}) {
    TsirelsonResult r;
    r.solution = sdp::solve(npa::bell_max_sdp(f, level), settings);
    if (r.solution.status == sdp::Status::infeasible) throw std::runtime_error("bell-max SDP reported infeasible");
    r.upper_bound = r.solution.certified_bound;
    return r;
}

/// Bound for setup.functionals[index], compared with its value on the setup's state.
inline TsirelsonResult tsirelson(const Setup& setup, int index, const npa::LevelSpec& level, const sdp::SolverSettings& settings = {}) {
    const auto& f = setup.functionals.at(static_cast<std::size_t>(index));
    TsirelsonResult r = tsirelson(f, level, settings);
    r.honest = eval_functional(f, setup.behavior());
    r.gap = r.upper_bound - *r.honest;
    return r;
}

}  // namespace dirc
