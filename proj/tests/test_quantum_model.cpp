#include <dirc/quantum/serialization.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace dirc;

namespace {

const double kSqrt2 = std::sqrt(2.0);
const double kSqrt3 = std::sqrt(3.0);

Qubit2 random_matrix(std::mt19937& rng) {
    std::normal_distribution<double> n;
    Qubit2 g;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) g(i, j) = Complex(n(rng), n(rng));
    return g;
}

TwoQubit4 random_state(std::mt19937& rng) {
    std::normal_distribution<double> n;
    TwoQubit4 g;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) g(i, j) = Complex(n(rng), n(rng));
    TwoQubit4 rho = g * g.adjoint();
    rho /= rho.trace().real();
    return (rho + rho.adjoint()) / 2.0;
}

QubitMeasurement random_povm(std::mt19937& rng, int outcomes) {
    std::vector<Qubit2> e;
    Qubit2 s = Qubit2::Zero();
    for (int k = 0; k < outcomes; ++k) {
        Qubit2 g = random_matrix(rng);
        e.push_back(g * g.adjoint());
        s += e.back();
    }
    Eigen::SelfAdjointEigenSolver<Qubit2> es(s);
    const Qubit2 isq = es.operatorInverseSqrt();
    QubitMeasurement m;
    for (auto& x : e) {
        Qubit2 r = isq * x * isq;
        m.elements.push_back((r + r.adjoint()) / 2.0);
    }
    // absorb rounding so the elements sum to the identity exactly enough
    Qubit2 sum = Qubit2::Zero();
    for (auto& x : m.elements) sum += x;
    m.elements.back() += Qubit2::Identity() - sum;
    return m;
}

}  // namespace

TEST(Scenario, RejectsDegenerateSettings) {
    EXPECT_THROW(Scenario({}, {2}), std::invalid_argument);
    EXPECT_THROW(Scenario({2, 1}, {2}), std::invalid_argument);
    EXPECT_NO_THROW(Scenario({2, 4}, {2}));
}

TEST(BornBehavior, PhiPlusZProjectorsArePerfectlyCorrelated) {
    const auto z = QubitMeasurement::observable({0, 0, 1});
    const Behavior p = born_behavior(phi_plus(), {z}, {z});
    EXPECT_NEAR(p(0, 0, 0, 0), 0.5, 1e-15);
    EXPECT_NEAR(p(1, 1, 0, 0), 0.5, 1e-15);
    EXPECT_NEAR(p(0, 1, 0, 0), 0.0, 1e-15);
    EXPECT_NEAR(p(1, 0, 0, 0), 0.0, 1e-15);
}

TEST(BornBehavior, TetrahedralPovmHasUniformMarginal) {
    const Behavior p = presets::construction_one().behavior();
    for (int b = 0; b < 4; ++b)
        for (int x = 0; x < 3; ++x) EXPECT_NEAR(p.bob_marginal(b, 6, x), 0.25, 1e-12);
}

TEST(BornBehavior, ConstructionOneChshBlocks) {
    const dirc::Setup s = presets::construction_one();
    const Behavior p = s.behavior();
    ASSERT_EQ(s.functionals.size(), 3u);
    for (const auto& f : s.functionals) EXPECT_NEAR(eval_functional(f, p), 2 * kSqrt2, 1e-12) << f.name();
}

TEST(BornBehavior, Errors) {
    const auto z = QubitMeasurement::observable({0, 0, 1});
    TwoQubit4 bad = phi_plus();
    bad(0, 0) += 0.5;
    EXPECT_THROW(born_behavior(bad, {z}, {z}), std::invalid_argument);
    TwoQubit4 negative = TwoQubit4::Zero();
    negative(0, 0) = 1.5;
    negative(1, 1) = -0.5;
    EXPECT_THROW(born_behavior(negative, {z}, {z}), std::invalid_argument);
    QubitMeasurement twice{{Qubit2::Identity(), Qubit2::Identity()}};
    EXPECT_THROW(born_behavior(phi_plus(), {twice}, {z}), std::invalid_argument);
}

TEST(ValidateMeasurement, TetrahedralPovmIsExtremal) {
    const dirc::Setup s = presets::construction_one();
    const auto d = validate_measurement(s.bob[6]);
    EXPECT_TRUE(d.valid());
    EXPECT_TRUE(d.extremal_hint);
    EXPECT_EQ(d.ranks, (std::vector<int>{1, 1, 1, 1}));
    for (const auto& e : s.bob[6].elements) EXPECT_NEAR(e.trace().real(), 0.5, 1e-14);
}

TEST(ValidateMeasurement, CompletenessViolation) {
    const auto d = validate_measurement({{Qubit2::Identity(), Qubit2::Identity()}});
    EXPECT_FALSE(d.complete);
    EXPECT_NEAR(d.completeness_error, 1.0, 1e-15);
    EXPECT_TRUE(d.psd);
}

TEST(ValidateMeasurement, NegativeEigenvalueFlagged) {
    Qubit2 e0 = Qubit2::Zero(), e1 = Qubit2::Zero();
    e0(0, 0) = -0.1;
    e1(0, 0) = 1.1;
    e1(1, 1) = 1;
    const auto d = validate_measurement({{e0, e1}});
    EXPECT_FALSE(d.psd);
    EXPECT_NEAR(d.min_eigenvalue, -0.1, 1e-15);
    EXPECT_TRUE(d.complete);
}

TEST(ValidateMeasurement, MixedElementsAreNotFlaggedExtremal) {
    const auto d = validate_measurement({{Qubit2::Identity() / 2.0, Qubit2::Identity() / 2.0}});
    EXPECT_TRUE(d.valid());
    EXPECT_FALSE(d.extremal_hint);
}

TEST(Correlator, Examples) {
    const auto z = QubitMeasurement::observable({0, 0, 1});
    EXPECT_NEAR(correlator(born_behavior(phi_plus(), {z}, {z}), 0, 0), 1.0, 1e-15);

    // Oracle: ⟨φ⁺| σx ⊗ (σx+σz)/√2 |φ⁺⟩ from explicit 4×4 matrices.
    Eigen::Vector4cd phi(1, 0, 0, 1);
    phi /= kSqrt2;
    const TwoQubit4 op = kron(pauli::x(), (pauli::x() + pauli::z()) / kSqrt2);
    const double oracle = (phi.adjoint() * op * phi)(0, 0).real();
    EXPECT_NEAR(oracle, 1 / kSqrt2, 1e-15);
    const Behavior p = born_behavior(phi_plus(), {QubitMeasurement::observable({1, 0, 0})},
                                     {QubitMeasurement::observable({1 / kSqrt2, 0, 1 / kSqrt2})});
    EXPECT_NEAR(correlator(p, 0, 0), oracle, 1e-14);

    EXPECT_NEAR(correlator(mix_visibility(p, 0), 0, 0), 0.0, 1e-15);
    EXPECT_THROW(correlator(presets::construction_one().behavior(), 0, 6), std::invalid_argument);
}

TEST(EvalFunctional, ElegantAndModifiedElegantReach4Sqrt3) {
    const dirc::Setup s = presets::construction_two();
    const Behavior p = s.behavior();
    EXPECT_NEAR(eval_functional(s.functionals[0], p), 4 * kSqrt3, 1e-12);
    for (double k : {0.1, 1.0, 7.5}) {
        const dirc::Setup sk = presets::construction_two({0.0676946, k});
        EXPECT_NEAR(eval_functional(sk.functionals[1], sk.behavior()), 4 * kSqrt3, 1e-12) << k;
    }
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(p(i, 0, 3, i), 0.0, 1e-15);
}

TEST(EvalFunctional, ForkReachesItsQuantumBound) {
    for (double d : {0.0676946, 0.1, 0.5}) {
        const dirc::Setup s = presets::fork({d, 1});
        const Behavior p = s.behavior();
        const double q = 3 + 8 * std::sqrt(1 + d * d);
        EXPECT_NEAR(eval_functional(s.functionals[0], p), q, 1e-12);
        EXPECT_NEAR(eval_functional(s.functionals[1], p), q, 1e-12);
    }
}

TEST(EvalFunctional, ScenarioMismatch) {
    const dirc::Setup s = presets::construction_two();
    EXPECT_THROW(eval_functional(s.functionals[0], presets::construction_one().behavior()), std::invalid_argument);
}

TEST(MixVisibility, Endpoints) {
    const Behavior p = presets::construction_one().behavior();
    const Behavior one = mix_visibility(p, 1);
    EXPECT_EQ(one.data(), p.data());
    const Behavior zero = mix_visibility(p, 0);
    const Scenario& sc = p.scenario();
    for (int x = 0; x < 3; ++x)
        for (int y = 0; y < 7; ++y)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < sc.outcomes(Party::bob, y); ++b)
                    EXPECT_DOUBLE_EQ(zero(a, b, x, y), 1.0 / (2 * sc.outcomes(Party::bob, y)));
    EXPECT_THROW(mix_visibility(p, 1.01), std::invalid_argument);
    EXPECT_THROW(mix_visibility(p, -0.1), std::invalid_argument);
}

TEST(MixVisibility, CorrelatorsScaleWithVisibility) {
    const dirc::Setup s = presets::construction_one();
    const Behavior mixed = mix_visibility(s.behavior(), 0.9);
    // Oracle: Born rule with the noisy state 0.9|φ⁺⟩⟨φ⁺| + 0.1·1/4 reproduces
    // the visibility mixture for these unbiased measurements.
    const TwoQubit4 noisy = 0.9 * phi_plus() + 0.1 * TwoQubit4::Identity() / 4.0;
    const Behavior oracle = born_behavior(noisy, s.alice, s.bob);
    for (int x = 0; x < 3; ++x)
        for (int y = 0; y < 6; ++y) {
            EXPECT_NEAR(correlator(mixed, x, y), correlator(oracle, x, y), 1e-14);
            EXPECT_NEAR(correlator(mixed, x, y), 0.9 * correlator(s.behavior(), x, y), 1e-14);
        }
    for (const auto& f : s.functionals) EXPECT_NEAR(eval_functional(f, mixed), 0.9 * 2 * kSqrt2, 1e-12);
}

TEST(Presets, Shapes) {
    const dirc::Setup one = presets::construction_one();
    EXPECT_EQ(one.scenario().alice_outcomes(), (std::vector<int>{2, 2, 2}));
    EXPECT_EQ(one.scenario().bob_outcomes(), (std::vector<int>{2, 2, 2, 2, 2, 2, 4}));
    EXPECT_EQ(one.default_target, GuessTarget::local(Party::bob, 6));

    const dirc::Setup two = presets::construction_two();
    EXPECT_EQ(two.scenario().alice_outcomes(), (std::vector<int>{2, 2, 2, 4}));
    EXPECT_EQ(two.scenario().bob_outcomes(), (std::vector<int>{2, 2, 2, 2}));
    EXPECT_EQ(two.default_target, GuessTarget::local(Party::alice, 3));

    const dirc::Setup f = preset("fork");
    EXPECT_EQ(f.scenario().alice_outcomes(), (std::vector<int>{2, 2, 2, 2, 2, 2, 2, 4}));
    EXPECT_EQ(f.scenario().bob_outcomes(), (std::vector<int>{2, 2, 2, 2, 2, 2, 2, 4}));
    EXPECT_EQ(f.default_target, GuessTarget::global(7, 7));
    EXPECT_DOUBLE_EQ(f.parameters.at("delta"), 0.0676946);
    EXPECT_DOUBLE_EQ(f.parameters.at("k"), 1.0);

    for (const auto& s : {one, two, f}) {
        EXPECT_NO_THROW(s.validate());
        for (const auto& m : s.alice) EXPECT_TRUE(validate_measurement(m).extremal_hint);
        for (const auto& m : s.bob) EXPECT_TRUE(validate_measurement(m).extremal_hint);
    }
}

TEST(Presets, ForkJointOutcomesApproachUniform) {
    double previous = 1;
    for (double d : {0.5, 0.1, 0.01, 0.001}) {
        // deviation from 1/16 is first order in δ
        const Behavior p = presets::fork({d, 1}).behavior();
        double dev = 0;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) dev = std::max(dev, std::abs(p(a, b, 7, 7) - 1.0 / 16));
        EXPECT_LT(dev, previous);
        EXPECT_LT(dev, d / 4);
        previous = dev;
    }
}

TEST(Presets, InvalidParams) {
    EXPECT_THROW(preset("construction-three"), std::invalid_argument);
    EXPECT_THROW(preset("fork", {0.0, 1}), std::invalid_argument);
    EXPECT_THROW(preset("fork", {1.0, 1}), std::invalid_argument);
    EXPECT_THROW(preset("fork", {0.1, 0}), std::invalid_argument);
    EXPECT_THROW(preset("construction-two", {0.1, -1}), std::invalid_argument);
}

TEST(Properties, BornBehaviorSatisfiesInvariants) {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<QubitMeasurement> a, b;
        for (int k = 0; k < 2; ++k) a.push_back(random_povm(rng, 2 + (trial + k) % 3));
        for (int k = 0; k < 3; ++k) b.push_back(random_povm(rng, 2 + (trial * 3 + k) % 3));
        const Behavior p = born_behavior(random_state(rng), a, b);
        EXPECT_TRUE(p.is_valid()) << trial;
    }
}

TEST(Properties, PresetFunctionalsMatchDocumentedValues) {
    for (const auto& s : {preset("construction-one"), preset("construction-two"), preset("fork"), preset("fork", {0.3, 2})}) {
        const Behavior p = s.behavior();
        for (const auto& f : s.functionals) {
            ASSERT_TRUE(f.quantum_bound.has_value());
            EXPECT_NEAR(eval_functional(f, p), *f.quantum_bound, 1e-9) << s.name << " " << f.name();
        }
    }
}

TEST(Properties, MixVisibilityIsAffine) {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(0, 1);
    const Behavior p = presets::fork().behavior();
    for (int trial = 0; trial < 50; ++trial) {
        const double v1 = u(rng), v2 = u(rng), lam = u(rng);
        const Behavior m1 = mix_visibility(p, v1), m2 = mix_visibility(p, v2);
        const Behavior m = mix_visibility(p, lam * v1 + (1 - lam) * v2);
        for (std::size_t i = 0; i < m.data().size(); ++i)
            EXPECT_NEAR(lam * m1.data()[i] + (1 - lam) * m2.data()[i], m.data()[i], 1e-12);
        EXPECT_TRUE(m.is_valid());
    }
}

TEST(Properties, CorrelatorBuiltFunctionalMatchesHandSum) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> w(-2, 2);
    const dirc::Setup s = presets::fork();
    const Behavior p = mix_visibility(s.behavior(), 0.8);
    for (int trial = 0; trial < 20; ++trial) {
        BellFunctional f(p.scenario(), "random");
        double hand = 0;
        for (int x = 0; x < 7; ++x)
            for (int y = 0; y < 7; ++y) {
                const double c = w(rng);
                f.add_correlator(x, y, c);
                hand += c * correlator(p, x, y);
            }
        EXPECT_NEAR(eval_functional(f, p), hand, 1e-12);
    }
}

TEST(Serialization, SetupJsonRoundTripPreservesBehavior) {
    for (const auto& s : {preset("construction-one"), preset("construction-two"), preset("fork", {0.2, 3})}) {
        const auto j = setup_to_json(s);
        const dirc::Setup back = setup_from_json(nlohmann::json::parse(j.dump()));
        EXPECT_EQ(back.name, s.name);
        EXPECT_EQ(back.default_target, s.default_target);
        EXPECT_EQ(back.certifying, s.certifying);
        const Behavior p = s.behavior(), q = back.behavior();
        for (std::size_t i = 0; i < p.data().size(); ++i) EXPECT_NEAR(p.data()[i], q.data()[i], 1e-15);
        for (std::size_t i = 0; i < s.functionals.size(); ++i)
            EXPECT_NEAR(eval_functional(back.functionals[i], q), eval_functional(s.functionals[i], p), 1e-12);
    }
    const auto state = setup_to_json(preset("fork"))["state"];
    EXPECT_NEAR(state[0][3][0].get<double>(), 0.5, 1e-15);
    EXPECT_EQ(state[0][3][1].get<double>(), 0.0);
}

TEST(Serialization, RejectsMalformedSetups) {
    auto j = setup_to_json(preset("construction-one"));
    j["state"][0][0] = nlohmann::json::array({2.0, 0.0});
    EXPECT_THROW(setup_from_json(j), std::invalid_argument);
    auto k = setup_to_json(preset("construction-one"));
    k["alice"][0]["elements"][0] = nlohmann::json::array({1, 2});
    EXPECT_THROW(setup_from_json(k), std::invalid_argument);
    EXPECT_THROW(load_setup("/nonexistent/setup.json"), std::invalid_argument);
}

TEST(Serialization, BehaviorCsvRowsNormalize) {
    const Behavior p = preset("construction-one").behavior();
    std::istringstream in(behavior_csv(p));
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "x,y,a,b,p");
    std::map<std::pair<int, int>, double> sums;
    int rows = 0;
    while (std::getline(in, line)) {
        int x, y, a, b;
        double v;
        char c;
        std::istringstream ls(line);
        ls >> x >> c >> y >> c >> a >> c >> b >> c >> v;
        sums[{x, y}] += v;
        ++rows;
    }
    EXPECT_EQ(rows, 3 * (6 * 4 + 8));
    for (const auto& [k, s] : sums) EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(GuessTargetText, ParsesOneBasedSettings) {
    EXPECT_EQ(GuessTarget::parse("local:B:7"), GuessTarget::local(Party::bob, 6));
    EXPECT_EQ(GuessTarget::parse("global:8:8"), GuessTarget::global(7, 7));
    EXPECT_EQ(GuessTarget::parse("local:A:4").to_string(), "local:A:4");
    for (const char* bad : {"local:C:1", "local:A:0", "global:1", "foo:1:1", "local:A:x"})
        EXPECT_THROW(GuessTarget::parse(bad), std::invalid_argument) << bad;
}
