#include <dirc/certify/report.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace dirc;
using npa::parse_level;

TEST(PovmCeiling, MatchesFormula) {
    EXPECT_EQ(povm_ceiling(2), std::make_pair(2.0, 4.0));
    const auto [l3, g3] = povm_ceiling(3);
    EXPECT_DOUBLE_EQ(l3, 2 * std::log2(3.0));
    EXPECT_DOUBLE_EQ(g3, 4 * std::log2(3.0));
    EXPECT_EQ(povm_ceiling(4), std::make_pair(4.0, 8.0));
    EXPECT_THROW(povm_ceiling(1), std::invalid_argument);
}

TEST(Bits, TruncationNeverRoundsUp) {
    EXPECT_DOUBLE_EQ(truncate_bits(1.99999), 1.9999);
    EXPECT_DOUBLE_EQ(truncate_bits(0.5), 0.5);
    EXPECT_DOUBLE_EQ(bits_from_bound(0.25), 2.0);
    EXPECT_EQ(bits_from_bound(1.0000001), 0.0);
    EXPECT_THROW(bits_from_bound(0), std::domain_error);
}

TEST(Ceiling, CapsByOutcomesAndQubitBound) {
    const auto c1 = preset("construction-one");
    EXPECT_DOUBLE_EQ(randomness_ceiling(c1.scenario(), GuessTarget::local(Party::bob, 6)), 2.0);
    EXPECT_DOUBLE_EQ(randomness_ceiling(c1.scenario(), GuessTarget::local(Party::bob, 0)), 1.0);
    const auto f = preset("fork");
    EXPECT_DOUBLE_EQ(randomness_ceiling(f.scenario(), GuessTarget::global(7, 7)), 4.0);
}

TEST(Certify, UniformNoiseGivesNoRandomness) {
    const auto s = preset("construction-one");
    const auto r = certify_randomness(s, GuessTarget::local(Party::bob, 6), parse_level("1"), Mode::behavior, 0.0);
    EXPECT_TRUE(r.converged());
    EXPECT_NEAR(r.guessing_bound, 1.0, 1e-6);
    EXPECT_NEAR(r.bits, 0.0, 1e-5);
    EXPECT_FALSE(r.analytic_bits);
}

TEST(Certify, ConstructionOneMarginalAtLevelOne) {
    const auto s = preset("construction-one");
    const auto r = certify_randomness(s, parse_level("1"));
    EXPECT_EQ(r.mode, Mode::behavior);
    EXPECT_TRUE(r.certified());
    EXPECT_GE(r.guessing_bound, 0.25 - 1e-9);
    EXPECT_DOUBLE_EQ(r.bits, bits_from_bound(r.guessing_bound));
    EXPECT_LE(r.bits, r.ceiling);
    ASSERT_TRUE(r.analytic_bits);
    EXPECT_EQ(*r.analytic_bits, 2.0);
}

TEST(Certify, GuessingBoundAtLeastHonestMarginal) {
    const auto s = preset("construction-two");
    const double v = 0.9;
    const GuessTarget t = GuessTarget::local(Party::alice, 0);
    const auto r = certify_randomness(s, t, parse_level("1"), Mode::behavior, v);
    const Behavior p = mix_visibility(s.behavior(), v);
    for (int a = 0; a < 2; ++a) EXPECT_GE(r.guessing_bound, p.alice_marginal(a, 0) - 1e-9);
}

TEST(Certify, BehaviorModeIsTighterThanBellValueMode) {
    const auto s = preset("construction-two");
    const GuessTarget t = s.default_target;
    for (double v : {1.0, 0.97}) {
        const auto b = certify_randomness(s, t, parse_level("1+AB"), Mode::behavior, v);
        const auto w = certify_randomness(s, t, parse_level("1+AB"), Mode::bell_value, v);
        EXPECT_LE(b.guessing_bound, w.guessing_bound + 2e-6) << "v=" << v;
    }
}

TEST(Certify, BellValueIsClampedBelowLevelMaximum) {
    const auto s = preset("construction-two");
    const auto r = certify_randomness(s, s.default_target, parse_level("1"), Mode::bell_value, 1.0);
    ASSERT_EQ(r.constraint.bell_values.size(), 1u);
    const auto top = sdp::solve(npa::bell_max_sdp(s.functionals[1], parse_level("1")));
    EXPECT_LE(r.constraint.bell_values[0].second, top.primal_objective - 1e-8 + 1e-12);
    EXPECT_TRUE(r.converged());
}

TEST(Certify, RefiningTheLevelNeverLosesBits) {
    const auto s = preset("construction-one");
    const auto l1 = certify_randomness(s, s.default_target, parse_level("1"), Mode::behavior, 0.98);
    const auto l2 = certify_randomness(s, s.default_target, parse_level("1+AB"), Mode::behavior, 0.98);
    EXPECT_GE(l2.bits, l1.bits - 2e-6);
}

TEST(Certify, RejectsBadInput) {
    const auto s = preset("construction-one");
    EXPECT_THROW(certify_randomness(s, GuessTarget::local(Party::bob, 9), parse_level("1"), Mode::behavior, 1), std::out_of_range);
    EXPECT_THROW(certify_randomness(s, s.default_target, parse_level("1"), Mode::behavior, 1.5), std::invalid_argument);
    EXPECT_THROW(parse_mode("both"), std::invalid_argument);
}

TEST(Sweep, GridHelpers) {
    const auto g = default_visibility_grid();
    ASSERT_EQ(g.size(), 31u);
    EXPECT_DOUBLE_EQ(g.front(), 0.85);
    EXPECT_DOUBLE_EQ(g.back(), 1.0);
    EXPECT_NEAR(g[1] - g[0], 0.005, 1e-15);
    EXPECT_THROW(linear_grid(0, 1, 0), std::invalid_argument);
}

TEST(Sweep, CurveIsMonotoneAndOrderIndependentOfJobs) {
    const auto s = preset("construction-one");
    const auto grid = linear_grid(0.9, 1.0, 5);
    const auto serial = visibility_sweep(s, s.default_target, parse_level("1"), grid, Mode::behavior);
    const auto parallel = visibility_sweep(s, s.default_target, parse_level("1"), grid, Mode::behavior, {}, 3);
    ASSERT_EQ(serial.size(), grid.size());
    EXPECT_TRUE(nonincreasing_in_noise(serial, 1e-6));
    EXPECT_EQ(curve_csv(serial), curve_csv(parallel));
    std::istringstream csv(curve_csv(serial));
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, "v,bits,guessing_bound,status");
    int rows = 0;
    while (std::getline(csv, line)) ++rows;
    EXPECT_EQ(rows, 5);
}

TEST(Sweep, RejectsUnsortedGrid) {
    const auto s = preset("construction-one");
    EXPECT_THROW(visibility_sweep(s, s.default_target, parse_level("1"), {1.0, 0.9}, Mode::behavior), std::invalid_argument);
}

TEST(Sweep, FailuresStayInTheCurve) {
    SweepPoint p;
    p.visibility = 0.9;
    p.error = "boom";
    EXPECT_EQ(p.bits(), 0.0);
    EXPECT_EQ(p.status(), "error");
    EXPECT_NE(curve_csv({p}).find("0.9,0.0000,1,error"), std::string::npos);
}

TEST(Tsirelson, Chsh) {
    const Scenario sc({2, 2}, {2, 2});
    const auto t = tsirelson(functionals::chsh(sc, 0, 1, 0, 1), parse_level("1"));
    EXPECT_NEAR(t.upper_bound, 2 * std::sqrt(2.0), 1e-7);
    EXPECT_FALSE(t.honest);
}

TEST(Tsirelson, ElegantSandwich) {
    const auto s = preset("construction-two");
    const auto t = tsirelson(s, 0, parse_level("1+AB"));
    ASSERT_TRUE(t.gap);
    EXPECT_LE(*t.gap, 1e-6);
    EXPECT_GE(*t.gap, -1e-9);
    EXPECT_NEAR(*t.honest, 4 * std::sqrt(3.0), 1e-9);
}

TEST(Report, JsonCarriesContractFields) {
    const auto s = preset("construction-one");
    const auto r = certify_randomness(s, parse_level("1"));
    const auto j = to_json(r);
    for (const char* k : {"bits", "guessing_bound", "certified", "ceiling", "level", "mode", "visibility", "solver", "analytic"})
        EXPECT_TRUE(j.contains(k)) << k;
    EXPECT_EQ(j["certified"], true);
    EXPECT_LE(j["bits"].get<double>(), r.bits);
}
