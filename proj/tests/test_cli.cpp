#include <dirc/cli/cli.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Run {
    int code = 0;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "dirc");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Run r;
    r.code = dirc::cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST(Cli, SosVerifyElegant) {
    const auto r = run({"sos-verify", "--certificate", "elegant"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("exact identity verified"), std::string::npos);
}

TEST(Cli, SosVerifyJson) {
    const auto r = run({"sos-verify", "--format", "json"});
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["verified"], true);
    EXPECT_TRUE(j["difference"].empty());
}

TEST(Cli, UnknownCertificateIsConfigError) {
    const auto r = run({"sos-verify", "--certificate", "chsh"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("--certificate"), std::string::npos);
}

TEST(Cli, BehaviorCsvRowsSumToOne) {
    const auto r = run({"behavior", "--setup", "construction-one", "--format", "csv"});
    ASSERT_EQ(r.code, 0);
    const auto ls = lines(r.out);
    ASSERT_FALSE(ls.empty());
    EXPECT_EQ(ls[0], "x,y,a,b,p");
    std::map<std::pair<int, int>, double> sums;
    for (std::size_t i = 1; i < ls.size(); ++i) {
        int x, y, a, b;
        double p;
        char c;
        std::istringstream in(ls[i]);
        in >> x >> c >> y >> c >> a >> c >> b >> c >> p;
        sums[{x, y}] += p;
    }
    EXPECT_EQ(sums.size(), 3u * 7u);
    for (const auto& [k, s] : sums) EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(Cli, CertifyJsonHasContractFields) {
    const auto r = run({"certify", "--setup", "construction-one", "--level", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    const auto& res = j["result"];
    for (const char* k : {"bits", "guessing_bound", "certified", "ceiling"}) EXPECT_TRUE(res.contains(k)) << k;
    EXPECT_EQ(res["certified"], true);
    EXPECT_EQ(j["provenance"]["version"], dirc::cli::version);
    EXPECT_EQ(j["provenance"]["solver_settings"]["gap_tolerance"], 1e-9);
}

TEST(Cli, SweepCsv) {
    const auto r = run({"sweep", "--setup", "construction-one", "--level", "1", "--target", "local:B:7", "--visibility", "0.9:1.0:3"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto ls = lines(r.out);
    ASSERT_EQ(ls.size(), 4u);
    EXPECT_EQ(ls[0], "v,bits,guessing_bound,status");
}

TEST(Cli, OutputIsDeterministic) {
    const std::vector<std::string> args = {"certify", "--setup", "construction-two", "--level", "1", "--visibility", "0.95"};
    EXPECT_EQ(run(args).out, run(args).out);
}

TEST(Cli, OutputFlagWritesFile) {
    const auto path = std::filesystem::temp_directory_path() / "dirc_cli_test_behavior.csv";
    const auto r = run({"behavior", "--setup", "fork", "--output", path.string()});
    ASSERT_EQ(r.code, 0);
    EXPECT_TRUE(r.out.empty());
    std::ifstream in(path);
    std::string first;
    std::getline(in, first);
    EXPECT_EQ(first, "x,y,a,b,p");
    std::filesystem::remove(path);
}

TEST(Cli, ConfigurationErrorsExitTwoAndNameTheFlag) {
    struct Case {
        std::vector<std::string> args;
        std::string flag;
    };
    const std::vector<Case> cases = {
        {{"certify", "--setup", "nonesuch"}, "--setup"},
        {{"certify", "--setup", "fork", "--level", "2+XY"}, "--level"},
        {{"certify", "--setup", "fork", "--target", "local:C:1"}, "--target"},
        {{"certify", "--setup", "fork", "--target", "local:A:99"}, "--target"},
        {{"certify", "--setup", "fork", "--mode", "loose"}, "--mode"},
        {{"certify", "--setup", "construction-one", "--delta", "0.1"}, "--delta"},
        {{"certify", "--setup", "construction-one", "--visibility", "0.9:1:3"}, "--visibility"},
        {{"certify", "--setup", "construction-one", "--visibility", "1.5"}, "--visibility"},
        {{"sweep", "--setup", "construction-one", "--visibility", "0.9:1"}, "--visibility"},
        {{"certify", "--setup", "construction-one", "--format", "xml"}, "--format"},
        {{"certify", "--setup", "fork", "--step-fraction", "1.5"}, "solver"},
        {{"bell-max", "--setup", "fork", "--functional", "7"}, "--functional"},
    };
    for (const auto& c : cases) {
        const auto r = run(c.args);
        EXPECT_EQ(r.code, 2) << c.args[2];
        EXPECT_NE(r.err.find(c.flag), std::string::npos) << r.err;
    }
}

TEST(Cli, ParseErrorsExitTwo) {
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    EXPECT_EQ(run({"certify"}).code, 2);  // --setup is required
    EXPECT_EQ(run({"certify", "--setup", "fork", "--level"}).code, 2);
}

TEST(Cli, HelpExitsZero) {
    const auto r = run({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("sweep"), std::string::npos);
}

TEST(Cli, SetupFileRoundTrip) {
    const auto path = std::filesystem::temp_directory_path() / "dirc_cli_test_setup.json";
    {
        std::ofstream out(path);
        out << dirc::setup_to_json(dirc::preset("construction-two")).dump();
    }
    const auto a = run({"behavior", "--setup", path.string()});
    const auto b = run({"behavior", "--setup", "construction-two"});
    EXPECT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    std::filesystem::remove(path);
}

TEST(Cli, BellMaxChshOnConstructionOne) {
    const auto r = run({"bell-max", "--setup", "construction-one", "--level", "1", "--functional", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_NEAR(j["results"][0]["upper_bound"].get<double>(), 2 * std::sqrt(2.0), 1e-6);
    EXPECT_NEAR(j["results"][0]["honest"].get<double>(), 2 * std::sqrt(2.0), 1e-9);
}
