#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cmech/cli.hpp"

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "rbsim");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = cmech::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("cmech_test_" + std::to_string(::getpid()) + "_" + name);
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(CliSimulate, LieRunWritesHundredAndOneSamples) {
    const auto path = temp_path("traj.csv");
    const auto r = run({"simulate", "--inertia", "2,3,4", "--m0", "1,1,1", "--t", "10", "--dt", "0.1", "--method",
                        "lie", "--order", "16", "--out", path.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = parse_csv(slurp(path));
    ASSERT_EQ(rows.size(), 102u);
    EXPECT_EQ(rows[0].size(), 19u);
    EXPECT_EQ(rows.back()[0], "10");
    EXPECT_NE(r.out.find("samples 101"), std::string::npos);
    EXPECT_NE(r.out.find("drift_H0"), std::string::npos);
    std::filesystem::remove(path);
}

TEST(CliSimulate, DegenerateInertiaIsConfigError) {
    const auto r = run({"simulate", "--inertia", "1,2,3"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("DegenerateBody"), std::string::npos);
}

TEST(CliSimulate, PrincipalAxisSpinKeepsMomentumColumns) {
    const auto r = run({"simulate", "--m0", "3,0,0", "--t", "2", "--dt", "0.1"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = parse_csv(r.out);
    ASSERT_EQ(rows.size(), 22u);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i][10], "3");
        EXPECT_EQ(rows[i][11], "0");
        EXPECT_EQ(rows[i][12], "0");
    }
    EXPECT_NE(r.err.find("samples 21"), std::string::npos);
}

TEST(CliSimulate, Rk4AndJsonFormat) {
    const auto r = run({"simulate", "--method", "rk4", "--t", "1", "--dt", "0.25", "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = nlohmann::json::parse(r.out);
    ASSERT_EQ(doc.size(), 5u);
    EXPECT_EQ(doc[4]["t"].get<double>(), 1.0);
    EXPECT_TRUE(doc[0].contains("orthodefect"));
}

TEST(CliSimulate, StepRejectionExitsWithTwo) {
    const auto r = run({"simulate", "--m0", "10,10,10", "--t", "10", "--dt", "5", "--order", "8"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("StepRejected"), std::string::npos);
}

TEST(CliSimulate, InvalidConfigurationsNameTheProblem) {
    EXPECT_EQ(run({"simulate", "--t", "-1"}).code, 1);
    EXPECT_EQ(run({"simulate", "--dt", "0"}).code, 1);
    EXPECT_EQ(run({"simulate", "--inertia", "1,2"}).code, 1);
    EXPECT_EQ(run({"simulate", "--method", "euler"}).code, 1);
    EXPECT_EQ(run({"simulate", "--r0", "1,0,0,0,1,0,0,0,2"}).code, 1);
    const auto r = run({"simulate", "--m0", "1,x,1"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("--m0"), std::string::npos);
    EXPECT_EQ(run({"frobnicate"}).code, 1);
    EXPECT_EQ(run({"verify", "nonsense"}).code, 1);
}

TEST(CliVerify, JacobiSuite) {
    const auto r = run({"verify", "jacobi", "--samples", "50", "--seed", "42"});
    EXPECT_EQ(r.code, 0) << r.out << r.err;
    EXPECT_NE(r.out.find("chetaev_jacobi"), std::string::npos);
}

TEST(CliVerify, DiracSuiteOnSphere) {
    const auto r = run({"verify", "dirac", "--surface", "sphere", "--samples", "20"});
    EXPECT_EQ(r.code, 0) << r.out << r.err;
}

TEST(CliVerify, BracketsSuiteOnSo3) {
    const auto r = run({"verify", "brackets", "--surface", "so3", "--samples", "20"});
    EXPECT_EQ(r.code, 0) << r.out << r.err;
    EXPECT_NE(r.out.find("chetaev_full"), std::string::npos);
}

TEST(CliVerify, InvariantsSuite) {
    const auto r = run({"verify", "invariants", "--samples", "3"});
    EXPECT_EQ(r.code, 0) << r.out << r.err;
}

TEST(CliVerify, DeterministicReports) {
    const auto a = run({"verify", "dirac", "--surface", "so3", "--samples", "5", "--seed", "7"});
    const auto b = run({"verify", "dirac", "--surface", "so3", "--samples", "5", "--seed", "7"});
    EXPECT_EQ(a.out, b.out);
    const auto c = run({"verify", "dirac", "--surface", "so3", "--samples", "5", "--seed", "8"});
    EXPECT_NE(a.out, c.out);
}

TEST(CliVerify, ToleranceBreachExitsWithThree) {
    const auto r = run({"verify", "dirac", "--samples", "3", "--tol", "casimir_G=1e-300"});
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("casimir_G"), std::string::npos);
    EXPECT_NE(r.err.find("sample"), std::string::npos);
    EXPECT_EQ(run({"verify", "dirac", "--tol", "no_such_check=1"}).code, 1);
}

TEST(CliConfig, JsonDocumentWithFlagPrecedence) {
    const auto path = temp_path("config.json");
    {
        std::ofstream cfg(path);
        cfg << R"({"inertia": [2, 3, 4], "m0": "3,0,0", "t": 1.0, "dt": 0.5, "format": "csv"})";
    }
    auto r = run({"simulate", "--config", path.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(parse_csv(r.out).size(), 4u);
    r = run({"simulate", "--config", path.string(), "--dt", "0.25"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(parse_csv(r.out).size(), 6u);
    {
        std::ofstream cfg(path);
        cfg << R"({"inertia": [1, 2, 3]})";
    }
    r = run({"simulate", "--config", path.string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("DegenerateBody"), std::string::npos);
    {
        std::ofstream cfg(path);
        cfg << R"({"bogus": 1})";
    }
    EXPECT_EQ(run({"simulate", "--config", path.string()}).code, 1);
    std::filesystem::remove(path);
}

TEST(CliConfig, EnvironmentOverride) {
    ::setenv("RB_DT", "0.5", 1);
    const auto env = run({"simulate", "--t", "1"});
    const auto flag = run({"simulate", "--t", "1", "--dt", "0.25"});
    ::unsetenv("RB_DT");
    ASSERT_EQ(env.code, 0) << env.err;
    EXPECT_EQ(parse_csv(env.out).size(), 4u);
    EXPECT_EQ(parse_csv(flag.out).size(), 6u);
}

TEST(CliBinary, ExitCodesFromExecutable) {
    auto status = [](const std::string& args) {
        const std::string cmd = std::string(RBSIM_PATH) + " " + args + " > /dev/null 2>&1";
        return WEXITSTATUS(std::system(cmd.c_str()));
    };
    EXPECT_EQ(status("verify jacobi --samples 5"), 0);
    EXPECT_EQ(status("simulate --inertia 1,2,3"), 1);
    EXPECT_EQ(status("simulate --m0 10,10,10 --dt 5 --order 8"), 2);
    EXPECT_EQ(status("verify dirac --samples 2 --tol 1e-300"), 3);
}
