#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "cli.hpp"
#include "lgi/errors.hpp"

using lgi::cli::dispatch;

namespace {

struct Invocation {
    int code;
    std::string out;
    std::string err;
};

Invocation run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = dispatch(args, out, err);
    return {code, out.str(), err.str()};
}

double value_of(const std::string& text, const std::string& key) {
    std::istringstream in(text);
    std::string k, v;
    while (in >> k >> v) {
        if (k == key) return std::stod(v);
        std::getline(in, v);
    }
    ADD_FAILURE() << "missing key " << key << " in\n" << text;
    return 0.0;
}

const std::vector<std::string> kSmallGrid = {"--theta-points", "24", "--phi-points", "8",
                                             "--dt-points", "96"};

std::vector<std::string> with_grid(std::vector<std::string> args) {
    args.insert(args.end(), kSmallGrid.begin(), kSmallGrid.end());
    return args;
}

}  // namespace

TEST(Cli, K3SinglePoint) {
    const Invocation r = run({"k3", "--alpha", "0.5", "--theta", "1.5707963267948966", "--dt", "0.5235987755982988"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NEAR(value_of(r.out, "k3"), 1.5, 1e-11);
    EXPECT_NEAR(value_of(r.out, "delta_e_avg"), 0.5, 1e-11);
}

TEST(Cli, K3WithBlochAndModel) {
    const Invocation r = run({"k3", "--bloch", "0.1,0.2,0.3", "--theta", "0", "--dt", "0.7", "--model", "z",
                       "--gamma", "0.5"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NEAR(value_of(r.out, "k3"), 1.0, 1e-12);
}

TEST(Cli, OptimizeOnTheMaxLine) {
    const Invocation r = run(with_grid({"optimize", "--alpha", "0.5", "--delta", "0.5", "--model", "none"}));
    EXPECT_EQ(r.code, 0);
    EXPECT_NEAR(value_of(r.out, "k3_opt"), 1.5, 1e-3);
}

TEST(Cli, OptimizeInfeasibleIsNotAnError) {
    const Invocation r = run(with_grid({"optimize", "--alpha", "1", "--delta", "0.5", "--model", "none"}));
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("feasible false"), std::string::npos);
    EXPECT_NE(r.out.find("k3_opt infeasible"), std::string::npos);
}

TEST(Cli, VerifyTheoremOne) {
    const Invocation r = run(with_grid({"verify", "--theorem", "1", "--alpha", "0.7", "--model", "none"}));
    EXPECT_EQ(r.code, 0) << r.out << r.err;
    EXPECT_NEAR(value_of(r.out, "argmax_delta"), 0.02, 0.01 + 1e-9);
    EXPECT_NE(r.out.find("result pass"), std::string::npos);
}

TEST(Cli, VerifyFailureExitsTwo) {
    // Same-basis noise keeps the maximum on the line, so expecting a shift fails.
    const Invocation r = run(with_grid({"verify", "--theorem", "shift", "--alpha", "0.5", "--model", "z",
                                 "--gamma", "0.5", "--delta-step", "0.05"}));
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find("result fail"), std::string::npos);
}

TEST(Cli, FeasibleBounds) {
    const Invocation r = run({"feasible", "--alpha", "0.5"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("band_closed_form -0.25 0.75"), std::string::npos);
    const Invocation n = run(with_grid({"feasible", "--bloch", "0,0,0.5", "--delta", "-0.2"}));
    EXPECT_EQ(n.code, 0);
    EXPECT_NE(n.out.find("feasible true"), std::string::npos);
}

TEST(Cli, InputErrorsExitOne) {
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"bogus"}).code, 1);
    EXPECT_EQ(run({"k3", "--alpha", "0.5", "--unknown-flag", "1"}).code, 1);
    EXPECT_EQ(run({"k3", "--alpha", "1.5", "--dt", "0.3"}).code, 1);
    EXPECT_EQ(run({"k3", "--alpha", "0.5", "--dt", "0"}).code, 1);
    EXPECT_EQ(run({"k3", "--alpha", "0.5", "--bloch", "0,0,1"}).code, 1);
    EXPECT_EQ(run({"k3", "--dt", "0.3"}).code, 1);
    EXPECT_EQ(run({"k3", "--alpha", "0.5", "--model", "none", "--gamma", "0.2"}).code, 1);
    EXPECT_EQ(run({"verify", "--theorem", "1", "--alpha", "0.5", "--model", "z", "--gamma", "1"}).code, 1);
    EXPECT_EQ(run({"sweep", "--family", "nope"}).code, 1);
    EXPECT_EQ(run({"sweep", "--model", "none", "--gamma", "0.5"}).code, 1);
    const Invocation help = run({"--help"});
    EXPECT_EQ(help.code, 0);
}

TEST(Cli, SweepWritesCsvAndJson) {
    const auto dir = std::filesystem::temp_directory_path();
    const std::string csv = (dir / "lgi_cli_sweep.csv").string();
    const std::string json = (dir / "lgi_cli_sweep.json").string();
    const std::vector<std::string> base = {"sweep", "--family-count", "2", "--delta-count", "3",
                                           "--theta-points", "8", "--phi-points", "4", "--dt-points", "16",
                                           "--jobs", "2"};
    auto a = base;
    a.insert(a.end(), {"--output", csv});
    ASSERT_EQ(run(a).code, 0);
    auto b = base;
    b.insert(b.end(), {"--output", json, "--format", "json"});
    ASSERT_EQ(run(b).code, 0);
    std::ifstream in(csv);
    std::string first;
    std::getline(in, first);
    EXPECT_EQ(first.rfind("# grid family=2 delta=3", 0), 0u);
    EXPECT_EQ(lgi::import_csv(csv).size(), 6u);
    std::filesystem::remove(csv);
    std::filesystem::remove(json);
}

TEST(Cli, SweepIsDeterministic) {
    const std::vector<std::string> args = {"sweep", "--family", "bloch_mx", "--family-count", "2",
                                           "--delta-count", "3", "--model", "x", "--gamma", "0.5,1",
                                           "--theta-points", "8", "--phi-points", "4", "--dt-points", "16"};
    auto one = args;
    one.insert(one.end(), {"--jobs", "1"});
    auto many = args;
    many.insert(many.end(), {"--jobs", "3"});
    EXPECT_EQ(run(one).out, run(many).out);
}

TEST(Cli, ConfigFileMatchesFlags) {
    const std::string path = (std::filesystem::temp_directory_path() / "lgi_cli.cfg").string();
    {
        std::ofstream cfg(path);
        cfg << "# sweep settings\n"
               "family = bloch_general\n"
               "fixed = 0.3,0,0\n"
               "vary = z\n"
               "family-min = -0.5\n"
               "family-max = 0.5\n"
               "family-count = 11\n"
               "delta-count = 21\n"
               "model = diag45\n"
               "gamma = 0.1,1.0\n"
               "theta-points = 16\n"
               "dt-max = 3.5\n"
               "tolerance = 0.001\n";
    }
    const lgi::SweepSpec from_file = lgi::cli::parse_sweep_spec({"--config", path});
    const lgi::SweepSpec from_flags = lgi::cli::parse_sweep_spec(
        {"--family", "bloch_general", "--fixed", "0.3,0,0", "--vary", "z", "--family-min", "-0.5",
         "--family-max", "0.5", "--family-count", "11", "--delta-count", "21", "--model", "diag45",
         "--gamma", "0.1,1.0", "--theta-points", "16", "--dt-max", "3.5", "--tolerance", "0.001"});
    EXPECT_TRUE(from_file == from_flags);
    EXPECT_EQ(from_file.family, lgi::StateFamily::BlochGeneral);
    EXPECT_EQ(from_file.gammas, (std::vector<double>{0.1, 1.0}));
    EXPECT_EQ(from_file.search.theta_points, 16);
    EXPECT_EQ(from_file.tolerance, 0.001);

    std::ofstream(path) << "not-a-flag = 3\n";
    EXPECT_THROW(lgi::cli::parse_sweep_spec({"--config", path}), lgi::ConfigError);
    std::filesystem::remove(path);
}

TEST(Cli, DefaultGammasFollowModel) {
    EXPECT_EQ(lgi::cli::parse_sweep_spec({"--model", "z"}).gammas, (std::vector<double>{0.1, 0.5, 1.0, 1.5}));
    EXPECT_EQ(lgi::cli::parse_sweep_spec({}).gammas, std::vector<double>{0.0});
}
