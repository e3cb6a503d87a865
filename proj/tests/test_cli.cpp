#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "curvlab/cli.hpp"

using namespace curvlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("curvlab-test-" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string config(const std::string& name) { return std::string(CURVLAB_CONFIGS) + "/" + name; }

int run_quiet(const std::string& cmd, const std::string& cfg, CliFlags f, const fs::path& dir) {
  f.out = dir.string();
  std::ostringstream out, err;
  return run(cmd, cfg, f, out, err);
}

}  // namespace

TEST(Config, MinimalConfigTakesDefaults) {
  const auto c = parse_config_text("{}");
  EXPECT_EQ(c.n_r, 48);
  EXPECT_EQ(c.n_theta, 192);
  EXPECT_EQ(c.tol.interior, 1e-8);
  EXPECT_EQ(c.tol.boundary, 1e-7);
  EXPECT_EQ(c.output_dir, "curvlab-out");
  EXPECT_FALSE(c.initial.has_value());
}

TEST(Config, ParsesDataAndSequence) {
  const auto c = parse_config_text(R"({"K": [[0,0,1],[1,0,1]], "h": {"cos": [2, 1]},
      "grid": {"n_r": 16, "n_theta": 64}, "sequence": {"p": [0, 1], "lambdas": [0.5, 0.9]}})");
  EXPECT_EQ(c.data.K(Point(0.5, 0.0)), 1.5);
  EXPECT_NEAR(c.data.h(0.0), 3.0, 1e-15);
  EXPECT_EQ(c.n_r, 16);
  EXPECT_NEAR(std::abs(c.sequence.p - Point(0.0, 1.0)), 0.0, 1e-15);
}

TEST(Config, ReportsEveryProblem) {
  try {
    parse_config_text(R"({"KK": 1, "grid": {"n_theta": 15}, "tolerances": {"interior": -1}})");
    FAIL() << "accepted a bad config";
  } catch (const ConfigError& e) {
    const std::string all = e.what();
    EXPECT_NE(all.find("unknown key \"KK\""), std::string::npos) << all;
    EXPECT_NE(all.find("n_theta"), std::string::npos) << all;
    EXPECT_NE(all.find("interior"), std::string::npos) << all;
    EXPECT_GE(e.errors().size(), 3u);
  }
  EXPECT_THROW(parse_config_text("{not json"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"bubble": {"k0": -1, "h0": 0}})"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"sequence": {"lambdas": [0.9, 0.5]}})"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"sequence": {"p": [0, 2]}})"), ConfigError);
}

TEST(Flags, PatchBubbleOrInitialGuess) {
  ProblemConfig c;
  CliFlags f;
  f.k0 = 3.0;
  f.h0 = 1.0;
  f.a = Point(0.3, 0.0);
  apply_flags(c, f, "bubble");
  EXPECT_EQ(c.bubble.k0, 3.0);
  EXPECT_EQ(c.bubble.a, Point(0.3, 0.0));
  ProblemConfig s;
  apply_flags(s, f, "solve");
  ASSERT_TRUE(s.initial.has_value());
  EXPECT_EQ(s.initial->h0, 1.0);
  CliFlags bad;
  bad.a = Point(1.5, 0.0);
  EXPECT_THROW(apply_flags(c, bad, "bubble"), ConfigError);
}

TEST(Run, CandidatesCompact) {
  const auto dir = scratch("candidates");
  EXPECT_EQ(run_quiet("candidates", config("candidates_compact.json"), {}, dir), 0);
  const auto j = nlohmann::json::parse(slurp(dir / "candidates.json"));
  EXPECT_EQ(j["results"]["verdict"], "compact");
  EXPECT_EQ(j["summary"]["exit_code"], 0);
  EXPECT_TRUE(fs::exists(dir / "phi_boundary.csv"));
}

TEST(Run, BubbleFromFlags) {
  const auto dir = scratch("bubble");
  CliFlags f;
  f.k0 = 3.0;
  f.h0 = 1.0;
  f.a = Point(0.3, 0.0);
  EXPECT_EQ(run_quiet("bubble", "", f, dir), 0);
  const auto j = nlohmann::json::parse(slurp(dir / "bubble.json"));
  bool saw_gb = false;
  for (const auto& c : j["checks"]) {
    EXPECT_TRUE(c["pass"].get<bool>()) << c["name"];
    if (c["tag"] == "gauss-bonnet") {
      saw_gb = true;
      EXPECT_LE(std::abs(c["value"].get<double>()), 1e-8);
    }
  }
  EXPECT_TRUE(saw_gb);
}

TEST(Run, ValidateSucceeds) {
  EXPECT_EQ(run_quiet("validate", config("validate.json"), {}, scratch("validate")), 0);
}

TEST(Run, ObstructedSolveReportsNonConvergence) {
  const auto dir = scratch("obstructed");
  EXPECT_EQ(run_quiet("solve", config("solve_obstructed.json"), {}, dir), 3);
  const auto j = nlohmann::json::parse(slurp(dir / "solve.json"));
  EXPECT_EQ(j["summary"]["exit_code"], 3);
}

TEST(Run, BadInputsExitTwo) {
  const auto dir = scratch("bad");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.json") << R"({"KK": 1})";
  EXPECT_EQ(run_quiet("bubble", (dir / "bad.json").string(), {}, dir), 2);
  EXPECT_EQ(run_quiet("frobnicate", "", {}, dir), 2);
  CliFlags f;
  f.p = Point(0.3, 0.0);
  EXPECT_EQ(run_quiet("sequence", config("sequence.json"), f, dir), 2);
}

TEST(Run, ReportsAreDeterministic) {
  const auto a = scratch("det-a"), b = scratch("det-b");
  for (const auto& d : {a, b}) ASSERT_EQ(run_quiet("identities", config("identities.json"), {}, d), 0);
  EXPECT_EQ(slurp(a / "identities.json"), slurp(b / "identities.json"));
  EXPECT_EQ(slurp(a / "identities.csv"), slurp(b / "identities.csv"));
}

TEST(Executable, ExitCodes) {
  const std::string exe = CURVLAB_EXE;
  const auto dir = scratch("exe");
  auto status = [](int s) { return WIFEXITED(s) ? WEXITSTATUS(s) : -1; };
  EXPECT_EQ(status(std::system((exe + " candidates --config " + config("candidates_blowup.json") + " --out " +
                                dir.string() + " > /dev/null")
                                   .c_str())),
            0);
  EXPECT_TRUE(fs::exists(dir / "candidates.json"));
  EXPECT_EQ(status(std::system((exe + " bubble --a 0.3 > /dev/null 2>&1").c_str())), 2);
  EXPECT_EQ(status(std::system((exe + " nonsense > /dev/null 2>&1").c_str())), 2);
}
