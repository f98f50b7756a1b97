#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rough/cli/commands.hpp"

using namespace rough;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("roughpath_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write_config(const std::string& name, const nlohmann::json& j) const {
    const auto p = dir_ / name;
    std::ofstream(p) << j.dump();
    return p.string();
  }

  int run(const std::string& args, std::string* err = nullptr) const {
    const auto err_file = dir_ / "stderr.txt";
    const std::string cmd = std::string(ROUGHPATH_EXE) + " " + args + " > " + (dir_ / "stdout.txt").string() + " 2> " +
                            err_file.string();
    const int status = std::system(cmd.c_str());
    if (err) {
      std::ifstream in(err_file);
      std::stringstream ss;
      ss << in.rdbuf();
      *err = ss.str();
    }
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string slurp(const fs::path& p) const {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

nlohmann::json bm_config(int depth, std::size_t count, std::uint64_t seed) {
  return {{"partition", {{"kind", "dyadic"}, {"depth", depth}}},
          {"model", {{"marginal", "mixed"}}},
          {"run", {{"seed", seed}, {"count", count}}}};
}

}  // namespace

TEST(Config, DefaultsAndSections) {
  const auto cfg = cli::parse_config(nlohmann::json::parse(
      R"({"partition": {"kind": "shifted-binary", "depth": 6, "ratio": 3},
          "model": {"H": 0.3, "marginal": "uniform-sqrt3", "mixing": {"odd": "beta22"}},
          "analysis": {"window": [2, 5], "p_grid": [1, 2, 3]}})"));
  EXPECT_EQ(cfg.partition.kind, PartitionKind::shifted_binary);
  EXPECT_EQ(cfg.partition.depth, 6);
  EXPECT_EQ(*cfg.model.H, 0.3);
  EXPECT_EQ(cfg.model.marginal.law_at(1), MarginalLaw::beta22);
  EXPECT_EQ(cfg.model.marginal.law_at(2), MarginalLaw::uniform_sqrt3);
  EXPECT_EQ(*cfg.analysis.window_first, 2);
  EXPECT_EQ(*cfg.analysis.window_last, 5);
  EXPECT_EQ(cfg.run.count, 1u);
}

TEST(Config, ErrorsNameTheField) {
  auto expect_error = [](const char* doc, const std::string& field) {
    try {
      cli::parse_config(nlohmann::json::parse(doc));
      ADD_FAILURE() << "accepted " << doc;
    } catch (const cli::ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
    }
  };
  expect_error(R"({"model": {"H": 1.2}})", "model.H");
  expect_error(R"({"model": {"hurst": 0.3}})", "model.hurst");
  expect_error(R"({"extra": 1})", "extra");
  expect_error(R"({"partition": {"depth": 0}})", "partition.depth");
  expect_error(R"({"partition": {"kind": "triadic"}})", "partition.kind");
  expect_error(R"({"run": {"count": 0}})", "run.count");
  expect_error(R"({"model": {"marginal": "cauchy"}})", "model.marginal");
  expect_error(R"({"analysis": {"p_grid": [2, 1]}})", "analysis.p_grid");
  expect_error(R"({"model": {"H": 0.3, "marginal": "threePoint"}})", "threePoint");
}

TEST_F(CliTest, GenerateIsByteReproducible) {
  const auto cfg = write_config("bm.json", bm_config(15, 1, 7));
  ASSERT_EQ(run("generate --config " + cfg + " --out " + (dir_ / "a").string()), 0);
  ASSERT_EQ(run("generate --config " + cfg + " --out " + (dir_ / "b").string() + " --threads 3"), 0);
  const auto a = slurp(dir_ / "a" / "paths.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(dir_ / "b" / "paths.csv"));
  const auto manifest = nlohmann::json::parse(slurp(dir_ / "a" / "manifest.json"));
  EXPECT_EQ(manifest["tool_version"], std::string(version));
  EXPECT_EQ(manifest["config_hash_fnv1a"].get<std::string>().size(), 16u);
  ASSERT_EQ(run("generate --config " + cfg + " --seed 8 --out " + (dir_ / "c").string()), 0);
  EXPECT_NE(a, slurp(dir_ / "c" / "paths.csv"));
}

TEST_F(CliTest, GenerateFbmRecordsJitter) {
  auto j = bm_config(12, 100, 1);
  j["model"] = {{"H", 0.25}, {"marginal", "standard-normal"}};
  const auto cfg = write_config("fbm.json", j);
  ASSERT_EQ(run("generate --config " + cfg + " --out " + (dir_ / "f").string()), 0);
  const auto manifest = nlohmann::json::parse(slurp(dir_ / "f" / "manifest.json"));
  EXPECT_TRUE(manifest.contains("covariance_jitter"));
  EXPECT_TRUE(manifest["ensemble"].contains("relative_jitter"));
}

TEST_F(CliTest, ExitCodes) {
  std::string err;
  auto j = bm_config(8, 1, 1);
  j["model"]["H"] = 1.2;
  EXPECT_EQ(run("generate --config " + write_config("bad.json", j) + " --out " + (dir_ / "x").string(), &err), 2);
  EXPECT_NE(err.find("model.H"), std::string::npos) << err;
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("generate --out x"), 2);
  auto big = bm_config(14, 1, 1);
  big["model"] = {{"H", 0.3}};
  EXPECT_EQ(run("generate --config " + write_config("big.json", big) + " --out " + (dir_ / "y").string(), &err), 2);
  EXPECT_NE(err.find("partition.depth"), std::string::npos) << err;
  EXPECT_EQ(run("--version"), 0);
}

TEST_F(CliTest, AnalyzeExampleB) {
  nlohmann::json j{{"partition", {{"depth", 16}}}, {"model", {{"example", "b"}}}};
  const auto cfg = write_config("b.json", j);
  ASSERT_EQ(run("generate --config " + cfg + " --out " + (dir_ / "g").string()), 0);
  ASSERT_EQ(run("analyze --config " + cfg + " --paths " + (dir_ / "g" / "paths.csv").string() + " --out " +
                (dir_ / "r").string()),
            0);
  const auto summary = slurp(dir_ / "stdout.txt");
  const auto pos = summary.find("alpha_hat=");
  ASSERT_NE(pos, std::string::npos) << summary;
  const double alpha = std::stod(summary.substr(pos + 10));
  EXPECT_GE(alpha, 0.45);
  EXPECT_LE(alpha, 0.5);
  const auto qpos = summary.find(" qv=");
  EXPECT_NEAR(std::stod(summary.substr(qpos + 4)), 1.0, 0.01);
  for (const char* f : {"holder.csv", "variation.csv", "qv.csv"}) EXPECT_TRUE(fs::exists(dir_ / "r" / f)) << f;

  // a grid from another partition is rejected
  nlohmann::json other{{"partition", {{"depth", 15}}}, {"model", {{"example", "b"}}}};
  EXPECT_EQ(run("analyze --config " + write_config("o.json", other) + " --paths " +
                (dir_ / "g" / "paths.csv").string() + " --out " + (dir_ / "r2").string()),
            2);
}

TEST_F(CliTest, AnalyzeIdentityPath) {
  const auto seq = PartitionSequence::dyadic(1.0, 10);
  {
    std::ofstream out(dir_ / "id.csv");
    const auto pts = seq.level(10).points();
    io::write_row(out, pts);
    io::write_row(out, pts);
  }
  nlohmann::json j{{"partition", {{"depth", 10}}}, {"analysis", {{"levels", {6, 7, 8, 9, 10}}}}};
  ASSERT_EQ(run("analyze --config " + write_config("id.json", j) + " --paths " + (dir_ / "id.csv").string() +
                " --out " + (dir_ / "r").string()),
            0);
  const auto summary = slurp(dir_ / "stdout.txt");
  const auto pos = summary.find("index_hat=");
  ASSERT_NE(pos, std::string::npos) << summary;
  EXPECT_NEAR(std::stod(summary.substr(pos + 10)), 1.0, 0.05);
}

TEST_F(CliTest, NormalityAndCovarianceAndValidate) {
  const auto cfg = write_config("n.json", bm_config(8, 200, 3));
  ASSERT_EQ(run("generate --config " + cfg + " --out " + (dir_ / "g").string()), 0);
  ASSERT_EQ(run("normality --config " + cfg + " --paths " + (dir_ / "g" / "paths.csv").string() + " --out " +
                (dir_ / "table.csv").string()),
            0);
  const auto table = slurp(dir_ / "table.csv");
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 11);

  auto few = bm_config(8, 50, 3);
  const auto few_cfg = write_config("few.json", few);
  ASSERT_EQ(run("generate --config " + few_cfg + " --out " + (dir_ / "h").string()), 0);
  EXPECT_EQ(run("normality --config " + few_cfg + " --paths " + (dir_ / "h" / "paths.csv").string() + " --out " +
                (dir_ / "t2.csv").string()),
            2);

  auto c = bm_config(6, 1, 0);
  c["model"] = {{"H", 0.3}};
  ASSERT_EQ(run("covariance --config " + write_config("c.json", c) + " --out " + (dir_ / "cov").string()), 0);
  const auto side = nlohmann::json::parse(slurp(dir_ / "cov" / "cov.json"));
  EXPECT_EQ(side["dimension"], 63);
  EXPECT_EQ(fs::file_size(dir_ / "cov" / "cov.bin"), 63u * 63u * 8u);

  nlohmann::json v{{"partition", {{"kind", "shifted-binary"}, {"depth", 5}}}};
  ASSERT_EQ(run("validate-partition --config " + write_config("v.json", v) + " --save " +
                (dir_ / "p.json").string()),
            0);
  const auto diag = nlohmann::json::parse(slurp(dir_ / "stdout.txt"));
  EXPECT_NEAR(diag["c_hat"].get<double>(), std::pow(1.5, 5), 1e-9);
  nlohmann::json custom{{"partition", {{"kind", "custom"}, {"file", (dir_ / "p.json").string()}}}};
  EXPECT_EQ(run("validate-partition --config " + write_config("cu.json", custom)), 0);
}
