#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "cli/app.hpp"
#include "cli/manifest.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = mnrv::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("mnrv_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string path(const std::string& name) const { return (dir / name).string(); }

  void simulate(const std::string& sub = "sim", std::uint64_t seed = 3) {
    fs::create_directories(dir / sub);
    auto r = call({"--out-dir", path(sub), "simulate", "--seed", std::to_string(seed), "--days", "40", "--m", "96",
                   "--sub-steps", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
  }

  static json read_json(const fs::path& p) {
    std::ifstream in(p);
    return json::parse(in);
  }

  fs::path dir;
};

}  // namespace

TEST_F(CliTest, VersionAndHelpExitZero) {
  auto v = call({"--version"});
  EXPECT_EQ(v.code, 0);
  EXPECT_NE(v.out.find("0.3.0"), std::string::npos);
  EXPECT_EQ(call({"--help"}).code, 0);
  EXPECT_EQ(call({"fit", "--help"}).code, 0);
}

TEST_F(CliTest, UsageErrorsExitTwoWithJsonError) {
  auto r = call({"simulate", "--bogus"});
  EXPECT_EQ(r.code, 2);
  auto e = json::parse(r.err.substr(r.err.find('{')));
  EXPECT_TRUE(e["error"].contains("kind"));
  EXPECT_TRUE(e["error"].contains("message"));

  unsetenv("MNRV_SEED");
  EXPECT_EQ(call({"--out-dir", path(""), "simulate", "--days", "5", "--m", "12"}).code, 2);
  EXPECT_EQ(call({"fit", "--data", path("panel.csv")}).code, 2);
}

TEST_F(CliTest, RuntimeErrorsExitOne) {
  auto r = call({"--out-dir", path(""), "measures", "--data", path("missing.csv"), "--kind", "rv"});
  EXPECT_EQ(r.code, 1);
  auto e = json::parse(r.err.substr(r.err.find('{')));
  EXPECT_EQ(e["error"]["kind"], "io");
}

TEST_F(CliTest, SimulateIsReproducibleAndWritesManifest) {
  simulate("a", 11);
  simulate("b", 11);
  simulate("c", 12);
  auto ma = read_json(dir / "a" / "manifest_simulate.json");
  auto mb = read_json(dir / "b" / "manifest_simulate.json");
  auto mc = read_json(dir / "c" / "manifest_simulate.json");
  EXPECT_EQ(ma["outputs"], mb["outputs"]);
  EXPECT_NE(ma["outputs"], mc["outputs"]);
  EXPECT_EQ(ma["seed"], 11);
  EXPECT_EQ(ma["subcommand"], "simulate");
  for (const auto& o : ma["outputs"]) {
    fs::path p = dir / "a" / o["path"].get<std::string>();
    ASSERT_TRUE(fs::exists(p));
    EXPECT_EQ(o["sha256"], mnrv::cli::sha256_file(p));
    EXPECT_EQ(o["bytes"], fs::file_size(p));
  }
}

TEST_F(CliTest, SeedFallsBackToEnvironment) {
  setenv("MNRV_SEED", "17", 1);
  auto r = call({"--out-dir", path(""), "simulate", "--days", "5", "--m", "12", "--sub-steps", "1"});
  unsetenv("MNRV_SEED");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_json(dir / "manifest_simulate.json")["seed"], 17);
}

TEST_F(CliTest, ConfigFileAndPrecedence) {
  {
    std::ofstream c(path("cfg.json"));
    c << R"({"seed": 5, "simulate": {"days": 6, "m": 12, "sub-steps": 1}})";
  }
  auto r = call({"--config", path("cfg.json"), "--out-dir", path(""), "simulate", "--days", "7"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto m = read_json(dir / "manifest_simulate.json");
  EXPECT_EQ(m["seed"], 5);
  auto sidecar = read_json(dir / "panel.json");
  EXPECT_EQ(sidecar["n_days"], 7);
  EXPECT_EQ(sidecar["m"], 12);

  {
    std::ofstream c(path("bad.json"));
    c << R"({"simulate": {"dayz": 6}})";
  }
  auto bad = call({"--config", path("bad.json"), "simulate", "--seed", "1"});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("dayz"), std::string::npos);
}

TEST_F(CliTest, PrintSchemaAndConfig) {
  auto s = call({"--print-schema"});
  ASSERT_EQ(s.code, 0);
  auto schema = json::parse(s.out);
  EXPECT_EQ(schema["type"], "object");
  EXPECT_TRUE(schema["properties"].contains("simulate"));
  EXPECT_EQ(schema["additionalProperties"], false);
  auto c = call({"--print-config", "simulate", "--seed", "4", "--days", "9"});
  ASSERT_EQ(c.code, 0);
  auto cfg = json::parse(c.out);
  EXPECT_EQ(cfg["simulate"]["days"], "9");
}

TEST_F(CliTest, PipelineFromSimulationToReport) {
  simulate();
  const std::string data = path("sim/panel.csv");
  ASSERT_EQ(call({"--out-dir", path("sim"), "measures", "--data", data, "--kind", "rk"}).code, 0);
  ASSERT_EQ(call({"--out-dir", path("sim"), "identify", "--data", data}).code, 0);
  auto id = read_json(dir / "sim" / "identify.json");
  EXPECT_TRUE(id.contains("omega0_forms"));
  ASSERT_EQ(call({"--out-dir", path("sim"), "fit", "--data", data, "--model", "zerof"}).code, 0);
  auto fit = read_json(dir / "sim" / "fit_zerof.json");
  EXPECT_TRUE(fit.contains("next_iv"));
  auto ev = call({"--out-dir", path("sim"), "evaluate", "--data", data, "--models", "zerof,nw"});
  ASSERT_EQ(ev.code, 0) << ev.err;
  auto e = read_json(dir / "sim" / "evaluate.json");
  EXPECT_EQ(e["kind"], "in-sample");
  EXPECT_EQ(e["columns"].size(), 4u);
  ASSERT_EQ(call({"--out-dir", path("sim"), "rolling", "--data", data, "--models", "nw", "--window", "30",
                  "--horizon", "3"})
                .code,
            0);
  auto rep = call({"--out-dir", path("sim"), "report", "--input", path("sim/evaluate.json")});
  ASSERT_EQ(rep.code, 0) << rep.err;
  std::ifstream md(dir / "sim" / "report.md");
  std::string text((std::istreambuf_iterator<char>(md)), {});
  EXPECT_NE(text.find("zero-f(1)"), std::string::npos);
  EXPECT_NE(text.find("MSE"), std::string::npos);
  ASSERT_EQ(call({"--out-dir", path("sim"), "signature-plot", "--data", data, "--freqs", "12,48,96"}).code, 0);
  EXPECT_TRUE(fs::exists(dir / "sim" / "signature.svg"));
  ASSERT_EQ(call({"--out-dir", path("sim"), "diagnose-moments", "--m", "96"}).code, 0);
  EXPECT_TRUE(fs::exists(dir / "sim" / "moments.csv"));
}

TEST_F(CliTest, JobsDoNotChangeOutputs) {
  simulate();
  const std::string data = path("sim/panel.csv");
  fs::create_directories(dir / "j1");
  fs::create_directories(dir / "j3");
  ASSERT_EQ(call({"--out-dir", path("j1"), "--jobs", "1", "evaluate", "--data", data, "--models", "nw"}).code, 0);
  ASSERT_EQ(call({"--out-dir", path("j3"), "--jobs", "3", "evaluate", "--data", data, "--models", "nw"}).code, 0);
  EXPECT_EQ(read_json(dir / "j1" / "manifest_evaluate.json")["outputs"],
            read_json(dir / "j3" / "manifest_evaluate.json")["outputs"]);
}

TEST_F(CliTest, IngestWritesExclusions) {
  {
    std::ofstream t(path("ticks.csv"));
    t << "timestamp,mid\n";
    for (int d = 0; d < 2; ++d)
      for (int k = d == 0 ? 0 : 1; k <= 96; ++k) {
        if (d == 1 && k == 96) continue;
        int sec = d * 86400 + k * 900;
        char buf[64];
        std::snprintf(buf, sizeof buf, "2024-01-%02dT%02d:%02d:%02dZ", 2 + sec / 86400, sec % 86400 / 3600,
                      sec % 3600 / 60, sec % 60);
        t << buf << "," << 100.0 + (k % 7) * 0.01 + d << "\n";
      }
    t << "2024-01-04T00:00:00Z,100\n";
  }
  auto r = call({"--out-dir", path(""), "ingest", "--input", path("ticks.csv"), "--m", "96"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto ex = read_json(dir / "exclusions.json");
  EXPECT_TRUE(ex.is_object() || ex.is_array());
  EXPECT_TRUE(fs::exists(dir / "panel.csv"));
}
