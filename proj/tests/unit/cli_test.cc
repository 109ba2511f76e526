// Copyright 2026 The PSAC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "psac/cli.h"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace psac {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result Invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "psac");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

fs::path Scratch(const std::string& name) {
  const char* tmp = std::getenv("PSAC_TEST_TMP");
  const fs::path dir = fs::path(tmp ? tmp : fs::temp_directory_path().string()) / "cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(CliTest, ExitCodes) {
  EXPECT_EQ(Invoke({}).code, kExitUsage);
  EXPECT_EQ(Invoke({"--help"}).code, kExitOk);
  EXPECT_EQ(Invoke({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(Invoke({"train", "--no-such-flag"}).code, kExitUsage);
  const Result no_data = Invoke({"train"});
  EXPECT_EQ(no_data.code, kExitUsage);
  EXPECT_NE(no_data.err.find("--data"), std::string::npos);
  EXPECT_EQ(Invoke({"calibrate"}).code, kExitUsage);  // --q is required
  EXPECT_EQ(Invoke({"train", "--data", "synthetic:separable_nd", "--method", "adaptive",
                 "--out", Scratch("bad_method").string()})
                .code,
            kExitUsage);
  EXPECT_EQ(Invoke({"train", "--data", "csv:/nonexistent/file.csv", "--out",
                 Scratch("missing").string()})
                .code,
            kExitRuntime);
}

TEST(CliTest, CalibratePrintsJson) {
  const Result r = Invoke({"calibrate", "--q", "0.004266666666666667", "--steps", "2346",
                        "--epsilon", "3", "--delta", "1e-5"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["sigma"].get<double>(), 0.79374340595430397, 1e-3 * 0.7937);
  EXPECT_LE(j["realized_epsilon"].get<double>(), 3.0);
  EXPECT_EQ(j["steps"].get<int>(), 2346);
}

TEST(CliTest, TheoryVerifies) {
  const Result r = Invoke({"theory", "--verify", "all", "--trials", "20000"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j.contains("nonvanishing_bound"));
  const Result plain = Invoke({"theory", "--tau1", "0", "--r", "1", "--tau0", "1"});
  ASSERT_EQ(plain.code, kExitOk) << plain.err;
  EXPECT_NEAR(nlohmann::json::parse(plain.out)["n_const"].get<double>(), 3.0 / 7.0, 1e-15);
}

// Runs `args` twice into separate directories and compares every file.
void ExpectReproducible(const std::string& name, std::vector<std::string> args,
                        const std::vector<std::string>& files) {
  const fs::path a = Scratch(name + "_a");
  const fs::path b = Scratch(name + "_b");
  auto with_out = [&](const fs::path& dir) {
    auto v = args;
    v.push_back("--out");
    v.push_back(dir.string());
    return v;
  };
  const Result ra = Invoke(with_out(a));
  ASSERT_EQ(ra.code, kExitOk) << ra.err;
  ASSERT_EQ(Invoke(with_out(b)).code, kExitOk);
  for (const auto& f : files) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(Slurp(a / f), Slurp(b / f)) << f;
  }

  // Rerunning from the first output file alone reproduces it.
  const fs::path c = Scratch(name + "_c");
  const Result rc =
      Invoke({args[0], "--config", (a / files[0]).string(), "--out", c.string()});
  ASSERT_EQ(rc.code, kExitOk) << rc.err;
  EXPECT_EQ(Slurp(a / files[0]), Slurp(c / files[0]));
}

TEST(CliTest, TrainIsReproducible) {
  ExpectReproducible("train",
                     {"train", "--data", "synthetic:separable_nd", "--steps", "40",
                      "--eval-every", "10", "--seed", "3"},
                     {"train.jsonl"});
}

TEST(CliTest, TrainWritesExpectedRecords) {
  const fs::path dir = Scratch("records");
  const Result r = Invoke({"train", "--data", "synthetic:separable_nd", "--steps", "20",
                        "--out", dir.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::ifstream in(dir / "train.jsonl");
  std::string line;
  std::vector<nlohmann::json> records;
  while (std::getline(in, line)) records.push_back(nlohmann::json::parse(line));
  ASSERT_GE(records.size(), 22u);
  EXPECT_EQ(records.front()["type"], "config");
  EXPECT_EQ(records.back()["type"], "summary");
  EXPECT_LE(records.back()["realized_epsilon"].get<double>(), 3.0);
  EXPECT_EQ(nlohmann::json::parse(r.out)["type"], "summary");
}

TEST(CliTest, OutputDirectoryFromEnvironment) {
  const fs::path dir = Scratch("env");
  ::setenv("PSAC_OUTPUT_DIR", dir.string().c_str(), 1);
  const Result r = Invoke({"lazy-region", "--n", "100", "--theta-points", "5"});
  ::unsetenv("PSAC_OUTPUT_DIR");
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(dir / "lazy_region.csv"));
}

TEST(CliTest, SweepIsReproducible) {
  ExpectReproducible("sweep",
                     {"sweep", "--data", "synthetic:separable_nd", "--steps", "10",
                      "--lr-grid", "0.1,1", "--param-grid", "0.01,0.1", "--seeds", "0,1"},
                     {"sweep.csv", "sweep.json"});
}

TEST(CliTest, LazyRegionIsReproducible) {
  ExpectReproducible("lazy", {"lazy-region", "--n", "500", "--theta-points", "11"},
                     {"lazy_region.csv", "lazy_region.json"});
}

TEST(CliTest, DiagnoseIsReproducible) {
  ExpectReproducible("diagnose",
                     {"diagnose", "--data", "synthetic:separable_nd", "--steps", "30",
                      "--runs", "2", "--every-k", "5"},
                     {"cosine_profile.csv", "cosine_histogram.csv", "weight_curve.csv",
                      "diagnose.json"});
}

TEST(CliTest, TimingIsOptIn) {
  const fs::path plain = Scratch("timing_off");
  const fs::path timed = Scratch("timing_on");
  ASSERT_EQ(Invoke({"lazy-region", "--n", "50", "--out", plain.string()}).code, kExitOk);
  ASSERT_EQ(Invoke({"lazy-region", "--n", "50", "--timing", "--out", timed.string()}).code,
            kExitOk);
  EXPECT_FALSE(nlohmann::json::parse(Slurp(plain / "lazy_region.json"))
                   .contains("wall_time_seconds"));
  EXPECT_TRUE(nlohmann::json::parse(Slurp(timed / "lazy_region.json"))
                  .contains("wall_time_seconds"));
}

}  // namespace
}  // namespace psac
