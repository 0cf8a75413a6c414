// Copyright 2026 The scenesim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>
#include <json.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace
{

namespace fs = std::filesystem;
using nlohmann::json;

struct Result
{
  int code;
  std::string out;
};

Result run(const std::string & args)
{
  const std::string cmd = std::string(SCENESIM_CLI) + " " + args + " 2>&1";
  FILE * pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, ""};
  std::string out;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

fs::path data_path(const std::string & rel) { return fs::path(SCENESIM_DATA_DIR) / rel; }

fs::path scratch_dir(const std::string & name)
{
  const auto dir = fs::temp_directory_path() / ("scenesim_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

json read_json(const fs::path & p)
{
  std::ifstream is(p);
  return json::parse(is);
}

void write_json(const fs::path & p, const json & j) { std::ofstream(p) << j.dump(1); }

std::string slurp(const fs::path & p)
{
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

TEST(Cli, UsageErrorsExitTwo)
{
  EXPECT_EQ(run("gen-corpus --count 2").code, 2);
  EXPECT_EQ(run("no-such-command").code, 2);
  EXPECT_EQ(run("eval --scenario x.json --trajectory y.json --mode sideways").code, 2);
}

TEST(Cli, VersionAndHelp)
{
  EXPECT_EQ(run("--version").code, 0);
  const Result help = run("--help");
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("generate"), std::string::npos);
}

TEST(Cli, GenCorpusIsDeterministic)
{
  const auto a = scratch_dir("corpus_a");
  const auto b = scratch_dir("corpus_b");
  ASSERT_EQ(run("gen-corpus --count 4 --seed 3 --out " + a.string()).code, 0);
  ASSERT_EQ(run("gen-corpus --count 4 --seed 3 --out " + b.string()).code, 0);
  std::size_t files = 0;
  for (const auto & entry : fs::directory_iterator(a)) {
    ++files;
    EXPECT_EQ(slurp(entry.path()), slurp(b / entry.path().filename())) << entry.path();
  }
  EXPECT_GE(files, 4u);
}

TEST(Cli, EvalMatchesGolden)
{
  const auto dir = scratch_dir("eval");
  const Result r = run(
    "eval --scenario " + data_path("scenarios/benign_straight.json").string() + " --trajectory " +
    data_path("trajectories/benign_logged_ego.json").string() + " --out " + (dir / "report.json").string());
  ASSERT_EQ(r.code, 0) << r.out;
  const json got = read_json(dir / "report.json");
  const json golden = read_json(data_path("golden/benign_eval_report.json"));
  EXPECT_DOUBLE_EQ(got.at("epdms").get<double>(), golden.at("epdms").get<double>());
  EXPECT_EQ(got.at("submetrics"), golden.at("submetrics"));
}

TEST(Cli, EvalRearEndScoresZero)
{
  // The lead vehicle stops dead after the history and the replayed ego runs into it.
  json scenario = read_json(data_path("scenarios/benign_straight.json"));
  const std::size_t t_history = scenario.at("t_history");
  for (auto & agent : scenario.at("agents")) {
    if (agent.at("id") != "lead") continue;
    auto & states = agent.at("states");
    for (std::size_t i = t_history; i < states.size(); ++i) {
      states[i] = states[t_history];
      states[i]["v_lon"] = 0.0;
    }
  }
  const auto dir = scratch_dir("eval_crash");
  write_json(dir / "scenario.json", scenario);
  const Result r = run(
    "eval --mode non-reactive --scenario " + (dir / "scenario.json").string() + " --trajectory " +
    data_path("trajectories/benign_logged_ego.json").string() + " --out " + (dir / "report.json").string());
  ASSERT_EQ(r.code, 0) << r.out;
  const json got = read_json(dir / "report.json");
  EXPECT_EQ(got.at("submetrics").at("nc").get<double>(), 0.0);
  EXPECT_EQ(got.at("epdms").get<double>(), 0.0);
}

TEST(Cli, EvalRejectsDtMismatch)
{
  json traj = read_json(data_path("trajectories/benign_logged_ego.json"));
  traj["dt"] = 0.2;
  const auto dir = scratch_dir("eval_dt");
  write_json(dir / "traj.json", traj);
  const Result r = run(
    "eval --scenario " + data_path("scenarios/benign_straight.json").string() + " --trajectory " +
    (dir / "traj.json").string());
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.out.find("dt"), std::string::npos) << r.out;
}

TEST(Cli, FitScaling)
{
  const auto dir = scratch_dir("fit");
  {
    std::ofstream os(dir / "good.csv");
    os << "n,s\n1000,40\n4000,48\n16000,53\n64000,55.5\n";
    std::ofstream bad(dir / "bad.csv");
    bad << "n,s\n1000,forty\n";
  }
  const Result ok = run("fit-scaling --points run=" + (dir / "good.csv").string() + " --out " + (dir / "out").string());
  ASSERT_EQ(ok.code, 0) << ok.out;
  EXPECT_TRUE(fs::exists(dir / "out" / "report.json"));
  const Result bad = run("fit-scaling --points run=" + (dir / "bad.csv").string() + " --out " + (dir / "out2").string());
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.out.find("forty"), std::string::npos) << bad.out;
}

TEST(Cli, GenerateExportsAndStatsReverify)
{
  const auto dir = scratch_dir("generate");
  write_json(dir / "config.json", {{"rounds", 2}, {"vocab", {{"k", 64}, {"maneuvers", {{"count", 512}}}}}});
  ASSERT_EQ(run("gen-corpus --count 3 --seed 5 --out " + (dir / "corpus").string()).code, 0);
  const Result gen = run(
    "generate --corpus " + (dir / "corpus").string() + " --config " + (dir / "config.json").string() + " --out " +
    (dir / "out").string());
  ASSERT_EQ(gen.code, 0) << gen.out;
  EXPECT_TRUE(fs::exists(dir / "out" / "dataset.jsonl"));
  EXPECT_TRUE(fs::exists(dir / "out" / "manifest.json"));
  const Result st = run(
    "stats --dataset " + (dir / "out" / "dataset.jsonl").string() + " --corpus " + (dir / "corpus").string() +
    " --config " + (dir / "config.json").string());
  EXPECT_EQ(st.code, 0) << st.out;
}

}  // namespace
