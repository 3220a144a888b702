#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "stefanlab.hpp"

using namespace stefanlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "stefanlab_test_pipeline" / name;
  fs::remove_all(p);
  return p;
}

std::string field_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

} // namespace

TEST(Config, CanonicalTextRoundTripsForEveryPreset) {
  for (const auto& name : preset_names()) {
    const RunConfig c = preset_config(name).resolved();
    const std::string text = to_ini(c);
    EXPECT_EQ(to_ini(parse_config(text)), text) << name;
  }
}

TEST(Config, UnknownKeysAndSectionsAreRejected) {
  EXPECT_EQ(field_of("[equation]\nq = 2\n"), "equation.q");
  EXPECT_EQ(field_of("[plot]\ncolour = red\n"), "plot");
  EXPECT_EQ(field_of("stray = 1\n"), "stray");
}

TEST(Config, MissingExponentNamesTheField) {
  EXPECT_EQ(field_of("[grid]\nnodes = 32\n[time]\nt_end = 0.1\ndt = 0.01\n"), "equation.p");
  EXPECT_EQ(field_of("[grid]\nnodes = 32\n[equation]\np = 2\n[time]\nt_end = 0.1\n"), "time.dt");
}

TEST(Config, BadValuesAreConfigErrors) {
  EXPECT_EQ(field_of("[run]\npreset = stefan-1d-p2-twophase\n[equation]\np = two\n"), "equation.p");
  EXPECT_EQ(field_of("[run]\npreset = nope\n"), "run.preset");
  EXPECT_EQ(field_of("[run]\npreset = constant\nchecks = caccioppoli, sorcery\n"), "run.checks");
  EXPECT_THROW(parse_config("[run]\npreset = constant\n[equation]\np = 1.5\n").validate(), ConfigError);
}

TEST(Config, PresetOverridesApply) {
  const RunConfig c = parse_config("[run]\npreset = stefan-1d-p3-twophase\nchecks = none\n[grid]\nnodes = 64\n");
  EXPECT_EQ(c.scenario.grid.nodes[0], 64);
  EXPECT_EQ(c.scenario.p, 3.0);
  EXPECT_TRUE(c.checks.empty());
}

TEST(Pipeline, ConstantPresetPassesEveryCheck) {
  const RunResult r = execute(preset_config("constant"));
  EXPECT_EQ(r.status, exit_ok);
  for (const auto& o : r.outcomes) EXPECT_NE(o.status, "FAIL") << o.name;
  const json s = write_artifacts(r, scratch("constant"));
  for (const auto& c : s["checks"]) EXPECT_FALSE(c["anchor"].get<std::string>().empty());
  for (const char* f : {"resolved.ini", "trajectory.f64", "trajectory.json", "reports.jsonl", "oscillation.csv",
                        "ledger.json"})
    EXPECT_TRUE(s["files"].contains(f)) << f;
}

TEST(Pipeline, RerunIsByteIdentical) {
  const RunConfig c = preset_config("stefan-1d-p3-twophase");
  const fs::path da = scratch("rerun_a");
  const fs::path db = scratch("rerun_b");
  const json a = write_artifacts(execute(c), da);
  const json b = write_artifacts(execute(c), db);
  EXPECT_EQ(a.dump(), b.dump());
  EXPECT_EQ(read_file(da / "summary.json"), read_file(db / "summary.json"));
}

TEST(Pipeline, ResolvedConfigReproducesTheRun) {
  const RunResult first = execute(preset_config("onephase-1d-p3-bump"));
  const RunResult again = execute(parse_config(to_ini(first.config)));
  EXPECT_EQ(first.trajectory.scenario_hash, again.trajectory.scenario_hash);
  EXPECT_EQ(trajectory_bytes(first.trajectory), trajectory_bytes(again.trajectory));
}

TEST(Pipeline, SnapshotReadsBack) {
  const RunResult r = execute(preset_config("constant"));
  const fs::path dir = scratch("snapshot");
  write_artifacts(r, dir);
  const auto levels = read_snapshot(dir / "trajectory.f64", r.trajectory.grid().size());
  EXPECT_EQ(levels, r.trajectory.u);
  const json side = json::parse(read_file(dir / "trajectory.json"));
  EXPECT_EQ(side["sha256"], sha256_hex(read_file(dir / "trajectory.f64")));
  EXPECT_EQ(side["times"].size(), r.trajectory.levels());
}

TEST(Pipeline, HashMatchesKnownDigest) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Sweep, EmptyAxisMatchesRun) {
  RunConfig c = preset_config("stefan-1d-p2-twophase");
  const fs::path dir = scratch("sweep_empty");
  const SweepResult s = run_sweep(c, {}, dir);
  const json single = write_artifacts(execute(c), scratch("sweep_single"));
  const json from_sweep = json::parse(read_file(dir / "run_000" / "summary.json"));
  EXPECT_EQ(single.dump(), from_sweep.dump());
  EXPECT_EQ(s.status, single["status"].get<int>());
}

TEST(Sweep, ResolutionAxisFillsStabilityColumns) {
  RunConfig c = preset_config("stefan-1d-p3-twophase");
  c.checks = {"caccioppoli", "modulus"};
  const SweepResult s = run_sweep(c, {parse_axis("resolution=64,128")}, scratch("sweep_res"));
  std::istringstream in(s.csv);
  std::string line;
  std::getline(in, line);
  int refined = 0;
  while (std::getline(in, line))
    if (line.find(",128,") != std::string::npos) {
      ++refined;
      EXPECT_TRUE(line.size() > 4 && (line.ends_with(",yes") || line.ends_with(",no"))) << line;
    }
  EXPECT_EQ(refined, 2);
}

TEST(Sweep, EpsAxisFeedsTheStudy) {
  RunConfig c = preset_config("stefan-1d-p2-twophase");
  c.checks = {"modulus"};
  const SweepResult s = run_sweep(c, {parse_axis("eps=0.2,0.1,0.05")}, scratch("sweep_eps"));
  ASSERT_EQ(s.eps_studies.size(), 1u);
  EXPECT_TRUE(s.eps_studies[0].contains("study"));
  EXPECT_TRUE(s.eps_studies[0]["study"]["gaps_decreasing"].get<bool>());
}

TEST(Sweep, AxisParsing) {
  EXPECT_THROW(parse_axis("p"), ConfigError);
  EXPECT_THROW(parse_axis("colour=red"), ConfigError);
  EXPECT_THROW(parse_axis("eps="), ConfigError);
  const auto a = parse_axis("preset=constant,jump-free-1d-p2");
  EXPECT_EQ(a.values.size(), 2u);
}
