#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "commands.hpp"
#include "config.hpp"

namespace fs = std::filesystem;
using namespace raytomo;
using namespace raytomo::cli;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::path(testing::TempDir()) / ("raytomo_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

// Runs the installed executable; stdout and stderr go to files in `dir`.
int run_cli(const std::string& args, const fs::path& dir) {
  const std::string cmd = std::string("\"") + RAYTOMO_CLI_EXE + "\" " + args + " > \"" +
                          (dir / "stdout.txt").string() + "\" 2> \"" + (dir / "stderr.txt").string() + "\"";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::size_t line_count(const fs::path& p) {
  std::ifstream is(p);
  std::size_t n = 0;
  for (std::string line; std::getline(is, line);) ++n;
  return n;
}

const char* kSmallSynth = R"({
  "phantom": {"type": "blobs", "c0": 1500, "blobs": [{"center": [0.02, 0.0], "radius": 0.02, "amplitude": 30}]},
  "array": {"emitters": 8, "receivers": 8, "radius": 0.1},
  "grid": {"nodes": 32, "margin": 0.01},
  "noise_sigma": 1e-8
})";

}  // namespace

TEST(CliConfig, EmptyConfigUsesDefaults) {
  const RunConfig rc = parse_config("validate-fisheye", "{}", {});
  const auto& v = std::get<ValidateRun>(rc.config);
  EXPECT_EQ(v.dims.size(), 2u);
  EXPECT_EQ(v.algorithms.size(), 4u);
  EXPECT_EQ(v.ratios, kDefaultSweepRatios);
  EXPECT_EQ(rc.common.out, fs::path("out"));
}

TEST(CliConfig, UnknownKeysAreRejectedAtEveryLevel) {
  EXPECT_THROW(parse_config("trace", R"({"speed": 3})", {}), ConfigError);
  EXPECT_THROW(parse_config("link", R"({"array": {"radius": 0.1, "rings": 2}})", {}), ConfigError);
  EXPECT_THROW(parse_config("link", R"({"link": {"tol": 1}})", {}), ConfigError);
  EXPECT_THROW(parse_config("synth", R"({"phantom": {"type": "blobs", "blobs": [{"sigma": 1}]}})", {}),
               ConfigError);
  // keys of another command are unknown too
  EXPECT_THROW(parse_config("validate-fisheye", R"({"phantom": {"type": "fisheye"}})", {}), ConfigError);
  try {
    parse_config("link", R"({"array": {"rings": 2}})", {});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("rings"), std::string::npos);
  }
}

TEST(CliConfig, TypeAndRangeErrors) {
  EXPECT_THROW(parse_config("trace", R"({"ds": "big"})", {}), ConfigError);
  EXPECT_THROW(parse_config("trace", R"({"dim": 4})", {}), ConfigError);
  EXPECT_THROW(parse_config("validate-fisheye", R"({"ratios": [1, -1]})", {}), ConfigError);
  EXPECT_THROW(parse_config("validate-fisheye", R"({"algorithms": ["euler"]})", {}), ConfigError);
  EXPECT_THROW(parse_config("link", R"({"pair": [0, 0]})", {}), ConfigError);
  EXPECT_THROW(parse_config("link", R"({"pair": [0, 99]})", {}), ConfigError);
  EXPECT_THROW(parse_config("link", R"({"threads": -1})", {}), ConfigError);
  EXPECT_THROW(parse_config("synth", R"({"phantom": {"type": "fisheye"}})", {}), ConfigError);
  EXPECT_THROW(parse_config("trace", R"({"start": [9, 9]})", {}), ConfigError);
  EXPECT_THROW(parse_config("trace", "{not json", {}), ConfigError);
  EXPECT_THROW(parse_config("link", R"({"dim": 3, "array": {"layout": "ring"}})", {}), ConfigError);
}

TEST(CliConfig, InputFilesAreCheckedBeforeCompute) {
  EXPECT_THROW(parse_config("reconstruct", "{}", {}), ConfigError);
  EXPECT_THROW(parse_config("reconstruct", R"({"tof": "/nonexistent/tof.csv"})", {}), ConfigError);
  EXPECT_THROW(parse_config("trace", R"({"field_file": "/nonexistent/f.rtf"})", {}), ConfigError);
}

TEST(CliConfig, FlagsOverrideFileValues) {
  FlagOverrides flags;
  flags.out = "elsewhere";
  flags.seed = 9;
  flags.threads = 2;
  const RunConfig rc = parse_config("synth", R"({"out": "here", "seed": 1, "threads": 4})", flags);
  EXPECT_EQ(rc.common.out, fs::path("elsewhere"));
  EXPECT_EQ(rc.common.seed, 9u);
  EXPECT_EQ(rc.common.threads, 2u);
  EXPECT_EQ(std::get<SynthRun>(rc.config).link.threads, 2u);
}

TEST(CliConfig, GridForms) {
  const auto explicit_grid = std::get<TraceRun>(
      parse_config("trace", R"({"phantom": {"type": "homogeneous"}, "start": [0.1, 0.1],
                                "grid": {"origin": [0, 0], "spacing": 0.1, "counts": [5, 6]}})", {}).config);
  EXPECT_EQ(explicit_grid.grid->counts[0], 5);
  EXPECT_EQ(explicit_grid.grid->counts[1], 6);
  EXPECT_DOUBLE_EQ(explicit_grid.grid->spacing, 0.1);

  const auto nodes = std::get<LinkRun>(parse_config("link", R"({"grid": {"nodes": 40, "margin": 0.0}})", {}).config);
  EXPECT_EQ(nodes.grid->counts[0], 40);
  EXPECT_EQ(nodes.grid->counts[1], 40);

  EXPECT_THROW(parse_config("trace", R"({"phantom": {"type": "homogeneous"}})", {}), ConfigError);
}

TEST(CliConfig, ExampleConfigsParse) {
  for (const char* name : {"validate-fisheye", "trace", "link", "synth", "greens"}) {
    const fs::path p = fs::path(RAYTOMO_CONFIG_DIR) / (std::string(name) + ".json");
    EXPECT_NO_THROW(load_config(name, p, {})) << p;
  }
  // the reconstruct example reads the synth example's output
  const fs::path dir = scratch("example_reconstruct");
  write(dir / "tof.csv", "emitter_id,receiver_id,tof_s\n0,1,1e-5\n");
  std::string text = slurp(fs::path(RAYTOMO_CONFIG_DIR) / "reconstruct.json");
  const std::string from = "runs/synth/tof.csv";
  text.replace(text.find(from), from.size(), (dir / "tof.csv").string());
  EXPECT_NO_THROW(parse_config("reconstruct", text, {}));
}

TEST(CliRun, MissingConfigNamesThePath) {
  const fs::path dir = scratch("missing");
  const int code = run_cli("link --config /no/such/config.json", dir);
  EXPECT_NE(code, 0);
  EXPECT_EQ(code, kExitConfig);
  EXPECT_NE(slurp(dir / "stderr.txt").find("/no/such/config.json"), std::string::npos);
}

TEST(CliRun, UnknownSubcommandFails) {
  const fs::path dir = scratch("unknown");
  EXPECT_NE(run_cli("frobnicate", dir), 0);
  EXPECT_NE(run_cli("", dir), 0);
}

TEST(CliRun, FisheyeMetricsHaveOneRowPerCombination) {
  const fs::path dir = scratch("validate");
  write(dir / "cfg.json", R"({"dims": [2], "experiments": ["radius", "length"],
                              "algorithms": ["rk2", "dual-update"], "ratios": [2, 1, 0.5]})");
  ASSERT_EQ(run_cli("validate-fisheye --config " + (dir / "cfg.json").string() + " --out " + (dir / "o").string(), dir),
            0)
      << slurp(dir / "stderr.txt");
  EXPECT_EQ(line_count(dir / "o" / "metrics.csv"), 1u + 2 * 2 * 3);
}

TEST(CliRun, SameSeedGivesIdenticalTables) {
  const fs::path dir = scratch("seed");
  write(dir / "cfg.json", kSmallSynth);
  const std::string base = "synth --config " + (dir / "cfg.json").string();
  ASSERT_EQ(run_cli(base + " --seed 5 --out " + (dir / "a").string(), dir), 0) << slurp(dir / "stderr.txt");
  ASSERT_EQ(run_cli(base + " --seed 5 --threads 1 --out " + (dir / "b").string(), dir), 0);
  ASSERT_EQ(run_cli(base + " --seed 6 --out " + (dir / "c").string(), dir), 0);
  const std::string a = slurp(dir / "a" / "tof.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(dir / "b" / "tof.csv"));
  EXPECT_EQ(slurp(dir / "a" / "links.csv"), slurp(dir / "b" / "links.csv"));
  EXPECT_EQ(slurp(dir / "a" / "true_speed.rtf"), slurp(dir / "b" / "true_speed.rtf"));
  EXPECT_NE(a, slurp(dir / "c" / "tof.csv"));
}

TEST(CliRun, SynthThenReconstruct) {
  const fs::path dir = scratch("chain");
  write(dir / "synth.json", kSmallSynth);
  ASSERT_EQ(run_cli("synth --config " + (dir / "synth.json").string() + " --out " + (dir / "s").string(), dir), 0);
  write(dir / "recon.json", R"({"array": {"emitters": 8, "receivers": 8, "radius": 0.1},
                                "grid": {"nodes": 32, "margin": 0.01},
                                "tof": ")" + (dir / "s" / "tof.csv").string() + R"(",
                                "inversion": {"outer_iterations": 2}})");
  ASSERT_EQ(run_cli("reconstruct --config " + (dir / "recon.json").string() + " --out " + (dir / "r").string(), dir),
            0)
      << slurp(dir / "stderr.txt");
  EXPECT_EQ(line_count(dir / "r" / "run_log.csv"), 1u + 3);
  EXPECT_TRUE(fs::exists(dir / "r" / "fields" / "speed_002.rtf"));
  EXPECT_EQ(line_count(dir / "r" / "speed.csv"), 1u + 32 * 32);
}

TEST(CliRun, TraceAndGreensWriteTheirFiles) {
  const fs::path dir = scratch("trace");
  ASSERT_EQ(run_cli("trace --out " + (dir / "t").string(), dir), 0);
  EXPECT_NE(slurp(dir / "stdout.txt").find("closed-loop"), std::string::npos);
  EXPECT_GT(line_count(dir / "t" / "trajectory.csv"), 100u);

  write(dir / "g.json", R"({"array": {"emitters": 8, "receivers": 8, "radius": 0.5}, "pairs": [[0, 4], [1, 2]]})");
  ASSERT_EQ(run_cli("greens --config " + (dir / "g.json").string() + " --out " + (dir / "g").string(), dir), 0)
      << slurp(dir / "stderr.txt");
  EXPECT_TRUE(fs::exists(dir / "g" / "greens" / "e000_r004.csv"));
  EXPECT_TRUE(fs::exists(dir / "g" / "greens" / "e001_r002_reverse.csv"));
}

TEST(CliRun, PartialFailureListsPairs) {
  // a one-step budget cannot reach any receiver
  const fs::path dir = scratch("partial");
  write(dir / "cfg.json", R"({"phantom": {"type": "blobs", "blobs": [{"center": [0, 0], "radius": 0.03,
                                                                       "amplitude": 60}]},
                              "array": {"emitters": 4, "receivers": 4, "radius": 0.1},
                              "grid": {"nodes": 32, "margin": 0.01},
                              "link": {"max_iterations": 1, "tolerance": 1e-12}})");
  EXPECT_EQ(run_cli("link --config " + (dir / "cfg.json").string() + " --out " + (dir / "o").string(), dir),
            kExitPartial);
  EXPECT_NE(slurp(dir / "stderr.txt").find("unlinked pair"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "o" / "links.csv"));
}
