#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "raytomo/geometry.hpp"
#include "raytomo/interp.hpp"
#include "raytomo/linker.hpp"
#include "raytomo/phantom.hpp"
#include "raytomo/tof.hpp"
#include "raytomo/tracer.hpp"
#include "raytomo/validate.hpp"

namespace raytomo::cli {

/// Bad configuration: unknown keys, wrong types, missing inputs. Reported
/// before any computation starts.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Values that may come from the config file and be overridden by flags.
struct CommonOptions {
  std::filesystem::path out = "out";
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0: all cores
};

struct FlagOverrides {
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

/// The field rays are traced through. Phantoms and sound-speed files are
/// converted to slowness with unit reference speed; refractive-index
/// fields keep their values and use `reference_speed`.
struct FieldSource {
  int dim = 2;
  std::optional<PhantomSpec> phantom;
  std::filesystem::path file;  // binary field file, used when no phantom is set
  double reference_speed = 1.0;
};

struct ValidateRun {
  std::vector<int> dims{2, 3};
  std::vector<FisheyeExperiment> experiments{FisheyeExperiment::Radius, FisheyeExperiment::Length};
  std::vector<StepAlgorithm> algorithms{std::begin(kAllAlgorithms), std::end(kAllAlgorithms)};
  std::vector<double> ratios = kDefaultSweepRatios;
  double a = 1.0;
  double n0 = 1.0;
  std::optional<double> trajectory_ratio;  // dump every ray traced at this ratio
  std::size_t thin = 1;
};

struct TraceRun {
  FieldSource field;
  std::optional<GridSpec> grid;  // from the field file when absent
  Backend backend = Backend::BSpline;
  StepAlgorithm algorithm = StepAlgorithm::RungeKutta2;
  double ds = 0.0;  // 0: one grid spacing
  Vec3 start = Vec3::Zero();
  Vec3 direction = Vec3::UnitX();
  StopCondition stop;
  std::optional<Vec3> center;  // also write distances from this point
  std::size_t thin = 1;
};

struct LinkRun {
  FieldSource field;
  ArrayGeometry array;
  std::optional<GridSpec> grid;
  Backend backend = Backend::BSpline;
  LinkConfig link;
  std::optional<std::pair<std::size_t, std::size_t>> pair;  // one pair instead of the full table
  bool trajectories = false;
  std::size_t thin = 1;
};

struct SynthRun {
  PhantomSpec phantom;
  ArrayGeometry array;
  GridSpec grid;
  Backend backend = Backend::Bilinear;
  LinkConfig link;
  double noise_sigma = 0.0;  // seconds
};

struct ReconstructRun {
  ArrayGeometry array;
  GridSpec grid;
  std::filesystem::path tof;
  std::optional<PhantomSpec> truth;
  InversionConfig inversion;
  bool save_fields = true;
};

struct GreensRun {
  FieldSource field;
  ArrayGeometry array;
  std::optional<GridSpec> grid;
  LinkConfig link;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  double omega = 0.0;
  double y = 1.0;
  double s_ref = 0.0;  // 0: one grid spacing
  std::optional<double> alpha0;  // uniform absorption coefficient
  bool reverse = true;
};

using CommandConfig = std::variant<ValidateRun, TraceRun, LinkRun, SynthRun, ReconstructRun, GreensRun>;

struct RunConfig {
  std::string command;
  CommonOptions common;
  CommandConfig config;
};

inline constexpr std::string_view kCommands[] = {"validate-fisheye", "trace", "link",
                                                 "synth", "reconstruct", "greens"};

/// Parses a JSON document for `command`. Every object rejects keys it does
/// not know; flags override the top-level out/seed/threads values. Input
/// files named by the config must exist. Throws ConfigError.
RunConfig parse_config(std::string_view command, std::string_view json_text, const FlagOverrides& flags);

/// Reads `path` (or uses an empty object when no path is given) and
/// parses it. A missing file is a ConfigError naming the path.
RunConfig load_config(std::string_view command, const std::optional<std::filesystem::path>& path,
                      const FlagOverrides& flags);

}  // namespace raytomo::cli
