#pragma once

#include <memory>
#include <string>
#include <vector>

#include "raytomo/phantom.hpp"
#include "raytomo/tracer.hpp"

namespace raytomo {

struct ExperimentSpec {
  int dim = 2;
  FisheyeExperiment experiment = FisheyeExperiment::Radius;
  std::vector<StepAlgorithm> algorithms{StepAlgorithm::RungeKutta2};
  std::vector<double> ratios{1.0};  // ray step / grid spacing
  double a = 1.0;
  double n0 = 1.0;
  unsigned threads = 0;
};

inline const std::vector<double> kDefaultSweepRatios{4.0, 2.0, 1.0, 0.5, 0.25, 0.125};

/// One metric evaluation. `value` is RE_rd or RE_al in percent; failed
/// rays are excluded from the mean and listed by launch index.
struct MetricResult {
  FisheyeExperiment experiment = FisheyeExperiment::Radius;
  StepAlgorithm algorithm = StepAlgorithm::RungeKutta2;
  int dim = 2;
  double ratio = 1.0;
  double value = 0.0;
  std::vector<double> per_ray;  // per-ray deviation in percent, NaN for failures
  std::vector<std::size_t> failed;
  std::size_t ray_count = 0;
};

/// Mean relative deviation of |x_m - center| from `radius` over samples
/// 1..M (the launch sample is excluded), as a fraction.
double radius_deviation(const std::vector<Vec3>& samples, const Vec3& center, double radius);

/// Mean of the signed relative deviations (L - L_true) / L_true, as a
/// fraction.
double length_deviation(const std::vector<double>& lengths, double true_length);

/// Rasterized fish-eye lens and launch geometry for one experiment. The
/// B-spline prefilter is done once and reused for every algorithm/ratio.
class FisheyeBench {
 public:
  FisheyeBench(int dim, FisheyeExperiment experiment, double a = 1.0, double n0 = 1.0,
               Backend backend = Backend::BSpline);

  int dim() const { return dim_; }
  FisheyeExperiment experiment() const { return experiment_; }
  const FisheyeAnalytic& reference() const { return ref_; }
  const Sampler& sampler() const { return *sampler_; }
  double grid_spacing() const { return sampler_->spec().spacing; }

  /// Launch states: one ray (2D radius), 101 rays over [-pi/3, pi/3]
  /// (2D length) or 21 azimuths about the launch axis (3D).
  std::vector<RayState> launches() const;

  TraceConfig trace_config(StepAlgorithm algorithm, double ratio) const;

  MetricResult run(StepAlgorithm algorithm, double ratio, unsigned threads = 0,
                   std::vector<Trajectory>* trajectories = nullptr) const;

 private:
  int dim_;
  FisheyeExperiment experiment_;
  double a_;
  FisheyeAnalytic ref_;
  std::unique_ptr<Sampler> sampler_;
};

MetricResult radius_experiment(const ExperimentSpec& spec);
MetricResult length_experiment(const ExperimentSpec& spec);

/// Every (algorithm, ratio) combination of the spec, algorithm-major.
std::vector<MetricResult> sweep(const ExperimentSpec& spec);

std::string_view to_string(FisheyeExperiment experiment);
FisheyeExperiment experiment_from_string(std::string_view name);

}  // namespace raytomo
