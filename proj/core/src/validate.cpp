#include "raytomo/validate.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "raytomo/parallel.hpp"

namespace raytomo {

double radius_deviation(const std::vector<Vec3>& samples, const Vec3& center, double radius) {
  if (samples.size() < 2) throw std::invalid_argument("radius deviation needs at least two samples");
  double sum = 0.0;
  for (std::size_t m = 1; m < samples.size(); ++m) {
    sum += std::abs((samples[m] - center).norm() - radius) / radius;
  }
  return sum / static_cast<double>(samples.size() - 1);
}

double length_deviation(const std::vector<double>& lengths, double true_length) {
  if (lengths.empty()) throw std::invalid_argument("length deviation needs at least one ray");
  double sum = 0.0;
  for (double l : lengths) sum += (l - true_length) / true_length;
  return sum / static_cast<double>(lengths.size());
}

std::string_view to_string(FisheyeExperiment experiment) {
  return experiment == FisheyeExperiment::Radius ? "radius" : "length";
}

FisheyeExperiment experiment_from_string(std::string_view name) {
  if (name == "radius") return FisheyeExperiment::Radius;
  if (name == "length") return FisheyeExperiment::Length;
  throw std::invalid_argument("unknown experiment '" + std::string(name) + "' (expected radius or length)");
}

FisheyeBench::FisheyeBench(int dim, FisheyeExperiment experiment, double a, double n0, Backend backend)
    : dim_(dim), experiment_(experiment), a_(a), ref_(fisheye_reference(dim, a, experiment)) {
  const GridSpec grid = fisheye_experiment_grid(dim, a, experiment);
  sampler_ = make_sampler(rasterize(FisheyePhantom{a, n0}, grid), backend);
}

std::vector<RayState> FisheyeBench::launches() const {
  std::vector<RayState> out;
  const Vec3 axis = (ref_.center - ref_.start).normalized();
  if (dim_ == 2) {
    const Vec3 down(0.0, -1.0, 0.0);
    if (experiment_ == FisheyeExperiment::Radius) {
      // normal to the axis, circulating clockwise about the centre
      out.push_back({ref_.start, Vec3(-axis.y(), axis.x(), 0.0)});
    } else {
      constexpr int kRays = 101;
      for (int j = 0; j < kRays; ++j) {
        const double theta = -std::numbers::pi / 3.0 + (2.0 * std::numbers::pi / 3.0) * j / (kRays - 1);
        const double c = std::cos(theta), s = std::sin(theta);
        out.push_back({ref_.start, Vec3(c * down.x() - s * down.y(), s * down.x() + c * down.y(), 0.0)});
      }
    }
    return out;
  }
  constexpr int kRays = 21;
  const Vec3 e1 = (Vec3::UnitZ() - Vec3::UnitZ().dot(axis) * axis).normalized();
  const Vec3 e2 = axis.cross(e1);
  for (int k = 0; k < kRays; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / kRays;
    out.push_back({ref_.start, std::cos(phi) * e1 + std::sin(phi) * e2});
  }
  return out;
}

TraceConfig FisheyeBench::trace_config(StepAlgorithm algorithm, double ratio) const {
  if (!(ratio > 0.0)) throw std::invalid_argument("ray-to-grid ratio must be positive");
  TraceConfig cfg;
  cfg.algorithm = algorithm;
  cfg.ds = ratio * grid_spacing();
  // the longest expected path is one full loop of radius sqrt(dim) a
  const double longest = 2.0 * std::numbers::pi * std::sqrt(static_cast<double>(dim_)) * a_;
  cfg.stop.max_steps = static_cast<std::size_t>(std::ceil(2.0 * longest / cfg.ds)) + 16;
  if (experiment_ == FisheyeExperiment::Radius) {
    cfg.stop.closed_loop = true;
  } else {
    cfg.stop.capture = StopCondition::Capture{ref_.target, 2.0 * cfg.ds};
  }
  return cfg;
}

MetricResult FisheyeBench::run(StepAlgorithm algorithm, double ratio, unsigned threads,
                               std::vector<Trajectory>* trajectories) const {
  const auto rays = launches();
  const TraceConfig cfg = trace_config(algorithm, ratio);
  const Termination expected =
      experiment_ == FisheyeExperiment::Radius ? Termination::ClosedLoop : Termination::ReceiverCapture;

  std::vector<Trajectory> traced(rays.size());
  parallel_for(rays.size(), threads, [&](std::size_t i) { traced[i] = trace(rays[i], *sampler_, cfg); });

  MetricResult r;
  r.experiment = experiment_;
  r.algorithm = algorithm;
  r.dim = dim_;
  r.ratio = ratio;
  r.ray_count = rays.size();
  r.per_ray.assign(rays.size(), std::numeric_limits<double>::quiet_NaN());
  double sum = 0.0;
  std::size_t ok = 0;
  for (std::size_t i = 0; i < rays.size(); ++i) {
    const Trajectory& t = traced[i];
    if (t.termination != expected || t.size() < 2) {
      r.failed.push_back(i);
      continue;
    }
    const double dev = experiment_ == FisheyeExperiment::Radius
                           ? radius_deviation(t.positions, ref_.center, ref_.radius)
                           : (t.length - ref_.length) / ref_.length;
    r.per_ray[i] = 100.0 * dev;
    sum += r.per_ray[i];
    ++ok;
  }
  r.value = ok > 0 ? sum / static_cast<double>(ok) : std::numeric_limits<double>::quiet_NaN();
  if (trajectories) *trajectories = std::move(traced);
  return r;
}

MetricResult radius_experiment(const ExperimentSpec& spec) {
  if (spec.experiment != FisheyeExperiment::Radius) throw std::invalid_argument("spec is not a radius experiment");
  if (spec.algorithms.size() != 1 || spec.ratios.size() != 1)
    throw std::invalid_argument("single-experiment call needs exactly one algorithm and one ratio");
  FisheyeBench bench(spec.dim, spec.experiment, spec.a, spec.n0);
  return bench.run(spec.algorithms.front(), spec.ratios.front(), spec.threads);
}

MetricResult length_experiment(const ExperimentSpec& spec) {
  if (spec.experiment != FisheyeExperiment::Length) throw std::invalid_argument("spec is not a length experiment");
  if (spec.algorithms.size() != 1 || spec.ratios.size() != 1)
    throw std::invalid_argument("single-experiment call needs exactly one algorithm and one ratio");
  FisheyeBench bench(spec.dim, spec.experiment, spec.a, spec.n0);
  return bench.run(spec.algorithms.front(), spec.ratios.front(), spec.threads);
}

std::vector<MetricResult> sweep(const ExperimentSpec& spec) {
  if (spec.ratios.empty() || spec.algorithms.empty()) throw std::invalid_argument("sweep needs ratios and algorithms");
  for (double r : spec.ratios)
    if (!(r > 0.0)) throw std::invalid_argument("sweep ratios must be positive");
  FisheyeBench bench(spec.dim, spec.experiment, spec.a, spec.n0);
  std::vector<MetricResult> rows;
  for (StepAlgorithm alg : spec.algorithms)
    for (double ratio : spec.ratios) rows.push_back(bench.run(alg, ratio, spec.threads));
  return rows;
}

}  // namespace raytomo
