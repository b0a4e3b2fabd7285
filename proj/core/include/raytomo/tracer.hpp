#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "raytomo/grid.hpp"
#include "raytomo/interp.hpp"

namespace raytomo {

enum class StepAlgorithm { DualUpdate, MixedStep, Characteristics, RungeKutta2 };

inline constexpr StepAlgorithm kAllAlgorithms[] = {StepAlgorithm::DualUpdate, StepAlgorithm::MixedStep,
                                                   StepAlgorithm::Characteristics,
                                                   StepAlgorithm::RungeKutta2};

std::string_view to_string(StepAlgorithm algorithm);
StepAlgorithm step_algorithm_from_string(std::string_view name);

struct RayState {
  Vec3 x = Vec3::Zero();
  Vec3 d = Vec3::UnitX();  // unit length
};

enum class Termination {
  BoundaryExit,         // next sample left the grid
  ClosedLoop,           // returned within one step of the launch point
  MaxSteps,             // step budget exhausted
  ReceiverCapture,      // passed the capture target; last sample snapped onto it
  SurfaceInterception,  // crossed the detection circle/sphere; last sample on it
};

std::string_view to_string(Termination termination);

struct StopCondition {
  struct Capture {
    Vec3 target = Vec3::Zero();
    double radius = 0.0;  // maximum lateral miss accepted
  };
  struct Surface {
    Vec3 center = Vec3::Zero();
    double radius = 0.0;
  };

  std::size_t max_steps = 200000;
  bool closed_loop = false;
  std::optional<Capture> capture;
  std::optional<Surface> surface;
};

struct TraceConfig {
  double ds = 1.0;
  StepAlgorithm algorithm = StepAlgorithm::RungeKutta2;
  StopCondition stop;
  /// Travel time is acoustic length divided by this speed. Use 1 when the
  /// traced field is slowness, c_ref when it is a refractive index c_ref/c.
  double reference_speed = 1.0;
};

/// Ordered ray samples. Every gap is `ds` except possibly the last, which
/// is `ds_last` <= ds when the final sample was snapped onto a target or a
/// detection surface. Reversed trajectories carry their short gap first;
/// `arc` is authoritative for gap lengths in every case.
struct Trajectory {
  std::vector<Vec3> positions;
  std::vector<Vec3> directions;
  std::vector<double> arc;     // cumulative arc length, arc[0] == 0
  std::vector<double> values;  // traced field sampled at each position
  double ds = 0.0;
  double ds_last = 0.0;
  double length = 0.0;  // trapezoidal integral of `values`
  double time = 0.0;    // length / reference speed
  Termination termination = Termination::MaxSteps;
  StepAlgorithm algorithm = StepAlgorithm::RungeKutta2;

  std::size_t size() const { return positions.size(); }
  bool empty() const { return positions.empty(); }
  std::vector<double> gaps() const;
};

/// Curvature term of the unit-speed ray equation d/ds (n dx/ds) = grad n:
/// the part of grad n orthogonal to d, divided by n.
Vec3 ray_rhs(const InterpSample& sample, const Vec3& d);

/// One step of the chosen scheme. Throws DomainExit when a sample needed
/// by the stencil is outside the grid.
RayState step(const RayState& state, double ds, const Sampler& field, StepAlgorithm algorithm);

/// Non-throwing step; nullopt on domain exit.
std::optional<RayState> try_step(const RayState& state, double ds, const Sampler& field,
                                 StepAlgorithm algorithm);

/// Integrates from `start` until a stop condition fires. The start must be
/// inside the grid.
Trajectory trace(const RayState& start, const Sampler& field, const TraceConfig& config);

/// Trapezoidal weights per sample: half the sum of the adjacent gaps.
std::vector<double> quadrature_weights(const Trajectory& traj);

/// Trapezoidal line integral of a sampled integrand along the trajectory.
double integrate(const Trajectory& traj, const std::vector<double>& integrand);

/// Cumulative trapezoidal integral, one entry per sample.
std::vector<double> cumulative_integral(const Trajectory& traj, const std::vector<double>& integrand);

double acoustic_length(const Trajectory& traj, const Sampler& index);

/// Integral of 1/c along the ray.
double travel_time(const Trajectory& traj, const Sampler& speed);

using SparseRow = NodeWeights;

/// Path-length weights of every grid node for this ray: each sample's
/// trapezoidal weight scattered through interp_weights. Sorted by node.
SparseRow system_row(const Trajectory& traj, const GridSpec& spec, Backend backend);

}  // namespace raytomo
