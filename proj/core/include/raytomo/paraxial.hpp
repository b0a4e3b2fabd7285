#pragma once

#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "raytomo/interp.hpp"
#include "raytomo/tracer.hpp"

namespace raytomo {

/// First-order perturbation of a ray state. d . dd == 0 is preserved by
/// the linearised system when it holds initially.
struct ParaxialState {
  Vec3 dx = Vec3::Zero();
  Vec3 dd = Vec3::Zero();
};

/// Unit vectors spanning the plane orthogonal to d. In 2D only the first
/// is used and it is d rotated by +90 degrees about z; (b1, b2, d) is
/// right-handed in 3D.
std::pair<Vec3, Vec3> transverse_basis(const Vec3& d, int dim);

/// Integrates d(dx)/ds = dd, d(dd)/ds = F_x dx + F_d dd along the samples
/// of `reference` with Heun's method, where F_x and F_d are the partial
/// derivatives of ray_rhs. Needs the Hessian, so `field` must be the
/// B-spline backend of the field the reference was traced on; throws
/// std::invalid_argument otherwise.
std::vector<ParaxialState> trace_paraxial(const Trajectory& reference, const Sampler& field,
                                          const ParaxialState& initial);

/// Point-source paraxial bundle: one solution per transverse basis vector
/// (one in 2D, two in 3D), each with dx(0) = 0 and dd(0) of unit length.
struct ParaxialBundle {
  int dim = 2;
  std::vector<ParaxialState> first;
  std::vector<ParaxialState> second;  // 3D only
};
ParaxialBundle trace_paraxial_bundle(const Trajectory& reference, const Sampler& field);

/// Signed ray Jacobian per sample: the transverse part of dx along the
/// first basis vector (2D), or the oriented area (dx1 x dx2) . d of the
/// transverse parts (3D). Per unit launch angle.
std::vector<double> ray_jacobian_paraxial(const ParaxialBundle& bundle, const Trajectory& reference);

/// Transverse magnitude |dx - (dx . d) d| of one paraxial solution.
std::vector<double> transverse_offset(const std::vector<ParaxialState>& solution, const Trajectory& reference);

/// Jacobian from rays launched at +-dtheta about the reference direction
/// (two in 2D, four in 3D), by central differences of their transverse
/// separation at equal sample index. `truncated` is set when an auxiliary
/// ray stops before the reference; J then covers the common prefix only.
struct AuxiliaryJacobian {
  Trajectory reference;
  std::vector<double> jacobian;
  bool truncated = false;
};
AuxiliaryJacobian ray_jacobian_auxiliary(const Sampler& field, const RayState& start, double dtheta,
                                         const TraceConfig& config);

/// Cumulative caustic count along the bundle: each step adds the number of
/// transverse directions in which the tube turned inside out (1 for a line
/// caustic, 2 for a point focus in 3D). In 2D this is the number of sign
/// changes of J.
std::vector<int> caustic_count(const ParaxialBundle& bundle, const Trajectory& reference);

/// sqrt(n_ref |J_ref| / (n |J|)) with n and J linearly interpolated at arc
/// length s_ref. Samples with J == 0 get +infinity.
std::vector<double> geometric_amplitude(const std::vector<double>& jacobian, const std::vector<double>& n,
                                        const std::vector<double>& arc, double s_ref);

/// omega * T - kappa * pi / 2 per sample.
std::vector<double> accumulate_phase(const std::vector<double>& time, const std::vector<int>& caustics,
                                     double omega);

/// Cumulative trapezoidal integral of the absorption coefficient alpha0
/// along the ray; throws std::invalid_argument if a sampled alpha0 < 0.
std::vector<double> absorption_integral(const Trajectory& traj, const Sampler& alpha0);

/// exp(-omega^y * integral) per sample.
std::vector<double> accumulate_absorption(const std::vector<double>& integral, double y, double omega);

struct GreensParams {
  std::vector<double> arc;
  std::vector<double> time;         // T(s), seconds
  std::vector<double> jacobian;     // J(s)
  std::vector<double> amplitude;    // A_geom(s), 1 at s_ref
  std::vector<double> attenuation;  // integral of alpha0 ds
  std::vector<int> caustics;        // kappa(s)
  std::vector<Vec3> offset;         // first paraxial dx, for plotting
  double s_ref = 0.0;
  double omega = 0.0;
  double y = 1.0;

  std::size_t size() const { return arc.size(); }
  /// True where J vanished and the amplitude is undefined.
  bool caustic_at(std::size_t i) const;
};

struct GreensOptions {
  double s_ref = 0.0;  // 0: one grid spacing
  double omega = 0.0;
  double y = 1.0;
  /// Travel time is the integral of the traced field over this speed.
  double reference_speed = 1.0;
  const Sampler* absorption = nullptr;
};

/// Everything along one traced ray. `field` is the B-spline sampler the
/// reference was traced on.
GreensParams greens_params(const Trajectory& reference, const Sampler& field, const GreensOptions& options);

/// Same trajectory walked from its last sample to its first, with
/// negated directions and the arc re-referenced to the new start.
Trajectory reverse_trajectory(const Trajectory& traj);

/// Receiver-to-emitter parameters: travel time and attenuation are
/// re-referenced to the receiver end of the forward arrays, and the
/// Jacobian comes from a fresh paraxial trace along the reversed path.
GreensParams reverse_ray(const Trajectory& forward, const GreensParams& params, const Sampler& field,
                         const GreensOptions& options);

/// A_geom * A_abs * exp(i phi) at sample i. Throws std::domain_error at a
/// caustic sample.
std::complex<double> greens_value(const GreensParams& params, std::size_t i, double omega);

}  // namespace raytomo
