#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "raytomo/geometry.hpp"
#include "raytomo/interp.hpp"
#include "raytomo/tracer.hpp"

namespace raytomo {

/// Launch direction in angular form.
///
/// 2D: `azimuth` is the polar angle of d in the plane, wrapped to
/// (-pi, pi]; `polar` is unused and stays pi/2.
///
/// 3D: both angles live in a frame fixed by the emitter/receiver pair
/// (see LinkProblem::frame), whose equator contains the straight aim
/// direction at azimuth 0. azimuth in (-pi, pi], polar in [0, pi].
struct AngleParam {
  double azimuth = 0.0;
  double polar = 1.5707963267948966;
};

/// Orthonormal launch frame: straight aim, its in-plane normal, and the
/// pole of the angular chart.
struct LaunchFrame {
  Vec3 aim = Vec3::UnitX();
  Vec3 side = Vec3::UnitY();
  Vec3 pole = Vec3::UnitZ();
};

struct LinkProblem {
  int dim = 2;
  Vec3 emitter = Vec3::Zero();
  Vec3 receiver = Vec3::Zero();
  Vec3 center = Vec3::Zero();  // detection circle/sphere through both transducers
  double radius = 1.0;
  const Sampler* field = nullptr;
  StepAlgorithm algorithm = StepAlgorithm::RungeKutta2;
  double ds = 0.0;
  double tolerance = 0.0;  // interception-to-receiver distance
  std::size_t max_iterations = 20;
  std::size_t max_steps = 0;  // 0: derived from the array size
  double reference_speed = 1.0;

  /// Throws std::invalid_argument on a missing field, non-positive ds or
  /// tolerance, or coincident transducers.
  void validate() const;

  LaunchFrame frame() const;
  TraceConfig trace_config() const;
  Vec3 direction(const AngleParam& angles) const;
  AngleParam angles_of(const Vec3& direction) const;
  AngleParam straight_aim() const;
};

struct LinkResult {
  AngleParam angles;
  Trajectory trajectory;
  Vec2 residual = Vec2::Zero();  // 2D uses residual[0] only
  double miss = 0.0;             // |interception - receiver|
  std::size_t iterations = 0;    // traces after the initial guess
  bool converged = false;
  bool valid_pair = true;
};

enum class LinkMethod { Secant, RegulaFalsi, Broyden };

std::string_view to_string(LinkMethod method);
LinkMethod link_method_from_string(std::string_view name);

/// Traces the launch and measures where it meets the detection surface.
/// The residual is the angular position of the interception relative to
/// the receiver as seen from the array centre: one signed angle in 2D,
/// tangent-plane angles about the receiver axis in 3D. nullopt when the
/// ray never reaches the surface.
struct Interception {
  Vec2 residual = Vec2::Zero();
  double miss = 0.0;
  Trajectory trajectory;
};
std::optional<Interception> link_residual(const AngleParam& angles, const LinkProblem& problem);

/// Residual of a straight ray launched at `angles`, in closed form.
std::optional<Vec2> straight_residual(const AngleParam& angles, const LinkProblem& problem);

/// Illinois-modified regula falsi on the 2D residual. The bracket is
/// widened about its midpoint (doubling, up to three times) until the
/// residual changes sign; throws std::invalid_argument if it never does.
LinkResult link_regula_falsi(const LinkProblem& problem, AngleParam lo, AngleParam hi);

/// Secant iteration on the 2D residual from two seeds. Equal seeds make
/// the second one a Newton step from the first with the straight-ray
/// slope, which suits warm starts close to the root.
LinkResult link_secant(const LinkProblem& problem, AngleParam first, AngleParam second);

/// Good-Broyden iteration in 3D, one trace per update. The initial
/// Jacobian is the straight-ray Jacobian at the initial guess.
LinkResult link_broyden(const LinkProblem& problem, AngleParam initial);

/// Generic good-Broyden solve of g(u) = 0 from an initial Jacobian,
/// stopping once done(g) holds. A singular estimate is reset to the
/// initial one; `g` returning nullopt halves the step (up to 5 times).
/// `iterations` counts evaluations after the first.
struct BroydenOutcome {
  Vec2 u = Vec2::Zero();
  Vec2 g = Vec2::Zero();
  std::size_t iterations = 0;
  bool converged = false;
};
template <typename Fn, typename Done>
BroydenOutcome broyden_solve(Fn&& g, Done&& done, Vec2 u0, const Mat2& jacobian0, std::size_t max_iterations);

struct LinkConfig {
  StepAlgorithm algorithm = StepAlgorithm::RungeKutta2;
  double ds = 0.0;         // 0: one grid spacing
  double tolerance = 0.0;  // 0: one grid spacing
  std::optional<LinkMethod> method;  // default: secant in 2D, Broyden in 3D
  std::size_t max_iterations = 0;    // 0: 20 in 2D, 30 in 3D
  double reference_speed = 1.0;
  unsigned threads = 0;
};

/// Links every emitter/receiver pair, indexed by ArrayGeometry::pair_index.
/// Self pairs come back with valid_pair = false. A uniform field yields
/// straight rays with zero iterations. `warm` (same indexing) supplies
/// initial angles; entries from unconverged links are ignored.
std::vector<LinkResult> link_all(const ArrayGeometry& geometry, const Sampler& field, const LinkConfig& config,
                                 const std::vector<LinkResult>* warm = nullptr);

/// One entry of link_all, optionally warm-started from `warm`.
LinkResult link_pair(const ArrayGeometry& geometry, std::size_t emitter, std::size_t receiver, const Sampler& field,
                     const LinkConfig& config, const AngleParam* warm = nullptr);

LinkProblem make_problem(const ArrayGeometry& geometry, std::size_t emitter, std::size_t receiver,
                         const Sampler& field, const LinkConfig& config);

// --- implementation of the template ---

template <typename Fn, typename Done>
BroydenOutcome broyden_solve(Fn&& g, Done&& done, Vec2 u0, const Mat2& jacobian0, std::size_t max_iterations) {
  BroydenOutcome out;
  out.u = u0;
  auto g0 = g(u0);
  if (!g0) return out;
  out.g = *g0;
  Mat2 jac = jacobian0;
  while (out.iterations < max_iterations && !done(out.g)) {
    if (std::abs(jac.determinant()) < 1e-14 * std::max(1.0, jac.squaredNorm())) jac = jacobian0;
    Vec2 du = -jac.fullPivLu().solve(out.g);
    std::optional<Vec2> gn;
    for (int shrink = 0; shrink < 6 && out.iterations < max_iterations; ++shrink) {
      ++out.iterations;
      gn = g(out.u + du);
      if (gn) break;
      du *= 0.5;
    }
    if (!gn) return out;
    const Vec2 dg = *gn - out.g;
    jac += (dg - jac * du) * du.transpose() / du.squaredNorm();
    out.u += du;
    out.g = *gn;
  }
  out.converged = done(out.g);
  return out;
}

}  // namespace raytomo
