#pragma once

#include <variant>
#include <vector>

#include "raytomo/grid.hpp"

namespace raytomo {

/// Maxwell fish-eye lens, n(x) = n0 / (1 + (|x|/a)^2).
struct FisheyePhantom {
  double a = 1.0;
  double n0 = 1.0;
};

struct HomogeneousPhantom {
  double c0 = 1500.0;
};

/// Gaussian inclusion c0 + amplitude * exp(-|x - center|^2 / (2 radius^2)).
struct Blob {
  Vec3 center = Vec3::Zero();
  double radius = 0.01;
  double amplitude = 0.0;
};

struct BlobPhantom {
  double c0 = 1500.0;
  std::vector<Blob> blobs;
};

using PhantomSpec = std::variant<FisheyePhantom, HomogeneousPhantom, BlobPhantom>;

/// Throws std::invalid_argument on non-positive scales or a blob whose
/// amplitude is not small relative to c0 (|amplitude| >= c0 / 2).
void validate(const PhantomSpec& phantom);

double fisheye_index(const Vec3& x, double a, double n0);

/// Exact gradient of the fish-eye index.
Vec3 fisheye_gradient(const Vec3& x, double a, double n0);

/// Analytic value of the phantom at x (index for the fish-eye, sound speed
/// otherwise).
double evaluate(const PhantomSpec& phantom, const Vec3& x);

/// Nodal evaluation. Fish-eye fields are refractive index; homogeneous and
/// blob phantoms are sound speed.
ScalarField rasterize(const PhantomSpec& phantom, const GridSpec& spec);

enum class FisheyeExperiment { Radius, Length };

/// Expected geometry of the validation experiments for the fish-eye lens.
struct FisheyeAnalytic {
  double radius = 0.0;  // sqrt(dim) * a
  double length = 0.0;  // a * (dim - 1) * pi / 2
  Vec3 center = Vec3::Zero();
  Vec3 start = Vec3::Zero();   // launch point x_p
  Vec3 target = Vec3::Zero();  // interception point for the length experiment
};

FisheyeAnalytic fisheye_reference(int dim, double a, FisheyeExperiment experiment);

/// Cube (square) of the given half-width around the origin with the
/// validation grid spacing 2*pi*a/360.
GridSpec fisheye_grid(int dim, double a, double half_width);

/// Node-aligned grid with spacing 2*pi*a/360 enclosing every exact
/// trajectory of the given validation experiment plus `margin * a`.
GridSpec fisheye_experiment_grid(int dim, double a, FisheyeExperiment experiment,
                                 double margin = 0.25);

double fisheye_spacing(double a);

}  // namespace raytomo
