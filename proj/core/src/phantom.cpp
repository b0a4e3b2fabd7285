#include "raytomo/phantom.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace raytomo {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

double blob_speed(const BlobPhantom& p, const Vec3& x) {
  double c = p.c0;
  for (const Blob& b : p.blobs) {
    const double r2 = (x - b.center).squaredNorm();
    c += b.amplitude * std::exp(-r2 / (2.0 * b.radius * b.radius));
  }
  return c;
}

}  // namespace

void validate(const PhantomSpec& phantom) {
  std::visit(overloaded{
                 [](const FisheyePhantom& p) {
                   if (!(p.a > 0.0) || !(p.n0 > 0.0))
                     throw std::invalid_argument("fish-eye phantom needs a > 0 and n0 > 0");
                 },
                 [](const HomogeneousPhantom& p) {
                   if (!(p.c0 > 0.0)) throw std::invalid_argument("homogeneous phantom needs c0 > 0");
                 },
                 [](const BlobPhantom& p) {
                   if (!(p.c0 > 0.0)) throw std::invalid_argument("blob phantom needs c0 > 0");
                   for (const Blob& b : p.blobs) {
                     if (!(b.radius > 0.0)) throw std::invalid_argument("blob radius must be positive");
                     if (!(std::abs(b.amplitude) < 0.5 * p.c0))
                       throw std::invalid_argument("blob amplitude must be small relative to c0");
                   }
                 },
             },
             phantom);
}

double fisheye_index(const Vec3& x, double a, double n0) {
  const double q = x.squaredNorm() / (a * a);
  return n0 / (1.0 + q);
}

Vec3 fisheye_gradient(const Vec3& x, double a, double n0) {
  const double q = 1.0 + x.squaredNorm() / (a * a);
  return (-2.0 * n0 / (a * a * q * q)) * x;
}

double evaluate(const PhantomSpec& phantom, const Vec3& x) {
  return std::visit(overloaded{
                        [&](const FisheyePhantom& p) { return fisheye_index(x, p.a, p.n0); },
                        [&](const HomogeneousPhantom& p) { return p.c0; },
                        [&](const BlobPhantom& p) { return blob_speed(p, x); },
                    },
                    phantom);
}

ScalarField rasterize(const PhantomSpec& phantom, const GridSpec& spec) {
  validate(phantom);
  spec.validate();
  std::vector<double> values(spec.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = evaluate(phantom, spec.node(i));
  const FieldKind kind = std::holds_alternative<FisheyePhantom>(phantom) ? FieldKind::RefractiveIndex
                                                                         : FieldKind::SoundSpeed;
  return ScalarField(spec, std::move(values), kind);
}

FisheyeAnalytic fisheye_reference(int dim, double a, FisheyeExperiment experiment) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("fish-eye reference needs dim 2 or 3");
  FisheyeAnalytic r;
  r.radius = std::sqrt(static_cast<double>(dim)) * a;
  r.length = a * (dim - 1) * std::numbers::pi / 2.0;
  if (dim == 2) {
    r.start = Vec3(0.0, a, 0.0);
    r.center = experiment == FisheyeExperiment::Radius ? Vec3(a, 0.0, 0.0) : Vec3::Zero();
    r.target = Vec3(0.0, -a, 0.0);
  } else {
    r.start = Vec3(0.0, 0.0, a);
    r.center = Vec3(a, a, 0.0);
    r.target = r.start;
  }
  return r;
}

double fisheye_spacing(double a) { return 2.0 * std::numbers::pi * a / 360.0; }

GridSpec fisheye_grid(int dim, double a, double half_width) {
  return GridSpec::centered(dim, Vec3::Zero(), half_width, fisheye_spacing(a));
}

GridSpec fisheye_experiment_grid(int dim, double a, FisheyeExperiment experiment, double margin) {
  Vec3 lo, hi;
  if (dim == 2 && experiment == FisheyeExperiment::Radius) {
    // circle about (a, 0) through (0, a)
    const double r = std::sqrt(2.0) * a;
    lo = Vec3(a - r, -r, 0.0);
    hi = Vec3(a + r, r, 0.0);
  } else if (dim == 2) {
    // chords from (0, a) to (0, -a) bulge at most tan(pi/6) * a sideways
    lo = Vec3(-a, -a, 0.0);
    hi = Vec3(a, a, 0.0);
  } else {
    // every launched circle lies on the sphere of radius sqrt(3) a about (a, a, 0)
    const double r = std::sqrt(3.0) * a;
    lo = Vec3(a - r, a - r, -r);
    hi = Vec3(a + r, a + r, r);
  }
  const Vec3 pad = Vec3::Constant(margin * a);
  return GridSpec::covering(dim, lo - pad, hi + pad, fisheye_spacing(a));
}

}  // namespace raytomo
