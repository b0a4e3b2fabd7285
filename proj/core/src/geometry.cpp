#include "raytomo/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace raytomo {

namespace {

std::vector<Vec3> ring_points(std::size_t n, const Vec3& c, double r) {
  std::vector<Vec3> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    out.push_back(c + r * Vec3(std::cos(t), std::sin(t), 0.0));
  }
  return out;
}

std::vector<Vec3> fibonacci_points(std::size_t n, const Vec3& c, double r) {
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<Vec3> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double t = golden * static_cast<double>(i);
    out.push_back(c + r * Vec3(rho * std::cos(t), rho * std::sin(t), z));
  }
  return out;
}

}  // namespace

ArrayGeometry ArrayGeometry::ring(std::size_t emitters, std::size_t receivers, const Vec3& center, double radius) {
  ArrayGeometry g;
  g.dim = 2;
  g.layout = ArrayLayout::Ring;
  g.center = Vec3(center.x(), center.y(), 0.0);
  g.radius = radius;
  g.emitters = ring_points(emitters, g.center, radius);
  g.receivers = ring_points(receivers, g.center, radius);
  g.validate();
  return g;
}

ArrayGeometry ArrayGeometry::sphere(std::size_t emitters, std::size_t receivers, const Vec3& center, double radius) {
  ArrayGeometry g;
  g.dim = 3;
  g.layout = ArrayLayout::Sphere;
  g.center = center;
  g.radius = radius;
  g.emitters = fibonacci_points(emitters, center, radius);
  g.receivers = fibonacci_points(receivers, center, radius);
  g.validate();
  return g;
}

void ArrayGeometry::validate() const {
  if (dim != 2 && dim != 3) throw std::invalid_argument("array dimension must be 2 or 3");
  if ((dim == 2) != (layout == ArrayLayout::Ring)) throw std::invalid_argument("ring arrays are 2D, sphere arrays 3D");
  if (!(radius > 0.0)) throw std::invalid_argument("array radius must be positive");
  if (emitters.size() < 2 || receivers.size() < 2) throw std::invalid_argument("array needs at least two emitters and two receivers");
  auto check = [&](const std::vector<Vec3>& pts, const char* role) {
    for (const Vec3& p : pts) {
      if (dim == 2 && p.z() != 0.0) throw std::invalid_argument(std::string(role) + " off the ring plane");
      if (std::abs((p - center).norm() - radius) > 1e-9 * radius)
        throw std::invalid_argument(std::string(role) + " not on the detection surface");
    }
  };
  check(emitters, "emitter");
  check(receivers, "receiver");
}

bool ArrayGeometry::pair_valid(std::size_t e, std::size_t r) const {
  return (emitters.at(e) - receivers.at(r)).norm() > 1e-9 * radius;
}

GridSpec ArrayGeometry::covering_grid(double spacing, double margin) const {
  const double h = radius + margin;
  Vec3 lo = center - Vec3::Constant(h);
  Vec3 hi = center + Vec3::Constant(h);
  if (dim == 2) lo.z() = hi.z() = 0.0;
  return GridSpec::covering(dim, lo, hi, spacing);
}

GridSpec ArrayGeometry::square_grid(int nodes, double margin) const {
  if (nodes < 4) throw std::invalid_argument("grid needs at least 4 nodes per axis");
  const double h = radius + margin;
  GridSpec g;
  g.dim = dim;
  g.spacing = 2.0 * h / (nodes - 1);
  g.origin = center - Vec3::Constant(h);
  if (dim == 2) g.origin.z() = 0.0;
  g.counts = {nodes, nodes, dim == 3 ? nodes : 1};
  g.validate();
  return g;
}

}  // namespace raytomo
