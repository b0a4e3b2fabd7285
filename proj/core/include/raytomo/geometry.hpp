#pragma once

#include <cstddef>
#include <vector>

#include "raytomo/grid.hpp"

namespace raytomo {

enum class ArrayLayout { Ring, Sphere };

/// Emitters and receivers on a detection circle (2D) or sphere (3D).
/// Pair (e, r) has flat index e * receiver_count() + r.
struct ArrayGeometry {
  int dim = 2;
  ArrayLayout layout = ArrayLayout::Ring;
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
  std::vector<Vec3> emitters;
  std::vector<Vec3> receivers;

  /// Ring with uniformly spaced emitters and receivers, both starting at
  /// angle 0. Equal counts put each emitter on top of a receiver.
  static ArrayGeometry ring(std::size_t emitters, std::size_t receivers, const Vec3& center, double radius);

  /// Fibonacci-lattice points on the sphere, shared by both roles when the
  /// counts agree.
  static ArrayGeometry sphere(std::size_t emitters, std::size_t receivers, const Vec3& center, double radius);

  /// Throws std::invalid_argument unless every transducer lies on the
  /// detection surface (relative tolerance 1e-9) and both counts are >= 2.
  void validate() const;

  std::size_t emitter_count() const { return emitters.size(); }
  std::size_t receiver_count() const { return receivers.size(); }
  std::size_t pair_count() const { return emitters.size() * receivers.size(); }
  std::size_t pair_index(std::size_t e, std::size_t r) const { return e * receivers.size() + r; }

  /// A pair is usable unless emitter and receiver coincide.
  bool pair_valid(std::size_t e, std::size_t r) const;

  /// Smallest node-aligned grid with the given spacing that contains the
  /// detection surface plus `margin` on every side.
  GridSpec covering_grid(double spacing, double margin) const;

  /// Grid with exactly `nodes` samples per axis spanning the detection
  /// surface plus `margin`.
  GridSpec square_grid(int nodes, double margin) const;
};

}  // namespace raytomo
