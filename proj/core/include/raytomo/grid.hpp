#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace raytomo {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

// All geometry is carried in 3-vectors. In 2D the third component of every
// position, direction, gradient and Hessian row/column is identically zero.

/// Regular isotropic grid.
///
/// Node (i0, i1, i2) sits at origin + spacing * (i0, i1, i2). Values are
/// stored row-major with the last axis fastest:
///
///     flat = (i0 * counts[1] + i1) * counts[2] + i2
///
/// In 2D, counts[2] == 1 and i2 == 0, so flat = i0 * counts[1] + i1.
/// Every module that touches flat node indices uses GridSpec::flat().
struct GridSpec {
  int dim = 2;
  Vec3 origin = Vec3::Zero();
  double spacing = 1.0;
  std::array<int, 3> counts{4, 4, 1};

  /// Throws std::invalid_argument unless dim is 2 or 3, spacing > 0 and
  /// every active axis has at least 4 samples.
  void validate() const;

  std::size_t size() const {
    return static_cast<std::size_t>(counts[0]) * counts[1] * counts[2];
  }

  std::size_t flat(int i0, int i1, int i2 = 0) const {
    return (static_cast<std::size_t>(i0) * counts[1] + i1) * counts[2] + i2;
  }

  std::array<int, 3> unflat(std::size_t idx) const;

  Vec3 node(int i0, int i1, int i2 = 0) const;
  Vec3 node(std::size_t idx) const;

  /// Upper corner of the domain, origin + (counts - 1) * spacing per axis.
  Vec3 upper() const;

  double extent(int axis) const { return (counts[axis] - 1) * spacing; }

  /// Closed-box membership over the active axes.
  bool contains(const Vec3& x) const;

  /// Grid of the given dimension centred on `center` covering at least
  /// [center - half_width, center + half_width] per axis. The origin is
  /// aligned to a multiple of `spacing` relative to `center` so that
  /// `center` is itself a node.
  static GridSpec centered(int dim, const Vec3& center, double half_width, double spacing);

  /// Smallest node-aligned grid (relative to the coordinate origin) that
  /// covers the box [lo, hi].
  static GridSpec covering(int dim, const Vec3& lo, const Vec3& hi, double spacing);

  bool operator==(const GridSpec&) const = default;
};

enum class FieldKind { RefractiveIndex, SoundSpeed, Slowness, Absorption };

std::string_view to_string(FieldKind kind);
FieldKind field_kind_from_string(std::string_view name);

/// Nodal samples over a GridSpec.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(GridSpec spec, std::vector<double> values, FieldKind kind);
  ScalarField(GridSpec spec, double fill, FieldKind kind);

  const GridSpec& spec() const { return spec_; }
  FieldKind kind() const { return kind_; }
  const std::vector<double>& values() const { return values_; }

  double operator[](std::size_t i) const { return values_[i]; }
  double at(int i0, int i1, int i2 = 0) const { return values_[spec_.flat(i0, i1, i2)]; }

  /// True when every nodal value equals the first one.
  bool is_uniform() const;

  double min() const;
  double max() const;

 private:
  void check() const;

  GridSpec spec_;
  std::vector<double> values_;
  FieldKind kind_ = FieldKind::RefractiveIndex;
};

/// Elementwise reciprocal, e.g. sound speed -> slowness.
ScalarField reciprocal(const ScalarField& field, FieldKind kind);

/// Nodal gradient: central differences in the interior, one-sided first
/// differences on the boundary layers. Result is indexed like the field.
std::vector<Vec3> grid_gradient(const ScalarField& field);

}  // namespace raytomo
