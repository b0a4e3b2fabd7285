#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

#include "raytomo/grid.hpp"

namespace raytomo {

/// Raised when a field is sampled outside its grid. Tracing treats it as
/// the ray leaving the domain.
class DomainExit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Backend { Bilinear, BSpline };

std::string_view to_string(Backend backend);
Backend backend_from_string(std::string_view name);

struct InterpSample {
  double value = 0.0;
  Vec3 gradient = Vec3::Zero();
  std::optional<Mat3> hessian;  // cubic B-spline backend only
};

using NodeWeights = std::vector<std::pair<std::size_t, double>>;

/// Off-grid evaluation of a ScalarField. Instances are immutable once
/// constructed and may be shared freely between threads.
class Sampler {
 public:
  virtual ~Sampler() = default;

  virtual Backend backend() const = 0;

  /// nullopt when x lies outside the closed grid box.
  virtual std::optional<InterpSample> try_sample(const Vec3& x) const = 0;

  /// Value only; cheaper than try_sample for quadrature.
  virtual std::optional<double> try_value(const Vec3& x) const = 0;

  InterpSample sample(const Vec3& x) const;
  double value(const Vec3& x) const;

  const ScalarField& field() const { return field_; }
  const GridSpec& spec() const { return field_.spec(); }

 protected:
  explicit Sampler(ScalarField field) : field_(std::move(field)) {}

  ScalarField field_;
};

/// Multilinear interpolation over the 2^dim vertices of the enclosing
/// voxel. Gradients are interpolated from central-difference node
/// gradients with the same weights.
class BilinearSampler final : public Sampler {
 public:
  explicit BilinearSampler(ScalarField field);

  Backend backend() const override { return Backend::Bilinear; }
  std::optional<InterpSample> try_sample(const Vec3& x) const override;
  std::optional<double> try_value(const Vec3& x) const override;

 private:
  std::vector<Vec3> node_gradient_;
};

/// Tensor-product cubic B-spline whose control coefficients are
/// prefiltered so that the spline passes through every nodal value.
/// Coefficients are padded by one layer on each side by cubic
/// extrapolation, which keeps polynomials of degree <= 3 exact up to the
/// boundary.
class BSplineSampler final : public Sampler {
 public:
  explicit BSplineSampler(ScalarField field);

  Backend backend() const override { return Backend::BSpline; }
  std::optional<InterpSample> try_sample(const Vec3& x) const override;
  std::optional<double> try_value(const Vec3& x) const override;

  /// Padded coefficient at unpadded node index (each may be -1 or n).
  double coefficient(int i0, int i1, int i2 = 0) const;

 private:
  std::size_t padded_flat(int p0, int p1, int p2) const {
    return (static_cast<std::size_t>(p0) * padded_[1] + p1) * padded_[2] + p2;
  }

  std::array<int, 3> padded_{};
  std::vector<double> coeff_;
};

std::unique_ptr<Sampler> make_sampler(ScalarField field, Backend backend);

/// Interpolation weights of x onto grid nodes, zero entries dropped.
/// Bilinear: the voxel vertices. B-spline: the 4^dim basis stencil, with
/// stencil nodes beyond the boundary folded onto the nearest edge node.
/// Weights are non-negative and sum to one. Throws DomainExit outside the
/// grid.
NodeWeights interp_weights(const GridSpec& spec, const Vec3& x, Backend backend);

/// Cubic B-spline basis values and first/second derivatives at local
/// coordinate t in [0, 1] for the stencil offsets -1, 0, 1, 2.
struct CubicBasis {
  double w[4];
  double dw[4];
  double ddw[4];
};
CubicBasis cubic_bspline_basis(double t);

/// In-place conversion of a line of nodal samples (size >= 4) into
/// interpolating cubic B-spline coefficients with cubic-extrapolated ends.
void prefilter_line(std::vector<double>& line);

}  // namespace raytomo
