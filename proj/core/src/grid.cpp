#include "raytomo/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace raytomo {

void GridSpec::validate() const {
  if (dim != 2 && dim != 3) {
    throw std::invalid_argument("grid dimension must be 2 or 3, got " + std::to_string(dim));
  }
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw std::invalid_argument("grid spacing must be positive");
  }
  for (int a = 0; a < dim; ++a) {
    if (counts[a] < 4) {
      throw std::invalid_argument("grid axis " + std::to_string(a) +
                                  " needs at least 4 samples, got " + std::to_string(counts[a]));
    }
  }
  if (dim == 2 && counts[2] != 1) {
    throw std::invalid_argument("2D grid must have counts[2] == 1");
  }
  if (!origin.allFinite() || (dim == 2 && origin.z() != 0.0)) {
    throw std::invalid_argument("grid origin must be finite (and z = 0 in 2D)");
  }
}

std::array<int, 3> GridSpec::unflat(std::size_t idx) const {
  const auto i2 = static_cast<int>(idx % counts[2]);
  idx /= counts[2];
  const auto i1 = static_cast<int>(idx % counts[1]);
  const auto i0 = static_cast<int>(idx / counts[1]);
  return {i0, i1, i2};
}

Vec3 GridSpec::node(int i0, int i1, int i2) const {
  Vec3 p = origin + spacing * Vec3(i0, i1, i2);
  if (dim == 2) p.z() = 0.0;
  return p;
}

Vec3 GridSpec::node(std::size_t idx) const {
  const auto [i0, i1, i2] = unflat(idx);
  return node(i0, i1, i2);
}

Vec3 GridSpec::upper() const {
  Vec3 u = origin;
  for (int a = 0; a < dim; ++a) u[a] += extent(a);
  return u;
}

bool GridSpec::contains(const Vec3& x) const {
  for (int a = 0; a < dim; ++a) {
    const double u = x[a] - origin[a];
    if (!(u >= 0.0 && u <= extent(a))) return false;
  }
  return true;
}

GridSpec GridSpec::centered(int dim, const Vec3& center, double half_width, double spacing) {
  GridSpec g;
  g.dim = dim;
  g.spacing = spacing;
  const int half = static_cast<int>(std::ceil(half_width / spacing - 1e-9));
  g.counts = {2 * half + 1, 2 * half + 1, dim == 3 ? 2 * half + 1 : 1};
  g.origin = center - Vec3::Constant(half * spacing);
  if (dim == 2) g.origin.z() = 0.0;
  g.validate();
  return g;
}

GridSpec GridSpec::covering(int dim, const Vec3& lo, const Vec3& hi, double spacing) {
  GridSpec g;
  g.dim = dim;
  g.spacing = spacing;
  g.counts = {1, 1, 1};
  g.origin = Vec3::Zero();
  for (int a = 0; a < dim; ++a) {
    const auto first = static_cast<long>(std::floor(lo[a] / spacing));
    const auto last = static_cast<long>(std::ceil(hi[a] / spacing));
    g.origin[a] = first * spacing;
    g.counts[a] = static_cast<int>(std::max<long>(last - first + 1, 4));
  }
  g.validate();
  return g;
}

std::string_view to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::RefractiveIndex: return "refractive-index";
    case FieldKind::SoundSpeed: return "sound-speed";
    case FieldKind::Slowness: return "slowness";
    case FieldKind::Absorption: return "absorption-coefficient";
  }
  return "unknown";
}

FieldKind field_kind_from_string(std::string_view name) {
  for (auto k : {FieldKind::RefractiveIndex, FieldKind::SoundSpeed, FieldKind::Slowness,
                 FieldKind::Absorption}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown field kind '" + std::string(name) + "'");
}

ScalarField::ScalarField(GridSpec spec, std::vector<double> values, FieldKind kind)
    : spec_(std::move(spec)), values_(std::move(values)), kind_(kind) {
  check();
}

ScalarField::ScalarField(GridSpec spec, double fill, FieldKind kind)
    : spec_(std::move(spec)), values_(spec_.size(), fill), kind_(kind) {
  check();
}

void ScalarField::check() const {
  spec_.validate();
  if (values_.size() != spec_.size()) {
    throw std::invalid_argument("field has " + std::to_string(values_.size()) +
                                " values, grid needs " + std::to_string(spec_.size()));
  }
  const bool positive = kind_ != FieldKind::Absorption;
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("field contains non-finite values");
    if (positive && !(v > 0.0)) {
      throw std::invalid_argument(std::string(to_string(kind_)) + " field must be strictly positive");
    }
  }
}

bool ScalarField::is_uniform() const {
  return std::all_of(values_.begin(), values_.end(), [&](double v) { return v == values_.front(); });
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

ScalarField reciprocal(const ScalarField& field, FieldKind kind) {
  std::vector<double> out(field.values().size());
  std::transform(field.values().begin(), field.values().end(), out.begin(),
                 [](double v) { return 1.0 / v; });
  return ScalarField(field.spec(), std::move(out), kind);
}

std::vector<Vec3> grid_gradient(const ScalarField& field) {
  const GridSpec& g = field.spec();
  std::vector<Vec3> grad(g.size(), Vec3::Zero());
  const double h = g.spacing;
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const auto ijk = g.unflat(idx);
    for (int a = 0; a < g.dim; ++a) {
      auto lo = ijk;
      auto hi = ijk;
      double span = 2.0 * h;
      if (ijk[a] == 0) {
        hi[a] += 1;
        span = h;
      } else if (ijk[a] == g.counts[a] - 1) {
        lo[a] -= 1;
        span = h;
      } else {
        lo[a] -= 1;
        hi[a] += 1;
      }
      grad[idx][a] = (field.at(hi[0], hi[1], hi[2]) - field.at(lo[0], lo[1], lo[2])) / span;
    }
  }
  return grad;
}

}  // namespace raytomo
