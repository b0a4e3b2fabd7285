#include "raytomo/interp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace raytomo {

namespace {

struct AxisCell {
  int i;     // lower node of the enclosing cell, in [0, n-2]
  double t;  // local coordinate in [0, 1]
};

// False when x is outside the closed box along any active axis.
bool locate(const GridSpec& g, const Vec3& x, std::array<AxisCell, 3>& cells) {
  cells[2] = {0, 0.0};
  for (int a = 0; a < g.dim; ++a) {
    const double u = (x[a] - g.origin[a]) / g.spacing;
    const int n = g.counts[a];
    if (!(u >= 0.0 && u <= n - 1)) return false;
    const int i = std::min(static_cast<int>(std::floor(u)), n - 2);
    cells[a] = {i, u - i};
  }
  return true;
}

// Calls fn(offset) for every start index of a line along `axis` in an
// array with the given extents; `stride` is the distance between
// consecutive samples of the line.
template <typename Fn>
void for_each_line(const std::array<int, 3>& ext, int axis, Fn&& fn) {
  std::array<std::size_t, 3> stride{static_cast<std::size_t>(ext[1]) * ext[2],
                                    static_cast<std::size_t>(ext[2]), 1};
  std::array<int, 3> idx{0, 0, 0};
  const int o1 = axis == 0 ? 1 : 0;
  const int o2 = axis == 2 ? 1 : 2;
  for (idx[o1] = 0; idx[o1] < ext[o1]; ++idx[o1]) {
    for (idx[o2] = 0; idx[o2] < ext[o2]; ++idx[o2]) {
      idx[axis] = 0;
      fn(idx[0] * stride[0] + idx[1] * stride[1] + idx[2] * stride[2], stride[axis]);
    }
  }
}

}  // namespace

InterpSample Sampler::sample(const Vec3& x) const {
  auto s = try_sample(x);
  if (!s) throw DomainExit("sample point outside grid");
  return *std::move(s);
}

double Sampler::value(const Vec3& x) const {
  auto v = try_value(x);
  if (!v) throw DomainExit("sample point outside grid");
  return *v;
}

// ---------------------------------------------------------------- bilinear

BilinearSampler::BilinearSampler(ScalarField field)
    : Sampler(std::move(field)), node_gradient_(grid_gradient(field_)) {}

std::optional<InterpSample> BilinearSampler::try_sample(const Vec3& x) const {
  const GridSpec& g = spec();
  std::array<AxisCell, 3> c;
  if (!locate(g, x, c)) return std::nullopt;
  InterpSample s;
  const int corners = 1 << g.dim;
  for (int k = 0; k < corners; ++k) {
    double w = 1.0;
    std::array<int, 3> n{c[0].i, c[1].i, c[2].i};
    for (int a = 0; a < g.dim; ++a) {
      const bool hi = (k >> a) & 1;
      w *= hi ? c[a].t : 1.0 - c[a].t;
      n[a] += hi;
    }
    const std::size_t idx = g.flat(n[0], n[1], n[2]);
    s.value += w * field_[idx];
    s.gradient += w * node_gradient_[idx];
  }
  return s;
}

std::optional<double> BilinearSampler::try_value(const Vec3& x) const {
  auto s = try_sample(x);
  if (!s) return std::nullopt;
  return s->value;
}

// ---------------------------------------------------------------- B-spline

CubicBasis cubic_bspline_basis(double t) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double s = 1.0 - t;
  return CubicBasis{
      {s * s * s / 6.0, (3.0 * t3 - 6.0 * t2 + 4.0) / 6.0, (-3.0 * t3 + 3.0 * t2 + 3.0 * t + 1.0) / 6.0,
       t3 / 6.0},
      {-0.5 * s * s, 1.5 * t2 - 2.0 * t, -1.5 * t2 + t + 0.5, 0.5 * t2},
      {s, 3.0 * t - 2.0, -3.0 * t + 1.0, t},
  };
}

void prefilter_line(std::vector<double>& f) {
  const std::size_t n = f.size();
  if (n < 4) throw std::invalid_argument("prefilter_line needs at least 4 samples");
  std::vector<double> c(n);
  // Cubic extrapolation of the outer coefficient, substituted into the
  // first interpolation row, pins c[1] (and c[n-2]) directly.
  c[1] = (8.0 * f[1] - f[0] - f[2]) / 6.0;
  c[n - 2] = (8.0 * f[n - 2] - f[n - 3] - f[n - 1]) / 6.0;
  // Remaining unknowns c[2..n-3] solve rows 2..n-3 of
  // c[j-1] + 4 c[j] + c[j+1] = 6 f[j] (Thomas algorithm).
  const std::size_t m = n >= 4 ? n - 4 : 0;
  if (m > 0) {
    std::vector<double> diag(m, 4.0), rhs(m);
    for (std::size_t k = 0; k < m; ++k) rhs[k] = 6.0 * f[k + 2];
    rhs.front() -= c[1];
    rhs.back() -= c[n - 2];
    for (std::size_t k = 1; k < m; ++k) {
      const double w = 1.0 / diag[k - 1];
      diag[k] -= w;
      rhs[k] -= w * rhs[k - 1];
    }
    c[m + 1] = rhs[m - 1] / diag[m - 1];
    for (std::size_t k = m - 1; k-- > 0;) c[k + 2] = (rhs[k] - c[k + 3]) / diag[k];
  }
  c[0] = 6.0 * f[1] - 4.0 * c[1] - c[2];
  c[n - 1] = 6.0 * f[n - 2] - 4.0 * c[n - 2] - c[n - 3];
  f = std::move(c);
}

BSplineSampler::BSplineSampler(ScalarField field) : Sampler(std::move(field)) {
  const GridSpec& g = spec();
  std::vector<double> raw = field_.values();
  std::vector<double> line;
  for (int a = 0; a < g.dim; ++a) {
    const int n = g.counts[a];
    for_each_line(g.counts, a, [&](std::size_t start, std::size_t stride) {
      line.resize(n);
      for (int k = 0; k < n; ++k) line[k] = raw[start + k * stride];
      prefilter_line(line);
      for (int k = 0; k < n; ++k) raw[start + k * stride] = line[k];
    });
  }

  padded_ = {g.counts[0] + 2, g.counts[1] + 2, g.dim == 3 ? g.counts[2] + 2 : 1};
  coeff_.assign(static_cast<std::size_t>(padded_[0]) * padded_[1] * padded_[2], 0.0);
  const int lift = g.dim == 3 ? 1 : 0;
  for (int i0 = 0; i0 < g.counts[0]; ++i0)
    for (int i1 = 0; i1 < g.counts[1]; ++i1)
      for (int i2 = 0; i2 < g.counts[2]; ++i2)
        coeff_[padded_flat(i0 + 1, i1 + 1, i2 + lift)] = raw[g.flat(i0, i1, i2)];

  for (int a = 0; a < g.dim; ++a) {
    const int n = padded_[a];
    for_each_line(padded_, a, [&](std::size_t s, std::size_t st) {
      auto c = [&](int k) -> double& { return coeff_[s + k * st]; };
      c(0) = 4.0 * c(1) - 6.0 * c(2) + 4.0 * c(3) - c(4);
      c(n - 1) = 4.0 * c(n - 2) - 6.0 * c(n - 3) + 4.0 * c(n - 4) - c(n - 5);
    });
  }
}

double BSplineSampler::coefficient(int i0, int i1, int i2) const {
  return coeff_[padded_flat(i0 + 1, i1 + 1, spec().dim == 3 ? i2 + 1 : 0)];
}

std::optional<InterpSample> BSplineSampler::try_sample(const Vec3& x) const {
  const GridSpec& g = spec();
  std::array<AxisCell, 3> c;
  if (!locate(g, x, c)) return std::nullopt;
  const CubicBasis b0 = cubic_bspline_basis(c[0].t);
  const CubicBasis b1 = cubic_bspline_basis(c[1].t);
  const double inv_h = 1.0 / g.spacing;
  const double inv_h2 = inv_h * inv_h;

  InterpSample s;
  Mat3 hess = Mat3::Zero();
  if (g.dim == 2) {
    double v = 0, gx = 0, gy = 0, hxx = 0, hxy = 0, hyy = 0;
    for (int j0 = 0; j0 < 4; ++j0) {
      const std::size_t row = padded_flat(c[0].i + j0, c[1].i, 0);
      double r = 0, rd = 0, rdd = 0;
      for (int j1 = 0; j1 < 4; ++j1) {
        const double cf = coeff_[row + j1];
        r += b1.w[j1] * cf;
        rd += b1.dw[j1] * cf;
        rdd += b1.ddw[j1] * cf;
      }
      v += b0.w[j0] * r;
      gx += b0.dw[j0] * r;
      gy += b0.w[j0] * rd;
      hxx += b0.ddw[j0] * r;
      hxy += b0.dw[j0] * rd;
      hyy += b0.w[j0] * rdd;
    }
    s.value = v;
    s.gradient = Vec3(gx * inv_h, gy * inv_h, 0.0);
    hess(0, 0) = hxx * inv_h2;
    hess(1, 1) = hyy * inv_h2;
    hess(0, 1) = hess(1, 0) = hxy * inv_h2;
  } else {
    const CubicBasis b2 = cubic_bspline_basis(c[2].t);
    double v = 0;
    Vec3 gr = Vec3::Zero();
    double hxx = 0, hyy = 0, hzz = 0, hxy = 0, hxz = 0, hyz = 0;
    for (int j0 = 0; j0 < 4; ++j0) {
      for (int j1 = 0; j1 < 4; ++j1) {
        const std::size_t row = padded_flat(c[0].i + j0, c[1].i + j1, c[2].i);
        double r = 0, rd = 0, rdd = 0;
        for (int j2 = 0; j2 < 4; ++j2) {
          const double cf = coeff_[row + j2];
          r += b2.w[j2] * cf;
          rd += b2.dw[j2] * cf;
          rdd += b2.ddw[j2] * cf;
        }
        const double w0 = b0.w[j0], d0 = b0.dw[j0], dd0 = b0.ddw[j0];
        const double w1 = b1.w[j1], d1 = b1.dw[j1], dd1 = b1.ddw[j1];
        v += w0 * w1 * r;
        gr += Vec3(d0 * w1 * r, w0 * d1 * r, w0 * w1 * rd);
        hxx += dd0 * w1 * r;
        hyy += w0 * dd1 * r;
        hzz += w0 * w1 * rdd;
        hxy += d0 * d1 * r;
        hxz += d0 * w1 * rd;
        hyz += w0 * d1 * rd;
      }
    }
    s.value = v;
    s.gradient = gr * inv_h;
    hess << hxx, hxy, hxz, hxy, hyy, hyz, hxz, hyz, hzz;
    hess *= inv_h2;
  }
  s.hessian = hess;
  return s;
}

std::optional<double> BSplineSampler::try_value(const Vec3& x) const {
  const GridSpec& g = spec();
  std::array<AxisCell, 3> c;
  if (!locate(g, x, c)) return std::nullopt;
  const CubicBasis b0 = cubic_bspline_basis(c[0].t);
  const CubicBasis b1 = cubic_bspline_basis(c[1].t);
  double v = 0;
  if (g.dim == 2) {
    for (int j0 = 0; j0 < 4; ++j0) {
      const std::size_t row = padded_flat(c[0].i + j0, c[1].i, 0);
      double r = 0;
      for (int j1 = 0; j1 < 4; ++j1) r += b1.w[j1] * coeff_[row + j1];
      v += b0.w[j0] * r;
    }
  } else {
    const CubicBasis b2 = cubic_bspline_basis(c[2].t);
    for (int j0 = 0; j0 < 4; ++j0)
      for (int j1 = 0; j1 < 4; ++j1) {
        const std::size_t row = padded_flat(c[0].i + j0, c[1].i + j1, c[2].i);
        double r = 0;
        for (int j2 = 0; j2 < 4; ++j2) r += b2.w[j2] * coeff_[row + j2];
        v += b0.w[j0] * b1.w[j1] * r;
      }
  }
  return v;
}

std::string_view to_string(Backend backend) { return backend == Backend::Bilinear ? "bilinear" : "bspline"; }

Backend backend_from_string(std::string_view name) {
  if (name == "bilinear") return Backend::Bilinear;
  if (name == "bspline") return Backend::BSpline;
  throw std::invalid_argument("unknown interpolation backend '" + std::string(name) + "' (expected bilinear or bspline)");
}

std::unique_ptr<Sampler> make_sampler(ScalarField field, Backend backend) {
  if (backend == Backend::Bilinear) return std::make_unique<BilinearSampler>(std::move(field));
  return std::make_unique<BSplineSampler>(std::move(field));
}

// ----------------------------------------------------------------- weights

NodeWeights interp_weights(const GridSpec& g, const Vec3& x, Backend backend) {
  std::array<AxisCell, 3> c;
  if (!locate(g, x, c)) throw DomainExit("interpolation point outside grid");
  NodeWeights out;
  if (backend == Backend::Bilinear) {
    const int corners = 1 << g.dim;
    for (int k = 0; k < corners; ++k) {
      double w = 1.0;
      std::array<int, 3> n{c[0].i, c[1].i, c[2].i};
      for (int a = 0; a < g.dim; ++a) {
        const bool hi = (k >> a) & 1;
        w *= hi ? c[a].t : 1.0 - c[a].t;
        n[a] += hi;
      }
      if (w != 0.0) out.emplace_back(g.flat(n[0], n[1], n[2]), w);
    }
    return out;
  }

  std::array<std::array<double, 4>, 3> w{};
  std::array<std::array<int, 4>, 3> node{};
  for (int a = 0; a < 3; ++a) {
    if (a < g.dim) {
      const CubicBasis b = cubic_bspline_basis(c[a].t);
      for (int j = 0; j < 4; ++j) {
        w[a][j] = b.w[j];
        node[a][j] = std::clamp(c[a].i - 1 + j, 0, g.counts[a] - 1);
      }
    } else {
      w[a] = {1.0, 0.0, 0.0, 0.0};
      node[a] = {0, 0, 0, 0};
    }
  }
  std::map<std::size_t, double> merged;
  const int n2 = g.dim == 3 ? 4 : 1;
  for (int j0 = 0; j0 < 4; ++j0)
    for (int j1 = 0; j1 < 4; ++j1)
      for (int j2 = 0; j2 < n2; ++j2) {
        const double wt = w[0][j0] * w[1][j1] * w[2][j2];
        if (wt != 0.0) merged[g.flat(node[0][j0], node[1][j1], node[2][j2])] += wt;
      }
  out.assign(merged.begin(), merged.end());
  return out;
}

}  // namespace raytomo
