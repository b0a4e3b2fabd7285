#include "raytomo/paraxial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>

namespace raytomo {

namespace {

struct Linearisation {
  Mat3 fx;
  Mat3 fd;
};

Linearisation linearise(const InterpSample& s, const Vec3& d) {
  if (!(s.value > 0.0)) throw std::domain_error("paraxial tracing needs a positive field value");
  const double n = s.value;
  const Vec3& g = s.gradient;
  const Mat3 proj = Mat3::Identity() - d * d.transpose();
  const Vec3 f = proj * g / n;
  Linearisation l;
  l.fx = proj * (*s.hessian) / n - f * g.transpose() / n;
  l.fd = -(g.dot(d) * Mat3::Identity() + d * g.transpose()) / n;
  return l;
}

Vec3 transverse(const Vec3& v, const Vec3& d) { return v - v.dot(d) * d; }

double lerp_at(const std::vector<double>& arc, const std::vector<double>& v, double s) {
  if (s <= arc.front()) return v.front();
  if (s >= arc.back()) return v.back();
  const auto it = std::upper_bound(arc.begin(), arc.end(), s);
  const std::size_t i = static_cast<std::size_t>(it - arc.begin()) - 1;
  const double t = (s - arc[i]) / (arc[i + 1] - arc[i]);
  return (1.0 - t) * v[i] + t * v[i + 1];
}

// Transverse 2x2 matrix of the bundle at each sample in a frame carried
// along the ray by projection.
std::vector<Mat2> bundle_matrices(const ParaxialBundle& b, const Trajectory& ref) {
  std::vector<Mat2> q(ref.size());
  Vec3 b1 = transverse_basis(ref.directions.front(), 3).first;
  for (std::size_t m = 0; m < ref.size(); ++m) {
    const Vec3& d = ref.directions[m];
    b1 = transverse(b1, d).normalized();
    const Vec3 b2 = d.cross(b1);
    const Vec3& v1 = b.first[m].dx;
    const Vec3& v2 = b.second[m].dx;
    q[m] << v1.dot(b1), v2.dot(b1), v1.dot(b2), v2.dot(b2);
  }
  return q;
}

}  // namespace

std::pair<Vec3, Vec3> transverse_basis(const Vec3& d, int dim) {
  if (dim == 2) return {Vec3(-d.y(), d.x(), 0.0).normalized(), Vec3::UnitZ()};
  const Vec3 trial = std::abs(d.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
  const Vec3 b1 = transverse(trial, d).normalized();
  return {b1, d.cross(b1)};
}

std::vector<ParaxialState> trace_paraxial(const Trajectory& reference, const Sampler& field,
                                          const ParaxialState& initial) {
  if (field.backend() != Backend::BSpline)
    throw std::invalid_argument("paraxial tracing needs field Hessians (B-spline backend)");
  const std::size_t m_count = reference.size();
  if (m_count == 0) throw std::invalid_argument("empty reference trajectory");

  std::vector<Linearisation> lin;
  lin.reserve(m_count);
  for (std::size_t m = 0; m < m_count; ++m) {
    lin.push_back(linearise(field.sample(reference.positions[m]), reference.directions[m]));
  }

  std::vector<ParaxialState> out(m_count);
  out[0] = initial;
  for (std::size_t m = 0; m + 1 < m_count; ++m) {
    const double h = reference.arc[m + 1] - reference.arc[m];
    const ParaxialState& y = out[m];
    const Vec3 k1x = y.dd;
    const Vec3 k1d = lin[m].fx * y.dx + lin[m].fd * y.dd;
    const Vec3 px = y.dx + h * k1x;
    const Vec3 pd = y.dd + h * k1d;
    const Vec3 k2x = pd;
    const Vec3 k2d = lin[m + 1].fx * px + lin[m + 1].fd * pd;
    out[m + 1].dx = y.dx + 0.5 * h * (k1x + k2x);
    out[m + 1].dd = y.dd + 0.5 * h * (k1d + k2d);
  }
  return out;
}

ParaxialBundle trace_paraxial_bundle(const Trajectory& reference, const Sampler& field) {
  if (reference.empty()) throw std::invalid_argument("empty reference trajectory");
  ParaxialBundle b;
  b.dim = field.spec().dim;
  const auto [b1, b2] = transverse_basis(reference.directions.front(), b.dim);
  b.first = trace_paraxial(reference, field, {Vec3::Zero(), b1});
  if (b.dim == 3) b.second = trace_paraxial(reference, field, {Vec3::Zero(), b2});
  return b;
}

std::vector<double> ray_jacobian_paraxial(const ParaxialBundle& bundle, const Trajectory& reference) {
  std::vector<double> j(reference.size());
  for (std::size_t m = 0; m < j.size(); ++m) {
    const Vec3& d = reference.directions[m];
    if (bundle.dim == 2) {
      j[m] = bundle.first[m].dx.dot(transverse_basis(d, 2).first);
    } else {
      j[m] = transverse(bundle.first[m].dx, d).cross(transverse(bundle.second[m].dx, d)).dot(d);
    }
  }
  return j;
}

std::vector<double> transverse_offset(const std::vector<ParaxialState>& solution, const Trajectory& reference) {
  std::vector<double> out(solution.size());
  for (std::size_t m = 0; m < out.size(); ++m) out[m] = transverse(solution[m].dx, reference.directions[m]).norm();
  return out;
}

AuxiliaryJacobian ray_jacobian_auxiliary(const Sampler& field, const RayState& start, double dtheta,
                                         const TraceConfig& config) {
  if (!(dtheta > 0.0)) throw std::invalid_argument("auxiliary ray angle must be positive");
  const int dim = field.spec().dim;
  const Vec3 d0 = start.d.normalized();
  AuxiliaryJacobian out;
  out.reference = trace(RayState{start.x, d0}, field, config);

  const auto [b1, b2] = transverse_basis(d0, dim);
  const double c = std::cos(dtheta), s = std::sin(dtheta);
  std::vector<Trajectory> aux;
  for (const Vec3& b : dim == 2 ? std::vector<Vec3>{b1} : std::vector<Vec3>{b1, b2}) {
    aux.push_back(trace(RayState{start.x, c * d0 + s * b}, field, config));
    aux.push_back(trace(RayState{start.x, c * d0 - s * b}, field, config));
  }

  // only samples a whole step apart are compared; a snapped final sample is not
  auto full_steps = [](const Trajectory& t) {
    return t.ds_last < t.ds ? t.size() - 1 : t.size();
  };
  std::size_t n = full_steps(out.reference);
  for (const Trajectory& t : aux) {
    if (full_steps(t) < n) {
      n = full_steps(t);
      out.truncated = true;
    }
  }
  out.jacobian.resize(n);
  const double scale = 1.0 / (2.0 * s);
  for (std::size_t m = 0; m < n; ++m) {
    const Vec3& d = out.reference.directions[m];
    const Vec3 v1 = transverse((aux[0].positions[m] - aux[1].positions[m]) * scale, d);
    if (dim == 2) {
      out.jacobian[m] = v1.dot(transverse_basis(d, 2).first);
    } else {
      const Vec3 v2 = transverse((aux[2].positions[m] - aux[3].positions[m]) * scale, d);
      out.jacobian[m] = v1.cross(v2).dot(d);
    }
  }
  return out;
}

std::vector<int> caustic_count(const ParaxialBundle& bundle, const Trajectory& reference) {
  const std::size_t n = reference.size();
  std::vector<int> kappa(n, 0);
  if (bundle.dim == 2) {
    const auto j = ray_jacobian_paraxial(bundle, reference);
    double last = 0.0;
    int count = 0;
    for (std::size_t m = 0; m < n; ++m) {
      if (j[m] != 0.0) {
        if (last != 0.0 && (j[m] > 0.0) != (last > 0.0)) ++count;
        last = j[m];
      }
      kappa[m] = count;
    }
    return kappa;
  }

  const auto q = bundle_matrices(bundle, reference);
  double scale = 0.0;
  for (const Mat2& m : q) scale = std::max(scale, m.squaredNorm());
  const double singular = 1e-24 * scale;
  std::optional<Mat2> last;
  int count = 0;
  for (std::size_t m = 0; m < n; ++m) {
    if (std::abs(q[m].determinant()) > singular) {
      if (last) {
        const Mat2 step = last->inverse() * q[m];
        if (step.determinant() < 0.0) {
          count += 1;
        } else if (step.trace() < 0.0) {
          count += 2;
        }
      }
      last = q[m];
    }
    kappa[m] = count;
  }
  return kappa;
}

std::vector<double> geometric_amplitude(const std::vector<double>& jacobian, const std::vector<double>& n,
                                        const std::vector<double>& arc, double s_ref) {
  if (jacobian.size() != n.size() || arc.size() != n.size() || n.empty())
    throw std::invalid_argument("amplitude inputs differ in length");
  const double ref = std::abs(lerp_at(arc, n, s_ref) * lerp_at(arc, jacobian, s_ref));
  if (!(ref > 0.0)) throw std::invalid_argument("ray Jacobian vanishes at the reference arc length");
  std::vector<double> a(n.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double nj = std::abs(n[i] * jacobian[i]);
    a[i] = nj > 0.0 ? std::sqrt(ref / nj) : std::numeric_limits<double>::infinity();
  }
  return a;
}

std::vector<double> accumulate_phase(const std::vector<double>& time, const std::vector<int>& caustics,
                                     double omega) {
  if (!(omega > 0.0)) throw std::invalid_argument("angular frequency must be positive");
  if (time.size() != caustics.size()) throw std::invalid_argument("phase inputs differ in length");
  std::vector<double> phi(time.size());
  for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = omega * time[i] - caustics[i] * (std::numbers::pi / 2.0);
  return phi;
}

std::vector<double> absorption_integral(const Trajectory& traj, const Sampler& alpha0) {
  std::vector<double> a(traj.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = alpha0.value(traj.positions[i]);
    if (a[i] < 0.0) throw std::invalid_argument("absorption coefficient must be non-negative");
  }
  return cumulative_integral(traj, a);
}

std::vector<double> accumulate_absorption(const std::vector<double>& integral, double y, double omega) {
  if (!(omega > 0.0)) throw std::invalid_argument("angular frequency must be positive");
  const double w = std::pow(omega, y);
  std::vector<double> out(integral.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(-w * integral[i]);
  return out;
}

bool GreensParams::caustic_at(std::size_t i) const { return jacobian.at(i) == 0.0 || !std::isfinite(amplitude.at(i)); }

GreensParams greens_params(const Trajectory& reference, const Sampler& field, const GreensOptions& options) {
  if (reference.size() < 2) throw std::invalid_argument("Green's parameters need at least two ray samples");
  if (!(options.reference_speed > 0.0)) throw std::invalid_argument("reference speed must be positive");
  GreensParams p;
  p.arc = reference.arc;
  p.omega = options.omega;
  p.y = options.y;
  p.s_ref = options.s_ref > 0.0 ? options.s_ref : field.spec().spacing;

  p.time = cumulative_integral(reference, reference.values);
  for (double& t : p.time) t /= options.reference_speed;

  const ParaxialBundle bundle = trace_paraxial_bundle(reference, field);
  p.jacobian = ray_jacobian_paraxial(bundle, reference);
  p.caustics = caustic_count(bundle, reference);
  p.amplitude = geometric_amplitude(p.jacobian, reference.values, reference.arc, p.s_ref);
  p.offset.reserve(bundle.first.size());
  for (const ParaxialState& s : bundle.first) p.offset.push_back(s.dx);

  p.attenuation = options.absorption ? absorption_integral(reference, *options.absorption)
                                     : std::vector<double>(reference.size(), 0.0);
  return p;
}

Trajectory reverse_trajectory(const Trajectory& traj) {
  Trajectory r = traj;
  std::reverse(r.positions.begin(), r.positions.end());
  std::reverse(r.directions.begin(), r.directions.end());
  for (Vec3& d : r.directions) d = -d;
  std::reverse(r.values.begin(), r.values.end());
  const double total = traj.arc.empty() ? 0.0 : traj.arc.back();
  for (std::size_t i = 0; i < r.arc.size(); ++i) r.arc[i] = total - traj.arc[traj.arc.size() - 1 - i];
  return r;
}

GreensParams reverse_ray(const Trajectory& forward, const GreensParams& params, const Sampler& field,
                         const GreensOptions& options) {
  if (params.size() != forward.size()) throw std::invalid_argument("parameters do not belong to this ray");
  const Trajectory back = reverse_trajectory(forward);
  GreensParams r = greens_params(back, field, options);
  const std::size_t n = params.size();
  for (std::size_t i = 0; i < n; ++i) {
    r.time[i] = params.time.back() - params.time[n - 1 - i];
    r.attenuation[i] = params.attenuation.back() - params.attenuation[n - 1 - i];
  }
  return r;
}

std::complex<double> greens_value(const GreensParams& params, std::size_t i, double omega) {
  if (params.caustic_at(i)) throw std::domain_error("Green's function is singular at a caustic sample; use a neighbour");
  if (!(omega > 0.0)) throw std::invalid_argument("angular frequency must be positive");
  const double phase = omega * params.time[i] - params.caustics[i] * (std::numbers::pi / 2.0);
  const double mag = params.amplitude[i] * std::exp(-std::pow(omega, params.y) * params.attenuation[i]);
  return std::polar(mag, phase);
}

}  // namespace raytomo
