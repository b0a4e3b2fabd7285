#include "raytomo/tracer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace raytomo {

namespace {

Vec3 unit(const Vec3& v) { return v / v.norm(); }

std::optional<Vec3> rhs_at(const Sampler& field, const Vec3& x, const Vec3& d) {
  auto s = field.try_sample(x);
  if (!s) return std::nullopt;
  return ray_rhs(*s, d);
}

// Entry fraction t in [0, 1] where the segment a -> b meets the sphere.
double sphere_crossing(const Vec3& a, const Vec3& b, const Vec3& c, double r) {
  const Vec3 ab = b - a;
  const Vec3 ac = a - c;
  const double qa = ab.squaredNorm();
  const double qb = 2.0 * ab.dot(ac);
  const double qc = ac.squaredNorm() - r * r;
  const double disc = std::max(qb * qb - 4.0 * qa * qc, 0.0);
  const double t = (-qb + std::sqrt(disc)) / (2.0 * qa);
  return std::clamp(t, 0.0, 1.0);
}

}  // namespace

std::string_view to_string(StepAlgorithm algorithm) {
  switch (algorithm) {
    case StepAlgorithm::DualUpdate: return "dual-update";
    case StepAlgorithm::MixedStep: return "mixed-step";
    case StepAlgorithm::Characteristics: return "characteristics";
    case StepAlgorithm::RungeKutta2: return "rk2";
  }
  return "unknown";
}

StepAlgorithm step_algorithm_from_string(std::string_view name) {
  for (StepAlgorithm a : kAllAlgorithms) {
    if (to_string(a) == name) return a;
  }
  throw std::invalid_argument("unknown step algorithm '" + std::string(name) +
                              "' (expected dual-update, mixed-step, characteristics or rk2)");
}

std::string_view to_string(Termination termination) {
  switch (termination) {
    case Termination::BoundaryExit: return "boundary-exit";
    case Termination::ClosedLoop: return "closed-loop";
    case Termination::MaxSteps: return "max-steps";
    case Termination::ReceiverCapture: return "receiver-capture";
    case Termination::SurfaceInterception: return "surface-interception";
  }
  return "unknown";
}

std::vector<double> Trajectory::gaps() const {
  std::vector<double> g;
  g.reserve(arc.size());
  for (std::size_t i = 1; i < arc.size(); ++i) g.push_back(arc[i] - arc[i - 1]);
  return g;
}

Vec3 ray_rhs(const InterpSample& sample, const Vec3& d) {
  if (!(sample.value > 0.0)) throw std::domain_error("ray equation needs a positive field value");
  const Vec3& g = sample.gradient;
  return (g - g.dot(d) * d) / sample.value;
}

std::optional<RayState> try_step(const RayState& s, double h, const Sampler& field, StepAlgorithm algorithm) {
  switch (algorithm) {
    case StepAlgorithm::DualUpdate: {
      // direction updated twice per step, half a kick on each side of the drift
      const auto f0 = rhs_at(field, s.x, s.d);
      if (!f0) return std::nullopt;
      const Vec3 dh = unit(s.d + (0.5 * h) * *f0);
      const Vec3 x = s.x + h * dh;
      const auto s1 = field.try_sample(x);
      if (!s1) return std::nullopt;
      // the closing kick is evaluated at its own predicted direction
      const Vec3 dp = unit(dh + (0.5 * h) * ray_rhs(*s1, dh));
      return RayState{x, unit(dh + (0.5 * h) * ray_rhs(*s1, dp))};
    }
    case StepAlgorithm::MixedStep: {
      const Vec3 x = s.x + h * s.d;
      const auto f = rhs_at(field, x, s.d);
      if (!f) return std::nullopt;
      return RayState{x, unit(s.d + h * *f)};
    }
    case StepAlgorithm::Characteristics: {
      const auto f = rhs_at(field, s.x, s.d);
      if (!f) return std::nullopt;
      return RayState{s.x + h * unit(s.d + (0.5 * h) * *f), unit(s.d + h * *f)};
    }
    case StepAlgorithm::RungeKutta2: {
      const auto f0 = rhs_at(field, s.x, s.d);
      if (!f0) return std::nullopt;
      const Vec3 xp = s.x + h * s.d;
      const Vec3 dp = unit(s.d + h * *f0);
      const auto f1 = rhs_at(field, xp, dp);
      if (!f1) return std::nullopt;
      return RayState{s.x + h * unit(s.d + dp), unit(s.d + (0.5 * h) * (*f0 + *f1))};
    }
  }
  return std::nullopt;
}

RayState step(const RayState& state, double ds, const Sampler& field, StepAlgorithm algorithm) {
  auto next = try_step(state, ds, field, algorithm);
  if (!next) throw DomainExit("ray step left the grid");
  return *next;
}

Trajectory trace(const RayState& start, const Sampler& field, const TraceConfig& cfg) {
  if (!(cfg.ds > 0.0)) throw std::invalid_argument("trace step size must be positive");
  const double h = cfg.ds;
  const StopCondition& stop = cfg.stop;

  Trajectory t;
  t.ds = h;
  t.ds_last = h;
  t.algorithm = cfg.algorithm;
  auto v0 = field.try_value(start.x);
  if (!v0) throw DomainExit("ray start outside grid");

  RayState s{start.x, unit(start.d)};
  t.positions.push_back(s.x);
  t.directions.push_back(s.d);
  t.arc.push_back(0.0);
  t.values.push_back(*v0);

  auto append = [&](const Vec3& x, const Vec3& d, double gap, double value) {
    t.positions.push_back(x);
    t.directions.push_back(d);
    t.arc.push_back(t.arc.back() + gap);
    t.values.push_back(value);
    t.ds_last = gap;
  };

  t.termination = Termination::MaxSteps;
  for (std::size_t m = 0; m < stop.max_steps; ++m) {
    auto next = try_step(s, h, field, cfg.algorithm);
    if (!next) {
      t.termination = Termination::BoundaryExit;
      break;
    }
    const Vec3 seg = next->x - s.x;
    const bool armed = t.arc.back() + h > 2.0 * h;

    if (stop.surface && m > 0) {
      const auto& sf = stop.surface;
      const bool inside_now = (s.x - sf->center).norm() < sf->radius;
      const bool outside_next = (next->x - sf->center).norm() >= sf->radius;
      if (inside_now && outside_next) {
        const double frac = sphere_crossing(s.x, next->x, sf->center, sf->radius);
        const Vec3 q = s.x + frac * seg;
        auto v = field.try_value(q);
        if (!v) {
          t.termination = Termination::BoundaryExit;
          break;
        }
        append(q, next->d, frac * h, *v);
        t.termination = Termination::SurfaceInterception;
        break;
      }
    }

    if (stop.capture && armed) {
      const Vec3& p = stop.capture->target;
      const double seg_len = seg.norm();
      const Vec3 u = seg / seg_len;
      const double along = (p - s.x).dot(u);
      if (along >= 0.0 && (p - next->x).dot(u) < 0.0) {
        const double lateral = ((p - s.x) - along * u).norm();
        if (lateral <= stop.capture->radius) {
          auto v = field.try_value(p);
          if (!v) {
            t.termination = Termination::BoundaryExit;
            break;
          }
          append(p, next->d, std::min(along, h), *v);
          t.termination = Termination::ReceiverCapture;
          break;
        }
      }
    }

    auto v = field.try_value(next->x);
    if (!v) {
      t.termination = Termination::BoundaryExit;
      break;
    }
    append(next->x, next->d, h, *v);
    s = *next;

    if (stop.closed_loop && t.arc.back() > 2.0 * h && (s.x - start.x).norm() < h) {
      t.termination = Termination::ClosedLoop;
      break;
    }
  }

  t.length = integrate(t, t.values);
  t.time = t.length / cfg.reference_speed;
  return t;
}

std::vector<double> quadrature_weights(const Trajectory& traj) {
  const std::size_t n = traj.size();
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    const double gap = traj.arc[i] - traj.arc[i - 1];
    w[i - 1] += 0.5 * gap;
    w[i] += 0.5 * gap;
  }
  return w;
}

double integrate(const Trajectory& traj, const std::vector<double>& integrand) {
  if (integrand.size() != traj.size()) throw std::invalid_argument("integrand size mismatch");
  const auto w = quadrature_weights(traj);
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) sum += w[i] * integrand[i];
  return sum;
}

std::vector<double> cumulative_integral(const Trajectory& traj, const std::vector<double>& integrand) {
  if (integrand.size() != traj.size()) throw std::invalid_argument("integrand size mismatch");
  std::vector<double> out(traj.size(), 0.0);
  for (std::size_t i = 1; i < traj.size(); ++i) {
    const double gap = traj.arc[i] - traj.arc[i - 1];
    out[i] = out[i - 1] + 0.5 * gap * (integrand[i - 1] + integrand[i]);
  }
  return out;
}

double acoustic_length(const Trajectory& traj, const Sampler& index) {
  if (traj.empty()) throw std::invalid_argument("empty trajectory");
  std::vector<double> n(traj.size());
  for (std::size_t i = 0; i < n.size(); ++i) n[i] = index.value(traj.positions[i]);
  return integrate(traj, n);
}

double travel_time(const Trajectory& traj, const Sampler& speed) {
  if (traj.empty()) throw std::invalid_argument("empty trajectory");
  std::vector<double> slow(traj.size());
  for (std::size_t i = 0; i < slow.size(); ++i) slow[i] = 1.0 / speed.value(traj.positions[i]);
  return integrate(traj, slow);
}

SparseRow system_row(const Trajectory& traj, const GridSpec& spec, Backend backend) {
  const auto w = quadrature_weights(traj);
  SparseRow raw;
  raw.reserve(traj.size() * (spec.dim == 2 ? 16 : 64));
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (w[i] == 0.0) continue;
    for (const auto& [node, weight] : interp_weights(spec, traj.positions[i], backend)) {
      raw.emplace_back(node, w[i] * weight);
    }
  }
  std::sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  SparseRow row;
  for (const auto& e : raw) {
    if (!row.empty() && row.back().first == e.first) {
      row.back().second += e.second;
    } else {
      row.push_back(e);
    }
  }
  return row;
}

}  // namespace raytomo
