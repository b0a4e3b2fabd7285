#include "raytomo/linker.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "raytomo/parallel.hpp"

namespace raytomo {

namespace {

constexpr double kDegree = std::numbers::pi / 180.0;

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  return a <= -std::numbers::pi ? a + 2.0 * std::numbers::pi : a;
}

Vec3 any_perpendicular(const Vec3& v) {
  const Vec3 trial = std::abs(v.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
  return (trial - trial.dot(v) * v).normalized();
}

// Angular chart of a point q on the detection surface relative to the receiver.
Vec2 surface_residual(const Vec3& q, const LinkProblem& p) {
  const Vec3 rq = q - p.center;
  const Vec3 rr = p.receiver - p.center;
  if (p.dim == 2) {
    return Vec2(wrap_angle(std::atan2(rq.y(), rq.x()) - std::atan2(rr.y(), rr.x())), 0.0);
  }
  const Vec3 r_hat = rr.normalized();
  const Vec3 q_hat = rq.normalized();
  const Vec3 pole = p.frame().pole;
  const Vec3 e1 = r_hat.cross(pole);
  const double along = q_hat.dot(r_hat);
  return Vec2(std::atan2(q_hat.dot(e1), along), std::atan2(q_hat.dot(pole), along));
}

Vec2 as_vec(const AngleParam& a) { return Vec2(a.azimuth, a.polar); }
AngleParam as_angles(const Vec2& u) { return {wrap_angle(u[0]), u[1]}; }

LinkResult make_result(const AngleParam& angles, Interception&& hit, std::size_t iterations, double tolerance) {
  LinkResult r;
  r.angles = angles;
  r.residual = hit.residual;
  r.miss = hit.miss;
  r.trajectory = std::move(hit.trajectory);
  r.iterations = iterations;
  r.converged = r.miss <= tolerance;
  return r;
}

LinkResult failed_result(const AngleParam& angles, std::size_t iterations) {
  LinkResult r;
  r.angles = angles;
  r.residual = Vec2::Constant(std::numeric_limits<double>::quiet_NaN());
  r.miss = std::numeric_limits<double>::infinity();
  r.iterations = iterations;
  return r;
}

Mat2 straight_jacobian(const LinkProblem& p, const AngleParam& at) {
  constexpr double h = 1e-6;
  Mat2 jac;
  const Vec2 u = as_vec(at);
  for (int k = 0; k < 2; ++k) {
    Vec2 du = Vec2::Zero();
    du[k] = h;
    const auto gp = straight_residual(as_angles(u + du), p);
    const auto gm = straight_residual(as_angles(u - du), p);
    if (!gp || !gm) return 2.0 * Mat2::Identity();
    jac.col(k) = (*gp - *gm) / (2.0 * h);
  }
  if (!std::isfinite(jac.determinant()) || std::abs(jac.determinant()) < 1e-12) return 2.0 * Mat2::Identity();
  return jac;
}

}  // namespace

std::string_view to_string(LinkMethod method) {
  switch (method) {
    case LinkMethod::Secant: return "secant";
    case LinkMethod::RegulaFalsi: return "regula-falsi";
    case LinkMethod::Broyden: return "broyden";
  }
  return "unknown";
}

LinkMethod link_method_from_string(std::string_view name) {
  if (name == "secant") return LinkMethod::Secant;
  if (name == "regula-falsi") return LinkMethod::RegulaFalsi;
  if (name == "broyden") return LinkMethod::Broyden;
  throw std::invalid_argument("unknown link method '" + std::string(name) +
                              "' (expected secant, regula-falsi or broyden)");
}

void LinkProblem::validate() const {
  if (dim != 2 && dim != 3) throw std::invalid_argument("link problem dimension must be 2 or 3");
  if (field == nullptr) throw std::invalid_argument("link problem has no field");
  if (!(ds > 0.0)) throw std::invalid_argument("link step size must be positive");
  if (!(tolerance > 0.0)) throw std::invalid_argument("link tolerance must be positive");
  if (!(radius > 0.0)) throw std::invalid_argument("detection radius must be positive");
  if ((emitter - receiver).norm() <= 1e-12 * radius) throw std::invalid_argument("emitter and receiver coincide");
}

LaunchFrame LinkProblem::frame() const {
  LaunchFrame f;
  f.aim = (receiver - emitter).normalized();
  if (dim == 2) {
    f.pole = Vec3::UnitZ();
  } else {
    const Vec3 n = f.aim.cross(center - emitter);
    f.pole = n.norm() > 1e-9 * radius ? n.normalized() : any_perpendicular(f.aim);
  }
  f.side = f.pole.cross(f.aim);
  return f;
}

TraceConfig LinkProblem::trace_config() const {
  TraceConfig cfg;
  cfg.ds = ds;
  cfg.algorithm = algorithm;
  cfg.reference_speed = reference_speed;
  cfg.stop.surface = StopCondition::Surface{center, radius};
  cfg.stop.max_steps = max_steps > 0 ? max_steps : static_cast<std::size_t>(std::ceil(8.0 * radius / ds)) + 16;
  return cfg;
}

Vec3 LinkProblem::direction(const AngleParam& a) const {
  if (dim == 2) return Vec3(std::cos(a.azimuth), std::sin(a.azimuth), 0.0);
  const LaunchFrame f = frame();
  const double s = std::sin(a.polar);
  return s * std::cos(a.azimuth) * f.aim + s * std::sin(a.azimuth) * f.side + std::cos(a.polar) * f.pole;
}

AngleParam LinkProblem::angles_of(const Vec3& d) const {
  const Vec3 u = d.normalized();
  if (dim == 2) return {std::atan2(u.y(), u.x()), std::numbers::pi / 2.0};
  const LaunchFrame f = frame();
  return {std::atan2(u.dot(f.side), u.dot(f.aim)), std::acos(std::clamp(u.dot(f.pole), -1.0, 1.0))};
}

AngleParam LinkProblem::straight_aim() const { return angles_of(receiver - emitter); }

std::optional<Interception> link_residual(const AngleParam& angles, const LinkProblem& problem) {
  Trajectory t = trace(RayState{problem.emitter, problem.direction(angles)}, *problem.field, problem.trace_config());
  if (t.termination != Termination::SurfaceInterception) return std::nullopt;
  Interception hit;
  hit.residual = surface_residual(t.positions.back(), problem);
  hit.miss = (t.positions.back() - problem.receiver).norm();
  hit.trajectory = std::move(t);
  return hit;
}

std::optional<Vec2> straight_residual(const AngleParam& angles, const LinkProblem& problem) {
  const Vec3 d = problem.direction(angles);
  const double t = -2.0 * d.dot(problem.emitter - problem.center);
  if (!(t > 0.0)) return std::nullopt;
  return surface_residual(problem.emitter + t * d, problem);
}

LinkResult link_regula_falsi(const LinkProblem& problem, AngleParam lo, AngleParam hi) {
  problem.validate();
  if (problem.dim != 2) throw std::invalid_argument("regula falsi linking is 2D only");
  std::size_t evals = 0;
  auto eval = [&](double theta) {
    ++evals;
    return link_residual({theta, std::numbers::pi / 2.0}, problem);
  };

  double a = lo.azimuth;
  double b = hi.azimuth;
  auto ga = eval(a);
  auto gb = eval(b);
  // an end that leaves the array is pulled halfway in; a valid bracket
  // without a sign change is doubled about its midpoint
  for (int adjust = 0, widen = 0; adjust < 10 && !(ga && gb && ga->residual[0] * gb->residual[0] <= 0.0);
       ++adjust) {
    if (!ga && gb) {
      a = 0.5 * (a + b);
      ga = eval(a);
    } else if (!gb && ga) {
      b = 0.5 * (a + b);
      gb = eval(b);
    } else if (ga && gb && widen < 3) {
      ++widen;
      const double mid = 0.5 * (a + b);
      const double half = b - a;
      a = mid - half;
      b = mid + half;
      ga = eval(a);
      gb = eval(b);
    } else {
      break;
    }
  }
  if (!(ga && gb && ga->residual[0] * gb->residual[0] <= 0.0))
    throw std::invalid_argument("regula falsi bracket does not change sign");

  const std::size_t base = evals;
  if (ga->miss <= problem.tolerance) return make_result({a, std::numbers::pi / 2.0}, std::move(*ga), 0, problem.tolerance);
  if (gb->miss <= problem.tolerance) return make_result({b, std::numbers::pi / 2.0}, std::move(*gb), 0, problem.tolerance);

  double fa = ga->residual[0];
  double fb = gb->residual[0];
  constexpr std::size_t kCap = 60;
  const std::size_t cap = std::max(problem.max_iterations, kCap);
  std::optional<Interception> best;
  double best_theta = a;
  while (evals - base < cap && std::abs(b - a) > 1e-13) {
    double c = (a * fb - b * fa) / (fb - fa);
    if (!(c > std::min(a, b) && c < std::max(a, b))) c = 0.5 * (a + b);
    auto gc = eval(c);
    if (!gc) {
      c = 0.5 * (a + b);
      gc = eval(c);
      if (!gc) break;
    }
    const double fc = gc->residual[0];
    const bool done = gc->miss <= problem.tolerance;
    best = std::move(gc);
    best_theta = c;
    if (done || fc == 0.0) break;
    if (fc * fb < 0.0) {
      a = b;
      fa = fb;
    } else {
      fa *= 0.5;
    }
    b = c;
    fb = fc;
  }
  if (!best) return failed_result({best_theta, std::numbers::pi / 2.0}, evals - base);
  return make_result({wrap_angle(best_theta), std::numbers::pi / 2.0}, std::move(*best), evals - base,
                     problem.tolerance);
}

namespace {

// Second secant seed from one Newton step with the straight-ray slope at
// theta; falls back to a fixed offset where the straight ray misses.
double newton_seed(const LinkProblem& problem, double theta, double residual) {
  const double h = 1e-4;
  const auto up = straight_residual({theta + h, std::numbers::pi / 2.0}, problem);
  const auto down = straight_residual({theta - h, std::numbers::pi / 2.0}, problem);
  if (up && down) {
    const double slope = (up->x() - down->x()) / (2.0 * h);
    const double step = -residual / slope;
    if (std::isfinite(step) && std::abs(step) > 0.0 && std::abs(step) < 10.0 * kDegree) return theta + step;
  }
  return theta + 0.5 * kDegree;
}

}  // namespace

LinkResult link_secant(const LinkProblem& problem, AngleParam first, AngleParam second) {
  problem.validate();
  if (problem.dim != 2) throw std::invalid_argument("secant linking is 2D only");
  auto eval = [&](double theta) { return link_residual({theta, std::numbers::pi / 2.0}, problem); };
  auto finish = [&](double theta, Interception&& hit, std::size_t it) {
    return make_result({wrap_angle(theta), std::numbers::pi / 2.0}, std::move(hit), it, problem.tolerance);
  };

  double t0 = first.azimuth;
  auto g0 = eval(t0);
  if (!g0) return failed_result(first, 0);
  if (g0->miss <= problem.tolerance) return finish(t0, std::move(*g0), 0);

  std::size_t it = 1;
  double t1 = second.azimuth;
  if (t1 == t0) t1 = newton_seed(problem, t0, g0->residual[0]);
  auto g1 = eval(t1);
  if (!g1) {
    t1 = 2.0 * t0 - t1;
    ++it;
    g1 = eval(t1);
    if (!g1) return finish(t0, std::move(*g0), it);
  }

  bool perturbed = false;
  while (g1->miss > problem.tolerance && it < problem.max_iterations) {
    const double denom = g1->residual[0] - g0->residual[0];
    if (std::abs(denom) < 1e-14) {
      if (perturbed) break;
      perturbed = true;
      t0 = t1 + 0.25 * kDegree;
      g0 = eval(t0);
      ++it;
      if (!g0) break;
      continue;
    }
    double t2 = t1 - g1->residual[0] * (t1 - t0) / denom;
    std::optional<Interception> g2;
    for (int shrink = 0; shrink < 6 && it < problem.max_iterations; ++shrink) {
      ++it;
      g2 = eval(t2);
      if (g2) break;
      t2 = 0.5 * (t1 + t2);
    }
    if (!g2) break;
    t0 = t1;
    g0 = std::move(g1);
    t1 = t2;
    g1 = std::move(g2);
  }
  if (!g1) return failed_result({t1, std::numbers::pi / 2.0}, it);
  return finish(t1, std::move(*g1), it);
}

LinkResult link_broyden(const LinkProblem& problem, AngleParam initial) {
  problem.validate();
  if (problem.dim != 3) throw std::invalid_argument("Broyden linking is 3D only");
  std::optional<Interception> last;
  auto g = [&](const Vec2& u) -> std::optional<Vec2> {
    auto hit = link_residual(as_angles(u), problem);
    if (!hit) return std::nullopt;
    const Vec2 r = hit->residual;
    last = std::move(hit);
    return r;
  };
  auto done = [&](const Vec2&) { return last && last->miss <= problem.tolerance; };
  const BroydenOutcome out =
      broyden_solve(g, done, as_vec(initial), straight_jacobian(problem, initial), problem.max_iterations);
  if (!last) return failed_result(initial, out.iterations);
  return make_result(as_angles(out.u), std::move(*last), out.iterations, problem.tolerance);
}

LinkProblem make_problem(const ArrayGeometry& geometry, std::size_t emitter, std::size_t receiver,
                         const Sampler& field, const LinkConfig& config) {
  LinkProblem p;
  p.dim = geometry.dim;
  p.emitter = geometry.emitters.at(emitter);
  p.receiver = geometry.receivers.at(receiver);
  p.center = geometry.center;
  p.radius = geometry.radius;
  p.field = &field;
  p.algorithm = config.algorithm;
  const double h = field.spec().spacing;
  p.ds = config.ds > 0.0 ? config.ds : h;
  p.tolerance = config.tolerance > 0.0 ? config.tolerance : h;
  p.max_iterations = config.max_iterations > 0 ? config.max_iterations : (geometry.dim == 2 ? 20 : 30);
  p.reference_speed = config.reference_speed;
  return p;
}

namespace {

LinkMethod resolve_method(const ArrayGeometry& geometry, const LinkConfig& config) {
  const LinkMethod method =
      config.method.value_or(geometry.dim == 2 ? LinkMethod::Secant : LinkMethod::Broyden);
  if ((method == LinkMethod::Broyden) != (geometry.dim == 3))
    throw std::invalid_argument("link method " + std::string(to_string(method)) + " does not apply in " +
                                std::to_string(geometry.dim) + "D");
  return method;
}

LinkResult link_one(const ArrayGeometry& geometry, std::size_t e, std::size_t r, const Sampler& field,
                    const LinkConfig& config, LinkMethod method, bool uniform, const AngleParam* warm) {
  if (!geometry.pair_valid(e, r)) {
    LinkResult out;
    out.valid_pair = false;
    out.miss = std::numeric_limits<double>::infinity();
    return out;
  }
  const LinkProblem p = make_problem(geometry, e, r, field, config);
  const AngleParam aim = p.straight_aim();
  try {
    if (uniform) {
      auto hit = link_residual(aim, p);
      return hit ? make_result(aim, std::move(*hit), 0, p.tolerance) : failed_result(aim, 0);
    }
    const AngleParam start = warm ? *warm : aim;
    switch (method) {
      case LinkMethod::Secant:
        return warm ? link_secant(p, start, start) : link_secant(p, start, {start.azimuth + 0.5 * kDegree, start.polar});
      case LinkMethod::RegulaFalsi:
        return link_regula_falsi(p, {start.azimuth - 10.0 * kDegree, start.polar},
                                 {start.azimuth + 10.0 * kDegree, start.polar});
      case LinkMethod::Broyden:
        return link_broyden(p, start);
    }
  } catch (const std::exception&) {
  }
  return failed_result(aim, 0);
}

}  // namespace

LinkResult link_pair(const ArrayGeometry& geometry, std::size_t emitter, std::size_t receiver, const Sampler& field,
                     const LinkConfig& config, const AngleParam* warm) {
  geometry.validate();
  if (field.spec().dim != geometry.dim) throw std::invalid_argument("field and array dimensions differ");
  if (emitter >= geometry.emitter_count() || receiver >= geometry.receiver_count())
    throw std::invalid_argument("transducer index out of range");
  return link_one(geometry, emitter, receiver, field, config, resolve_method(geometry, config),
                  field.field().is_uniform(), warm);
}

std::vector<LinkResult> link_all(const ArrayGeometry& geometry, const Sampler& field, const LinkConfig& config,
                                 const std::vector<LinkResult>* warm) {
  geometry.validate();
  if (field.spec().dim != geometry.dim) throw std::invalid_argument("field and array dimensions differ");
  if (warm && warm->size() != geometry.pair_count()) throw std::invalid_argument("warm-start table size mismatch");
  const LinkMethod method = resolve_method(geometry, config);
  const bool uniform = field.field().is_uniform();

  std::vector<LinkResult> table(geometry.pair_count());
  parallel_for(table.size(), config.threads, [&](std::size_t i) {
    const std::size_t e = i / geometry.receiver_count();
    const std::size_t r = i % geometry.receiver_count();
    const AngleParam* start = (warm && (*warm)[i].converged) ? &(*warm)[i].angles : nullptr;
    table[i] = link_one(geometry, e, r, field, config, method, uniform, start);
  });
  return table;
}

}  // namespace raytomo
