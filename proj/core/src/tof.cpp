#include "raytomo/tof.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace raytomo {

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
  return m;
}

LinkConfig tof_link(const LinkConfig& link, const GridSpec& grid) {
  LinkConfig cfg = link;
  cfg.reference_speed = 1.0;
  if (cfg.tolerance == 0.0) cfg.tolerance = kToFLinkTolerance * grid.spacing;
  return cfg;
}

ScalarField speed_of(const GridSpec& grid, const Eigen::VectorXd& slowness) {
  std::vector<double> c(slowness.size());
  for (Eigen::Index i = 0; i < slowness.size(); ++i) c[static_cast<std::size_t>(i)] = 1.0 / slowness[i];
  return ScalarField(grid, std::move(c), FieldKind::SoundSpeed);
}

}  // namespace

void ToFTable::validate() const {
  std::vector<char> seen(emitters * receivers, 0);
  for (const ToFEntry& e : entries) {
    if (e.emitter >= emitters || e.receiver >= receivers) throw std::invalid_argument("ToF entry id out of range");
    char& s = seen[e.emitter * receivers + e.receiver];
    if (s) throw std::invalid_argument("duplicate ToF entry for emitter " + std::to_string(e.emitter) +
                                       ", receiver " + std::to_string(e.receiver));
    s = 1;
    if (e.valid && !(std::isfinite(e.tof) && e.tof > 0.0)) throw std::invalid_argument("ToF must be positive");
  }
}

std::vector<std::optional<double>> ToFTable::by_pair() const {
  std::vector<std::optional<double>> out(emitters * receivers);
  for (const ToFEntry& e : entries) {
    if (e.valid) out.at(e.emitter * receivers + e.receiver) = e.tof;
  }
  return out;
}

std::string_view to_string(InnerSolver solver) { return solver == InnerSolver::SART ? "sart" : "cg"; }

InnerSolver inner_solver_from_string(std::string_view name) {
  if (name == "sart") return InnerSolver::SART;
  if (name == "cg") return InnerSolver::CG;
  throw std::invalid_argument("unknown inner solver '" + std::string(name) + "' (expected sart or cg)");
}

void InversionConfig::validate() const {
  if (outer_iterations < 1) throw std::invalid_argument("outer iterations must be at least 1");
  if (!(c0 > 0.0)) throw std::invalid_argument("initial sound speed must be positive");
  if (!(relaxation > 0.0 && relaxation < 2.0)) throw std::invalid_argument("SART relaxation must lie in (0, 2)");
  if (!(stop_threshold >= 0.0)) throw std::invalid_argument("stop threshold must be non-negative");
}

std::size_t InversionConfig::effective_inner_iterations() const {
  if (inner_iterations > 0) return inner_iterations;
  return solver == InnerSolver::SART ? 5 : 10;
}

ToFTable synth_tofs(const ScalarField& speed, const ArrayGeometry& geometry, const LinkConfig& link,
                    Backend backend, double noise_sigma, std::uint64_t seed, std::vector<LinkResult>* links) {
  if (speed.kind() != FieldKind::SoundSpeed) throw std::invalid_argument("synthetic data needs a sound-speed field");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise level must be non-negative");
  const auto sampler = make_sampler(reciprocal(speed, FieldKind::Slowness), backend);
  auto table = link_all(geometry, *sampler, tof_link(link, speed.spec()));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, noise_sigma > 0.0 ? noise_sigma : 1.0);
  ToFTable out;
  out.emitters = geometry.emitter_count();
  out.receivers = geometry.receiver_count();
  for (std::size_t i = 0; i < table.size(); ++i) {
    const LinkResult& r = table[i];
    if (!r.valid_pair) continue;
    ToFEntry e;
    e.emitter = i / out.receivers;
    e.receiver = i % out.receivers;
    e.valid = r.converged;
    e.tof = r.converged ? r.trajectory.time : 0.0;
    if (e.valid && noise_sigma > 0.0) e.tof += noise(rng);
    if (e.valid && !(e.tof > 0.0)) e.valid = false;
    out.entries.push_back(e);
  }
  if (links) *links = std::move(table);
  return out;
}

SparseSystem assemble_system(const std::vector<LinkResult>& links, const ToFTable& measured, const GridSpec& grid,
                             Backend backend) {
  const auto data = measured.by_pair();
  if (data.size() != links.size()) throw std::invalid_argument("link table and ToF table cover different arrays");
  SparseSystem sys;
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<double> residual;
  for (std::size_t i = 0; i < links.size(); ++i) {
    const LinkResult& l = links[i];
    if (!l.valid_pair) continue;
    if (!l.converged || !data[i]) {
      sys.skipped.push_back(i);
      continue;
    }
    const auto row = static_cast<int>(sys.pairs.size());
    for (const auto& [node, w] : system_row(l.trajectory, grid, backend)) {
      triplets.emplace_back(row, static_cast<int>(node), w);
    }
    residual.push_back(*data[i] - l.trajectory.time);
    sys.pairs.push_back(i);
  }
  if (sys.pairs.empty()) throw std::invalid_argument("no linked pair with a measurement; the system is empty");
  sys.matrix.resize(static_cast<Eigen::Index>(sys.pairs.size()), static_cast<Eigen::Index>(grid.size()));
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  sys.residual = Eigen::Map<Eigen::VectorXd>(residual.data(), static_cast<Eigen::Index>(residual.size()));
  return sys;
}

Eigen::VectorXd sart_step(const SparseSystem& system, const Eigen::VectorXd& u, double lambda) {
  const auto& a = system.matrix;
  if (a.rows() == 0) throw std::invalid_argument("SART needs a non-empty system");
  if (u.size() != a.cols()) throw std::invalid_argument("SART iterate has the wrong size");
  const Eigen::VectorXd row_sum = a * Eigen::VectorXd::Ones(a.cols());
  const Eigen::VectorXd col_sum = a.transpose() * Eigen::VectorXd::Ones(a.rows());
  Eigen::VectorXd r = system.residual - a * u;
  for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = row_sum[i] != 0.0 ? r[i] / row_sum[i] : 0.0;
  Eigen::VectorXd back = a.transpose() * r;
  Eigen::VectorXd out = u;
  for (Eigen::Index j = 0; j < out.size(); ++j) {
    if (col_sum[j] != 0.0) out[j] += lambda * back[j] / col_sum[j];
  }
  return out;
}

Eigen::VectorXd sart_solve(const SparseSystem& system, std::size_t sweeps, double lambda) {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(system.matrix.cols());
  for (std::size_t k = 0; k < sweeps; ++k) u = sart_step(system, u, lambda);
  return u;
}

CgResult cg_solve(const SparseSystem& system, std::size_t iterations) {
  const auto& a = system.matrix;
  if (a.rows() == 0) throw std::invalid_argument("CG needs a non-empty system");
  CgResult out;
  out.u = Eigen::VectorXd::Zero(a.cols());
  Eigen::VectorXd r = system.residual;
  Eigen::VectorXd s = a.transpose() * r;
  Eigen::VectorXd p = s;
  double gamma = s.squaredNorm();
  const double gamma0 = gamma;
  out.residual_norms.push_back(r.norm());
  for (std::size_t k = 0; k < iterations && gamma > 1e-32 * gamma0 && gamma > 0.0; ++k) {
    const Eigen::VectorXd q = a * p;
    const double delta = q.squaredNorm();
    if (!(delta > 0.0)) {
      out.breakdown = true;
      break;
    }
    const double alpha = gamma / delta;
    out.u += alpha * p;
    r -= alpha * q;
    s = a.transpose() * r;
    const double gamma_next = s.squaredNorm();
    p = s + (gamma_next / gamma) * p;
    gamma = gamma_next;
    out.residual_norms.push_back(r.norm());
  }
  return out;
}

double rmse(const ScalarField& a, const ScalarField& b) {
  if (!(a.spec() == b.spec())) throw std::invalid_argument("fields live on different grids");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(sum / static_cast<double>(a.values().size()));
}

ReconstructionResult reconstruct(const ToFTable& measured, const ArrayGeometry& geometry, const GridSpec& grid,
                                 const InversionConfig& config, const ScalarField* truth) {
  config.validate();
  measured.validate();
  grid.validate();
  if (measured.emitters != geometry.emitter_count() || measured.receivers != geometry.receiver_count())
    throw std::invalid_argument("ToF table does not match the array");
  if (truth && !(truth->spec() == grid)) throw std::invalid_argument("truth field lives on a different grid");

  double truth_norm = 0.0;
  if (truth) truth_norm = Eigen::Map<const Eigen::VectorXd>(truth->values().data(),
                                                            static_cast<Eigen::Index>(truth->values().size())).norm();
  auto score = [&](IterationLog& log, const ScalarField& c) {
    log.rmse = truth ? rmse(c, *truth) : std::numeric_limits<double>::quiet_NaN();
    log.relative_rmse = truth ? log.rmse * std::sqrt(static_cast<double>(grid.size())) / truth_norm
                              : std::numeric_limits<double>::quiet_NaN();
  };

  ReconstructionResult out;
  Eigen::VectorXd u = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(grid.size()), 1.0 / config.c0);
  out.speeds.push_back(speed_of(grid, u));
  IterationLog start;
  score(start, out.speeds.back());
  out.log.push_back(start);

  std::vector<LinkResult> previous;
  std::vector<double> misfits;
  for (std::size_t k = 1; k <= config.outer_iterations; ++k) {
    const ScalarField slowness(grid, std::vector<double>(u.data(), u.data() + u.size()), FieldKind::Slowness);
    const auto sampler = make_sampler(slowness, config.backend);
    auto links = link_all(geometry, *sampler, tof_link(config.link, grid), previous.empty() ? nullptr : &previous);
    const SparseSystem sys = assemble_system(links, measured, grid, config.backend);

    IterationLog log;
    log.iteration = k;
    log.residual_norm = sys.residual.norm();
    log.rows = sys.rows();
    std::vector<double> its;
    for (const LinkResult& l : links) {
      if (l.converged) {
        ++log.linked;
        its.push_back(static_cast<double>(l.iterations));
      }
    }
    log.median_link_iterations = median(its);
    misfits.push_back(log.residual_norm);

    const std::size_t inner = config.effective_inner_iterations();
    Eigen::VectorXd du = config.solver == InnerSolver::SART ? sart_solve(sys, inner, config.relaxation)
                                                            : cg_solve(sys, inner).u;
    const std::size_t m = misfits.size();
    if (m >= 3 && misfits[m - 1] > misfits[m - 2] && misfits[m - 2] > misfits[m - 3]) {
      du *= 0.5;
      log.damped = true;
      out.diverging = true;
    }
    u += du;
    if ((u.array() <= 0.0).any()) throw std::runtime_error("slowness update produced a non-positive value");
    log.update_norm = du.norm() / u.norm();

    out.speeds.push_back(speed_of(grid, u));
    score(log, out.speeds.back());
    out.log.push_back(log);
    previous = std::move(links);
    if (log.update_norm < config.stop_threshold) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace raytomo
