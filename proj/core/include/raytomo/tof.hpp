#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/SparseCore>

#include "raytomo/geometry.hpp"
#include "raytomo/linker.hpp"

namespace raytomo {

struct ToFEntry {
  std::size_t emitter = 0;
  std::size_t receiver = 0;
  double tof = 0.0;  // seconds
  bool valid = true;
};

/// Measured or synthetic first-arrival times, at most one per pair.
struct ToFTable {
  std::size_t emitters = 0;
  std::size_t receivers = 0;
  std::vector<ToFEntry> entries;

  /// Throws std::invalid_argument on out-of-range ids, duplicate pairs or
  /// a valid entry with non-positive or non-finite time.
  void validate() const;

  /// Valid times by pair index (e * receivers + r); nullopt elsewhere.
  std::vector<std::optional<double>> by_pair() const;
};

/// Path-length system of one linearisation. Row k belongs to pair
/// pairs[k]; pairs without a usable link or measurement are listed in
/// `skipped` instead of contributing a zero row.
struct SparseSystem {
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
  Eigen::VectorXd residual;  // measured - modelled, seconds
  std::vector<std::size_t> pairs;
  std::vector<std::size_t> skipped;

  std::size_t rows() const { return static_cast<std::size_t>(matrix.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(matrix.cols()); }
};

/// Link tolerance used for travel-time work when LinkConfig::tolerance is
/// 0, in grid cells. A ray that misses its receiver by delta carries a
/// time error up to delta / c, so the miss has to sit well below the size
/// of the time perturbations being inverted.
inline constexpr double kToFLinkTolerance = 1e-3;

enum class InnerSolver { SART, CG };

std::string_view to_string(InnerSolver solver);
InnerSolver inner_solver_from_string(std::string_view name);

struct InversionConfig {
  InnerSolver solver = InnerSolver::SART;
  std::size_t inner_iterations = 0;  // 0: 5 SART sweeps or 10 CG iterations
  std::size_t outer_iterations = 10;
  double c0 = 1500.0;
  double relaxation = 1.0;  // SART lambda, in (0, 2)
  double stop_threshold = 1e-4;  // on |du| / |u|
  Backend backend = Backend::Bilinear;
  LinkConfig link;  // tolerance 0: kToFLinkTolerance cells

  void validate() const;
  std::size_t effective_inner_iterations() const;
};

/// Links every pair on the slowness of `speed` (tolerance 0 means
/// kToFLinkTolerance cells) and records travel times plus zero-mean
/// Gaussian noise of standard deviation `noise_sigma`, drawn from a
/// generator seeded with `seed`. Unlinked pairs come back invalid. When
/// `links` is given it receives the link table.
ToFTable synth_tofs(const ScalarField& speed, const ArrayGeometry& geometry, const LinkConfig& link,
                    Backend backend, double noise_sigma, std::uint64_t seed,
                    std::vector<LinkResult>* links = nullptr);

/// One row per converged, measured pair. Throws std::invalid_argument
/// when no pair is usable.
SparseSystem assemble_system(const std::vector<LinkResult>& links, const ToFTable& measured,
                             const GridSpec& grid, Backend backend);

/// One SART sweep on A u = b starting from `u`:
/// u_j += lambda * sum_i(a_ij r_i / R_i) / C_j with r = b - A u and row
/// and column sums R, C. Empty rows and columns are skipped.
Eigen::VectorXd sart_step(const SparseSystem& system, const Eigen::VectorXd& u, double lambda);

/// `sweeps` SART sweeps from zero.
Eigen::VectorXd sart_solve(const SparseSystem& system, std::size_t sweeps, double lambda);

struct CgResult {
  Eigen::VectorXd u;
  std::vector<double> residual_norms;  // |b - A u| after each iteration, starting with u = 0
  bool breakdown = false;
};

/// Conjugate gradients on the normal equations (CGLS) from zero. Stops
/// early once the normal-equation residual vanishes.
CgResult cg_solve(const SparseSystem& system, std::size_t iterations);

struct IterationLog {
  std::size_t iteration = 0;
  double residual_norm = 0.0;  // misfit of the field entering the iteration
  double update_norm = 0.0;    // |du| / |u|
  double rmse = 0.0;           // sqrt(mean((c - c_true)^2)); NaN without truth
  double relative_rmse = 0.0;  // |c - c_true| / |c_true|
  std::size_t linked = 0;
  std::size_t rows = 0;
  double median_link_iterations = 0.0;
  bool damped = false;  // divergence guard halved this update
};

struct ReconstructionResult {
  std::vector<ScalarField> speeds;  // homogeneous start, then one per outer iteration
  std::vector<IterationLog> log;    // entry 0 describes the start
  bool converged = false;           // update norm fell below the threshold
  bool diverging = false;           // the guard fired at least once
};

/// Iteratively linearised inversion in slowness. Every outer iteration
/// re-links all pairs on the current field, warm-started from the
/// previous angles, solves the linear subproblem and updates the field.
/// If the residual grows in two consecutive iterations the update is
/// halved.
ReconstructionResult reconstruct(const ToFTable& measured, const ArrayGeometry& geometry, const GridSpec& grid,
                                 const InversionConfig& config, const ScalarField* truth = nullptr);

/// Root-mean-square difference of two fields on the same grid.
double rmse(const ScalarField& a, const ScalarField& b);

}  // namespace raytomo
