#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "raytomo/phantom.hpp"
#include "raytomo/tof.hpp"

using namespace raytomo;

namespace {

SparseSystem dense_system(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  SparseSystem s;
  s.matrix = a.sparseView();
  s.residual = b;
  for (Eigen::Index i = 0; i < a.rows(); ++i) s.pairs.push_back(static_cast<std::size_t>(i));
  return s;
}

struct RingSetup {
  ArrayGeometry array;
  GridSpec grid;
};

RingSetup ring(std::size_t n, int nodes = 48) {
  RingSetup s{ArrayGeometry::ring(n, n, Vec3::Zero(), 0.1), {}};
  s.grid = s.array.square_grid(nodes, 0.01);
  return s;
}

const BlobPhantom kBlob{1500.0, {Blob{Vec3(0.02, 0.01, 0), 0.025, 45.0}}};

}  // namespace

TEST(ToF, SolverNames) {
  EXPECT_EQ(inner_solver_from_string(to_string(InnerSolver::CG)), InnerSolver::CG);
  EXPECT_EQ(inner_solver_from_string("sart"), InnerSolver::SART);
  EXPECT_THROW(inner_solver_from_string("lsqr"), std::invalid_argument);
}

TEST(ToF, TableValidation) {
  ToFTable t{2, 3, {{0, 1, 1e-5, true}, {1, 2, 2e-5, true}}};
  EXPECT_NO_THROW(t.validate());
  const auto by = t.by_pair();
  ASSERT_EQ(by.size(), 6u);
  EXPECT_EQ(by[1], 1e-5);
  EXPECT_EQ(by[5], 2e-5);
  EXPECT_FALSE(by[0]);

  t.entries.push_back({0, 1, 3e-5, true});
  EXPECT_THROW(t.validate(), std::invalid_argument);  // duplicate pair
  t.entries.pop_back();
  t.entries.push_back({2, 0, 1e-5, true});
  EXPECT_THROW(t.validate(), std::invalid_argument);  // emitter out of range
  t.entries.back() = {1, 0, -1e-5, true};
  EXPECT_THROW(t.validate(), std::invalid_argument);
  t.entries.back().valid = false;
  EXPECT_NO_THROW(t.validate());
  EXPECT_FALSE(t.by_pair()[3]);
}

TEST(ToF, InversionConfigValidation) {
  InversionConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.effective_inner_iterations(), 5u);
  c.solver = InnerSolver::CG;
  EXPECT_EQ(c.effective_inner_iterations(), 10u);
  c.relaxation = 2.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.relaxation = 1.0;
  c.c0 = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(ToF, HomogeneousSynthIsDistanceOverSpeed) {
  const RingSetup s = ring(8);
  const ScalarField c(s.grid, 1500.0, FieldKind::SoundSpeed);
  const ToFTable t = synth_tofs(c, s.array, LinkConfig{}, Backend::Bilinear, 0.0, 1);
  EXPECT_EQ(t.entries.size(), 56u);
  for (const ToFEntry& e : t.entries) {
    ASSERT_TRUE(e.valid);
    EXPECT_NEAR(e.tof, (s.array.receivers[e.receiver] - s.array.emitters[e.emitter]).norm() / 1500.0, 1e-15);
  }
}

TEST(ToF, SynthNoiseHasTheRequestedSpread) {
  const RingSetup s = ring(32);
  const ScalarField c(s.grid, 1500.0, FieldKind::SoundSpeed);
  const ToFTable clean = synth_tofs(c, s.array, LinkConfig{}, Backend::Bilinear, 0.0, 7);
  const ToFTable noisy = synth_tofs(c, s.array, LinkConfig{}, Backend::Bilinear, 10e-9, 7);
  ASSERT_EQ(clean.entries.size(), noisy.entries.size());
  double sum = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < clean.entries.size(); ++i) {
    const double d = noisy.entries[i].tof - clean.entries[i].tof;
    sum += d;
    sq += d * d;
  }
  const double n = static_cast<double>(clean.entries.size());
  const double mean = sum / n, sd = std::sqrt(sq / n - mean * mean);
  EXPECT_LT(std::abs(mean), 4 * 10e-9 / std::sqrt(n));
  EXPECT_NEAR(sd / 10e-9, 1.0, 0.1);
  // same seed, same draw
  const ToFTable again = synth_tofs(c, s.array, LinkConfig{}, Backend::Bilinear, 10e-9, 7);
  for (std::size_t i = 0; i < again.entries.size(); ++i) EXPECT_EQ(again.entries[i].tof, noisy.entries[i].tof);
}

TEST(ToF, InverseCrimeSystemIsExactAtTheTruth) {
  const RingSetup s = ring(16);
  const ScalarField truth = rasterize(kBlob, s.grid);
  std::vector<LinkResult> links;
  const ToFTable t = synth_tofs(truth, s.array, LinkConfig{}, Backend::Bilinear, 0.0, 1, &links);
  const SparseSystem sys = assemble_system(links, t, s.grid, Backend::Bilinear);
  EXPECT_EQ(sys.rows(), 240u);
  EXPECT_EQ(sys.cols(), s.grid.size());
  EXPECT_LT(sys.residual.lpNorm<Eigen::Infinity>(), 1e-18);
  const ScalarField slow = reciprocal(truth, FieldKind::Slowness);
  const Eigen::VectorXd u = Eigen::Map<const Eigen::VectorXd>(slow.values().data(), slow.values().size());
  const Eigen::VectorXd modelled = sys.matrix * u;
  const auto by = t.by_pair();
  for (std::size_t k = 0; k < sys.rows(); ++k)
    EXPECT_NEAR(modelled[static_cast<Eigen::Index>(k)] / *by[sys.pairs[k]], 1.0, 1e-12);
}

TEST(ToF, ToyRingSystemDimensions) {
  // receivers offset from the emitters so that every pair is usable
  ArrayGeometry a = ArrayGeometry::ring(4, 4, Vec3::Zero(), 0.1);
  for (std::size_t k = 0; k < 4; ++k) {
    const double phi = (k + 0.5) * std::numbers::pi / 2;
    a.receivers[k] = 0.1 * Vec3(std::cos(phi), std::sin(phi), 0);
  }
  const GridSpec g = a.square_grid(24, 0.01);
  const ScalarField c(g, 1500.0, FieldKind::SoundSpeed);
  std::vector<LinkResult> links;
  const ToFTable t = synth_tofs(c, a, LinkConfig{}, Backend::Bilinear, 0.0, 1, &links);
  const SparseSystem sys = assemble_system(links, t, g, Backend::Bilinear);
  EXPECT_EQ(sys.rows(), 16u);
  EXPECT_EQ(sys.cols(), g.size());

  // co-located transducers: self pairs contribute no row
  const ArrayGeometry shared = ArrayGeometry::ring(4, 4, Vec3::Zero(), 0.1);
  const ToFTable t2 = synth_tofs(c, shared, LinkConfig{}, Backend::Bilinear, 0.0, 1, &links);
  EXPECT_EQ(assemble_system(links, t2, g, Backend::Bilinear).rows(), 12u);
}

TEST(ToF, UnusablePairsAreSkipped) {
  const RingSetup s = ring(4, 24);
  const ScalarField c(s.grid, 1500.0, FieldKind::SoundSpeed);
  std::vector<LinkResult> links;
  ToFTable t = synth_tofs(c, s.array, LinkConfig{}, Backend::Bilinear, 0.0, 1, &links);
  links[s.array.pair_index(0, 1)].converged = false;
  t.entries.erase(t.entries.begin() + 1);  // pair (0, 2) loses its measurement
  const SparseSystem sys = assemble_system(links, t, s.grid, Backend::Bilinear);
  EXPECT_EQ(sys.rows(), 10u);
  EXPECT_EQ(sys.skipped.size(), 2u);
  for (LinkResult& l : links) l.converged = false;
  EXPECT_THROW(assemble_system(links, t, s.grid, Backend::Bilinear), std::invalid_argument);
}

TEST(ToF, RowSupportIsBoundedByTheStencil) {
  const RingSetup s = ring(8);
  const ScalarField c(s.grid, 1500.0, FieldKind::SoundSpeed);
  std::vector<LinkResult> links;
  const ToFTable t = synth_tofs(c, s.array, LinkConfig{}, Backend::BSpline, 0.0, 1, &links);
  const SparseSystem sys = assemble_system(links, t, s.grid, Backend::BSpline);
  for (std::size_t k = 0; k < sys.rows(); ++k) {
    const auto nnz = static_cast<std::size_t>(sys.matrix.row(static_cast<Eigen::Index>(k)).nonZeros());
    EXPECT_LE(nnz, links[sys.pairs[k]].trajectory.size() * 16);
  }
}

TEST(ToF, SartToyProblems) {
  Eigen::MatrixXd a(2, 2);
  a << 2, 1, 1, 3;
  const Eigen::VectorXd x(Eigen::Vector2d(0.5, -0.25));
  const SparseSystem sys = dense_system(a, a * x);
  EXPECT_LT((sart_solve(sys, 500, 1.0) - x).norm(), 1e-8);

  // zero residual, zero update
  const SparseSystem zero = dense_system(a, Eigen::VectorXd::Zero(2));
  EXPECT_EQ(sart_step(zero, Eigen::VectorXd::Zero(2), 1.0).norm(), 0.0);
  // a fixed point stays put
  EXPECT_LT((sart_step(sys, x, 1.0) - x).norm(), 1e-15);

  // a single row is satisfied after one sweep
  Eigen::MatrixXd r(1, 3);
  r << 1, 2, 0.5;
  const SparseSystem one = dense_system(r, Eigen::VectorXd::Constant(1, 3.0));
  const Eigen::VectorXd u = sart_step(one, Eigen::VectorXd::Zero(3), 1.0);
  EXPECT_NEAR((r * u)(0), 3.0, 1e-14);
  EXPECT_NEAR(u[0], 3.0 / 3.5, 1e-14);  // every touched unknown moves by r / R
}

TEST(ToF, CgToyProblems) {
  Eigen::MatrixXd a(3, 3);
  a << 4, 1, 0, 1, 3, 1, 0, 1, 2;
  const Eigen::VectorXd b(Eigen::Vector3d(1, -2, 0.5));
  const CgResult sq = cg_solve(dense_system(a, b), 3);
  EXPECT_LT((sq.u - a.partialPivLu().solve(b)).norm(), 1e-8);
  for (std::size_t k = 1; k < sq.residual_norms.size(); ++k)
    EXPECT_LE(sq.residual_norms[k], sq.residual_norms[k - 1] * (1 + 1e-12));

  EXPECT_EQ(cg_solve(dense_system(a, Eigen::VectorXd::Zero(3)), 3).u.norm(), 0.0);

  Eigen::MatrixXd tall(5, 3);
  tall << 1, 0, 2, 0, 1, 1, 3, 1, 0, 1, 1, 1, 0, 2, 1;
  const Eigen::VectorXd x(Eigen::Vector3d(0.3, -1, 2));
  EXPECT_LT((cg_solve(dense_system(tall, tall * x), 10).u - x).norm(), 1e-8);
}

TEST(ToF, ExactStartIsAFixedPoint) {
  const RingSetup s = ring(8, 32);
  const ScalarField c(s.grid, 1500.0, FieldKind::SoundSpeed);
  const ToFTable t = synth_tofs(c, s.array, LinkConfig{}, Backend::Bilinear, 0.0, 1);
  InversionConfig cfg;
  cfg.outer_iterations = 3;
  const ReconstructionResult r = reconstruct(t, s.array, s.grid, cfg, &c);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.speeds.size(), 2u);
  EXPECT_LT(r.log.back().update_norm, 1e-12);
  EXPECT_LT(rmse(r.speeds.back(), c), 1e-9);
}

TEST(ToF, ReconstructionApproachesTheTruth) {
  const RingSetup s = ring(32, 64);
  const ScalarField truth = rasterize(kBlob, s.grid);
  const ToFTable t = synth_tofs(truth, s.array, LinkConfig{}, Backend::Bilinear, 0.0, 1);
  InversionConfig cfg;
  cfg.outer_iterations = 5;
  cfg.stop_threshold = 0.0;
  const ReconstructionResult r = reconstruct(t, s.array, s.grid, cfg, &truth);
  ASSERT_EQ(r.log.size(), 6u);
  for (std::size_t k = 1; k < r.log.size(); ++k) {
    EXPECT_LT(r.log[k].relative_rmse, r.log[k - 1].relative_rmse) << k;
    EXPECT_GE(r.log[k].linked, r.log[k].rows);
  }
}

TEST(ToF, SartUpdateIsSmootherThanCg) {
  const RingSetup s = ring(32, 64);
  const ScalarField truth = rasterize(kBlob, s.grid);
  std::vector<LinkResult> links;
  const ToFTable t = synth_tofs(truth, s.array, LinkConfig{}, Backend::Bilinear, 0.0, 1);
  const ScalarField start(s.grid, 1.0 / 1500, FieldKind::Slowness);
  links = link_all(s.array, BilinearSampler(start), LinkConfig{});
  const SparseSystem sys = assemble_system(links, t, s.grid, Backend::Bilinear);
  auto tv = [&](const Eigen::VectorXd& u) {
    double sum = 0.0;
    for (int i = 0; i + 1 < s.grid.counts[0]; ++i)
      for (int j = 0; j + 1 < s.grid.counts[1]; ++j) {
        const double v = u[static_cast<Eigen::Index>(s.grid.flat(i, j))];
        sum += std::abs(u[static_cast<Eigen::Index>(s.grid.flat(i + 1, j))] - v) +
               std::abs(u[static_cast<Eigen::Index>(s.grid.flat(i, j + 1))] - v);
      }
    return sum;
  };
  const Eigen::VectorXd sart = sart_solve(sys, 10, 1.0);
  const Eigen::VectorXd cg = cg_solve(sys, 10).u;
  // compare shapes, not scales
  EXPECT_LT(tv(sart) / sart.norm(), tv(cg) / cg.norm());
}

TEST(ToF, RmseOfFields) {
  const GridSpec g = GridSpec::centered(2, Vec3::Zero(), 0.1, 0.01);
  EXPECT_DOUBLE_EQ(rmse(ScalarField(g, 1500.0, FieldKind::SoundSpeed), ScalarField(g, 1503.0, FieldKind::SoundSpeed)),
                   3.0);
}
