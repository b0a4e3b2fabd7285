#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "raytomo/interp.hpp"
#include "raytomo/phantom.hpp"

using namespace raytomo;

namespace {

template <typename Fn>
ScalarField tabulate(const GridSpec& g, Fn&& f) {
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(g.node(i));
  return ScalarField(g, std::move(v), FieldKind::Absorption);  // signed values allowed
}

double weight_sum(const NodeWeights& w) {
  return std::accumulate(w.begin(), w.end(), 0.0, [](double s, const auto& p) { return s + p.second; });
}

const GridSpec kGrid2 = GridSpec::centered(2, Vec3::Zero(), 1.0, 0.125);
const GridSpec kGrid3 = GridSpec::centered(3, Vec3::Zero(), 0.5, 0.125);

}  // namespace

TEST(Interp, BackendNames) {
  EXPECT_EQ(backend_from_string(to_string(Backend::BSpline)), Backend::BSpline);
  EXPECT_EQ(backend_from_string("bilinear"), Backend::Bilinear);
  EXPECT_THROW(backend_from_string("nearest"), std::invalid_argument);
}

TEST(Interp, BilinearAtNodeIsExact) {
  const ScalarField f = tabulate(kGrid2, [](const Vec3& x) { return std::sin(3 * x.x()) + x.y() * x.y(); });
  const BilinearSampler s(f);
  const std::size_t idx = kGrid2.flat(5, 11);
  EXPECT_DOUBLE_EQ(s.value(kGrid2.node(idx)), f[idx]);
  const NodeWeights w = interp_weights(kGrid2, kGrid2.node(idx), Backend::Bilinear);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w[0].first, idx);
  EXPECT_DOUBLE_EQ(w[0].second, 1.0);
}

TEST(Interp, BilinearVoxelCenterHasQuarterWeights) {
  const Vec3 x = kGrid2.node(3, 4) + Vec3(0.0625, 0.0625, 0);
  const NodeWeights w = interp_weights(kGrid2, x, Backend::Bilinear);
  ASSERT_EQ(w.size(), 4u);
  for (const auto& [node, weight] : w) EXPECT_NEAR(weight, 0.25, 1e-15);
}

TEST(Interp, BilinearReproducesLinearFields) {
  const BilinearSampler s(tabulate(kGrid2, [](const Vec3& x) { return 2 * x.x() + 3; }));
  for (const Vec3 x : {Vec3(0.1, 0.2, 0), Vec3(-0.77, 0.31, 0), Vec3(0.99, -0.99, 0)}) {
    const InterpSample v = s.sample(x);
    EXPECT_NEAR(v.value, 2 * x.x() + 3, 1e-12);
    EXPECT_TRUE(v.gradient.isApprox(Vec3(2, 0, 0), 1e-12));
    EXPECT_FALSE(v.hessian.has_value());
  }
}

TEST(Interp, BilinearFisheyeOnTheUnitCircle) {
  const GridSpec g = fisheye_grid(2, 1.0, 1.5);
  const BilinearSampler s(rasterize(FisheyePhantom{}, g));
  // (0, 1) falls between nodes; the error is second order in the spacing
  EXPECT_NEAR(s.value(Vec3(0, 1, 0)), 0.5, 1e-4);
  const Vec3 node = g.node(g.flat((g.counts[0] - 1) / 2, g.counts[1] - 30));
  EXPECT_DOUBLE_EQ(s.value(node), fisheye_index(node, 1.0, 1.0));
}

TEST(Interp, OutsideTheGridIsADomainExit) {
  const BSplineSampler b(ScalarField(kGrid2, 1.0, FieldKind::SoundSpeed));
  const BilinearSampler l(ScalarField(kGrid2, 1.0, FieldKind::SoundSpeed));
  const Vec3 out(1.01, 0, 0);
  EXPECT_FALSE(b.try_sample(out));
  EXPECT_FALSE(l.try_value(out));
  EXPECT_THROW(b.sample(out), DomainExit);
  EXPECT_THROW(l.value(out), DomainExit);
  EXPECT_THROW(interp_weights(kGrid2, out, Backend::BSpline), DomainExit);
  EXPECT_NO_THROW(b.sample(Vec3(1, 1, 0)));
}

TEST(Interp, BasisIsAPartitionOfUnity) {
  for (double t : {0.0, 0.2, 0.5, 0.9, 1.0}) {
    const CubicBasis c = cubic_bspline_basis(t);
    EXPECT_NEAR(c.w[0] + c.w[1] + c.w[2] + c.w[3], 1.0, 1e-15);
    EXPECT_NEAR(c.dw[0] + c.dw[1] + c.dw[2] + c.dw[3], 0.0, 1e-15);
    EXPECT_NEAR(c.ddw[0] + c.ddw[1] + c.ddw[2] + c.ddw[3], 0.0, 1e-14);
    for (double w : c.w) EXPECT_GE(w, 0.0);
  }
  const CubicBasis at0 = cubic_bspline_basis(0.0);
  EXPECT_NEAR(at0.w[0], 1.0 / 6, 1e-15);
  EXPECT_NEAR(at0.w[1], 4.0 / 6, 1e-15);
}

TEST(Interp, PrefilterThenBasisInterpolatesTheSamples) {
  const std::vector<double> samples{1.0, -2.0, 0.5, 3.0, 4.0, -1.0, 2.0};
  std::vector<double> c = samples;
  prefilter_line(c);
  ASSERT_EQ(c.size(), samples.size());
  const std::size_t n = c.size();
  // the outer coefficients come from cubic extrapolation
  const double lo = 4 * c[0] - 6 * c[1] + 4 * c[2] - c[3];
  const double hi = 4 * c[n - 1] - 6 * c[n - 2] + 4 * c[n - 3] - c[n - 4];
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i == 0 ? lo : c[i - 1];
    const double right = i + 1 == n ? hi : c[i + 1];
    EXPECT_NEAR((left + 4 * c[i] + right) / 6, samples[i], 1e-12) << i;
  }
  std::vector<double> tiny{1.0, 2.0, 3.0};
  EXPECT_THROW(prefilter_line(tiny), std::invalid_argument);
}

TEST(Interp, BSplineReproducesCubics2D) {
  auto f = [](const Vec3& x) { return x.x() * x.x() * x.x() - 2 * x.x() * x.y() * x.y() + x.y() + 0.5; };
  const BSplineSampler s(tabulate(kGrid2, f));
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const Vec3 x(u(rng), u(rng), 0);
    const InterpSample v = s.sample(x);
    ASSERT_TRUE(v.hessian.has_value());
    EXPECT_NEAR(v.value, f(x), 1e-10);
    const Vec3 grad(3 * x.x() * x.x() - 2 * x.y() * x.y(), -4 * x.x() * x.y() + 1, 0);
    EXPECT_NEAR((v.gradient - grad).norm(), 0.0, 1e-9);
    Mat3 hess = Mat3::Zero();
    hess(0, 0) = 6 * x.x();
    hess(0, 1) = hess(1, 0) = -4 * x.y();
    hess(1, 1) = -4 * x.x();
    EXPECT_NEAR((*v.hessian - hess).norm(), 0.0, 1e-8);
  }
}

TEST(Interp, BSplineReproducesCubics3D) {
  auto f = [](const Vec3& x) { return x.x() * x.y() * x.z() + x.z() * x.z() * x.z() - x.y() * x.y(); };
  const BSplineSampler s(tabulate(kGrid3, f));
  for (const Vec3 x : {Vec3(0.1, 0.2, -0.3), Vec3(0.49, -0.5, 0.5), Vec3(-0.01, 0.33, 0.07)}) {
    const InterpSample v = s.sample(x);
    EXPECT_NEAR(v.value, f(x), 1e-10);
    EXPECT_NEAR(v.gradient.z(), x.x() * x.y() + 3 * x.z() * x.z(), 1e-9);
    EXPECT_NEAR((*v.hessian)(0, 2), x.y(), 1e-8);
  }
}

TEST(Interp, BSplineConstantHasZeroDerivatives) {
  const BSplineSampler s(ScalarField(kGrid3, 7.0, FieldKind::SoundSpeed));
  const InterpSample v = s.sample(Vec3(0.21, -0.13, 0.4));
  EXPECT_NEAR(v.value, 7.0, 1e-12);
  EXPECT_NEAR(v.gradient.norm(), 0.0, 1e-12);
  EXPECT_NEAR(v.hessian->norm(), 0.0, 1e-10);
}

TEST(Interp, BSplineFisheyeGradientMagnitude) {
  const BSplineSampler s(rasterize(FisheyePhantom{}, fisheye_grid(2, 1.0, 1.0)));
  // analytic |grad n| = 2r / (1 + r^2)^2 = 0.64 at r = 0.5
  EXPECT_NEAR(s.sample(Vec3(0, 0.5, 0)).gradient.norm(), 0.64, 1e-4);
  EXPECT_NEAR(s.sample(Vec3(0.3, 0.4, 0)).gradient.norm(), 0.64, 1e-4);
}

TEST(Interp, WeightsAreNonNegativeAndSumToOne) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 40; ++k) {
    const Vec3 x2(u(rng), u(rng), 0);
    const NodeWeights b = interp_weights(kGrid2, x2, Backend::BSpline);
    EXPECT_NEAR(weight_sum(b), 1.0, 1e-12);
    for (const auto& [node, w] : b) {
      EXPECT_GT(w, 0.0);
      EXPECT_LT(node, kGrid2.size());
    }
    EXPECT_NEAR(weight_sum(interp_weights(kGrid2, x2, Backend::Bilinear)), 1.0, 1e-12);
    const Vec3 x3 = 0.5 * Vec3(u(rng), u(rng), u(rng));
    EXPECT_NEAR(weight_sum(interp_weights(kGrid3, x3, Backend::BSpline)), 1.0, 1e-12);
  }
  // a generic interior point touches the full 4 x 4 stencil
  EXPECT_EQ(interp_weights(kGrid2, Vec3(0.01, 0.02, 0), Backend::BSpline).size(), 16u);
}

TEST(Interp, MakeSamplerPicksTheBackend) {
  const ScalarField f(kGrid2, 1.0, FieldKind::SoundSpeed);
  EXPECT_EQ(make_sampler(f, Backend::Bilinear)->backend(), Backend::Bilinear);
  EXPECT_EQ(make_sampler(f, Backend::BSpline)->backend(), Backend::BSpline);
}
