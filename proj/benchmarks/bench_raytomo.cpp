#include <benchmark/benchmark.h>

#include <random>

#include "raytomo/linker.hpp"
#include "raytomo/phantom.hpp"
#include "raytomo/tof.hpp"
#include "raytomo/validate.hpp"

using namespace raytomo;

namespace {

const BlobPhantom kBlob{1500.0, {Blob{Vec3(0.02, 0.01, 0), 0.025, 45.0}}};

std::unique_ptr<Sampler> blob_slowness(const GridSpec& g, Backend backend) {
  return make_sampler(reciprocal(rasterize(kBlob, g), FieldKind::Slowness), backend);
}

void BM_SampleBSpline(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const BSplineSampler s(rasterize(FisheyePhantom{}, fisheye_grid(dim, 1.0, 1.2)));
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec3> points(1024);
  for (Vec3& p : points) p = Vec3(u(rng), u(rng), dim == 3 ? u(rng) : 0.0);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(s.sample(points[i++ & 1023]));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SampleBSpline)->Arg(2)->Arg(3);

void BM_SampleBilinear(benchmark::State& state) {
  const BilinearSampler s(rasterize(FisheyePhantom{}, fisheye_grid(2, 1.0, 1.2)));
  const Vec3 x(0.123, -0.456, 0);
  for (auto _ : state) benchmark::DoNotOptimize(s.sample(x));
}
BENCHMARK(BM_SampleBilinear);

void BM_TraceFisheyeLoop(benchmark::State& state) {
  const auto alg = static_cast<StepAlgorithm>(state.range(0));
  const FisheyeBench bench(2, FisheyeExperiment::Radius);
  const TraceConfig c = bench.trace_config(alg, 1.0);
  const RayState start = bench.launches().front();
  for (auto _ : state) benchmark::DoNotOptimize(trace(start, bench.sampler(), c));
  state.SetLabel(std::string(to_string(alg)));
}
BENCHMARK(BM_TraceFisheyeLoop)->DenseRange(0, 3)->Unit(benchmark::kMicrosecond);

void BM_LinkAllRing(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const ArrayGeometry array = ArrayGeometry::ring(n, n, Vec3::Zero(), 0.1);
  const auto field = blob_slowness(array.square_grid(64, 0.01), Backend::BSpline);
  LinkConfig cfg;
  cfg.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(link_all(array, *field, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * (n - 1)));
}
BENCHMARK(BM_LinkAllRing)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_LinkAllSphere(benchmark::State& state) {
  const ArrayGeometry array = ArrayGeometry::sphere(16, 16, Vec3::Zero(), 0.1);
  const auto field = blob_slowness(array.square_grid(32, 0.01), Backend::BSpline);
  LinkConfig cfg;
  cfg.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(link_all(array, *field, cfg));
}
BENCHMARK(BM_LinkAllSphere)->Unit(benchmark::kMillisecond);

struct RingSystem {
  RingSystem() {
    const ArrayGeometry array = ArrayGeometry::ring(32, 32, Vec3::Zero(), 0.1);
    const GridSpec g = array.square_grid(64, 0.01);
    std::vector<LinkResult> links;
    LinkConfig cfg;
    cfg.threads = 1;
    const ToFTable t = synth_tofs(rasterize(kBlob, g), array, cfg, Backend::Bilinear, 0.0, 1);
    links = link_all(array, BilinearSampler(ScalarField(g, 1.0 / 1500, FieldKind::Slowness)), cfg);
    system = assemble_system(links, t, g, Backend::Bilinear);
  }
  SparseSystem system;
};

const SparseSystem& ring_system() {
  static const RingSystem s;
  return s.system;
}

void BM_SartSweep(benchmark::State& state) {
  const SparseSystem& sys = ring_system();
  Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sys.cols()));
  for (auto _ : state) {
    u = sart_step(sys, u, 1.0);
    benchmark::DoNotOptimize(u.data());
  }
}
BENCHMARK(BM_SartSweep)->Unit(benchmark::kMicrosecond);

void BM_CgSolve(benchmark::State& state) {
  const SparseSystem& sys = ring_system();
  for (auto _ : state) benchmark::DoNotOptimize(cg_solve(sys, 10));
}
BENCHMARK(BM_CgSolve)->Unit(benchmark::kMicrosecond);

void BM_AssembleSystem(benchmark::State& state) {
  const ArrayGeometry array = ArrayGeometry::ring(32, 32, Vec3::Zero(), 0.1);
  const GridSpec g = array.square_grid(64, 0.01);
  LinkConfig cfg;
  cfg.threads = 1;
  std::vector<LinkResult> links;
  const ToFTable t = synth_tofs(rasterize(kBlob, g), array, cfg, Backend::BSpline, 0.0, 1, &links);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_system(links, t, g, Backend::BSpline));
}
BENCHMARK(BM_AssembleSystem)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
