#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "raytomo/io.hpp"
#include "raytomo/phantom.hpp"

namespace fs = std::filesystem;
using namespace raytomo;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::path(testing::TempDir()) / ("raytomo_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string first_line(const fs::path& p) {
  std::ifstream is(p);
  std::string line;
  std::getline(is, line);
  return line;
}

}  // namespace

TEST(Io, NumbersRoundTrip) {
  for (double v : {0.1, 1.0 / 3, 1e-300, -2.5e7}) EXPECT_EQ(std::stod(format_number(v)), v);
}

TEST(Io, BinaryFieldRoundTrip) {
  const fs::path dir = scratch("field");
  for (int dim : {2, 3}) {
    const GridSpec g = GridSpec::centered(dim, Vec3(0.1, -0.2, dim == 3 ? 0.3 : 0.0), 0.05, 0.01);
    const ScalarField f = rasterize(BlobPhantom{1500.0, {Blob{Vec3(0.1, -0.2, 0), 0.02, 20.0}}}, g);
    const fs::path p = dir / ("f" + std::to_string(dim) + ".rtf");
    write_field(p, f);
    const ScalarField back = read_field(p);
    EXPECT_EQ(back.spec(), f.spec());
    EXPECT_EQ(back.kind(), f.kind());
    EXPECT_EQ(back.values(), f.values());
    EXPECT_EQ(slurp(p).substr(0, 4), "RTF1");
  }
}

TEST(Io, BinaryFieldErrors) {
  const fs::path dir = scratch("field_errors");
  EXPECT_THROW(read_field(dir / "missing.rtf"), std::runtime_error);
  std::ofstream(dir / "bad.rtf") << "NOPE and more bytes";
  EXPECT_THROW(read_field(dir / "bad.rtf"), std::runtime_error);
  const GridSpec g = GridSpec::centered(2, Vec3::Zero(), 0.05, 0.01);
  write_field(dir / "ok.rtf", ScalarField(g, 1.0, FieldKind::Slowness));
  fs::resize_file(dir / "ok.rtf", fs::file_size(dir / "ok.rtf") - 8);
  EXPECT_THROW(read_field(dir / "ok.rtf"), std::runtime_error);
}

TEST(Io, FieldCsvRoundTrip) {
  const fs::path dir = scratch("field_csv");
  const GridSpec g = GridSpec::centered(2, Vec3::Zero(), 0.03, 0.01);
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1400.0 + 0.1 * static_cast<double>(i);
  const ScalarField f(g, v, FieldKind::SoundSpeed);
  write_field_csv(dir / "f.csv", f);
  EXPECT_EQ(first_line(dir / "f.csv"), "i,j,value");
  EXPECT_EQ(read_field_csv(dir / "f.csv", g, FieldKind::SoundSpeed).values(), v);
}

TEST(Io, FieldCsvImportRules) {
  const fs::path dir = scratch("field_import");
  GridSpec g;
  g.counts = {4, 4, 1};
  std::ostringstream all;
  all << "# comment\n\n";
  for (int i = 3; i >= 0; --i)
    for (int j = 0; j < 4; ++j) all << i << ',' << j << ',' << 10 * i + j + 1 << '\n';
  std::ofstream(dir / "any_order.csv") << all.str();
  const ScalarField f = read_field_csv(dir / "any_order.csv", g, FieldKind::SoundSpeed);
  EXPECT_EQ(f.at(2, 3), 24.0);

  std::ofstream(dir / "dup.csv") << all.str() << "0,0,5\n";
  EXPECT_THROW(read_field_csv(dir / "dup.csv", g, FieldKind::SoundSpeed), std::runtime_error);
  std::ofstream(dir / "short.csv") << "0,0,1\n";
  EXPECT_THROW(read_field_csv(dir / "short.csv", g, FieldKind::SoundSpeed), std::runtime_error);
  std::ofstream(dir / "range.csv") << all.str() << "4,0,1\n";
  EXPECT_THROW(read_field_csv(dir / "range.csv", g, FieldKind::SoundSpeed), std::runtime_error);
}

TEST(Io, TofCsvRoundTrip) {
  const fs::path dir = scratch("tof");
  const ToFTable t{3, 3, {{0, 1, 6.25e-5, true}, {2, 0, 1.0 / 15000, true}, {1, 2, 7e-5, false}}};
  write_tof_csv(dir / "tof.csv", t);
  EXPECT_EQ(first_line(dir / "tof.csv"), "emitter_id,receiver_id,tof_s,valid");
  const ToFTable back = read_tof_csv(dir / "tof.csv", 3, 3);
  ASSERT_EQ(back.entries.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back.entries[i].emitter, t.entries[i].emitter);
    EXPECT_EQ(back.entries[i].tof, t.entries[i].tof);
    EXPECT_EQ(back.entries[i].valid, t.entries[i].valid);
  }
}

TEST(Io, TofCsvErrors) {
  const fs::path dir = scratch("tof_errors");
  std::ofstream(dir / "three.csv") << "emitter_id,receiver_id,tof_s\n0,1,1e-5\n";
  EXPECT_EQ(read_tof_csv(dir / "three.csv", 2, 2).entries.size(), 1u);
  std::ofstream(dir / "range.csv") << "emitter_id,receiver_id,tof_s\n0,5,1e-5\n";
  EXPECT_THROW(read_tof_csv(dir / "range.csv", 2, 2), std::exception);
  std::ofstream(dir / "garbage.csv") << "emitter_id,receiver_id,tof_s\n0,1,soon\n";
  EXPECT_THROW(read_tof_csv(dir / "garbage.csv", 2, 2), std::exception);
  EXPECT_THROW(read_tof_csv(dir / "missing.csv", 2, 2), std::exception);
}

TEST(Io, TrajectoryCsvThinning) {
  const fs::path dir = scratch("traj");
  const GridSpec g = GridSpec::centered(2, Vec3::Zero(), 1.0, 0.05);
  TraceConfig c;
  c.ds = 0.05;
  c.stop.max_steps = 10;
  const Trajectory t = trace({Vec3::Zero(), Vec3::UnitX()}, BSplineSampler(ScalarField(g, 1.0, FieldKind::RefractiveIndex)), c);
  write_trajectory_csv(dir / "t.csv", t, 2, 4);
  std::ifstream is(dir / "t.csv");
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(is, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 1u + 4);  // samples 0, 4, 8 and the last (10)
  EXPECT_EQ(lines[0], "index,s,x,y");
  EXPECT_EQ(lines.back().substr(0, 3), "10,");
  write_center_distance_csv(dir / "d.csv", t, Vec3::Zero());
  EXPECT_EQ(first_line(dir / "d.csv"), "index,s,distance");
}

TEST(Io, TableHeaders) {
  const fs::path dir = scratch("headers");
  write_metrics_csv(dir / "m.csv", {MetricResult{}});
  EXPECT_EQ(first_line(dir / "m.csv"), "experiment,dim,algorithm,ratio,value_percent,rays,failed");
  write_run_log(dir / "r.csv", {IterationLog{}});
  EXPECT_EQ(first_line(dir / "r.csv"),
            "iteration,residual_norm,update_norm,rmse,relative_rmse,linked,rows,median_link_iterations,damped");
  const ArrayGeometry a = ArrayGeometry::ring(2, 2, Vec3::Zero(), 0.1);
  write_link_csv(dir / "l.csv", std::vector<LinkResult>(4), a);
  EXPECT_EQ(first_line(dir / "l.csv"),
            "emitter_id,receiver_id,azimuth,polar,iterations,converged,residual_norm,miss,travel_time,acoustic_length");
}

TEST(Io, WritersCreateParentDirectories) {
  const fs::path dir = scratch("nested");
  write_tof_csv(dir / "a" / "b" / "tof.csv", ToFTable{2, 2, {}});
  EXPECT_TRUE(fs::exists(dir / "a" / "b" / "tof.csv"));
}
