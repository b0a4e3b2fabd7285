#include "raytomo/io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace raytomo {

namespace {

constexpr char kMagic[4] = {'R', 'T', 'F', '1'};

template <typename U>
void put_le(std::ostream& os, U v) {
  std::array<char, sizeof(U)> b;
  for (std::size_t i = 0; i < sizeof(U); ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b.data(), b.size());
}

template <typename U>
U get_le(std::istream& is, const std::filesystem::path& path) {
  std::array<unsigned char, sizeof(U)> b;
  if (!is.read(reinterpret_cast<char*>(b.data()), b.size()))
    throw std::runtime_error("truncated field file " + path.string());
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(b[i]) << (8 * i);
  return v;
}

void put_f64(std::ostream& os, double v) { put_le(os, std::bit_cast<std::uint64_t>(v)); }
double get_f64(std::istream& is, const std::filesystem::path& path) {
  return std::bit_cast<double>(get_le<std::uint64_t>(is, path));
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, mode | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream is(path, mode);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  return is;
}

// Splits a CSV line into numbers; false if any field is not numeric.
bool parse_numbers(const std::string& line, std::vector<double>& out) {
  out.clear();
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto first = cell.find_first_not_of(" \t\r");
    if (first == std::string::npos) return false;
    cell = cell.substr(first, cell.find_last_not_of(" \t\r") - first + 1);
    std::size_t used = 0;
    try {
      out.push_back(std::stod(cell, &used));
    } catch (const std::exception&) {
      return false;
    }
    if (used != cell.size()) return false;
  }
  return !out.empty();
}

bool skippable(const std::string& line) {
  const auto first = line.find_first_not_of(" \t\r");
  return first == std::string::npos || line[first] == '#';
}

void finish(std::ofstream& os, const std::filesystem::path& path) {
  os.flush();
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_field(const std::filesystem::path& path, const ScalarField& field) {
  const GridSpec& g = field.spec();
  auto os = open_out(path, std::ios::binary);
  os.write(kMagic, 4);
  put_le(os, static_cast<std::uint32_t>(g.dim));
  put_le(os, static_cast<std::uint32_t>(field.kind()));
  for (int a = 0; a < g.dim; ++a) put_le(os, static_cast<std::uint32_t>(g.counts[a]));
  put_f64(os, g.spacing);
  for (int a = 0; a < g.dim; ++a) put_f64(os, g.origin[a]);
  for (double v : field.values()) put_f64(os, v);
  finish(os, path);
}

ScalarField read_field(const std::filesystem::path& path) {
  auto is = open_in(path, std::ios::binary);
  char magic[4];
  if (!is.read(magic, 4) || !std::equal(magic, magic + 4, kMagic))
    throw std::runtime_error(path.string() + " is not a field file (bad magic)");
  GridSpec g;
  const auto dim = get_le<std::uint32_t>(is, path);
  if (dim != 2 && dim != 3) throw std::runtime_error(path.string() + ": unsupported dimension " + std::to_string(dim));
  g.dim = static_cast<int>(dim);
  const auto kind = get_le<std::uint32_t>(is, path);
  if (kind > static_cast<std::uint32_t>(FieldKind::Absorption))
    throw std::runtime_error(path.string() + ": unknown field kind " + std::to_string(kind));
  g.counts = {1, 1, 1};
  for (int a = 0; a < g.dim; ++a) g.counts[a] = static_cast<int>(get_le<std::uint32_t>(is, path));
  g.spacing = get_f64(is, path);
  g.origin = Vec3::Zero();
  for (int a = 0; a < g.dim; ++a) g.origin[a] = get_f64(is, path);
  g.validate();
  std::vector<double> values(g.size());
  for (double& v : values) v = get_f64(is, path);
  if (is.peek() != std::char_traits<char>::eof()) throw std::runtime_error(path.string() + ": trailing bytes");
  return ScalarField(g, std::move(values), static_cast<FieldKind>(kind));
}

ScalarField read_field_csv(const std::filesystem::path& path, const GridSpec& spec, FieldKind kind) {
  spec.validate();
  auto is = open_in(path);
  std::vector<double> values(spec.size(), 0.0);
  std::vector<char> seen(spec.size(), 0);
  std::string line;
  std::vector<double> cells;
  std::size_t lineno = 0;
  bool header_allowed = true;
  const std::size_t width = static_cast<std::size_t>(spec.dim) + 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (skippable(line)) continue;
    const bool numeric = parse_numbers(line, cells);
    if (!numeric && header_allowed) {
      header_allowed = false;
      continue;
    }
    header_allowed = false;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (!numeric || cells.size() != width)
      throw std::runtime_error(where + ": expected " + std::to_string(width) + " numeric columns");
    std::array<int, 3> idx{0, 0, 0};
    for (int a = 0; a < spec.dim; ++a) {
      const double c = cells[static_cast<std::size_t>(a)];
      if (c != std::floor(c) || c < 0 || c >= spec.counts[a]) throw std::runtime_error(where + ": node index out of range");
      idx[a] = static_cast<int>(c);
    }
    const std::size_t flat = spec.flat(idx[0], idx[1], idx[2]);
    if (seen[flat]) throw std::runtime_error(where + ": node listed twice");
    seen[flat] = 1;
    values[flat] = cells.back();
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) throw std::runtime_error(path.string() + ": node " + std::to_string(i) + " has no value");
  }
  return ScalarField(spec, std::move(values), kind);
}

void write_field_csv(const std::filesystem::path& path, const ScalarField& field) {
  auto os = open_out(path);
  const GridSpec& g = field.spec();
  os << (g.dim == 2 ? "i,j,value\n" : "i,j,k,value\n");
  for (std::size_t n = 0; n < g.size(); ++n) {
    const auto idx = g.unflat(n);
    os << idx[0] << ',' << idx[1];
    if (g.dim == 3) os << ',' << idx[2];
    os << ',' << format_number(field[n]) << '\n';
  }
  finish(os, path);
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj, int dim, std::size_t thin) {
  if (thin == 0) throw std::invalid_argument("trajectory thinning must be at least 1");
  auto os = open_out(path);
  os << (dim == 3 ? "index,s,x,y,z\n" : "index,s,x,y\n");
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (i % thin != 0 && i + 1 != traj.size()) continue;
    const Vec3& x = traj.positions[i];
    os << i << ',' << format_number(traj.arc[i]) << ',' << format_number(x.x()) << ',' << format_number(x.y());
    if (dim == 3) os << ',' << format_number(x.z());
    os << '\n';
  }
  finish(os, path);
}

void write_center_distance_csv(const std::filesystem::path& path, const Trajectory& traj, const Vec3& center) {
  auto os = open_out(path);
  os << "index,s,distance\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    os << i << ',' << format_number(traj.arc[i]) << ',' << format_number((traj.positions[i] - center).norm()) << '\n';
  }
  finish(os, path);
}

void write_link_csv(const std::filesystem::path& path, const std::vector<LinkResult>& links,
                    const ArrayGeometry& geometry) {
  if (links.size() != geometry.pair_count()) throw std::invalid_argument("link table does not match the array");
  auto os = open_out(path);
  os << "emitter_id,receiver_id,azimuth,polar,iterations,converged,residual_norm,miss,travel_time,acoustic_length\n";
  for (std::size_t i = 0; i < links.size(); ++i) {
    const LinkResult& l = links[i];
    if (!l.valid_pair) continue;
    const bool traced = !l.trajectory.empty();
    os << i / geometry.receiver_count() << ',' << i % geometry.receiver_count() << ','
       << format_number(l.angles.azimuth) << ',' << format_number(l.angles.polar) << ',' << l.iterations << ','
       << (l.converged ? 1 : 0) << ',' << format_number(l.residual.norm()) << ',' << format_number(l.miss) << ','
       << format_number(traced ? l.trajectory.time : NAN) << ',' << format_number(traced ? l.trajectory.length : NAN)
       << '\n';
  }
  finish(os, path);
}

void write_tof_csv(const std::filesystem::path& path, const ToFTable& table) {
  auto os = open_out(path);
  os << "emitter_id,receiver_id,tof_s,valid\n";
  for (const ToFEntry& e : table.entries) {
    os << e.emitter << ',' << e.receiver << ',' << format_number(e.tof) << ',' << (e.valid ? 1 : 0) << '\n';
  }
  finish(os, path);
}

ToFTable read_tof_csv(const std::filesystem::path& path, std::size_t emitters, std::size_t receivers) {
  auto is = open_in(path);
  ToFTable t;
  t.emitters = emitters;
  t.receivers = receivers;
  std::string line;
  std::vector<double> cells;
  std::size_t lineno = 0;
  bool header_allowed = true;
  while (std::getline(is, line)) {
    ++lineno;
    if (skippable(line)) continue;
    const bool numeric = parse_numbers(line, cells);
    if (!numeric && header_allowed) {
      header_allowed = false;
      continue;
    }
    header_allowed = false;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (!numeric || (cells.size() != 3 && cells.size() != 4))
      throw std::runtime_error(where + ": expected emitter_id,receiver_id,tof_s[,valid]");
    if (cells[0] < 0 || cells[1] < 0 || cells[0] != std::floor(cells[0]) || cells[1] != std::floor(cells[1]))
      throw std::runtime_error(where + ": ids must be non-negative integers");
    ToFEntry e;
    e.emitter = static_cast<std::size_t>(cells[0]);
    e.receiver = static_cast<std::size_t>(cells[1]);
    e.tof = cells[2];
    e.valid = cells.size() == 3 || cells[3] != 0.0;
    t.entries.push_back(e);
  }
  try {
    t.validate();
  } catch (const std::invalid_argument& err) {
    throw std::runtime_error(path.string() + ": " + err.what());
  }
  return t;
}

void write_greens_csv(const std::filesystem::path& path, const Trajectory& traj, const GreensParams& p) {
  if (p.size() != traj.size()) throw std::invalid_argument("parameters do not belong to this ray");
  auto os = open_out(path);
  os << "s,T,J,A_geom,attenuation,kappa,x,y,z,overlay_x,overlay_y,overlay_z\n";
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Vec3& x = traj.positions[i];
    const Vec3 o = x + 0.01 * p.offset[i];
    os << format_number(p.arc[i]) << ',' << format_number(p.time[i]) << ',' << format_number(p.jacobian[i]) << ','
       << format_number(p.amplitude[i]) << ',' << format_number(p.attenuation[i]) << ',' << p.caustics[i];
    for (double v : {x.x(), x.y(), x.z(), o.x(), o.y(), o.z()}) os << ',' << format_number(v);
    os << '\n';
  }
  finish(os, path);
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricResult>& rows) {
  auto os = open_out(path);
  os << "experiment,dim,algorithm,ratio,value_percent,rays,failed\n";
  for (const MetricResult& r : rows) {
    os << to_string(r.experiment) << ',' << r.dim << ',' << to_string(r.algorithm) << ',' << format_number(r.ratio)
       << ',' << format_number(r.value) << ',' << r.ray_count << ',' << r.failed.size() << '\n';
  }
  finish(os, path);
}

void write_run_log(const std::filesystem::path& path, const std::vector<IterationLog>& log) {
  auto os = open_out(path);
  os << "iteration,residual_norm,update_norm,rmse,relative_rmse,linked,rows,median_link_iterations,damped\n";
  for (const IterationLog& l : log) {
    os << l.iteration << ',' << format_number(l.residual_norm) << ',' << format_number(l.update_norm) << ','
       << format_number(l.rmse) << ',' << format_number(l.relative_rmse) << ',' << l.linked << ',' << l.rows << ','
       << format_number(l.median_link_iterations) << ',' << (l.damped ? 1 : 0) << '\n';
  }
  finish(os, path);
}

}  // namespace raytomo
