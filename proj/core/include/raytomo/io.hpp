#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "raytomo/geometry.hpp"
#include "raytomo/linker.hpp"
#include "raytomo/paraxial.hpp"
#include "raytomo/tof.hpp"
#include "raytomo/validate.hpp"

namespace raytomo {

// Binary field file, all little-endian:
//
//   char[4]  "RTF1"
//   u32      dim
//   u32      kind (FieldKind order)
//   u32      counts[dim]
//   f64      spacing
//   f64      origin[dim]
//   f64      values[prod(counts)], GridSpec::flat order
void write_field(const std::filesystem::path& path, const ScalarField& field);
ScalarField read_field(const std::filesystem::path& path);

/// Text import of nodal values, one "i,j,value" (2D) or "i,j,k,value"
/// (3D) line per node, in any order. Blank lines, '#' comments and a
/// non-numeric header line are skipped. Every node must appear exactly
/// once.
ScalarField read_field_csv(const std::filesystem::path& path, const GridSpec& spec, FieldKind kind);

/// Counterpart of read_field_csv with an "i,j[,k],value" header.
void write_field_csv(const std::filesystem::path& path, const ScalarField& field);

/// Fixed-precision rendering used by every CSV writer ("%.17g").
std::string format_number(double v);

/// index,s,x,y[,z] for every `thin`-th sample plus the last one.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj, int dim, std::size_t thin = 4);

/// index,s,distance: distance of every sample from `center`.
void write_center_distance_csv(const std::filesystem::path& path, const Trajectory& traj, const Vec3& center);

/// emitter_id,receiver_id,azimuth,polar,iterations,converged,residual_norm,
/// miss,travel_time,acoustic_length for every valid pair.
void write_link_csv(const std::filesystem::path& path, const std::vector<LinkResult>& links,
                    const ArrayGeometry& geometry);

/// emitter_id,receiver_id,tof_s,valid.
void write_tof_csv(const std::filesystem::path& path, const ToFTable& table);

/// Reads emitter_id,receiver_id,tof_s with an optional fourth valid
/// column (0/1). The array sizes come from the caller.
ToFTable read_tof_csv(const std::filesystem::path& path, std::size_t emitters, std::size_t receivers);

/// s,T,J,A_geom,attenuation,kappa,x,y,z,overlay_x,overlay_y,overlay_z,
/// where the overlay is x + 0.01 dx of the first paraxial solution.
void write_greens_csv(const std::filesystem::path& path, const Trajectory& traj, const GreensParams& params);

/// experiment,dim,algorithm,ratio,value_percent,rays,failed.
void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricResult>& rows);

/// iteration,residual_norm,update_norm,rmse,relative_rmse,linked,rows,
/// median_link_iterations,damped.
void write_run_log(const std::filesystem::path& path, const std::vector<IterationLog>& log);

}  // namespace raytomo
