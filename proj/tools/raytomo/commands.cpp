#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <memory>
#include <string>
#include <vector>

#include "raytomo/io.hpp"
#include "raytomo/paraxial.hpp"

namespace raytomo::cli {

namespace {

namespace fs = std::filesystem;

std::string padded(std::size_t i, int width = 3) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*zu", width, i);
  return buf;
}

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string pair_name(std::size_t e, std::size_t r) { return "e" + padded(e) + "_r" + padded(r); }

struct TracedField {
  std::unique_ptr<Sampler> sampler;
  double reference_speed = 1.0;
};

// Index fields are traced as they are; sound speed becomes slowness so that
// the acoustic length is the travel time.
TracedField build_field(const FieldSource& src, const GridSpec& grid, Backend backend) {
  ScalarField f = src.phantom ? rasterize(*src.phantom, grid) : read_field(src.file);
  TracedField out;
  switch (f.kind()) {
    case FieldKind::RefractiveIndex:
      out.reference_speed = src.reference_speed;
      break;
    case FieldKind::SoundSpeed:
      f = reciprocal(f, FieldKind::Slowness);
      break;
    case FieldKind::Slowness:
      break;
    case FieldKind::Absorption:
      throw std::invalid_argument("absorption fields cannot be traced");
  }
  out.sampler = make_sampler(std::move(f), backend);
  return out;
}

void list_failed_pairs(const std::vector<LinkResult>& links, const ArrayGeometry& geo, std::ostream& err,
                       std::size_t& failed) {
  for (std::size_t i = 0; i < links.size(); ++i) {
    const LinkResult& l = links[i];
    if (!l.valid_pair || l.converged) continue;
    ++failed;
    err << "unlinked pair: emitter " << i / geo.receiver_count() << ", receiver " << i % geo.receiver_count()
        << " (miss " << short_number(l.miss) << ")\n";
  }
}

}  // namespace

int cmd_validate_fisheye(const ValidateRun& run, const CommonOptions& common, std::ostream& log, std::ostream& err) {
  std::vector<MetricResult> rows;
  std::size_t failed = 0;
  for (int dim : run.dims) {
    for (FisheyeExperiment exp : run.experiments) {
      const FisheyeBench bench(dim, exp, run.a, run.n0);
      for (StepAlgorithm alg : run.algorithms) {
        for (double ratio : run.ratios) {
          const bool dump = run.trajectory_ratio && *run.trajectory_ratio == ratio;
          std::vector<Trajectory> traced;
          MetricResult m = bench.run(alg, ratio, common.threads, dump ? &traced : nullptr);
          log << dim << "D " << to_string(exp) << ' ' << to_string(alg) << " ratio " << short_number(ratio) << ": "
              << (exp == FisheyeExperiment::Radius ? "RE_rd " : "RE_al ") << short_number(m.value) << "%\n";
          for (std::size_t ray : m.failed) {
            ++failed;
            err << "failed ray: " << dim << "D " << to_string(exp) << ' ' << to_string(alg) << " ratio "
                << short_number(ratio) << " ray " << ray << '\n';
          }
          const std::string stem = std::to_string(dim) + "d_" + std::string(to_string(exp)) + "_" +
                                   std::string(to_string(alg)) + "_ray";
          for (std::size_t i = 0; i < traced.size(); ++i) {
            const fs::path dir = common.out / "trajectories";
            write_trajectory_csv(dir / (stem + padded(i) + ".csv"), traced[i], dim, run.thin);
            if (exp == FisheyeExperiment::Radius)
              write_center_distance_csv(dir / (stem + padded(i) + "_distance.csv"), traced[i],
                                        bench.reference().center);
          }
          rows.push_back(std::move(m));
        }
      }
    }
  }
  write_metrics_csv(common.out / "metrics.csv", rows);
  log << "wrote " << rows.size() << " metric rows to " << (common.out / "metrics.csv").string() << '\n';
  return failed == 0 ? kExitOk : kExitPartial;
}

int cmd_trace(const TraceRun& run, const CommonOptions& common, std::ostream& log, std::ostream&) {
  const TracedField field = build_field(run.field, *run.grid, run.backend);
  TraceConfig cfg;
  cfg.ds = run.ds > 0.0 ? run.ds : run.grid->spacing;
  cfg.algorithm = run.algorithm;
  cfg.stop = run.stop;
  cfg.reference_speed = field.reference_speed;
  const Trajectory t = trace({run.start, run.direction}, *field.sampler, cfg);

  write_trajectory_csv(common.out / "trajectory.csv", t, run.grid->dim, run.thin);
  if (run.center) write_center_distance_csv(common.out / "center_distance.csv", t, *run.center);
  log << "termination " << to_string(t.termination) << ", " << t.size() << " samples, length "
      << format_number(t.length) << ", time " << format_number(t.time) << '\n';
  return kExitOk;
}

int cmd_link(const LinkRun& run, const CommonOptions& common, std::ostream& log, std::ostream& err) {
  const TracedField field = build_field(run.field, *run.grid, run.backend);
  LinkConfig cfg = run.link;
  cfg.reference_speed = field.reference_speed;

  std::vector<LinkResult> links;
  if (run.pair) {
    links.resize(run.array.pair_count());
    for (LinkResult& l : links) l.valid_pair = false;
    const auto [e, r] = *run.pair;
    links[run.array.pair_index(e, r)] = link_pair(run.array, e, r, *field.sampler, cfg);
  } else {
    links = link_all(run.array, *field.sampler, cfg);
  }
  write_link_csv(common.out / "links.csv", links, run.array);

  std::size_t linked = 0, valid = 0, failed = 0;
  for (std::size_t i = 0; i < links.size(); ++i) {
    const LinkResult& l = links[i];
    if (!l.valid_pair) continue;
    ++valid;
    if (!l.converged) continue;
    ++linked;
    if (run.trajectories) {
      const std::size_t e = i / run.array.receiver_count(), r = i % run.array.receiver_count();
      write_trajectory_csv(common.out / "rays" / (pair_name(e, r) + ".csv"), l.trajectory, run.array.dim, run.thin);
    }
  }
  list_failed_pairs(links, run.array, err, failed);
  log << "linked " << linked << " of " << valid << " pairs\n";
  return failed == 0 ? kExitOk : kExitPartial;
}

int cmd_synth(const SynthRun& run, const CommonOptions& common, std::ostream& log, std::ostream& err) {
  const ScalarField truth = rasterize(run.phantom, run.grid);
  std::vector<LinkResult> links;
  const ToFTable tof = synth_tofs(truth, run.array, run.link, run.backend, run.noise_sigma, common.seed, &links);
  write_tof_csv(common.out / "tof.csv", tof);
  write_link_csv(common.out / "links.csv", links, run.array);
  write_field(common.out / "true_speed.rtf", truth);
  write_field_csv(common.out / "true_speed.csv", truth);

  std::size_t failed = 0;
  list_failed_pairs(links, run.array, err, failed);
  log << "synthesised " << tof.entries.size() - failed << " of " << tof.entries.size() << " travel times\n";
  return failed == 0 ? kExitOk : kExitPartial;
}

int cmd_reconstruct(const ReconstructRun& run, const CommonOptions& common, std::ostream& log, std::ostream& err) {
  const ToFTable tof = read_tof_csv(run.tof, run.array.emitter_count(), run.array.receiver_count());
  std::optional<ScalarField> truth;
  if (run.truth) truth = rasterize(*run.truth, run.grid);
  const ReconstructionResult res = reconstruct(tof, run.array, run.grid, run.inversion, truth ? &*truth : nullptr);

  write_run_log(common.out / "run_log.csv", res.log);
  if (run.save_fields) {
    for (std::size_t k = 0; k < res.speeds.size(); ++k)
      write_field(common.out / "fields" / ("speed_" + padded(k) + ".rtf"), res.speeds[k]);
  }
  write_field(common.out / "speed.rtf", res.speeds.back());
  write_field_csv(common.out / "speed.csv", res.speeds.back());
  for (const IterationLog& l : res.log) {
    if (l.iteration == 0) {
      log << "start: homogeneous " << short_number(run.inversion.c0) << " m/s";
      if (truth) log << ", rmse " << short_number(l.rmse) << " m/s";
      log << '\n';
      continue;
    }
    log << "iteration " << l.iteration << ": misfit " << short_number(l.residual_norm) << " s, update "
        << short_number(l.update_norm);
    if (truth) log << ", rmse " << short_number(l.rmse) << " m/s";
    log << ", linked " << l.linked << (l.damped ? " (damped)" : "") << '\n';
  }
  if (res.diverging) err << "warning: misfit grew in consecutive iterations; updates were damped\n";
  log << (res.converged ? "converged" : "stopped after the iteration limit") << '\n';
  return kExitOk;
}

int cmd_greens(const GreensRun& run, const CommonOptions& common, std::ostream& log, std::ostream& err) {
  const TracedField field = build_field(run.field, *run.grid, Backend::BSpline);
  LinkConfig cfg = run.link;
  cfg.reference_speed = field.reference_speed;

  std::unique_ptr<Sampler> absorption;
  if (run.alpha0)
    absorption = make_sampler(ScalarField(*run.grid, *run.alpha0, FieldKind::Absorption), Backend::Bilinear);
  GreensOptions opt;
  opt.s_ref = run.s_ref;
  opt.omega = run.omega;
  opt.y = run.y;
  opt.reference_speed = field.reference_speed;
  opt.absorption = absorption.get();

  std::size_t failed = 0;
  for (const auto& [e, r] : run.pairs) {
    const LinkResult l = link_pair(run.array, e, r, *field.sampler, cfg);
    if (!l.converged) {
      ++failed;
      err << "unlinked pair: emitter " << e << ", receiver " << r << " (miss " << short_number(l.miss) << ")\n";
      continue;
    }
    const GreensParams p = greens_params(l.trajectory, *field.sampler, opt);
    write_greens_csv(common.out / "greens" / (pair_name(e, r) + ".csv"), l.trajectory, p);
    if (run.reverse) {
      const GreensParams back = reverse_ray(l.trajectory, p, *field.sampler, opt);
      write_greens_csv(common.out / "greens" / (pair_name(e, r) + "_reverse.csv"), reverse_trajectory(l.trajectory),
                       back);
    }
    log << "pair " << e << "-" << r << ": time " << format_number(p.time.back()) << ", caustics "
        << p.caustics.back() << '\n';
  }
  return failed == 0 ? kExitOk : kExitPartial;
}

int run(const RunConfig& config, std::ostream& log, std::ostream& err) {
  try {
    std::error_code ec;
    fs::create_directories(config.common.out, ec);
    if (ec) {
      err << "cannot create output directory " << config.common.out.string() << ": " << ec.message() << '\n';
      return kExitConfig;
    }
    return std::visit(
        [&](const auto& c) -> int {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, ValidateRun>) return cmd_validate_fisheye(c, config.common, log, err);
          else if constexpr (std::is_same_v<T, TraceRun>) return cmd_trace(c, config.common, log, err);
          else if constexpr (std::is_same_v<T, LinkRun>) return cmd_link(c, config.common, log, err);
          else if constexpr (std::is_same_v<T, SynthRun>) return cmd_synth(c, config.common, log, err);
          else if constexpr (std::is_same_v<T, ReconstructRun>) return cmd_reconstruct(c, config.common, log, err);
          else return cmd_greens(c, config.common, log, err);
        },
        config.config);
  } catch (const std::exception& e) {
    err << config.command << ": " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace raytomo::cli
