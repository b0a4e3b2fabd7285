#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"
#include "raytomo/io.hpp"

namespace raytomo::cli {

namespace {

using Json = nlohmann::json;

// One JSON object plus its dotted location, for error messages.
class Obj {
 public:
  Obj(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail("must be an object");
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError((where_.empty() ? std::string("config") : where_) + ": " + what);
  }

  [[noreturn]] void fail(const char* key, const std::string& what) const {
    throw ConfigError(name(key) + ": " + what);
  }

  std::string name(const char* key) const { return where_.empty() ? key : where_ + "." + key; }

  void allow(const std::vector<std::string_view>& keys) const {
    for (const auto& item : j_.items()) {
      if (std::find(keys.begin(), keys.end(), item.key()) == keys.end())
        throw ConfigError((where_.empty() ? std::string("config") : where_) + ": unknown key '" + item.key() + "'");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  const Json& at(const char* key) const { return j_.at(key); }

  Obj child(const char* key) const { return Obj(j_.at(key), name(key)); }

  double number(const char* key, double fallback) const {
    if (!has(key)) return fallback;
    const Json& v = at(key);
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }

  double positive(const char* key, double fallback) const {
    const double v = number(key, fallback);
    if (!(v > 0.0) || !std::isfinite(v)) fail(key, "must be positive");
    return v;
  }

  double non_negative(const char* key, double fallback) const {
    const double v = number(key, fallback);
    if (!(v >= 0.0) || !std::isfinite(v)) fail(key, "must be non-negative");
    return v;
  }

  std::uint64_t count(const char* key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    return unsigned_value(at(key), name(key));
  }

  bool flag(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    if (!at(key).is_boolean()) fail(key, "expected true or false");
    return at(key).get<bool>();
  }

  std::string text(const char* key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    if (!at(key).is_string()) fail(key, "expected a string");
    return at(key).get<std::string>();
  }

  Vec3 point(const char* key, int dim, const Vec3& fallback) const {
    if (!has(key)) return fallback;
    return vec(at(key), name(key), dim);
  }

  // Wraps conversions from names, rethrowing their errors with the key.
  template <typename Fn>
  auto named(const char* key, const std::string& fallback, Fn&& from_string) const {
    const std::string s = text(key, fallback);
    try {
      return from_string(s);
    } catch (const std::invalid_argument& e) {
      fail(key, e.what());
    }
  }

  static std::uint64_t unsigned_value(const Json& v, const std::string& where) {
    if (!v.is_number_unsigned()) throw ConfigError(where + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  static Vec3 vec(const Json& v, const std::string& where, int dim) {
    if (!v.is_array() || static_cast<int>(v.size()) != dim)
      throw ConfigError(where + ": expected " + std::to_string(dim) + " numbers");
    Vec3 out = Vec3::Zero();
    for (int i = 0; i < dim; ++i) {
      if (!v[static_cast<std::size_t>(i)].is_number()) throw ConfigError(where + ": expected numbers");
      out[i] = v[static_cast<std::size_t>(i)].get<double>();
    }
    return out;
  }

 private:
  const Json& j_;
  std::string where_;
};

template <typename Fn>
auto rethrow_invalid(const std::string& where, Fn&& fn) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

int parse_dim(const Obj& top) {
  const auto dim = top.count("dim", 2);
  if (dim != 2 && dim != 3) top.fail("dim", "must be 2 or 3");
  return static_cast<int>(dim);
}

PhantomSpec parse_phantom(const Obj& o, int dim) {
  const std::string type = o.text("type", "");
  PhantomSpec out;
  if (type == "fisheye") {
    o.allow({"type", "a", "n0"});
    out = FisheyePhantom{o.positive("a", 1.0), o.positive("n0", 1.0)};
  } else if (type == "homogeneous") {
    o.allow({"type", "c0"});
    out = HomogeneousPhantom{o.positive("c0", 1500.0)};
  } else if (type == "blobs") {
    o.allow({"type", "c0", "blobs"});
    BlobPhantom b{o.positive("c0", 1500.0), {}};
    if (o.has("blobs")) {
      if (!o.at("blobs").is_array()) o.fail("blobs", "expected a list");
      for (std::size_t i = 0; i < o.at("blobs").size(); ++i) {
        const Obj bo(o.at("blobs")[i], o.name("blobs") + "[" + std::to_string(i) + "]");
        bo.allow({"center", "radius", "amplitude"});
        b.blobs.push_back(Blob{bo.point("center", dim, Vec3::Zero()), bo.positive("radius", 0.01),
                               bo.number("amplitude", 0.0)});
      }
    }
    out = b;
  } else {
    o.fail("type", "expected fisheye, homogeneous or blobs");
  }
  rethrow_invalid(o.name("type"), [&] {
    validate(out);
    return 0;
  });
  return out;
}

ArrayGeometry parse_array(const Obj& top, int dim, double default_radius) {
  ArrayGeometry g;
  std::size_t ne = 32, nr = 32;
  Vec3 center = Vec3::Zero();
  double radius = default_radius;
  ArrayLayout layout = dim == 2 ? ArrayLayout::Ring : ArrayLayout::Sphere;
  if (top.has("array")) {
    const Obj o = top.child("array");
    o.allow({"layout", "emitters", "receivers", "center", "radius"});
    const std::string l = o.text("layout", dim == 2 ? "ring" : "sphere");
    if (l == "ring") layout = ArrayLayout::Ring;
    else if (l == "sphere") layout = ArrayLayout::Sphere;
    else o.fail("layout", "expected ring or sphere");
    if ((layout == ArrayLayout::Ring) != (dim == 2)) o.fail("layout", "ring arrays are 2D and sphere arrays 3D");
    ne = o.count("emitters", ne);
    nr = o.count("receivers", nr);
    if (ne < 2 || nr < 2) o.fail("need at least two emitters and two receivers");
    center = o.point("center", dim, center);
    radius = o.positive("radius", radius);
  }
  g = layout == ArrayLayout::Ring ? ArrayGeometry::ring(ne, nr, center, radius)
                                  : ArrayGeometry::sphere(ne, nr, center, radius);
  return g;
}

// Grid forms, by the keys present:
//   counts (+ origin, spacing)  explicit
//   half_width (+ spacing)      centred on the array centre or the origin
//   nodes (+ margin)            nodes per axis across the array
//   spacing (+ margin)          covering the array
GridSpec parse_grid(const Obj& top, int dim, const ArrayGeometry* array, std::optional<double> default_spacing,
                    std::optional<GridSpec> fallback) {
  if (!top.has("grid")) {
    if (fallback) return *fallback;
    top.fail("grid", "required for this field");
  }
  const Obj o = top.child("grid");
  o.allow({"origin", "spacing", "counts", "half_width", "nodes", "margin"});
  GridSpec g;
  const double margin_default = array ? 0.1 * array->radius : 0.0;
  auto spacing = [&] {
    if (o.has("spacing") || !default_spacing) return o.positive("spacing", 0.0);
    return *default_spacing;
  };
  if (o.has("counts")) {
    const Json& c = o.at("counts");
    if (!c.is_array() || static_cast<int>(c.size()) != dim) o.fail("counts", "expected " + std::to_string(dim) + " integers");
    g.dim = dim;
    g.counts = {1, 1, 1};
    for (int i = 0; i < dim; ++i)
      g.counts[static_cast<std::size_t>(i)] =
          static_cast<int>(Obj::unsigned_value(c[static_cast<std::size_t>(i)], o.name("counts")));
    g.origin = o.point("origin", dim, Vec3::Zero());
    g.spacing = spacing();
  } else if (o.has("half_width")) {
    const Vec3 center = array ? array->center : Vec3::Zero();
    g = rethrow_invalid(o.name("half_width"), [&] {
      return GridSpec::centered(dim, center, o.positive("half_width", 1.0), spacing());
    });
  } else if (o.has("nodes")) {
    if (!array) o.fail("nodes", "needs an array");
    const auto nodes = o.count("nodes", 64);
    g = rethrow_invalid(o.name("nodes"), [&] {
      return array->square_grid(static_cast<int>(nodes), o.non_negative("margin", margin_default));
    });
  } else if (array && (o.has("spacing") || default_spacing)) {
    g = rethrow_invalid(o.name("spacing"),
                        [&] { return array->covering_grid(spacing(), o.non_negative("margin", margin_default)); });
  } else {
    o.fail("expected counts, half_width, nodes or spacing");
  }
  rethrow_invalid(o.name("counts"), [&] {
    g.validate();
    return 0;
  });
  return g;
}

LinkConfig parse_link(const Obj& top, unsigned threads) {
  LinkConfig cfg;
  cfg.threads = threads;
  if (!top.has("link")) return cfg;
  const Obj o = top.child("link");
  o.allow({"algorithm", "ds", "tolerance", "method", "max_iterations"});
  cfg.algorithm = o.named("algorithm", "rk2", [](const std::string& s) { return step_algorithm_from_string(s); });
  cfg.ds = o.non_negative("ds", 0.0);
  cfg.tolerance = o.non_negative("tolerance", 0.0);
  if (o.has("method"))
    cfg.method = o.named("method", "", [](const std::string& s) { return link_method_from_string(s); });
  cfg.max_iterations = o.count("max_iterations", 0);
  return cfg;
}

Backend parse_backend(const Obj& top, Backend fallback) {
  return top.named("backend", std::string(to_string(fallback)),
                   [](const std::string& s) { return backend_from_string(s); });
}

std::filesystem::path existing_file(const Obj& o, const char* key) {
  const std::filesystem::path p = o.text(key, "");
  if (p.empty()) o.fail(key, "must name a file");
  if (!std::filesystem::is_regular_file(p)) o.fail(key, "no such file: " + p.string());
  return p;
}

// Field source plus the grid it lives on.
struct FieldAndGrid {
  FieldSource field;
  std::optional<GridSpec> grid;
  std::optional<double> default_spacing;
};

FieldAndGrid parse_field(const Obj& top, int dim) {
  FieldAndGrid out;
  out.field.dim = dim;
  if (top.has("phantom") && top.has("field_file")) top.fail("give either phantom or field_file, not both");
  if (top.has("field_file")) {
    out.field.file = existing_file(top, "field_file");
    if (top.has("grid")) top.fail("grid", "comes from field_file");
    const ScalarField f = rethrow_invalid(top.name("field_file"), [&] { return read_field(out.field.file); });
    if (f.spec().dim != dim) top.fail("field_file", "field is " + std::to_string(f.spec().dim) + "D");
    if (f.kind() == FieldKind::Absorption) top.fail("field_file", "absorption fields cannot be traced");
    out.grid = f.spec();
  } else {
    out.field.phantom = top.has("phantom") ? parse_phantom(top.child("phantom"), dim) : PhantomSpec{FisheyePhantom{}};
    if (const auto* fe = std::get_if<FisheyePhantom>(&*out.field.phantom)) out.default_spacing = fisheye_spacing(fe->a);
  }
  out.field.reference_speed = top.positive("reference_speed", 1.0);
  return out;
}

CommonOptions parse_common(const Obj& top, const FlagOverrides& flags) {
  CommonOptions c;
  c.out = top.text("out", "out");
  c.seed = top.count("seed", 0);
  c.threads = static_cast<unsigned>(top.count("threads", 0));
  if (flags.out) c.out = *flags.out;
  if (flags.seed) c.seed = *flags.seed;
  if (flags.threads) c.threads = *flags.threads;
  if (c.out.empty()) throw ConfigError("out: must name a directory");
  return c;
}

void check_pair(const ArrayGeometry& g, std::size_t e, std::size_t r, const std::string& where) {
  if (e >= g.emitter_count() || r >= g.receiver_count())
    throw ConfigError(where + ": pair (" + std::to_string(e) + ", " + std::to_string(r) + ") is outside the array");
  if (!g.pair_valid(e, r)) throw ConfigError(where + ": emitter and receiver coincide");
}

std::pair<std::size_t, std::size_t> parse_pair(const Json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2) throw ConfigError(where + ": expected [emitter, receiver]");
  return {Obj::unsigned_value(v[0], where), Obj::unsigned_value(v[1], where)};
}

// --- per command ---------------------------------------------------------

ValidateRun parse_validate(const Obj& top) {
  ValidateRun run;
  if (top.has("dims")) {
    run.dims.clear();
    const Json& d = top.at("dims");
    if (!d.is_array() || d.empty()) top.fail("dims", "expected a non-empty list");
    for (const Json& v : d) {
      const auto dim = Obj::unsigned_value(v, top.name("dims"));
      if (dim != 2 && dim != 3) top.fail("dims", "entries must be 2 or 3");
      run.dims.push_back(static_cast<int>(dim));
    }
  }
  auto names = [&](const char* key, auto&& convert, auto& target) {
    if (!top.has(key)) return;
    const Json& l = top.at(key);
    if (!l.is_array() || l.empty()) top.fail(key, "expected a non-empty list");
    target.clear();
    for (const Json& v : l) {
      if (!v.is_string()) top.fail(key, "expected names");
      try {
        target.push_back(convert(v.template get<std::string>()));
      } catch (const std::invalid_argument& e) {
        top.fail(key, e.what());
      }
    }
  };
  names("experiments", [](const std::string& s) { return experiment_from_string(s); }, run.experiments);
  names("algorithms", [](const std::string& s) { return step_algorithm_from_string(s); }, run.algorithms);
  if (top.has("ratios")) {
    const Json& l = top.at("ratios");
    if (!l.is_array() || l.empty()) top.fail("ratios", "expected a non-empty list");
    run.ratios.clear();
    for (const Json& v : l) {
      if (!v.is_number() || !(v.get<double>() > 0.0)) top.fail("ratios", "entries must be positive numbers");
      run.ratios.push_back(v.get<double>());
    }
  }
  run.a = top.positive("a", 1.0);
  run.n0 = top.positive("n0", 1.0);
  if (top.has("trajectory_ratio")) run.trajectory_ratio = top.positive("trajectory_ratio", 1.0);
  run.thin = std::max<std::uint64_t>(1, top.count("thin", 1));
  return run;
}

TraceRun parse_trace(const Obj& top) {
  TraceRun run;
  const int dim = parse_dim(top);
  FieldAndGrid fg = parse_field(top, dim);
  run.field = fg.field;
  std::optional<GridSpec> fallback = fg.grid;
  if (!fallback && run.field.phantom) {
    // the default launch circles through (1 + sqrt(dim)) a, beyond a 2a box
    if (const auto* fe = std::get_if<FisheyePhantom>(&*run.field.phantom))
      fallback = fisheye_experiment_grid(dim, fe->a, FisheyeExperiment::Radius);
  }
  run.grid = parse_grid(top, dim, nullptr, fg.default_spacing, fallback);
  run.backend = parse_backend(top, Backend::BSpline);
  run.algorithm = top.named("algorithm", "rk2", [](const std::string& s) { return step_algorithm_from_string(s); });
  run.ds = top.non_negative("ds", 0.0);
  // defaults launch the closed-loop fish-eye ray
  run.start = top.point("start", dim, dim == 2 ? Vec3(0.0, 1.0, 0.0) : Vec3(0.0, 0.0, 1.0));
  run.direction = top.point("direction", dim, dim == 2 ? Vec3(1.0, 1.0, 0.0) : Vec3(1.0, -1.0, 0.0));
  if (!(run.direction.norm() > 0.0)) top.fail("direction", "must be non-zero");
  run.direction.normalize();
  if (!run.grid->contains(run.start)) top.fail("start", "lies outside the grid");
  run.stop.max_steps = top.count("max_steps", run.stop.max_steps);
  run.stop.closed_loop = top.flag("closed_loop", true);
  if (top.has("surface")) {
    const Obj s = top.child("surface");
    s.allow({"center", "radius"});
    run.stop.surface = StopCondition::Surface{s.point("center", dim, Vec3::Zero()), s.positive("radius", 1.0)};
  }
  if (top.has("capture")) {
    const Obj s = top.child("capture");
    s.allow({"target", "radius"});
    if (!s.has("target")) s.fail("target", "required");
    run.stop.capture = StopCondition::Capture{s.point("target", dim, Vec3::Zero()), s.positive("radius", 1.0)};
  }
  if (top.has("center")) run.center = top.point("center", dim, Vec3::Zero());
  run.thin = std::max<std::uint64_t>(1, top.count("thin", 1));
  return run;
}

double default_array_radius(const FieldSource& f) {
  if (f.phantom) {
    // rays from a point on the fish-eye unit circle all refocus at its
    // antipode, so arrays sit inside it
    if (const auto* fe = std::get_if<FisheyePhantom>(&*f.phantom)) return 0.5 * fe->a;
  }
  return 0.1;
}

LinkRun parse_link_run(const Obj& top, unsigned threads) {
  LinkRun run;
  const int dim = parse_dim(top);
  FieldAndGrid fg = parse_field(top, dim);
  run.field = fg.field;
  run.array = parse_array(top, dim, default_array_radius(run.field));
  std::optional<GridSpec> fallback = fg.grid;
  if (!fallback) fallback = run.array.square_grid(64, 0.1 * run.array.radius);
  if (fg.default_spacing && !top.has("grid")) fallback = run.array.covering_grid(*fg.default_spacing, 0.1 * run.array.radius);
  run.grid = parse_grid(top, dim, &run.array, fg.default_spacing, fallback);
  run.backend = parse_backend(top, Backend::BSpline);
  run.link = parse_link(top, threads);
  if (top.has("pair")) {
    run.pair = parse_pair(top.at("pair"), top.name("pair"));
    check_pair(run.array, run.pair->first, run.pair->second, top.name("pair"));
  }
  run.trajectories = top.flag("trajectories", false);
  run.thin = std::max<std::uint64_t>(1, top.count("thin", 1));
  return run;
}

SynthRun parse_synth(const Obj& top, unsigned threads) {
  SynthRun run;
  const int dim = parse_dim(top);
  const PhantomSpec blob_default = BlobPhantom{1500.0, {Blob{Vec3(0.02, 0.01, 0.0), 0.025, 45.0}}};
  run.phantom = top.has("phantom") ? parse_phantom(top.child("phantom"), dim) : blob_default;
  if (std::holds_alternative<FisheyePhantom>(run.phantom))
    top.fail("phantom", "travel-time data needs a sound-speed phantom (homogeneous or blobs)");
  run.array = parse_array(top, dim, 0.1);
  run.grid = parse_grid(top, dim, &run.array, std::nullopt, run.array.square_grid(64, 0.1 * run.array.radius));
  run.backend = parse_backend(top, Backend::Bilinear);
  run.link = parse_link(top, threads);
  run.noise_sigma = top.non_negative("noise_sigma", 0.0);
  return run;
}

ReconstructRun parse_reconstruct(const Obj& top, unsigned threads) {
  ReconstructRun run;
  const int dim = parse_dim(top);
  run.array = parse_array(top, dim, 0.1);
  run.grid = parse_grid(top, dim, &run.array, std::nullopt, run.array.square_grid(64, 0.1 * run.array.radius));
  run.tof = existing_file(top, "tof");
  if (top.has("truth")) {
    run.truth = parse_phantom(top.child("truth"), dim);
    if (std::holds_alternative<FisheyePhantom>(*run.truth)) top.fail("truth", "must be a sound-speed phantom");
  }
  InversionConfig& inv = run.inversion;
  if (top.has("inversion")) {
    const Obj o = top.child("inversion");
    o.allow({"solver", "inner_iterations", "outer_iterations", "c0", "relaxation", "stop_threshold", "backend"});
    inv.solver = o.named("solver", "sart", [](const std::string& s) { return inner_solver_from_string(s); });
    inv.inner_iterations = o.count("inner_iterations", 0);
    inv.outer_iterations = o.count("outer_iterations", inv.outer_iterations);
    inv.c0 = o.positive("c0", inv.c0);
    inv.relaxation = o.positive("relaxation", inv.relaxation);
    inv.stop_threshold = o.non_negative("stop_threshold", inv.stop_threshold);
    inv.backend = parse_backend(o, inv.backend);
  }
  inv.link = parse_link(top, threads);
  rethrow_invalid(top.name("inversion"), [&] {
    inv.validate();
    return 0;
  });
  run.save_fields = top.flag("save_fields", true);
  return run;
}

GreensRun parse_greens(const Obj& top, unsigned threads) {
  GreensRun run;
  const int dim = parse_dim(top);
  FieldAndGrid fg = parse_field(top, dim);
  run.field = fg.field;
  run.array = parse_array(top, dim, default_array_radius(run.field));
  std::optional<GridSpec> fallback = fg.grid;
  if (!fallback) fallback = run.array.square_grid(64, 0.1 * run.array.radius);
  if (fg.default_spacing && !top.has("grid")) fallback = run.array.covering_grid(*fg.default_spacing, 0.1 * run.array.radius);
  run.grid = parse_grid(top, dim, &run.array, fg.default_spacing, fallback);
  run.link = parse_link(top, threads);
  if (top.has("pairs")) {
    const Json& l = top.at("pairs");
    if (!l.is_array() || l.empty()) top.fail("pairs", "expected a non-empty list of [emitter, receiver]");
    for (const Json& v : l) run.pairs.push_back(parse_pair(v, top.name("pairs")));
  } else {
    run.pairs.push_back({0, run.array.receiver_count() / 2});
  }
  for (const auto& [e, r] : run.pairs) check_pair(run.array, e, r, top.name("pairs"));
  run.omega = top.non_negative("omega", 0.0);
  run.y = top.positive("y", 1.0);
  run.s_ref = top.non_negative("s_ref", 0.0);
  if (top.has("alpha0")) run.alpha0 = top.non_negative("alpha0", 0.0);
  run.reverse = top.flag("reverse", true);
  return run;
}

void allow_keys(const Obj& top, std::string_view command) {
  std::vector<std::string_view> keys{"out", "seed", "threads"};
  auto add = [&](std::initializer_list<std::string_view> more) { keys.insert(keys.end(), more.begin(), more.end()); };
  if (command == "trace" || command == "link" || command == "greens")
    add({"dim", "phantom", "field_file", "reference_speed", "grid"});
  if (command == "validate-fisheye") {
    add({"dims", "experiments", "algorithms", "ratios", "a", "n0", "trajectory_ratio", "thin"});
  } else if (command == "trace") {
    add({"backend", "algorithm", "ds", "start", "direction", "max_steps", "closed_loop", "surface", "capture",
         "center", "thin"});
  } else if (command == "link") {
    add({"array", "backend", "link", "pair", "trajectories", "thin"});
  } else if (command == "synth") {
    add({"dim", "phantom", "array", "grid", "backend", "link", "noise_sigma"});
  } else if (command == "reconstruct") {
    add({"dim", "array", "grid", "tof", "truth", "inversion", "link", "save_fields"});
  } else if (command == "greens") {
    add({"array", "link", "pairs", "omega", "y", "s_ref", "alpha0", "reverse"});
  }
  top.allow(keys);
}

}  // namespace

RunConfig parse_config(std::string_view command, std::string_view json_text, const FlagOverrides& flags) {
  if (std::find(std::begin(kCommands), std::end(kCommands), command) == std::end(kCommands))
    throw ConfigError("unknown command '" + std::string(command) + "'");
  Json doc;
  try {
    doc = Json::parse(json_text.begin(), json_text.end(), nullptr, true, true);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  const Obj top(doc, "");
  allow_keys(top, command);

  RunConfig rc;
  rc.command = std::string(command);
  rc.common = parse_common(top, flags);
  const unsigned threads = rc.common.threads;
  if (command == "validate-fisheye") rc.config = parse_validate(top);
  else if (command == "trace") rc.config = parse_trace(top);
  else if (command == "link") rc.config = parse_link_run(top, threads);
  else if (command == "synth") rc.config = parse_synth(top, threads);
  else if (command == "reconstruct") rc.config = parse_reconstruct(top, threads);
  else rc.config = parse_greens(top, threads);
  return rc;
}

RunConfig load_config(std::string_view command, const std::optional<std::filesystem::path>& path,
                      const FlagOverrides& flags) {
  if (!path) return parse_config(command, "{}", flags);
  std::ifstream is(*path);
  if (!is) throw ConfigError("cannot read config file " + path->string());
  std::ostringstream ss;
  ss << is.rdbuf();
  try {
    return parse_config(command, ss.str(), flags);
  } catch (const ConfigError& e) {
    throw ConfigError(path->string() + ": " + e.what());
  }
}

}  // namespace raytomo::cli
