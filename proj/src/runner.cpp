#include "thickstab/runner.hpp"

#include "thickstab/errors.hpp"
#include "thickstab/io.hpp"
#include "thickstab/observability.hpp"
#include "thickstab/qa_sequences.hpp"
#include "thickstab/spectral.hpp"
#include "thickstab/stabilizer.hpp"
#include "thickstab/thick_sets.hpp"
#include "numerics.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

namespace thickstab {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;
using Json = nlohmann::ordered_json;

const std::vector<ScenarioInfo>& scenario_catalog() {
  static const std::vector<ScenarioInfo> catalog = {
      {"simulate", {"grid.*", "symbol.family", "initial.kind", "run.T"},
       "uncontrolled evolution under e^{-tF(|D|)}", "Fourier multiplier semigroups"},
      {"stabilize", {"grid.*", "symbol.family", "mask.kind", "initial.kind", "run.R", "run.C", "run.T"},
       "closed loop with feedback -lambda 1_omega K_R, Lyapunov certificate and decay fit",
       "rapid feedback stabilization from thick sets with explicit gains"},
      {"observability", {"grid.*", "symbol.family", "mask.kind", "run.T", "run.epsilon", "run.seed"},
       "probe-based lower bound for the observability constant",
       "observability characterization of cost-uniform approximate null-controllability"},
      {"necessity", {"grid.*", "symbol.family", "mask.kind", "run.T", "run.epsilon", "run.C", "run.centers"},
       "Gaussian probes marching into a void of the control set",
       "necessity of thickness via Gaussian probes"},
      {"negative-limit", {"grid.*", "symbol.family", "run.h"},
       "implied observability constants for F(|D|/h) on shrinking ball complements",
       "no rapid stabilization for bounded symbols (scaling argument)"},
      {"qa", {"symbol.family", "run.k_max"}, "Bernstein moments, ratios and Denjoy-Carleman partial sums",
       "Denjoy-Carleman theorem for log-convex moment sequences"},
      {"thick-check", {"grid.*", "mask.kind", "run.L"}, "sliding-window thickness certificate of a mask",
       "thick sets at scale L"},
      {"cubes", {"grid.*", "symbol.family", "initial.kind", "run.T", "run.epsilon", "run.L", "run.beta_max"},
       "good/bad cube labels from Bernstein moment thresholds",
       "uncertainty principle with good and bad cubes"},
      {"synthesize", {"grid.*", "symbol.family", "mask.kind", "initial.kind", "run.T", "run.epsilon"},
       "penalized dual synthesis of an approximate null-control", "HUM duality"},
      {"kovrijkine", {"grid.*", "mask.kind", "run.R", "run.seed"},
       "measured spectral-inequality constants and their growth in R",
       "Logvinenko-Sereda / Kovrijkine spectral inequality"},
  };
  return catalog;
}

std::string list_scenarios(bool json) {
  if (json) {
    Json arr = Json::array();
    for (const auto& s : scenario_catalog())
      arr.push_back({{"name", s.name}, {"required_keys", s.required_keys}, {"summary", s.summary}, {"anchor", s.anchor}});
    return arr.dump(2) + "\n";
  }
  std::ostringstream os;
  for (const auto& s : scenario_catalog()) {
    os << s.name << "\n  " << s.summary << "\n  keys:";
    for (const auto& k : s.required_keys) os << ' ' << k;
    os << "\n  anchor: " << s.anchor << "\n";
  }
  return os.str();
}

namespace {

// Key lookup over an INI tree that remembers what was read, so leftovers can
// be reported as unknown keys.
class Config {
 public:
  explicit Config(pt::ptree tree) : tree_(std::move(tree)) {}

  bool has(const std::string& sec, const std::string& key) const { return find(sec, key).has_value(); }

  std::string text(const std::string& sec, const std::string& key, std::optional<std::string> def = {}) {
    auto v = find(sec, key);
    if (!v) {
      if (!def) throw InvalidArgument("missing required config key '" + sec + "." + key + "'");
      v = def;
    }
    mark(sec, key, *v);
    return *v;
  }

  double number(const std::string& sec, const std::string& key, std::optional<double> def = {}) {
    const auto v = find(sec, key);
    if (!v) {
      if (!def) throw InvalidArgument("missing required config key '" + sec + "." + key + "'");
      mark(sec, key, format_double(*def));
      return *def;
    }
    mark(sec, key, *v);
    return parse_number(sec + "." + key, *v);
  }

  int integer(const std::string& sec, const std::string& key, std::optional<int> def = {}) {
    const double v = number(sec, key, def ? std::optional<double>(*def) : std::nullopt);
    if (v != std::floor(v) || std::abs(v) > 2e9)
      throw InvalidArgument("config key '" + sec + "." + key + "' must be an integer");
    return int(v);
  }

  std::uint64_t seed(const std::string& sec, const std::string& key) {
    if (!has(sec, key))
      throw InvalidArgument("missing required config key '" + sec + "." + key + "' (seeds are mandatory)");
    const std::string v = text(sec, key);
    std::uint64_t s = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), s);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
      throw InvalidArgument("config key '" + sec + "." + key + "' must be a non-negative integer seed");
    return s;
  }

  std::vector<double> numbers(const std::string& sec, const std::string& key,
                              std::optional<std::vector<double>> def = {}) {
    const auto v = find(sec, key);
    if (!v) {
      if (!def) throw InvalidArgument("missing required config key '" + sec + "." + key + "'");
      std::string joined;
      for (std::size_t i = 0; i < def->size(); ++i) joined += (i ? "," : "") + format_double((*def)[i]);
      mark(sec, key, joined);
      return *def;
    }
    mark(sec, key, *v);
    std::vector<double> out;
    std::stringstream ss(*v);
    for (std::string item; std::getline(ss, item, ',');) out.push_back(parse_number(sec + "." + key, trim(item)));
    if (out.empty()) throw InvalidArgument("config key '" + sec + "." + key + "' is an empty list");
    return out;
  }

  Point point(const std::string& sec, const std::string& key, std::optional<Point> def = {}) {
    std::optional<std::vector<double>> d;
    if (def) d = std::vector<double>{(*def)(0), (*def)(1)};
    const auto v = numbers(sec, key, d);
    if (v.size() > 2) throw InvalidArgument("config key '" + sec + "." + key + "' has more than two components");
    return Point(v[0], v.size() > 1 ? v[1] : 0.0);
  }

  void reject_unused() const {
    for (const auto& [name, child] : tree_) {
      if (child.empty()) {
        if (!used_.count(name)) throw InvalidArgument("unknown config key '" + name + "'");
        continue;
      }
      for (const auto& [key, leaf] : child)
        if (!used_.count(name + "." + key)) throw InvalidArgument("unknown config key '" + name + "." + key + "'");
    }
  }

  const Json& resolved() const { return resolved_; }

 private:
  static std::string trim(std::string s) {
    const auto a = s.find_first_not_of(" \t");
    const auto b = s.find_last_not_of(" \t");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  }

  static double parse_number(const std::string& key, const std::string& raw) {
    const std::string v = trim(raw);
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out))
      throw InvalidArgument("config key '" + key + "' must be a finite number, got '" + raw + "'");
    return out;
  }

  std::optional<std::string> find(const std::string& sec, const std::string& key) const {
    if (sec.empty()) {
      auto it = tree_.find(key);
      if (it == tree_.not_found() || !it->second.empty()) return std::nullopt;
      return trim(it->second.data());
    }
    auto s = tree_.find(sec);
    if (s == tree_.not_found()) return std::nullopt;
    auto k = s->second.find(key);
    if (k == s->second.not_found()) return std::nullopt;
    return trim(k->second.data());
  }

  void mark(const std::string& sec, const std::string& key, const std::string& value) {
    used_.insert(sec.empty() ? key : sec + "." + key);
    if (sec.empty())
      resolved_[key] = value;
    else
      resolved_[sec][key] = value;
  }

  pt::ptree tree_;
  std::set<std::string> used_;
  Json resolved_ = Json::object();
};

pt::ptree load_tree(const RunRequest& req) {
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(req.config.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw InvalidArgument(std::string("cannot parse config: ") + e.what());
  }
  for (const auto& o : req.overrides) {
    const auto eq = o.find('=');
    const auto dot = o.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq || dot == 0 || dot + 1 == eq)
      throw InvalidArgument("override '" + o + "' must look like section.key=value");
    const std::string sec = o.substr(0, dot), key = o.substr(dot + 1, eq - dot - 1), value = o.substr(eq + 1);
    auto found = tree.find(sec);
    pt::ptree& section = found == tree.not_found() ? tree.push_back({sec, pt::ptree()})->second : found->second;
    auto k = section.find(key);
    if (k == section.not_found())
      section.push_back({key, pt::ptree(value)});
    else
      k->second.data() = value;
  }
  return tree;
}

// Files written by a scenario plus their blob hashes.
class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::string& bytes) {
    write_file(dir_ / name, bytes);
    hashes_[name] = git_blob_hash(bytes);
  }
  const Json& hashes() const { return hashes_; }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  Json hashes_ = Json::object();
};

struct Context {
  Config cfg;
  fs::path config_dir;
  Json inputs = Json::object();
  Json results = Json::object();
  std::ostream* log;
};

Grid read_grid(Context& c) {
  const int dim = c.cfg.integer("grid", "dim", 1);
  const double extent = c.cfg.number("grid", "extent");
  const int points = c.cfg.integer("grid", "points");
  return make_grid(dim, extent, points);
}

MultiplierSymbol read_symbol(Context& c) {
  const std::string family = c.cfg.text("symbol", "family");
  std::optional<MultiplierSymbol> F;
  if (family == "fractional")
    F = MultiplierSymbol::fractional(c.cfg.number("symbol", "s"));
  else if (family == "halfheat")
    F = MultiplierSymbol::halfheat();
  else if (family == "loglog")
    F = MultiplierSymbol::loglog(c.cfg.number("symbol", "s"), c.cfg.number("symbol", "delta"));
  else if (family == "iterated")
    F = MultiplierSymbol::iterated(c.cfg.integer("symbol", "p"));
  else if (family == "saturating")
    F = MultiplierSymbol::saturating();
  else if (family == "constant")
    F = MultiplierSymbol::constant(c.cfg.number("symbol", "c"));
  else if (family == "custom")
    F = MultiplierSymbol::custom(c.cfg.numbers("symbol", "nodes"), c.cfg.numbers("symbol", "values"));
  else
    throw InvalidArgument("config key 'symbol.family': unknown family '" + family + "'");
  if (c.cfg.has("symbol", "factor")) F = MultiplierSymbol::scaled(*F, c.cfg.number("symbol", "factor"));
  if (c.cfg.has("symbol", "shift")) F = MultiplierSymbol::shifted(*F, c.cfg.number("symbol", "shift"));
  return *F;
}

fs::path resolve_path(const Context& c, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : c.config_dir / path;
}

SupportMask read_mask(Context& c, const Grid& grid) {
  const std::string kind = c.cfg.text("mask", "kind");
  if (kind == "full") return make_full_mask(grid);
  if (kind == "empty") return make_empty_mask(grid);
  if (kind == "half") return make_half_box_mask(grid);
  if (kind == "periodic")
    return make_periodic_thick(grid, c.cfg.number("mask", "period"), c.cfg.number("mask", "fill"));
  if (kind == "ball_complement") {
    const Point center = c.cfg.point("mask", "center", Point::Constant(grid.extent() / 2.0));
    return make_ball_complement(grid, center, c.cfg.number("mask", "radius"));
  }
  if (kind == "random")
    return make_random_thick(grid, c.cfg.number("mask", "L"), c.cfg.number("mask", "gamma"),
                             c.cfg.seed("mask", "seed"));
  if (kind == "file") {
    const std::string bytes = read_file(resolve_path(c, c.cfg.text("mask", "path")));
    c.inputs["mask_file"] = git_blob_hash(bytes);
    SupportMask m = decode_mask(bytes);
    require_same_grid(m.grid(), grid, "mask file");
    return m;
  }
  throw InvalidArgument("config key 'mask.kind': unknown kind '" + kind + "'");
}

SpectralField read_initial(Context& c, const Grid& grid) {
  const std::string kind = c.cfg.text("initial", "kind");
  if (kind == "gaussian") {
    GaussianProbe p;
    p.center = c.cfg.point("initial", "center", Point::Constant(grid.extent() / 2.0));
    p.width = c.cfg.number("initial", "width", 1.0);
    p.modulation = c.cfg.point("initial", "modulation", Point::Zero());
    return sample_probe(p, grid);
  }
  if (kind == "mode") {
    const Point k = c.cfg.point("initial", "mode", Point::Zero());
    const double amp = c.cfg.number("initial", "amplitude", 1.0);
    if (k(0) != std::floor(k(0)) || k(1) != std::floor(k(1)))
      throw InvalidArgument("config key 'initial.mode' must hold integer mode numbers");
    ComplexArray v(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
      const Point x = grid.coordinate_at(i);
      const double phase = grid.frequency_spacing() * (k(0) * x(0) + (grid.dim() == 2 ? k(1) * x(1) : 0.0));
      v(i) = amp * Complex(std::cos(phase), std::sin(phase));
    }
    return SpectralField(grid, std::move(v));
  }
  if (kind == "constant") return SpectralField(grid, ComplexArray::Constant(grid.size(), c.cfg.number("initial", "value", 1.0)));
  if (kind == "random_band") {
    const double R = c.cfg.number("initial", "R");
    std::mt19937_64 rng(c.cfg.seed("initial", "seed"));
    const RealArray ball = ball_indicator(grid, R);
    ComplexArray coeffs(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
      const double a = detail::unit_uniform(rng()) - 0.5, b = detail::unit_uniform(rng()) - 0.5;
      coeffs(i) = ball(i) * Complex(a, b) * grid.volume();
    }
    return inverse_transform(grid, coeffs);
  }
  if (kind == "file") {
    const std::string bytes = read_file(resolve_path(c, c.cfg.text("initial", "path")));
    c.inputs["initial_file"] = git_blob_hash(bytes);
    SpectralField f = decode_field(bytes);
    require_same_grid(f.grid(), grid, "initial file");
    return f;
  }
  throw InvalidArgument("config key 'initial.kind': unknown kind '" + kind + "'");
}

Json grid_json(const Grid& g) { return {{"dim", g.dim()}, {"extent", g.extent()}, {"points", g.points()}}; }

Json num(double v) { return std::isfinite(v) ? Json(v) : Json(format_double(v)); }

// ---- scenarios -------------------------------------------------------------

void run_simulate(Context& c, Outputs& out) {
  const Grid grid = read_grid(c);
  const MultiplierSymbol F = read_symbol(c);
  const SpectralField f0 = read_initial(c, grid);
  const double T = c.cfg.number("run", "T");
  const int steps = c.cfg.integer("run", "steps", 100);
  c.cfg.reject_unused();
  if (steps < 1) throw InvalidArgument("config key 'run.steps' must be >= 1");
  CsvWriter csv({"t", "norm"});
  SpectralField f = f0;
  for (int i = 0; i <= steps; ++i) {
    const double t = T * i / steps;
    f = apply_semigroup(f0, F, t);
    csv.row(std::vector<double>{t, l2_norm(f)});
  }
  out.write("trajectory.csv", csv.text());
  out.write("initial.tsf", encode_field(f0));
  out.write("final.tsf", encode_field(f));
  c.results = {{"symbol", F.name()}, {"grid", grid_json(grid)}, {"final_norm", l2_norm(f)}};
}

void run_stabilize(Context& c, Outputs& out) {
  const Grid grid = read_grid(c);
  const MultiplierSymbol F = read_symbol(c);
  const SupportMask mask = read_mask(c, grid);
  const SpectralField f0 = read_initial(c, grid);
  const double R = c.cfg.number("run", "R");
  const std::string C_text = c.cfg.text("run", "C");
  const double T = c.cfg.number("run", "T");
  const std::string integrator = c.cfg.text("run", "integrator", "splitting");
  const std::string order = c.cfg.text("run", "order", "mask_after_projection");
  const int stride = c.cfg.integer("run", "snapshot_stride", 0);
  const double window = c.cfg.number("run", "fit_window", 0.5);
  const double dt_cap = c.cfg.number("run", "dt_cap", 1e-3);
  std::optional<double> dt_key;
  if (c.cfg.has("run", "dt")) dt_key = c.cfg.number("run", "dt");
  std::optional<std::uint64_t> seed;
  if (C_text == "measured") seed = c.cfg.seed("run", "seed");
  c.cfg.reject_unused();

  StabilizationOptions opt;
  if (integrator == "splitting")
    opt.integrator = Integrator::Splitting;
  else if (integrator == "exact")
    opt.integrator = Integrator::ExactModal;
  else
    throw InvalidArgument("config key 'run.integrator' must be 'splitting' or 'exact'");
  if (order == "mask_after_projection")
    opt.order = FeedbackOrder::MaskAfterProjection;
  else if (order == "projection_after_mask")
    opt.order = FeedbackOrder::ProjectionAfterMask;
  else
    throw InvalidArgument("config key 'run.order' must be 'mask_after_projection' or 'projection_after_mask'");
  opt.snapshot_stride = stride;
  opt.fit_window = window;

  double C = 0.0;
  std::optional<SpectralConstant> measured;
  if (seed) {
    SpectralConstantOptions so;
    so.seed = *seed;
    measured = estimate_spectral_constant(mask, R, so);
    C = std::max(1.0, measured->constant);
    opt.certified_constant = measured->constant;
  } else {
    std::size_t used = 0;
    try {
      C = std::stod(C_text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != C_text.size()) throw InvalidArgument("config key 'run.C' must be a number or 'measured'");
  }
  const FeedbackConfig fb = design_feedback(F, R, C);
  double dt;
  if (opt.integrator == Integrator::Splitting) {
    opt.dt_cap = dt_cap;
    dt = dt_key ? *dt_key : max_splitting_step(fb, dt_cap);
    const double steps = std::ceil(T / dt);
    if (steps > 1e7)
      *c.log << "warning: dt_max = " << max_splitting_step(fb, dt_cap) << " forces " << steps
             << " steps; lower R or C, or use integrator = exact\n";
  } else {
    dt = dt_key ? *dt_key : dt_cap;
  }
  const StabilizationRun run = run_stabilization(f0, F, mask, fb, T, dt, opt);
  const Trajectory& tr = run.trajectory;
  CsvWriter csv({"t", "norm", "lyapunov", "low_norm", "high_norm"});
  for (std::size_t i = 0; i < tr.times.size(); ++i)
    csv.row(std::vector<double>{tr.times[i], tr.norms[i], tr.lyapunov[i], tr.low_norms[i], tr.high_norms[i]});
  out.write("trajectory.csv", csv.text());
  const std::string mask_bytes = encode_mask(mask);
  out.write("mask.tsm", mask_bytes);
  out.write("initial.tsf", encode_field(f0));
  for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "snapshot_%06zu.tsf", i);
    out.write(name, encode_field(tr.snapshots[i]));
  }
  c.results = {{"symbol", F.name()},
               {"grid", grid_json(grid)},
               {"mask_hash", git_blob_hash(mask_bytes)},
               {"R", fb.R},
               {"C", fb.C},
               {"inf_F", fb.inf_F},
               {"alpha_R", fb.alpha_R},
               {"alpha_tilde", fb.alpha_tilde},
               {"lambda", fb.lambda},
               {"mu", num(fb.mu)},
               {"dt", run.dt},
               {"integrator", integrator},
               {"fitted_rate", num(run.fitted_rate)},
               {"predicted_rate", fb.predicted_rate},
               {"lyapunov_checked", run.lyapunov_checked},
               {"lyapunov_monotone", run.lyapunov_monotone},
               {"worst_lyapunov_ratio", num(run.worst_lyapunov_ratio)},
               {"worst_contraction", num(run.worst_contraction)}};
  if (measured) c.results["C_emp"] = measured->constant;
}

void run_observability(Context& c, Outputs& out) {
  const Grid grid = read_grid(c);
  const MultiplierSymbol F = read_symbol(c);
  const SupportMask mask = read_mask(c, grid);
  const double T = c.cfg.number("run", "T");
  const double eps = c.cfg.number("run", "epsilon");
  const int count = c.cfg.integer("run", "probes", 32);
  const std::uint64_t seed = c.cfg.seed("run", "seed");
  const double wmin = c.cfg.number("run", "min_width", 0.5);
  const double wmax = c.cfg.number("run", "max_width", 2.0);
  const int steps = c.cfg.integer("run", "steps", 64);
  c.cfg.reject_unused();
  const auto probes = random_probes(grid, count, seed, wmin, wmax);
  const ObservabilityReport rep = estimate_observability_constant(F, mask, T, eps, probes, steps);
  CsvWriter csv({"probe", "x0", "y0", "xi0", "eta0", "width", "norm_squared", "lhs", "obs_integral", "required_C"});
  Json rows = Json::array();
  for (const auto& r : rep.probes) {
    csv.row(std::vector<double>{double(r.id), r.probe.center(0), r.probe.center(1), r.probe.modulation(0),
                                r.probe.modulation(1), r.probe.width, r.norm_squared, r.lhs, r.obs_integral,
                                r.required_C});
    rows.push_back({{"probe", r.id}, {"lhs", r.lhs}, {"obs_integral", r.obs_integral},
                    {"required_C", num(r.required_C)}});
  }
  out.write("probes.csv", csv.text());
  const std::string mask_bytes = encode_mask(mask);
  const Json report = {{"symbol", F.name()}, {"T", T}, {"epsilon", eps}, {"quadrature_steps", steps},
                       {"mask_hash", git_blob_hash(mask_bytes)}, {"C_est", num(rep.C_est)},
                       {"C_infinite", rep.C_infinite}, {"probes", rows}};
  out.write("report.json", report.dump(2) + "\n");
  c.results = {{"C_est", num(rep.C_est)}, {"C_infinite", rep.C_infinite}, {"mask_hash", git_blob_hash(mask_bytes)}};
}

void run_necessity(Context& c, Outputs& out) {
  const Grid grid = read_grid(c);
  const MultiplierSymbol F = read_symbol(c);
  const SupportMask mask = read_mask(c, grid);
  const double T = c.cfg.number("run", "T");
  const double eps = c.cfg.number("run", "epsilon");
  const double C = c.cfg.number("run", "C");
  const std::vector<double> xs = c.cfg.numbers("run", "centers");
  const double y0 = c.cfg.number("run", "center_y", grid.extent() / 2.0);
  const double width = c.cfg.number("run", "width", 1.0);
  const int steps = c.cfg.integer("run", "steps", 64);
  c.cfg.reject_unused();
  std::vector<Point> centers;
  for (double x : xs) centers.emplace_back(x, grid.dim() == 2 ? y0 : 0.0);
  const NecessityScan scan = necessity_probe_scan(F, mask, T, eps, C, centers, width, steps);
  CsvWriter csv({"x0", "lhs", "obs_integral", "required_C", "violates"});
  for (const auto& p : scan.curve)
    csv.row(std::vector<double>{p.probe.center(0), p.lhs, p.obs_integral, p.required_C, p.violates ? 1.0 : 0.0});
  out.write("curve.csv", csv.text());
  c.results = {{"xi0", scan.modulation(0)},
               {"witness", scan.witness ? Json(*scan.witness) : Json(nullptr)},
               {"mask_hash", git_blob_hash(encode_mask(mask))}};
}

void run_negative_limit(Context& c, Outputs& out) {
  const Grid grid = read_grid(c);
  const MultiplierSymbol F = read_symbol(c);
  const double r = c.cfg.number("run", "r", 1.0);
  const double T0 = c.cfg.number("run", "T0", 1.0);
  const std::vector<double> h = c.cfg.numbers("run", "h");
  const double w = c.cfg.number("run", "psi_width", 1.0);
  const int steps = c.cfg.integer("run", "steps", 256);
  c.cfg.reject_unused();
  const Point center = Point::Constant(grid.extent() / 2.0);
  ComplexArray v(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    Point d = grid.coordinate_at(i) - center;
    if (grid.dim() == 1) d(1) = 0.0;
    v(i) = std::exp(-d.squaredNorm() / (2.0 * w * w));
  }
  const SpectralField psi(grid, std::move(v));
  const auto curve = negative_limit_experiment(F, psi, center, r, T0, h, steps);
  CsvWriter csv({"h", "obs_integral", "implied_constant"});
  for (const auto& p : curve) csv.row(std::vector<double>{p.h, p.obs_integral, p.implied_constant});
  out.write("curve.csv", csv.text());
  out.write("psi.tsf", encode_field(psi));
  c.results = {{"symbol", F.name()}, {"ratio_last_first", curve.back().implied_constant / curve.front().implied_constant}};
}

void run_qa(Context& c, Outputs& out) {
  const MultiplierSymbol F = read_symbol(c);
  const int k_max = c.cfg.integer("run", "k_max", 100);
  c.cfg.reject_unused();
  if (k_max < 2) throw InvalidArgument("config key 'run.k_max' must be >= 2");
  const QASequence seq = QASequence::build(F, k_max + 1);
  const auto ratios = seq.ratios();
  CsvWriter csv({"k", "log_moment", "argmax", "ratio", "dc_partial_sum"});
  double partial = 0.0;
  for (int k = 0; k <= k_max; ++k) {
    partial += ratios[std::size_t(k)];
    csv.row(std::vector<double>{double(k), seq.log_moments()[std::size_t(k)], seq.argmax_locations()[std::size_t(k)],
                                ratios[std::size_t(k)], partial});
  }
  out.write("moments.csv", csv.text());
  const ConvexityReport conv = log_convexity_report(seq);
  c.results = {{"symbol", F.name()},
               {"log_convex", conv.holds},
               {"worst_violation", conv.worst_violation},
               {"worst_k", conv.worst_k},
               {"ratio_bound", seq.ratio_bound()}};
}

void run_thick_check(Context& c, Outputs& out) {
  const Grid grid = read_grid(c);
  const SupportMask mask = read_mask(c, grid);
  const std::vector<double> Ls = c.cfg.numbers("run", "L");
  const int stride = c.cfg.integer("run", "stride", 1);
  c.cfg.reject_unused();
  CsvWriter csv({"L", "gamma_min"});
  for (double L : Ls) csv.row(std::vector<double>{L, thickness_certificate(mask, L, stride)});
  out.write("thickness.csv", csv.text());
  const std::string bytes = encode_mask(mask);
  out.write("mask.tsm", bytes);
  c.results = {{"mask_hash", git_blob_hash(bytes)}, {"total_measure", mask.total_measure()}};
  if (mask.certificate())
    c.results["certificate"] = {{"gamma", mask.certificate()->gamma}, {"L", mask.certificate()->scale}};
}

void run_cubes(Context& c, Outputs& out) {
  const Grid grid = read_grid(c);
  const MultiplierSymbol F = read_symbol(c);
  const SpectralField g = read_initial(c, grid);
  const double T = c.cfg.number("run", "T");
  const double eps = c.cfg.number("run", "epsilon");
  const double L = c.cfg.number("run", "L");
  const int beta_max = c.cfg.integer("run", "beta_max", 6);
  c.cfg.reject_unused();
  const CubeReport rep = classify_cubes(g, F, T, eps, L, beta_max);
  CsvWriter csv({"cube_i", "cube_j", "label", "worst_beta_i", "worst_beta_j", "ratio"});
  for (const auto& q : rep.cubes)
    csv.row(std::vector<std::string>{std::to_string(q.index[0]), std::to_string(q.index[1]), q.good ? "good" : "bad",
                                     std::to_string(q.worst_beta[0]), std::to_string(q.worst_beta[1]),
                                     format_double(q.worst_ratio)});
  out.write("cubes.csv", csv.text());
  c.results = {{"bad_mass", rep.bad_mass},
               {"epsilon_g_norm_squared", eps * rep.g_norm_squared},
               {"bad_fraction", rep.bad_fraction},
               {"tail_bound", rep.tail_bound},
               {"labels", "good up to beta_max"}};
}

void run_synthesize(Context& c, Outputs& out) {
  const Grid grid = read_grid(c);
  const MultiplierSymbol F = read_symbol(c);
  const SupportMask mask = read_mask(c, grid);
  const SpectralField f0 = read_initial(c, grid);
  SynthesisOptions opt;
  const double T = c.cfg.number("run", "T");
  const double eps = c.cfg.number("run", "epsilon");
  opt.slices = c.cfg.integer("run", "slices", 32);
  opt.solver_tolerance = c.cfg.number("run", "tolerance", 1e-12);
  opt.penalty_ladder = c.cfg.numbers("run", "penalties", opt.penalty_ladder);
  c.cfg.reject_unused();
  const ControlSynthesis s = synthesize_control(f0, F, mask, T, eps, opt);
  CsvWriter csv({"slice", "t_start", "t_end"});
  for (std::size_t j = 0; j < s.controls.size(); ++j) {
    csv.row(std::vector<double>{double(j), s.slice_edges[j], s.slice_edges[j + 1]});
    char name[32];
    std::snprintf(name, sizeof(name), "control_%04zu.tsf", j);
    out.write(name, encode_field(s.controls[j]));
  }
  out.write("control_times.csv", csv.text());
  out.write("final.tsf", encode_field(s.final_state));
  c.results = {{"cost", s.cost},
               {"achieved_ratio", s.achieved_ratio},
               {"penalty", s.penalty},
               {"cg_iterations", s.cg_iterations},
               {"reached", s.reached},
               {"cost_lower_bound", s.cost_lower_bound},
               {"mask_hash", git_blob_hash(encode_mask(mask))}};
  if (!s.reached)
    throw NumericalFailure("penalty ladder exhausted; best achieved ratio " + format_double(s.achieved_ratio));
}

void run_kovrijkine(Context& c, Outputs& out) {
  const Grid grid = read_grid(c);
  const SupportMask mask = read_mask(c, grid);
  const std::vector<double> Rs = c.cfg.numbers("run", "R");
  const double C_n = c.cfg.number("run", "C_n", 10.0);
  SpectralConstantOptions so;
  so.seed = c.cfg.seed("run", "seed");
  so.trials = c.cfg.integer("run", "trials", 4);
  c.cfg.reject_unused();
  const KovrijkineFit fit = kovrijkine_empirical(mask, Rs, C_n, so);
  CsvWriter csv({"R", "C_emp", "log_C_emp"});
  for (std::size_t i = 0; i < fit.R.size(); ++i)
    csv.row(std::vector<double>{fit.R[i], fit.C_emp[i], std::log(fit.C_emp[i])});
  out.write("kovrijkine.csv", csv.text());
  c.results = {{"intercept", fit.intercept},   {"slope", fit.slope},
               {"max_residual", fit.max_residual}, {"log_range", fit.log_range},
               {"nondecreasing", fit.nondecreasing}, {"bound_slope", fit.bound_slope},
               {"mask_hash", git_blob_hash(encode_mask(mask))}};
}

using ScenarioFn = void (*)(Context&, Outputs&);

const std::map<std::string, ScenarioFn>& dispatch() {
  static const std::map<std::string, ScenarioFn> table = {
      {"simulate", run_simulate},       {"stabilize", run_stabilize},   {"observability", run_observability},
      {"necessity", run_necessity},     {"negative-limit", run_negative_limit}, {"qa", run_qa},
      {"thick-check", run_thick_check}, {"cubes", run_cubes},           {"synthesize", run_synthesize},
      {"kovrijkine", run_kovrijkine}};
  return table;
}

}  // namespace

int run_scenario(const RunRequest& request, std::ostream& log, std::ostream& err) {
  Json manifest;
  std::optional<Outputs> out;
  std::optional<Context> ctx;
  int code = kExitOk;
  try {
    const auto it = dispatch().find(request.scenario);
    if (it == dispatch().end()) throw InvalidArgument("unknown scenario '" + request.scenario + "'");
    ctx.emplace(Context{Config(load_tree(request)), request.config.parent_path(), Json::object(), Json::object(), &log});
    if (ctx->cfg.has("", "scenario") && ctx->cfg.text("", "scenario") != request.scenario)
      throw InvalidArgument("config key 'scenario' names a different scenario than the command line");
    std::error_code ec;
    fs::create_directories(request.out_dir, ec);
    if (ec) throw InvalidArgument("cannot create output directory " + request.out_dir.string());
    out.emplace(request.out_dir);
    ctx->inputs["config"] = git_blob_hash(read_file(request.config));
    it->second(*ctx, *out);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    code = kExitValidation;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << "\n";
    code = kExitNumerical;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    code = kExitNumerical;
  }
  if (!out || !ctx) return code;
  manifest["scenario"] = request.scenario;
  manifest["status"] = code == kExitOk ? "ok" : "failed";
  manifest["overrides"] = request.overrides;
  manifest["resolved_config"] = ctx->cfg.resolved();
  manifest["inputs"] = ctx->inputs;
  manifest["results"] = ctx->results;
  manifest["outputs"] = out->hashes();
  try {
    write_file(out->dir() / "manifest.json", manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return code == kExitOk ? kExitValidation : code;
  }
  if (code == kExitOk) log << "wrote " << (out->dir() / "manifest.json").string() << "\n";
  return code;
}

}  // namespace thickstab
