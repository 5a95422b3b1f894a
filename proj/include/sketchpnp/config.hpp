#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "sketchpnp/denoise.hpp"
#include "sketchpnp/errors.hpp"
#include "sketchpnp/geometry.hpp"
#include "sketchpnp/simulate.hpp"
#include "sketchpnp/solvers.hpp"

namespace sketchpnp {

enum class SolverKind { pnp_fista, pnp_ms2g };
enum class InitKind { zero, backprojection };

inline std::string_view to_string(SolverKind k) {
  return k == SolverKind::pnp_fista ? "pnp_fista" : "pnp_ms2g";
}
inline std::string_view to_string(InitKind k) { return k == InitKind::zero ? "zero" : "backprojection"; }

/// Everything needed to reproduce one reconstruction run.
struct ExperimentConfig {
  // [geometry]
  std::string preset = "sparse_view";
  std::size_t size = 256;
  std::optional<std::size_t> n_views;
  std::optional<double> arc_deg;
  std::optional<std::size_t> n_bins;
  std::optional<double> domain_side;
  std::optional<double> source_radius;
  std::optional<double> detector_radius;
  std::optional<double> detector_span;

  // [phantom]
  PhantomKind phantom = PhantomKind::disks;
  bool phantom_randomized = false;
  std::uint64_t phantom_seed = 0;

  // [noise]
  std::optional<double> I0;  // unset: the preset's photon count
  std::uint64_t noise_seed = 0;

  // [solver]
  SolverKind solver = SolverKind::pnp_ms2g;
  int iterations = 100;  // pnp_fista budget
  std::optional<double> step;
  double alpha = 1.0;
  std::uint64_t solver_seed = 0;
  InitKind init = InitKind::zero;
  int power_iters = 100;
  double power_tol = 1e-6;
  double lipschitz_safety = 1.05;
  double resample_units = 0.05;

  // [denoiser]
  DenoiserSpec denoiser{DenoiserKind::tv_prox, 0.002, 50, 1e-5};

  // [stage1], [stage2], ...
  std::vector<StagePlan> stages{{4, 50, std::nullopt, GradientOption::deterministic, 0},
                                {2, 50, std::nullopt, GradientOption::deterministic, 0}};

  // [output]
  std::string output_dir = "out";
  bool monitor_fidelity = true;
  bool measure_time = true;

  int budget() const {
    if (solver == SolverKind::pnp_fista) return iterations;
    int n = 0;
    for (const auto& s : stages) n += s.n_iters;
    return n;
  }

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Geometry described by the config: the preset with overrides applied.
inline FanBeamGeometry build_geometry(const ExperimentConfig& cfg) {
  FanBeamParams p = find_preset(cfg.preset, cfg.size).params;
  if (cfg.n_views) p.n_views = *cfg.n_views;
  if (cfg.arc_deg) p.arc_deg = *cfg.arc_deg;
  if (cfg.n_bins) p.n_bins = *cfg.n_bins;
  if (cfg.domain_side) p.domain_side = *cfg.domain_side;
  if (cfg.source_radius) p.source_radius = *cfg.source_radius;
  if (cfg.detector_radius) p.detector_radius = *cfg.detector_radius;
  if (cfg.detector_span) p.detector_span = *cfg.detector_span;
  return make_fan_beam(p);
}

inline PhantomSpec phantom_spec(const ExperimentConfig& cfg) {
  return PhantomSpec{cfg.phantom, cfg.size, cfg.domain_side.value_or(2.0), cfg.phantom_randomized,
                     cfg.phantom_seed};
}

inline NoiseSpec noise_spec(const ExperimentConfig& cfg) {
  return NoiseSpec{cfg.I0.value_or(find_preset(cfg.preset, cfg.size).I0), cfg.noise_seed};
}

inline SolverOptions solver_options(const ExperimentConfig& cfg) {
  SolverOptions o;
  o.power_iters = cfg.power_iters;
  o.power_tol = cfg.power_tol;
  o.power_seed = cfg.solver_seed;
  o.lipschitz_safety = cfg.lipschitz_safety;
  o.resample_units = cfg.resample_units;
  o.monitor_fidelity = cfg.monitor_fidelity;
  o.measure_time = cfg.measure_time;
  return o;
}

inline void validate(const ExperimentConfig& cfg) {
  const FanBeamGeometry g = build_geometry(cfg);
  validate(phantom_spec(cfg));
  validate(cfg.denoiser);
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
  if (cfg.I0 && !(*cfg.I0 > 0.0)) throw ConfigError("I0 must be positive");
  if (cfg.step && !(*cfg.step > 0.0)) throw ConfigError("solver step must be positive");
  if (cfg.power_iters < 1) throw ConfigError("power_iters must be >= 1");
  if (!(cfg.lipschitz_safety >= 1.0)) throw ConfigError("lipschitz_safety must be >= 1");
  if (!(cfg.resample_units >= 0.0)) throw ConfigError("resample_units must be >= 0");
  if (cfg.solver == SolverKind::pnp_ms2g) validate_stages(g, cfg.stages);
  if (cfg.budget() < 1) throw ConfigError("iteration budget must be >= 1");
}

namespace detail {

using boost::property_tree::ptree;

inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

inline bool parse_bool(const std::string& s, const std::string& key) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("key '" + key + "': expected a boolean, got '" + s + "'");
}

template <typename T>
T parse_number(const std::string& s, const std::string& key) {
  std::istringstream is(s);
  T v{};
  is >> v;
  if (is.fail() || !(is >> std::ws).eof())
    throw ConfigError("key '" + key + "': cannot parse '" + s + "'");
  if constexpr (std::is_unsigned_v<T>)
    if (s.find('-') != std::string::npos) throw ConfigError("key '" + key + "': must be nonnegative");
  return v;
}

/// Reads one section, rejecting keys not in `allowed`.
class Section {
 public:
  Section(const ptree& tree, std::string name, std::set<std::string> allowed)
      : tree_(tree), name_(std::move(name)) {
    for (const auto& [key, node] : tree_) {
      if (!node.empty()) throw ConfigError("nested keys are not supported in [" + name_ + "]");
      if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in [" + name_ + "]");
    }
  }

  std::optional<std::string> raw(const std::string& key) const {
    if (auto v = tree_.get_optional<std::string>(key)) return *v;
    return std::nullopt;
  }

  template <typename T>
  void read(const std::string& key, T& out) const {
    auto v = raw(key);
    if (!v) return;
    const std::string full = name_ + "." + key;
    if constexpr (std::is_same_v<T, std::string>)
      out = *v;
    else if constexpr (std::is_same_v<T, bool>)
      out = parse_bool(*v, full);
    else
      out = parse_number<T>(*v, full);
  }

  template <typename T>
  void read(const std::string& key, std::optional<T>& out) const {
    if (!raw(key)) return;
    T v{};
    read(key, v);
    out = v;
  }

 private:
  const ptree& tree_;
  std::string name_;
};

inline std::optional<double> parse_step(const Section& s, const std::string& where) {
  auto v = s.raw("step");
  if (!v || *v == "auto") return std::nullopt;
  return parse_number<double>(*v, where + ".step");
}

}  // namespace detail

inline ExperimentConfig parse_config(std::istream& in) {
  using detail::ptree;
  using detail::Section;
  ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax error: ") + e.what());
  }

  ExperimentConfig cfg;
  cfg.stages.clear();
  std::vector<std::pair<int, StagePlan>> stages;
  static const ptree empty;

  for (const auto& [name, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError("key '" + name + "' must belong to a section");
    if (name == "geometry") {
      Section s(body, name, {"preset", "size", "n_views", "arc_deg", "n_bins", "domain_side",
                             "source_radius", "detector_radius", "detector_span"});
      s.read("preset", cfg.preset);
      s.read("size", cfg.size);
      s.read("n_views", cfg.n_views);
      s.read("arc_deg", cfg.arc_deg);
      s.read("n_bins", cfg.n_bins);
      s.read("domain_side", cfg.domain_side);
      s.read("source_radius", cfg.source_radius);
      s.read("detector_radius", cfg.detector_radius);
      s.read("detector_span", cfg.detector_span);
    } else if (name == "phantom") {
      Section s(body, name, {"kind", "randomized", "seed"});
      if (auto k = s.raw("kind")) cfg.phantom = phantom_kind_from_string(*k);
      s.read("randomized", cfg.phantom_randomized);
      s.read("seed", cfg.phantom_seed);
    } else if (name == "noise") {
      Section s(body, name, {"I0", "seed"});
      s.read("I0", cfg.I0);
      s.read("seed", cfg.noise_seed);
    } else if (name == "solver") {
      Section s(body, name, {"kind", "iterations", "step", "alpha", "seed", "init", "power_iters",
                             "power_tol", "lipschitz_safety", "resample_units"});
      if (auto k = s.raw("kind")) {
        if (*k == "pnp_fista")
          cfg.solver = SolverKind::pnp_fista;
        else if (*k == "pnp_ms2g")
          cfg.solver = SolverKind::pnp_ms2g;
        else
          throw ConfigError("unknown solver kind '" + *k + "'");
      }
      s.read("iterations", cfg.iterations);
      cfg.step = detail::parse_step(s, name);
      s.read("alpha", cfg.alpha);
      s.read("seed", cfg.solver_seed);
      if (auto k = s.raw("init")) {
        if (*k == "zero")
          cfg.init = InitKind::zero;
        else if (*k == "backprojection")
          cfg.init = InitKind::backprojection;
        else
          throw ConfigError("unknown init '" + *k + "'");
      }
      s.read("power_iters", cfg.power_iters);
      s.read("power_tol", cfg.power_tol);
      s.read("lipschitz_safety", cfg.lipschitz_safety);
      s.read("resample_units", cfg.resample_units);
    } else if (name == "denoiser") {
      Section s(body, name, {"kind", "strength", "inner_iters", "tol"});
      if (auto k = s.raw("kind")) cfg.denoiser.kind = denoiser_kind_from_string(*k);
      s.read("strength", cfg.denoiser.strength);
      s.read("inner_iters", cfg.denoiser.inner_iters);
      s.read("tol", cfg.denoiser.tol);
    } else if (name.starts_with("stage")) {
      const int index = detail::parse_number<int>(name.substr(5), "section " + name);
      Section s(body, name, {"factor", "iterations", "step", "option", "minibatch_views"});
      StagePlan plan;
      s.read("factor", plan.factor);
      s.read("iterations", plan.n_iters);
      plan.step = detail::parse_step(s, name);
      if (auto o = s.raw("option")) plan.option = gradient_option_from_string(*o);
      s.read("minibatch_views", plan.minibatch_views);
      stages.emplace_back(index, plan);
    } else if (name == "output") {
      Section s(body, name, {"dir", "monitor_fidelity", "timing"});
      s.read("dir", cfg.output_dir);
      s.read("monitor_fidelity", cfg.monitor_fidelity);
      if (auto t = s.raw("timing")) {
        if (*t == "measured")
          cfg.measure_time = true;
        else if (*t == "none")
          cfg.measure_time = false;
        else
          throw ConfigError("output.timing must be 'measured' or 'none'");
      }
    } else {
      throw ConfigError("unknown section [" + name + "]");
    }
  }

  std::sort(stages.begin(), stages.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t k = 0; k < stages.size(); ++k) {
    if (stages[k].first != static_cast<int>(k) + 1)
      throw ConfigError("stage sections must be numbered stage1, stage2, ... without gaps");
    cfg.stages.push_back(stages[k].second);
  }
  if (stages.empty()) cfg.stages = ExperimentConfig{}.stages;
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  return parse_config(in);
}

/// Writes every field, so the output parses back to an equal config.
inline std::string serialize_config(const ExperimentConfig& cfg) {
  using detail::format_double;
  std::ostringstream os;
  auto opt_num = [&](const char* key, const auto& v) {
    if (!v) return;
    if constexpr (std::is_floating_point_v<std::decay_t<decltype(*v)>>)
      os << key << " = " << format_double(*v) << '\n';
    else
      os << key << " = " << *v << '\n';
  };

  os << "[geometry]\n";
  os << "preset = " << cfg.preset << '\n';
  os << "size = " << cfg.size << '\n';
  opt_num("n_views", cfg.n_views);
  opt_num("arc_deg", cfg.arc_deg);
  opt_num("n_bins", cfg.n_bins);
  opt_num("domain_side", cfg.domain_side);
  opt_num("source_radius", cfg.source_radius);
  opt_num("detector_radius", cfg.detector_radius);
  opt_num("detector_span", cfg.detector_span);

  os << "\n[phantom]\n";
  os << "kind = " << to_string(cfg.phantom) << '\n';
  os << "randomized = " << (cfg.phantom_randomized ? "true" : "false") << '\n';
  os << "seed = " << cfg.phantom_seed << '\n';

  os << "\n[noise]\n";
  opt_num("I0", cfg.I0);
  os << "seed = " << cfg.noise_seed << '\n';

  os << "\n[solver]\n";
  os << "kind = " << to_string(cfg.solver) << '\n';
  os << "iterations = " << cfg.iterations << '\n';
  os << "step = " << (cfg.step ? format_double(*cfg.step) : "auto") << '\n';
  os << "alpha = " << format_double(cfg.alpha) << '\n';
  os << "seed = " << cfg.solver_seed << '\n';
  os << "init = " << to_string(cfg.init) << '\n';
  os << "power_iters = " << cfg.power_iters << '\n';
  os << "power_tol = " << format_double(cfg.power_tol) << '\n';
  os << "lipschitz_safety = " << format_double(cfg.lipschitz_safety) << '\n';
  os << "resample_units = " << format_double(cfg.resample_units) << '\n';

  os << "\n[denoiser]\n";
  os << "kind = " << to_string(cfg.denoiser.kind) << '\n';
  os << "strength = " << format_double(cfg.denoiser.strength) << '\n';
  os << "inner_iters = " << cfg.denoiser.inner_iters << '\n';
  os << "tol = " << format_double(cfg.denoiser.tol) << '\n';

  for (std::size_t k = 0; k < cfg.stages.size(); ++k) {
    const auto& s = cfg.stages[k];
    os << "\n[stage" << k + 1 << "]\n";
    os << "factor = " << s.factor << '\n';
    os << "iterations = " << s.n_iters << '\n';
    os << "step = " << (s.step ? format_double(*s.step) : "auto") << '\n';
    os << "option = " << to_string(s.option) << '\n';
    os << "minibatch_views = " << s.minibatch_views << '\n';
  }

  os << "\n[output]\n";
  os << "dir = " << cfg.output_dir << '\n';
  os << "monitor_fidelity = " << (cfg.monitor_fidelity ? "true" : "false") << '\n';
  os << "timing = " << (cfg.measure_time ? "measured" : "none") << '\n';
  return os.str();
}

}  // namespace sketchpnp
