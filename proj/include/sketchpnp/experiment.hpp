#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "sketchpnp/config.hpp"
#include "sketchpnp/errors.hpp"
#include "sketchpnp/io.hpp"
#include "sketchpnp/metrics.hpp"
#include "sketchpnp/operators.hpp"
#include "sketchpnp/simulate.hpp"
#include "sketchpnp/solvers.hpp"

namespace sketchpnp {

struct RunSummary {
  std::string solver;
  int iterations = 0;
  double final_psnr_db = std::numeric_limits<double>::quiet_NaN();
  double total_cost_units = 0.0;
  double wall_seconds = 0.0;
};

/// Files written by one run plus their in-memory contents.
struct RunArtifacts {
  std::filesystem::path dir;
  ExperimentConfig config;
  Trajectory trajectory;
  RunSummary summary;
  Image reconstruction;

  std::filesystem::path image_path() const { return dir / "reconstruction.bin"; }
  std::filesystem::path preview_path() const { return dir / "reconstruction.pgm"; }
  std::filesystem::path trajectory_path() const { return dir / "trajectory.csv"; }
  std::filesystem::path config_path() const { return dir / "config.ini"; }
  std::filesystem::path summary_path() const { return dir / "summary.txt"; }
};

/// Scaled backprojection c * A^T b with c minimising ||c A A^T b - b||.
inline Image backprojection_start(const Sinogram& b, const FanBeamGeometry& g) {
  Image x = backproject(b, g);
  const Sinogram ax = project(x, g);
  const double denom = dot(ax.data, ax.data);
  const double c = denom > 0.0 ? dot(ax.data, b.data) / denom : 0.0;
  for (auto& v : x.data) v *= c;
  return x;
}

inline KeyValues to_key_values(const RunSummary& s) {
  return {{"solver", s.solver},
          {"iterations", std::to_string(s.iterations)},
          {"final_psnr_db", detail::format_double(s.final_psnr_db)},
          {"total_cost_units", detail::format_double(s.total_cost_units)},
          {"wall_seconds", detail::format_double(s.wall_seconds)}};
}

inline RunSummary summary_from_key_values(const KeyValues& kv) {
  RunSummary s;
  try {
    s.solver = kv.at("solver");
    s.iterations = std::stoi(kv.at("iterations"));
    s.final_psnr_db = std::stod(kv.at("final_psnr_db"));
    s.total_cost_units = std::stod(kv.at("total_cost_units"));
    s.wall_seconds = std::stod(kv.at("wall_seconds"));
  } catch (const std::exception&) {
    throw IoError("summary file is missing fields or malformed");
  }
  return s;
}

/// Phantom -> simulated data -> reconstruction -> artifacts in cfg.output_dir.
inline RunArtifacts run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const FanBeamGeometry g = build_geometry(cfg);
  const Image truth = make_phantom(phantom_spec(cfg));
  const Sinogram b = simulate_measurements(truth, g, noise_spec(cfg));
  const Image x0 = cfg.init == InitKind::zero ? Image(g.grid) : backprojection_start(b, g);
  const SolverOptions opt = solver_options(cfg);

  RunArtifacts run;
  run.dir = cfg.output_dir;
  run.config = cfg;
  std::error_code ec;
  std::filesystem::create_directories(run.dir, ec);
  if (ec) throw IoError("cannot create output directory '" + run.dir.string() + "': " + ec.message());

  SolverResult result;
  if (cfg.solver == SolverKind::pnp_fista) {
    const double step = cfg.step ? *cfg.step : auto_step(g, opt);
    result = pnp_fista(b, g, cfg.denoiser, cfg.alpha, cfg.iterations, step, x0, &truth, opt);
  } else {
    result = pnp_ms2g(b, g, cfg.stages, cfg.denoiser, cfg.alpha, x0, cfg.solver_seed, &truth, opt);
  }

  run.trajectory = std::move(result.trajectory);
  run.reconstruction = std::move(result.x);
  run.summary.solver = std::string(to_string(cfg.solver));
  run.summary.iterations = static_cast<int>(run.trajectory.size());
  run.summary.final_psnr_db = psnr(run.reconstruction, truth);
  if (!run.trajectory.empty()) {
    run.summary.total_cost_units = run.trajectory.back().cost_units;
    run.summary.wall_seconds = run.trajectory.back().wall_seconds;
  }

  write_image(run.image_path(), run.reconstruction);
  write_pgm(run.preview_path(), run.reconstruction);
  write_image(run.dir / "truth.bin", truth);
  write_pgm(run.dir / "truth.pgm", truth);
  write_trajectory_csv(run.trajectory_path(), run.trajectory);
  {
    std::ofstream out(run.config_path());
    out << serialize_config(cfg);
    if (!out) throw IoError("cannot write '" + run.config_path().string() + "'");
  }
  write_key_values(run.summary_path(), to_key_values(run.summary));
  return run;
}

/// Reloads a run directory written by `run_experiment`.
inline RunArtifacts load_run(const std::filesystem::path& dir) {
  RunArtifacts run;
  run.dir = dir;
  run.config = load_config((dir / "config.ini").string());
  run.trajectory = read_trajectory_csv(run.trajectory_path());
  run.summary = summary_from_key_values(read_key_values(run.summary_path()));
  const FanBeamGeometry g = build_geometry(run.config);
  run.reconstruction = read_image(run.image_path(), g.grid.pixel_size);
  return run;
}

/// PSNR at `cost` by linear interpolation in cost; NaN outside the recorded range.
inline double psnr_at_cost(const Trajectory& traj, double cost) {
  if (traj.empty() || cost < traj.front().cost_units || cost > traj.back().cost_units)
    return std::numeric_limits<double>::quiet_NaN();
  auto hi = std::lower_bound(traj.begin(), traj.end(), cost,
                             [](const TrajectoryRecord& r, double c) { return r.cost_units < c; });
  if (hi->cost_units == cost || hi == traj.begin()) return hi->psnr_db;
  auto lo = hi - 1;
  const double t = (cost - lo->cost_units) / (hi->cost_units - lo->cost_units);
  return lo->psnr_db + t * (hi->psnr_db - lo->psnr_db);
}

struct ComparisonRow {
  std::string label;
  std::string solver;
  double final_psnr_db;
  double cost_units;
  double wall_seconds;
  double psnr_at_matched_cost;
};

struct ComparisonTable {
  double matched_cost = 0.0;  // smallest final cost among the runs
  std::vector<ComparisonRow> rows;

  std::string to_text() const {
    std::ostringstream os;
    os << std::fixed;
    os << std::left << std::setw(28) << "run" << std::setw(11) << "solver" << std::right
       << std::setw(12) << "psnr_db" << std::setw(14) << "cost_units" << std::setw(12) << "wall_s"
       << std::setw(16) << "psnr@" << std::setprecision(1) << matched_cost << '\n';
    for (const auto& r : rows) {
      os << std::left << std::setw(28) << r.label << std::setw(11) << r.solver << std::right
         << std::setprecision(3) << std::setw(12) << r.final_psnr_db << std::setprecision(2)
         << std::setw(14) << r.cost_units << std::setw(12) << r.wall_seconds
         << std::setprecision(3) << std::setw(16) << r.psnr_at_matched_cost << '\n';
    }
    return os.str();
  }
};

inline ComparisonTable compare_runs(const std::vector<RunArtifacts>& runs) {
  ComparisonTable table;
  if (runs.empty()) return table;
  const FanBeamGeometry g0 = build_geometry(runs.front().config);
  const PhantomSpec p0 = phantom_spec(runs.front().config);
  table.matched_cost = std::numeric_limits<double>::infinity();
  for (const auto& r : runs) {
    if (!(build_geometry(r.config) == g0) || !(phantom_spec(r.config) == p0))
      throw InputError("compare: runs do not share phantom and geometry");
    if (!r.trajectory.empty())
      table.matched_cost = std::min(table.matched_cost, r.trajectory.back().cost_units);
  }
  if (!std::isfinite(table.matched_cost)) table.matched_cost = 0.0;
  for (const auto& r : runs) {
    table.rows.push_back({r.dir.filename().empty() ? r.dir.parent_path().filename().string()
                                                   : r.dir.filename().string(),
                          r.summary.solver, r.summary.final_psnr_db, r.summary.total_cost_units,
                          r.summary.wall_seconds, psnr_at_cost(r.trajectory, table.matched_cost)});
  }
  return table;
}

}  // namespace sketchpnp
