// Command-line front end: run experiments, compare runs, inspect presets.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sketchpnp/config.hpp"
#include "sketchpnp/errors.hpp"
#include "sketchpnp/experiment.hpp"
#include "sketchpnp/operators.hpp"
#include "sketchpnp/simulate.hpp"

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kDivergence = 3, kIo = 4 };

using namespace sketchpnp;

int cmd_run(const std::string& config_path, const std::optional<std::string>& out,
            const std::optional<std::size_t>& size, const std::optional<std::uint64_t>& seed) {
  ExperimentConfig cfg = load_config(config_path);
  if (out) cfg.output_dir = *out;
  if (size) cfg.size = *size;
  if (seed) {
    cfg.noise_seed = *seed;
    cfg.solver_seed = *seed;
  }
  const RunArtifacts run = run_experiment(cfg);
  std::printf("%s: %d iterations, final PSNR %.3f dB, cost %.2f units, %.2f s -> %s\n",
              run.summary.solver.c_str(), run.summary.iterations, run.summary.final_psnr_db,
              run.summary.total_cost_units, run.summary.wall_seconds, run.dir.string().c_str());
  return kOk;
}

int cmd_compare(const std::vector<std::string>& dirs) {
  std::vector<RunArtifacts> runs;
  for (const auto& d : dirs) runs.push_back(load_run(d));
  std::cout << compare_runs(runs).to_text();
  return kOk;
}

int cmd_presets() {
  for (const auto& p : standard_presets()) {
    const FanBeamGeometry g = make_fan_beam(p.params);
    std::printf(
        "%-14s views=%-4zu arc=[0,%g) deg  bins=%zu  grid=%zux%zu  A=%zux%zu  I0=%.6g  "
        "source_radius=%g  detector_radius=%g  detector_span=%.6g\n",
        p.name.c_str(), g.n_views(), g.arc_deg, g.n_bins, g.grid.width, g.grid.height, g.rows(),
        g.cols(), p.I0, g.source_radius, g.detector_radius, g.detector_span);
  }
  return kOk;
}

int cmd_adjoint_test(std::size_t size, const std::string& preset, int pairs, std::uint64_t seed) {
  const FanBeamGeometry g = make_fan_beam(find_preset(preset, size).params);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (int k = 0; k < pairs; ++k) {
    Image x(g.grid);
    Sinogram s(g.n_views(), g.n_bins);
    for (auto& v : x.data) v = normal(rng);
    for (auto& v : s.data) v = normal(rng);
    const Sinogram ax = project(x, g);
    const Image ats = backproject(s, g);
    const double mismatch = std::abs(dot(ax.data, s.data) - dot(x.data, ats.data)) /
                            (norm2(ax.data) * norm2(s.data));
    worst = std::max(worst, mismatch);
  }
  std::printf("adjoint mismatch (max over %d pairs, %s, %zux%zu): %.3e\n", pairs, preset.c_str(),
              size, size, worst);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sketched plug-and-play CT reconstruction"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::size_t> size;
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "Run one experiment from a config file");
  run->add_option("--config", config_path, "Config file")->required();
  run->add_option("--out", out, "Output directory (overrides [output] dir)");
  run->add_option("--size", size, "Grid side in pixels (overrides [geometry] size)");
  run->add_option("--seed", seed, "Seed for noise and solver randomness");

  std::vector<std::string> dirs;
  auto* compare = app.add_subcommand("compare", "Tabulate finished runs");
  compare->add_option("dirs", dirs, "Run directories")->required();

  auto* presets = app.add_subcommand("presets", "List the standard acquisition geometries");

  std::size_t adj_size = 64;
  std::string adj_preset = "sparse_view";
  int adj_pairs = 20;
  std::uint64_t adj_seed = 1;
  auto* adjoint = app.add_subcommand("adjoint-test", "Check <Ax, s> = <x, A^T s> on random pairs");
  adjoint->add_option("--size", adj_size, "Grid side in pixels");
  adjoint->add_option("--preset", adj_preset, "Geometry preset");
  adjoint->add_option("--pairs", adj_pairs, "Number of random pairs");
  adjoint->add_option("--seed", adj_seed, "Random seed");

  auto* version = app.add_subcommand("version", "Print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*run) return cmd_run(config_path, out, size, seed);
    if (*compare) return cmd_compare(dirs);
    if (*presets) return cmd_presets();
    if (*adjoint) return cmd_adjoint_test(adj_size, adj_preset, adj_pairs, adj_seed);
    if (*version) {
      std::printf("sketchpnp %s\n", SKETCHPNP_VERSION);
      return kOk;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kConfig;
  } catch (const InputError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kConfig;
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "divergence: %s\n", e.what());
    return kDivergence;
  } catch (const IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kIo;
  }
  return kOk;
}
