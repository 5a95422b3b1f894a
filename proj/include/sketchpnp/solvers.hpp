#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sketchpnp/denoise.hpp"
#include "sketchpnp/errors.hpp"
#include "sketchpnp/geometry.hpp"
#include "sketchpnp/image.hpp"
#include "sketchpnp/metrics.hpp"
#include "sketchpnp/operators.hpp"
#include "sketchpnp/sketch.hpp"

namespace sketchpnp {

enum class GradientOption { deterministic, minibatch };

inline std::string_view to_string(GradientOption o) {
  return o == GradientOption::deterministic ? "deterministic" : "minibatch";
}

inline GradientOption gradient_option_from_string(std::string_view s) {
  if (s == "deterministic") return GradientOption::deterministic;
  if (s == "minibatch") return GradientOption::minibatch;
  throw ConfigError("unknown gradient option '" + std::string(s) + "'");
}

/// One stage of the multi-stage schedule.
struct StagePlan {
  std::size_t factor = 1;
  int n_iters = 1;
  std::optional<double> step;  // unset: 1 / (safety * ||A_s||^2)
  GradientOption option = GradientOption::deterministic;
  std::size_t minibatch_views = 0;  // minibatch option only

  friend bool operator==(const StagePlan&, const StagePlan&) = default;
};

struct TrajectoryRecord {
  int iter = 0;
  int stage = 0;
  double psnr_db = std::numeric_limits<double>::quiet_NaN();
  double data_fidelity = std::numeric_limits<double>::quiet_NaN();
  double cost_units = 0.0;
  double wall_seconds = 0.0;
  double momentum = 0.0;  // a_i applied after this iteration
  double step = 0.0;
};

using Trajectory = std::vector<TrajectoryRecord>;

struct SolverResult {
  Image x;
  Trajectory trajectory;
};

struct SolverOptions {
  int power_iters = 100;
  double power_tol = 1e-6;
  std::uint64_t power_seed = 1;
  double lipschitz_safety = 1.05;
  double resample_units = 0.05;
  /// Record full-resolution data fidelity each iteration. Not charged to cost
  /// or wall time.
  bool monitor_fidelity = true;
  bool measure_time = true;
  /// Called with (global iteration, iterate) after every update.
  std::function<void(int, const Image&)> observer;
};

/// FISTA-type extrapolation weight (i - 1) / (i + 3) for i >= 1.
inline double momentum_coeff(int i) {
  return static_cast<double>(std::max(i, 1) - 1) / static_cast<double>(std::max(i, 1) + 3);
}

/// Step size 1 / (safety * L) with L estimated by power iteration on `g`.
inline double auto_step(const FanBeamGeometry& g, const SolverOptions& opt) {
  const auto est = spectral_norm_sq(g, opt.power_iters, opt.power_tol, opt.power_seed);
  if (!(est.value > 0.0)) throw ConfigError("operator norm estimate is zero; cannot choose a step");
  return 1.0 / (opt.lipschitz_safety * est.value);
}

/// Uniform subset of `batch` distinct view indices, returned sorted.
template <typename Rng>
std::vector<std::size_t> sample_minibatch(std::size_t n_views, std::size_t batch, Rng& rng) {
  if (batch < 1 || batch > n_views) throw ConfigError("minibatch size must lie in [1, n_views]");
  std::vector<std::size_t> idx(n_views);
  for (std::size_t i = 0; i < n_views; ++i) idx[i] = i;
  for (std::size_t i = 0; i < batch; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n_views - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(batch);
  std::sort(idx.begin(), idx.end());
  return idx;
}

/// Restricted-view least-squares gradient scaled by n_views / |views|, an
/// unbiased estimate of the full gradient under uniform view sampling.
inline Image stochastic_gradient(const Image& v, const Sinogram& b, const FanBeamGeometry& g,
                                 std::span<const std::size_t> views) {
  if (views.empty()) throw ConfigError("stochastic_gradient: empty view set");
  Image grad = ls_gradient_views(v, b, g, views);
  const double scale = static_cast<double>(g.n_views()) / static_cast<double>(views.size());
  if (scale != 1.0)
    for (auto& e : grad.data) e *= scale;
  return grad;
}

namespace detail {

class Stopwatch {
 public:
  explicit Stopwatch(bool enabled) : enabled_(enabled) {}
  void resume() {
    if (enabled_) start_ = std::chrono::steady_clock::now();
  }
  void pause() {
    if (enabled_) elapsed_ += std::chrono::steady_clock::now() - start_;
  }
  double seconds() const { return std::chrono::duration<double>(elapsed_).count(); }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point start_{};
  std::chrono::steady_clock::duration elapsed_{};
};

// Shared tail of both solvers: x+ = mix(z), y+ = x+ + a_i (x+ - x).
struct MomentumState {
  Image x;
  Image y;

  void advance(Image x_next, double a) {
    for (std::size_t k = 0; k < x_next.size(); ++k)
      y.data[k] = x_next.data[k] + a * (x_next.data[k] - x.data[k]);
    x = std::move(x_next);
  }
};

inline void check_iterate(const Image& x, int stage, int iter) {
  if (!all_finite(x.data))
    throw DivergenceError("iterate became non-finite at stage " + std::to_string(stage) +
                              ", iteration " + std::to_string(iter),
                          stage, iter);
}

inline TrajectoryRecord make_record(int iter, int stage, const Image& x, const Sinogram& b,
                                    const FanBeamGeometry& g, const Image* ref,
                                    const SolverOptions& opt) {
  TrajectoryRecord rec;
  rec.iter = iter;
  rec.stage = stage;
  if (ref) rec.psnr_db = psnr(x, *ref);
  if (opt.monitor_fidelity) rec.data_fidelity = data_fidelity(x, b, g);
  return rec;
}

}  // namespace detail

/// PnP proximal gradient with FISTA-type momentum:
///   z = y - step * A^T(Ay - b);  x+ = (1-alpha) z + alpha D(z);
///   y+ = x+ + a_i (x+ - x).
/// Each iteration is charged two full-projection cost units.
inline SolverResult pnp_fista(const Sinogram& b, const FanBeamGeometry& g, const DenoiserSpec& den,
                              double alpha, int n_iters, double step, const Image& x0,
                              const Image* ref = nullptr, const SolverOptions& opt = {}) {
  validate(g);
  validate(den);
  require_shape(b, g, "pnp_fista");
  require_grid(x0.grid, g, "pnp_fista");
  if (!(step > 0.0)) throw ConfigError("pnp_fista: step must be positive");
  if (n_iters < 0) throw ConfigError("pnp_fista: negative iteration count");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");

  detail::MomentumState st{x0, x0};
  Trajectory traj;
  traj.reserve(static_cast<std::size_t>(n_iters));
  detail::Stopwatch clock(opt.measure_time);
  double cost = 0.0;

  for (int i = 1; i <= n_iters; ++i) {
    clock.resume();
    Image z = ls_gradient(st.y, b, g);
    for (std::size_t k = 0; k < z.size(); ++k) z.data[k] = st.y.data[k] - step * z.data[k];
    detail::check_iterate(z, 1, i);
    Image x_next = red_pro_mix(z, den, alpha);
    detail::check_iterate(x_next, 1, i);
    const double a = momentum_coeff(i);
    st.advance(std::move(x_next), a);
    detail::check_iterate(st.y, 1, i);
    cost += 2.0;
    clock.pause();

    auto rec = detail::make_record(i, 1, st.x, b, g, ref, opt);
    rec.cost_units = cost;
    rec.wall_seconds = clock.seconds();
    rec.momentum = a;
    rec.step = step;
    traj.push_back(rec);
    if (opt.observer) opt.observer(i, st.x);
  }
  return {std::move(st.x), std::move(traj)};
}

inline void validate_stages(const FanBeamGeometry& g, std::span<const StagePlan> stages) {
  if (stages.empty()) throw ConfigError("stage plan is empty");
  for (std::size_t k = 0; k < stages.size(); ++k) {
    const auto& s = stages[k];
    const std::string where = "stage " + std::to_string(k + 1) + ": ";
    if (s.factor < 1) throw ConfigError(where + "factor must be >= 1");
    if (g.grid.width % s.factor != 0 || g.grid.height % s.factor != 0)
      throw ConfigError(where + "factor does not divide the grid side");
    if (s.n_iters < 1) throw ConfigError(where + "n_iters must be >= 1");
    if (s.step && !(*s.step > 0.0)) throw ConfigError(where + "explicit step must be positive");
    if (s.option == GradientOption::minibatch &&
        (s.minibatch_views < 1 || s.minibatch_views > g.n_views()))
      throw ConfigError(where + "minibatch_views must lie in [1, n_views]");
  }
}

/// Multi-stage sketched-gradient PnP.
///
/// Each stage k works with the operator re-discretised on a grid coarser by
/// `factor`: the extrapolated point is downsampled, its least-squares
/// gradient (full, or over a uniformly sampled view minibatch) is taken on the
/// coarse grid and upsampled back before the denoising step. The momentum
/// counter i runs continuously across stages.
///
/// Cost per iteration: 2 projections at the stage resolution (scaled by the
/// sampled view fraction for minibatches) plus `resample_units` when the
/// stage actually resamples (factor > 1).
inline SolverResult pnp_ms2g(const Sinogram& b, const FanBeamGeometry& g,
                             std::span<const StagePlan> stages, const DenoiserSpec& den,
                             double alpha, const Image& x0, std::uint64_t seed,
                             const Image* ref = nullptr, const SolverOptions& opt = {}) {
  validate(g);
  validate(den);
  require_shape(b, g, "pnp_ms2g");
  require_grid(x0.grid, g, "pnp_ms2g");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
  validate_stages(g, stages);

  const CostModel cost_model{g.grid.width, 1.0, opt.resample_units};
  std::mt19937_64 rng(seed);
  detail::MomentumState st{x0, x0};
  Trajectory traj;
  detail::Stopwatch clock(opt.measure_time);
  double cost = 0.0;
  int i = 0;

  for (std::size_t k = 0; k < stages.size(); ++k) {
    const StagePlan& plan = stages[k];
    const int stage_no = static_cast<int>(k) + 1;
    const SketchedGeometry sk = make_sketched_geometry(g, plan.factor);
    const ResampleSpec resample{plan.factor};
    clock.resume();
    const double step = plan.step ? *plan.step : auto_step(sk.coarse, opt);
    clock.pause();

    const double proj_units = cost_model.units_per_sketched_projection(plan.factor);
    const double batch_fraction =
        plan.option == GradientOption::minibatch
            ? static_cast<double>(plan.minibatch_views) / static_cast<double>(g.n_views())
            : 1.0;
    const double iter_units =
        2.0 * proj_units * batch_fraction + (plan.factor > 1 ? cost_model.resample_units : 0.0);

    for (int j = 0; j < plan.n_iters; ++j) {
      ++i;
      clock.resume();
      const Image v = downsample(st.y, resample);
      Image grad_coarse;
      if (plan.option == GradientOption::deterministic) {
        grad_coarse = ls_gradient(v, b, sk.coarse);
      } else {
        const auto views = sample_minibatch(g.n_views(), plan.minibatch_views, rng);
        grad_coarse = stochastic_gradient(v, b, sk.coarse, views);
      }
      Image z = upsample(grad_coarse, resample);
      for (std::size_t p = 0; p < z.size(); ++p) z.data[p] = st.y.data[p] - step * z.data[p];
      detail::check_iterate(z, stage_no, i);
      Image x_next = red_pro_mix(z, den, alpha);
      detail::check_iterate(x_next, stage_no, i);
      const double a = momentum_coeff(i);
      st.advance(std::move(x_next), a);
      detail::check_iterate(st.y, stage_no, i);
      cost += iter_units;
      clock.pause();

      auto rec = detail::make_record(i, stage_no, st.x, b, g, ref, opt);
      rec.cost_units = cost;
      rec.wall_seconds = clock.seconds();
      rec.momentum = a;
      rec.step = step;
      traj.push_back(rec);
      if (opt.observer) opt.observer(i, st.x);
    }
  }
  return {std::move(st.x), std::move(traj)};
}

}  // namespace sketchpnp
