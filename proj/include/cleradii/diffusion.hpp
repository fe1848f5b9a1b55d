#pragma once

// Monte Carlo engine for the radial diffusion
//   d theta = (kappa-4)/2 cot(theta/2) dt + sqrt(kappa) dB,
// lifted to the real line with independent fair-coin excursion signs at the
// singular levels 2 pi Z.  Far from a level the update is drift-capped
// Euler-Maruyama with a quadratic step policy; within `u_ball` of a level
// the modulus is propagated with the exact squared-Bessel transition
// (dimension d = (3 kappa - 8)/kappa) plus an Euler correction for the
// smooth residual drift, and level touches are drawn from the exact
// endpoint-conditioned touch probability.  Every path is a pure function of
// (seed, path index), so batches merge identically for any worker count.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "cleradii/errors.hpp"
#include "cleradii/kappa.hpp"
#include "cleradii/law.hpp"
#include "cleradii/martingale.hpp"
#include "cleradii/rng.hpp"
#include "cleradii/stats.hpp"

namespace cleradii::diffusion {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Step-policy constants (see the step-size policy notes in the README).
inline constexpr double kStepPolicyC = 0.05;  // dt = clamp(c u^2, ...)
inline constexpr double kBallRadius = 1.0;    // exact-kernel region

struct SimConfig {
  Kappa kappa;
  double theta0 = 0.0;
  double dt_max = 1e-3;
  double dt_floor = 1e-9;
  std::uint64_t seed = 1;
  double max_time = 0.0;  // <= 0 selects the default horizon

  explicit SimConfig(Kappa k, double theta0_ = 0.0, double dt_max_ = 1e-3,
                     double dt_floor_ = 1e-9, std::uint64_t seed_ = 1,
                     double max_time_ = 0.0)
      : kappa(k),
        theta0(theta0_),
        dt_max(dt_max_),
        dt_floor(dt_floor_),
        seed(seed_),
        max_time(max_time_) {
    require(dt_max > 0.0 && dt_floor > 0.0 && dt_floor <= dt_max,
            "SimConfig: need 0 < dt_floor <= dt_max");
    require(std::isfinite(theta0), "SimConfig: theta0 must be finite");
    require(std::isfinite(max_time), "SimConfig: max_time must be finite");
  }

  // Censoring horizon: explicit value, or 1e4 * E[B] when unset.
  double horizon() const {
    return max_time > 0.0 ? max_time : 1e4 * law::mean(kappa);
  }
};

struct ExitSample {
  double exit_time = 0.0;
  int exit_side = 0;  // +1 / -1 for +-2 pi in lifted coordinates; 0 censored
  std::uint64_t steps = 0;
  std::uint64_t seed_index = 0;
  bool censored = false;
};

struct FirstHitSample {
  double hit_time = 0.0;
  double theta_hit = 0.0;  // lifted level that was reached
  std::uint64_t steps = 0;
  bool censored = false;
};

// Optional step-resolution recording of a single trajectory.
struct DiffusionPath {
  std::vector<double> times;   // starts at 0
  std::vector<double> thetas;  // lifted coordinates
  std::vector<int> coin_flips;
};

// Fold map R: R(x) = |x| on [-2 pi, 2 pi], R(4 pi + x) = R(x).
inline double lift_fold(double theta_lifted) {
  return std::abs(std::remainder(theta_lifted, 2.0 * kTwoPi));
}

namespace detail {

inline double nearest_level(double theta) {
  return kTwoPi * std::nearbyint(theta / kTwoPi);
}

// cot(theta/2); 2 pi periodic, so it only depends on u = theta - 2 pi k.
inline double cot_half(double theta) { return 1.0 / std::tan(0.5 * theta); }

// Smooth remainder of the drift after removing the Bessel core:
//   (kappa-4)/2 cot(u/2) - (kappa-4)/u = -(kappa-4) u (1/12 + u^2/720 + ...)
// The Laurent series avoids the cancellation of the direct form near 0.
inline double residual_drift(double kappa, double u) {
  if (u < 0.7) {
    const double u2 = u * u;
    return -(kappa - 4.0) * u *
           (1.0 / 12.0 + u2 / 720.0 + u2 * u2 / 30240.0);
  }
  return (kappa - 4.0) * (0.5 * cot_half(u) - 1.0 / u);
}

}  // namespace detail

// Single drift-capped Euler update of the lifted coordinate, with mirror
// fold-reflection if the update crosses the nearest singular level.  The
// Monte Carlo samplers below additionally randomize the post-touch sign.
inline double step(double theta, double dt, double noise, Kappa kappa) {
  const double k = kappa.value();
  const double level = detail::nearest_level(theta);
  const double u = theta - level;
  const double au = std::abs(u);
  double drift = au == 0.0 ? 0.0 : 0.5 * (k - 4.0) * detail::cot_half(u);
  const double cap = 0.5 * au / dt;
  drift = std::clamp(drift, -cap, cap);
  double next = theta + drift * dt + std::sqrt(k * dt) * noise;
  if ((next - level) * u < 0.0) next = 2.0 * level - next;  // fold-reflection
  return next;
}

namespace detail {

// Per-kappa constants plus the reciprocal-Gamma tables used by the
// endpoint-conditioned touch probability.
struct KernelContext {
  double kappa;
  double d;        // Bessel dimension
  double nu;       // d/2 - 1, in (-1, 0)
  double half_d;
  static constexpr int kTableSize = 150;
  double inv_gamma_plus[kTableSize];   // 1/Gamma(m + 1 + nu)
  double inv_gamma_minus[kTableSize];  // 1/Gamma(m + 1 - nu)

  explicit KernelContext(Kappa k) : kappa(k.value()) {
    d = k.bessel_dimension();
    nu = 0.5 * d - 1.0;
    half_d = 0.5 * d;
    for (int m = 0; m < kTableSize; ++m) {
      inv_gamma_plus[m] = 1.0 / std::tgamma(double(m) + 1.0 + nu);
      inv_gamma_minus[m] = 1.0 / std::tgamma(double(m) + 1.0 - nu);
    }
  }

  // P(no level touch on [0,h] | endpoints) = I_{-nu}(w) / I_nu(w) with
  // w = sqrt(z0 z1) / h.  Beyond w = 14 the touch probability is below
  // 1e-12 and is treated as zero.
  double no_touch_probability(double w) const {
    if (w <= 1e-12) return 0.0;
    if (w >= 14.0) return 1.0;
    const double q = 0.25 * w * w;
    double term = 1.0;
    double num = inv_gamma_minus[0];
    double den = inv_gamma_plus[0];
    for (int m = 1; m < kTableSize; ++m) {
      term *= q / double(m);
      num += term * inv_gamma_minus[m];
      den += term * inv_gamma_plus[m];
      if (term < 1e-17 * den) break;
    }
    return std::pow(0.5 * w, -2.0 * nu) * num / den;
  }
};

enum class StopRule {
  absorb_outer,  // reflect at level 0, absorb at +-2 pi (exit-time law)
  absorb_all     // absorb at every level of 2 pi Z (first-hit law)
};

struct PathOutcome {
  double time = 0.0;
  double level = 0.0;  // lifted level at absorption
  std::uint64_t steps = 0;
  bool censored = false;
};

// Simulates one path until absorption, the horizon, or `stop_at` (whichever
// comes first).  `on_time` is called at every requested checkpoint.
template <class CheckpointFn>
PathOutcome run_path(const SimConfig& cfg, const KernelContext& ctx,
                     StopRule rule, std::uint64_t path_index,
                     const std::vector<double>& checkpoints,
                     CheckpointFn&& on_checkpoint, DiffusionPath* record) {
  const double k = ctx.kappa;
  const double horizon = cfg.horizon();
  rng::Philox gen(cfg.seed, 2 * path_index);
  rng::Philox coins(cfg.seed, 2 * path_index + 1);

  double theta = cfg.theta0;
  double t = 0.0;
  PathOutcome out;

  std::size_t next_cp = 0;
  if (record) {
    record->times.push_back(0.0);
    record->thetas.push_back(theta);
  }

  auto is_absorbing = [&](double level) {
    return rule == StopRule::absorb_all || level != 0.0;
  };

  // immediate absorption when starting on an absorbing level
  {
    const double level0 = nearest_level(theta);
    if (theta == level0 && is_absorbing(level0)) {
      out.level = level0;
      while (next_cp < checkpoints.size()) {
        on_checkpoint(checkpoints[next_cp++], 0.0, theta, true);
      }
      return out;
    }
  }

  for (;;) {
    const double level = nearest_level(theta);
    const double u = theta - level;
    const double au = std::abs(u);
    const bool absorbing = is_absorbing(level);

    // nominal step from the quadratic policy; the exact kernel needs no
    // shrinking near the level, so the ball radius floors the policy length
    const double ueff = std::max(au, kBallRadius);
    double dt = std::clamp(kStepPolicyC * ueff * ueff, cfg.dt_floor,
                           cfg.dt_max);
    // land exactly on pending checkpoints and the horizon
    bool clipped = false;
    double stop_time = horizon;
    if (next_cp < checkpoints.size()) {
      stop_time = std::min(stop_time, checkpoints[next_cp]);
    }
    if (t + dt >= stop_time) {
      dt = stop_time - t;
      clipped = true;
      if (dt <= 0.0) dt = 0.0;
    }

    double new_theta;
    bool absorbed = false;
    double absorbed_at = 0.0;

    if (dt == 0.0) {
      new_theta = theta;
    } else if (au < kBallRadius) {
      // exact squared-Bessel kernel around the level
      const double z0 = u * u / k;
      const std::uint64_t n_mix = rng::poisson(gen, z0 / (2.0 * dt));
      const double g = rng::gamma(gen, ctx.half_d + double(n_mix));
      const double z1 = 2.0 * dt * g;
      const double w = std::sqrt(z0 * z1) / dt;
      const double p_no = ctx.no_touch_probability(w);
      bool touched;
      if (p_no <= 0.0) {
        touched = true;
      } else if (p_no >= 1.0) {
        touched = false;
      } else {
        touched = gen.next_double() >= p_no;
      }
      if (touched && absorbing) {
        absorbed = true;
        absorbed_at = t + 0.5 * dt;
        new_theta = level;
      } else {
        double u1 = std::sqrt(k * z1);
        u1 = std::max(u1 + residual_drift(k, u1) * dt, 0.0);
        double sgn;
        if (touched) {
          const bool heads = coins.next_coin();
          sgn = heads ? 1.0 : -1.0;
          if (record) record->coin_flips.push_back(heads ? 1 : -1);
        } else {
          sgn = u > 0.0 ? 1.0 : -1.0;
        }
        new_theta = level + sgn * u1;
      }
    } else {
      // drift-capped Euler far from the levels
      double drift = 0.5 * (k - 4.0) * cot_half(u);
      const double cap = 0.5 * au / dt;
      drift = std::clamp(drift, -cap, cap);
      new_theta = theta + drift * dt + std::sqrt(k * dt) * gen.next_normal();
      const double u1 = new_theta - level;
      bool touched = false;
      double frac = 1.0;
      if (u1 * u <= 0.0) {
        touched = true;
        frac = au / (au + std::abs(u1));
      } else {
        // driftless-bridge touch probability for same-side endpoints
        const double expo = 2.0 * au * std::abs(u1) / (k * dt);
        if (expo < 30.0 && gen.next_double() < std::exp(-expo)) {
          touched = true;
          frac = 0.5;
        }
      }
      if (touched) {
        if (absorbing) {
          absorbed = true;
          absorbed_at = t + frac * dt;
          new_theta = level;
        } else {
          const bool heads = coins.next_coin();
          if (record) record->coin_flips.push_back(heads ? 1 : -1);
          new_theta = level + (heads ? 1.0 : -1.0) * std::abs(u1);
        }
      }
    }

    t += dt;
    theta = new_theta;
    ++out.steps;
    if (record && dt > 0.0) {
      record->times.push_back(absorbed ? absorbed_at : t);
      record->thetas.push_back(theta);
    }

    if (absorbed) {
      out.time = absorbed_at;
      out.level = theta;
      while (next_cp < checkpoints.size()) {
        on_checkpoint(checkpoints[next_cp++], absorbed_at, theta, true);
      }
      return out;
    }

    if (clipped && next_cp < checkpoints.size() &&
        t >= checkpoints[next_cp] - 1e-300) {
      t = checkpoints[next_cp];
      on_checkpoint(checkpoints[next_cp], t, theta, false);
      ++next_cp;
    }

    if (t >= horizon) {
      out.time = horizon;
      out.censored = true;
      return out;
    }
  }
}

inline const std::vector<double>& no_checkpoints() {
  static const std::vector<double> empty;
  return empty;
}

inline auto null_checkpoint_fn() {
  return [](double, double, double, bool) {};
}

inline unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CLERADII_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return unsigned(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? hc : 1;
}

// Runs fn(i) for i in [0, n) over `workers` threads in contiguous chunks.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  workers = std::max(1u, std::min<unsigned>(workers, unsigned(n ? n : 1)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

// First passage of the lifted path to +-2 pi (theta0 in [-2 pi, 2 pi]),
// reflecting with fair coins at 0.  Deterministic given (config, index).
inline ExitSample sample_exit(const SimConfig& cfg, std::uint64_t path_index = 0,
                              DiffusionPath* record = nullptr) {
  require(std::abs(cfg.theta0) <= kTwoPi,
          "sample_exit: theta0 must lie in [-2 pi, 2 pi]");
  ExitSample s;
  s.seed_index = path_index;
  if (std::abs(cfg.theta0) == kTwoPi) {
    s.exit_side = cfg.theta0 > 0 ? 1 : -1;
    return s;  // already at the boundary
  }
  const detail::KernelContext ctx(cfg.kappa);
  const auto out = detail::run_path(cfg, ctx, detail::StopRule::absorb_outer,
                                    path_index, detail::no_checkpoints(),
                                    detail::null_checkpoint_fn(), record);
  s.exit_time = out.time;
  s.steps = out.steps;
  s.censored = out.censored;
  s.exit_side = out.censored ? 0 : (out.level > 0 ? 1 : -1);
  return s;
}

// First hitting of any level of 2 pi Z (used for the expected-first-hit
// checks); absorbing at both neighbors of theta0.
inline FirstHitSample sample_first_hit(const SimConfig& cfg,
                                       std::uint64_t path_index = 0) {
  const detail::KernelContext ctx(cfg.kappa);
  const auto out = detail::run_path(cfg, ctx, detail::StopRule::absorb_all,
                                    path_index, detail::no_checkpoints(),
                                    detail::null_checkpoint_fn(), nullptr);
  FirstHitSample s;
  s.hit_time = out.time;
  s.theta_hit = out.level;
  s.steps = out.steps;
  s.censored = out.censored;
  return s;
}

struct BatchResult {
  std::vector<ExitSample> samples;  // uncensored, in seed-index order
  std::size_t censored = 0;
  std::size_t requested = 0;
};

namespace detail {

inline BatchResult run_exit_batch(const SimConfig& cfg, std::size_t n,
                                  unsigned workers) {
  const KernelContext ctx(cfg.kappa);
  std::vector<ExitSample> all(n);
  parallel_for(n, resolve_workers(workers), [&](std::size_t i) {
    ExitSample s;
    s.seed_index = i;
    const auto out = run_path(cfg, ctx, StopRule::absorb_outer, i,
                              no_checkpoints(), null_checkpoint_fn(), nullptr);
    s.exit_time = out.time;
    s.steps = out.steps;
    s.censored = out.censored;
    s.exit_side = out.censored ? 0 : (out.level > 0 ? 1 : -1);
    all[i] = s;
  });
  BatchResult res;
  res.requested = n;
  res.samples.reserve(n);
  for (auto& s : all) {
    if (s.censored) {
      ++res.censored;
    } else {
      res.samples.push_back(s);
    }
  }
  return res;
}

}  // namespace detail

// n independent exit samples from seeds derived by the splittable scheme;
// reproducible bit-for-bit given (seed, n) for any worker count.  With the
// default horizon a censored fraction of 1e-6 or more aborts the run.
inline BatchResult sample_exit_batch(const SimConfig& cfg, std::size_t n,
                                     unsigned workers = 0) {
  require(n >= 1, "sample_exit_batch: n must be at least 1");
  require(std::abs(cfg.theta0) < kTwoPi,
          "sample_exit_batch: theta0 must lie in (-2 pi, 2 pi)");
  BatchResult res = detail::run_exit_batch(cfg, n, workers);
  if (double(res.censored) >= std::max(1.0, 1e-6 * double(n))) {
    throw censoring_error("sample_exit_batch: censored fraction " +
                          std::to_string(double(res.censored) / double(n)) +
                          " exceeds 1e-6 of samples");
  }
  return res;
}

inline stats::EmpiricalLaw to_empirical_law(const BatchResult& batch,
                                            const SimConfig& cfg) {
  std::vector<double> xs;
  xs.reserve(batch.samples.size());
  for (const auto& s : batch.samples) xs.push_back(s.exit_time);
  std::string tag = "kappa=" + std::to_string(cfg.kappa.value()) +
                    ";seed=" + std::to_string(cfg.seed) +
                    ";n=" + std::to_string(batch.requested) +
                    ";dt_max=" + std::to_string(cfg.dt_max);
  return stats::EmpiricalLaw::from_samples(std::move(xs), stats::fnv1a(tag));
}

// Monte Carlo estimate of E[exp(lambda tbar) M^e(theta_tbar)] at each
// checkpoint, tbar = min(t, T); the numerical stand-in for the martingale
// property.
struct CheckpointEstimate {
  double t = 0.0;
  std::complex<double> mean{};
  double se_real = 0.0;
  double se_imag = 0.0;
};

inline std::vector<CheckpointEstimate> path_functional_martingale(
    const SimConfig& cfg, std::complex<double> lambda,
    std::vector<double> checkpoints, std::size_t n, unsigned workers = 0) {
  require(lambda.real() <= 0.0,
          "path_functional_martingale: requires Re lambda <= 0");
  require(n >= 2, "path_functional_martingale: need n >= 2");
  std::sort(checkpoints.begin(), checkpoints.end());
  for (double t : checkpoints) {
    require(t > 0.0, "path_functional_martingale: checkpoints must be > 0");
  }
  const detail::KernelContext ctx(cfg.kappa);
  const std::size_t m = checkpoints.size();
  const std::complex<double> boundary_value =
      martingale::m_even_boundary(cfg.kappa, lambda);

  std::vector<std::complex<double>> acc(n * m);
  detail::parallel_for(n, detail::resolve_workers(workers), [&](std::size_t i) {
    auto on_cp = [&](double t_cp, double t_eff, double theta, bool absorbed) {
      std::complex<double> value;
      if (absorbed) {
        value = std::exp(lambda * t_eff) * boundary_value;
      } else {
        value = std::exp(lambda * t_eff) *
                martingale::m_even(cfg.kappa, lambda, theta);
      }
      const std::size_t j =
          std::size_t(std::lower_bound(checkpoints.begin(), checkpoints.end(),
                                       t_cp) -
                      checkpoints.begin());
      acc[i * m + j] = value;
    };
    detail::run_path(cfg, ctx, detail::StopRule::absorb_outer, i, checkpoints,
                     on_cp, nullptr);
  });

  std::vector<CheckpointEstimate> out(m);
  for (std::size_t j = 0; j < m; ++j) {
    std::complex<double> sum{};
    for (std::size_t i = 0; i < n; ++i) sum += acc[i * m + j];
    const std::complex<double> mean = sum / double(n);
    double vr = 0.0, vi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto d = acc[i * m + j] - mean;
      vr += d.real() * d.real();
      vi += d.imag() * d.imag();
    }
    out[j].t = checkpoints[j];
    out[j].mean = mean;
    out[j].se_real = std::sqrt(vr / double(n - 1) / double(n));
    out[j].se_imag = std::sqrt(vi / double(n - 1) / double(n));
  }
  return out;
}

}  // namespace cleradii::diffusion
