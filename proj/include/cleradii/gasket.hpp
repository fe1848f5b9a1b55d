#pragma once

// Nested-loop conformal-radius sequences, survival-probability estimates for
// the gasket tail exponent, and the deterministic annulus covering sum
// behind the expectation-dimension statement.

#include <cmath>
#include <cstdint>
#include <vector>

#include "cleradii/diffusion.hpp"
#include "cleradii/errors.hpp"
#include "cleradii/kappa.hpp"
#include "cleradii/law.hpp"
#include "cleradii/stats.hpp"

namespace cleradii::gasket {

// Log conformal radii of the nested domains around a fixed point, with the
// i.i.d. decrements that produced them.
struct NestedRadiiSequence {
  double kappa;
  std::vector<double> log_cr;      // length depth + 1, starts at 0, decreasing
  std::vector<double> increments;  // length depth, all positive
};

namespace detail {

inline NestedRadiiSequence sample_nested_at(Kappa kappa, std::size_t depth,
                                            std::uint64_t seed,
                                            std::uint64_t first_path_index) {
  require(depth >= 1, "sample_nested: depth must be at least 1");
  const diffusion::SimConfig cfg(kappa, 0.0, 1e-3, 1e-9, seed);
  NestedRadiiSequence seq;
  seq.kappa = kappa.value();
  seq.log_cr.reserve(depth + 1);
  seq.increments.reserve(depth);
  seq.log_cr.push_back(0.0);
  const diffusion::detail::KernelContext ctx(kappa);
  for (std::size_t k = 0; k < depth; ++k) {
    const auto out = diffusion::detail::run_path(
        cfg, ctx, diffusion::detail::StopRule::absorb_outer,
        first_path_index + k, diffusion::detail::no_checkpoints(),
        diffusion::detail::null_checkpoint_fn(), nullptr);
    if (out.censored) {
      throw censoring_error("sample_nested: a decrement draw was censored");
    }
    seq.increments.push_back(out.time);
    seq.log_cr.push_back(seq.log_cr.back() - out.time);
  }
  return seq;
}

}  // namespace detail

// depth i.i.d. decrement draws from the hitting-time sampler (theta0 = 0),
// accumulated from log CR(unit disk, 0) = 0.
inline NestedRadiiSequence sample_nested(Kappa kappa, std::size_t depth,
                                         std::uint64_t seed) {
  return detail::sample_nested_at(kappa, depth, seed, 0);
}

// n independent sequences; sequence i consumes path indices
// [i depth, (i+1) depth), so depth = 1 reproduces the exit-sample batch
// draw for draw.
inline std::vector<NestedRadiiSequence> sample_nested_batch(
    Kappa kappa, std::size_t depth, std::size_t n, std::uint64_t seed) {
  std::vector<NestedRadiiSequence> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(detail::sample_nested_at(kappa, depth, seed, i * depth));
  }
  return out;
}

// Monte Carlo estimate of Pr[B > s] with a binomial error bar and the
// closed-form tail alongside.
struct SurvivalEstimate {
  double s = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  double closed_form_tail = 0.0;
  std::size_t survivors = 0;
  std::size_t n = 0;
  bool degenerate = false;  // fewer than 100 survivals observed
};

// One batch, censored at max(s_values), serves the whole grid: a path
// censored at the horizon survives every listed level.
inline std::vector<SurvivalEstimate> survival_curve(
    Kappa kappa, const std::vector<double>& s_values, std::size_t n,
    std::uint64_t seed, double dt_max = 1e-3, unsigned workers = 0) {
  require(!s_values.empty(), "survival_curve: need at least one level");
  double s_max = 0.0;
  for (double s : s_values) {
    require(s > 0.0, "survival_curve: levels must be positive");
    s_max = std::max(s_max, s);
  }
  require(n >= 1, "survival_curve: n must be at least 1");
  const diffusion::SimConfig cfg(kappa, 0.0, dt_max, 1e-9, seed, s_max);
  const auto batch = diffusion::detail::run_exit_batch(
      cfg, n, diffusion::detail::resolve_workers(workers));
  std::vector<SurvivalEstimate> out;
  out.reserve(s_values.size());
  for (double s : s_values) {
    SurvivalEstimate e;
    e.s = s;
    e.n = n;
    for (const auto& sample : batch.samples) {
      e.survivors += sample.exit_time > s;
    }
    e.survivors += batch.censored;  // censored at s_max >= s means B > s
    e.estimate = double(e.survivors) / double(n);
    e.std_error = std::sqrt(e.estimate * (1.0 - e.estimate) / double(n));
    e.closed_form_tail = 1.0 - law::cdf(kappa, s);
    e.degenerate = e.survivors < 100;
    out.push_back(e);
  }
  return out;
}

inline SurvivalEstimate survival_probability(Kappa kappa, double s,
                                             std::size_t n, std::uint64_t seed,
                                             double dt_max = 1e-3,
                                             unsigned workers = 0) {
  return survival_curve(kappa, {s}, n, seed, dt_max, workers).front();
}

// Deterministic annulus covering sum with unit constants, plus the fitted
// exponent of the sum against epsilon over the dyadic grid eps * 2^{-i},
// i = 0..8.
struct CoverEstimate {
  double epsilon = 0.0;
  double expected_disk_count = 0.0;
  double exponent_fit = 0.0;
};

namespace detail {

inline double annulus_sum(double alpha, double eps) {
  const std::size_t terms = std::size_t(std::ceil(1.0 / eps));
  double sum = 0.0;
  for (std::size_t j = 1; j <= terms; ++j) {
    sum += std::pow(double(j), -alpha);
  }
  return sum / eps;
}

}  // namespace detail

inline CoverEstimate covering_sum(Kappa kappa, double epsilon) {
  require(epsilon > 0.0 && epsilon < 0.5,
          "covering_sum: epsilon must lie in (0, 1/2)");
  const double alpha = law::gasket_exponents(kappa).alpha;
  CoverEstimate est;
  est.epsilon = epsilon;
  est.expected_disk_count = detail::annulus_sum(alpha, epsilon);
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i <= 8; ++i) {
    const double eps = epsilon * std::pow(2.0, -double(i));
    pts.emplace_back(std::log(eps), std::log(detail::annulus_sum(alpha, eps)));
  }
  est.exponent_fit = stats::slope_fit(pts).slope;
  return est;
}

}  // namespace cleradii::gasket
