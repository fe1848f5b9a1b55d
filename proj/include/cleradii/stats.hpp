#pragma once

// Statistical glue between simulation and closed forms: empirical laws,
// Kolmogorov-Smirnov distance against a fully specified CDF, numerical
// Laplace transforms, and least-squares exponent fits.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "cleradii/errors.hpp"

namespace cleradii::stats {

using complex = std::complex<double>;

// FNV-1a, used for stable provenance digests of run configurations.
inline std::uint64_t fnv1a(std::string_view bytes,
                           std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Sorted i.i.d. sample set with a digest of the configuration that
// produced it.
struct EmpiricalLaw {
  std::vector<double> samples;  // ascending
  std::size_t n = 0;
  std::uint64_t provenance = 0;

  static EmpiricalLaw from_samples(std::vector<double> xs,
                                   std::uint64_t digest) {
    std::sort(xs.begin(), xs.end());
    EmpiricalLaw law;
    law.n = xs.size();
    law.samples = std::move(xs);
    law.provenance = digest;
    return law;
  }

  double mean() const {
    double s = 0.0;
    for (double x : samples) s += x;
    return s / double(n);
  }

  double std_error() const {
    const double m = mean();
    double ss = 0.0;
    for (double x : samples) ss += (x - m) * (x - m);
    return std::sqrt(ss / double(n - 1) / double(n));
  }
};

// Asymptotic two-sided critical value at the 0.1% level for a fully
// specified null.
inline double ks_threshold(std::size_t n) {
  return 1.95 / std::sqrt(double(n));
}

// sup-norm distance between the empirical CDF and `cdf`, evaluating both
// one-sided gaps at every sample point.
template <class Cdf>
double ks_statistic(const EmpiricalLaw& law, Cdf&& cdf) {
  require(law.n >= 1, "ks_statistic: empty sample");
  double d = 0.0;
  const double n = double(law.n);
  for (std::size_t i = 0; i < law.n; ++i) {
    const double f = cdf(law.samples[i]);
    d = std::max(d, f - double(i) / n);
    d = std::max(d, double(i + 1) / n - f);
  }
  return d;
}

namespace detail {

template <class F>
double integrate_panel(F&& f, double a, double b, double tol) {
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, 12, tol, &err);
  return v;
}

}  // namespace detail

// Adaptive quadrature of exp(lambda x) density(x) over (0, inf), split at
// `domain_split`; the unbounded tail is swept by doubling windows until two
// consecutive windows fall below tolerance.
template <class Density>
complex laplace_quadrature(Density&& density, complex lambda,
                           double domain_split, double abs_tol = 1e-9) {
  require(domain_split > 0.0, "laplace_quadrature: split must be positive");
  auto part = [&](bool imag_part) {
    auto f = [&](double x) {
      const double w = std::exp(lambda.real() * x);
      const double phase = lambda.imag() * x;
      return density(x) * w * (imag_part ? std::sin(phase) : std::cos(phase));
    };
    double total = detail::integrate_panel(f, 0.0, domain_split, abs_tol / 4);
    double lo = domain_split;
    int quiet = 0;
    for (int k = 0; k < 64; ++k) {
      const double hi = 2.0 * lo;
      const double piece = detail::integrate_panel(f, lo, hi, abs_tol / 8);
      total += piece;
      quiet = std::abs(piece) < abs_tol / 8 ? quiet + 1 : 0;
      if (quiet >= 2) return total;
      lo = hi;
    }
    throw convergence_error("laplace_quadrature: tail did not converge");
  };
  const double re = part(false);
  const double im = lambda.imag() == 0.0 ? 0.0 : part(true);
  return {re, im};
}

// Ordinary least-squares line fit.
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double std_error = 0.0;
  std::size_t points = 0;
};

// Fits y = a + b x over the points whose x lies in [window_lo, window_hi].
inline SlopeFit slope_fit(const std::vector<std::pair<double, double>>& pts,
                          double window_lo, double window_hi) {
  std::vector<std::pair<double, double>> in;
  for (const auto& p : pts) {
    if (p.first >= window_lo && p.first <= window_hi) in.push_back(p);
  }
  if (in.size() < 3) {
    throw domain_error("slope_fit: need at least 3 points in window");
  }
  const double n = double(in.size());
  double sx = 0, sy = 0;
  for (auto& [x, y] : in) { sx += x; sy += y; }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (auto& [x, y] : in) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  require(sxx > 0.0, "slope_fit: degenerate abscissas");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.points = in.size();
  double ssr = 0.0;
  for (auto& [x, y] : in) {
    const double r = y - (fit.intercept + fit.slope * x);
    ssr += r * r;
  }
  fit.std_error = std::sqrt(ssr / (n - 2.0) / sxx);
  return fit;
}

inline SlopeFit slope_fit(const std::vector<std::pair<double, double>>& pts) {
  return slope_fit(pts, -std::numeric_limits<double>::infinity(),
                   std::numeric_limits<double>::infinity());
}

}  // namespace cleradii::stats
