#pragma once

// Closed-form laws of the log conformal-radius decrement B: the two dual
// series for the Brownian exit-time density f_kappa, the reweighted density
// of B, its CDF, MGF and mean, the gasket exponents, and the electrical
// thickness limit MGF (evaluation only).

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <complex>
#include <numbers>

#include "cleradii/errors.hpp"
#include "cleradii/kappa.hpp"
#include "cleradii/specfun.hpp"

namespace cleradii::law {

using specfun::RealSeriesValue;
using specfun::complex;

// ---------------------------------------------------------------------------
// exponents
// ---------------------------------------------------------------------------

// Tail exponent alpha of the law of B and the expectation dimension of the
// gasket; the two always sum to 2.
struct GasketExponents {
  double alpha;
  double expectation_dimension;
};

inline GasketExponents gasket_exponents(Kappa kappa) {
  const double k = kappa.value();
  const double alpha = (8.0 - k) * (3.0 * k - 8.0) / (32.0 * k);
  return {alpha, 2.0 - alpha};
}

// Convergence abscissa of the MGF, 1 - 2/kappa - 3 kappa/32.  Algebraically
// identical to gasket_exponents().alpha; computed by its own route so the
// identity stays testable.
inline double mgf_abscissa(Kappa kappa) {
  const double k = kappa.value();
  return 1.0 - 2.0 / k - 3.0 * k / 32.0;
}

// ---------------------------------------------------------------------------
// exit-time density f_kappa (two dual expansions)
// ---------------------------------------------------------------------------

// Density of the first exit time of standard Brownian motion from the
// centered interval (-2 pi / sqrt(kappa), 2 pi / sqrt(kappa)).
//
// Large-x (spectral) series:
//   f(x) = (kappa / 8 pi) sum_j (-1)^j (2j+1) exp(-(2j+1)^2 kappa x / 32)
inline RealSeriesValue exit_density_spectral(Kappa kappa, double x) {
  require(x > 0.0, "exit_density_spectral: x must be positive");
  const double k = kappa.value();
  const double pref = k / (8.0 * std::numbers::pi);
  const double a = k * x / 32.0;
  double sum = 0.0;
  double term = 0.0;
  std::size_t j = 0;
  for (;; ++j) {
    const double m = 2.0 * double(j) + 1.0;
    term = m * std::exp(-m * m * a);
    if (j % 2 == 1) term = -term;
    sum += term;
    // alternating with eventually decreasing magnitude: first omitted term
    // bounds the tail once the decrease has set in
    const double next = (m + 2.0) * std::exp(-(m + 2.0) * (m + 2.0) * a);
    if (next <= std::abs(term) &&
        next < 1e-17 * std::max(std::abs(sum), 1e-300)) {
      break;
    }
    if (j > 100000) throw convergence_error("exit_density_spectral: no decay");
  }
  const double m1 = 2.0 * double(j + 1) + 1.0;
  const double tail = pref * m1 * std::exp(-m1 * m1 * a);
  return {pref * sum, tail + 1e-16 * std::abs(pref * sum) * double(j + 1),
          j + 1};
}

// Small-x (image method) series, the Poisson-summation dual:
//   f(x) = sqrt(8 pi / (kappa x^3))
//              sum_k (-1)^k (2k+1) exp(-2 pi^2 (2k+1)^2 / (kappa x))
inline RealSeriesValue exit_density_heat(Kappa kappa, double x) {
  require(x > 0.0, "exit_density_heat: x must be positive");
  const double k = kappa.value();
  const double pref = std::sqrt(8.0 * std::numbers::pi / (k * x * x * x));
  const double a = 2.0 * std::numbers::pi * std::numbers::pi / (k * x);
  double sum = 0.0;
  double term = 0.0;
  std::size_t j = 0;
  for (;; ++j) {
    const double m = 2.0 * double(j) + 1.0;
    term = m * std::exp(-m * m * a);
    if (j % 2 == 1) term = -term;
    sum += term;
    const double next = (m + 2.0) * std::exp(-(m + 2.0) * (m + 2.0) * a);
    if (next <= std::abs(term) &&
        next < 1e-17 * std::max(std::abs(sum), 1e-300)) {
      break;
    }
    if (j > 100000) throw convergence_error("exit_density_heat: no decay");
  }
  const double m1 = 2.0 * double(j + 1) + 1.0;
  const double tail = pref * m1 * std::exp(-m1 * m1 * a);
  return {pref * sum, tail + 1e-16 * std::abs(pref * sum) * double(j + 1),
          j + 1};
}

// Crossover rule between the dual expansions.
inline bool use_heat_series(Kappa kappa, double x) {
  return kappa.value() * x < 8.0;
}

inline RealSeriesValue exit_density(Kappa kappa, double x) {
  return use_heat_series(kappa, x) ? exit_density_heat(kappa, x)
                                   : exit_density_spectral(kappa, x);
}

// ---------------------------------------------------------------------------
// law of B
// ---------------------------------------------------------------------------

// Reweighting factor turning f_kappa into the density of B:
//   -cos(4 pi / kappa) exp((kappa-4)^2 x / (8 kappa))
inline double reweight_factor(Kappa kappa, double x) {
  const double k = kappa.value();
  return -std::cos(4.0 * std::numbers::pi / k) *
         std::exp((k - 4.0) * (k - 4.0) * x / (8.0 * k));
}

inline RealSeriesValue density(Kappa kappa, double x) {
  require(x > 0.0, "density: x must be positive");
  const RealSeriesValue f = exit_density(kappa, x);
  const double w = reweight_factor(kappa, x);
  return {w * f.value, std::abs(w) * f.error_bound, f.terms_used};
}

namespace detail {

// Survival P(B > x) by closed-form integration of each spectral term; valid
// where the spectral series is the selected branch.
inline double survival_spectral(Kappa kappa, double x) {
  const double k = kappa.value();
  const double pref = -std::cos(4.0 * std::numbers::pi / k) * k /
                      (8.0 * std::numbers::pi);
  const double beta = (k - 4.0) * (k - 4.0) / (8.0 * k);
  double sum = 0.0;
  for (std::size_t j = 0;; ++j) {
    const double m = 2.0 * double(j) + 1.0;
    const double rate = m * m * k / 32.0 - beta;  // rate_0 = alpha > 0
    double term = m * std::exp(-rate * x) / rate;
    if (j % 2 == 1) term = -term;
    sum += term;
    const double m1 = m + 2.0;
    const double next =
        m1 * std::exp(-(m1 * m1 * k / 32.0 - beta) * x) / (m1 * m1 * k / 32.0 - beta);
    if (next <= std::abs(term) &&
        next < 1e-16 * std::max(std::abs(sum), 1e-300)) {
      break;
    }
    if (j > 100000) throw convergence_error("survival_spectral: no decay");
  }
  return pref * sum;
}

}  // namespace detail

// Pr[B <= x]; closed-form term integration above the crossover, adaptive
// quadrature of the heat-series density below it.
inline double cdf(Kappa kappa, double x) {
  require(x > 0.0, "cdf: x must be positive");
  if (!use_heat_series(kappa, x)) {
    const double c = 1.0 - detail::survival_spectral(kappa, x);
    return std::clamp(c, 0.0, 1.0);
  }
  auto integrand = [&](double t) {
    return t <= 0.0 ? 0.0
                    : reweight_factor(kappa, t) * exit_density_heat(kappa, t).value;
  };
  const double c = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      integrand, 0.0, x, 15, 1e-10);
  return std::clamp(c, 0.0, 1.0);
}

// E[exp(lambda B)] = cos(pi (1-4/kappa)) / cos(pi sqrt((1-4/kappa)^2 +
// 8 lambda / kappa)), principal square root, Re lambda < mgf_abscissa.
inline complex mgf(Kappa kappa, complex lambda) {
  const double k = kappa.value();
  if (lambda.real() >= mgf_abscissa(kappa)) {
    throw domain_error("mgf: Re lambda must be below 1 - 2/kappa - 3 kappa/32");
  }
  const double e0 = 1.0 - 4.0 / k;
  const complex s = std::sqrt(complex(e0 * e0, 0.0) + 8.0 * lambda / k);
  const complex den = std::cos(std::numbers::pi * s);
  if (std::abs(den) < 1e-12) throw domain_error("mgf: pole of the closed form");
  return std::cos(std::numbers::pi * e0) / den;
}

namespace detail {

// sin(pi e)/(pi e) with the removable singularity expanded analytically.
inline double sinc_pi(double e) {
  const double y = std::numbers::pi * e;
  if (std::abs(y) < 1e-4) return 1.0 - y * y / 6.0 + y * y * y * y / 120.0;
  return std::sin(y) / y;
}

}  // namespace detail

// E[B] = pi / ((kappa/4 - 1) cot(pi (1-4/kappa))), with the kappa = 4
// singularity removed analytically (value pi^2 there).
inline double mean(Kappa kappa) {
  const double k = kappa.value();
  const double e0 = 1.0 - 4.0 / k;
  return 4.0 * std::numbers::pi * std::numbers::pi / k * detail::sinc_pi(e0) /
         std::cos(std::numbers::pi * e0);
}

// Large-depth limit MGF of the electrical thickness: a ratio of sinc factors;
// evaluation only, there is no sampling counterpart.
inline complex thickness_mgf(Kappa kappa, complex lambda) {
  const double k = kappa.value();
  if (lambda.real() >= 1.0 - 2.0 / k) {
    throw domain_error("thickness_mgf: Re lambda must be below 1 - 2/kappa");
  }
  const double e0 = 1.0 - 4.0 / k;
  const complex s = std::sqrt(complex(e0 * e0, 0.0) + 8.0 * lambda / k);
  const complex ps = std::numbers::pi * s;
  complex inv_sinc;
  if (std::abs(ps) < 1e-5) {
    inv_sinc = 1.0 + ps * ps / 6.0;  // x / sin x near 0
  } else {
    const complex sn = std::sin(ps);
    if (std::abs(sn) < 1e-13 * std::max(1.0, std::abs(ps))) {
      throw domain_error("thickness_mgf: pole of the closed form");
    }
    inv_sinc = ps / sn;
  }
  return detail::sinc_pi(e0) * inv_sinc;
}

// Query against the law of B: either a density/CDF argument x > 0 or an MGF
// argument lambda inside the convergence half-plane.
struct ExitLawQuery {
  Kappa kappa;
  bool is_mgf;
  double x = 0.0;
  complex lambda{};

  static ExitLawQuery at_x(Kappa kappa, double x) {
    require(x > 0.0, "ExitLawQuery: x must be positive");
    ExitLawQuery q{kappa, false};
    q.x = x;
    return q;
  }
  static ExitLawQuery at_lambda(Kappa kappa, complex lambda) {
    require(lambda.real() < mgf_abscissa(kappa),
            "ExitLawQuery: Re lambda must be below the MGF abscissa");
    ExitLawQuery q{kappa, true};
    q.lambda = lambda;
    return q;
  }
};

}  // namespace cleradii::law
