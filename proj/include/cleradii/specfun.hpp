#pragma once

// Complex Gamma and Gauss hypergeometric machinery: direct series on
// |z| <= 1/2, the z -> 1-z connection formula in between, and Gauss
// summation at z = 1.  Every series result carries a certified
// truncation bound.

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>

#include "cleradii/errors.hpp"

namespace cleradii::specfun {

using complex = std::complex<double>;

// Numeric result together with an absolute truncation bound and the number
// of series terms that produced it.
template <class T>
struct BasicSeriesValue {
  T value{};
  double error_bound = 0.0;   // absolute, under the documented stopping rule
  std::size_t terms_used = 0;
};

using SeriesValue = BasicSeriesValue<complex>;
using RealSeriesValue = BasicSeriesValue<double>;

// Tolerance for treating a parameter combination as integral (degenerate for
// the connection formula; callers handle those cases analytically).
inline constexpr double kIntegerTol = 1e-9;

inline bool near_integer(complex w, double tol = kIntegerTol) {
  return std::abs(w.imag()) <= tol &&
         std::abs(w.real() - std::round(w.real())) <= tol;
}

inline bool near_nonpositive_integer(complex w, double tol = kIntegerTol) {
  return near_integer(w, tol) && w.real() <= tol;
}

// ---------------------------------------------------------------------------
// Gamma
// ---------------------------------------------------------------------------

namespace detail {

// Lanczos approximation, g = 607/128, 15 terms (Godfrey's coefficients).
inline constexpr double kLanczosG = 607.0 / 128.0;
inline constexpr double kLanczosCoeff[15] = {
    0.99999999999999709182,     57.156235665862923517,
    -59.597960355475491248,     14.136097974741747174,
    -0.49191381609762019978,    0.33994649984811888699e-4,
    0.46523628927048575665e-4,  -0.98374475304879564677e-4,
    0.15808870322491248884e-3,  -0.21026444172410488319e-3,
    0.21743961811521264320e-3,  -0.16431810653676389022e-3,
    0.84418223983852743293e-4,  -0.26190838401581408670e-4,
    0.36899182659531622704e-5};

inline complex gamma_lanczos_right(complex z) {
  // valid for Re z >= 1/2
  complex sum = kLanczosCoeff[0];
  for (int k = 1; k < 15; ++k) sum += kLanczosCoeff[k] / (z - 1.0 + double(k));
  const complex base = z + (kLanczosG - 0.5);
  return std::sqrt(2.0 * std::numbers::pi) * std::pow(base, z - 0.5) *
         std::exp(-base) * sum;
}

}  // namespace detail

// Complex Gamma function.  Relative error <= 1e-12 for |Re z| <= 30,
// |Im z| <= 30 away from the poles.
inline complex gamma(complex z) {
  if (near_nonpositive_integer(z, 1e-13)) {
    throw domain_error("gamma: pole at non-positive integer");
  }
  if (z.real() >= 0.5) return detail::gamma_lanczos_right(z);
  // reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z)
  const complex s = std::sin(std::numbers::pi * z);
  return std::numbers::pi / (s * detail::gamma_lanczos_right(1.0 - z));
}

// 1/Gamma(z); entire, zero at the non-positive integers.
inline complex reciprocal_gamma(complex z) {
  if (near_nonpositive_integer(z, 1e-13)) return {0.0, 0.0};
  return 1.0 / gamma(z);
}

// ---------------------------------------------------------------------------
// Gauss hypergeometric F(a,b;c;z)
// ---------------------------------------------------------------------------

// Parameter triple (a,b,c) plus argument z.  Construction enforces that c is
// not a non-positive integer; evaluation is symmetric in (a,b) because the
// series only consumes the products (a+n)(b+n).
struct HypergeometricInput {
  complex a, b, c, z;

  HypergeometricInput(complex a_, complex b_, complex c_, complex z_)
      : a(a_), b(b_), c(c_), z(z_) {
    if (near_nonpositive_integer(c)) {
      throw domain_error("hyp2f1: c must not be a non-positive integer");
    }
  }
};

namespace detail {

inline constexpr std::size_t kMaxTerms = 4'000'000;

}  // namespace detail

// Direct power series, |z| < 1.  Stops once |term| < 1e-16 |partial sum| for
// three consecutive terms; the bound is a geometric tail estimate from the
// last term and the observed term ratio.
inline SeriesValue hyp2f1_series(const HypergeometricInput& in) {
  if (std::abs(in.z) >= 1.0) {
    throw divergence_error("hyp2f1_series: |z| >= 1");
  }
  complex term{1.0, 0.0};
  complex sum{1.0, 0.0};
  double ratio = std::abs(in.z);
  int quiet = 0;
  std::size_t n = 0;
  while (quiet < 3) {
    const complex factor =
        (in.a + double(n)) * (in.b + double(n)) /
        ((in.c + double(n)) * double(n + 1)) * in.z;
    term *= factor;
    sum += term;
    ratio = std::abs(factor);
    if (std::abs(term) < 1e-16 * std::abs(sum)) {
      ++quiet;
    } else {
      quiet = 0;
    }
    if (++n > detail::kMaxTerms) {
      throw convergence_error("hyp2f1_series: term budget exhausted");
    }
  }
  // For large n the term ratio tends to |z| from above or below; pad it a
  // little before forming the geometric tail bound.
  double r = std::min(0.999999, std::max(ratio, std::abs(in.z)) * 1.0000001);
  double tail = std::abs(term) * r / (1.0 - r);
  // floating-point accumulation across n terms
  double rounding = double(n) * 1e-16 * std::abs(sum);
  return {sum, tail + rounding, n};
}

// Gauss summation at z = 1: Gamma(c) Gamma(c-a-b) / (Gamma(c-a) Gamma(c-b)),
// requiring -c not in N and Re c > Re(a+b).
inline complex hyp2f1_at_one(complex a, complex b, complex c) {
  if (near_nonpositive_integer(c)) {
    throw domain_error("hyp2f1_at_one: c must not be a non-positive integer");
  }
  if (c.real() <= (a + b).real()) {
    throw domain_error("hyp2f1_at_one: requires Re c > Re(a+b)");
  }
  // grouped so the result is bit-identical under an (a,b) swap
  return (gamma(c) * gamma(c - (a + b))) *
         (reciprocal_gamma(c - a) * reciprocal_gamma(c - b));
}

// z -> 1-z connection formula.  Valid when 1-c, b-a, c-a-b are all
// non-integral and |arg(1-z)| < pi; rejects degenerate parameters so the
// caller can fall back to the direct series or an analytic limit.
inline SeriesValue hyp2f1_transformed(const HypergeometricInput& in) {
  const complex a = in.a, b = in.b, c = in.c, z = in.z;
  const complex omz = 1.0 - z;
  if (near_integer(1.0 - c) || near_integer(b - a) || near_integer(c - a - b)) {
    throw nonintegral_violation(
        "hyp2f1_transformed: 1-c, b-a, c-a-b must be non-integral");
  }
  if (omz.real() <= 0.0 && std::abs(omz.imag()) == 0.0) {
    throw domain_error("hyp2f1_transformed: requires |arg(1-z)| < pi");
  }
  const bool at_unit = std::abs(omz - 1.0) < 1e-14;  // z = 0
  if (!at_unit && (std::abs(omz) >= 1.0 || std::abs(z) > 1.0)) {
    throw divergence_error("hyp2f1_transformed: sub-series outside |1-z| < 1");
  }
  // symmetric groupings keep the value bit-identical under an (a,b) swap
  const complex cab = c - (a + b);
  const complex pref1 = (gamma(c) * gamma(cab)) *
                        (reciprocal_gamma(c - a) * reciprocal_gamma(c - b));
  const complex pref2 = (gamma(c) * gamma(-cab)) *
                        (reciprocal_gamma(a) * reciprocal_gamma(b)) *
                        std::pow(omz, cab);
  if (at_unit) {
    // z = 0: both sub-series sit at argument 1; use Gauss summation (needs
    // Re c < 1, which is the shared convergence condition of the two terms)
    const complex v = pref1 * hyp2f1_at_one(a, b, 1.0 - cab) +
                      pref2 * hyp2f1_at_one(c - a, c - b, cab + 1.0);
    return {v, 8e-15 * std::abs(v), 0};
  }
  const SeriesValue f1 = hyp2f1_series({a, b, 1.0 - cab, omz});
  const SeriesValue f2 = hyp2f1_series({c - a, c - b, cab + 1.0, omz});
  const complex value = pref1 * f1.value + pref2 * f2.value;
  const double bound = std::abs(pref1) * f1.error_bound +
                       std::abs(pref2) * f2.error_bound +
                       8e-16 * std::abs(value);
  return {value, bound, f1.terms_used + f2.terms_used};
}

// Evaluation dispatch: direct series for |z| <= 1/2, the connection formula
// for 1/2 < |z| < 1 (direct series as fallback when it is degenerate), Gauss
// summation at z = 1.
inline SeriesValue hyp2f1(const HypergeometricInput& in) {
  const double az = std::abs(in.z);
  if (az <= 0.5) return hyp2f1_series(in);
  if (std::abs(in.z - 1.0) < 1e-14) {
    const complex v = hyp2f1_at_one(in.a, in.b, in.c);
    return {v, 4e-15 * std::abs(v), 0};
  }
  if (az < 1.0) {
    try {
      return hyp2f1_transformed(in);
    } catch (const nonintegral_violation&) {
      return hyp2f1_series(in);
    }
  }
  throw divergence_error("hyp2f1: argument outside supported domain");
}

inline SeriesValue hyp2f1(complex a, complex b, complex c, complex z) {
  return hyp2f1({a, b, c, z});
}

}  // namespace cleradii::specfun
