#pragma once

// Hypergeometric local-martingale functions of the radial diffusion (even
// and odd families), their boundary values, and the expected-first-hit
// function L with its near-zero power law.

#include <cmath>
#include <complex>
#include <numbers>

#include "cleradii/errors.hpp"
#include "cleradii/kappa.hpp"
#include "cleradii/specfun.hpp"

namespace cleradii::martingale {

using specfun::complex;

enum class Parity { even, odd };

namespace detail {

inline void check_theta(double theta, double lo, double hi) {
  require(theta >= lo - 1e-9 && theta <= hi + 1e-9,
          "martingale: theta outside the function's interval");
}

}  // namespace detail

// M^e(theta) = F(1-4/k+s, 1-4/k-s; 3/2-4/k; sin^2(theta/4)),
// s = sqrt((1-4/k)^2 + 8 lambda / k).  Even, 4 pi periodic; the square-root
// branch is immaterial by the (a,b) symmetry of F.
inline complex m_even(Kappa kappa, complex lambda, double theta) {
  detail::check_theta(theta, -2.0 * std::numbers::pi, 2.0 * std::numbers::pi);
  const double k = kappa.value();
  const double e0 = 1.0 - 4.0 / k;
  const complex c(1.5 - 4.0 / k, 0.0);
  if (specfun::near_nonpositive_integer(c)) {
    throw domain_error("m_even: parameter 3/2 - 4/kappa is degenerate");
  }
  if (lambda == complex{}) return {1.0, 0.0};  // one parameter vanishes
  const complex s = std::sqrt(complex(e0 * e0, 0.0) + 8.0 * lambda / k);
  const double sq = std::sin(theta / 4.0);
  return specfun::hyp2f1(e0 + s, e0 - s, c, complex(sq * sq, 0.0)).value;
}

// Closed-form boundary value M^e(+-2 pi) =
//   cos(pi s) / cos(pi (1-4/kappa)).
inline complex m_even_boundary(Kappa kappa, complex lambda) {
  if (lambda == complex{}) return {1.0, 0.0};
  const double k = kappa.value();
  const double e0 = 1.0 - 4.0 / k;
  const complex s = std::sqrt(complex(e0 * e0, 0.0) + 8.0 * lambda / k);
  return std::cos(std::numbers::pi * s) / std::cos(std::numbers::pi * e0);
}

// M^o(theta) = F(1-2/k+s', 1-2/k-s'; 3/2; cos^2(theta/2)) cos(theta/2),
// s' = sqrt((1/2-2/k)^2 + 2 lambda / k); odd about theta = pi.
inline complex m_odd(Kappa kappa, complex lambda, double theta) {
  detail::check_theta(theta, 0.0, 2.0 * std::numbers::pi);
  const double k = kappa.value();
  const double e1 = 0.5 - 2.0 / k;
  const complex s = std::sqrt(complex(e1 * e1, 0.0) + 2.0 * lambda / k);
  const double cs = std::cos(theta / 2.0);
  const complex f =
      specfun::hyp2f1(complex(1.0 - 2.0 / k, 0.0) + s,
                      complex(1.0 - 2.0 / k, 0.0) - s, complex(1.5, 0.0),
                      complex(cs * cs, 0.0))
          .value;
  return f * cs;
}

// Parameter bundle selecting one family member.
struct MartingaleParams {
  Kappa kappa;
  complex lambda;
  Parity parity;

  complex operator()(double theta) const {
    return parity == Parity::even ? m_even(kappa, lambda, theta)
                                  : m_odd(kappa, lambda, theta);
  }
};

namespace detail {

inline bool kappa_is_four(Kappa kappa) {
  // 8/kappa integral degenerates the connection formula; within (8/3, 8)
  // that happens only at kappa = 4, where L is the identity.
  return std::abs(8.0 / kappa.value() - 2.0) <= specfun::kIntegerTol;
}

}  // namespace detail

// Expected first hit of 2 pi Z:  L(theta) = E[theta_T | theta_0 = theta].
// On [0, 2 pi],
//   L(theta) = pi - 2 sqrt(pi) Gamma(4/k) / Gamma(4/k - 1/2)
//                  * F(3/2-4/k, 1/2; 3/2; cos^2(theta/2)) cos(theta/2),
// extended to R by L(theta + 2 pi) = L(theta) + 2 pi (hence odd).
inline double l_theta(Kappa kappa, double theta) {
  if (detail::kappa_is_four(kappa)) return theta;
  const double k = kappa.value();
  const double two_pi = 2.0 * std::numbers::pi;
  const double shift = std::floor(theta / two_pi);
  const double t = theta - two_pi * shift;  // in [0, 2 pi)
  const double coef = 2.0 * std::sqrt(std::numbers::pi) *
                      std::tgamma(4.0 / k) / std::tgamma(4.0 / k - 0.5);
  const double cs = std::cos(t / 2.0);
  const complex f =
      specfun::hyp2f1(complex(1.5 - 4.0 / k, 0.0), complex(0.5, 0.0),
                      complex(1.5, 0.0), complex(cs * cs, 0.0))
          .value;
  return std::numbers::pi - coef * f.real() * cs + two_pi * shift;
}

// Power-law exponent of L near theta = 0:  L ~ const |theta|^{8/kappa - 1}.
inline double l_small_theta_exponent(Kappa kappa) {
  return 8.0 / kappa.value() - 1.0;
}

}  // namespace cleradii::martingale
