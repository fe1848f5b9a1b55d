#pragma once

#include <stdexcept>
#include <string>

namespace cleradii {

// Argument outside the mathematical domain of an operation (wrong interval,
// pole of a Gamma function, MGF argument at or beyond its abscissa, ...).
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// |z| >= 1 handed to a series that only converges on the open unit disk.
class divergence_error : public domain_error {
 public:
  using domain_error::domain_error;
};

// A connection-formula precondition (1-c, b-a, c-a-b all non-integral) fails;
// the caller should fall back to a direct series or an analytic limit.
class nonintegral_violation : public domain_error {
 public:
  using domain_error::domain_error;
};

// A series or quadrature failed to reach its target within the term budget.
class convergence_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Too many Monte Carlo paths hit the censoring horizon.
class censoring_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw domain_error(what);
}

}  // namespace cleradii
