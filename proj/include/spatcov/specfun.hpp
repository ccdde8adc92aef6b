#pragma once

// Special functions backing the covariance families: Bessel J / K,
// Gauss 2F1, generalized 1F2 and the normalized radial kernel Omega_d.
// All functions are pure and re-entrant.

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace spatcov {

inline double gamma_fn(double x) { return boost::math::tgamma(x); }

/// Bessel function of the first kind J_order(t), order >= -1/2, t >= 0.
inline double bessel_j(double order, double t) {
  if (order < -0.5) throw std::domain_error("bessel_j: order must be >= -1/2");
  if (t < 0.0) throw std::domain_error("bessel_j: t must be >= 0");
  return boost::math::cyl_bessel_j(order, t);
}

/// Modified Bessel function of the second kind K_order(t), t > 0.
inline double bessel_k(double order, double t) {
  if (t <= 0.0) throw std::domain_error("bessel_k: t must be > 0");
  if (t < 1e-300) throw std::overflow_error("bessel_k: t too small, result overflows");
  return boost::math::cyl_bessel_k(order, t);
}

/// Gauss hypergeometric 2F1(a,b;c;z) for z in [0,1].
/// z = 1 is admitted through the Gauss summation formula when c-a-b > 0.
inline double gauss_2f1(double a, double b, double c, double z) {
  if (c <= 0.0 && c == std::floor(c))
    throw std::domain_error("gauss_2f1: c is a nonpositive integer");
  if (z < 0.0 || z > 1.0)
    throw std::domain_error("gauss_2f1: argument outside [0,1]");
  if (z == 0.0) return 1.0;
  if (z == 1.0) {
    if (c - a - b <= 0.0)
      throw std::domain_error("gauss_2f1: divergent at z=1 (c-a-b <= 0)");
    return gamma_fn(c) * gamma_fn(c - a - b) / (gamma_fn(c - a) * gamma_fn(c - b));
  }
  double term = 1.0, sum = 1.0;
  const int max_iter = 500000;
  for (int k = 0; k < max_iter; ++k) {
    term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
    sum += term;
    if (std::abs(term) <= 1e-16 * std::abs(sum) && k > 4) return sum;
  }
  std::ostringstream msg;
  msg << "gauss_2f1: series did not converge at z=" << z
      << ", last relative term " << std::abs(term / sum);
  throw std::runtime_error(msg.str());
}

/// Generalized hypergeometric 1F2(a;b,c;z), z <= 0.  Summed in extended
/// precision with compensated accumulation; alternating cancellation is
/// monitored and reported if it exhausts the working precision.
inline double hyper_1f2(double a, double b, double c, double z) {
  if ((b <= 0.0 && b == std::floor(b)) || (c <= 0.0 && c == std::floor(c)))
    throw std::domain_error("hyper_1f2: b or c is a nonpositive integer");
  if (z == 0.0) return 1.0;
  long double term = 1.0L, sum = 1.0L, comp = 0.0L, max_mag = 1.0L;
  const long double zl = static_cast<long double>(z);
  const int max_iter = 100000;
  for (int k = 0; k < max_iter; ++k) {
    term *= (a + k) / ((b + k) * (c + k) * (k + 1.0L)) * zl;
    // Kahan step
    long double y = term - comp;
    long double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    if (std::abs((double)term) > (double)max_mag) max_mag = std::abs((long double)term);
    if (std::abs((double)term) <= 1e-18 * (std::abs((double)sum) + 1e-300) && k > 8) {
      // the accumulated rounding error scales with the largest term; reject
      // the sum only when that error swamps both the result and double eps
      const double abs_err = static_cast<double>(max_mag) * 1e-18;
      if (abs_err > std::abs((double)sum) * 1e-10 && abs_err > 1e-14) {
        std::ostringstream msg;
        msg << "hyper_1f2: catastrophic cancellation at z=" << z
            << " (estimated absolute error " << abs_err << ")";
        throw std::runtime_error(msg.str());
      }
      return static_cast<double>(sum);
    }
  }
  std::ostringstream msg;
  msg << "hyper_1f2: series did not converge at z=" << z;
  throw std::runtime_error(msg.str());
}

/// Omega_d(s) = 2^{(d-2)/2} Gamma(d/2) s^{-(d-2)/2} J_{(d-2)/2}(s).
/// Normalized so Omega_d(0) = 1; equals cos(s) in d=1, J_0(s) in d=2 and
/// sin(s)/s in d=3.
inline double omega_d(int d, double s) {
  if (d < 1) throw std::domain_error("omega_d: d must be >= 1");
  if (s < 0.0) throw std::domain_error("omega_d: s must be >= 0");
  if (s == 0.0) return 1.0;
  if (d == 1) return std::cos(s);
  if (d == 2) return bessel_j(0.0, s);
  if (d == 3) return std::sin(s) / s;
  const double half = 0.5 * (d - 2);
  return std::pow(2.0, half) * gamma_fn(0.5 * d) * std::pow(s, -half) * bessel_j(half, s);
}

}  // namespace spatcov
