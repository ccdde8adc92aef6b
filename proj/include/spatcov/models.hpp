#pragma once

// Isotropic covariance families (Matern, Cauchy, Gauss hypergeometric,
// cardinal sine, Gaussian) with radial derivatives, d-radial spectral
// densities and a quadrature-based Hankel transform used as reference.

#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "spatcov/specfun.hpp"

namespace spatcov {

enum class FamilyKind { matern, cauchy, gauss_hypergeom, cardinal_sine, gaussian };

/// A radial covariance family phi : [0,inf) -> R.  For the Gauss
/// hypergeometric family the radial profile itself depends on the ambient
/// dimension, which is therefore stored with the parameters.
struct IsotropicFamily {
  FamilyKind kind = FamilyKind::matern;
  double nu = 0.5;      // Matern shape
  double delta = 1.0;   // Cauchy shape
  double alpha = 0.0, beta = 0.0, gamma = 0.0;  // hypergeometric shapes
  int dim = 2;          // dimension entering the hypergeometric profile

  static IsotropicFamily matern(double nu) {
    if (!(nu > 0.0)) throw std::domain_error("matern: nu must be > 0");
    IsotropicFamily f;
    f.kind = FamilyKind::matern;
    f.nu = nu;
    return f;
  }
  static IsotropicFamily cauchy(double delta) {
    if (!(delta > 0.0)) throw std::domain_error("cauchy: delta must be > 0");
    IsotropicFamily f;
    f.kind = FamilyKind::cauchy;
    f.delta = delta;
    return f;
  }
  static IsotropicFamily hypergeometric(double alpha, double beta, double gamma, int dim = 2) {
    IsotropicFamily f;
    f.kind = FamilyKind::gauss_hypergeom;
    f.alpha = alpha;
    f.beta = beta;
    f.gamma = gamma;
    f.dim = dim;
    if (!(2.0 * alpha > dim) || !(2.0 * (beta - alpha) * (gamma - alpha) >= alpha) ||
        !(2.0 * (beta + gamma) >= 6.0 * alpha + 1.0))
      throw std::domain_error("hypergeometric: parameters outside the validity class");
    return f;
  }
  static IsotropicFamily cardinal_sine() {
    IsotropicFamily f;
    f.kind = FamilyKind::cardinal_sine;
    return f;
  }
  static IsotropicFamily gaussian() {
    IsotropicFamily f;
    f.kind = FamilyKind::gaussian;
    return f;
  }

  bool operator<(const IsotropicFamily& o) const {
    return std::tie(kind, nu, delta, alpha, beta, gamma, dim) <
           std::tie(o.kind, o.nu, o.delta, o.alpha, o.beta, o.gamma, o.dim);
  }
};

namespace detail {

inline double matern_phi(double nu, double t) {
  if (t == 0.0) return 1.0;
  if (nu == 0.5) return std::exp(-t);
  if (nu == 1.5) return (1.0 + t) * std::exp(-t);
  if (nu == 2.5) return (1.0 + t + t * t / 3.0) * std::exp(-t);
  if (t > 700.0) return 0.0;
  return std::pow(2.0, 1.0 - nu) / gamma_fn(nu) * std::pow(t, nu) * bessel_k(nu, t);
}

// d/dt [t^nu K_nu(t)] = -t^nu K_{nu-1}(t)
inline double matern_phi_d1(double nu, double t) {
  if (t > 700.0) return 0.0;
  return -std::pow(2.0, 1.0 - nu) / gamma_fn(nu) * std::pow(t, nu) *
         bessel_k(std::abs(nu - 1.0), t);
}

inline double matern_phi_d2(double nu, double t) {
  if (t == 0.0) {
    if (!(nu > 1.0))
      throw std::domain_error("matern: not twice differentiable at origin for nu <= 1");
    return -0.5 / (nu - 1.0);
  }
  if (t > 700.0) return 0.0;
  // d/dt [-t^nu K_{nu-1}] = -nu t^{nu-1} K_{nu-1} + (t^nu/2)(K_{nu-2} + K_nu)
  const double c = std::pow(2.0, 1.0 - nu) / gamma_fn(nu);
  return c * (-nu * std::pow(t, nu - 1.0) * bessel_k(std::abs(nu - 1.0), t) +
              0.5 * std::pow(t, nu) *
                  (bessel_k(std::abs(nu - 2.0), t) + bessel_k(nu, t)));
}

inline double sinc_phi(double t) {
  if (t < 1e-2) {
    const double t2 = t * t;
    return 1.0 - t2 / 6.0 * (1.0 - t2 / 20.0 * (1.0 - t2 / 42.0));
  }
  return std::sin(t) / t;
}

inline double sinc_d1(double t) {
  if (t < 1e-2) {
    const double t2 = t * t;
    return -t / 3.0 * (1.0 - t2 / 10.0 * (1.0 - t2 / 28.0));
  }
  return std::cos(t) / t - std::sin(t) / (t * t);
}

inline double sinc_d2(double t) {
  if (t < 1e-2) {
    const double t2 = t * t;
    return -1.0 / 3.0 + t2 / 10.0 - t2 * t2 / 168.0;
  }
  return -std::sin(t) / t - 2.0 * std::cos(t) / (t * t) + 2.0 * std::sin(t) / (t * t * t);
}

// Hypergeometric profile pieces.  With x = (1 - t^2)_+ and
// c = beta - alpha + gamma - d/2, the profile is x^{c-1} 2F1(a,b;c;x)
// where a = beta - alpha, b = gamma - alpha.
struct HyperParams {
  double a, b, c;
};
inline HyperParams hyper_params(const IsotropicFamily& f) {
  return {f.beta - f.alpha, f.gamma - f.alpha,
          f.beta - f.alpha + f.gamma - 0.5 * f.dim};
}

inline double hyper_phi(const IsotropicFamily& f, double t) {
  if (t >= 1.0) return 0.0;
  const auto [a, b, c] = hyper_params(f);
  const double x = 1.0 - t * t;
  return std::pow(x, c - 1.0) * gauss_2f1(a, b, c, x);
}

// d/dx [x^{c-1} 2F1(a,b;c;x)] = (c-1) x^{c-2} 2F1(a,b;c-1;x)
inline double hyper_phi_d1(const IsotropicFamily& f, double t) {
  if (t >= 1.0) return 0.0;
  const auto [a, b, c] = hyper_params(f);
  const double x = 1.0 - t * t;
  return -2.0 * t * (c - 1.0) * std::pow(x, c - 2.0) * gauss_2f1(a, b, c - 1.0, x);
}

inline double hyper_phi_d2(const IsotropicFamily& f, double t) {
  if (t >= 1.0) return 0.0;
  const auto [a, b, c] = hyper_params(f);
  const double x = 1.0 - t * t;
  double r = -2.0 * (c - 1.0) * std::pow(x, c - 2.0) * gauss_2f1(a, b, c - 1.0, x);
  // The remaining term carries a factor t^2 and a hypergeometric piece whose
  // series stalls (or diverges at x = 1) when c - 2 - a - b <= 0.  The term
  // itself vanishes like t^{2(a+b-c+2)+2} as t -> 0, so it is dropped below a
  // small radius where its contribution is under 1e-4 in absolute value.
  if (t > 1e-2)
    r += 4.0 * t * t * (c - 1.0) * (c - 2.0) * std::pow(x, c - 3.0) *
         gauss_2f1(a, b, c - 2.0, x);
  return r;
}

}  // namespace detail

/// Radial profile phi(t).  phi(0) = 1 for every family except the Gauss
/// hypergeometric one, whose natural value at the origin is returned
/// unnormalized (see phi_normalized).
inline double phi(const IsotropicFamily& f, double t) {
  if (t < 0.0) throw std::domain_error("phi: t must be >= 0");
  switch (f.kind) {
    case FamilyKind::matern: return detail::matern_phi(f.nu, t);
    case FamilyKind::cauchy: return std::pow(1.0 + t * t, -f.delta);
    case FamilyKind::gauss_hypergeom: return detail::hyper_phi(f, t);
    case FamilyKind::cardinal_sine: return detail::sinc_phi(t);
    case FamilyKind::gaussian: return std::exp(-t * t);
  }
  throw std::logic_error("phi: unknown family");
}

inline double phi_at_origin(const IsotropicFamily& f) { return phi(f, 0.0); }

/// phi(t) / phi(0).
inline double phi_normalized(const IsotropicFamily& f, double t) {
  return phi(f, t) / phi_at_origin(f);
}

/// First radial derivative phi'(t), t > 0 (t = 0 allowed, returns 0 for
/// families differentiable at the origin).
inline double phi_d1(const IsotropicFamily& f, double t) {
  switch (f.kind) {
    case FamilyKind::matern:
      if (t == 0.0) {
        if (!(f.nu > 0.5))
          throw std::domain_error("matern: phi' undefined at origin for nu <= 1/2");
        return 0.0;
      }
      return detail::matern_phi_d1(f.nu, t);
    case FamilyKind::cauchy:
      return -2.0 * f.delta * t * std::pow(1.0 + t * t, -f.delta - 1.0);
    case FamilyKind::gauss_hypergeom: return detail::hyper_phi_d1(f, t);
    case FamilyKind::cardinal_sine: return detail::sinc_d1(t);
    case FamilyKind::gaussian: return -2.0 * t * std::exp(-t * t);
  }
  throw std::logic_error("phi_d1: unknown family");
}

struct FamilyTraits;
inline FamilyTraits family_traits(const IsotropicFamily& f, int d);

/// Second radial derivative phi''(t).  At t = 0 requires twice
/// differentiability at the origin.
inline double phi_d2(const IsotropicFamily& f, double t) {
  switch (f.kind) {
    case FamilyKind::matern: return detail::matern_phi_d2(f.nu, t);
    case FamilyKind::cauchy: {
      const double s = 1.0 + t * t;
      return -2.0 * f.delta * std::pow(s, -f.delta - 2.0) *
             (1.0 - (2.0 * f.delta + 1.0) * t * t);
    }
    case FamilyKind::gauss_hypergeom:
      if (!(2.0 * f.alpha > f.dim + 2))
        throw std::domain_error(
            "hypergeometric: not twice differentiable at origin (needs 2*alpha > d+2)");
      return detail::hyper_phi_d2(f, t);
    case FamilyKind::cardinal_sine: return detail::sinc_d2(t);
    case FamilyKind::gaussian: return (4.0 * t * t - 2.0) * std::exp(-t * t);
  }
  throw std::logic_error("phi_d2: unknown family");
}

/// phi'(t)/t with the limit phi''(0) at t = 0.
inline double phi_d1_over_t(const IsotropicFamily& f, double t) {
  if (t == 0.0) return phi_d2(f, 0.0);
  if (f.kind == FamilyKind::cardinal_sine && t < 1e-2) {
    const double t2 = t * t;
    return -1.0 / 3.0 * (1.0 - t2 / 10.0 * (1.0 - t2 / 28.0));
  }
  return phi_d1(f, t) / t;
}

struct FamilyTraits {
  bool twice_differentiable_at_origin = false;
  bool spectral_density_nonincreasing = false;
  bool has_spectral_density = false;
  bool valid_in_dim = false;  // membership of phi in Phi_d
};

inline FamilyTraits family_traits(const IsotropicFamily& f, int d) {
  FamilyTraits t;
  switch (f.kind) {
    case FamilyKind::matern:
      t.twice_differentiable_at_origin = f.nu > 1.0;
      t.spectral_density_nonincreasing = true;
      t.has_spectral_density = true;
      t.valid_in_dim = true;
      break;
    case FamilyKind::cauchy:
      t.twice_differentiable_at_origin = true;
      t.spectral_density_nonincreasing = true;
      t.has_spectral_density = f.delta > 0.25 * (d - 1);
      t.valid_in_dim = true;
      break;
    case FamilyKind::gauss_hypergeom: {
      const bool shape_ok = 2.0 * (f.beta - f.alpha) * (f.gamma - f.alpha) >= f.alpha &&
                            2.0 * (f.beta + f.gamma) >= 6.0 * f.alpha + 1.0;
      t.valid_in_dim = shape_ok && 2.0 * f.alpha > d;
      t.twice_differentiable_at_origin = 2.0 * f.alpha > d + 2;
      // nonincreasing density via the montee when phi is in Phi_{d+2}
      t.spectral_density_nonincreasing = shape_ok && 2.0 * f.alpha > d + 2;
      t.has_spectral_density = t.valid_in_dim;
      break;
    }
    case FamilyKind::cardinal_sine:
      t.twice_differentiable_at_origin = true;
      t.spectral_density_nonincreasing = false;
      t.has_spectral_density = d <= 2;
      t.valid_in_dim = d <= 3;
      break;
    case FamilyKind::gaussian:
      t.twice_differentiable_at_origin = true;
      t.spectral_density_nonincreasing = true;
      t.has_spectral_density = true;
      t.valid_in_dim = true;
      break;
  }
  return t;
}

/// Numerical d-radial spectral density by quadrature of the Hankel
/// transform.  Oscillatory tails are handled by integrating between the
/// asymptotic kernel zeros and accelerating the alternating chunk series
/// with repeated averaging.  Serves as the reference for the closed forms.
/// chunk_period overrides the oscillation period used for tail chunking
/// (needed when the profile itself oscillates, e.g. the cardinal sine).
inline double hankel_spectral_oracle(const std::function<double(double)>& phi_fn, int d,
                                     double omega, double truncation = 200.0,
                                     double tolerance = 1e-10, int max_chunks = 400,
                                     double chunk_period = 0.0) {
  if (d < 1) throw std::domain_error("hankel_spectral_oracle: d >= 1 required");
  if (omega < 0.0) throw std::domain_error("hankel_spectral_oracle: omega >= 0 required");
  using boost::math::quadrature::gauss_kronrod;
  const long double prefac = std::pow(2.0L * M_PIl, -0.5L * d) /
                             (std::pow(2.0L, 0.5L * (d - 2)) * std::tgammal(0.5L * d));
  auto g = [&](long double h) -> long double {
    return (long double)omega_d(d, omega * (double)h) * (long double)phi_fn((double)h) *
           std::pow(h, (long double)(d - 1));
  };

  const double period =
      chunk_period > 0.0
          ? chunk_period
          : (omega > 0.0 ? M_PI / omega : std::numeric_limits<double>::infinity());
  if (!std::isfinite(period)) {
    // No oscillation to exploit: plain adaptive quadrature up to the cutoff.
    long double err;
    long double v = gauss_kronrod<long double, 31>::integrate(g, 0.0L, (long double)truncation,
                                                              14, tolerance, &err);
    return (double)(prefac * v);
  }
  // Head: a few periods integrated adaptively.
  const long double head_end = 4.0L * (long double)period;
  long double err;
  long double head =
      gauss_kronrod<long double, 31>::integrate(g, 0.0L, head_end, 14, tolerance, &err);

  // Alternating chunk series over the oscillation periods.  The series runs
  // until the chunks become negligible or the budget is exhausted; the
  // averaging below extrapolates the remaining alternating tail.
  std::vector<long double> partial;
  long double acc = 0.0L;
  long double lo = head_end;
  int tiny_streak = 0;
  for (int k = 0; k < max_chunks; ++k) {
    const long double hi = lo + (long double)period;
    long double c = gauss_kronrod<long double, 15>::integrate(g, lo, hi, 7, 1e-14L);
    acc += c;
    partial.push_back(acc);
    lo = hi;
    if (std::abs(c) <= 1e-17L * (std::abs(head) + std::abs(acc) + 1e-300L)) {
      if (++tiny_streak >= 2) break;
    } else {
      tiny_streak = 0;
    }
  }
  long double tail = 0.0L;
  const long double scale = std::abs(head) + std::abs(acc) + 1e-300L;
  if (!partial.empty() && partial.size() >= 2 &&
      std::abs(partial.back() - partial[partial.size() - 2]) <= 1e-13L * scale) {
    // chunk series converged absolutely (decaying or compactly supported
    // integrand): the plain sum is already the integral
    tail = acc;
  } else if (!partial.empty()) {
    // Repeated averaging of the partial-sum sequence (Euler transform).
    std::vector<long double> s = partial;
    while (s.size() > 1) {
      for (size_t i = 0; i + 1 < s.size(); ++i) s[i] = 0.5L * (s[i] + s[i + 1]);
      s.pop_back();
      if (s.size() > 2 && std::abs((double)(s[s.size() - 1] - s[s.size() - 2])) <
                              1e-16 * (std::abs((double)s[0]) + 1e-300))
        break;
    }
    tail = s.back();
  }
  return (double)(prefac * (head + tail));
}

namespace detail {

// kappa(alpha;beta,gamma) in the hypergeometric spectral density, fixed by
// matching the Hankel quadrature at omega = 0.  Cached per parameter triple.
inline double hyper_kappa(const IsotropicFamily& f, int d) {
  static std::map<std::pair<IsotropicFamily, int>, double> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto key = std::make_pair(f, d);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto profile = [&](double t) { return hyper_phi(f, t); };
  // compact support on [0,1]; truncation past the support makes the
  // trailing chunks vanish exactly
  double f0 = hankel_spectral_oracle(profile, d, 0.0, 1.5, 1e-12);
  cache[key] = f0;
  return f0;
}

}  // namespace detail

/// Closed-form d-radial spectral density f_d(omega).
inline double spectral_density(const IsotropicFamily& f, int d, double omega) {
  if (omega < 0.0) throw std::domain_error("spectral_density: omega >= 0 required");
  const FamilyTraits tr = family_traits(f, d);
  if (!tr.has_spectral_density) {
    throw std::domain_error("spectral_density: family has no spectral density in this dimension");
  }
  switch (f.kind) {
    case FamilyKind::matern:
      return gamma_fn(f.nu + 0.5 * d) / (gamma_fn(f.nu) * std::pow(M_PI, 0.5 * d)) *
             std::pow(1.0 + omega * omega, -(f.nu + 0.5 * d));
    case FamilyKind::cauchy: {
      const double mu = 0.5 * d - f.delta;  // K order (may be negative)
      const double pref = std::pow(2.0, 1.0 - 0.5 * d - f.delta) /
                          (gamma_fn(f.delta) * std::pow(M_PI, 0.5 * d));
      if (omega == 0.0) {
        if (mu < 0.0)  // finite limit: omega^{-mu} K_{-mu}(omega) -> 2^{-mu-1} Gamma(-mu)
          return pref * std::pow(2.0, -mu - 1.0) * gamma_fn(-mu);
        throw std::domain_error("spectral_density: Cauchy density diverges at omega=0 for delta <= d/2");
      }
      return pref * bessel_k(std::abs(mu), omega) / std::pow(omega, mu);
    }
    case FamilyKind::gauss_hypergeom: {
      // Argument scaling -omega^2/4 pinned by the Hankel quadrature
      // cross-check (the ratio oracle/1F2 is constant in omega only with
      // this scaling).
      const double kappa = detail::hyper_kappa(f, d);
      return kappa * hyper_1f2(f.alpha, f.beta, f.gamma, -0.25 * omega * omega);
    }
    case FamilyKind::cardinal_sine: {
      // Constant 1/(2 pi^{d-1}) fixed by the (2pi)^{-d} inverse-transform
      // convention and verified against the Hankel quadrature.
      if (omega >= 1.0) return 0.0;
      const double pref = 0.5 * std::pow(M_PI, 1.0 - d);
      return pref * std::pow(1.0 - omega * omega, 0.5 * (1 - d));
    }
    case FamilyKind::gaussian:
      return std::pow(4.0 * M_PI, -0.5 * d) * std::exp(-0.25 * omega * omega);
  }
  throw std::logic_error("spectral_density: unknown family");
}

}  // namespace spatcov
