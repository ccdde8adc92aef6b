#pragma once

// Covariance constructions over the isotropic families: the difference of
// geometric anisotropies (T1), the shifted-isotropic difference (T2), the
// directional-derivative construction (T3), plus the two elementary
// constructions (geometric anisotropy and an axis product).  Each model
// carries a validity certificate.

#include <cmath>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <variant>

#include "spatcov/anisotropy.hpp"
#include "spatcov/models.hpp"
#include "spatcov/optim.hpp"

namespace spatcov {

enum class Validity { proved, failed, unchecked };

struct ValidityCertificate {
  Validity status = Validity::unchecked;
  std::string detail;
  double lhs = std::numeric_limits<double>::quiet_NaN();
  double rhs = std::numeric_limits<double>::quiet_NaN();
  bool proved() const { return status == Validity::proved; }
};

inline const char* to_string(Validity v) {
  switch (v) {
    case Validity::proved: return "PROVED";
    case Validity::failed: return "FAILED";
    case Validity::unchecked: return "UNCHECKED";
  }
  return "?";
}

/// cos^2(theta) phi2''(sqrt(a2)|h|) + sin^2(theta) phi2'(sqrt(a2)|h|)/(sqrt(a2)|h|)
/// with theta the angle between h and u; equals phi2''(0) in the limit
/// h -> 0.  This is the negated covariance of the directional-derivative
/// field of phi2.
inline double derivative_bracket(const IsotropicFamily& phi2, double a2, const Vec& u,
                                 const Vec& h) {
  const double hn = h.norm();
  if (hn == 0.0) return phi_d2(phi2, 0.0);
  const double t = std::sqrt(a2) * hn;
  double c = h.dot(u) / (hn * u.norm());
  c = std::clamp(c, -1.0, 1.0);
  const double cos2 = c * c;
  return cos2 * phi_d2(phi2, t) + (1.0 - cos2) * phi_d1_over_t(phi2, t);
}

class CovarianceModel;
using ModelPtr = std::shared_ptr<const CovarianceModel>;

struct T1Model {
  IsotropicFamily family;
  AnisotropyMatrix a1, a2;
  double b1, b2;
};
struct T2Model {
  IsotropicFamily family;
  double a1, a2, b1, b2;
  Vec eta;
};
struct T3Model {
  ModelPtr base;  // non-null when the first component is a full model (Remark-3 variant)
  std::optional<IsotropicFamily> phi1;
  IsotropicFamily phi2;
  double a1, a2, b1, b2;
  Vec u;
};
struct GeometricModel {
  IsotropicFamily family;
  AnisotropyMatrix a;
};
struct AxisProductModel {
  IsotropicFamily phi1, phi2;
  int axis;
  double a1, a2, sigma2;
  int dim;
};
struct ScaledModel {
  ModelPtr base;
  double sigma2;
};

ValidityCertificate check_T1_general(const IsotropicFamily& phi, const AnisotropyMatrix& a1,
                                     const AnisotropyMatrix& a2, double b1, double b2, int d,
                                     int omega_budget);
ValidityCertificate check_T2(const IsotropicFamily& phi, double a1, double a2, double b1,
                             double b2, int d);
ValidityCertificate check_T3(const std::optional<IsotropicFamily>& phi1, const ModelPtr& base,
                             const IsotropicFamily& phi2, int d);

class CovarianceModel {
 public:
  using Kind =
      std::variant<T1Model, T2Model, T3Model, GeometricModel, AxisProductModel, ScaledModel>;

  static ModelPtr t1(const IsotropicFamily& f, const AnisotropyMatrix& a1,
                     const AnisotropyMatrix& a2, double b1, double b2) {
    if (a1.dim() != a2.dim()) throw std::invalid_argument("t1: matrix dimensions differ");
    if (b1 < 0.0 || b2 < 0.0) throw std::invalid_argument("t1: b1, b2 must be >= 0");
    return finish(Kind{T1Model{f, a1, a2, b1, b2}}, a1.dim());
  }
  static ModelPtr t2(const IsotropicFamily& f, double a1, double a2, double b1, double b2,
                     const Vec& eta) {
    if (!(a1 > 0.0) || !(a2 > 0.0)) throw std::invalid_argument("t2: a1, a2 must be > 0");
    if (b1 < 0.0 || b2 < 0.0) throw std::invalid_argument("t2: b1, b2 must be >= 0");
    return finish(Kind{T2Model{f, a1, a2, b1, b2, eta}}, static_cast<int>(eta.size()));
  }
  static ModelPtr t3(const IsotropicFamily& phi1, const IsotropicFamily& phi2, double a1,
                     double a2, double b1, double b2, const Vec& u) {
    return t3_impl(phi1, nullptr, phi2, a1, a2, b1, b2, u);
  }
  static ModelPtr t3(const ModelPtr& base, const IsotropicFamily& phi2, double a1, double a2,
                     double b1, double b2, const Vec& u) {
    if (!base) throw std::invalid_argument("t3: null base model");
    return t3_impl(std::nullopt, base, phi2, a1, a2, b1, b2, u);
  }
  static ModelPtr geometric(const IsotropicFamily& f, const AnisotropyMatrix& a) {
    return finish(Kind{GeometricModel{f, a}}, a.dim());
  }
  static ModelPtr axis_product(const IsotropicFamily& phi1, const IsotropicFamily& phi2,
                               int axis, double a1, double a2, double sigma2, int dim) {
    if (axis < 0 || axis >= dim) throw std::invalid_argument("axis_product: axis out of range");
    if (!(a1 > 0.0) || !(a2 > 0.0) || !(sigma2 > 0.0))
      throw std::invalid_argument("axis_product: a1, a2, sigma2 must be > 0");
    return finish(Kind{AxisProductModel{phi1, phi2, axis, a1, a2, sigma2, dim}}, dim);
  }
  static ModelPtr scaled(const ModelPtr& base, double sigma2) {
    if (!base) throw std::invalid_argument("scaled: null base model");
    if (!(sigma2 > 0.0)) throw std::invalid_argument("scaled: sigma2 must be > 0");
    return finish(Kind{ScaledModel{base, sigma2}}, base->dim());
  }
  /// Rescale to a correlation function (unit value at the origin).
  static ModelPtr normalized(const ModelPtr& base) {
    const double c0 = base->eval(Vec::Zero(base->dim()));
    if (!(c0 > 0.0)) throw std::invalid_argument("normalized: nonpositive value at origin");
    return scaled(base, 1.0 / c0);
  }

  int dim() const { return dim_; }
  const Kind& kind() const { return kind_; }
  const ValidityCertificate& certificate() const { return cert_; }

  double eval(const Vec& h) const {
    if (h.size() != dim_) throw std::invalid_argument("eval: dimension mismatch");
    return std::visit([&](const auto& m) { return eval_impl(m, h); }, kind_);
  }

  /// Recompute and store the validity certificate.
  const ValidityCertificate& certify(int omega_budget = 4000) const {
    cert_ = std::visit([&](const auto& m) { return certify_impl(m, omega_budget); }, kind_);
    return cert_;
  }

 private:
  CovarianceModel(Kind k, int d) : kind_(std::move(k)), dim_(d) {}

  static ModelPtr finish(Kind k, int d) {
    auto m = ModelPtr(new CovarianceModel(std::move(k), d));
    m->certify();
    return m;
  }

  static ModelPtr t3_impl(std::optional<IsotropicFamily> phi1, ModelPtr base,
                          const IsotropicFamily& phi2, double a1, double a2, double b1,
                          double b2, const Vec& u) {
    if (!(a1 > 0.0) || !(a2 > 0.0)) throw std::invalid_argument("t3: a1, a2 must be > 0");
    if (b1 < 0.0 || b2 < 0.0) throw std::invalid_argument("t3: b1, b2 must be >= 0");
    if (std::abs(u.norm() - 1.0) > 1e-12)
      throw std::invalid_argument("t3: u must be a unit vector");
    const int d = static_cast<int>(u.size());
    if (base && base->dim() != d) throw std::invalid_argument("t3: base dimension mismatch");
    return finish(Kind{T3Model{std::move(base), std::move(phi1), phi2, a1, a2, b1, b2, u}}, d);
  }

  double eval_impl(const T1Model& m, const Vec& h) const {
    return m.b1 * phi(m.family, m.a1.quad_form_sqrt(h)) -
           m.b2 * phi(m.family, m.a2.quad_form_sqrt(h));
  }
  double eval_impl(const T2Model& m, const Vec& h) const {
    const double sa1 = std::sqrt(m.a1), sa2 = std::sqrt(m.a2);
    return m.b1 * phi(m.family, sa1 * h.norm()) -
           0.5 * m.b2 *
               (phi(m.family, sa2 * (h - m.eta).norm()) +
                phi(m.family, sa2 * (h + m.eta).norm()));
  }
  double eval_impl(const T3Model& m, const Vec& h) const {
    const double first = m.base ? m.base->eval(h)
                                : phi(*m.phi1, std::sqrt(m.a1) * h.norm());
    return m.b1 * first - m.b2 * derivative_bracket(m.phi2, m.a2, m.u, h);
  }
  double eval_impl(const GeometricModel& m, const Vec& h) const {
    return phi(m.family, m.a.quad_form_sqrt(h));
  }
  double eval_impl(const AxisProductModel& m, const Vec& h) const {
    return m.sigma2 * phi(m.phi1, std::sqrt(m.a1) * h.norm()) *
           phi(m.phi2, std::sqrt(m.a2) * std::abs(h(m.axis)));
  }
  double eval_impl(const ScaledModel& m, const Vec& h) const {
    return m.sigma2 * m.base->eval(h);
  }

  ValidityCertificate certify_impl(const T1Model& m, int budget) const {
    return check_T1_general(m.family, m.a1, m.a2, m.b1, m.b2, dim_, budget);
  }
  ValidityCertificate certify_impl(const T2Model& m, int) const {
    return check_T2(m.family, m.a1, m.a2, m.b1, m.b2, dim_);
  }
  ValidityCertificate certify_impl(const T3Model& m, int) const {
    return check_T3(m.phi1, m.base, m.phi2, dim_);
  }
  ValidityCertificate certify_impl(const GeometricModel& m, int) const {
    ValidityCertificate c;
    const bool ok = family_traits(m.family, dim_).valid_in_dim;
    c.status = ok ? Validity::proved : Validity::failed;
    c.detail = ok ? "geometric anisotropy of a family valid in dimension d"
                  : "family not valid in dimension d";
    return c;
  }
  ValidityCertificate certify_impl(const AxisProductModel& m, int) const {
    ValidityCertificate c;
    const bool ok = family_traits(m.phi1, dim_).valid_in_dim &&
                    family_traits(m.phi2, 1).valid_in_dim;
    c.status = ok ? Validity::proved : Validity::failed;
    c.detail = ok ? "product of a d-valid radial factor and a 1D axis factor"
                  : "a factor family is invalid in its dimension";
    return c;
  }
  ValidityCertificate certify_impl(const ScaledModel& m, int) const {
    return m.base->certificate();
  }

  Kind kind_;
  int dim_;
  mutable ValidityCertificate cert_;
};

/// Prop-1 validity of b1 phi(|h|_{A1}) - b2 phi(|h|_{A2}).  Monotone
/// densities with A1 >= A2 short-circuit to the closed-form condition;
/// otherwise the spectral ratio supremum is located by multi-start
/// simplex ascent within the given evaluation budget.
inline ValidityCertificate check_T1_general(const IsotropicFamily& phi_fam,
                                            const AnisotropyMatrix& a1,
                                            const AnisotropyMatrix& a2, double b1, double b2,
                                            int d, int omega_budget = 4000) {
  ValidityCertificate cert;
  if (b2 == 0.0) {
    cert.status = Validity::proved;
    cert.detail = "b2 = 0: no negative term";
    cert.lhs = b1;
    cert.rhs = 0.0;
    return cert;
  }
  const FamilyTraits tr = family_traits(phi_fam, d);
  if (!tr.has_spectral_density) {
    cert.status = Validity::unchecked;
    cert.detail = "family has no d-radial spectral density; Prop-1 criterion unavailable";
    return cert;
  }
  const double det_ratio = std::sqrt(a1.det() / a2.det());
  if (tr.spectral_density_nonincreasing && loewner_geq(a1, a2)) {
    const double rhs = b2 * det_ratio;
    cert.lhs = b1;
    cert.rhs = rhs;
    std::ostringstream os;
    os << "nonincreasing density and A1 >= A2: condition b1 >= b2*sqrt(|A1|/|A2|), " << b1
       << (b1 + 1e-12 * (1.0 + rhs) >= rhs ? " >= " : " < ") << rhs;
    cert.detail = os.str();
    cert.status =
        b1 + 1e-12 * (1.0 + rhs) >= rhs ? Validity::proved : Validity::failed;
    return cert;
  }

  // General supremum of f(|w|_{A2^-1}) / f(|w|_{A1^-1}).
  auto log_ratio = [&](const Vec& w) -> double {
    const double w2 = a2.inv_quad_form_sqrt(w);
    const double w1 = a1.inv_quad_form_sqrt(w);
    double f2, f1;
    try {
      f2 = spectral_density(phi_fam, d, w2);
      f1 = spectral_density(phi_fam, d, w1);
    } catch (const std::exception&) {
      return -std::numeric_limits<double>::infinity();
    }
    if (f2 <= 0.0) return -std::numeric_limits<double>::infinity();
    if (f1 <= 0.0) return std::numeric_limits<double>::infinity();
    return std::log(f2) - std::log(f1);
  };

  double best = log_ratio(Vec::Zero(d));
  bool all_converged = true;
  int used = 0;
  const double radii[] = {0.1, 1.0, 10.0, 100.0};
  const int dirs = std::max(8, 8 * d);
  for (double r : radii) {
    for (int k = 0; k < dirs; ++k) {
      if (used >= omega_budget) {
        all_converged = false;
        break;
      }
      Vec w0(d);
      if (d == 2) {
        const double th = 2.0 * M_PI * k / dirs;
        w0 << std::cos(th), std::sin(th);
      } else {
        // deterministic quasi-random directions
        for (int j = 0; j < d; ++j)
          w0(j) = std::cos(2.0 * M_PI * std::fmod(0.5 * (k + 1) * (j + 1) * 0.6180339887, 1.0));
        w0.normalize();
      }
      w0 *= r;
      NelderMeadOptions opt;
      opt.max_evaluations = std::min(200, omega_budget - used);
      opt.simplex_tolerance = 1e-10;
      opt.initial_step = 0.1 * r;
      auto res = nelder_mead([&](const Vec& w) { return -log_ratio(w); }, w0, opt);
      used += res.evaluations;
      if (!res.converged) all_converged = false;
      best = std::max(best, -res.value);
      if (std::isinf(best)) break;
    }
    if (std::isinf(best)) break;
  }

  if (std::isinf(best)) {
    cert.status = Validity::failed;
    cert.lhs = b1;
    cert.rhs = std::numeric_limits<double>::infinity();
    cert.detail = "spectral ratio is unbounded: difference cannot be positive semidefinite";
    return cert;
  }
  const double sup = std::exp(best);
  const double rhs = b2 * det_ratio * sup;
  cert.lhs = b1;
  cert.rhs = rhs;
  if (!std::isfinite(rhs)) {
    cert.status = Validity::failed;
    cert.detail = "spectral ratio overflows: difference cannot be positive semidefinite";
    return cert;
  }
  std::ostringstream os;
  os << "numerical supremum " << sup << ": condition b1 >= b2*sqrt(|A1|/|A2|)*sup, " << b1
     << (b1 + 1e-12 * (1.0 + rhs) >= rhs ? " >= " : " < ") << rhs;
  cert.detail = os.str();
  if (b1 + 1e-12 * (1.0 + rhs) >= rhs)
    cert.status = all_converged ? Validity::proved : Validity::unchecked;
  else
    cert.status = Validity::failed;
  return cert;
}

/// Prop-2 sufficient condition for the shifted construction.  The shift
/// vector does not enter; when the sufficient condition fails the result
/// is UNCHECKED (the condition is not known to be necessary).
inline ValidityCertificate check_T2(const IsotropicFamily& phi_fam, double a1, double a2,
                                    double b1, double b2, int d) {
  ValidityCertificate cert;
  if (b2 == 0.0) {
    cert.status = Validity::proved;
    cert.detail = "b2 = 0: no negative term";
    cert.lhs = b1;
    cert.rhs = 0.0;
    return cert;
  }
  const FamilyTraits tr = family_traits(phi_fam, d);
  if (!tr.spectral_density_nonincreasing) {
    cert.status = Validity::unchecked;
    cert.detail =
        "d-radial spectral density is not nonincreasing; the Prop-2 sufficient condition "
        "does not apply";
    return cert;
  }
  const double rhs = b2 * std::pow(a1 / a2, 0.5 * d);
  cert.lhs = b1;
  cert.rhs = rhs;
  std::ostringstream os;
  os << "condition b1 >= b2*(a1/a2)^{d/2}, " << b1
     << (b1 + 1e-12 * (1.0 + rhs) >= rhs ? " >= " : " < ") << rhs;
  cert.detail = os.str();
  cert.status = b1 + 1e-12 * (1.0 + rhs) >= rhs ? Validity::proved : Validity::unchecked;
  if (cert.status == Validity::unchecked)
    cert.detail += " (sufficient condition fails; validity unknown)";
  return cert;
}

/// Prop-3 validity: holds by construction whenever phi2 is twice
/// differentiable at the origin and both components are valid in d.
inline ValidityCertificate check_T3(const std::optional<IsotropicFamily>& phi1,
                                    const ModelPtr& base, const IsotropicFamily& phi2, int d) {
  ValidityCertificate cert;
  const FamilyTraits tr2 = family_traits(phi2, d);
  if (!tr2.twice_differentiable_at_origin) {
    cert.status = Validity::failed;
    cert.detail = "phi2 is not twice differentiable at the origin";
    return cert;
  }
  if (!tr2.valid_in_dim) {
    cert.status = Validity::failed;
    cert.detail = "phi2 is not a valid covariance in dimension d";
    return cert;
  }
  if (base) {
    if (!base->certificate().proved()) {
      cert.status = base->certificate().status;
      cert.detail = "base model certificate: " + base->certificate().detail;
      return cert;
    }
  } else if (phi1) {
    if (!family_traits(*phi1, d).valid_in_dim) {
      cert.status = Validity::failed;
      cert.detail = "phi1 is not a valid covariance in dimension d";
      return cert;
    }
  }
  cert.status = Validity::proved;
  cert.detail = "positive semidefinite by construction (derivative-field representation)";
  return cert;
}

/// Covariance Gram matrix G_ij = C(x_i - x_j).
inline Mat gram_matrix(const std::function<double(const Vec&)>& cov,
                       const std::vector<Vec>& points) {
  const int n = static_cast<int>(points.size());
  Mat g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      g(i, j) = cov(points[i] - points[j]);
      g(j, i) = g(i, j);
    }
  return g;
}

inline Mat gram_matrix(const CovarianceModel& model, const std::vector<Vec>& points,
                       bool allow_uncertified = false) {
  if (!allow_uncertified && !model.certificate().proved())
    throw std::runtime_error(
        "gram_matrix: model certificate is not PROVED (pass allow_uncertified to override)");
  return gram_matrix([&](const Vec& h) { return model.eval(h); }, points);
}

}  // namespace spatcov
