#pragma once

// Parameter estimation: pairwise-difference composite likelihood and
// count-weighted least squares on empirical variograms, driven by a
// box-constrained Nelder-Mead search in transformed space.

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "spatcov/field.hpp"
#include "spatcov/optim.hpp"
#include "spatcov/transforms.hpp"

namespace spatcov {

/// Named parameters with box bounds; mapped to an unconstrained working
/// space by log (one-sided) or logit (two-sided) transforms.
struct ParameterVector {
  std::vector<std::string> names;
  Vec values;
  Vec lower, upper;  // may be +-infinity

  int size() const { return static_cast<int>(values.size()); }

  void validate() const {
    for (int i = 0; i < size(); ++i)
      if (!(lower(i) <= values(i) && values(i) <= upper(i)))
        throw std::invalid_argument("ParameterVector: value out of bounds for " + names[i]);
  }

  Vec to_unconstrained() const {
    Vec y(size());
    for (int i = 0; i < size(); ++i) {
      const double lo = lower(i), hi = upper(i), x = values(i);
      if (std::isfinite(lo) && std::isfinite(hi)) {
        const double p = std::clamp((x - lo) / (hi - lo), 1e-12, 1.0 - 1e-12);
        y(i) = std::log(p / (1.0 - p));
      } else if (std::isfinite(lo)) {
        y(i) = std::log(std::max(x - lo, 1e-300));
      } else if (std::isfinite(hi)) {
        y(i) = -std::log(std::max(hi - x, 1e-300));
      } else {
        y(i) = x;
      }
    }
    return y;
  }

  ParameterVector with_unconstrained(const Vec& y) const {
    ParameterVector out = *this;
    for (int i = 0; i < size(); ++i) {
      const double lo = lower(i), hi = upper(i);
      if (std::isfinite(lo) && std::isfinite(hi)) {
        out.values(i) = lo + (hi - lo) / (1.0 + std::exp(-y(i)));
      } else if (std::isfinite(lo)) {
        out.values(i) = lo + std::exp(y(i));
      } else if (std::isfinite(hi)) {
        out.values(i) = hi - std::exp(-y(i));
      } else {
        out.values(i) = y(i);
      }
    }
    return out;
  }
};

struct FitResult {
  ParameterVector estimate;
  double objective_value = std::numeric_limits<double>::quiet_NaN();
  enum class Objective { cl, wls } objective_kind = Objective::cl;
  int iterations = 0;
  bool converged = false;
  ValidityCertificate validity;
};

/// Pairs within a truncation radius, precomputed once per dataset.
/// Order is the deterministic (i < j) row-major enumeration.
struct PairSet {
  std::vector<Vec> separations;
  std::vector<double> sq_diffs;  // (z_i - z_j)^2
  std::vector<std::pair<int, int>> indices;

  static PairSet build(const SpatialDataset& data, double max_pair_distance) {
    PairSet ps;
    const auto& z = data.working_values();
    const int n = static_cast<int>(data.size());
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const Vec h = data.locations[i] - data.locations[j];
        if (h.norm() > max_pair_distance) continue;
        ps.separations.push_back(h);
        const double dz = z[i] - z[j];
        ps.sq_diffs.push_back(dz * dz);
        ps.indices.emplace_back(i, j);
      }
    return ps;
  }
};

/// Gaussian difference composite log-likelihood: D_ij ~ N(0, 2 gamma(h_ij)),
/// each pair contributing -(1/2)[log(4 pi gamma) + D^2/(2 gamma)].
inline double composite_log_likelihood(const CovarianceModel& model, const PairSet& pairs) {
  if (!model.certificate().proved())
    throw std::runtime_error("composite_log_likelihood: model certificate is not PROVED");
  const double c0 = model.eval(Vec::Zero(model.dim()));
  long double acc = 0.0L;
  for (std::size_t k = 0; k < pairs.separations.size(); ++k) {
    const double g = c0 - model.eval(pairs.separations[k]);
    if (!(g > 0.0)) {
      std::ostringstream os;
      os << "composite_log_likelihood: nonpositive variogram at pair ("
         << pairs.indices[k].first << "," << pairs.indices[k].second << ")";
      throw std::runtime_error(os.str());
    }
    acc += -0.5L * (std::log(4.0 * M_PI * g) + pairs.sq_diffs[k] / (2.0 * g));
  }
  return static_cast<double>(acc);
}

inline double composite_log_likelihood(const CovarianceModel& model, const SpatialDataset& data,
                                       double max_pair_distance) {
  return composite_log_likelihood(model, PairSet::build(data, max_pair_distance));
}

/// Count-weighted least squares against one or more directional variograms.
inline double wls_variogram_objective(const CovarianceModel& model,
                                      const std::vector<EmpiricalVariogram>& variograms) {
  bool any = false;
  long double acc = 0.0L;
  for (const auto& v : variograms) {
    for (std::size_t b = 0; b < v.lag_centers.size(); ++b) {
      if (v.pair_counts[b] <= 0) continue;
      any = true;
      const Vec h = v.lag_centers[b] * v.direction;
      const double gm = model_variogram(model, h);
      const double r = v.semivariances[b] - gm;
      acc += static_cast<long double>(v.pair_counts[b]) * r * r;
    }
  }
  if (!any) throw std::invalid_argument("wls_variogram_objective: no nonempty bins");
  return static_cast<double>(acc);
}

using ModelBuilder = std::function<ModelPtr(const Vec& params)>;

namespace detail {

inline FitResult fit_minimize(const std::function<double(const ParameterVector&)>& objective,
                              const ModelBuilder& builder, const ParameterVector& init,
                              int budget, FitResult::Objective kind) {
  init.validate();
  auto wrapped = [&](const Vec& y) -> double {
    const ParameterVector p = init.with_unconstrained(y);
    try {
      const double v = objective(p);
      return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    } catch (const std::exception&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  FitResult best;
  best.objective_kind = kind;
  best.estimate = init;
  double best_val = std::numeric_limits<double>::infinity();
  bool converged = false;
  int used = 0;
  Vec y0 = init.to_unconstrained();
  const int restarts = 3;
  for (int r = 0; r < restarts && used < budget; ++r) {
    Vec start = y0;
    if (r > 0) {
      // deterministic perturbation around the best point so far
      for (int i = 0; i < start.size(); ++i)
        start(i) += 0.3 * std::cos(1.0 + 2.7 * r + 1.3 * i);
    }
    NelderMeadOptions opt;
    opt.max_evaluations = (budget - used) / (restarts - r);
    opt.simplex_tolerance = 1e-8;
    opt.initial_step = r == 0 ? 0.5 : 0.25;
    auto res = nelder_mead(wrapped, start, opt);
    used += res.evaluations;
    if (res.value < best_val) {
      best_val = res.value;
      y0 = res.x;
      converged = res.converged;
    }
  }
  best.iterations = used;
  best.converged = converged && std::isfinite(best_val);
  best.estimate = init.with_unconstrained(y0);
  best.objective_value = best_val;
  try {
    auto m = builder(best.estimate.values);
    best.validity = m->certificate();
  } catch (const std::exception& e) {
    best.validity.status = Validity::unchecked;
    best.validity.detail = std::string("builder failed at estimate: ") + e.what();
  }
  return best;
}

}  // namespace detail

/// Maximize the composite likelihood.  The reported objective_value is the
/// attained log-CL.
inline FitResult fit_cl(const ModelBuilder& builder, const ParameterVector& init,
                        const SpatialDataset& data, double max_pair_distance,
                        int budget = 2000) {
  const PairSet pairs = PairSet::build(data, max_pair_distance);
  if (pairs.separations.empty())
    throw std::invalid_argument("fit_cl: no pairs within the truncation radius");
  auto objective = [&](const ParameterVector& p) {
    auto m = builder(p.values);
    return -composite_log_likelihood(*m, pairs);
  };
  FitResult res =
      detail::fit_minimize(objective, builder, init, budget, FitResult::Objective::cl);
  res.objective_value = -res.objective_value;
  return res;
}

/// Minimize the count-weighted variogram least squares objective.
inline FitResult fit_wls(const ModelBuilder& builder, const ParameterVector& init,
                         const std::vector<EmpiricalVariogram>& variograms, int budget = 2000) {
  auto objective = [&](const ParameterVector& p) {
    auto m = builder(p.values);
    return wls_variogram_objective(*m, variograms);
  };
  return detail::fit_minimize(objective, builder, init, budget, FitResult::Objective::wls);
}

}  // namespace spatcov
