#pragma once

// Simple kriging with a known zero mean, dense Cholesky-based Gaussian
// simulation and split-sample validation metrics.

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "spatcov/field.hpp"
#include "spatcov/rng.hpp"
#include "spatcov/transforms.hpp"

namespace spatcov {

struct SolverReport {
  double jitter = 0.0;          // relative to C(0)
  double condition_estimate = 0.0;
};

struct KrigingResult {
  std::vector<double> predictions;
  std::vector<double> variances;
  SolverReport solver;
};

struct ValidationReport {
  double rmse = 0.0;
  double mae = 0.0;
  int n_holdout = 0;
  std::vector<double> absolute_errors;
};

namespace detail {

// Symmetric factorization with jitter escalation relative to the diagonal.
// Boundary-valid models can sit exactly on the PSD edge, hence the ladder.
inline std::pair<Eigen::LLT<Mat>, SolverReport> factor_with_jitter(const Mat& g) {
  const double c0 = g.diagonal().maxCoeff();
  SolverReport rep;
  for (double j : {0.0, 1e-10, 1e-8, 1e-6}) {
    Mat gj = g;
    if (j > 0.0) gj.diagonal().array() += j * c0;
    Eigen::LLT<Mat> llt(gj);
    if (llt.info() == Eigen::Success) {
      rep.jitter = j;
      const Mat& l = llt.matrixLLT();
      double dmin = l(0, 0), dmax = l(0, 0);
      for (int i = 1; i < l.rows(); ++i) {
        dmin = std::min(dmin, l(i, i));
        dmax = std::max(dmax, l(i, i));
      }
      rep.condition_estimate = (dmax / dmin) * (dmax / dmin);
      return {llt, rep};
    }
  }
  std::ostringstream os;
  os << "factor_with_jitter: Gram matrix not positive definite after maximal jitter "
     << "(n=" << g.rows() << ", C(0)=" << c0 << ")";
  throw std::runtime_error(os.str());
}

}  // namespace detail

/// Simple kriging of zero-mean residual data at the query locations.
inline KrigingResult simple_krige(const CovarianceModel& model, const SpatialDataset& data,
                                  const std::vector<Vec>& queries,
                                  bool allow_uncertified = false) {
  if (!allow_uncertified && !model.certificate().proved())
    throw std::runtime_error("simple_krige: model certificate is not PROVED");
  const auto& zv = data.working_values();
  const int n = static_cast<int>(data.size());
  Mat g = gram_matrix(model, data.locations, true);
  auto [llt, rep] = detail::factor_with_jitter(g);
  Vec z(n);
  for (int i = 0; i < n; ++i) z(i) = zv[i];
  Vec weights_rhs = llt.solve(z);
  const double c0 = model.eval(Vec::Zero(model.dim()));

  KrigingResult out;
  out.solver = rep;
  out.predictions.reserve(queries.size());
  out.variances.reserve(queries.size());
  for (const auto& q : queries) {
    Vec c(n);
    for (int i = 0; i < n; ++i) c(i) = model.eval(data.locations[i] - q);
    out.predictions.push_back(c.dot(weights_rhs));
    const double var = c0 - c.dot(llt.solve(c));
    out.variances.push_back(std::max(0.0, var));
  }
  return out;
}

/// Exact Gaussian simulation: values = L * eps with G = L L^T and eps
/// standard normal from the seeded portable generator.
inline std::vector<double> simulate_gaussian(const CovarianceModel& model,
                                             const std::vector<Vec>& points,
                                             std::uint64_t seed,
                                             bool allow_uncertified = false) {
  if (!allow_uncertified && !model.certificate().proved())
    throw std::runtime_error("simulate_gaussian: model certificate is not PROVED");
  const int n = static_cast<int>(points.size());
  if (n > 5000) throw std::invalid_argument("simulate_gaussian: n capped at 5000");
  Mat g = gram_matrix(model, points, true);
  auto [llt, rep] = detail::factor_with_jitter(g);
  Xoshiro256pp rng(seed);
  Vec eps(n);
  for (int i = 0; i < n; ++i) eps(i) = rng.normal();
  Vec vals = Mat(llt.matrixL()) * eps;
  return {vals.data(), vals.data() + n};
}

/// Krige the held-out points from the remaining data and report RMSE/MAE.
inline ValidationReport split_sample_validate(const CovarianceModel& model,
                                              const SpatialDataset& data,
                                              const std::vector<int>& holdout_indices,
                                              bool allow_uncertified = false) {
  const int n = static_cast<int>(data.size());
  std::vector<char> is_holdout(n, 0);
  for (int i : holdout_indices) {
    if (i < 0 || i >= n) throw std::invalid_argument("split_sample_validate: index out of range");
    is_holdout[i] = 1;
  }
  if (holdout_indices.empty())
    throw std::invalid_argument("split_sample_validate: empty holdout");
  SpatialDataset train;
  train.dim = data.dim;
  const auto& z = data.working_values();
  std::vector<Vec> queries;
  std::vector<double> truth;
  for (int i = 0; i < n; ++i) {
    if (is_holdout[i]) {
      queries.push_back(data.locations[i]);
      truth.push_back(z[i]);
    } else {
      train.locations.push_back(data.locations[i]);
      train.values.push_back(z[i]);
    }
  }
  if (train.size() == 0) throw std::invalid_argument("split_sample_validate: empty training set");

  auto kr = simple_krige(model, train, queries, allow_uncertified);
  ValidationReport rep;
  rep.n_holdout = static_cast<int>(queries.size());
  double se = 0.0, ae = 0.0;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const double e = kr.predictions[i] - truth[i];
    rep.absolute_errors.push_back(std::abs(e));
    se += e * e;
    ae += std::abs(e);
  }
  rep.rmse = std::sqrt(se / rep.n_holdout);
  rep.mae = ae / rep.n_holdout;
  return rep;
}

}  // namespace spatcov
