#pragma once

// Derivative-free simplex minimizer (Nelder-Mead with adaptive
// coefficients).  Shared by the validity checker and the fitting code.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace spatcov {

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = std::numeric_limits<double>::infinity();
  int evaluations = 0;
  bool converged = false;
};

struct NelderMeadOptions {
  int max_evaluations = 2000;
  double simplex_tolerance = 1e-8;  // diameter in parameter space
  double initial_step = 0.5;
};

inline NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                                    const Eigen::VectorXd& x0,
                                    const NelderMeadOptions& opt = {}) {
  const int n = static_cast<int>(x0.size());
  // adaptive coefficients (scale with dimension)
  const double alpha = 1.0;
  const double beta = 1.0 + 2.0 / n;
  const double gamma = 0.75 - 0.5 / n;
  const double delta = 1.0 - 1.0 / n;

  NelderMeadResult res;
  std::vector<Eigen::VectorXd> xs(n + 1, x0);
  std::vector<double> fs(n + 1);
  for (int i = 1; i <= n; ++i) xs[i](i - 1) += opt.initial_step;
  for (int i = 0; i <= n; ++i) {
    fs[i] = f(xs[i]);
    ++res.evaluations;
  }

  auto order = [&]() {
    std::vector<int> idx(n + 1);
    for (int i = 0; i <= n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fs[a] < fs[b]; });
    std::vector<Eigen::VectorXd> xs2(n + 1);
    std::vector<double> fs2(n + 1);
    for (int i = 0; i <= n; ++i) {
      xs2[i] = xs[idx[i]];
      fs2[i] = fs[idx[i]];
    }
    xs = std::move(xs2);
    fs = std::move(fs2);
  };

  while (res.evaluations < opt.max_evaluations) {
    order();
    double diam = 0.0;
    for (int i = 1; i <= n; ++i) diam = std::max(diam, (xs[i] - xs[0]).norm());
    if (diam < opt.simplex_tolerance) {
      res.converged = true;
      break;
    }
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) centroid += xs[i];
    centroid /= n;

    Eigen::VectorXd xr = centroid + alpha * (centroid - xs[n]);
    double fr = f(xr);
    ++res.evaluations;
    if (fr < fs[0]) {
      Eigen::VectorXd xe = centroid + beta * (xr - centroid);
      double fe = f(xe);
      ++res.evaluations;
      if (fe < fr) {
        xs[n] = xe;
        fs[n] = fe;
      } else {
        xs[n] = xr;
        fs[n] = fr;
      }
    } else if (fr < fs[n - 1]) {
      xs[n] = xr;
      fs[n] = fr;
    } else {
      const bool outside = fr < fs[n];
      Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + gamma * (xr - centroid))
                                   : Eigen::VectorXd(centroid - gamma * (xr - centroid));
      double fc = f(xc);
      ++res.evaluations;
      if (fc < std::min(fr, fs[n])) {
        xs[n] = xc;
        fs[n] = fc;
      } else {  // shrink
        for (int i = 1; i <= n; ++i) {
          xs[i] = xs[0] + delta * (xs[i] - xs[0]);
          fs[i] = f(xs[i]);
          ++res.evaluations;
        }
      }
    }
  }
  order();
  res.x = xs[0];
  res.value = fs[0];
  return res;
}

}  // namespace spatcov
