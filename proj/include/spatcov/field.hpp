#pragma once

// Spatial data handling: CSV ingestion, polynomial detrending and
// directional empirical variograms (Matheron estimator).

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "spatcov/transforms.hpp"

namespace spatcov {

struct SpatialDataset {
  int dim = 2;
  std::vector<Vec> locations;
  std::vector<double> values;
  std::optional<std::vector<double>> trend;
  std::optional<std::vector<double>> residuals;

  std::size_t size() const { return locations.size(); }

  const std::vector<double>& working_values() const {
    return residuals ? *residuals : values;
  }
};

struct EmpiricalVariogram {
  Vec direction;
  double angle_tolerance = 0.0;
  std::vector<double> lag_centers;
  std::vector<double> semivariances;  // NaN where pair_counts == 0
  std::vector<long> pair_counts;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    // trim
    auto b = cell.find_first_not_of(" \t\r");
    auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace detail

/// Load a 2D dataset from a headed CSV file; columns are selected by name.
inline SpatialDataset load_csv(const std::string& path, const std::string& x_col,
                               const std::string& y_col, const std::string& value_col) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("load_csv: empty file " + path);
  auto header = detail::split_csv_line(line);
  auto find_col = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw std::runtime_error("load_csv: column '" + name + "' not found in " + path);
    return static_cast<int>(it - header.begin());
  };
  const int ix = find_col(x_col), iy = find_col(y_col), iv = find_col(value_col);

  SpatialDataset ds;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = detail::split_csv_line(line);
    const int need = std::max({ix, iy, iv}) + 1;
    if (static_cast<int>(cells.size()) < need) {
      throw std::runtime_error("load_csv: line " + std::to_string(line_no) +
                               ": too few columns");
    }
    auto parse = [&](int col) {
      try {
        std::size_t pos;
        double v = std::stod(cells[col], &pos);
        if (pos != cells[col].size()) throw std::invalid_argument("trailing characters");
        return v;
      } catch (const std::exception&) {
        throw std::runtime_error("load_csv: line " + std::to_string(line_no) +
                                 ": non-numeric value '" + cells[col] + "'");
      }
    };
    Vec p(2);
    p << parse(ix), parse(iy);
    ds.locations.push_back(p);
    ds.values.push_back(parse(iv));
  }
  if (ds.locations.empty()) throw std::runtime_error("load_csv: no data rows in " + path);
  // duplicate-location guard
  for (std::size_t i = 0; i < ds.locations.size(); ++i)
    for (std::size_t j = i + 1; j < ds.locations.size(); ++j)
      if ((ds.locations[i] - ds.locations[j]).norm() < 1e-9)
        throw std::runtime_error("load_csv: duplicate locations at rows " +
                                 std::to_string(i + 2) + " and " + std::to_string(j + 2));
  return ds;
}

inline void save_csv(const SpatialDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_csv: cannot open " + path);
  out.precision(17);
  out << "x,y,value\n";
  for (std::size_t i = 0; i < ds.size(); ++i)
    out << ds.locations[i](0) << "," << ds.locations[i](1) << "," << ds.values[i] << "\n";
}

/// Subtract a least-squares polynomial trend in one coordinate; residuals
/// are stored on the returned dataset.
inline SpatialDataset detrend_polynomial(const SpatialDataset& data, int coordinate,
                                         int degree) {
  if (degree < 0 || degree > 5) throw std::invalid_argument("detrend_polynomial: degree in [0,5]");
  if (coordinate < 0 || coordinate >= data.dim)
    throw std::invalid_argument("detrend_polynomial: bad coordinate");
  const int n = static_cast<int>(data.size());
  if (n <= degree + 1) throw std::invalid_argument("detrend_polynomial: not enough data");

  // center/scale the coordinate for conditioning
  double lo = data.locations[0](coordinate), hi = lo;
  for (const auto& p : data.locations) {
    lo = std::min(lo, p(coordinate));
    hi = std::max(hi, p(coordinate));
  }
  const double mid = 0.5 * (lo + hi), half = std::max(0.5 * (hi - lo), 1e-12);

  Mat x(n, degree + 1);
  Vec z(n);
  for (int i = 0; i < n; ++i) {
    const double t = (data.locations[i](coordinate) - mid) / half;
    double p = 1.0;
    for (int k = 0; k <= degree; ++k) {
      x(i, k) = p;
      p *= t;
    }
    z(i) = data.values[i];
  }
  Eigen::ColPivHouseholderQR<Mat> qr(x);
  if (qr.rank() < degree + 1)
    throw std::runtime_error("detrend_polynomial: rank-deficient design");
  Vec coef = qr.solve(z);
  Vec fit = x * coef;

  SpatialDataset out = data;
  out.trend = std::vector<double>(n);
  out.residuals = std::vector<double>(n);
  for (int i = 0; i < n; ++i) {
    (*out.trend)[i] = fit(i);
    (*out.residuals)[i] = data.values[i] - fit(i);
  }
  return out;
}

/// Matheron directional variogram estimator; pairs enter a bin when their
/// separation angle to +-direction is within angle_tol and the distance
/// falls in the half-open bin [k*w, (k+1)*w).
inline EmpiricalVariogram empirical_variogram(const SpatialDataset& data, const Vec& direction,
                                              double angle_tol, double lag_width,
                                              double max_lag) {
  if (data.size() == 0) throw std::invalid_argument("empirical_variogram: empty dataset");
  if (!(lag_width > 0.0)) throw std::invalid_argument("empirical_variogram: lag_width > 0");
  const auto& z = data.working_values();
  const Vec u = direction / direction.norm();
  const int nbins = static_cast<int>(std::ceil(max_lag / lag_width));

  EmpiricalVariogram v;
  v.direction = u;
  v.angle_tolerance = angle_tol;
  v.lag_centers.resize(nbins);
  v.semivariances.assign(nbins, std::numeric_limits<double>::quiet_NaN());
  v.pair_counts.assign(nbins, 0);
  std::vector<double> acc(nbins, 0.0);
  for (int b = 0; b < nbins; ++b) v.lag_centers[b] = (b + 0.5) * lag_width;

  const double cos_tol = std::cos(angle_tol);
  const int n = static_cast<int>(data.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const Vec h = data.locations[j] - data.locations[i];
      const double r = h.norm();
      if (r <= 0.0 || r >= max_lag) continue;
      if (std::abs(h.dot(u)) / r < cos_tol) continue;
      const int b = static_cast<int>(r / lag_width);
      if (b >= nbins) continue;
      const double dz = z[i] - z[j];
      acc[b] += 0.5 * dz * dz;
      ++v.pair_counts[b];
    }
  for (int b = 0; b < nbins; ++b)
    if (v.pair_counts[b] > 0) v.semivariances[b] = acc[b] / v.pair_counts[b];
  return v;
}

/// gamma(h) = C(0) - C(h); may exceed C(0) where the model has a hole.
inline double model_variogram(const CovarianceModel& model, const Vec& h) {
  return model.eval(Vec::Zero(model.dim())) - model.eval(h);
}

inline void save_variogram_csv(const EmpiricalVariogram& v, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_variogram_csv: cannot open " + path);
  out.precision(17);
  out << "lag_center,semivariance,count\n";
  for (std::size_t b = 0; b < v.lag_centers.size(); ++b) {
    out << v.lag_centers[b] << ",";
    if (v.pair_counts[b] > 0)
      out << v.semivariances[b];
    out << "," << v.pair_counts[b] << "\n";
  }
}

}  // namespace spatcov
