#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "spatcov/field.hpp"
#include "spatcov/rng.hpp"

using namespace spatcov;

namespace {

Vec v2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("/tmp/spatcov_test_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("csv load, save, round trip") {
  TempFile f("roundtrip.csv");
  {
    std::ofstream out(f.path);
    out << "x,y,value\n0,0,1.5\n1,0,-2.25\n0.5,2,0.125\n";
  }
  auto ds = load_csv(f.path, "x", "y", "value");
  CHECK(ds.size() == 3);
  CHECK(ds.values[1] == -2.25);
  CHECK(ds.locations[2](1) == 2.0);

  TempFile g("roundtrip2.csv");
  ds.values[0] = 1.0 / 3.0;
  save_csv(ds, g.path);
  auto ds2 = load_csv(g.path, "x", "y", "value");
  REQUIRE(ds2.size() == ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(ds2.values[i] == ds.values[i]);
    CHECK(ds2.locations[i] == ds.locations[i]);
  }
}

TEST_CASE("csv error reporting") {
  CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", "x", "y", "value"), std::runtime_error);

  TempFile f("badnum.csv");
  {
    std::ofstream out(f.path);
    out << "x,y,value\n0,0,1.5\n1,oops,2\n";
  }
  CHECK_THROWS_WITH_AS(load_csv(f.path, "x", "y", "value"),
                       doctest::Contains("line 3"), std::runtime_error);

  TempFile h("badcol.csv");
  {
    std::ofstream out(h.path);
    out << "a,b,c\n1,2,3\n";
  }
  CHECK_THROWS_WITH_AS(load_csv(h.path, "x", "y", "value"), doctest::Contains("'x'"),
                       std::runtime_error);

  TempFile d("dup.csv");
  {
    std::ofstream out(d.path);
    out << "x,y,value\n1,1,5\n2,2,6\n1,1,7\n";
  }
  CHECK_THROWS_WITH_AS(load_csv(d.path, "x", "y", "value"), doctest::Contains("duplicate"),
                       std::runtime_error);
}

TEST_CASE("polynomial detrending") {
  SpatialDataset ds;
  Xoshiro256pp rng(5);
  for (int i = 0; i < 60; ++i) {
    ds.locations.push_back(v2(i * 0.5, rng.uniform()));
    ds.values.push_back(4.0);
  }
  auto flat = detrend_polynomial(ds, 0, 0);
  for (double r : *flat.residuals) CHECK(std::abs(r) < 1e-12);

  // exact linear trend in x
  for (int i = 0; i < 60; ++i) ds.values[i] = 3.0 - 0.25 * ds.locations[i](0);
  auto lin = detrend_polynomial(ds, 0, 1);
  for (double r : *lin.residuals) CHECK(std::abs(r) < 1e-10);
  CHECK(lin.trend.has_value());
  for (int i = 0; i < 60; ++i)
    CHECK((*lin.trend)[i] == doctest::Approx(ds.values[i]).epsilon(1e-10));

  // trend + noise: residual mean near zero
  for (int i = 0; i < 60; ++i)
    ds.values[i] = 3.0 - 0.25 * ds.locations[i](0) + rng.normal();
  auto noisy = detrend_polynomial(ds, 0, 2);
  double mean = 0.0, sd = 0.0;
  for (double v : ds.values) mean += v;
  mean /= 60.0;
  for (double v : ds.values) sd += (v - mean) * (v - mean);
  sd = std::sqrt(sd / 59.0);
  double rmean = 0.0;
  for (double r : *noisy.residuals) rmean += r;
  rmean /= 60.0;
  CHECK(std::abs(rmean) <= 1e-10 * sd);

  CHECK_THROWS_AS(detrend_polynomial(ds, 0, 9), std::invalid_argument);
  CHECK_THROWS_AS(detrend_polynomial(ds, 5, 1), std::invalid_argument);
}

TEST_CASE("empirical variogram: two points") {
  SpatialDataset ds;
  ds.locations = {v2(0, 0), v2(1, 0)};
  ds.values = {3.0, 1.0};
  auto v = empirical_variogram(ds, v2(1, 0), 0.3, 0.5, 2.0);
  long total = 0;
  for (std::size_t b = 0; b < v.lag_centers.size(); ++b) {
    total += v.pair_counts[b];
    if (v.pair_counts[b] == 1) CHECK(v.semivariances[b] == doctest::Approx(2.0));  // (3-1)^2/2
  }
  CHECK(total == 1);
}

TEST_CASE("empirical variogram: symmetry and invariances") {
  SpatialDataset ds;
  Xoshiro256pp rng(17);
  for (int i = 0; i < 80; ++i) {
    ds.locations.push_back(v2(10.0 * rng.uniform(), 10.0 * rng.uniform()));
    ds.values.push_back(rng.normal());
  }
  auto va = empirical_variogram(ds, v2(1, 0), 0.4, 1.0, 8.0);
  auto vb = empirical_variogram(ds, v2(-1, 0), 0.4, 1.0, 8.0);
  long total = 0;
  for (std::size_t b = 0; b < va.lag_centers.size(); ++b) {
    CHECK(va.pair_counts[b] == vb.pair_counts[b]);
    if (va.pair_counts[b] > 0)
      CHECK(va.semivariances[b] == doctest::Approx(vb.semivariances[b]));
    total += va.pair_counts[b];
  }
  CHECK(total <= 80 * 79 / 2);

  // adding a constant changes nothing
  SpatialDataset shifted = ds;
  for (double& z : shifted.values) z += 100.0;
  auto vc = empirical_variogram(shifted, v2(1, 0), 0.4, 1.0, 8.0);
  for (std::size_t b = 0; b < va.lag_centers.size(); ++b)
    if (va.pair_counts[b] > 0)
      CHECK(vc.semivariances[b] == doctest::Approx(va.semivariances[b]).epsilon(1e-10));
}

TEST_CASE("white noise variogram flat at the variance") {
  SpatialDataset ds;
  Xoshiro256pp rng(23);
  for (int i = 0; i < 30; ++i)
    for (int j = 0; j < 30; ++j) {
      ds.locations.push_back(v2(i, j));
      ds.values.push_back(2.0 * rng.normal());  // variance 4
    }
  auto v = empirical_variogram(ds, v2(1, 0), 0.3, 1.0, 6.0);
  for (std::size_t b = 0; b < v.lag_centers.size(); ++b) {
    if (v.pair_counts[b] < 100) continue;
    // 3 sigma band for the Matheron estimator on iid Gaussians
    const double se = 4.0 * std::sqrt(2.0 / v.pair_counts[b]);
    CHECK(std::abs(v.semivariances[b] - 4.0) < 3.5 * se);
  }
}

TEST_CASE("model variogram") {
  auto m = CovarianceModel::t2(IsotropicFamily::matern(0.5), 0.8, 0.4, 2.0, 1.0, v2(1, 1));
  CHECK(model_variogram(*m, Vec::Zero(2)) == doctest::Approx(0.0));
  Xoshiro256pp rng(9);
  for (int i = 0; i < 50; ++i) {
    const Vec h = v2(8.0 * (rng.uniform() - 0.5), 8.0 * (rng.uniform() - 0.5));
    CHECK(model_variogram(*m, h) >= -1e-12);
  }
  // hole effect: variogram overshoots the sill along u near the first dip
  auto t3w = CovarianceModel::t3(IsotropicFamily::cardinal_sine(),
                                 IsotropicFamily::cardinal_sine(), 1.0, 0.5, 1.0, 2.0,
                                 v2(1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)));
  const double c0 = t3w->eval(Vec::Zero(2));
  double worst = 0.0;
  for (double r = 0.5; r < 12.0; r += 0.05)
    worst = std::max(worst, model_variogram(*t3w, v2(r / std::sqrt(2.0), r / std::sqrt(2.0))));
  CHECK(worst > c0);
}

TEST_CASE("variogram serialization") {
  SpatialDataset ds;
  ds.locations = {v2(0, 0), v2(1, 0), v2(2.2, 0)};
  ds.values = {1.0, 2.0, 0.0};
  auto v = empirical_variogram(ds, v2(1, 0), 0.3, 1.0, 4.0);
  TempFile f("vario.csv");
  save_variogram_csv(v, f.path);
  std::ifstream in(f.path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "lag_center,semivariance,count");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == static_cast<int>(v.lag_centers.size()));
}
