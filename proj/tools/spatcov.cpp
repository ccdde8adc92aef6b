// spatcov: batch CLI for covariance model checking, grid evaluation,
// fitting, kriging, cross-validation and simulation.
//
// Exit codes: 0 success (check: PROVED), 1 input/parse error,
// 2 numerical failure (check: FAILED), 3 check: UNCHECKED.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spatcov/field.hpp"
#include "spatcov/inference.hpp"
#include "spatcov/kriging.hpp"
#include "spatcov/model_spec.hpp"
#include "spatcov/transforms.hpp"

namespace {

using namespace spatcov;
using nlohmann::json;

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return json::parse(in);
}

void write_provenance(std::ofstream& out, const json& config) {
  out << "# config: " << config.dump() << "\n";
}

std::vector<Vec> grid_points(double x0, double x1, int nx, double y0, double y1, int ny) {
  if (nx < 2 || ny < 2) throw std::runtime_error("grid resolution must be >= 2 per axis");
  std::vector<Vec> pts;
  pts.reserve(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      Vec p(2);
      p << x0 + (x1 - x0) * i / (nx - 1), y0 + (y1 - y0) * j / (ny - 1);
      pts.push_back(p);
    }
  return pts;
}

SpatialDataset load_data(const json& cfg) {
  SpatialDataset ds = load_csv(cfg.at("data").get<std::string>(), cfg.value("x_col", "x"),
                               cfg.value("y_col", "y"), cfg.value("value_col", "value"));
  if (cfg.contains("detrend")) {
    const auto& d = cfg.at("detrend");
    ds = detrend_polynomial(ds, d.value("coordinate", 0), d.value("degree", 1));
  } else {
    ds.residuals = ds.values;  // treat values as zero-mean residuals
  }
  return ds;
}

int cmd_check(const std::string& model_path) {
  json j;
  ModelPtr model;
  try {
    j = load_json(model_path);
    model = parse_model(j);
  } catch (const std::exception& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 1;
  }
  const auto& cert = model->certificate();
  std::cout << "certificate: " << to_string(cert.status) << "\n";
  if (std::isfinite(cert.lhs) || std::isfinite(cert.rhs))
    std::cout << "bound: lhs=" << cert.lhs << " rhs=" << cert.rhs << "\n";
  std::cout << "detail: " << cert.detail << "\n";
  // family trait flags when a single family is present
  if (j.contains("family")) {
    const int dim = j.value("dim", 2);
    auto fam = parse_family(j.at("family"), dim);
    auto tr = family_traits(fam, dim);
    std::cout << "traits: twice_differentiable_at_origin=" << tr.twice_differentiable_at_origin
              << " spectral_density_nonincreasing=" << tr.spectral_density_nonincreasing
              << " has_spectral_density=" << tr.has_spectral_density
              << " valid_in_dim=" << tr.valid_in_dim << "\n";
  }
  switch (cert.status) {
    case Validity::proved: return 0;
    case Validity::failed: return 2;
    case Validity::unchecked: return 3;
  }
  return 3;
}

int cmd_grid(const std::string& model_path, double extent, int res, bool normalize,
             const std::string& output, bool allow_unproved) {
  ModelPtr model = load_model(model_path);
  if (normalize) model = CovarianceModel::normalized(model);
  if (!allow_unproved && !model->certificate().proved()) {
    std::cerr << "model certificate is " << to_string(model->certificate().status)
              << "; pass --force to evaluate anyway\n";
    return 2;
  }
  std::ofstream out(output);
  if (!out) throw std::runtime_error("cannot open " + output);
  out.precision(17);
  json cfg = {{"subcommand", "grid"}, {"model", model_path}, {"extent", extent},
              {"resolution", res},    {"normalize", normalize}};
  write_provenance(out, cfg);
  out << "h1,h2,C\n";
  for (int j = 0; j < res; ++j)
    for (int i = 0; i < res; ++i) {
      Vec h(2);
      h << -extent + 2.0 * extent * i / (res - 1), -extent + 2.0 * extent * j / (res - 1);
      out << h(0) << "," << h(1) << "," << model->eval(h) << "\n";
    }
  return 0;
}

int cmd_fit(const json& cfg, const std::string& output) {
  SpatialDataset ds = load_data(cfg);
  const std::string tmpl_name = cfg.at("template").get<std::string>();
  FitTemplate tmpl = make_fit_template(tmpl_name, cfg.value("template_options", json::object()));

  ParameterVector init = tmpl.defaults;
  auto set_from = [&](const std::string& key, Vec& target) {
    if (!cfg.contains(key)) return;
    for (int i = 0; i < init.size(); ++i)
      if (cfg.at(key).contains(init.names[i]))
        target(i) = cfg.at(key).at(init.names[i]).get<double>();
  };
  set_from("init", init.values);
  set_from("lower", init.lower);
  set_from("upper", init.upper);

  const int budget = cfg.value("budget", 2000);
  const std::string objective = cfg.value("objective", "cl");
  FitResult res;
  if (objective == "cl") {
    double radius = cfg.value("pair_radius", 0.0);
    if (radius <= 0.0) {
      // default: one third of the domain diameter
      double dmax = 0.0;
      for (std::size_t i = 0; i < ds.size(); ++i)
        for (std::size_t j = i + 1; j < ds.size(); ++j)
          dmax = std::max(dmax, (ds.locations[i] - ds.locations[j]).norm());
      radius = dmax / 3.0;
    }
    res = fit_cl(tmpl.builder, init, ds, radius, budget);
  } else if (objective == "wls") {
    std::vector<EmpiricalVariogram> vgs;
    for (const auto& v : cfg.at("variograms")) {
      Vec dir = parse_vector(v.at("direction"));
      const double tol = v.value("angle_tol_deg", 22.5) * M_PI / 180.0;
      vgs.push_back(empirical_variogram(ds, dir, tol, v.at("lag_width").get<double>(),
                                        v.at("max_lag").get<double>()));
    }
    res = fit_wls(tmpl.builder, init, vgs, budget);
  } else {
    throw std::runtime_error("unknown objective '" + objective + "'");
  }

  json out_j = {{"template", tmpl_name},
                {"objective", objective},
                {"objective_value", res.objective_value},
                {"iterations", res.iterations},
                {"converged", res.converged},
                {"validity", to_string(res.validity.status)},
                {"config", cfg}};
  json params = json::object();
  for (int i = 0; i < res.estimate.size(); ++i)
    params[res.estimate.names[i]] = res.estimate.values(i);
  out_j["estimate"] = params;
  std::ofstream out(output);
  if (!out) throw std::runtime_error("cannot open " + output);
  out << out_j.dump(2) << "\n";
  std::cout << out_j.dump(2) << "\n";
  if (!res.converged) {
    std::cerr << "warning: optimizer did not converge within budget\n";
    return 2;
  }
  return 0;
}

ModelPtr model_from_config(const json& cfg) {
  if (cfg.contains("model_file")) return load_model(cfg.at("model_file").get<std::string>());
  return parse_model(cfg.at("model"));
}

int cmd_krige(const json& cfg, const std::string& output) {
  ModelPtr model = model_from_config(cfg);
  SpatialDataset ds = load_data(cfg);
  std::vector<Vec> queries;
  const auto& q = cfg.at("queries");
  if (q.contains("grid")) {
    const auto& g = q.at("grid");
    queries = grid_points(g.at("x0"), g.at("x1"), g.at("nx"), g.at("y0"), g.at("y1"),
                          g.at("ny"));
  } else {
    SpatialDataset qd = load_csv(q.at("file").get<std::string>(), cfg.value("x_col", "x"),
                                 cfg.value("y_col", "y"), cfg.value("value_col", "value"));
    queries = qd.locations;
  }
  auto res = simple_krige(*model, ds, queries, cfg.value("force", false));
  std::ofstream out(output);
  if (!out) throw std::runtime_error("cannot open " + output);
  out.precision(17);
  write_provenance(out, cfg);
  out << "x,y,prediction,variance\n";
  for (std::size_t i = 0; i < queries.size(); ++i)
    out << queries[i](0) << "," << queries[i](1) << "," << res.predictions[i] << ","
        << res.variances[i] << "\n";
  return 0;
}

int cmd_cv(const json& cfg, const std::string& output) {
  ModelPtr model = model_from_config(cfg);
  SpatialDataset ds = load_data(cfg);
  std::vector<int> holdout;
  if (cfg.contains("holdout_indices")) {
    holdout = cfg.at("holdout_indices").get<std::vector<int>>();
  } else {
    const double frac = cfg.value("holdout_fraction", 0.1);
    const std::uint64_t seed = cfg.value("seed", 0);
    const int n = static_cast<int>(ds.size());
    const int k = static_cast<int>(frac * n);
    Xoshiro256pp rng(seed);
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.next() % (i + 1));
      std::swap(idx[i], idx[j]);
    }
    holdout.assign(idx.begin(), idx.begin() + k);
  }
  if (holdout.empty()) {
    std::cerr << "empty holdout\n";
    return 1;
  }
  auto rep = split_sample_validate(*model, ds, holdout, cfg.value("force", false));
  std::ofstream out(output);
  if (!out) throw std::runtime_error("cannot open " + output);
  write_provenance(out, cfg);
  out << "rmse: " << rep.rmse << "\n";
  out << "mae: " << rep.mae << "\n";
  out << "n_holdout: " << rep.n_holdout << "\n";
  std::cout << "rmse: " << rep.rmse << "\nmae: " << rep.mae << "\n";
  return 0;
}

int cmd_simulate(const json& cfg, const std::string& output) {
  ModelPtr model = model_from_config(cfg);
  const auto& g = cfg.at("grid");
  auto pts = grid_points(g.at("x0"), g.at("x1"), g.at("nx"), g.at("y0"), g.at("y1"),
                         g.at("ny"));
  const std::uint64_t seed = cfg.value("seed", 0);
  auto vals = simulate_gaussian(*model, pts, seed, cfg.value("force", false));
  std::ofstream out(output);
  if (!out) throw std::runtime_error("cannot open " + output);
  out.precision(17);
  write_provenance(out, cfg);
  out << "x,y,value\n";
  for (std::size_t i = 0; i < pts.size(); ++i)
    out << pts[i](0) << "," << pts[i](1) << "," << vals[i] << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spatcov: anisotropic hole-effect covariance models"};
  app.require_subcommand(1);

  std::string model_path, config_path, output = "out.csv";
  double extent = 10.0;
  int res = 201;
  bool normalize = false, force = false;
  std::optional<std::uint64_t> seed_override;
  int threads = 1;
  app.add_option("--threads", threads, "thread count (reserved)");

  auto* check = app.add_subcommand("check", "validity-check a model spec");
  check->add_option("--config", model_path, "model spec JSON")->required();

  auto* grid = app.add_subcommand("grid", "evaluate C(h) on a centered square lattice");
  grid->add_option("--config", model_path, "model spec JSON")->required();
  grid->add_option("--extent", extent, "half-width of the square domain");
  grid->add_option("--resolution", res, "points per axis (>= 2)");
  grid->add_flag("--normalize", normalize, "rescale to a correlation function");
  grid->add_flag("--force", force, "evaluate even without a PROVED certificate");
  grid->add_option("--output", output, "output CSV");

  auto* fit = app.add_subcommand("fit", "fit a model template by CL or WLS");
  fit->add_option("--config", config_path, "fit configuration JSON")->required();
  fit->add_option("--output", output, "output JSON");

  auto* krige = app.add_subcommand("krige", "simple kriging predictions");
  krige->add_option("--config", config_path, "kriging configuration JSON")->required();
  krige->add_option("--output", output, "output CSV");

  auto* cv = app.add_subcommand("cv", "split-sample cross-validation");
  cv->add_option("--config", config_path, "cv configuration JSON")->required();
  cv->add_option("--output", output, "output file");

  auto* sim = app.add_subcommand("simulate", "seeded Gaussian simulation on a grid");
  sim->add_option("--config", config_path, "simulation configuration JSON")->required();
  sim->add_option("--seed", seed_override, "override the config seed");
  sim->add_option("--output", output, "output CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) return cmd_check(model_path);
    if (grid->parsed()) return cmd_grid(model_path, extent, res, normalize, output, force);

    json cfg;
    try {
      cfg = load_json(config_path);
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 1;
    }
    if (seed_override) cfg["seed"] = *seed_override;
    if (fit->parsed()) return cmd_fit(cfg, output);
    if (krige->parsed()) return cmd_krige(cfg, output);
    if (cv->parsed()) return cmd_cv(cfg, output);
    if (sim->parsed()) return cmd_simulate(cfg, output);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
