// shrinklab command-line front end: figure-style risk curves, density
// slices, single-shot estimation, and minimaxity diagnostics.  Batch only;
// all randomness flows from --seed through counter-based substreams, so
// identical invocations produce byte-identical outputs.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "shrinklab/marginal.hpp"
#include "shrinklab/mean_estimators.hpp"
#include "shrinklab/model.hpp"
#include "shrinklab/predictive.hpp"
#include "shrinklab/regression.hpp"
#include "shrinklab/risk.hpp"
#include "shrinklab/rng.hpp"
#include "shrinklab/serialization.hpp"
#include "shrinklab/util.hpp"

using nlohmann::json;
using namespace shrinklab;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(s);
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

std::vector<double> parse_grid(const std::string& spec) {
  // "a:b:step" or "v1,v2,..."
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    const auto parts = split(spec, ':');
    if (parts.size() != 3)
      throw std::invalid_argument("grid spec must be start:stop:step");
    const double a = std::stod(parts[0]);
    const double b = std::stod(parts[1]);
    const double h = std::stod(parts[2]);
    if (!(h > 0.0) || b < a)
      throw std::invalid_argument("grid spec must satisfy stop >= start, step > 0");
    for (double c = a; c <= b + 1e-12 * std::max(1.0, std::abs(b)); c += h)
      out.push_back(c);
    return out;
  }
  for (const auto& tok : split(spec, ',')) out.push_back(std::stod(tok));
  if (out.empty()) throw std::invalid_argument("empty grid");
  return out;
}

VectorXd parse_vector(const std::string& spec) {
  const auto toks = split(spec, ',');
  if (toks.empty()) throw std::invalid_argument("empty vector");
  VectorXd v(toks.size());
  for (std::size_t i = 0; i < toks.size(); ++i) v[i] = std::stod(toks[i]);
  return v;
}

// targets: origin | <c>ones | span-ones | [v1;v2;...]
Subspace parse_target(const std::string& spec, int p) {
  if (spec == "origin") return Subspace::point(VectorXd::Zero(p));
  if (spec == "span-ones") return Subspace::span_of_ones(p);
  if (!spec.empty() && spec.front() == '[' && spec.back() == ']') {
    const auto toks = split(spec.substr(1, spec.size() - 2), ';');
    VectorXd b(toks.size());
    for (std::size_t i = 0; i < toks.size(); ++i) b[i] = std::stod(toks[i]);
    if (b.size() != p)
      throw std::invalid_argument("target vector length must equal p");
    return Subspace::point(b);
  }
  const auto pos = spec.find("ones");
  if (pos != std::string::npos && pos + 4 == spec.size()) {
    const double c = pos == 0 ? 1.0 : std::stod(spec.substr(0, pos));
    return Subspace::point(VectorXd::Constant(p, c));
  }
  throw std::invalid_argument("unknown shrinkage target '" + spec + "'");
}

// simple priors: uniform | harmonic | normal=NU | strawderman=A[/V0]
Prior parse_simple_prior(const std::string& spec, double default_v0) {
  if (spec == "uniform") return Prior::uniform();
  if (spec == "harmonic") return Prior::harmonic();
  if (spec.rfind("normal=", 0) == 0)
    return Prior::normal(std::stod(spec.substr(7)));
  if (spec.rfind("strawderman=", 0) == 0) {
    const auto body = spec.substr(12);
    const auto parts = split(body, '/');
    const double a = std::stod(parts[0]);
    const double v0 = parts.size() > 1 ? std::stod(parts[1]) : default_v0;
    return Prior::strawderman(a, v0);
  }
  throw std::invalid_argument("unknown prior '" + spec + "'");
}

// full grammar: SIMPLE[@TARGET] | mixture:SIMPLE@TARGET:W,SIMPLE@TARGET:W,...
Prior parse_prior(const std::string& spec, int p, double default_v0) {
  if (spec.rfind("mixture:", 0) == 0) {
    std::vector<double> weights;
    std::vector<Prior> components;
    for (const auto& comp : split(spec.substr(8), ',')) {
      const auto at = comp.find('@');
      const auto colon = comp.rfind(':');
      if (at == std::string::npos || colon == std::string::npos || colon < at)
        throw std::invalid_argument(
            "mixture component must look like base@target:weight");
      const Prior base = parse_simple_prior(comp.substr(0, at), default_v0);
      const Subspace target =
          parse_target(comp.substr(at + 1, colon - at - 1), p);
      weights.push_back(std::stod(comp.substr(colon + 1)));
      components.push_back(Prior::recentered(base, target));
    }
    return Prior::mixture(std::move(weights), std::move(components));
  }
  const auto at = spec.find('@');
  if (at == std::string::npos) return parse_simple_prior(spec, default_v0);
  return Prior::recentered(parse_simple_prior(spec.substr(0, at), default_v0),
                           parse_target(spec.substr(at + 1), p));
}

MeanEstimator parse_mean_estimator(const std::string& spec, int p,
                                   double default_v0) {
  if (spec == "mle") return MeanEstimator::mle();
  if (spec == "js" || spec == "js+")
    return MeanEstimator::james_stein(Subspace::point(VectorXd::Zero(p)),
                                      spec == "js+");
  if (spec.rfind("js@", 0) == 0)
    return MeanEstimator::james_stein(parse_target(spec.substr(3), p), false);
  if (spec.rfind("js+@", 0) == 0)
    return MeanEstimator::james_stein(parse_target(spec.substr(4), p), true);
  if (spec.rfind("bayes:", 0) == 0) {
    const Prior prior = parse_prior(spec.substr(6), p, default_v0);
    return MeanEstimator::bayes(prior);
  }
  if (spec.rfind("ms:", 0) == 0) {
    const Prior prior = parse_prior(spec.substr(3), p, default_v0);
    if (!prior.is<MixturePrior>())
      throw std::invalid_argument("ms: requires a mixture prior");
    return MeanEstimator::multiple_shrinkage(prior.as<MixturePrior>());
  }
  throw std::invalid_argument("unknown mean estimator '" + spec + "'");
}

PredictiveEstimator parse_predictive(const std::string& spec, int p,
                                     double default_v0) {
  if (spec == "uniform") return PredictiveEstimator::uniform();
  if (spec == "eb")
    return PredictiveEstimator::empirical_bayes(static_cast<double>(p - 2));
  if (spec.rfind("eb=", 0) == 0)
    return PredictiveEstimator::empirical_bayes(std::stod(spec.substr(3)));
  if (spec.rfind("oracle:[", 0) == 0 && spec.back() == ']') {
    const auto toks = split(spec.substr(8, spec.size() - 9), ';');
    VectorXd mu(toks.size());
    for (std::size_t i = 0; i < toks.size(); ++i) mu[i] = std::stod(toks[i]);
    return PredictiveEstimator::oracle(mu);
  }
  if (spec.rfind("bayes:", 0) == 0)
    return PredictiveEstimator::bayes(parse_prior(spec.substr(6), p, default_v0));
  if (spec.rfind("ms:", 0) == 0) {
    const Prior prior = parse_prior(spec.substr(3), p, default_v0);
    if (!prior.is<MixturePrior>())
      throw std::invalid_argument("ms: requires a mixture prior");
    return PredictiveEstimator::multiple_shrinkage(prior.as<MixturePrior>());
  }
  throw std::invalid_argument("unknown predictive estimator '" + spec + "'");
}

struct GlobalOpts {
  std::uint64_t seed = 0;
  long reps = 100000;
  int threads = 0;
  std::string out = "-";
  std::string format = "csv";
  bool json_errors = false;
  std::string dump_config;
  std::string config;
};

void add_global(CLI::App* cmd, GlobalOpts& g) {
  cmd->add_option("--seed", g.seed, "master seed for all substreams");
  cmd->add_option("--reps", g.reps, "Monte-Carlo replicates per grid point");
  cmd->add_option("--threads", g.threads,
                  "worker threads (0 = available parallelism)");
  cmd->add_option("--out", g.out, "output file ('-' = stdout)");
  cmd->add_option("--format", g.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_flag("--json-errors", g.json_errors,
                "machine-readable errors on stderr");
  cmd->add_option("--dump-config", g.dump_config,
                  "write the resolved run configuration to a JSON file");
  cmd->add_option("--config", g.config,
                  "load a configuration produced by --dump-config");
}

void write_output(const GlobalOpts& g, const std::string& payload) {
  if (g.out == "-") {
    std::cout << payload;
    return;
  }
  std::ofstream out(g.out, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file " + g.out);
  out << payload;
}

json global_to_json(const GlobalOpts& g) {
  return json{{"seed", g.seed},     {"reps", g.reps},
              {"threads", g.threads}, {"out", g.out},
              {"format", g.format}};
}

void global_from_json(const json& j, GlobalOpts& g) {
  g.seed = j.at("seed").get<std::uint64_t>();
  g.reps = j.at("reps").get<long>();
  g.threads = j.at("threads").get<int>();
  g.out = j.at("out").get<std::string>();
  g.format = j.at("format").get<std::string>();
}

void check_config_keys(const json& j,
                       std::initializer_list<const char*> keys) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : keys)
      if (item.key() == k) known = true;
    if (!known)
      throw std::invalid_argument("config: unknown key '" + item.key() + "'");
  }
  for (const char* k : keys)
    if (!j.contains(k))
      throw std::invalid_argument("config: missing key '" + std::string(k) + "'");
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  json j;
  in >> j;
  return j;
}

void maybe_dump_config(const GlobalOpts& g, const json& cfg) {
  if (g.dump_config.empty()) return;
  std::ofstream out(g.dump_config, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + g.dump_config);
  out << cfg.dump(2) << "\n";
}

// ---------------------------------------------------------------- risk-curve

struct RiskCurveOpts {
  GlobalOpts g;
  std::vector<std::string> priors = {"harmonic"};
  std::string dims = "3,5,7,9";
  double vx = 1.0, vy = 0.2, v0 = -1.0;
  std::string ray = "ones";
  std::string c_spec = "0:4:0.5";
};

json risk_curve_config(const RiskCurveOpts& o) {
  json j = global_to_json(o.g);
  j["command"] = "risk-curve";
  j["priors"] = o.priors;
  j["p"] = o.dims;
  j["vx"] = o.vx;
  j["vy"] = o.vy;
  j["v0"] = o.v0;
  j["ray"] = o.ray;
  j["c"] = o.c_spec;
  return j;
}

void risk_curve_from_config(const json& j, RiskCurveOpts& o) {
  check_config_keys(j, {"command", "priors", "p", "vx", "vy", "v0", "ray", "c",
                        "seed", "reps", "threads", "out", "format"});
  if (j.at("command") != "risk-curve")
    throw std::invalid_argument("config: wrong command for risk-curve");
  global_from_json(j, o.g);
  o.priors = j.at("priors").get<std::vector<std::string>>();
  o.dims = j.at("p").get<std::string>();
  o.vx = j.at("vx").get<double>();
  o.vy = j.at("vy").get<double>();
  o.v0 = j.at("v0").get<double>();
  o.ray = j.at("ray").get<std::string>();
  o.c_spec = j.at("c").get<std::string>();
}

std::string rows_to_csv(const std::vector<RiskCurveRow>& rows) {
  std::string out = "c,p,estimator,gap,se,replicates,seed\n";
  for (const auto& r : rows) {
    out += fmt(r.c) + "," + std::to_string(r.p) + "," + r.estimator + "," +
           fmt(r.gap) + "," + fmt(r.std_error) + "," +
           std::to_string(r.replicates) + "," + std::to_string(r.seed) + "\n";
  }
  return out;
}

json rows_to_json(const std::vector<RiskCurveRow>& rows) {
  json out = json::array();
  for (const auto& r : rows)
    out.push_back(json{{"c", r.c},
                       {"p", r.p},
                       {"estimator", r.estimator},
                       {"gap", r.gap},
                       {"se", r.std_error},
                       {"replicates", r.replicates},
                       {"seed", r.seed}});
  return out;
}

int run_risk_curve(RiskCurveOpts& o) {
  if (!o.g.config.empty()) risk_curve_from_config(load_config_file(o.g.config), o);
  maybe_dump_config(o.g, risk_curve_config(o));

  RiskCurveConfig config;
  config.v_x = o.vx;
  config.v_y = o.vy;
  for (const auto& tok : split(o.dims, ',')) config.dims.push_back(std::stoi(tok));
  if (config.dims.empty()) throw std::invalid_argument("empty dimension list");
  config.c_grid = parse_grid(o.c_spec);
  if (o.ray == "ones")
    config.ray = RayDirection::Ones;
  else if (o.ray == "e1")
    config.ray = RayDirection::FirstAxis;
  else
    throw std::invalid_argument("--ray must be ones or e1");
  config.replicates = o.g.reps;
  config.seed = o.g.seed;
  config.threads = o.g.threads;

  // parse priors per dimension; labels must agree across p, so the prior
  // grammar is resolved against each p separately
  std::vector<RiskCurveRow> rows;
  const double v0 = o.v0 > 0.0 ? o.v0 : o.vx;
  for (int p : config.dims) {
    RiskCurveConfig per = config;
    per.dims = {p};
    per.priors.clear();
    for (const auto& spec : o.priors)
      per.priors.push_back(parse_prior(spec, p, v0));
    auto part = risk_curve(per);
    rows.insert(rows.end(), part.begin(), part.end());
  }

  write_output(o.g, o.g.format == "csv" ? rows_to_csv(rows)
                                        : rows_to_json(rows).dump(2) + "\n");
  double min_gap = std::numeric_limits<double>::infinity(), max_se = 0.0;
  for (const auto& r : rows) {
    min_gap = std::min(min_gap, r.gap);
    max_se = std::max(max_se, r.std_error);
  }
  if (o.g.out != "-")
    std::cout << "rows=" << rows.size() << " min_gap=" << min_gap
              << " max_se=" << max_se << "\n";
  return 0;
}

// ------------------------------------------------------------- density-slice

struct DensitySliceOpts {
  GlobalOpts g;
  std::string prior = "harmonic";
  int p = 5;
  double vx = 1.0, vy = 0.2, v0 = -1.0;
  std::vector<std::string> xs = {"2,0,0,0,0"};
  std::string y1 = "-1:5:0.1";
  std::string y2 = "-1.5:1.5:0.1";
};

json density_slice_config(const DensitySliceOpts& o) {
  json j = global_to_json(o.g);
  j["command"] = "density-slice";
  j["prior"] = o.prior;
  j["p"] = o.p;
  j["vx"] = o.vx;
  j["vy"] = o.vy;
  j["v0"] = o.v0;
  j["x"] = o.xs;
  j["y1"] = o.y1;
  j["y2"] = o.y2;
  return j;
}

void density_slice_from_config(const json& j, DensitySliceOpts& o) {
  check_config_keys(j, {"command", "prior", "p", "vx", "vy", "v0", "x", "y1",
                        "y2", "seed", "reps", "threads", "out", "format"});
  if (j.at("command") != "density-slice")
    throw std::invalid_argument("config: wrong command for density-slice");
  global_from_json(j, o.g);
  o.prior = j.at("prior").get<std::string>();
  o.p = j.at("p").get<int>();
  o.vx = j.at("vx").get<double>();
  o.vy = j.at("vy").get<double>();
  o.v0 = j.at("v0").get<double>();
  o.xs = j.at("x").get<std::vector<std::string>>();
  o.y1 = j.at("y1").get<std::string>();
  o.y2 = j.at("y2").get<std::string>();
}

int run_density_slice(DensitySliceOpts& o) {
  if (!o.g.config.empty())
    density_slice_from_config(load_config_file(o.g.config), o);
  maybe_dump_config(o.g, density_slice_config(o));

  DensitySliceConfig config{ModelConfig(o.p, o.vx, o.vy),
                            parse_prior(o.prior, o.p, o.v0 > 0 ? o.v0 : o.vx),
                            {},
                            parse_grid(o.y1),
                            parse_grid(o.y2)};
  for (const auto& xs : o.xs) {
    const VectorXd x = parse_vector(xs);
    config.x_points.push_back(x);
  }
  const auto rows = density_slice(config);

  if (o.g.format == "csv") {
    std::string out = "panel,y1,y2,p_uniform,p_prior\n";
    for (const auto& r : rows)
      out += std::to_string(r.panel) + "," + fmt(r.y1) + "," + fmt(r.y2) + "," +
             fmt(r.pdf_uniform) + "," + fmt(r.pdf_prior) + "\n";
    write_output(o.g, out);
  } else {
    json out = json::array();
    for (const auto& r : rows)
      out.push_back(json{{"panel", r.panel},
                         {"y1", r.y1},
                         {"y2", r.y2},
                         {"p_uniform", r.pdf_uniform},
                         {"p_prior", r.pdf_prior}});
    write_output(o.g, out.dump(2) + "\n");
  }
  if (o.g.out != "-") std::cout << "rows=" << rows.size() << "\n";
  return 0;
}

// ------------------------------------------------------------------ estimate

struct EstimateOpts {
  GlobalOpts g;
  std::string mean;
  std::string density;
  std::string x;
  double v = 1.0;
  double vx = 1.0, vy = 0.2, v0 = -1.0;
  std::vector<std::string> ys;
};

json estimate_config(const EstimateOpts& o) {
  json j = global_to_json(o.g);
  j["command"] = "estimate";
  j["mean"] = o.mean;
  j["density"] = o.density;
  j["x"] = o.x;
  j["v"] = o.v;
  j["vx"] = o.vx;
  j["vy"] = o.vy;
  j["v0"] = o.v0;
  j["y"] = o.ys;
  return j;
}

void estimate_from_config(const json& j, EstimateOpts& o) {
  check_config_keys(j, {"command", "mean", "density", "x", "v", "vx", "vy",
                        "v0", "y", "seed", "reps", "threads", "out", "format"});
  if (j.at("command") != "estimate")
    throw std::invalid_argument("config: wrong command for estimate");
  global_from_json(j, o.g);
  o.mean = j.at("mean").get<std::string>();
  o.density = j.at("density").get<std::string>();
  o.x = j.at("x").get<std::string>();
  o.v = j.at("v").get<double>();
  o.vx = j.at("vx").get<double>();
  o.vy = j.at("vy").get<double>();
  o.v0 = j.at("v0").get<double>();
  o.ys = j.at("y").get<std::vector<std::string>>();
}

int run_estimate(EstimateOpts& o) {
  if (!o.g.config.empty()) estimate_from_config(load_config_file(o.g.config), o);
  maybe_dump_config(o.g, estimate_config(o));

  if (o.mean.empty() == o.density.empty())
    throw std::invalid_argument("estimate: give exactly one of --mean/--density");
  const VectorXd x = parse_vector(o.x);
  const int p = static_cast<int>(x.size());
  const double v0 = o.v0 > 0 ? o.v0 : (o.mean.empty() ? o.vx : o.v);

  if (!o.mean.empty()) {
    const MeanEstimator est = parse_mean_estimator(o.mean, p, v0);
    bool at_target = false;
    const VectorXd value = estimate_mean(est, x, o.v, &at_target);
    json out{{"estimator", mean_estimator_label(est)},
             {"v", o.v},
             {"at_target", at_target}};
    json arr = json::array();
    for (int i = 0; i < p; ++i) arr.push_back(value[i]);
    out["estimate"] = arr;
    write_output(o.g, out.dump(2) + "\n");
    return 0;
  }

  const ModelConfig model(p, o.vx, o.vy);
  const PredictiveEstimator est = parse_predictive(o.density, p, v0);
  const PredictiveDensity density(est, model, x);
  if (o.ys.empty())
    throw std::invalid_argument("estimate --density requires at least one --y");
  std::string header;
  for (int i = 0; i < p; ++i) header += "y" + std::to_string(i + 1) + ",";
  std::string out = header + "logpdf\n";
  for (const auto& ys : o.ys) {
    const VectorXd y = parse_vector(ys);
    std::string row;
    for (int i = 0; i < p; ++i) row += fmt(y[i]) + ",";
    out += row + fmt(density.logpdf(y)) + "\n";
  }
  write_output(o.g, out);
  return 0;
}

// ------------------------------------------------------------------ diagnose

struct DiagnoseOpts {
  GlobalOpts g;
  std::string prior = "harmonic";
  int p = 5;
  double vx = 1.0, vy = 0.2, v0 = -1.0;
  int points = 64;
  double radius = 10.0;
  int v_nodes = 9;
  double tol = 1e-9;
  bool identity = false;
  std::string a_csv, b_csv;
};

json diagnose_config(const DiagnoseOpts& o) {
  json j = global_to_json(o.g);
  j["command"] = "diagnose";
  j["prior"] = o.prior;
  j["p"] = o.p;
  j["vx"] = o.vx;
  j["vy"] = o.vy;
  j["v0"] = o.v0;
  j["points"] = o.points;
  j["radius"] = o.radius;
  j["v_nodes"] = o.v_nodes;
  j["tol"] = o.tol;
  j["identity"] = o.identity;
  j["A"] = o.a_csv;
  j["B"] = o.b_csv;
  return j;
}

void diagnose_from_config(const json& j, DiagnoseOpts& o) {
  check_config_keys(j, {"command", "prior", "p", "vx", "vy", "v0", "points",
                        "radius", "v_nodes", "tol", "identity", "A", "B",
                        "seed", "reps", "threads", "out", "format"});
  if (j.at("command") != "diagnose")
    throw std::invalid_argument("config: wrong command for diagnose");
  global_from_json(j, o.g);
  o.prior = j.at("prior").get<std::string>();
  o.p = j.at("p").get<int>();
  o.vx = j.at("vx").get<double>();
  o.vy = j.at("vy").get<double>();
  o.v0 = j.at("v0").get<double>();
  o.points = j.at("points").get<int>();
  o.radius = j.at("radius").get<double>();
  o.v_nodes = j.at("v_nodes").get<int>();
  o.tol = j.at("tol").get<double>();
  o.identity = j.at("identity").get<bool>();
  o.a_csv = j.at("A").get<std::string>();
  o.b_csv = j.at("B").get<std::string>();
}

json condition_to_json(const ConditionReport& c) {
  json witness = json::array();
  for (Eigen::Index i = 0; i < c.witness.size(); ++i)
    witness.push_back(c.witness[i]);
  return json{{"pass", c.pass},
              {"worst", c.worst},
              {"witness", witness},
              {"witness_v", c.witness_v}};
}

int run_diagnose(DiagnoseOpts& o) {
  if (!o.g.config.empty()) diagnose_from_config(load_config_file(o.g.config), o);
  maybe_dump_config(o.g, diagnose_config(o));
  json report;

  if (!o.a_csv.empty() || !o.b_csv.empty()) {
    // regression mode: rotation residuals + trace conditions
    if (o.a_csv.empty() || o.b_csv.empty())
      throw std::invalid_argument("diagnose: both --A and --B are required");
    const LinearModel model(load_matrix_csv(o.a_csv), load_matrix_csv(o.b_csv));
    const auto& rot = model.rotation();
    const double res_a = (model.sigma_a() - rot.w * rot.w.transpose()).norm() /
                         model.sigma_a().norm();
    const double res_c =
        (model.sigma_c() - rot.w * rot.d.asDiagonal() * rot.w.transpose())
            .norm() /
        model.sigma_c().norm();
    RngStream rng(o.g.seed);
    std::vector<VectorXd> points;
    for (int i = 0; i < o.points; ++i) {
      VectorXd z = rng.normal_vec(model.p());
      z *= (0.2 + (o.radius - 0.2) * i / std::max(1, o.points - 1)) / z.norm();
      points.push_back(z);
    }
    std::vector<double> w_grid;
    for (int i = 0; i < o.v_nodes; ++i)
      w_grid.push_back(static_cast<double>(i) / (o.v_nodes - 1));
    const Prior prior = parse_prior(o.prior, model.p(), o.v0 > 0 ? o.v0 : 1.0);
    const auto trace = trace_condition_check(prior, model, points, w_grid, o.tol);
    report["command"] = "diagnose";
    report["mode"] = "regression";
    report["prior"] = prior_label(prior);
    report["rotation"] = json{{"residual_sigma_a", res_a},
                              {"residual_sigma_c", res_c},
                              {"degenerate", rot.degenerate}};
    report["condition_trace_m"] = condition_to_json(trace.condition_m);
    report["condition_trace_sqrt_m"] = condition_to_json(trace.condition_sqrt_m);
    write_output(o.g, report.dump(2) + "\n");
    return 0;
  }

  const ModelConfig model(o.p, o.vx, o.vy);
  const Prior prior = parse_prior(o.prior, o.p, o.v0 > 0 ? o.v0 : o.vx);
  RngStream rng(o.g.seed);
  std::vector<VectorXd> points;
  for (int i = 0; i < o.points; ++i) {
    VectorXd z = rng.normal_vec(o.p);
    z *= (0.2 + (o.radius - 0.2) * i / std::max(1, o.points - 1)) / z.norm();
    points.push_back(z);
  }
  const auto scan = minimaxity_scan(prior, model, points, o.v_nodes, o.tol);
  report["command"] = "diagnose";
  report["mode"] = "mean";
  report["prior"] = prior_label(prior);
  report["model"] = to_json(model);
  report["condition_i_superharmonic_m"] = condition_to_json(scan.condition_m);
  report["condition_ii_superharmonic_sqrt_m"] =
      condition_to_json(scan.condition_sqrt_m);

  // heat-equation residual over an inner sample of the scan points
  double worst_heat = 0.0;
  if (!prior.is<UniformPrior>()) {
    for (int i = 0; i < std::min<int>(o.points, 24); ++i) {
      const VectorXd& z = points[i];
      for (int j = 0; j < 3; ++j) {
        const double v =
            model.v_w() + (model.v_x - model.v_w()) * j / 2.0;
        const double h = 3e-6 * v;
        const double l0 = marginal_log_density(prior, z, v);
        const double fd =
            (std::exp(marginal_log_density(prior, z, v + h) - l0) -
             std::exp(marginal_log_density(prior, z, v - h) - l0)) /
            (2.0 * h);
        const auto eval = marginal_eval(prior, z, v);
        worst_heat =
            std::max(worst_heat, std::abs(fd - 0.5 * eval.laplacian_m_over_m));
      }
    }
  }
  report["heat_equation"] =
      json{{"max_abs_residual", worst_heat}, {"pass", worst_heat <= 1e-5}};

  if (o.identity) {
    json identities = json::array();
    for (double c : {0.0, 1.0, 2.0}) {
      const VectorXd mu = VectorXd::Constant(o.p, c);
      const auto chk =
          risk_identity_check(prior, model, mu, 32, o.g.reps, o.g.seed);
      const double se = std::hypot(chk.lhs.std_error, chk.rhs.std_error);
      identities.push_back(json{{"c", c},
                                {"lhs", chk.lhs.mean},
                                {"rhs", chk.rhs.mean},
                                {"lhs_se", chk.lhs.std_error},
                                {"rhs_se", chk.rhs.std_error},
                                {"pass", std::abs(chk.lhs.mean - chk.rhs.mean) <=
                                             3.0 * se}});
    }
    report["risk_identity"] = identities;
  }

  write_output(o.g, report.dump(2) + "\n");
  return 0;
}

// ------------------------------------------------------------- regress-curve

struct RegressCurveOpts {
  GlobalOpts g;
  std::string a_csv, b_csv;
  std::vector<std::string> priors = {"harmonic"};
  std::string direction = "ones";
  std::string c_spec = "-3:3:0.5";
  double v0 = 1.0;
};

json regress_curve_config(const RegressCurveOpts& o) {
  json j = global_to_json(o.g);
  j["command"] = "regress-curve";
  j["A"] = o.a_csv;
  j["B"] = o.b_csv;
  j["priors"] = o.priors;
  j["direction"] = o.direction;
  j["c"] = o.c_spec;
  j["v0"] = o.v0;
  return j;
}

void regress_curve_from_config(const json& j, RegressCurveOpts& o) {
  check_config_keys(j, {"command", "A", "B", "priors", "direction", "c", "v0",
                        "seed", "reps", "threads", "out", "format"});
  if (j.at("command") != "regress-curve")
    throw std::invalid_argument("config: wrong command for regress-curve");
  global_from_json(j, o.g);
  o.a_csv = j.at("A").get<std::string>();
  o.b_csv = j.at("B").get<std::string>();
  o.priors = j.at("priors").get<std::vector<std::string>>();
  o.direction = j.at("direction").get<std::string>();
  o.c_spec = j.at("c").get<std::string>();
  o.v0 = j.at("v0").get<double>();
}

int run_regress_curve(RegressCurveOpts& o) {
  if (!o.g.config.empty())
    regress_curve_from_config(load_config_file(o.g.config), o);
  maybe_dump_config(o.g, regress_curve_config(o));
  if (o.a_csv.empty() || o.b_csv.empty())
    throw std::invalid_argument("regress-curve: --A and --B are required");
  const LinearModel model(load_matrix_csv(o.a_csv), load_matrix_csv(o.b_csv));

  RegressCurveConfig config;
  for (const auto& spec : o.priors)
    config.priors.push_back(parse_prior(spec, model.p(), o.v0));
  if (o.direction == "ones")
    config.beta_direction = VectorXd::Ones(model.p());
  else if (o.direction == "e1") {
    config.beta_direction = VectorXd::Zero(model.p());
    config.beta_direction[0] = 1.0;
  } else {
    config.beta_direction = parse_vector(o.direction);
  }
  config.c_grid = parse_grid(o.c_spec);
  config.replicates = o.g.reps;
  config.seed = o.g.seed;
  config.threads = o.g.threads;

  const auto rows = regress_curve(model, config);
  write_output(o.g, o.g.format == "csv" ? rows_to_csv(rows)
                                        : rows_to_json(rows).dump(2) + "\n");
  if (o.g.out != "-") std::cout << "rows=" << rows.size() << "\n";
  return 0;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"shrinklab: shrinkage estimators and predictive-density risk lab"};
  app.require_subcommand(1);

  RiskCurveOpts rc;
  auto* rc_cmd = app.add_subcommand(
      "risk-curve", "KL risk gap vs the uniform-prior baseline along a mu-ray");
  add_global(rc_cmd, rc.g);
  rc_cmd->add_option("--prior", rc.priors, "prior specs (repeatable)");
  rc_cmd->add_option("--p", rc.dims, "comma-separated dimensions");
  rc_cmd->add_option("--vx", rc.vx, "observation variance");
  rc_cmd->add_option("--vy", rc.vy, "future-observation variance");
  rc_cmd->add_option("--v0", rc.v0, "default strawderman scale (v_x if unset)");
  rc_cmd->add_option("--ray", rc.ray, "mu direction: ones | e1");
  rc_cmd->add_option("--c", rc.c_spec, "grid start:stop:step or list");

  DensitySliceOpts ds;
  auto* ds_cmd = app.add_subcommand(
      "density-slice", "densities on the (y1, y2, 0, ...) plane per x");
  add_global(ds_cmd, ds.g);
  ds_cmd->add_option("--prior", ds.prior, "prior spec");
  ds_cmd->add_option("--p", ds.p, "dimension");
  ds_cmd->add_option("--vx", ds.vx, "observation variance");
  ds_cmd->add_option("--vy", ds.vy, "future-observation variance");
  ds_cmd->add_option("--v0", ds.v0, "default strawderman scale");
  ds_cmd->add_option("--x", ds.xs, "conditioning points (repeatable)");
  ds_cmd->add_option("--y1", ds.y1, "y1 grid start:stop:step");
  ds_cmd->add_option("--y2", ds.y2, "y2 grid start:stop:step");

  EstimateOpts es;
  auto* es_cmd =
      app.add_subcommand("estimate", "evaluate one estimator at one x");
  add_global(es_cmd, es.g);
  es_cmd->add_option("--mean", es.mean,
                     "mean estimator: mle | js[+][@target] | bayes:PRIOR | ms:...");
  es_cmd->add_option("--density", es.density,
                     "predictive estimator: uniform | bayes:PRIOR | eb[=k] | ...");
  es_cmd->add_option("--x", es.x, "observation vector v1,v2,...")->required();
  es_cmd->add_option("--v", es.v, "observation variance (mean mode)");
  es_cmd->add_option("--vx", es.vx, "observation variance (density mode)");
  es_cmd->add_option("--vy", es.vy, "future variance (density mode)");
  es_cmd->add_option("--v0", es.v0, "default strawderman scale");
  es_cmd->add_option("--y", es.ys, "evaluation points (density mode, repeatable)");

  DiagnoseOpts dg;
  auto* dg_cmd = app.add_subcommand(
      "diagnose", "minimaxity conditions, heat-equation and identity checks");
  add_global(dg_cmd, dg.g);
  dg_cmd->add_option("--prior", dg.prior, "prior spec");
  dg_cmd->add_option("--p", dg.p, "dimension");
  dg_cmd->add_option("--vx", dg.vx, "observation variance");
  dg_cmd->add_option("--vy", dg.vy, "future-observation variance");
  dg_cmd->add_option("--v0", dg.v0, "default strawderman scale");
  dg_cmd->add_option("--points", dg.points, "number of scan points");
  dg_cmd->add_option("--radius", dg.radius, "largest scan radius");
  dg_cmd->add_option("--v-nodes", dg.v_nodes, "size of the v (or w) grid");
  dg_cmd->add_option("--tol", dg.tol, "sign-condition tolerance");
  dg_cmd->add_flag("--identity", dg.identity, "also run the risk identity check");
  dg_cmd->add_option("--A", dg.a_csv, "design matrix CSV (regression mode)");
  dg_cmd->add_option("--B", dg.b_csv, "future design CSV (regression mode)");

  RegressCurveOpts rg;
  auto* rg_cmd = app.add_subcommand(
      "regress-curve", "regression KL gap vs the uniform baseline along a beta-ray");
  add_global(rg_cmd, rg.g);
  rg_cmd->add_option("--A", rg.a_csv, "design matrix CSV");
  rg_cmd->add_option("--B", rg.b_csv, "future design matrix CSV");
  rg_cmd->add_option("--prior", rg.priors, "prior specs (repeatable)");
  rg_cmd->add_option("--direction", rg.direction, "beta direction: ones | e1 | v1,v2,...");
  rg_cmd->add_option("--c", rg.c_spec, "grid start:stop:step or list");
  rg_cmd->add_option("--v0", rg.v0, "default strawderman scale");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  GlobalOpts* g = nullptr;
  try {
    if (rc_cmd->parsed()) {
      g = &rc.g;
      return run_risk_curve(rc);
    }
    if (ds_cmd->parsed()) {
      g = &ds.g;
      return run_density_slice(ds);
    }
    if (es_cmd->parsed()) {
      g = &es.g;
      return run_estimate(es);
    }
    if (dg_cmd->parsed()) {
      g = &dg.g;
      return run_diagnose(dg);
    }
    g = &rg.g;
    return run_regress_curve(rg);
  } catch (const std::invalid_argument& e) {
    if (g && g->json_errors)
      std::cerr << json{{"error", {{"type", "usage"}, {"message", e.what()}}}}
                       .dump()
                << "\n";
    else
      std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    if (g && g->json_errors)
      std::cerr << json{{"error",
                         {{"type", "numerical"}, {"message", e.what()}}}}
                       .dump()
                << "\n";
    else
      std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace

int main(int argc, char** argv) { return dispatch(argc, argv); }
