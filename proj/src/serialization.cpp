#include "shrinklab/serialization.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

namespace shrinklab {

using nlohmann::json;

namespace {

void expect_keys(const json& j, std::initializer_list<const char*> keys,
                 const char* what) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : keys)
      if (item.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw std::invalid_argument(std::string(what) + ": unknown key '" +
                                  item.key() + "'");
  }
  for (const char* k : keys)
    if (!j.contains(k))
      throw std::invalid_argument(std::string(what) + ": missing key '" +
                                  std::string(k) + "'");
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from_json(const json& j, const char* what) {
  if (!j.is_array())
    throw std::invalid_argument(std::string(what) + ": expected array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, const char* what) {
  if (!j.is_array())
    throw std::invalid_argument(std::string(what) + ": expected array of rows");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = -1;
  Eigen::MatrixXd m;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array())
      throw std::invalid_argument(std::string(what) + ": expected array of rows");
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      m.resize(rows, cols);
    }
    if (static_cast<Eigen::Index>(row.size()) != cols)
      throw std::invalid_argument(std::string(what) + ": ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c)
      m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

}  // namespace

json to_json(const ModelConfig& model) {
  return json{{"p", model.p}, {"v_x", model.v_x}, {"v_y", model.v_y}};
}

ModelConfig model_from_json(const json& j) {
  expect_keys(j, {"p", "v_x", "v_y"}, "ModelConfig");
  return ModelConfig(j["p"].get<int>(), j["v_x"].get<double>(),
                     j["v_y"].get<double>());
}

json to_json(const Subspace& subspace) {
  return json{{"offset", vector_to_json(subspace.offset())},
              {"basis", matrix_to_json(subspace.basis())}};
}

Subspace subspace_from_json(const json& j) {
  expect_keys(j, {"offset", "basis"}, "Subspace");
  Eigen::VectorXd offset = vector_from_json(j["offset"], "Subspace.offset");
  Eigen::MatrixXd basis = matrix_from_json(j["basis"], "Subspace.basis");
  if (basis.size() == 0) basis.resize(offset.size(), 0);
  return Subspace(std::move(offset), std::move(basis));
}

json to_json(const Prior& prior) {
  struct Visitor {
    json operator()(const UniformPrior&) const {
      return json{{"type", "uniform"}};
    }
    json operator()(const HarmonicPrior&) const {
      return json{{"type", "harmonic"}};
    }
    json operator()(const StrawdermanPrior& s) const {
      return json{{"type", "strawderman"}, {"a", s.a}, {"v0", s.v0}};
    }
    json operator()(const NormalPrior& n) const {
      return json{{"type", "normal"}, {"nu", n.nu}};
    }
    json operator()(const RecenteredPrior& r) const {
      return json{{"type", "recentered"},
                  {"base", to_json(*r.base)},
                  {"subspace", to_json(r.subspace)}};
    }
    json operator()(const MixturePrior& m) const {
      json comps = json::array();
      for (const auto& c : m.components) comps.push_back(to_json(c));
      return json{{"type", "mixture"},
                  {"weights", m.weights},
                  {"components", std::move(comps)}};
    }
  };
  return std::visit(Visitor{}, prior.variant());
}

Prior prior_from_json(const json& j) {
  if (!j.contains("type"))
    throw std::invalid_argument("Prior: missing key 'type'");
  const std::string type = j["type"].get<std::string>();
  if (type == "uniform") {
    expect_keys(j, {"type"}, "Prior(uniform)");
    return Prior::uniform();
  }
  if (type == "harmonic") {
    expect_keys(j, {"type"}, "Prior(harmonic)");
    return Prior::harmonic();
  }
  if (type == "strawderman") {
    expect_keys(j, {"type", "a", "v0"}, "Prior(strawderman)");
    return Prior::strawderman(j["a"].get<double>(), j["v0"].get<double>());
  }
  if (type == "normal") {
    expect_keys(j, {"type", "nu"}, "Prior(normal)");
    return Prior::normal(j["nu"].get<double>());
  }
  if (type == "recentered") {
    expect_keys(j, {"type", "base", "subspace"}, "Prior(recentered)");
    return Prior::recentered(prior_from_json(j["base"]),
                             subspace_from_json(j["subspace"]));
  }
  if (type == "mixture") {
    expect_keys(j, {"type", "weights", "components"}, "Prior(mixture)");
    std::vector<Prior> comps;
    for (const auto& c : j["components"]) comps.push_back(prior_from_json(c));
    return Prior::mixture(j["weights"].get<std::vector<double>>(),
                          std::move(comps));
  }
  throw std::invalid_argument("Prior: unknown type '" + type + "'");
}

json to_json(const MeanEstimator& est) {
  struct Visitor {
    json operator()(const MleEstimator&) const { return json{{"type", "mle"}}; }
    json operator()(const JamesSteinEstimator& js) const {
      return json{{"type", "james_stein"},
                  {"center", to_json(js.center)},
                  {"positive_part", js.positive_part}};
    }
    json operator()(const BayesMeanEstimator& b) const {
      return json{{"type", "bayes"}, {"prior", to_json(b.prior)}};
    }
    json operator()(const MultipleShrinkageEstimator& m) const {
      return json{{"type", "multiple_shrinkage"},
                  {"prior", to_json(Prior(m.prior))}};
    }
  };
  return std::visit(Visitor{}, est.variant());
}

MeanEstimator mean_estimator_from_json(const json& j) {
  if (!j.contains("type"))
    throw std::invalid_argument("MeanEstimator: missing key 'type'");
  const std::string type = j["type"].get<std::string>();
  if (type == "mle") {
    expect_keys(j, {"type"}, "MeanEstimator(mle)");
    return MeanEstimator::mle();
  }
  if (type == "james_stein") {
    expect_keys(j, {"type", "center", "positive_part"},
                "MeanEstimator(james_stein)");
    return MeanEstimator::james_stein(subspace_from_json(j["center"]),
                                      j["positive_part"].get<bool>());
  }
  if (type == "bayes") {
    expect_keys(j, {"type", "prior"}, "MeanEstimator(bayes)");
    return MeanEstimator::bayes(prior_from_json(j["prior"]));
  }
  if (type == "multiple_shrinkage") {
    expect_keys(j, {"type", "prior"}, "MeanEstimator(multiple_shrinkage)");
    const Prior prior = prior_from_json(j["prior"]);
    if (!prior.is<MixturePrior>())
      throw std::invalid_argument(
          "MeanEstimator(multiple_shrinkage): prior must be a mixture");
    return MeanEstimator::multiple_shrinkage(prior.as<MixturePrior>());
  }
  throw std::invalid_argument("MeanEstimator: unknown type '" + type + "'");
}

json to_json(const PredictiveEstimator& est) {
  struct Visitor {
    json operator()(const UniformKind&) const {
      return json{{"type", "uniform"}};
    }
    json operator()(const BayesKind& b) const {
      return json{{"type", "bayes"}, {"prior", to_json(b.prior)}};
    }
    json operator()(const MultipleShrinkageKind& m) const {
      return json{{"type", "multiple_shrinkage"},
                  {"prior", to_json(Prior(m.prior))}};
    }
    json operator()(const EmpiricalBayesKind& e) const {
      return json{{"type", "empirical_bayes"}, {"k", e.k}};
    }
    json operator()(const OracleKind& o) const {
      return json{{"type", "oracle"}, {"mu", vector_to_json(o.mu)}};
    }
  };
  return std::visit(Visitor{}, est.variant());
}

PredictiveEstimator predictive_estimator_from_json(const json& j) {
  if (!j.contains("type"))
    throw std::invalid_argument("PredictiveEstimator: missing key 'type'");
  const std::string type = j["type"].get<std::string>();
  if (type == "uniform") {
    expect_keys(j, {"type"}, "PredictiveEstimator(uniform)");
    return PredictiveEstimator::uniform();
  }
  if (type == "bayes") {
    expect_keys(j, {"type", "prior"}, "PredictiveEstimator(bayes)");
    return PredictiveEstimator::bayes(prior_from_json(j["prior"]));
  }
  if (type == "multiple_shrinkage") {
    expect_keys(j, {"type", "prior"},
                "PredictiveEstimator(multiple_shrinkage)");
    const Prior prior = prior_from_json(j["prior"]);
    if (!prior.is<MixturePrior>())
      throw std::invalid_argument(
          "PredictiveEstimator(multiple_shrinkage): prior must be a mixture");
    return PredictiveEstimator::multiple_shrinkage(prior.as<MixturePrior>());
  }
  if (type == "empirical_bayes") {
    expect_keys(j, {"type", "k"}, "PredictiveEstimator(empirical_bayes)");
    return PredictiveEstimator::empirical_bayes(j["k"].get<double>());
  }
  if (type == "oracle") {
    expect_keys(j, {"type", "mu"}, "PredictiveEstimator(oracle)");
    return PredictiveEstimator::oracle(
        vector_from_json(j["mu"], "PredictiveEstimator.mu"));
  }
  throw std::invalid_argument("PredictiveEstimator: unknown type '" + type + "'");
}

json to_json(const LinearModel& model) {
  return json{{"A", matrix_to_json(model.a())}, {"B", matrix_to_json(model.b())}};
}

LinearModel linear_model_from_json(const json& j) {
  expect_keys(j, {"A", "B"}, "LinearModel");
  return LinearModel(matrix_from_json(j["A"], "LinearModel.A"),
                     matrix_from_json(j["B"], "LinearModel.B"));
}

Eigen::MatrixXd load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("load_matrix_csv: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::invalid_argument("load_matrix_csv: ragged rows in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty())
    throw std::invalid_argument("load_matrix_csv: empty file " + path);
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < rows.front().size(); ++c)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
  return m;
}

}  // namespace shrinklab
