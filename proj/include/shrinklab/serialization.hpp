#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

#include <Eigen/Core>

#include "shrinklab/mean_estimators.hpp"
#include "shrinklab/model.hpp"
#include "shrinklab/predictive.hpp"
#include "shrinklab/prior.hpp"
#include "shrinklab/regression.hpp"

namespace shrinklab {

// Canonical JSON vocabulary shared by the CLI and the test fixtures.
// Parsers reject unknown keys so configs round-trip losslessly.

nlohmann::json to_json(const ModelConfig& model);
ModelConfig model_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Subspace& subspace);
Subspace subspace_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Prior& prior);
Prior prior_from_json(const nlohmann::json& j);

nlohmann::json to_json(const MeanEstimator& est);
MeanEstimator mean_estimator_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PredictiveEstimator& est);
PredictiveEstimator predictive_estimator_from_json(const nlohmann::json& j);

nlohmann::json to_json(const LinearModel& model);
LinearModel linear_model_from_json(const nlohmann::json& j);

// Plain numeric CSV (no header), one matrix row per line.
Eigen::MatrixXd load_matrix_csv(const std::string& path);

}  // namespace shrinklab
