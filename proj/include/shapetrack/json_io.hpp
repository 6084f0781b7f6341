#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "shapetrack/bayes.hpp"
#include "shapetrack/gp_ett.hpp"
#include "shapetrack/nn.hpp"
#include "shapetrack/pipeline.hpp"
#include "shapetrack/simulator.hpp"

namespace shapetrack::io {

/// Model file: layer sizes, per-layer row-major weights and biases, input
/// normalization, activation switches, optional training metadata. Decimal
/// serialization is shortest-round-trip, so reload is bit-exact.
nlohmann::json model_to_json(const nn::NNModel& model,
                             const nn::TrainConfig* config = nullptr,
                             const nn::TrainReport* report = nullptr);
nn::NNModel model_from_json(const nlohmann::json& j);
void save_model(const nn::NNModel& model, const std::string& path,
                const nn::TrainConfig* config = nullptr,
                const nn::TrainReport* report = nullptr);
nn::NNModel load_model(const std::string& path);

nlohmann::json stats_to_json(const bayes::ClassStats& stats);
bayes::ClassStats stats_from_json(const nlohmann::json& j);
void save_stats(const bayes::ClassStats& stats, const std::string& path);
bayes::ClassStats load_stats(const std::string& path);

nlohmann::json scenario_to_json(const sim::Scenario& scenario);
sim::Scenario scenario_from_json(const nlohmann::json& j);

/// Contour-estimate export: per-state kinematics, radii and radii std;
/// the final state carries its full covariance.
nlohmann::json states_to_json(const std::vector<gp::TrackState>& states);

nlohmann::json report_to_json(const pipeline::EvalReport& report);

nlohmann::json train_report_to_json(const nn::TrainReport& report);

}  // namespace shapetrack::io
