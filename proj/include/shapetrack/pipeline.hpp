#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "shapetrack/bayes.hpp"
#include "shapetrack/errors.hpp"
#include "shapetrack/features.hpp"
#include "shapetrack/gp_ett.hpp"
#include "shapetrack/nn.hpp"
#include "shapetrack/simulator.hpp"

namespace shapetrack::pipeline {

/// One harvested contour estimate. Radii live at evenly spaced basis angles
/// (reconstructible from the vector length); features are stored in the
/// canonical pose (origin center, zero orientation) and must equal their
/// recomputation from the stored radii.
struct DatasetRow {
    sim::ShapeClass label = sim::ShapeClass::Circle;
    Eigen::VectorXd radii_mean;
    std::optional<Eigen::MatrixXd> radii_cov;
    feat::FeatureVector features;
    std::uint64_t scenario_seed = 0;
    int time_index = 0;
};

struct SplitSpec {
    double train = 0.64;
    double val = 0.16;
    double test = 0.20;

    void validate() const;  // positive, sum to 1
};

struct Split {
    std::vector<DatasetRow> train;
    std::vector<DatasetRow> val;
    std::vector<DatasetRow> test;
};

struct GenConfig {
    sim::SimConfig sim;
    gp::TrackerConfig tracker;
    std::vector<int> snapshot_steps = {45, 46, 47, 48, 49};
    bool early_snapshots = false;  // additionally harvest step index 4
    bool store_cov = true;
    int jobs = 1;

    std::vector<int> effective_snapshots() const;
};

struct GenStats {
    int scenarios = 0;
    int failed_rows = 0;  // snapshots lost to degenerate contours
};

/// Simulate, track and harvest until every class has exactly per_class rows.
/// Scenario RNG streams derive from (seed, class, scenario index), so the
/// result is identical for any worker count.
std::vector<DatasetRow> generate_dataset(int per_class, const GenConfig& config,
                                         std::uint64_t seed, GenStats* stats = nullptr);

/// Stratified shuffle split; per-class sizes follow the fractions by largest
/// remainder, so they are within one sample of exact.
Split split(const std::vector<DatasetRow>& rows, const SplitSpec& spec, std::uint64_t seed);

enum class InputMode { Features, Contour, FeatureDistribution };

std::string to_string(InputMode mode);
InputMode input_mode_from_string(const std::string& s);

/// Evaluation adapter: prepare() converts rows into the classifier's input
/// representation (untimed); classify_row() is the timed hot path.
class RowClassifier {
public:
    virtual ~RowClassifier() = default;
    virtual std::string id() const = 0;
    virtual InputMode mode() const = 0;
    virtual void prepare(const std::vector<DatasetRow>& rows) = 0;
    virtual int classify_row(int i) const = 0;
};

std::unique_ptr<RowClassifier> make_nn_classifier(nn::NNModel model, InputMode mode);
std::unique_ptr<RowClassifier> make_bayes_classifier(bayes::ClassStats stats, InputMode mode);

struct EvalReport {
    std::string classifier_id;
    InputMode mode = InputMode::Features;
    double accuracy = 0.0;
    std::array<std::array<int, sim::kNumClasses>, sim::kNumClasses> confusion{};  // [true][pred]
    double mean_time_s = 0.0;          // median over passes of per-object mean
    std::array<double, 3> pass_time_s{};
    int n_test = 0;
    int flagged = 0;  // rows whose classification raised an error
};

/// Accuracy, confusion and per-object latency (median of three passes over
/// the prepared inputs, monotonic clock). Timing covers classification only;
/// input preparation happens once, untimed.
EvalReport evaluate(RowClassifier& classifier, const std::vector<DatasetRow>& test_rows);

/// JSON-lines persistence; covariances go to a gzip sidecar `path + ".cov.gz"`.
void save_dataset(const std::vector<DatasetRow>& rows, const std::string& path);
std::vector<DatasetRow> load_dataset(const std::string& path);

/// Max absolute deviation between stored features and recomputation from the
/// stored radii; the self-consistency audit.
double feature_audit(const std::vector<DatasetRow>& rows);

/// Column-per-sample matrices consumed by the classifier modules.
Eigen::MatrixXd feature_matrix(const std::vector<DatasetRow>& rows);
Eigen::MatrixXd contour_matrix(const std::vector<DatasetRow>& rows);
std::vector<int> label_vector(const std::vector<DatasetRow>& rows);

}  // namespace shapetrack::pipeline
