#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "shapetrack/errors.hpp"

namespace shapetrack::nn {

/// Feedforward network: tanh hidden layers, softmax output, z-score input
/// normalization baked into the model. The identity/no-softmax switches
/// exist for linear fixtures; production models keep the defaults.
struct NNModel {
    std::vector<int> layer_sizes;           // e.g. {6, 16, 8, 4}
    std::vector<Eigen::MatrixXd> weights;   // weights[l] maps layer l -> l+1, (out x in)
    std::vector<Eigen::VectorXd> biases;
    Eigen::VectorXd norm_shift;             // per input dimension
    Eigen::VectorXd norm_scale;             // per input dimension, > 0
    bool tanh_hidden = true;
    bool softmax_output = true;

    int input_dim() const { return layer_sizes.front(); }
    int output_dim() const { return layer_sizes.back(); }
    int num_layers() const { return static_cast<int>(weights.size()); }
    int param_count() const;

    /// Flat parameter vector: per layer, weight matrix row-major then bias.
    Eigen::VectorXd pack_params() const;
    void unpack_params(const Eigen::VectorXd& params);

    void validate() const;  // throws InvalidConfig / DimensionMismatch
};

struct TrainConfig {
    int max_epochs = 500;
    int patience = 20;
    double lm_damping_init = 1e-3;
    double lm_damping_up = 10.0;
    double lm_damping_down = 0.1;
    double lm_damping_max = 1e12;
    int lm_max_retries = 10;
    std::uint64_t rng_seed = 0;

    void validate() const;
};

struct TrainReport {
    std::vector<double> train_loss;
    std::vector<double> val_loss;
    std::vector<double> val_accuracy;
    int best_epoch = -1;  // 0-based index into the per-epoch arrays
    std::string stop_reason;
};

/// Seeded Glorot-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases,
/// identity input normalization.
NNModel make_model(const std::vector<int>& layer_sizes, std::uint64_t seed);

/// Class probabilities for one input (normalization applied inside).
Eigen::VectorXd forward(const NNModel& model, const Eigen::VectorXd& x);

/// Batched forward; samples are columns.
Eigen::MatrixXd forward_batch(const NNModel& model, const Eigen::MatrixXd& inputs);

/// Mean over samples of ||y - f(x)||^2.
double loss(const NNModel& model, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets);

/// Residuals r = y - f stacked sample-major, and the Jacobian d r / d params
/// with one row per residual entry (layout matches pack_params).
std::pair<Eigen::VectorXd, Eigen::MatrixXd> residual_jacobian(const NNModel& model,
                                                              const Eigen::MatrixXd& inputs,
                                                              const Eigen::MatrixXd& targets);

/// Same quantities with the Jacobian stored transposed (params x residuals);
/// this is the layout the normal equations consume.
void residual_jacobian_t(const NNModel& model, const Eigen::MatrixXd& inputs,
                         const Eigen::MatrixXd& targets, Eigen::VectorXd& residuals,
                         Eigen::MatrixXd& jacobian_t);

struct LmResult {
    NNModel model;
    double damping = 0.0;
    double loss = 0.0;
    bool accepted = false;
    int retries = 0;
};

/// One full-batch Levenberg-Marquardt epoch: damped normal-equation steps,
/// accepted only on training-loss decrease, damping scaled down on accept
/// and up on reject with bounded retries. Throws SingularNormalEquations
/// once the damping exceeds its ceiling.
LmResult lm_epoch(const NNModel& model, const Eigen::MatrixXd& inputs,
                  const Eigen::MatrixXd& targets, double damping,
                  const TrainConfig& config = {});

/// Full training run with accuracy-based early stopping (patience epochs
/// without validation-accuracy improvement); returns the parameters of the
/// best-validation epoch, earliest on ties.
std::pair<NNModel, TrainReport> train(const std::vector<int>& layer_sizes,
                                      const Eigen::MatrixXd& train_inputs,
                                      const std::vector<int>& train_labels,
                                      const Eigen::MatrixXd& val_inputs,
                                      const std::vector<int>& val_labels,
                                      const TrainConfig& config = {});

/// Argmax of forward; ties resolve to the lowest class index.
std::pair<int, Eigen::VectorXd> classify(const NNModel& model, const Eigen::VectorXd& x);

Eigen::MatrixXd one_hot(const std::vector<int>& labels, int n_classes);

double accuracy(const NNModel& model, const Eigen::MatrixXd& inputs,
                const std::vector<int>& labels);

}  // namespace shapetrack::nn
