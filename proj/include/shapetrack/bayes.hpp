#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "shapetrack/errors.hpp"
#include "shapetrack/features.hpp"

namespace shapetrack::bayes {

/// Per-class Gaussian feature model with empirical priors.
struct ClassStats {
    std::vector<Eigen::VectorXd> means;
    std::vector<Eigen::MatrixXd> covs;  // regularized, SPD
    Eigen::VectorXd priors;             // positive, sums to 1
    double regularization = 0.0;        // scale actually added to each diagonal
    bool use_feature_cov = true;        // marginalize feature uncertainty when given

    int n_classes() const { return static_cast<int>(means.size()); }
    int dim() const { return means.empty() ? 0 : static_cast<int>(means.front().size()); }
    void validate() const;
};

/// Sample mean and unbiased covariance per class, regularized by adding
/// 1e-8 * trace(cov)/dim to the diagonal; priors are class frequencies.
/// Features are columns of `features`. Each class needs at least dim+1
/// samples, otherwise InsufficientSamples.
ClassStats fit(const Eigen::MatrixXd& features, const std::vector<int>& labels,
               int n_classes = 4);

/// Posterior class probabilities for a plain feature vector, evaluated in
/// the log domain with log-sum-exp normalization.
Eigen::VectorXd posterior(const ClassStats& stats, const Eigen::VectorXd& f);

/// Posterior for an uncertain feature vector: each class likelihood becomes
/// N(mean; mu_i, cov_i + feature_cov) when use_feature_cov is set,
/// otherwise the feature covariance is ignored.
Eigen::VectorXd posterior(const ClassStats& stats, const feat::FeatureDistribution& f);

/// Argmax of the posterior; ties resolve to the lowest class index.
std::pair<int, Eigen::VectorXd> classify(const ClassStats& stats, const Eigen::VectorXd& f);
std::pair<int, Eigen::VectorXd> classify(const ClassStats& stats,
                                         const feat::FeatureDistribution& f);

}  // namespace shapetrack::bayes
