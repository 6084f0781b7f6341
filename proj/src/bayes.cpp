#include "shapetrack/bayes.hpp"

#include <cmath>

namespace shapetrack::bayes {

namespace {

double log_gaussian(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                    const Eigen::MatrixXd& cov) {
    const Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        throw NonFiniteLikelihood("class covariance not positive definite");
    }
    const Eigen::MatrixXd l = llt.matrixL();
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < l.rows(); ++i) logdet += 2.0 * std::log(l(i, i));
    const Eigen::VectorXd w = l.triangularView<Eigen::Lower>().solve(x - mean);
    const double d = static_cast<double>(x.size());
    return -0.5 * (d * std::log(2.0 * M_PI) + logdet + w.squaredNorm());
}

Eigen::VectorXd posterior_impl(const ClassStats& stats, const Eigen::VectorXd& f,
                               const Eigen::MatrixXd* feature_cov) {
    stats.validate();
    if (f.size() != stats.dim()) throw DimensionMismatch("feature dimension mismatch");
    const int m = stats.n_classes();

    Eigen::VectorXd log_post(m);
    for (int i = 0; i < m; ++i) {
        const double ll =
            feature_cov == nullptr
                ? log_gaussian(f, stats.means[i], stats.covs[i])
                : log_gaussian(f, stats.means[i],
                               Eigen::MatrixXd(stats.covs[i] + *feature_cov));
        if (std::isnan(ll)) throw NonFiniteLikelihood("log-likelihood is NaN");
        log_post(i) = ll + std::log(stats.priors(i));
    }
    const double shift = log_post.maxCoeff();
    Eigen::VectorXd p = (log_post.array() - shift).exp();
    p /= p.sum();
    return p;
}

int argmax_lowest(const Eigen::VectorXd& v) {
    int best = 0;
    for (int i = 1; i < v.size(); ++i) {
        if (v(i) > v(best)) best = i;
    }
    return best;
}

}  // namespace

void ClassStats::validate() const {
    const int m = n_classes();
    if (m < 1 || static_cast<int>(covs.size()) != m || priors.size() != m) {
        throw DimensionMismatch("inconsistent class statistics");
    }
    const int d = dim();
    for (int i = 0; i < m; ++i) {
        if (means[i].size() != d || covs[i].rows() != d || covs[i].cols() != d) {
            throw DimensionMismatch("class statistics shape mismatch");
        }
        if (!(priors(i) > 0)) throw InvalidConfig("priors must be positive");
    }
    if (std::abs(priors.sum() - 1.0) > 1e-9) throw InvalidConfig("priors must sum to 1");
}

ClassStats fit(const Eigen::MatrixXd& features, const std::vector<int>& labels,
               int n_classes) {
    const int d = static_cast<int>(features.rows());
    const Eigen::Index n = features.cols();
    if (static_cast<Eigen::Index>(labels.size()) != n) {
        throw DimensionMismatch("label count mismatch");
    }
    if (n_classes < 1) throw InvalidConfig("need at least one class");

    std::vector<std::vector<Eigen::Index>> members(n_classes);
    for (Eigen::Index s = 0; s < n; ++s) {
        const int y = labels[static_cast<std::size_t>(s)];
        if (y < 0 || y >= n_classes) throw InvalidConfig("label out of range");
        members[y].push_back(s);
    }

    ClassStats stats;
    stats.priors.resize(n_classes);
    for (int i = 0; i < n_classes; ++i) {
        const auto& idx = members[i];
        const Eigen::Index ni = static_cast<Eigen::Index>(idx.size());
        if (ni < d + 1) {
            throw InsufficientSamples("class " + std::to_string(i) + " has " +
                                      std::to_string(ni) + " samples, needs " +
                                      std::to_string(d + 1));
        }
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
        for (Eigen::Index s : idx) mean += features.col(s);
        mean /= static_cast<double>(ni);

        Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
        for (Eigen::Index s : idx) {
            const Eigen::VectorXd c = features.col(s) - mean;
            cov.selfadjointView<Eigen::Lower>().rankUpdate(c);
        }
        cov = Eigen::MatrixXd(cov.selfadjointView<Eigen::Lower>());
        cov /= static_cast<double>(ni - 1);

        const double reg = 1e-8 * cov.trace() / static_cast<double>(d);
        cov.diagonal().array() += reg;
        stats.regularization = std::max(stats.regularization, reg);

        stats.means.push_back(std::move(mean));
        stats.covs.push_back(std::move(cov));
        stats.priors(i) = static_cast<double>(ni) / static_cast<double>(n);
    }
    stats.validate();
    return stats;
}

Eigen::VectorXd posterior(const ClassStats& stats, const Eigen::VectorXd& f) {
    return posterior_impl(stats, f, nullptr);
}

Eigen::VectorXd posterior(const ClassStats& stats, const feat::FeatureDistribution& f) {
    if (!stats.use_feature_cov) return posterior_impl(stats, f.mean, nullptr);
    const Eigen::MatrixXd cov = f.cov;
    return posterior_impl(stats, f.mean, &cov);
}

std::pair<int, Eigen::VectorXd> classify(const ClassStats& stats, const Eigen::VectorXd& f) {
    Eigen::VectorXd p = posterior(stats, f);
    return {argmax_lowest(p), std::move(p)};
}

std::pair<int, Eigen::VectorXd> classify(const ClassStats& stats,
                                         const feat::FeatureDistribution& f) {
    Eigen::VectorXd p = posterior(stats, f);
    return {argmax_lowest(p), std::move(p)};
}

}  // namespace shapetrack::bayes
