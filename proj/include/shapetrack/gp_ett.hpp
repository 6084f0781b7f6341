#pragma once

#include <Eigen/Dense>
#include <vector>

#include "shapetrack/errors.hpp"
#include "shapetrack/simulator.hpp"

namespace shapetrack::gp {

/// Hyperparameters of the periodic radial-function GP and the recursive
/// state-space form built on top of it.
struct GpHyper {
    double sigma_f = 1.5;            // prior std of the radial function, m
    double length_scale = M_PI / 8;  // angular length scale
    double sigma_r = 0.8;            // uncertainty of the (zero) mean, m
    double sigma_noise = 0.02;       // measurement noise std, m
    double forgetting_rate = 0.001;  // 1/s, exponential forgetting toward the prior

    void validate() const;
};

/// Periodic squared-exponential covariance:
///   k(t, t') = sigma_f^2 * exp(-2 sin^2(|t - t'| / 2) / l^2) + sigma_r^2
/// Stationary, 2pi-periodic, non-increasing in |t - t'| on [0, pi].
double covariance(double theta, double theta_prime, const GpHyper& hyper);

/// d k(theta, theta') / d theta.
double covariance_dtheta(double theta, double theta_prime, const GpHyper& hyper);

/// N angles evenly spaced over [0, 2pi), starting at 0.
Eigen::VectorXd even_basis(int n);

/// Pairwise covariance matrix with a diagonal jitter of
/// 1e-9 * (sigma_f^2 + sigma_r^2) for factorization.
Eigen::MatrixXd gram(const Eigen::VectorXd& angles, const GpHyper& hyper);

struct Projection {
    Eigen::RowVectorXd weights;  // H_f: radial estimate at theta = weights * c
    double residual_var = 0.0;   // R_f >= 0
};

/// GP basis with a cached Cholesky factor; all per-angle projections reuse it.
class BasisModel {
public:
    BasisModel(Eigen::VectorXd basis_angles, const GpHyper& hyper);

    const Eigen::VectorXd& basis() const { return basis_; }
    const GpHyper& hyper() const { return hyper_; }
    int size() const { return static_cast<int>(basis_.size()); }

    /// Prior covariance of the radial values at the basis angles (the gram
    /// matrix including jitter). Doubles as the initial contour covariance.
    const Eigen::MatrixXd& prior_cov() const { return gram_; }

    /// H_f(theta) = k(theta, u) K(u,u)^-1 and the residual variance
    /// R_f(theta) = k(theta,theta) - k(theta,u) K^-1 k(u,theta), clamped >= 0.
    Projection project(double theta) const;

    /// d H_f / d theta, for the measurement Jacobian.
    Eigen::RowVectorXd project_derivative(double theta) const;

private:
    Eigen::VectorXd basis_;
    GpHyper hyper_;
    Eigen::MatrixXd gram_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
};

/// Convenience one-shot projection (builds a BasisModel internally).
Projection gp_projection(double theta, const Eigen::VectorXd& basis_angles,
                         const GpHyper& hyper);

/// Radial-function estimate at the basis angles.
struct Contour {
    Eigen::VectorXd basis_angles;
    Eigen::VectorXd radii_mean;
    Eigen::MatrixXd radii_cov;
};

/// Joint kinematic + contour state. Kinematics occupy the first five slots
/// of the mean: [cx, cy, vx, vy, psi]; the remaining N entries are the
/// radial values at the basis angles.
struct TrackState {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    Eigen::VectorXd basis_angles;
    int time_index = 0;

    static constexpr int kKinDim = 5;

    int contour_dim() const { return static_cast<int>(mean.size()) - kKinDim; }
    Eigen::Vector2d center() const { return mean.head<2>(); }
    Eigen::Vector2d velocity() const { return mean.segment<2>(2); }
    double orientation() const { return mean(4); }
    Eigen::VectorXd radii() const { return mean.tail(contour_dim()); }
    Contour contour() const;
};

struct ProcessNoise {
    double accel_noise_std = 0.1;   // m/s^2
    double orient_walk_std = 0.01;  // rad per step
};

struct InitConfig {
    double pos_std = 0.5;  // m
    double vel_std = 1.0;  // m/s
    // Initial orientation is unknown modulo the prior; pi/sqrt(3) is the
    // moment-matched std of a uniform angle on [0, 2pi).
    double orient_std = 1.8137993642342178;  // rad
};

struct TrackerConfig {
    GpHyper hyper;
    int n_basis = 50;
    ProcessNoise process;
    InitConfig init;
};

/// Time update: constant-velocity kinematics with an orientation random
/// walk; the contour decays toward the prior mean with
/// F_c = exp(-lambda dt) I and Q_c = (1 - exp(-2 lambda dt)) K(u,u).
TrackState predict(const TrackState& state, double dt, const BasisModel& model,
                   const ProcessNoise& process);

/// Linearized measurement model for one point: predicted contour point,
/// Jacobian over the joint state and the effective noise covariance
/// R = sigma_noise^2 I + R_f p p^T. Throws DegenerateInput for a point on
/// top of the estimated center (no usable bearing).
struct MeasurementModel {
    Eigen::Vector2d predicted;
    Eigen::MatrixXd jacobian;   // 2 x (5 + N)
    Eigen::Matrix2d noise_cov;
};

MeasurementModel measurement_model(const TrackState& state, const geom::Point2& z,
                                   const BasisModel& model);

/// Measurement update, processing the scan's points sequentially. Each point
/// is associated with the body-frame angle implied by the current center and
/// orientation estimates; the EKF Jacobian carries that dependence through
/// the chain rule. The joint covariance is symmetrized after every point.
TrackState update(const TrackState& state, const sim::Scan& scan, const BasisModel& model);

/// Initial state for a scenario: center at the centroid of the first
/// non-empty scan, zero velocity and orientation, contour prior N(0, K(u,u)).
TrackState initial_state(const sim::Scenario& scenario, const BasisModel& model,
                         const InitConfig& init);

/// Full predict/update pass over all scans of a scenario.
std::vector<TrackState> track(const sim::Scenario& scenario, const TrackerConfig& config);

}  // namespace shapetrack::gp
