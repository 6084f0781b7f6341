#include "shapetrack/gp_ett.hpp"

#include <cmath>

#include "shapetrack/geometry.hpp"

namespace shapetrack::gp {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

}  // namespace

void GpHyper::validate() const {
    if (!(sigma_f > 0) || !(length_scale > 0) || !(sigma_r >= 0) ||
        !(sigma_noise > 0) || !(forgetting_rate >= 0)) {
        throw InvalidConfig("GP hyperparameters out of range");
    }
}

double covariance(double theta, double theta_prime, const GpHyper& hyper) {
    const double s = std::sin(std::abs(theta - theta_prime) / 2.0);
    const double l2 = hyper.length_scale * hyper.length_scale;
    return hyper.sigma_f * hyper.sigma_f * std::exp(-2.0 * s * s / l2) +
           hyper.sigma_r * hyper.sigma_r;
}

double covariance_dtheta(double theta, double theta_prime, const GpHyper& hyper) {
    // d/dd [sigma_f^2 exp(-2 sin^2(d/2) / l^2)] = -k_se * sin(d) / l^2, d = theta - theta'.
    const double d = theta - theta_prime;
    const double s = std::sin(d / 2.0);
    const double l2 = hyper.length_scale * hyper.length_scale;
    const double k_se = hyper.sigma_f * hyper.sigma_f * std::exp(-2.0 * s * s / l2);
    return -k_se * std::sin(d) / l2;
}

Eigen::VectorXd even_basis(int n) {
    if (n < 1) throw InvalidConfig("basis size must be positive");
    Eigen::VectorXd angles(n);
    for (int j = 0; j < n; ++j) angles(j) = kTwoPi * j / n;
    return angles;
}

Eigen::MatrixXd gram(const Eigen::VectorXd& angles, const GpHyper& hyper) {
    hyper.validate();
    const int n = static_cast<int>(angles.size());
    if (n < 1) throw InvalidConfig("empty basis");
    Eigen::MatrixXd k(n, n);
    for (int i = 0; i < n; ++i) {
        k(i, i) = covariance(angles(i), angles(i), hyper);
        for (int j = i + 1; j < n; ++j) {
            k(i, j) = covariance(angles(i), angles(j), hyper);
            k(j, i) = k(i, j);
        }
    }
    const double jitter =
        1e-9 * (hyper.sigma_f * hyper.sigma_f + hyper.sigma_r * hyper.sigma_r);
    k.diagonal().array() += jitter;
    return k;
}

BasisModel::BasisModel(Eigen::VectorXd basis_angles, const GpHyper& hyper)
    : basis_(std::move(basis_angles)), hyper_(hyper), gram_(gram(basis_, hyper_)) {
    llt_.compute(gram_);
    if (llt_.info() != Eigen::Success) {
        throw SingularGram("gram matrix is not positive definite");
    }
}

Projection BasisModel::project(double theta) const {
    const int n = size();
    Eigen::VectorXd k_star(n);
    for (int j = 0; j < n; ++j) k_star(j) = covariance(theta, basis_(j), hyper_);
    const Eigen::VectorXd alpha = llt_.solve(k_star);
    Projection p;
    p.weights = alpha.transpose();
    p.residual_var =
        std::max(0.0, covariance(theta, theta, hyper_) - k_star.dot(alpha));
    return p;
}

Eigen::RowVectorXd BasisModel::project_derivative(double theta) const {
    const int n = size();
    Eigen::VectorXd dk(n);
    for (int j = 0; j < n; ++j) dk(j) = covariance_dtheta(theta, basis_(j), hyper_);
    return llt_.solve(dk).transpose();
}

Projection gp_projection(double theta, const Eigen::VectorXd& basis_angles,
                         const GpHyper& hyper) {
    return BasisModel(basis_angles, hyper).project(theta);
}

Contour TrackState::contour() const {
    const int n = contour_dim();
    Contour c;
    c.basis_angles = basis_angles;
    c.radii_mean = mean.tail(n);
    c.radii_cov = cov.bottomRightCorner(n, n);
    return c;
}

TrackState predict(const TrackState& state, double dt, const BasisModel& model,
                   const ProcessNoise& process) {
    if (dt < 0) throw InvalidConfig("negative dt");
    const int n = model.size();
    const int dim = TrackState::kKinDim + n;
    if (state.mean.size() != dim) throw DimensionMismatch("state/basis size mismatch");

    const double a = std::exp(-model.hyper().forgetting_rate * dt);

    TrackState out = state;
    out.time_index = state.time_index + 1;
    out.mean(0) += dt * state.mean(2);
    out.mean(1) += dt * state.mean(3);
    out.mean.tail(n) *= a;  // prior mean is zero, so forgetting is a pure decay

    // P' = F P F^T with F = blkdiag([I dt*I; 0 I], 1, a*I), applied structurally:
    // first the kinematic shear on rows (original P), then on columns, then the
    // contour scaling which distributes over both.
    Eigen::MatrixXd p = state.cov;
    p.row(0) += dt * state.cov.row(2);
    p.row(1) += dt * state.cov.row(3);
    p.col(0) += dt * p.col(2);
    p.col(1) += dt * p.col(3);
    p.bottomRows(n) *= a;
    p.rightCols(n) *= a;

    // Process noise: white acceleration on the velocity states (with the
    // matching position coupling), orientation random walk, and the
    // forgetting-balanced contour term (1 - a^2) K(u,u).
    const double q_a = process.accel_noise_std * process.accel_noise_std;
    const double dt2 = dt * dt;
    const double q_pos = q_a * dt2 * dt2 / 4.0;
    const double q_pv = q_a * dt2 * dt / 2.0;
    const double q_vel = q_a * dt2;
    p(0, 0) += q_pos;
    p(1, 1) += q_pos;
    p(2, 2) += q_vel;
    p(3, 3) += q_vel;
    p(0, 2) += q_pv;
    p(2, 0) += q_pv;
    p(1, 3) += q_pv;
    p(3, 1) += q_pv;
    p(4, 4) += process.orient_walk_std * process.orient_walk_std;
    p.bottomRightCorner(n, n) += (1.0 - a * a) * model.prior_cov();

    out.cov = std::move(p);
    return out;
}

MeasurementModel measurement_model(const TrackState& state, const geom::Point2& z,
                                   const BasisModel& model) {
    const int n = model.size();
    const int dim = TrackState::kKinDim + n;
    if (state.mean.size() != dim) throw DimensionMismatch("state/basis size mismatch");

    const double dx = z.x - state.mean(0);
    const double dy = z.y - state.mean(1);
    const double d2 = dx * dx + dy * dy;
    // A point on top of the estimated center carries no usable bearing.
    if (d2 < 1e-18) throw DegenerateInput("measurement coincides with the center estimate");

    const double theta_g = std::atan2(dy, dx);       // global bearing
    const double theta_b = theta_g - state.mean(4);  // body-frame angle
    const Projection proj = model.project(theta_b);
    const Eigen::RowVectorXd dproj = model.project_derivative(theta_b);

    const Eigen::VectorXd c = state.mean.tail(n);
    const double r_hat = proj.weights.dot(c);
    const double dr_dtheta = dproj.dot(c);

    const double ct = std::cos(theta_g);
    const double st = std::sin(theta_g);
    const Eigen::Vector2d p_dir(ct, st);
    const Eigen::Vector2d p_perp(-st, ct);  // d p / d theta_g

    MeasurementModel out;
    out.predicted(0) = state.mean(0) + ct * r_hat;
    out.predicted(1) = state.mean(1) + st * r_hat;

    // theta_g depends on the center: d theta_g / d center = (dy, -dx) / |d|^2.
    const Eigen::RowVector2d g(dy / d2, -dx / d2);
    const Eigen::Vector2d dir_term = p_perp * r_hat + p_dir * dr_dtheta;

    out.jacobian.setZero(2, dim);
    out.jacobian.block<2, 2>(0, 0) = Eigen::Matrix2d::Identity() + dir_term * g;
    out.jacobian.col(4) = -p_dir * dr_dtheta;  // theta_b = theta_g - psi
    out.jacobian.rightCols(n) = p_dir * proj.weights;

    const double noise_var = model.hyper().sigma_noise * model.hyper().sigma_noise;
    out.noise_cov = noise_var * Eigen::Matrix2d::Identity();
    out.noise_cov += proj.residual_var * (p_dir * p_dir.transpose());
    return out;
}

TrackState update(const TrackState& state, const sim::Scan& scan, const BasisModel& model) {
    const int n = model.size();
    const int dim = TrackState::kKinDim + n;
    if (state.mean.size() != dim) throw DimensionMismatch("state/basis size mismatch");

    TrackState out = state;
    for (const auto& z : scan.measurements) {
        const double dx = z.x - out.mean(0);
        const double dy = z.y - out.mean(1);
        if (dx * dx + dy * dy < 1e-18) continue;

        const MeasurementModel mm = measurement_model(out, z, model);

        const Eigen::Matrix<double, Eigen::Dynamic, 2> ph = out.cov * mm.jacobian.transpose();
        Eigen::Matrix2d s = mm.jacobian * ph;
        s += mm.noise_cov;

        const Eigen::Matrix<double, Eigen::Dynamic, 2> gain = ph * s.inverse();

        Eigen::Vector2d innov(z.x - mm.predicted(0), z.y - mm.predicted(1));
        out.mean += gain * innov;
        out.cov -= gain * ph.transpose();
        out.cov = ((out.cov + out.cov.transpose()) * 0.5).eval();
    }
    return out;
}

TrackState initial_state(const sim::Scenario& scenario, const BasisModel& model,
                         const InitConfig& init) {
    const int n = model.size();
    const int dim = TrackState::kKinDim + n;

    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    bool found = false;
    for (const auto& scan : scenario.scans) {
        if (scan.measurements.empty()) continue;
        for (const auto& z : scan.measurements) {
            centroid.x() += z.x;
            centroid.y() += z.y;
        }
        centroid /= static_cast<double>(scan.measurements.size());
        found = true;
        break;
    }
    if (!found) throw DegenerateInput("scenario has no measurements");

    TrackState s;
    s.basis_angles = model.basis();
    s.time_index = 0;
    s.mean = Eigen::VectorXd::Zero(dim);
    s.mean.head<2>() = centroid;
    s.cov = Eigen::MatrixXd::Zero(dim, dim);
    s.cov(0, 0) = s.cov(1, 1) = init.pos_std * init.pos_std;
    s.cov(2, 2) = s.cov(3, 3) = init.vel_std * init.vel_std;
    s.cov(4, 4) = init.orient_std * init.orient_std;
    s.cov.bottomRightCorner(n, n) = model.prior_cov();
    return s;
}

std::vector<TrackState> track(const sim::Scenario& scenario, const TrackerConfig& config) {
    config.hyper.validate();
    const BasisModel model(even_basis(config.n_basis), config.hyper);
    TrackState state = initial_state(scenario, model, config.init);

    std::vector<TrackState> states;
    states.reserve(scenario.scans.size());
    for (std::size_t k = 0; k < scenario.scans.size(); ++k) {
        if (k > 0) state = predict(state, scenario.dt, model, config.process);
        state.time_index = static_cast<int>(k);
        state = update(state, scenario.scans[k], model);
        states.push_back(state);
    }
    return states;
}

}  // namespace shapetrack::gp
