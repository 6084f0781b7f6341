#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "oracle_helpers.hpp"
#include "shapetrack/gp_ett.hpp"
#include "shapetrack/simulator.hpp"

using namespace shapetrack;

namespace {

gp::TrackState random_state(std::mt19937_64& rng, const gp::BasisModel& model) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> ur(0.5, 2.0);
    const int n = model.size();
    gp::TrackState state;
    state.basis_angles = model.basis();
    state.mean.resize(gp::TrackState::kKinDim + n);
    state.mean << 3.0 * u(rng), 3.0 * u(rng), u(rng), u(rng), M_PI * u(rng),
        Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) { return ur(rng); });
    state.cov = Eigen::MatrixXd::Identity(state.mean.size(), state.mean.size());
    return state;
}

}  // namespace

TEST_CASE("covariance endpoints and closed forms") {
    const gp::GpHyper hyper;
    const double sill = hyper.sigma_f * hyper.sigma_f + hyper.sigma_r * hyper.sigma_r;
    CHECK(gp::covariance(0.4, 0.4, hyper) == sill);
    CHECK(gp::covariance(-2.0, -2.0, hyper) == sill);

    const double expected_pi =
        hyper.sigma_f * hyper.sigma_f *
            std::exp(-2.0 / (hyper.length_scale * hyper.length_scale)) +
        hyper.sigma_r * hyper.sigma_r;
    CHECK(gp::covariance(0.0, M_PI, hyper) == doctest::Approx(expected_pi).epsilon(1e-12));
}

TEST_CASE("covariance is 2pi-periodic, symmetric and stationary") {
    const gp::GpHyper hyper;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int i = 0; i < 10000; ++i) {
        const double a = u(rng), b = u(rng);
        const double k = gp::covariance(a, b, hyper);
        CHECK(std::abs(k - gp::covariance(a + 2.0 * M_PI, b, hyper)) < 1e-12);
        CHECK(std::abs(k - gp::covariance(b, a, hyper)) < 1e-12);
        CHECK(std::abs(k - gp::covariance(a + 0.3, b + 0.3, hyper)) < 1e-12);
    }
}

TEST_CASE("covariance is non-increasing in the angle gap on [0, pi]") {
    const gp::GpHyper hyper;
    double prev = gp::covariance(0.0, 0.0, hyper);
    for (int i = 1; i <= 500; ++i) {
        const double gap = M_PI * i / 500.0;
        const double k = gp::covariance(0.0, gap, hyper);
        CHECK(k <= prev + 1e-12);
        prev = k;
    }
}

TEST_CASE("covariance derivative matches finite differences") {
    const gp::GpHyper hyper;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 200; ++i) {
        const double a = u(rng), b = u(rng);
        const double h = 1e-6;
        const double fd =
            (gp::covariance(a + h, b, hyper) - gp::covariance(a - h, b, hyper)) / (2.0 * h);
        CHECK(gp::covariance_dtheta(a, b, hyper) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("hyperparameter invariants are enforced") {
    gp::GpHyper bad;
    bad.sigma_f = 0.0;
    CHECK_THROWS_AS(bad.validate(), InvalidConfig);
    bad = {};
    bad.length_scale = -0.1;
    CHECK_THROWS_AS(bad.validate(), InvalidConfig);
    bad = {};
    bad.forgetting_rate = -1.0;
    CHECK_THROWS_AS(bad.validate(), InvalidConfig);
}

TEST_CASE("even_basis spans [0, 2pi) uniformly from zero") {
    const Eigen::VectorXd basis = gp::even_basis(50);
    REQUIRE(basis.size() == 50);
    CHECK(basis(0) == 0.0);
    for (int i = 0; i < 50; ++i)
        CHECK(basis(i) == doctest::Approx(2.0 * M_PI * i / 50.0).epsilon(1e-15));
}

TEST_CASE("gram matrix carries the jitter and circulant structure") {
    const gp::GpHyper hyper;
    const double sill = hyper.sigma_f * hyper.sigma_f + hyper.sigma_r * hyper.sigma_r;

    Eigen::VectorXd one(1);
    one << 1.3;
    const Eigen::MatrixXd g1 = gp::gram(one, hyper);
    CHECK(g1(0, 0) == doctest::Approx(sill + 1e-9 * sill).epsilon(1e-15));

    const Eigen::VectorXd basis = gp::even_basis(16);
    const Eigen::MatrixXd g = gp::gram(basis, hyper);
    CHECK((g - g.transpose()).cwiseAbs().maxCoeff() == 0.0);
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j)
            CHECK(g(i, j) ==
                  doctest::Approx(g((i + 3) % 16, (j + 3) % 16)).epsilon(1e-12));
}

TEST_CASE("gram matrices factor for random angle sets") {
    const gp::GpHyper hyper;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd angles(12);
        for (int i = 0; i < 12; ++i) angles(i) = u(rng);
        const Eigen::MatrixXd g = gp::gram(angles, hyper);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
        CHECK(es.eigenvalues().minCoeff() > 0.0);
        CHECK(Eigen::LLT<Eigen::MatrixXd>(g).info() == Eigen::Success);
    }
}

TEST_CASE("projection interpolates at the basis angles") {
    const gp::GpHyper hyper;
    const gp::BasisModel model(gp::even_basis(16), hyper);
    const double sill = hyper.sigma_f * hyper.sigma_f + hyper.sigma_r * hyper.sigma_r;

    for (int j : {0, 3, 11}) {
        const gp::Projection proj = model.project(model.basis()(j));
        for (int i = 0; i < 16; ++i) {
            const double want = i == j ? 1.0 : 0.0;
            CHECK(proj.weights(i) == doctest::Approx(want).epsilon(1e-6).scale(1.0));
        }
        CHECK(proj.residual_var >= 0.0);
        CHECK(proj.residual_var < 1e-6 * sill);
    }
}

TEST_CASE("projection residual variance vanishes at a dense basis angle") {
    const gp::GpHyper hyper;
    const gp::BasisModel model(gp::even_basis(50), hyper);
    const double sill = hyper.sigma_f * hyper.sigma_f + hyper.sigma_r * hyper.sigma_r;
    const gp::Projection proj = model.project(model.basis()(17));
    CHECK(proj.residual_var >= 0.0);
    CHECK(proj.residual_var < 1e-4 * sill);
}

TEST_CASE("projection between basis angles stays sane") {
    const gp::GpHyper hyper;
    const gp::BasisModel model(gp::even_basis(50), hyper);
    const double mid = (model.basis()(7) + model.basis()(8)) / 2.0;
    const gp::Projection proj = model.project(mid);
    CHECK(proj.weights.allFinite());
    CHECK(proj.weights.sum() > 0.5);
    CHECK(proj.weights.sum() < 1.5);
    CHECK(proj.residual_var > 0.0);
    CHECK(proj.residual_var <= gp::covariance(mid, mid, hyper));
}

TEST_CASE("one-shot projection agrees with the cached model") {
    const gp::GpHyper hyper;
    const Eigen::VectorXd basis = gp::even_basis(24);
    const gp::BasisModel model(basis, hyper);
    for (double theta : {0.37, 2.9, -1.2}) {
        const gp::Projection a = gp::gp_projection(theta, basis, hyper);
        const gp::Projection b = model.project(theta);
        CHECK((a.weights - b.weights).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(a.residual_var == doctest::Approx(b.residual_var).epsilon(1e-12));
    }
}

TEST_CASE("projection derivative matches finite differences") {
    const gp::GpHyper hyper;
    const gp::BasisModel model(gp::even_basis(32), hyper);
    for (double theta : {0.1, 1.9, 4.4}) {
        const double h = 1e-6;
        const Eigen::RowVectorXd fd =
            (model.project(theta + h).weights - model.project(theta - h).weights) /
            (2.0 * h);
        const Eigen::RowVectorXd got = model.project_derivative(theta);
        CHECK((got - fd).cwiseAbs().maxCoeff() < 1e-5 * std::max(1.0, fd.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("predict matches a dense transition-matrix oracle") {
    const gp::GpHyper hyper;
    const gp::BasisModel model(gp::even_basis(12), hyper);
    std::mt19937_64 rng(23);
    gp::TrackState state = random_state(rng, model);
    // make the covariance generic: A A^T
    const int dim = static_cast<int>(state.mean.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(
        dim, dim, [&](Eigen::Index, Eigen::Index) {
            return std::uniform_real_distribution<double>(-0.3, 0.3)(rng);
        });
    state.cov = a * a.transpose() + Eigen::MatrixXd::Identity(dim, dim) * 0.1;

    const double dt = 0.25;
    gp::ProcessNoise process;
    const gp::TrackState out = gp::predict(state, dt, model, process);

    const int n = model.size();
    const double decay = std::exp(-hyper.forgetting_rate * dt);
    Eigen::MatrixXd f = Eigen::MatrixXd::Identity(dim, dim);
    f(0, 2) = dt;
    f(1, 3) = dt;
    f.bottomRightCorner(n, n) *= decay;

    const double q = process.accel_noise_std * process.accel_noise_std;
    Eigen::MatrixXd qmat = Eigen::MatrixXd::Zero(dim, dim);
    qmat(0, 0) = qmat(1, 1) = q * dt * dt * dt * dt / 4.0;
    qmat(0, 2) = qmat(2, 0) = qmat(1, 3) = qmat(3, 1) = q * dt * dt * dt / 2.0;
    qmat(2, 2) = qmat(3, 3) = q * dt * dt;
    qmat(4, 4) = process.orient_walk_std * process.orient_walk_std;
    qmat.bottomRightCorner(n, n) = (1.0 - decay * decay) * model.prior_cov();

    const Eigen::VectorXd mean_want = f * state.mean;
    const Eigen::MatrixXd cov_want = f * state.cov * f.transpose() + qmat;
    CHECK((out.mean - mean_want).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((out.cov - cov_want).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("predict with zero forgetting leaves the contour untouched") {
    const gp::GpHyper hyper = [] {
        gp::GpHyper h;
        h.forgetting_rate = 0.0;
        return h;
    }();
    const gp::BasisModel model(gp::even_basis(10), hyper);
    std::mt19937_64 rng(3);
    gp::TrackState state = random_state(rng, model);
    state.mean.segment<2>(2).setZero();  // no velocity: kinematics static too

    gp::ProcessNoise quiet;
    quiet.accel_noise_std = 0.0;
    quiet.orient_walk_std = 0.0;
    const gp::TrackState out = gp::predict(state, 0.5, model, quiet);
    const int n = model.size();
    CHECK((out.mean - state.mean).cwiseAbs().maxCoeff() == 0.0);
    CHECK((out.cov.bottomRightCorner(n, n) - state.cov.bottomRightCorner(n, n))
              .cwiseAbs()
              .maxCoeff() < 1e-15);
}

TEST_CASE("predict recovers the prior for long horizons") {
    const gp::GpHyper hyper;
    const gp::BasisModel model(gp::even_basis(10), hyper);
    std::mt19937_64 rng(31);
    gp::TrackState state = random_state(rng, model);
    state.cov *= 0.01;

    const gp::TrackState out = gp::predict(state, 1e7, model, {});
    const int n = model.size();
    CHECK((out.cov.bottomRightCorner(n, n) - model.prior_cov()).cwiseAbs().maxCoeff() <
          1e-6);
    CHECK(out.radii().cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("update ignores empty scans and center-coincident points") {
    const gp::GpHyper hyper;
    const gp::BasisModel model(gp::even_basis(20), hyper);
    std::mt19937_64 rng(13);
    const gp::TrackState state = random_state(rng, model);

    const gp::TrackState same = gp::update(state, sim::Scan{0, {}}, model);
    CHECK((same.mean - state.mean).cwiseAbs().maxCoeff() == 0.0);

    sim::Scan coincident{0, {geom::Point2{state.mean(0), state.mean(1)}}};
    const gp::TrackState skipped = gp::update(state, coincident, model);
    CHECK((skipped.mean - state.mean).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("a single on-contour measurement pulls the nearest radius") {
    const gp::GpHyper hyper;
    const int n = 20;
    const gp::BasisModel model(gp::even_basis(n), hyper);

    gp::TrackState state;
    state.basis_angles = model.basis();
    state.mean = Eigen::VectorXd::Zero(gp::TrackState::kKinDim + n);
    state.mean.tail(n).setConstant(0.9);
    state.cov = Eigen::MatrixXd::Zero(state.mean.size(), state.mean.size());
    state.cov.bottomRightCorner(n, n) = model.prior_cov();
    state.cov.topLeftCorner(5, 5) = 1e-6 * Eigen::MatrixXd::Identity(5, 5);

    const int j = 4;
    const double theta = model.basis()(j);
    sim::Scan scan{0, {geom::Point2{1.4 * std::cos(theta), 1.4 * std::sin(theta)}}};

    const double trace_before = state.cov.bottomRightCorner(n, n).trace();
    const gp::TrackState out = gp::update(state, scan, model);
    const double trace_after = out.cov.bottomRightCorner(n, n).trace();

    CHECK(out.radii()(j) > 0.9);
    CHECK(out.radii()(j) < 1.4 + 1e-6);
    CHECK(trace_after < trace_before);
}

TEST_CASE("huge measurement noise means no information") {
    gp::GpHyper hyper;
    hyper.sigma_noise = 1e3;
    const int n = 16;
    const gp::BasisModel model(gp::even_basis(n), hyper);
    std::mt19937_64 rng(17);
    gp::TrackState state = random_state(rng, model);

    sim::Scan scan{0, {geom::Point2{state.mean(0) + 1.0, state.mean(1) + 1.0}}};
    const gp::TrackState out = gp::update(state, scan, model);
    const Eigen::VectorXd prior_std = state.cov.diagonal().cwiseSqrt();
    for (int i = 0; i < state.mean.size(); ++i)
        CHECK(std::abs(out.mean(i) - state.mean(i)) < 1e-3 * prior_std(i));
}

TEST_CASE("update keeps the joint covariance symmetric and non-negative") {
    const gp::GpHyper hyper;
    const gp::BasisModel model(gp::even_basis(50), hyper);
    sim::SimConfig config;
    config.n_steps = 10;
    const sim::Scenario sc = sim::simulate_scenario(sim::ShapeClass::Plus, config, 19);
    const auto states = gp::track(sc, {});
    for (const auto& st : states) {
        CHECK((st.cov - st.cov.transpose()).cwiseAbs().maxCoeff() < 1e-8);
        CHECK(st.cov.diagonal().minCoeff() >= 0.0);
    }
}

TEST_CASE("measurement jacobian matches central finite differences") {
    const gp::GpHyper hyper;
    const gp::BasisModel model(gp::even_basis(15), hyper);
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(-1.0, 1.0);

    for (int trial = 0; trial < 10; ++trial) {
        gp::TrackState state = random_state(rng, model);
        const geom::Point2 z{state.mean(0) + 1.5 + u(rng), state.mean(1) + 1.5 + u(rng)};
        const gp::MeasurementModel mm = gp::measurement_model(state, z, model);

        const auto h_of = [&](const Eigen::VectorXd& x) {
            gp::TrackState s = state;
            s.mean = x;
            return Eigen::VectorXd(gp::measurement_model(s, z, model).predicted);
        };
        const Eigen::MatrixXd fd = oracle::central_jacobian(h_of, state.mean, 1e-6);
        const double rel = (mm.jacobian - fd).cwiseAbs().maxCoeff() /
                           std::max(1.0, fd.cwiseAbs().maxCoeff());
        CAPTURE(trial);
        CHECK(rel < 1e-4);
    }
}

TEST_CASE("initial_state uses the first non-empty scan centroid") {
    const gp::GpHyper hyper;
    const gp::BasisModel model(gp::even_basis(10), hyper);

    sim::Scenario sc;
    sc.scans.push_back({0, {}});
    sc.scans.push_back({1, {{1.0, 2.0}, {3.0, 4.0}}});
    sc.poses.resize(2);

    gp::InitConfig init;
    const gp::TrackState state = gp::initial_state(sc, model, init);
    CHECK(state.mean(0) == doctest::Approx(2.0));
    CHECK(state.mean(1) == doctest::Approx(3.0));
    CHECK(state.velocity().norm() == 0.0);
    CHECK(state.orientation() == 0.0);
    CHECK(state.radii().cwiseAbs().maxCoeff() == 0.0);
    CHECK(state.cov(0, 0) == doctest::Approx(init.pos_std * init.pos_std));
    CHECK(state.cov(2, 2) == doctest::Approx(init.vel_std * init.vel_std));
    CHECK(state.cov(4, 4) == doctest::Approx(init.orient_std * init.orient_std));
    const int n = model.size();
    CHECK((state.cov.bottomRightCorner(n, n) - model.prior_cov()).cwiseAbs().maxCoeff() <
          1e-15);

    sim::Scenario empty;
    empty.scans.push_back({0, {}});
    empty.poses.resize(1);
    CHECK_THROWS_AS(gp::initial_state(empty, model, init), DegenerateInput);
}

TEST_CASE("track over one scan equals a single update of the initial state") {
    sim::SimConfig config;
    config.n_steps = 1;
    const sim::Scenario sc = sim::simulate_scenario(sim::ShapeClass::Circle, config, 2);

    gp::TrackerConfig tconfig;
    const auto states = gp::track(sc, tconfig);
    REQUIRE(states.size() == 1);

    const gp::BasisModel model(gp::even_basis(tconfig.n_basis), tconfig.hyper);
    const gp::TrackState manual =
        gp::update(gp::initial_state(sc, model, tconfig.init), sc.scans[0], model);
    CHECK((states[0].mean - manual.mean).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("track converges on a stationary circle") {
    sim::Scenario sc;
    sc.shape = {sim::ShapeClass::Circle, 1.0, 0.0};
    sc.dt = 0.1;
    sim::Rng rng(12345);
    for (int k = 0; k < 100; ++k) {
        sc.poses.push_back({{0.0, 0.0}, {0.0, 0.0}, 0.0});
        sc.scans.push_back(sim::simulate_scan(sc.shape, sc.poses.back(), 20, 0.02, rng, k));
    }

    const auto states = gp::track(sc, {});
    REQUIRE(states.size() == 100);
    CHECK((states.back().radii().array() - 1.0).abs().maxCoeff() < 0.1);
    CHECK(states.back().center().norm() < 0.05);

    const auto again = gp::track(sc, {});
    CHECK((states.back().mean - again.back().mean).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("each measurement update shrinks the contour covariance trace") {
    const gp::GpHyper hyper;
    const gp::BasisModel model(gp::even_basis(50), hyper);

    sim::Scenario sc;
    sc.shape = {sim::ShapeClass::Circle, 1.0, 0.0};
    sim::Rng rng(777);
    sc.poses.push_back({{0.0, 0.0}, {0.0, 0.0}, 0.0});
    sc.scans.push_back(sim::simulate_scan(sc.shape, sc.poses[0], 25, 0.02, rng, 0));

    gp::TrackState state = gp::initial_state(sc, model, {});
    const int n = model.size();
    double trace = state.cov.bottomRightCorner(n, n).trace();
    for (int i = 0; i < 20; ++i) {
        sim::Scan one{0, {sc.scans[0].measurements[i]}};
        state = gp::update(state, one, model);
        const double next = state.cov.bottomRightCorner(n, n).trace();
        CHECK(next < trace);
        trace = next;
    }
}
