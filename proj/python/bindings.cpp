// Python bindings for the core operations: simulation, tracking, feature
// extraction, dataset generation and both classifiers.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "shapetrack/bayes.hpp"
#include "shapetrack/features.hpp"
#include "shapetrack/gp_ett.hpp"
#include "shapetrack/json_io.hpp"
#include "shapetrack/nn.hpp"
#include "shapetrack/pipeline.hpp"
#include "shapetrack/simulator.hpp"

namespace py = pybind11;
using namespace shapetrack;

namespace {

gp::Contour make_contour(const Eigen::VectorXd& radii,
                         const std::optional<Eigen::MatrixXd>& cov) {
    gp::Contour c;
    c.basis_angles = gp::even_basis(static_cast<int>(radii.size()));
    c.radii_mean = radii;
    if (cov) c.radii_cov = *cov;
    return c;
}

py::dict dataset_dict(const std::vector<pipeline::DatasetRow>& rows) {
    py::dict out;
    out["features"] = pipeline::feature_matrix(rows).transpose().eval();
    out["radii"] = pipeline::contour_matrix(rows).transpose().eval();
    out["labels"] = pipeline::label_vector(rows);
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "contour tracking and shape classification core";

    py::register_exception<Error>(m, "ShapetrackError");

    py::class_<sim::Scenario>(m, "Scenario")
        .def_property_readonly("shape_class",
                               [](const sim::Scenario& s) { return sim::to_string(s.shape.type); })
        .def_property_readonly("n_scans",
                               [](const sim::Scenario& s) { return s.scans.size(); })
        .def("scan_points",
             [](const sim::Scenario& s, std::size_t k) {
                 const auto& meas = s.scans.at(k).measurements;
                 Eigen::MatrixXd pts(static_cast<Eigen::Index>(meas.size()), 2);
                 for (std::size_t i = 0; i < meas.size(); ++i) {
                     pts(static_cast<Eigen::Index>(i), 0) = meas[i].x;
                     pts(static_cast<Eigen::Index>(i), 1) = meas[i].y;
                 }
                 return pts;
             },
             py::arg("scan"));

    m.def(
        "simulate_scenario",
        [](const std::string& cls, std::uint64_t seed, int steps, double dropout,
           double noise_std) {
            sim::SimConfig config;
            config.n_steps = steps;
            config.dropout_prob = dropout;
            config.noise_std = noise_std;
            return sim::simulate_scenario(sim::shape_class_from_string(cls), config, seed);
        },
        py::arg("shape_class"), py::arg("seed"), py::arg("steps") = 50,
        py::arg("dropout") = 0.0, py::arg("noise_std") = 0.02);

    py::class_<gp::Contour>(m, "Contour")
        .def_readonly("basis_angles", &gp::Contour::basis_angles)
        .def_readonly("radii_mean", &gp::Contour::radii_mean)
        .def_readonly("radii_cov", &gp::Contour::radii_cov);

    m.def(
        "track",
        [](const sim::Scenario& scenario, int n_basis) {
            gp::TrackerConfig config;
            config.n_basis = n_basis;
            const auto states = gp::track(scenario, config);
            py::dict out;
            const auto t = static_cast<Eigen::Index>(states.size());
            Eigen::MatrixXd centers(t, 2);
            Eigen::VectorXd orientations(t);
            Eigen::MatrixXd radii(t, n_basis);
            for (Eigen::Index k = 0; k < t; ++k) {
                centers.row(k) = states[static_cast<std::size_t>(k)].center().transpose();
                orientations(k) = states[static_cast<std::size_t>(k)].orientation();
                radii.row(k) = states[static_cast<std::size_t>(k)].radii().transpose();
            }
            out["centers"] = centers;
            out["orientations"] = orientations;
            out["radii"] = radii;
            out["final_contour"] = states.back().contour();
            return out;
        },
        py::arg("scenario"), py::arg("n_basis") = 50);

    py::class_<gp::GpHyper>(m, "GpHyper")
        .def(py::init<>())
        .def_readwrite("sigma_f", &gp::GpHyper::sigma_f)
        .def_readwrite("length_scale", &gp::GpHyper::length_scale)
        .def_readwrite("sigma_r", &gp::GpHyper::sigma_r)
        .def_readwrite("sigma_noise", &gp::GpHyper::sigma_noise)
        .def_readwrite("forgetting_rate", &gp::GpHyper::forgetting_rate);

    m.def("kernel", &gp::covariance, py::arg("theta"), py::arg("theta_prime"),
          py::arg("hyper") = gp::GpHyper{});

    m.def(
        "extract_features",
        [](const Eigen::VectorXd& radii) {
            return feat::extract_features(make_contour(radii, std::nullopt), {0.0, 0.0}, 0.0)
                .to_vector();
        },
        py::arg("radii"),
        "Six descriptors (elongation, rectangularity, circularity, solidity, "
        "compactness, area) of the radial contour at canonical pose.");

    m.def(
        "ut_features",
        [](const Eigen::VectorXd& radii, const Eigen::MatrixXd& cov) {
            const auto d =
                feat::ut_propagate(make_contour(radii, cov), {0.0, 0.0}, 0.0);
            return py::make_tuple(d.mean, d.cov);
        },
        py::arg("radii"), py::arg("radii_cov"));

    m.def(
        "generate_dataset",
        [](int per_class, std::uint64_t seed, int jobs, double dropout,
           bool early_snapshots, bool with_cov, const std::optional<std::string>& path) {
            pipeline::GenConfig config;
            config.jobs = jobs;
            config.sim.dropout_prob = dropout;
            config.early_snapshots = early_snapshots;
            config.store_cov = with_cov;
            const auto rows = pipeline::generate_dataset(per_class, config, seed);
            if (path) pipeline::save_dataset(rows, *path);
            return dataset_dict(rows);
        },
        py::arg("per_class"), py::arg("seed") = 0, py::arg("jobs") = 1,
        py::arg("dropout") = 0.0, py::arg("early_snapshots") = false,
        py::arg("with_cov") = false, py::arg("path") = std::nullopt);

    m.def(
        "load_dataset",
        [](const std::string& path) { return dataset_dict(pipeline::load_dataset(path)); },
        py::arg("path"));

    py::class_<nn::NNModel>(m, "NNModel")
        .def_property_readonly("layer_sizes",
                               [](const nn::NNModel& m_) { return m_.layer_sizes; })
        .def("forward", [](const nn::NNModel& m_, const Eigen::VectorXd& x) {
            return nn::forward(m_, x);
        })
        .def("classify", [](const nn::NNModel& m_, const Eigen::VectorXd& x) {
            return nn::classify(m_, x);
        });

    m.def(
        "train_nn",
        [](const Eigen::MatrixXd& train_x, const std::vector<int>& train_y,
           const Eigen::MatrixXd& val_x, const std::vector<int>& val_y,
           std::uint64_t seed, int max_epochs, int patience) {
            nn::TrainConfig config;
            config.rng_seed = seed;
            config.max_epochs = max_epochs;
            config.patience = patience;
            const std::vector<int> layers = {static_cast<int>(train_x.rows()), 16, 8, 4};
            auto [model, report] = nn::train(layers, train_x, train_y, val_x, val_y, config);
            py::dict rep;
            rep["best_epoch"] = report.best_epoch;
            rep["epochs"] = report.train_loss.size();
            rep["val_accuracy"] = report.val_accuracy;
            rep["stop_reason"] = report.stop_reason;
            return py::make_tuple(model, rep);
        },
        py::arg("train_inputs"), py::arg("train_labels"), py::arg("val_inputs"),
        py::arg("val_labels"), py::arg("seed") = 0, py::arg("max_epochs") = 500,
        py::arg("patience") = 20,
        "Inputs are (dim, n) column-per-sample matrices.");

    py::class_<bayes::ClassStats>(m, "ClassStats")
        .def_property_readonly("priors", [](const bayes::ClassStats& s) { return s.priors; })
        .def("posterior",
             [](const bayes::ClassStats& s, const Eigen::VectorXd& f) {
                 return bayes::posterior(s, f);
             })
        .def("classify", [](const bayes::ClassStats& s, const Eigen::VectorXd& f) {
            return bayes::classify(s, f);
        });

    m.def(
        "fit_bayes",
        [](const Eigen::MatrixXd& features, const std::vector<int>& labels) {
            return bayes::fit(features, labels);
        },
        py::arg("features"), py::arg("labels"),
        "Features are a (6, n) column-per-sample matrix.");

    m.def("save_model", [](const nn::NNModel& model, const std::string& path) {
        io::save_model(model, path);
    });
    m.def("load_model", &io::load_model);
    m.def("save_stats", &io::save_stats);
    m.def("load_stats", &io::load_stats);

    m.attr("__version__") = "1.0.0";
}
