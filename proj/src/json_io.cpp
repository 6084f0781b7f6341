#include "shapetrack/json_io.hpp"

#include "shapetrack/gzip.hpp"

namespace shapetrack::io {

namespace {

using nlohmann::json;

std::vector<double> flatten(const Eigen::MatrixXd& m) {
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
    }
    return flat;
}

Eigen::MatrixXd unflatten(const std::vector<double>& flat, Eigen::Index rows,
                          Eigen::Index cols) {
    if (static_cast<Eigen::Index>(flat.size()) != rows * cols) {
        throw IoError("matrix payload has the wrong size");
    }
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
    }
    return m;
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
    return {v.data(), v.data() + v.size()};
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json config_to_json(const nn::TrainConfig& c) {
    return {{"max_epochs", c.max_epochs},
            {"patience", c.patience},
            {"lm_damping_init", c.lm_damping_init},
            {"lm_damping_up", c.lm_damping_up},
            {"lm_damping_down", c.lm_damping_down},
            {"lm_damping_max", c.lm_damping_max},
            {"lm_max_retries", c.lm_max_retries},
            {"rng_seed", c.rng_seed}};
}

}  // namespace

json model_to_json(const nn::NNModel& model, const nn::TrainConfig* config,
                   const nn::TrainReport* report) {
    model.validate();
    json j;
    j["v"] = 1;
    j["layer_sizes"] = model.layer_sizes;
    json weights = json::array();
    json biases = json::array();
    for (int l = 0; l < model.num_layers(); ++l) {
        weights.push_back(flatten(model.weights[static_cast<std::size_t>(l)]));
        biases.push_back(to_std(model.biases[static_cast<std::size_t>(l)]));
    }
    j["weights"] = std::move(weights);
    j["biases"] = std::move(biases);
    j["input_norm"] = {{"shift", to_std(model.norm_shift)}, {"scale", to_std(model.norm_scale)}};
    j["activation"] = {{"hidden", model.tanh_hidden ? "tanh" : "identity"},
                       {"output", model.softmax_output ? "softmax" : "identity"}};
    json meta = json::object();
    if (config != nullptr) {
        meta["seed"] = config->rng_seed;
        meta["config"] = config_to_json(*config);
    }
    if (report != nullptr) meta["training"] = train_report_to_json(*report);
    if (!meta.empty()) j["metadata"] = std::move(meta);
    return j;
}

nn::NNModel model_from_json(const json& j) {
    try {
        if (j.at("v").get<int>() != 1) throw IoError("unsupported model schema version");
        nn::NNModel model;
        model.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
        if (model.layer_sizes.size() < 2) throw IoError("model needs at least two layers");
        const auto& weights = j.at("weights");
        const auto& biases = j.at("biases");
        for (std::size_t l = 0; l + 1 < model.layer_sizes.size(); ++l) {
            const auto rows = static_cast<Eigen::Index>(model.layer_sizes[l + 1]);
            const auto cols = static_cast<Eigen::Index>(model.layer_sizes[l]);
            model.weights.push_back(
                unflatten(weights.at(l).get<std::vector<double>>(), rows, cols));
            model.biases.push_back(to_eigen(biases.at(l).get<std::vector<double>>()));
        }
        model.norm_shift = to_eigen(j.at("input_norm").at("shift").get<std::vector<double>>());
        model.norm_scale = to_eigen(j.at("input_norm").at("scale").get<std::vector<double>>());
        const auto& act = j.at("activation");
        model.tanh_hidden = act.at("hidden").get<std::string>() == "tanh";
        model.softmax_output = act.at("output").get<std::string>() == "softmax";
        model.validate();
        return model;
    } catch (const json::exception& e) {
        throw IoError(std::string("model schema: ") + e.what());
    }
}

void save_model(const nn::NNModel& model, const std::string& path,
                const nn::TrainConfig* config, const nn::TrainReport* report) {
    write_file(path, model_to_json(model, config, report).dump(2) + "\n");
}

nn::NNModel load_model(const std::string& path) {
    try {
        return model_from_json(json::parse(read_file(path)));
    } catch (const json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
}

json stats_to_json(const bayes::ClassStats& stats) {
    stats.validate();
    json classes = json::array();
    for (int i = 0; i < stats.n_classes(); ++i) {
        classes.push_back({{"mean", to_std(stats.means[static_cast<std::size_t>(i)])},
                           {"cov", flatten(stats.covs[static_cast<std::size_t>(i)])},
                           {"prior", stats.priors(i)}});
    }
    return {{"v", 1},
            {"classes", std::move(classes)},
            {"regularization", stats.regularization},
            {"config", {{"use_feature_cov", stats.use_feature_cov}}}};
}

bayes::ClassStats stats_from_json(const json& j) {
    try {
        if (j.at("v").get<int>() != 1) throw IoError("unsupported stats schema version");
        bayes::ClassStats stats;
        const auto& classes = j.at("classes");
        if (classes.empty()) throw IoError("stats file has no classes");
        stats.priors.resize(static_cast<Eigen::Index>(classes.size()));
        Eigen::Index i = 0;
        for (const auto& c : classes) {
            Eigen::VectorXd mean = to_eigen(c.at("mean").get<std::vector<double>>());
            const auto d = mean.size();
            stats.means.push_back(std::move(mean));
            stats.covs.push_back(unflatten(c.at("cov").get<std::vector<double>>(), d, d));
            stats.priors(i++) = c.at("prior").get<double>();
        }
        stats.regularization = j.at("regularization").get<double>();
        stats.use_feature_cov = j.at("config").at("use_feature_cov").get<bool>();
        stats.validate();
        return stats;
    } catch (const json::exception& e) {
        throw IoError(std::string("stats schema: ") + e.what());
    }
}

void save_stats(const bayes::ClassStats& stats, const std::string& path) {
    write_file(path, stats_to_json(stats).dump(2) + "\n");
}

bayes::ClassStats load_stats(const std::string& path) {
    try {
        return stats_from_json(json::parse(read_file(path)));
    } catch (const json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
}

json scenario_to_json(const sim::Scenario& scenario) {
    json j;
    j["v"] = 1;
    j["class"] = sim::to_string(scenario.shape.type);
    j["shape"] = {{"a", scenario.shape.a}, {"b", scenario.shape.b}};
    j["dt"] = scenario.dt;
    j["noise_std"] = scenario.noise_std;
    j["seed"] = scenario.rng_seed;
    json poses = json::array();
    for (const auto& pose : scenario.poses) {
        poses.push_back({{"center", {pose.center.x, pose.center.y}},
                         {"velocity", {pose.velocity.x, pose.velocity.y}},
                         {"orientation", pose.orientation}});
    }
    j["poses"] = std::move(poses);
    json scans = json::array();
    for (const auto& scan : scenario.scans) {
        json pts = json::array();
        for (const auto& p : scan.measurements) pts.push_back({p.x, p.y});
        scans.push_back({{"step", scan.time_index}, {"points", std::move(pts)}});
    }
    j["scans"] = std::move(scans);
    return j;
}

sim::Scenario scenario_from_json(const json& j) {
    try {
        if (j.at("v").get<int>() != 1) throw IoError("unsupported scenario schema version");
        sim::Scenario s;
        s.shape.type = sim::shape_class_from_string(j.at("class").get<std::string>());
        s.shape.a = j.at("shape").at("a").get<double>();
        s.shape.b = j.at("shape").at("b").get<double>();
        s.dt = j.at("dt").get<double>();
        s.noise_std = j.at("noise_std").get<double>();
        s.rng_seed = j.at("seed").get<std::uint64_t>();
        for (const auto& p : j.at("poses")) {
            sim::ObjectPose pose;
            pose.center = {p.at("center").at(0).get<double>(), p.at("center").at(1).get<double>()};
            pose.velocity = {p.at("velocity").at(0).get<double>(),
                             p.at("velocity").at(1).get<double>()};
            pose.orientation = p.at("orientation").get<double>();
            s.poses.push_back(pose);
        }
        for (const auto& sc : j.at("scans")) {
            sim::Scan scan;
            scan.time_index = sc.at("step").get<int>();
            for (const auto& p : sc.at("points")) {
                scan.measurements.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
            }
            s.scans.push_back(std::move(scan));
        }
        return s;
    } catch (const json::exception& e) {
        throw IoError(std::string("scenario schema: ") + e.what());
    }
}

json states_to_json(const std::vector<gp::TrackState>& states) {
    json j;
    j["v"] = 1;
    if (!states.empty()) j["basis_angles"] = to_std(states.front().basis_angles);
    json arr = json::array();
    for (std::size_t i = 0; i < states.size(); ++i) {
        const auto& s = states[i];
        const gp::Contour c = s.contour();
        json e;
        e["step"] = s.time_index;
        e["center"] = {s.center().x(), s.center().y()};
        e["velocity"] = {s.velocity().x(), s.velocity().y()};
        e["orientation"] = s.orientation();
        e["radii_mean"] = to_std(c.radii_mean);
        e["radii_std"] = to_std(c.radii_cov.diagonal().cwiseSqrt().eval());
        if (i + 1 == states.size()) e["radii_cov"] = flatten(c.radii_cov);
        arr.push_back(std::move(e));
    }
    j["states"] = std::move(arr);
    return j;
}

json report_to_json(const pipeline::EvalReport& report) {
    json confusion = json::array();
    for (const auto& row : report.confusion) {
        confusion.push_back(std::vector<int>(row.begin(), row.end()));
    }
    return {{"v", 1},
            {"classifier", report.classifier_id},
            {"mode", pipeline::to_string(report.mode)},
            {"accuracy", report.accuracy},
            {"confusion", std::move(confusion)},
            {"mean_time_s", report.mean_time_s},
            {"pass_time_s", std::vector<double>(report.pass_time_s.begin(),
                                                report.pass_time_s.end())},
            {"n_test", report.n_test},
            {"flagged", report.flagged}};
}

json train_report_to_json(const nn::TrainReport& report) {
    return {{"train_loss", report.train_loss},
            {"val_loss", report.val_loss},
            {"val_accuracy", report.val_accuracy},
            {"best_epoch", report.best_epoch},
            {"epochs", report.train_loss.size()},
            {"best_val_accuracy",
             report.best_epoch >= 0
                 ? report.val_accuracy[static_cast<std::size_t>(report.best_epoch)]
                 : 0.0},
            {"stop_reason", report.stop_reason}};
}

}  // namespace shapetrack::io
