// shapetrack: simulate extended objects, track their contours, build
// datasets, train the classifiers and compare them.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "shapetrack/bayes.hpp"
#include "shapetrack/errors.hpp"
#include "shapetrack/features.hpp"
#include "shapetrack/geometry.hpp"
#include "shapetrack/gp_ett.hpp"
#include "shapetrack/gzip.hpp"
#include "shapetrack/json_io.hpp"
#include "shapetrack/nn.hpp"
#include "shapetrack/pipeline.hpp"
#include "shapetrack/simulator.hpp"
#include "shapetrack/svg.hpp"

namespace {

using nlohmann::json;
using namespace shapetrack;

/// Files written by the current command; removed again if the command fails
/// midway so no partial artifacts survive.
class ArtifactTracker {
public:
    void write(const std::string& path, const std::string& data) {
        io::write_file(path, data);
        written_.push_back(path);
    }
    void note(const std::string& path) { written_.push_back(path); }
    void discard_all() {
        for (const auto& p : written_) {
            std::error_code ec;
            std::filesystem::remove(p, ec);
        }
    }

private:
    std::vector<std::string> written_;
};

std::string join_out(const std::string& outdir, const std::string& path) {
    if (path.empty() || std::filesystem::path(path).is_absolute()) return path;
    return (std::filesystem::path(outdir) / path).string();
}

void write_run_json(ArtifactTracker& tracker, const std::string& outdir,
                    const std::string& command, const json& config) {
    json run{{"v", 1}, {"command", command}, {"config", config}};
    tracker.write(join_out(outdir, "run.json"), run.dump(2) + "\n");
}

geom::Polygon pose_outline(const sim::ShapeSpec& shape, const sim::ObjectPose& pose) {
    const geom::Polygon body = sim::shape_outline(shape);
    std::vector<geom::Point2> pts;
    pts.reserve(body.vertices().size());
    const double c = std::cos(pose.orientation), s = std::sin(pose.orientation);
    for (const auto& v : body.vertices()) {
        pts.push_back({pose.center.x + c * v.x - s * v.y, pose.center.y + s * v.x + c * v.y});
    }
    return geom::Polygon(std::move(pts));
}

geom::Polygon state_polygon(const gp::TrackState& state) {
    const gp::Contour contour = state.contour();
    std::vector<double> radii(contour.radii_mean.data(),
                              contour.radii_mean.data() + contour.radii_mean.size());
    for (double& r : radii) {
        if (!(r > 0.0)) r = 1e-3;
    }
    const std::vector<double> angles(contour.basis_angles.data(),
                                     contour.basis_angles.data() + contour.basis_angles.size());
    return geom::contour_to_polygon(radii, angles,
                                    {state.center().x(), state.center().y()},
                                    state.orientation());
}

struct CommonOpts {
    std::string outdir = ".";
    std::uint64_t seed = 0;
};

int cmd_simulate(const CommonOpts& common, const std::string& cls_name,
                 const sim::SimConfig& config, const std::string& out_name) {
    ArtifactTracker tracker;
    try {
        const sim::ShapeClass cls = sim::shape_class_from_string(cls_name);
        const sim::Scenario scenario = sim::simulate_scenario(cls, config, common.seed);
        const std::string out = join_out(common.outdir, out_name);
        write_run_json(tracker, common.outdir, "simulate",
                       {{"class", cls_name},
                        {"seed", common.seed},
                        {"steps", config.n_steps},
                        {"dt", config.dt},
                        {"rate", config.meas_rate},
                        {"noise_std", config.noise_std},
                        {"dropout", config.dropout_prob},
                        {"out", out}});
        tracker.write(out, io::scenario_to_json(scenario).dump() + "\n");
        std::cout << "wrote " << out << " (" << scenario.scans.size() << " scans)\n";
        return 0;
    } catch (const std::exception& e) {
        tracker.discard_all();
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_track(const CommonOpts& common, const std::string& scenario_path,
              const gp::TrackerConfig& config, const std::string& out_name,
              const std::string& svg_name) {
    ArtifactTracker tracker;
    try {
        const sim::Scenario scenario =
            io::scenario_from_json(json::parse(io::read_file(scenario_path)));
        const std::vector<gp::TrackState> states = gp::track(scenario, config);
        const std::string out = join_out(common.outdir, out_name);
        write_run_json(tracker, common.outdir, "track",
                       {{"scenario", scenario_path},
                        {"basis", config.n_basis},
                        {"out", out},
                        {"svg", svg_name}});
        tracker.write(out, io::states_to_json(states).dump() + "\n");
        std::cout << "wrote " << out << " (" << states.size() << " states)\n";
        if (!svg_name.empty()) {
            const std::string svg_path = join_out(common.outdir, svg_name);
            const auto& last_scan = scenario.scans.back();
            const geom::Polygon truth =
                pose_outline(scenario.shape, scenario.poses.back());
            tracker.write(svg_path,
                          svg::contour_svg(last_scan.measurements,
                                           state_polygon(states.back()), &truth));
            std::cout << "wrote " << svg_path << "\n";
        }
        return 0;
    } catch (const json::exception& e) {
        tracker.discard_all();
        std::cerr << "error: " << scenario_path << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        tracker.discard_all();
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_dataset(const CommonOpts& common, int per_class, const pipeline::GenConfig& config,
                const std::string& out_name) {
    ArtifactTracker tracker;
    try {
        const std::string out = join_out(common.outdir, out_name);
        write_run_json(tracker, common.outdir, "dataset",
                       {{"per_class", per_class},
                        {"seed", common.seed},
                        {"dropout", config.sim.dropout_prob},
                        {"early_snapshots", config.early_snapshots},
                        {"store_cov", config.store_cov},
                        {"jobs", config.jobs},
                        {"out", out}});
        pipeline::GenStats stats;
        const auto rows = pipeline::generate_dataset(per_class, config, common.seed, &stats);
        pipeline::save_dataset(rows, out);
        tracker.note(out);
        if (config.store_cov) tracker.note(out + ".cov.gz");
        std::cout << "wrote " << out << ": " << rows.size() << " rows from "
                  << stats.scenarios << " scenarios (" << stats.failed_rows
                  << " degenerate snapshots skipped)\n";
        return 0;
    } catch (const std::exception& e) {
        tracker.discard_all();
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_train(const CommonOpts& common, const std::string& dataset_path,
              const std::string& model_kind, std::uint64_t split_seed,
              const nn::TrainConfig& train_config, const pipeline::SplitSpec& spec,
              std::string out_name, const std::string& curves_name) {
    ArtifactTracker tracker;
    try {
        if (out_name.empty()) out_name = model_kind + ".json";
        const std::string out = join_out(common.outdir, out_name);
        write_run_json(tracker, common.outdir, "train",
                       {{"dataset", dataset_path},
                        {"model", model_kind},
                        {"seed", train_config.rng_seed},
                        {"split_seed", split_seed},
                        {"max_epochs", train_config.max_epochs},
                        {"patience", train_config.patience},
                        {"out", out},
                        {"curves", curves_name}});
        const auto rows = pipeline::load_dataset(dataset_path);
        const pipeline::Split split = pipeline::split(rows, spec, split_seed);

        if (model_kind == "bc") {
            const bayes::ClassStats stats =
                bayes::fit(pipeline::feature_matrix(split.train),
                           pipeline::label_vector(split.train));
            io::save_stats(stats, out);
            tracker.note(out);
            std::cout << "wrote " << out << " (fitted on " << split.train.size()
                      << " rows)\n";
            return 0;
        }

        const bool features = model_kind == "nn-feature";
        if (!features && model_kind != "nn-contour") {
            throw InvalidConfig("unknown model kind: " + model_kind);
        }
        const Eigen::MatrixXd train_x = features ? pipeline::feature_matrix(split.train)
                                                 : pipeline::contour_matrix(split.train);
        const Eigen::MatrixXd val_x = features ? pipeline::feature_matrix(split.val)
                                               : pipeline::contour_matrix(split.val);
        const std::vector<int> layers = {static_cast<int>(train_x.rows()), 16, 8,
                                         sim::kNumClasses};
        auto [model, report] =
            nn::train(layers, train_x, pipeline::label_vector(split.train), val_x,
                      pipeline::label_vector(split.val), train_config);
        io::save_model(model, out, &train_config, &report);
        tracker.note(out);
        std::cout << "wrote " << out << ": best epoch " << report.best_epoch
                  << ", validation accuracy "
                  << report.val_accuracy[static_cast<std::size_t>(report.best_epoch)]
                  << ", stopped after " << report.train_loss.size() << " epochs ("
                  << report.stop_reason << ")\n";
        if (!curves_name.empty()) {
            const std::string curves = join_out(common.outdir, curves_name);
            tracker.write(curves, svg::training_curves_svg(report));
            std::cout << "wrote " << curves << "\n";
        }
        return 0;
    } catch (const std::exception& e) {
        tracker.discard_all();
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

pipeline::EvalReport evaluate_model_file(const std::string& model_path,
                                         const std::string& mode_flag,
                                         const std::vector<pipeline::DatasetRow>& test) {
    const json j = json::parse(io::read_file(model_path));
    std::unique_ptr<pipeline::RowClassifier> classifier;
    if (j.contains("layer_sizes")) {
        nn::NNModel model = io::model_from_json(j);
        pipeline::InputMode mode = model.input_dim() == feat::kFeatureDim
                                       ? pipeline::InputMode::Features
                                       : pipeline::InputMode::Contour;
        if (!mode_flag.empty()) mode = pipeline::input_mode_from_string(mode_flag);
        classifier = pipeline::make_nn_classifier(std::move(model), mode);
    } else {
        bayes::ClassStats stats = io::stats_from_json(j);
        pipeline::InputMode mode = pipeline::InputMode::FeatureDistribution;
        if (!mode_flag.empty()) mode = pipeline::input_mode_from_string(mode_flag);
        classifier = pipeline::make_bayes_classifier(std::move(stats), mode);
    }
    return pipeline::evaluate(*classifier, test);
}

void print_report_row(const pipeline::EvalReport& r) {
    std::printf("%-12s %9.4f %12.4f\n", r.classifier_id.c_str(), r.accuracy,
                r.mean_time_s * 1e3);
}

int cmd_evaluate(const CommonOpts& common, const std::string& dataset_path,
                 std::uint64_t split_seed, const pipeline::SplitSpec& spec, bool all,
                 const std::string& model_path, const std::string& mode_flag,
                 const std::string& out_name) {
    ArtifactTracker tracker;
    try {
        const std::string out = join_out(common.outdir, out_name);
        write_run_json(tracker, common.outdir, "evaluate",
                       {{"dataset", dataset_path},
                        {"split_seed", split_seed},
                        {"all", all},
                        {"model", model_path},
                        {"mode", mode_flag},
                        {"out", out}});
        const auto rows = pipeline::load_dataset(dataset_path);
        const pipeline::Split split = pipeline::split(rows, spec, split_seed);

        std::vector<pipeline::EvalReport> reports;
        if (all) {
            for (const char* name : {"nn-feature.json", "nn-contour.json", "bc.json"}) {
                reports.push_back(
                    evaluate_model_file(join_out(common.outdir, name), "", split.test));
            }
        } else {
            if (model_path.empty()) throw InvalidConfig("--model required unless --all");
            reports.push_back(evaluate_model_file(model_path, mode_flag, split.test));
        }

        std::printf("%-12s %9s %12s\n", "classifier", "accuracy", "ms/object");
        for (const auto& r : reports) print_report_row(r);
        std::cout << "(timing covers classification only; input preparation is excluded)\n";

        json out_json;
        if (reports.size() == 1) {
            out_json = io::report_to_json(reports.front());
        } else {
            out_json["v"] = 1;
            json arr = json::array();
            for (const auto& r : reports) arr.push_back(io::report_to_json(r));
            out_json["reports"] = std::move(arr);
        }
        tracker.write(out, out_json.dump(2) + "\n");
        std::cout << "wrote " << out << "\n";
        return 0;
    } catch (const json::exception& e) {
        tracker.discard_all();
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        tracker.discard_all();
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"extended-object contour tracking and shape classification"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value config file mirroring the flags");

    CommonOpts common;
    app.add_option("--outdir", common.outdir, "output directory")
        ->envname("SHAPETRACK_OUTDIR")
        ->capture_default_str();

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "generate a measurement scenario");
    std::string sim_class = "circle";
    sim::SimConfig sim_config;
    std::string sim_out = "scenario.json";
    sim_cmd->add_option("--class", sim_class, "circle|triangle|rectangle|plus")
        ->capture_default_str();
    sim_cmd->add_option("--seed", common.seed, "rng seed")->capture_default_str();
    sim_cmd->add_option("--steps", sim_config.n_steps, "number of scans")
        ->capture_default_str();
    sim_cmd->add_option("--dt", sim_config.dt, "scan period, s")->capture_default_str();
    sim_cmd->add_option("--rate", sim_config.meas_rate, "mean measurements per scan")
        ->capture_default_str();
    sim_cmd->add_option("--noise-std", sim_config.noise_std, "measurement noise std, m")
        ->capture_default_str();
    sim_cmd->add_option("--dropout", sim_config.dropout_prob,
                        "probability of an empty scan")
        ->capture_default_str();
    sim_cmd->add_option("--out", sim_out, "scenario file name")->capture_default_str();

    // track
    auto* track_cmd = app.add_subcommand("track", "run the contour tracker on a scenario");
    std::string track_scenario;
    gp::TrackerConfig tracker_config;
    std::string track_out = "estimates.json";
    std::string track_svg;
    track_cmd->add_option("--scenario", track_scenario, "scenario JSON file")->required();
    track_cmd->add_option("--basis", tracker_config.n_basis, "number of basis angles")
        ->capture_default_str();
    track_cmd->add_option("--out", track_out, "estimate file name")->capture_default_str();
    track_cmd->add_option("--svg", track_svg, "also draw the final contour estimate");

    // dataset
    auto* data_cmd = app.add_subcommand("dataset", "generate a labeled contour dataset");
    int per_class = 2000;
    pipeline::GenConfig gen_config;
    std::string data_out = "dataset.jsonl";
    bool no_cov = false;
    data_cmd->add_option("--per-class", per_class, "rows per shape class")
        ->capture_default_str();
    data_cmd->add_option("--seed", common.seed, "master rng seed")->capture_default_str();
    data_cmd->add_option("--dropout", gen_config.sim.dropout_prob,
                         "probability of an empty scan")
        ->capture_default_str();
    data_cmd->add_flag("--early-snapshots", gen_config.early_snapshots,
                       "also harvest the step-5 estimates");
    data_cmd->add_flag("--no-cov", no_cov, "skip the covariance sidecar");
    data_cmd->add_option("--jobs", gen_config.jobs, "parallel generation workers")
        ->capture_default_str();
    data_cmd->add_option("--out", data_out, "dataset file name")->capture_default_str();

    // train
    auto* train_cmd = app.add_subcommand("train", "train a classifier on a dataset");
    std::string train_dataset;
    std::string train_model = "nn-feature";
    std::uint64_t split_seed = 4242;
    nn::TrainConfig train_config;
    pipeline::SplitSpec split_spec;
    std::string train_out;
    std::string train_curves;
    train_cmd->add_option("--dataset", train_dataset, "dataset JSONL file")->required();
    train_cmd->add_option("--model", train_model, "nn-feature|nn-contour|bc")
        ->capture_default_str();
    train_cmd->add_option("--seed", train_config.rng_seed, "weight init seed")
        ->capture_default_str();
    train_cmd->add_option("--split-seed", split_seed, "train/val/test shuffle seed")
        ->capture_default_str();
    train_cmd->add_option("--max-epochs", train_config.max_epochs, "epoch cap")
        ->capture_default_str();
    train_cmd->add_option("--patience", train_config.patience,
                          "early-stopping patience, epochs")
        ->capture_default_str();
    train_cmd->add_option("--out", train_out, "model file name (default <model>.json)");
    train_cmd->add_option("--curves", train_curves, "training-curve SVG file name");

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "evaluate classifiers on the test split");
    std::string eval_dataset;
    std::string eval_model;
    std::string eval_mode;
    std::string eval_out = "report.json";
    bool eval_all = false;
    eval_cmd->add_option("--dataset", eval_dataset, "dataset JSONL file")->required();
    eval_cmd->add_option("--split-seed", split_seed, "train/val/test shuffle seed")
        ->capture_default_str();
    eval_cmd->add_option("--model", eval_model, "model or stats JSON file");
    eval_cmd->add_option("--mode", eval_mode,
                         "features|contour|feature-distribution (default by model)");
    eval_cmd->add_flag("--all", eval_all,
                       "evaluate nn-feature.json, nn-contour.json and bc.json from --outdir");
    eval_cmd->add_option("--out", eval_out, "report file name")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;  // usage errors have a fixed exit code
    }

    gen_config.store_cov = !no_cov;
    if (sim_cmd->parsed()) return cmd_simulate(common, sim_class, sim_config, sim_out);
    if (track_cmd->parsed()) {
        return cmd_track(common, track_scenario, tracker_config, track_out, track_svg);
    }
    if (data_cmd->parsed()) return cmd_dataset(common, per_class, gen_config, data_out);
    if (train_cmd->parsed()) {
        return cmd_train(common, train_dataset, train_model, split_seed, train_config,
                         split_spec, train_out, train_curves);
    }
    if (eval_cmd->parsed()) {
        return cmd_evaluate(common, eval_dataset, split_seed, split_spec, eval_all,
                            eval_model, eval_mode, eval_out);
    }
    return 2;
}
