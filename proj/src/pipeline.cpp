#include "shapetrack/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "shapetrack/gzip.hpp"

namespace shapetrack::pipeline {

namespace {

using nlohmann::json;

std::uint64_t splitmix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Scenario seed stream: depends only on (master seed, class, scenario index).
std::uint64_t scenario_seed(std::uint64_t master, int cls, int index) {
    return splitmix(splitmix(splitmix(master) ^ static_cast<std::uint64_t>(cls)) ^
                    static_cast<std::uint64_t>(index));
}

/// Rows harvested from one scenario; lost snapshots counted in failed.
std::vector<DatasetRow> run_scenario(sim::ShapeClass cls, std::uint64_t seed,
                                     const GenConfig& config,
                                     const std::vector<int>& steps, int& failed) {
    std::vector<DatasetRow> rows;
    std::vector<gp::TrackState> states;
    sim::Scenario scenario = sim::simulate_scenario(cls, config.sim, seed);
    try {
        states = gp::track(scenario, config.tracker);
    } catch (const Error&) {
        failed += static_cast<int>(steps.size());
        return rows;
    }
    for (int step : steps) {
        const gp::Contour contour = states[static_cast<std::size_t>(step)].contour();
        DatasetRow row;
        try {
            row.features = feat::extract_features(contour, {0.0, 0.0}, 0.0);
        } catch (const Error&) {
            ++failed;
            continue;
        }
        row.label = cls;
        row.radii_mean = contour.radii_mean;
        if (config.store_cov) row.radii_cov = contour.radii_cov;
        row.scenario_seed = seed;
        row.time_index = step;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<int> largest_remainder_counts(int n, const std::vector<double>& fractions) {
    const int k = static_cast<int>(fractions.size());
    std::vector<int> counts(k);
    std::vector<std::pair<double, int>> rem(k);
    int assigned = 0;
    for (int i = 0; i < k; ++i) {
        const double exact = fractions[i] * n;
        counts[i] = static_cast<int>(exact);
        rem[i] = {exact - counts[i], i};
        assigned += counts[i];
    }
    std::stable_sort(rem.begin(), rem.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (int i = 0; i < n - assigned; ++i) ++counts[rem[static_cast<std::size_t>(i)].second];
    return counts;
}

json row_to_json(const DatasetRow& row) {
    json j;
    j["v"] = 1;
    j["label"] = sim::to_string(row.label);
    j["radii"] = std::vector<double>(row.radii_mean.data(),
                                     row.radii_mean.data() + row.radii_mean.size());
    j["features"] = {{"elongation", row.features.elongation},
                     {"rectangularity", row.features.rectangularity},
                     {"circularity", row.features.circularity},
                     {"solidity", row.features.solidity},
                     {"compactness", row.features.compactness},
                     {"area", row.features.area}};
    j["seed"] = row.scenario_seed;
    j["step"] = row.time_index;
    return j;
}

[[noreturn]] void schema_error(const std::string& path, int line, const std::string& what) {
    throw IoError(path + " line " + std::to_string(line) + ": " + what);
}

DatasetRow row_from_json(const json& j, const std::string& path, int line) {
    if (!j.is_object()) schema_error(path, line, "expected an object");
    try {
        if (j.at("v").get<int>() != 1) schema_error(path, line, "unsupported schema version");
        DatasetRow row;
        row.label = sim::shape_class_from_string(j.at("label").get<std::string>());
        const auto radii = j.at("radii").get<std::vector<double>>();
        if (radii.empty()) schema_error(path, line, "empty radii");
        row.radii_mean = Eigen::Map<const Eigen::VectorXd>(
            radii.data(), static_cast<Eigen::Index>(radii.size()));
        const json& f = j.at("features");
        row.features.elongation = f.at("elongation").get<double>();
        row.features.rectangularity = f.at("rectangularity").get<double>();
        row.features.circularity = f.at("circularity").get<double>();
        row.features.solidity = f.at("solidity").get<double>();
        row.features.compactness = f.at("compactness").get<double>();
        row.features.area = f.at("area").get<double>();
        row.scenario_seed = j.at("seed").get<std::uint64_t>();
        row.time_index = j.at("step").get<int>();
        return row;
    } catch (const json::exception& e) {
        schema_error(path, line, e.what());
    } catch (const InvalidConfig& e) {
        schema_error(path, line, e.what());
    }
}

double median3(std::array<double, 3> v) {
    std::sort(v.begin(), v.end());
    return v[1];
}

gp::Contour row_contour(const DatasetRow& row, bool with_cov) {
    gp::Contour c;
    c.basis_angles = gp::even_basis(static_cast<int>(row.radii_mean.size()));
    c.radii_mean = row.radii_mean;
    if (with_cov) {
        if (!row.radii_cov) throw InvalidConfig("row has no contour covariance");
        c.radii_cov = *row.radii_cov;
    }
    return c;
}

class NnRowClassifier final : public RowClassifier {
public:
    NnRowClassifier(nn::NNModel model, InputMode mode)
        : model_(std::move(model)), mode_(mode) {
        if (mode_ == InputMode::FeatureDistribution) {
            throw InvalidConfig("NN classifiers take plain vectors");
        }
    }
    std::string id() const override {
        return mode_ == InputMode::Features ? "nn-feature" : "nn-contour";
    }
    InputMode mode() const override { return mode_; }
    void prepare(const std::vector<DatasetRow>& rows) override {
        inputs_ = mode_ == InputMode::Features ? feature_matrix(rows) : contour_matrix(rows);
        if (inputs_.rows() != model_.input_dim()) {
            throw DimensionMismatch("dataset input width does not match the model");
        }
    }
    int classify_row(int i) const override {
        return nn::classify(model_, inputs_.col(i)).first;
    }

private:
    nn::NNModel model_;
    InputMode mode_;
    Eigen::MatrixXd inputs_;
};

class BayesRowClassifier final : public RowClassifier {
public:
    BayesRowClassifier(bayes::ClassStats stats, InputMode mode)
        : stats_(std::move(stats)), mode_(mode) {
        if (mode_ == InputMode::Contour) {
            throw InvalidConfig("the Bayesian classifier consumes features");
        }
    }
    std::string id() const override { return "bc"; }
    InputMode mode() const override { return mode_; }
    void prepare(const std::vector<DatasetRow>& rows) override {
        if (mode_ == InputMode::Features) {
            feats_ = feature_matrix(rows);
            return;
        }
        dists_.clear();
        dists_.reserve(rows.size());
        for (const auto& row : rows) {
            try {
                dists_.push_back(
                    feat::ut_propagate(row_contour(row, true), {0.0, 0.0}, 0.0));
            } catch (const Error&) {
                dists_.push_back(std::nullopt);  // flagged at classification time
            }
        }
    }
    int classify_row(int i) const override {
        if (mode_ == InputMode::Features) {
            return bayes::classify(stats_, Eigen::VectorXd(feats_.col(i))).first;
        }
        const auto& d = dists_[static_cast<std::size_t>(i)];
        if (!d) throw DegenerateContour("unusable contour estimate");
        return bayes::classify(stats_, *d).first;
    }

private:
    bayes::ClassStats stats_;
    InputMode mode_;
    Eigen::MatrixXd feats_;
    std::vector<std::optional<feat::FeatureDistribution>> dists_;
};

}  // namespace

void SplitSpec::validate() const {
    if (!(train > 0) || !(val > 0) || !(test > 0)) {
        throw InvalidConfig("split fractions must be positive");
    }
    if (std::abs(train + val + test - 1.0) > 1e-12) {
        throw InvalidConfig("split fractions must sum to 1");
    }
}

std::vector<int> GenConfig::effective_snapshots() const {
    std::vector<int> steps = snapshot_steps;
    if (early_snapshots) steps.push_back(4);
    std::sort(steps.begin(), steps.end());
    steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
    std::erase_if(steps, [&](int s) { return s < 0 || s >= sim.n_steps; });
    return steps;
}

std::vector<DatasetRow> generate_dataset(int per_class, const GenConfig& config,
                                         std::uint64_t seed, GenStats* stats_out) {
    if (per_class < 1) throw InvalidConfig("per_class must be positive");
    const std::vector<int> steps = config.effective_snapshots();
    if (steps.empty()) throw InvalidConfig("no snapshot steps fall inside the scenario");
    const int rps = static_cast<int>(steps.size());
    const int jobs = std::max(1, config.jobs);

    GenStats gstats;
    std::vector<DatasetRow> all;
    all.reserve(static_cast<std::size_t>(per_class) * sim::kNumClasses);

    for (int c = 0; c < sim::kNumClasses; ++c) {
        const auto cls = static_cast<sim::ShapeClass>(c);
        std::vector<DatasetRow> rows;
        rows.reserve(static_cast<std::size_t>(per_class) + rps);
        int next_index = 0;
        const int max_scenarios = 64 + 4 * (per_class / rps + 1);

        while (static_cast<int>(rows.size()) < per_class) {
            if (next_index >= max_scenarios) {
                throw DegenerateContour(
                    std::string("dataset generation failed to converge for class ") +
                    sim::to_string(cls));
            }
            const int need = per_class - static_cast<int>(rows.size());
            const int batch = std::min((need + rps - 1) / rps, max_scenarios - next_index);
            std::vector<std::vector<DatasetRow>> results(static_cast<std::size_t>(batch));
            std::vector<int> failures(static_cast<std::size_t>(batch), 0);

            auto work = [&](int j) {
                results[static_cast<std::size_t>(j)] =
                    run_scenario(cls, scenario_seed(seed, c, next_index + j), config, steps,
                                 failures[static_cast<std::size_t>(j)]);
            };
            if (jobs == 1 || batch == 1) {
                for (int j = 0; j < batch; ++j) work(j);
            } else {
                std::vector<std::thread> pool;
                const int n_threads = std::min(jobs, batch);
                pool.reserve(static_cast<std::size_t>(n_threads));
                for (int t = 0; t < n_threads; ++t) {
                    pool.emplace_back([&, t] {
                        for (int j = t; j < batch; j += n_threads) work(j);
                    });
                }
                for (auto& th : pool) th.join();
            }
            for (int j = 0; j < batch; ++j) {
                ++gstats.scenarios;
                gstats.failed_rows += failures[static_cast<std::size_t>(j)];
                auto& r = results[static_cast<std::size_t>(j)];
                std::move(r.begin(), r.end(), std::back_inserter(rows));
            }
            next_index += batch;
        }
        rows.resize(static_cast<std::size_t>(per_class));
        std::move(rows.begin(), rows.end(), std::back_inserter(all));
    }
    if (stats_out != nullptr) *stats_out = gstats;
    return all;
}

Split split(const std::vector<DatasetRow>& rows, const SplitSpec& spec, std::uint64_t seed) {
    spec.validate();
    std::array<std::vector<int>, sim::kNumClasses> by_class;
    for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
        by_class[static_cast<std::size_t>(static_cast<int>(rows[static_cast<std::size_t>(i)].label))]
            .push_back(i);
    }

    Split out;
    std::mt19937_64 rng(seed);
    for (int c = 0; c < sim::kNumClasses; ++c) {
        auto& idx = by_class[static_cast<std::size_t>(c)];
        if (idx.empty()) continue;
        std::shuffle(idx.begin(), idx.end(), rng);
        const auto counts = largest_remainder_counts(
            static_cast<int>(idx.size()), {spec.train, spec.val, spec.test});
        if (counts[0] == 0 || counts[1] == 0 || counts[2] == 0) {
            throw InsufficientSamples(std::string("class ") +
                                      sim::to_string(static_cast<sim::ShapeClass>(c)) +
                                      " is too small for non-empty splits");
        }
        int pos = 0;
        for (int part = 0; part < 3; ++part) {
            auto& dst = part == 0 ? out.train : part == 1 ? out.val : out.test;
            for (int k = 0; k < counts[static_cast<std::size_t>(part)]; ++k) {
                dst.push_back(rows[static_cast<std::size_t>(idx[static_cast<std::size_t>(pos++)])]);
            }
        }
    }
    return out;
}

std::string to_string(InputMode mode) {
    switch (mode) {
        case InputMode::Features: return "features";
        case InputMode::Contour: return "contour";
        case InputMode::FeatureDistribution: return "feature-distribution";
    }
    throw InvalidConfig("unknown input mode");
}

InputMode input_mode_from_string(const std::string& s) {
    if (s == "features") return InputMode::Features;
    if (s == "contour") return InputMode::Contour;
    if (s == "feature-distribution") return InputMode::FeatureDistribution;
    throw InvalidConfig("unknown input mode: " + s);
}

std::unique_ptr<RowClassifier> make_nn_classifier(nn::NNModel model, InputMode mode) {
    return std::make_unique<NnRowClassifier>(std::move(model), mode);
}

std::unique_ptr<RowClassifier> make_bayes_classifier(bayes::ClassStats stats, InputMode mode) {
    return std::make_unique<BayesRowClassifier>(std::move(stats), mode);
}

EvalReport evaluate(RowClassifier& classifier, const std::vector<DatasetRow>& test_rows) {
    if (test_rows.empty()) throw InvalidConfig("empty test set");
    classifier.prepare(test_rows);
    const int n = static_cast<int>(test_rows.size());
    std::vector<int> pred(static_cast<std::size_t>(n), -1);

    EvalReport report;
    report.classifier_id = classifier.id();
    report.mode = classifier.mode();
    report.n_test = n;

    using clock = std::chrono::steady_clock;
    for (int pass = 0; pass < 3; ++pass) {
        const auto t0 = clock::now();
        for (int i = 0; i < n; ++i) {
            try {
                pred[static_cast<std::size_t>(i)] = classifier.classify_row(i);
            } catch (const Error&) {
                pred[static_cast<std::size_t>(i)] = -1;
            }
        }
        const auto t1 = clock::now();
        report.pass_time_s[static_cast<std::size_t>(pass)] =
            std::chrono::duration<double>(t1 - t0).count() / n;
    }
    report.mean_time_s = median3(report.pass_time_s);

    int correct = 0;
    for (int i = 0; i < n; ++i) {
        const int truth = static_cast<int>(test_rows[static_cast<std::size_t>(i)].label);
        const int p = pred[static_cast<std::size_t>(i)];
        if (p < 0) {
            ++report.flagged;
            continue;
        }
        ++report.confusion[static_cast<std::size_t>(truth)][static_cast<std::size_t>(p)];
        if (p == truth) ++correct;
    }
    report.accuracy = static_cast<double>(correct) / n;
    return report;
}

void save_dataset(const std::vector<DatasetRow>& rows, const std::string& path) {
    std::ostringstream main_out;
    std::ostringstream cov_out;
    bool any_cov = false;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        main_out << row_to_json(rows[i]).dump() << '\n';
        if (rows[i].radii_cov) {
            any_cov = true;
            const auto& m = *rows[i].radii_cov;
            std::vector<double> flat;
            flat.reserve(static_cast<std::size_t>(m.size()));
            for (Eigen::Index r = 0; r < m.rows(); ++r) {
                for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
            }
            json j{{"v", 1}, {"index", i}, {"radii_cov", flat}};
            cov_out << j.dump() << '\n';
        }
    }
    io::write_file(path, main_out.str());
    const std::string sidecar = path + ".cov.gz";
    if (any_cov) {
        io::write_file(sidecar, io::gzip_compress(cov_out.str()));
    } else if (io::file_exists(sidecar)) {
        std::filesystem::remove(sidecar);
    }
}

std::vector<DatasetRow> load_dataset(const std::string& path) {
    std::vector<DatasetRow> rows;
    std::istringstream in(io::read_file(path));
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            schema_error(path, line_no, e.what());
        }
        rows.push_back(row_from_json(j, path, line_no));
    }

    const std::string sidecar = path + ".cov.gz";
    if (io::file_exists(sidecar)) {
        std::istringstream cov_in(io::gzip_decompress(io::read_file(sidecar)));
        line_no = 0;
        while (std::getline(cov_in, line)) {
            ++line_no;
            if (line.empty()) continue;
            json j;
            try {
                j = json::parse(line);
                const auto index = j.at("index").get<std::size_t>();
                if (index >= rows.size()) schema_error(sidecar, line_no, "row index out of range");
                const auto flat = j.at("radii_cov").get<std::vector<double>>();
                const auto n = static_cast<Eigen::Index>(rows[index].radii_mean.size());
                if (static_cast<Eigen::Index>(flat.size()) != n * n) {
                    schema_error(sidecar, line_no, "covariance size mismatch");
                }
                Eigen::MatrixXd m(n, n);
                for (Eigen::Index r = 0; r < n; ++r) {
                    for (Eigen::Index c = 0; c < n; ++c) {
                        m(r, c) = flat[static_cast<std::size_t>(r * n + c)];
                    }
                }
                rows[index].radii_cov = std::move(m);
            } catch (const json::exception& e) {
                schema_error(sidecar, line_no, e.what());
            }
        }
    }
    return rows;
}

double feature_audit(const std::vector<DatasetRow>& rows) {
    double worst = 0.0;
    for (const auto& row : rows) {
        const feat::FeatureVector again =
            feat::extract_features(row_contour(row, false), {0.0, 0.0}, 0.0);
        worst = std::max(worst, (again.to_vector() - row.features.to_vector())
                                    .cwiseAbs()
                                    .maxCoeff());
    }
    return worst;
}

Eigen::MatrixXd feature_matrix(const std::vector<DatasetRow>& rows) {
    Eigen::MatrixXd m(feat::kFeatureDim, static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        m.col(static_cast<Eigen::Index>(i)) = rows[i].features.to_vector();
    }
    return m;
}

Eigen::MatrixXd contour_matrix(const std::vector<DatasetRow>& rows) {
    if (rows.empty()) return {};
    const Eigen::Index n = rows.front().radii_mean.size();
    Eigen::MatrixXd m(n, static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].radii_mean.size() != n) throw DimensionMismatch("ragged contour widths");
        m.col(static_cast<Eigen::Index>(i)) = rows[i].radii_mean;
    }
    return m;
}

std::vector<int> label_vector(const std::vector<DatasetRow>& rows) {
    std::vector<int> labels;
    labels.reserve(rows.size());
    for (const auto& row : rows) labels.push_back(static_cast<int>(row.label));
    return labels;
}

}  // namespace shapetrack::pipeline
