#include "shapetrack/nn.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace shapetrack::nn {

namespace {

Eigen::MatrixXd softmax_cols(Eigen::MatrixXd z) {
    for (Eigen::Index c = 0; c < z.cols(); ++c) {
        auto col = z.col(c);
        col.array() -= col.maxCoeff();
        col = col.array().exp();
        col /= col.sum();
    }
    return z;
}

/// All layer activations for a batch; out.back() is the network output.
std::vector<Eigen::MatrixXd> forward_layers(const NNModel& model,
                                            const Eigen::MatrixXd& inputs) {
    if (inputs.rows() != model.input_dim()) {
        throw DimensionMismatch("input dimension mismatch");
    }
    std::vector<Eigen::MatrixXd> acts;
    acts.reserve(model.num_layers() + 1);
    acts.push_back((inputs.colwise() - model.norm_shift).array().colwise() /
                   model.norm_scale.array());
    for (int l = 0; l < model.num_layers(); ++l) {
        Eigen::MatrixXd z = (model.weights[l] * acts.back()).colwise() + model.biases[l];
        const bool last = l + 1 == model.num_layers();
        if (!last && model.tanh_hidden) z = z.array().tanh();
        if (last && model.softmax_output) z = softmax_cols(std::move(z));
        acts.push_back(std::move(z));
    }
    return acts;
}

int argmax_lowest(const Eigen::VectorXd& v) {
    int best = 0;
    for (int i = 1; i < v.size(); ++i) {
        if (v(i) > v(best)) best = i;
    }
    return best;
}

}  // namespace

int NNModel::param_count() const {
    int p = 0;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        p += layer_sizes[l + 1] * (layer_sizes[l] + 1);
    }
    return p;
}

Eigen::VectorXd NNModel::pack_params() const {
    Eigen::VectorXd params(param_count());
    Eigen::Index k = 0;
    for (int l = 0; l < num_layers(); ++l) {
        const auto& w = weights[l];
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            for (Eigen::Index j = 0; j < w.cols(); ++j) params(k++) = w(i, j);
        }
        params.segment(k, biases[l].size()) = biases[l];
        k += biases[l].size();
    }
    return params;
}

void NNModel::unpack_params(const Eigen::VectorXd& params) {
    if (params.size() != param_count()) throw DimensionMismatch("parameter vector length");
    Eigen::Index k = 0;
    for (int l = 0; l < num_layers(); ++l) {
        auto& w = weights[l];
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = params(k++);
        }
        biases[l] = params.segment(k, biases[l].size());
        k += biases[l].size();
    }
}

void NNModel::validate() const {
    if (layer_sizes.size() < 2) throw InvalidConfig("need at least two layers");
    for (int s : layer_sizes) {
        if (s < 1) throw InvalidConfig("non-positive layer size");
    }
    if (weights.size() != layer_sizes.size() - 1 || biases.size() != weights.size()) {
        throw DimensionMismatch("layer count mismatch");
    }
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (weights[l].rows() != layer_sizes[l + 1] || weights[l].cols() != layer_sizes[l] ||
            biases[l].size() != layer_sizes[l + 1]) {
            throw DimensionMismatch("weight/bias shape mismatch");
        }
        if (!weights[l].allFinite() || !biases[l].allFinite()) {
            throw InvalidConfig("non-finite parameters");
        }
    }
    if (norm_shift.size() != layer_sizes.front() || norm_scale.size() != layer_sizes.front()) {
        throw DimensionMismatch("input_norm length mismatch");
    }
    if (!(norm_scale.array() > 0.0).all()) throw InvalidConfig("input_norm scales must be > 0");
}

void TrainConfig::validate() const {
    if (max_epochs < 1 || patience < 1 || lm_max_retries < 1 ||
        !(lm_damping_init > 0) || !(lm_damping_up > 1.0) ||
        !(lm_damping_down > 0.0 && lm_damping_down < 1.0) || !(lm_damping_max > 0)) {
        throw InvalidConfig("invalid training configuration");
    }
}

NNModel make_model(const std::vector<int>& layer_sizes, std::uint64_t seed) {
    if (layer_sizes.size() < 2) throw InvalidConfig("need at least two layers");
    NNModel m;
    m.layer_sizes = layer_sizes;
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const int fan_in = layer_sizes[l];
        const int fan_out = layer_sizes[l + 1];
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        Eigen::MatrixXd w(fan_out, fan_in);
        for (int i = 0; i < fan_out; ++i) {
            for (int j = 0; j < fan_in; ++j) w(i, j) = dist(rng);
        }
        m.weights.push_back(std::move(w));
        m.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    m.norm_shift = Eigen::VectorXd::Zero(layer_sizes.front());
    m.norm_scale = Eigen::VectorXd::Ones(layer_sizes.front());
    m.validate();
    return m;
}

Eigen::VectorXd forward(const NNModel& model, const Eigen::VectorXd& x) {
    return forward_layers(model, x).back().col(0);
}

Eigen::MatrixXd forward_batch(const NNModel& model, const Eigen::MatrixXd& inputs) {
    return forward_layers(model, inputs).back();
}

double loss(const NNModel& model, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets) {
    if (inputs.cols() == 0) throw DimensionMismatch("empty batch");
    if (targets.rows() != model.output_dim() || targets.cols() != inputs.cols()) {
        throw DimensionMismatch("target shape mismatch");
    }
    const Eigen::MatrixXd out = forward_batch(model, inputs);
    return (targets - out).squaredNorm() / static_cast<double>(inputs.cols());
}

void residual_jacobian_t(const NNModel& model, const Eigen::MatrixXd& inputs,
                         const Eigen::MatrixXd& targets, Eigen::VectorXd& residuals,
                         Eigen::MatrixXd& jacobian_t) {
    if (inputs.cols() == 0) throw DimensionMismatch("empty batch");
    if (targets.rows() != model.output_dim() || targets.cols() != inputs.cols()) {
        throw DimensionMismatch("target shape mismatch");
    }
    const int n_layers = model.num_layers();
    const int n_out = model.output_dim();
    const Eigen::Index n_samples = inputs.cols();
    const int n_params = model.param_count();

    const std::vector<Eigen::MatrixXd> acts = forward_layers(model, inputs);
    const Eigen::MatrixXd& out = acts.back();

    residuals.resize(n_samples * n_out);
    jacobian_t.resize(n_params, n_samples * n_out);

    // Layer parameter offsets within the packed vector.
    std::vector<int> offsets(n_layers);
    for (int l = 0, off = 0; l < n_layers; ++l) {
        offsets[l] = off;
        off += model.layer_sizes[l + 1] * (model.layer_sizes[l] + 1);
    }

    std::vector<Eigen::VectorXd> delta(n_layers);
    for (Eigen::Index s = 0; s < n_samples; ++s) {
        for (int o = 0; o < n_out; ++o) {
            const Eigen::Index row = s * n_out + o;
            residuals(row) = targets(o, s) - out(o, s);
            auto col = jacobian_t.col(row);

            // Seed with d f_o / d z_last, then backpropagate; the residual
            // is y - f, hence the negated gradients below.
            if (model.softmax_output) {
                delta[n_layers - 1] = -out(o, s) * out.col(s);
                delta[n_layers - 1](o) += out(o, s);
            } else {
                delta[n_layers - 1] = Eigen::VectorXd::Zero(n_out);
                delta[n_layers - 1](o) = 1.0;
            }
            for (int l = n_layers - 2; l >= 0; --l) {
                delta[l] = model.weights[l + 1].transpose() * delta[l + 1];
                if (model.tanh_hidden) {
                    delta[l].array() *= 1.0 - acts[l + 1].col(s).array().square();
                }
            }
            for (int l = 0; l < n_layers; ++l) {
                const int rows = model.layer_sizes[l + 1];
                const int cols = model.layer_sizes[l];
                double* base = col.data() + offsets[l];
                const Eigen::VectorXd& d = delta[l];
                const auto a_prev = acts[l].col(s);
                for (int i = 0; i < rows; ++i) {
                    const double di = -d(i);
                    for (int j = 0; j < cols; ++j) base[i * cols + j] = di * a_prev(j);
                    base[rows * cols + i] = di;
                }
            }
        }
    }
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> residual_jacobian(const NNModel& model,
                                                              const Eigen::MatrixXd& inputs,
                                                              const Eigen::MatrixXd& targets) {
    Eigen::VectorXd r;
    Eigen::MatrixXd jt;
    residual_jacobian_t(model, inputs, targets, r, jt);
    return {std::move(r), jt.transpose()};
}

LmResult lm_epoch(const NNModel& model, const Eigen::MatrixXd& inputs,
                  const Eigen::MatrixXd& targets, double damping, const TrainConfig& config) {
    config.validate();
    if (!(damping > 0)) throw InvalidConfig("damping must be positive");

    Eigen::VectorXd r;
    Eigen::MatrixXd jt;
    residual_jacobian_t(model, inputs, targets, r, jt);
    const double loss0 = r.squaredNorm() / static_cast<double>(inputs.cols());

    const int p = model.param_count();
    Eigen::MatrixXd normal(p, p);
    normal.setZero();
    normal.selfadjointView<Eigen::Lower>().rankUpdate(jt);  // J^T J via syrk
    // jt holds d r / d params with r = y - f; the descent direction flips it.
    const Eigen::VectorXd rhs = -(jt * r);
    const Eigen::VectorXd params0 = model.pack_params();

    LmResult res;
    res.model = model;
    res.damping = damping;
    res.loss = loss0;

    Eigen::MatrixXd damped(p, p);
    NNModel candidate = model;
    for (int attempt = 0; attempt < config.lm_max_retries; ++attempt) {
        if (damping > config.lm_damping_max) {
            throw SingularNormalEquations("LM damping exceeded its ceiling");
        }
        damped = normal;
        damped.diagonal().array() += damping;
        const Eigen::VectorXd step =
            damped.selfadjointView<Eigen::Lower>().llt().solve(rhs);
        res.retries = attempt + 1;
        if (step.allFinite()) {
            candidate.unpack_params(params0 + step);
            const double cand_loss = loss(candidate, inputs, targets);
            if (cand_loss < loss0) {
                res.model = candidate;
                res.damping = std::max(damping * config.lm_damping_down, 1e-15);
                res.loss = cand_loss;
                res.accepted = true;
                return res;
            }
        }
        damping *= config.lm_damping_up;
        res.damping = damping;
    }
    return res;  // no accepted step this epoch; model unchanged
}

std::pair<NNModel, TrainReport> train(const std::vector<int>& layer_sizes,
                                      const Eigen::MatrixXd& train_inputs,
                                      const std::vector<int>& train_labels,
                                      const Eigen::MatrixXd& val_inputs,
                                      const std::vector<int>& val_labels,
                                      const TrainConfig& config) {
    config.validate();
    if (layer_sizes.size() < 2) throw InvalidConfig("need at least two layers");
    const int n_classes = layer_sizes.back();
    if (train_inputs.cols() == 0 || val_inputs.cols() == 0) {
        throw InvalidConfig("empty train or validation set");
    }
    if (static_cast<Eigen::Index>(train_labels.size()) != train_inputs.cols() ||
        static_cast<Eigen::Index>(val_labels.size()) != val_inputs.cols()) {
        throw DimensionMismatch("label count mismatch");
    }
    for (int split = 0; split < 2; ++split) {
        const auto& labels = split == 0 ? train_labels : val_labels;
        std::vector<int> count(n_classes, 0);
        for (int y : labels) {
            if (y < 0 || y >= n_classes) throw InvalidConfig("label out of range");
            ++count[y];
        }
        for (int c : count) {
            if (c == 0) throw InvalidConfig("every class needs samples in both splits");
        }
    }

    NNModel model = make_model(layer_sizes, config.rng_seed);
    model.norm_shift = train_inputs.rowwise().mean();
    const Eigen::VectorXd var =
        (train_inputs.colwise() - model.norm_shift).array().square().rowwise().mean();
    model.norm_scale = var.cwiseSqrt().cwiseMax(1e-12);

    const Eigen::MatrixXd train_targets = one_hot(train_labels, n_classes);
    const Eigen::MatrixXd val_targets = one_hot(val_labels, n_classes);

    TrainReport report;
    NNModel best = model;
    double best_acc = -1.0;
    double damping = config.lm_damping_init;
    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        LmResult res = lm_epoch(model, train_inputs, train_targets, damping, config);
        model = std::move(res.model);
        damping = res.damping;
        report.train_loss.push_back(res.loss);
        report.val_loss.push_back(loss(model, val_inputs, val_targets));
        const double val_acc = accuracy(model, val_inputs, val_labels);
        report.val_accuracy.push_back(val_acc);
        if (val_acc > best_acc) {
            best_acc = val_acc;
            report.best_epoch = epoch;
            best = model;
        }
        if (epoch - report.best_epoch >= config.patience) {
            report.stop_reason = "patience";
            break;
        }
    }
    if (report.stop_reason.empty()) report.stop_reason = "max_epochs";
    return {std::move(best), std::move(report)};
}

std::pair<int, Eigen::VectorXd> classify(const NNModel& model, const Eigen::VectorXd& x) {
    Eigen::VectorXd probs = forward(model, x);
    return {argmax_lowest(probs), std::move(probs)};
}

Eigen::MatrixXd one_hot(const std::vector<int>& labels, int n_classes) {
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n_classes, static_cast<Eigen::Index>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= n_classes) throw InvalidConfig("label out of range");
        y(labels[i], static_cast<Eigen::Index>(i)) = 1.0;
    }
    return y;
}

double accuracy(const NNModel& model, const Eigen::MatrixXd& inputs,
                const std::vector<int>& labels) {
    if (static_cast<Eigen::Index>(labels.size()) != inputs.cols()) {
        throw DimensionMismatch("label count mismatch");
    }
    if (labels.empty()) throw DimensionMismatch("empty batch");
    const Eigen::MatrixXd out = forward_batch(model, inputs);
    int correct = 0;
    for (Eigen::Index s = 0; s < out.cols(); ++s) {
        if (argmax_lowest(out.col(s)) == labels[s]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(labels.size());
}

}  // namespace shapetrack::nn
