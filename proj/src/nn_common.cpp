#include "nn_common.hpp"

#include "errors.hpp"

#include <cmath>
#include <fstream>

namespace gridfdd {

void TrainConfig::validate() const {
    if (!(learning_rate > 0)) throw ConfigError("train: learning_rate must be > 0");
    if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (max_epochs < 1) throw ConfigError("train: max_epochs must be >= 1");
    if (patience < 1) throw ConfigError("train: patience must be >= 1");
}

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads, AdamState& state,
               const TrainConfig& cfg, long t) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw ContractError("adam_step: shape mismatch");
    if (t < 1) throw ContractError("adam_step: step count starts at 1");

    state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grads;
    state.v = cfg.beta2 * state.v.array().matrix() +
              (1.0 - cfg.beta2) * grads.array().square().matrix();
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    params.array() -= cfg.learning_rate * (state.m.array() / bc1) /
                      ((state.v.array() / bc2).sqrt() + cfg.epsilon);
}

void write_history_csv(const std::string& path, const TrainHistory& history) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << "epoch,train_loss,val_loss\n";
    for (const auto& e : history)
        f << e.epoch << ',' << e.train_loss << ',' << e.val_loss << '\n';
}

namespace {
void check_pair(std::size_t a, std::size_t b, const char* what) {
    if (a == 0) throw ContractError(std::string(what) + ": empty input");
    if (a != b) throw ContractError(std::string(what) + ": length mismatch");
}
} // namespace

double mse(const std::vector<double>& pred, const std::vector<double>& target) {
    check_pair(pred.size(), target.size(), "mse");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        acc += d * d;
    }
    return acc / static_cast<double>(pred.size());
}

double mae(const std::vector<double>& pred, const std::vector<double>& target) {
    check_pair(pred.size(), target.size(), "mae");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) acc += std::fabs(pred[i] - target[i]);
    return acc / static_cast<double>(pred.size());
}

ConfusionMatrix confusion_matrix(const std::vector<FaultClass>& preds,
                                 const std::vector<FaultClass>& labels) {
    check_pair(preds.size(), labels.size(), "confusion_matrix");
    ConfusionMatrix cm{};
    for (std::size_t i = 0; i < preds.size(); ++i)
        ++cm[static_cast<int>(labels[i])][static_cast<int>(preds[i])];
    return cm;
}

double accuracy(const ConfusionMatrix& cm) {
    std::int64_t diag = 0, total = 0;
    for (int r = 0; r < kNumFaultClasses; ++r)
        for (int c = 0; c < kNumFaultClasses; ++c) {
            total += cm[r][c];
            if (r == c) diag += cm[r][c];
        }
    if (total == 0) throw ContractError("accuracy: empty confusion matrix");
    return static_cast<double>(diag) / static_cast<double>(total);
}

std::array<double, kNumFaultClasses> per_class_recall(const ConfusionMatrix& cm) {
    std::array<double, kNumFaultClasses> out{};
    for (int r = 0; r < kNumFaultClasses; ++r) {
        std::int64_t row = 0;
        for (int c = 0; c < kNumFaultClasses; ++c) row += cm[r][c];
        out[r] = row == 0 ? -1.0 : static_cast<double>(cm[r][r]) / static_cast<double>(row);
    }
    return out;
}

} // namespace gridfdd
