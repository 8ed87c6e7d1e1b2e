#pragma once

#include "fault.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace gridfdd {

/// Optimizer and loop settings shared by both trainable networks.
struct TrainConfig {
    double learning_rate = 1e-4;
    int batch_size = 32;
    int max_epochs = 50;
    int patience = 5; ///< early-stopping patience in epochs
    std::uint64_t seed = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const;
};

/// Adam moment buffers for one flat parameter vector.
struct AdamState {
    Eigen::VectorXd m;
    Eigen::VectorXd v;

    explicit AdamState(Eigen::Index n) : m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}
};

/// One bias-corrected Adam update, step index t starting at 1.
/// Throws ContractError on shape mismatch or t < 1.
void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads, AdamState& state,
               const TrainConfig& cfg, long t);

/// (epoch, train loss, val loss) rows, written next to checkpoints as CSV.
struct EpochStats {
    int epoch;
    double train_loss;
    double val_loss;
};

using TrainHistory = std::vector<EpochStats>;

void write_history_csv(const std::string& path, const TrainHistory& history);

// Metrics. All throw ContractError on empty or mismatched input.
double mse(const std::vector<double>& pred, const std::vector<double>& target);
double mae(const std::vector<double>& pred, const std::vector<double>& target);

/// Row = true class, column = predicted class, enumeration order.
using ConfusionMatrix = std::array<std::array<std::int64_t, kNumFaultClasses>, kNumFaultClasses>;

ConfusionMatrix confusion_matrix(const std::vector<FaultClass>& preds,
                                 const std::vector<FaultClass>& labels);
double accuracy(const ConfusionMatrix& cm);
/// Diagonal over row sum; -1 for classes absent from the labels.
std::array<double, kNumFaultClasses> per_class_recall(const ConfusionMatrix& cm);

} // namespace gridfdd
