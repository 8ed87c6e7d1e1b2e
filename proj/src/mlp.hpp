#pragma once

#include "dataset.hpp"
#include "nn_common.hpp"
#include "three_phase.hpp"

#include <Eigen/Dense>

#include <cstdint>

namespace gridfdd {

/// Dense 6 -> 64 -> 128 -> 3 regressor mapping instantaneous per-unit
/// (v_g, i_inv) measurements to the PWM reference voltage. Rectifier hidden
/// activations, hyperbolic-tangent output, so every output lies in (-1, 1).
/// Trained only on normal-operation samples; it supplies the corrected
/// reference once a fault is detected.
class MlpModel {
public:
    struct Dims {
        int input = 6;
        int hidden1 = 64;
        int hidden2 = 128;
        int output = 3;
    };

    MlpModel() : MlpModel(Dims{}) {}
    explicit MlpModel(const Dims& dims);

    void init_weights(std::uint64_t seed);

    const Dims& dims() const { return dims_; }
    Eigen::VectorXd& params() { return params_; }
    const Eigen::VectorXd& params() const { return params_; }
    Eigen::Index param_count() const { return params_.size(); }

    std::uint64_t seed = 0;
    int trained_epochs = 0;

    Eigen::Map<const Eigen::MatrixXd> w1() const { return view(off_.w1, dims_.hidden1, dims_.input); }
    Eigen::Map<const Eigen::VectorXd> b1() const { return vec(off_.b1, dims_.hidden1); }
    Eigen::Map<const Eigen::MatrixXd> w2() const { return view(off_.w2, dims_.hidden2, dims_.hidden1); }
    Eigen::Map<const Eigen::VectorXd> b2() const { return vec(off_.b2, dims_.hidden2); }
    Eigen::Map<const Eigen::MatrixXd> w3() const { return view(off_.w3, dims_.output, dims_.hidden2); }
    Eigen::Map<const Eigen::VectorXd> b3() const { return vec(off_.b3, dims_.output); }

    struct Offsets {
        Eigen::Index w1, b1, w2, b2, w3, b3, total;
    };
    const Offsets& offsets() const { return off_; }

private:
    Eigen::Map<const Eigen::MatrixXd> view(Eigen::Index off, Eigen::Index r, Eigen::Index c) const {
        return {params_.data() + off, r, c};
    }
    Eigen::Map<const Eigen::VectorXd> vec(Eigen::Index off, Eigen::Index n) const {
        return {params_.data() + off, n};
    }

    Dims dims_;
    Offsets off_{};
    Eigen::VectorXd params_;
};

struct MlpCache {
    Eigen::MatrixXd input;  // batch x input
    Eigen::MatrixXd a1, a2; // post-activation hidden layers
    Eigen::MatrixXd out;    // tanh outputs
};

/// Batched forward: X is batch x input. Throws ContractError on shape or
/// non-finite input.
Eigen::MatrixXd mlp_forward_batch(const MlpModel& m, const Eigen::MatrixXd& X,
                                  MlpCache* cache = nullptr);

/// Single-sample forward for the control path.
ThreePhase mlp_forward(const MlpModel& m, const ThreePhase& v_g_pu,
                       const ThreePhase& i_inv_pu);

/// Flat parameter gradients from a cached forward pass.
Eigen::VectorXd mlp_backward(const MlpModel& m, const MlpCache& cache,
                             const Eigen::MatrixXd& grad_out);

/// Instantaneous training pairs drawn from the newest sample of each window:
/// (v_g, i_inv) -> v_star. Every window must be labeled NORMAL; a stray fault
/// window is a contract violation (the filter is the caller's job).
struct MlpTrainResult {
    MlpModel model;
    TrainHistory history;
};
MlpTrainResult train_mlp(const Dataset& normal_train, const Dataset& normal_val,
                         const TrainConfig& cfg, const MlpModel::Dims& dims = {});

} // namespace gridfdd
