#pragma once

#include "dataset.hpp"
#include "nn_common.hpp"
#include "three_phase.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace gridfdd {

/// Two stacked LSTM layers (9 -> 32 -> 64 by default) and a linear head
/// (64 -> 3) predicting the next-step PWM reference voltage from a
/// lookback window of (v_g, i_inv, v_star) per-unit samples.
///
/// Cell equations per layer, gate order i, f, g, o:
///   z = W x_t + U h_{t-1} + b
///   i = sigm(z_i), f = sigm(z_f), g = tanh(z_g), o = sigm(z_o)
///   c_t = f . c_{t-1} + i . g,  h_t = o . tanh(c_t)
/// Parameters live in one flat vector (order W1 U1 b1 W2 U2 b2 Wh bh,
/// each matrix column-major) so the optimizer and checkpoints treat every
/// model the same way.
class LstmModel {
public:
    struct Dims {
        int input = 9;
        int hidden1 = 32;
        int hidden2 = 64;
        int output = 3;
        int lookback = 20;
    };

    LstmModel() : LstmModel(Dims{}) {}
    explicit LstmModel(const Dims& dims);

    /// Seeded uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weights, zero biases.
    void init_weights(std::uint64_t seed);

    const Dims& dims() const { return dims_; }
    Eigen::VectorXd& params() { return params_; }
    const Eigen::VectorXd& params() const { return params_; }
    Eigen::Index param_count() const { return params_.size(); }

    std::uint64_t seed = 0;
    int trained_epochs = 0;

    // Column-major views into the flat parameter vector.
    Eigen::Map<const Eigen::MatrixXd> w1() const { return view(off_.w1, 4 * dims_.hidden1, dims_.input); }
    Eigen::Map<const Eigen::MatrixXd> u1() const { return view(off_.u1, 4 * dims_.hidden1, dims_.hidden1); }
    Eigen::Map<const Eigen::VectorXd> b1() const { return vec(off_.b1, 4 * dims_.hidden1); }
    Eigen::Map<const Eigen::MatrixXd> w2() const { return view(off_.w2, 4 * dims_.hidden2, dims_.hidden1); }
    Eigen::Map<const Eigen::MatrixXd> u2() const { return view(off_.u2, 4 * dims_.hidden2, dims_.hidden2); }
    Eigen::Map<const Eigen::VectorXd> b2() const { return vec(off_.b2, 4 * dims_.hidden2); }
    Eigen::Map<const Eigen::MatrixXd> wh() const { return view(off_.wh, dims_.output, dims_.hidden2); }
    Eigen::Map<const Eigen::VectorXd> bh() const { return vec(off_.bh, dims_.output); }

    struct Offsets {
        Eigen::Index w1, u1, b1, w2, u2, b2, wh, bh, total;
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

/// Activations of one forward pass, kept for backpropagation through time.
struct LstmCache {
    struct Layer {
        // One entry per timestep; each matrix is batch x hidden.
        std::vector<Eigen::MatrixXd> gate_i, gate_f, gate_g, gate_o;
        std::vector<Eigen::MatrixXd> cell, tanh_cell, hidden;
    };
    Layer layer1, layer2;
    Eigen::MatrixXd inputs; // batch x (lookback * input), as passed in
    Eigen::Index batch = 0;
};

/// Batched forward pass. X holds one window per row, flattened time-major
/// (sample t occupies columns [t*input, (t+1)*input)). Returns batch x output
/// predictions. Throws ContractError on a column-count mismatch.
Eigen::MatrixXd lstm_forward_batch(const LstmModel& m, const Eigen::MatrixXd& X,
                                   LstmCache* cache = nullptr);

/// Single-window convenience wrapper; window is lookback x input row-major.
ThreePhase lstm_forward(const LstmModel& m, const double* window,
                        LstmCache* cache = nullptr);

/// Gradients of the cached forward pass for every parameter, flat, in the
/// model's parameter layout. grad_out is batch x output (dLoss/dY).
/// Throws ContractError when the cache does not match grad_out.
Eigen::VectorXd lstm_backward(const LstmModel& m, const LstmCache& cache,
                              const Eigen::MatrixXd& grad_out);

/// Minibatch Adam on MSE with early stopping on validation MSE; returns the
/// best-validation model. Throws TrainingError (naming epoch and batch) when
/// the loss leaves the finite range.
struct LstmTrainResult {
    LstmModel model;
    TrainHistory history;
};
LstmTrainResult train_lstm(const Dataset& train, const Dataset& val, const TrainConfig& cfg,
                           const LstmModel::Dims& dims = {});

/// Next-step predictions over a whole trace: entry j - lookback predicts the
/// v_star of sample j, for j in [lookback, trace size). Batched internally.
std::vector<ThreePhase> predict_trace(const LstmModel& m, const RecordedTrace& trace,
                                      std::size_t batch = 512);

} // namespace gridfdd
