#include "mlp.hpp"

#include "errors.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gridfdd {

namespace {
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
} // namespace

MlpModel::MlpModel(const Dims& dims) : dims_(dims) {
    off_.w1 = 0;
    off_.b1 = off_.w1 + static_cast<Index>(dims.hidden1) * dims.input;
    off_.w2 = off_.b1 + dims.hidden1;
    off_.b2 = off_.w2 + static_cast<Index>(dims.hidden2) * dims.hidden1;
    off_.w3 = off_.b2 + dims.hidden2;
    off_.b3 = off_.w3 + static_cast<Index>(dims.output) * dims.hidden2;
    off_.total = off_.b3 + dims.output;
    params_ = VectorXd::Zero(off_.total);
}

void MlpModel::init_weights(std::uint64_t s) {
    seed = s;
    Rng rng(s);
    auto fill = [&](Index off, Index rows, Index cols, Index fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (Index i = 0; i < rows * cols; ++i)
            params_[off + i] = rng.uniform(-bound, bound);
    };
    fill(off_.w1, dims_.hidden1, dims_.input, dims_.input);
    fill(off_.w2, dims_.hidden2, dims_.hidden1, dims_.hidden1);
    fill(off_.w3, dims_.output, dims_.hidden2, dims_.hidden2);
    // biases stay zero
}

Eigen::MatrixXd mlp_forward_batch(const MlpModel& m, const MatrixXd& X, MlpCache* cache) {
    if (X.cols() != m.dims().input)
        throw ContractError("mlp_forward: input dimension mismatch");
    if (!X.allFinite()) throw ContractError("mlp_forward: non-finite input");

    MatrixXd z1 = X * m.w1().transpose();
    z1.rowwise() += m.b1().transpose();
    const MatrixXd a1 = z1.cwiseMax(0.0);

    MatrixXd z2 = a1 * m.w2().transpose();
    z2.rowwise() += m.b2().transpose();
    const MatrixXd a2 = z2.cwiseMax(0.0);

    MatrixXd z3 = a2 * m.w3().transpose();
    z3.rowwise() += m.b3().transpose();
    const MatrixXd out = z3.array().tanh().matrix();

    if (cache) {
        cache->input = X;
        cache->a1 = a1;
        cache->a2 = a2;
        cache->out = out;
    }
    return out;
}

ThreePhase mlp_forward(const MlpModel& m, const ThreePhase& v_g_pu, const ThreePhase& i_inv_pu) {
    MatrixXd x(1, 6);
    x << v_g_pu.a, v_g_pu.b, v_g_pu.c, i_inv_pu.a, i_inv_pu.b, i_inv_pu.c;
    const MatrixXd y = mlp_forward_batch(m, x);
    return {y(0, 0), y(0, 1), y(0, 2)};
}

Eigen::VectorXd mlp_backward(const MlpModel& m, const MlpCache& cache,
                             const MatrixXd& grad_out) {
    if (cache.out.rows() != grad_out.rows() || cache.out.cols() != grad_out.cols())
        throw ContractError("mlp_backward: grad_out shape does not match cache");

    const auto& off = m.offsets();
    VectorXd flat = VectorXd::Zero(m.param_count());

    // d/dz of tanh output.
    const MatrixXd dz3 = (grad_out.array() * (1.0 - cache.out.array().square())).matrix();
    Eigen::Map<MatrixXd>(flat.data() + off.w3, m.dims().output, m.dims().hidden2) =
        dz3.transpose() * cache.a2;
    Eigen::Map<VectorXd>(flat.data() + off.b3, m.dims().output) =
        dz3.colwise().sum().transpose();

    const MatrixXd da2 = dz3 * m.w3();
    const MatrixXd dz2 = (da2.array() * (cache.a2.array() > 0.0).cast<double>()).matrix();
    Eigen::Map<MatrixXd>(flat.data() + off.w2, m.dims().hidden2, m.dims().hidden1) =
        dz2.transpose() * cache.a1;
    Eigen::Map<VectorXd>(flat.data() + off.b2, m.dims().hidden2) =
        dz2.colwise().sum().transpose();

    const MatrixXd da1 = dz2 * m.w2();
    const MatrixXd dz1 = (da1.array() * (cache.a1.array() > 0.0).cast<double>()).matrix();
    Eigen::Map<MatrixXd>(flat.data() + off.w1, m.dims().hidden1, m.dims().input) =
        dz1.transpose() * cache.input;
    Eigen::Map<VectorXd>(flat.data() + off.b1, m.dims().hidden1) =
        dz1.colwise().sum().transpose();

    return flat;
}

namespace {

// (v_g, i_inv) and v_star of the newest sample in each window.
void fill_pairs(const Dataset& data, const std::vector<std::size_t>& order, std::size_t first,
                std::size_t count, MatrixXd& X, MatrixXd& Y) {
    X.resize(static_cast<Index>(count), 6);
    Y.resize(static_cast<Index>(count), 3);
    for (std::size_t b = 0; b < count; ++b) {
        const std::size_t w = order[first + b];
        const std::size_t row = data.starts()[w] + data.lookback() - 1;
        const double* r = data.trace().row(row);
        for (int j = 0; j < 6; ++j) X(static_cast<Index>(b), j) = r[j];
        for (int j = 0; j < 3; ++j) Y(static_cast<Index>(b), j) = r[6 + j];
    }
}

void require_all_normal(const Dataset& d, const char* which) {
    for (std::size_t w = 0; w < d.size(); ++w)
        if (d.label(w) != FaultClass::NORMAL)
            throw ContractError(std::string("train_mlp: ") + which +
                                " set contains a non-normal window (filter first)");
}

} // namespace

MlpTrainResult train_mlp(const Dataset& normal_train, const Dataset& normal_val,
                         const TrainConfig& cfg, const MlpModel::Dims& dims) {
    cfg.validate();
    if (normal_train.size() == 0 || normal_val.size() == 0)
        throw ContractError("train_mlp: train and validation sets must be nonempty");
    require_all_normal(normal_train, "training");
    require_all_normal(normal_val, "validation");

    MlpModel model(dims);
    model.init_weights(cfg.seed);
    AdamState adam(model.param_count());
    Rng rng(cfg.seed ^ 0x5eedf00dULL);

    std::vector<std::size_t> order(normal_train.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::size_t> val_order(normal_val.size());
    std::iota(val_order.begin(), val_order.end(), 0);

    MatrixXd X, Y;
    MlpCache cache;

    auto validation_mse = [&]() {
        double acc = 0.0;
        std::size_t done = 0;
        while (done < normal_val.size()) {
            const std::size_t n = std::min<std::size_t>(1024, normal_val.size() - done);
            fill_pairs(normal_val, val_order, done, n, X, Y);
            acc += (mlp_forward_batch(model, X) - Y).array().square().sum();
            done += n;
        }
        return acc / static_cast<double>(normal_val.size() * 3);
    };

    TrainHistory history;
    VectorXd best_params = model.params();
    double best_val = std::numeric_limits<double>::infinity();
    int best_epoch = 0;
    int wait = 0;
    long step = 0;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        rng.shuffle(order);
        double train_acc = 0.0;
        for (std::size_t first = 0; first < normal_train.size();
             first += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t n =
                std::min<std::size_t>(cfg.batch_size, normal_train.size() - first);
            fill_pairs(normal_train, order, first, n, X, Y);
            const MatrixXd pred = mlp_forward_batch(model, X, &cache);
            const double loss =
                (pred - Y).array().square().sum() / static_cast<double>(n * 3);
            if (!std::isfinite(loss))
                throw TrainingError("train_mlp: non-finite loss at epoch " +
                                    std::to_string(epoch) + ", batch " +
                                    std::to_string(first / cfg.batch_size));
            train_acc += loss * static_cast<double>(n);

            const MatrixXd grad_out =
                2.0 * (pred - Y) / static_cast<double>(pred.rows() * pred.cols());
            const VectorXd grads = mlp_backward(model, cache, grad_out);
            adam_step(model.params(), grads, adam, cfg, ++step);
        }

        history.push_back({epoch, train_acc / static_cast<double>(normal_train.size()),
                           validation_mse()});

        if (history.back().val_loss < best_val) {
            best_val = history.back().val_loss;
            best_params = model.params();
            best_epoch = epoch;
            wait = 0;
        } else if (++wait >= cfg.patience) {
            break;
        }
    }

    model.params() = best_params;
    model.trained_epochs = best_epoch;
    model.seed = cfg.seed;
    return {std::move(model), std::move(history)};
}

} // namespace gridfdd
