#include "lstm.hpp"

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

MatrixXd sigmoid(const MatrixXd& x) {
    return ((-x.array()).exp() + 1.0).inverse().matrix();
}

void init_tensor(double* data, Index rows, Index cols, Index fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Index i = 0; i < rows * cols; ++i) data[i] = rng.uniform(-bound, bound);
}

struct LayerParams {
    Eigen::Map<const MatrixXd> w, u;
    Eigen::Map<const VectorXd> b;
    int hidden;
};

// One timestep of one layer over the whole batch; fills the cache slot.
void cell_forward(const LayerParams& lp, const MatrixXd& x_t, const MatrixXd& h_prev,
                  const MatrixXd& c_prev, LstmCache::Layer& cache) {
    const int h = lp.hidden;
    MatrixXd z = x_t * lp.w.transpose() + h_prev * lp.u.transpose();
    z.rowwise() += lp.b.transpose();

    cache.gate_i.push_back(sigmoid(z.leftCols(h)));
    cache.gate_f.push_back(sigmoid(z.middleCols(h, h)));
    cache.gate_g.push_back(z.middleCols(2 * h, h).array().tanh().matrix());
    cache.gate_o.push_back(sigmoid(z.rightCols(h)));

    const MatrixXd& gi = cache.gate_i.back();
    const MatrixXd& gf = cache.gate_f.back();
    const MatrixXd& gg = cache.gate_g.back();
    const MatrixXd& go = cache.gate_o.back();

    cache.cell.push_back((gf.array() * c_prev.array() + gi.array() * gg.array()).matrix());
    cache.tanh_cell.push_back(cache.cell.back().array().tanh().matrix());
    cache.hidden.push_back((go.array() * cache.tanh_cell.back().array()).matrix());
}

struct LayerGrads {
    MatrixXd dw, du;
    VectorXd db;
};

// Backward through one layer for all timesteps. dh_top[t] is dLoss/dh_t from
// above (head or upper layer); returns dLoss/dx_t per timestep when
// want_dx is set (needed to continue into the layer below).
LayerGrads bptt_layer(const LayerParams& lp, const LstmCache::Layer& cache,
                      const std::vector<MatrixXd>& x_steps, std::vector<MatrixXd>* dx_steps,
                      std::vector<MatrixXd>& dh_top) {
    const int h = lp.hidden;
    const auto steps = static_cast<Index>(cache.hidden.size());
    const Index batch = cache.hidden.front().rows();

    LayerGrads g;
    g.dw = MatrixXd::Zero(4 * h, lp.w.cols());
    g.du = MatrixXd::Zero(4 * h, h);
    g.db = VectorXd::Zero(4 * h);

    MatrixXd dh = MatrixXd::Zero(batch, h);
    MatrixXd dc = MatrixXd::Zero(batch, h);
    MatrixXd dz(batch, 4 * h);

    for (Index t = steps - 1; t >= 0; --t) {
        dh += dh_top[t];

        const MatrixXd& gi = cache.gate_i[t];
        const MatrixXd& gf = cache.gate_f[t];
        const MatrixXd& gg = cache.gate_g[t];
        const MatrixXd& go = cache.gate_o[t];
        const MatrixXd& tc = cache.tanh_cell[t];

        dc.array() += dh.array() * go.array() * (1.0 - tc.array().square());

        const auto c_prev = [&]() -> MatrixXd {
            if (t == 0) return MatrixXd::Zero(batch, h);
            return cache.cell[t - 1];
        }();
        const auto h_prev = [&]() -> MatrixXd {
            if (t == 0) return MatrixXd::Zero(batch, h);
            return cache.hidden[t - 1];
        }();

        dz.leftCols(h) = (dc.array() * gg.array() * gi.array() * (1.0 - gi.array())).matrix();
        dz.middleCols(h, h) =
            (dc.array() * c_prev.array() * gf.array() * (1.0 - gf.array())).matrix();
        dz.middleCols(2 * h, h) = (dc.array() * gi.array() * (1.0 - gg.array().square())).matrix();
        dz.rightCols(h) = (dh.array() * tc.array() * go.array() * (1.0 - go.array())).matrix();

        g.dw.noalias() += dz.transpose() * x_steps[t];
        g.du.noalias() += dz.transpose() * h_prev;
        g.db += dz.colwise().sum().transpose();

        if (dx_steps) (*dx_steps)[t].noalias() = dz * lp.w;

        dh.noalias() = dz * lp.u;
        dc.array() *= gf.array();
    }
    return g;
}

} // namespace

LstmModel::LstmModel(const Dims& dims) : dims_(dims) {
    const Index h1 = dims.hidden1, h2 = dims.hidden2, d = dims.input, o = dims.output;
    off_.w1 = 0;
    off_.u1 = off_.w1 + 4 * h1 * d;
    off_.b1 = off_.u1 + 4 * h1 * h1;
    off_.w2 = off_.b1 + 4 * h1;
    off_.u2 = off_.w2 + 4 * h2 * h1;
    off_.b2 = off_.u2 + 4 * h2 * h2;
    off_.wh = off_.b2 + 4 * h2;
    off_.bh = off_.wh + o * h2;
    off_.total = off_.bh + o;
    params_ = VectorXd::Zero(off_.total);
}

void LstmModel::init_weights(std::uint64_t s) {
    seed = s;
    Rng rng(s);
    double* p = params_.data();
    const Index h1 = dims_.hidden1, h2 = dims_.hidden2, d = dims_.input, o = dims_.output;
    init_tensor(p + off_.w1, 4 * h1, d, d, rng);
    init_tensor(p + off_.u1, 4 * h1, h1, h1, rng);
    std::fill(p + off_.b1, p + off_.b1 + 4 * h1, 0.0);
    init_tensor(p + off_.w2, 4 * h2, h1, h1, rng);
    init_tensor(p + off_.u2, 4 * h2, h2, h2, rng);
    std::fill(p + off_.b2, p + off_.b2 + 4 * h2, 0.0);
    init_tensor(p + off_.wh, o, h2, h2, rng);
    std::fill(p + off_.bh, p + off_.bh + o, 0.0);
}

Eigen::MatrixXd lstm_forward_batch(const LstmModel& m, const MatrixXd& X, LstmCache* cache) {
    const auto& d = m.dims();
    if (X.cols() != static_cast<Index>(d.lookback) * d.input)
        throw ContractError("lstm_forward: window shape mismatch, expected lookback*input columns");

    const Index batch = X.rows();
    LstmCache local;
    LstmCache& c = cache ? *cache : local;
    c = LstmCache{};
    c.batch = batch;
    if (cache) c.inputs = X;

    const LayerParams l1{m.w1(), m.u1(), m.b1(), d.hidden1};
    const LayerParams l2{m.w2(), m.u2(), m.b2(), d.hidden2};

    MatrixXd h1 = MatrixXd::Zero(batch, d.hidden1), c1 = h1;
    MatrixXd h2 = MatrixXd::Zero(batch, d.hidden2), c2 = h2;

    for (int t = 0; t < d.lookback; ++t) {
        cell_forward(l1, X.middleCols(static_cast<Index>(t) * d.input, d.input), h1, c1,
                     c.layer1);
        h1 = c.layer1.hidden.back();
        c1 = c.layer1.cell.back();
        cell_forward(l2, h1, h2, c2, c.layer2);
        h2 = c.layer2.hidden.back();
        c2 = c.layer2.cell.back();
    }

    MatrixXd y = h2 * m.wh().transpose();
    y.rowwise() += m.bh().transpose();
    return y;
}

ThreePhase lstm_forward(const LstmModel& m, const double* window, LstmCache* cache) {
    const auto& d = m.dims();
    Eigen::Map<const Eigen::Matrix<double, 1, Eigen::Dynamic, Eigen::RowMajor>> row(
        window, static_cast<Index>(d.lookback) * d.input);
    const MatrixXd y = lstm_forward_batch(m, row, cache);
    return {y(0, 0), y(0, 1), y(0, 2)};
}

Eigen::VectorXd lstm_backward(const LstmModel& m, const LstmCache& cache,
                              const MatrixXd& grad_out) {
    const auto& d = m.dims();
    if (cache.batch == 0 || cache.inputs.rows() != cache.batch)
        throw ContractError("lstm_backward: cache missing or not produced with caching on");
    if (grad_out.rows() != cache.batch || grad_out.cols() != d.output)
        throw ContractError("lstm_backward: grad_out shape does not match cache");

    const auto& off = m.offsets();
    VectorXd flat = VectorXd::Zero(m.param_count());

    // Head.
    const MatrixXd& h2_last = cache.layer2.hidden.back();
    Eigen::Map<MatrixXd>(flat.data() + off.wh, d.output, d.hidden2) =
        grad_out.transpose() * h2_last;
    Eigen::Map<VectorXd>(flat.data() + off.bh, d.output) =
        grad_out.colwise().sum().transpose();

    // Layer 2: head gradient lands on the final hidden state only.
    std::vector<MatrixXd> dh2(d.lookback, MatrixXd::Zero(cache.batch, d.hidden2));
    dh2.back().noalias() = grad_out * m.wh();

    std::vector<MatrixXd> x2(d.lookback); // layer-2 inputs = layer-1 hiddens
    for (int t = 0; t < d.lookback; ++t) x2[t] = cache.layer1.hidden[t];

    std::vector<MatrixXd> dh1(d.lookback, MatrixXd::Zero(cache.batch, d.hidden1));
    const LayerParams l2{m.w2(), m.u2(), m.b2(), d.hidden2};
    LayerGrads g2 = bptt_layer(l2, cache.layer2, x2, &dh1, dh2);

    Eigen::Map<MatrixXd>(flat.data() + off.w2, 4 * d.hidden2, d.hidden1) = g2.dw;
    Eigen::Map<MatrixXd>(flat.data() + off.u2, 4 * d.hidden2, d.hidden2) = g2.du;
    Eigen::Map<VectorXd>(flat.data() + off.b2, 4 * d.hidden2) = g2.db;

    // Layer 1.
    std::vector<MatrixXd> x1(d.lookback);
    for (int t = 0; t < d.lookback; ++t)
        x1[t] = cache.inputs.middleCols(static_cast<Index>(t) * d.input, d.input);
    const LayerParams l1{m.w1(), m.u1(), m.b1(), d.hidden1};
    LayerGrads g1 = bptt_layer(l1, cache.layer1, x1, nullptr, dh1);

    Eigen::Map<MatrixXd>(flat.data() + off.w1, 4 * d.hidden1, d.input) = g1.dw;
    Eigen::Map<MatrixXd>(flat.data() + off.u1, 4 * d.hidden1, d.hidden1) = g1.du;
    Eigen::Map<VectorXd>(flat.data() + off.b1, 4 * d.hidden1) = g1.db;

    return flat;
}

namespace {

void fill_batch(const Dataset& data, const std::vector<std::size_t>& order, std::size_t first,
                std::size_t count, MatrixXd& X, MatrixXd& Y,
                std::vector<double>& scratch) {
    const int cols = data.lookback() * RecordedTrace::kChannels;
    X.resize(static_cast<Index>(count), cols);
    Y.resize(static_cast<Index>(count), 3);
    scratch.resize(cols);
    for (std::size_t b = 0; b < count; ++b) {
        const std::size_t w = order[first + b];
        data.copy_inputs(w, scratch.data());
        for (int j = 0; j < cols; ++j) X(static_cast<Index>(b), j) = scratch[j];
        const ThreePhase t = data.target(w);
        Y(static_cast<Index>(b), 0) = t.a;
        Y(static_cast<Index>(b), 1) = t.b;
        Y(static_cast<Index>(b), 2) = t.c;
    }
}

double batch_mse(const MatrixXd& pred, const MatrixXd& target) {
    return (pred - target).array().square().sum() /
           static_cast<double>(pred.rows() * pred.cols());
}

} // namespace

LstmTrainResult train_lstm(const Dataset& train, const Dataset& val, const TrainConfig& cfg,
                           const LstmModel::Dims& dims) {
    cfg.validate();
    if (train.size() == 0 || val.size() == 0)
        throw ContractError("train_lstm: train and validation sets must be nonempty");
    if (train.lookback() != dims.lookback)
        throw ContractError("train_lstm: dataset lookback does not match model");

    LstmModel model(dims);
    model.init_weights(cfg.seed);
    AdamState adam(model.param_count());
    Rng rng(cfg.seed ^ 0x5eedf00dULL); // separate stream for shuffling

    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::size_t> val_order(val.size());
    std::iota(val_order.begin(), val_order.end(), 0);

    MatrixXd X, Y;
    std::vector<double> scratch;
    LstmCache cache;

    auto validation_mse = [&]() {
        double acc = 0.0;
        std::size_t done = 0;
        while (done < val.size()) {
            const std::size_t n = std::min<std::size_t>(512, val.size() - done);
            fill_batch(val, val_order, done, n, X, Y, scratch);
            const MatrixXd pred = lstm_forward_batch(model, X);
            acc += (pred - Y).array().square().sum();
            done += n;
        }
        return acc / static_cast<double>(val.size() * 3);
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
        for (std::size_t first = 0; first < train.size();
             first += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t n =
                std::min<std::size_t>(cfg.batch_size, train.size() - first);
            fill_batch(train, order, first, n, X, Y, scratch);
            const MatrixXd pred = lstm_forward_batch(model, X, &cache);
            const double loss = batch_mse(pred, Y);
            if (!std::isfinite(loss))
                throw TrainingError("train_lstm: non-finite loss at epoch " +
                                    std::to_string(epoch) + ", batch " +
                                    std::to_string(first / cfg.batch_size));
            train_acc += loss * static_cast<double>(n);

            const MatrixXd grad_out =
                2.0 * (pred - Y) / static_cast<double>(pred.rows() * pred.cols());
            const VectorXd grads = lstm_backward(model, cache, grad_out);
            adam_step(model.params(), grads, adam, cfg, ++step);
        }

        const double train_mse = train_acc / static_cast<double>(train.size());
        const double val_mse = validation_mse();
        history.push_back({epoch, train_mse, val_mse});

        if (val_mse < best_val) {
            best_val = val_mse;
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

std::vector<ThreePhase> predict_trace(const LstmModel& m, const RecordedTrace& trace,
                                      std::size_t batch) {
    const auto& d = m.dims();
    const auto p = static_cast<std::size_t>(d.lookback);
    if (trace.size() <= p) return {};

    const std::size_t n = trace.size() - p;
    std::vector<ThreePhase> out(n);
    const int cols = d.lookback * RecordedTrace::kChannels;

    MatrixXd X;
    for (std::size_t first = 0; first < n; first += batch) {
        const std::size_t count = std::min(batch, n - first);
        X.resize(static_cast<Index>(count), cols);
        for (std::size_t b = 0; b < count; ++b) {
            const double* src = trace.row(first + b);
            for (int j = 0; j < cols; ++j) X(static_cast<Index>(b), j) = src[j];
        }
        const MatrixXd y = lstm_forward_batch(m, X);
        for (std::size_t b = 0; b < count; ++b)
            out[first + b] = {y(static_cast<Index>(b), 0), y(static_cast<Index>(b), 1),
                              y(static_cast<Index>(b), 2)};
    }
    return out;
}

} // namespace gridfdd
