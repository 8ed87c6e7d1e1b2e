#include "ftc.hpp"

#include "errors.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cmath>

namespace gridfdd {

FtcState FtcState::init(std::uint64_t seed, int lookback, int feature_window) {
    if (lookback < 1 || feature_window < 1)
        throw ConfigError("ftc: lookback and feature window must be >= 1");

    FtcState s;
    s.lookback_ = lookback;
    s.feature_window_ = feature_window;
    s.seed_ = seed;
    s.window_.assign(static_cast<std::size_t>(lookback) * RecordedTrace::kChannels, 0.0);

    Rng rng(seed);
    for (int t = 0; t < lookback; ++t)
        for (int ph = 0; ph < 3; ++ph)
            s.window_[static_cast<std::size_t>(t) * RecordedTrace::kChannels + 6 + ph] =
                rng.uniform(-1.0, 1.0);

    s.predictions_.resize(feature_window);
    for (auto& v : s.predictions_)
        v = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    s.last_prediction_ = s.predictions_.back();
    return s;
}

namespace {

double clamp_pu(double x) { return std::clamp(x, -1.0, 1.0); }

void push_sample(std::vector<double>& window, int lookback, const ThreePhase& v_g,
                 const ThreePhase& i_inv, const ThreePhase& v_star) {
    constexpr int ch = RecordedTrace::kChannels;
    std::copy(window.begin() + ch, window.end(), window.begin());
    double* row = window.data() + static_cast<std::size_t>(lookback - 1) * ch;
    row[0] = v_g.a;
    row[1] = v_g.b;
    row[2] = v_g.c;
    row[3] = i_inv.a;
    row[4] = i_inv.b;
    row[5] = i_inv.c;
    row[6] = v_star.a;
    row[7] = v_star.b;
    row[8] = v_star.c;
}

} // namespace

struct FtcStepAccess {
    static FtcStepResult step(FtcState& s, const ThreePhase& v_g, const ThreePhase& i_inv,
                              const FtcModels& models, const FtcOptions& opt,
                              const ThreePhase* v_star_conv) {
        if (!models.lstm || !models.knn || !models.mlp)
            throw ContractError("ftc_step: all three models must be loaded");
        if (models.lstm->dims().lookback != s.lookback_)
            throw ContractError("ftc_step: LSTM lookback does not match state ring");
        if (models.knn->feature_window != s.feature_window_)
            throw ContractError("ftc_step: KNN feature window does not match state ring");
        if (opt.debounce < 1) throw ConfigError("ftc_step: debounce must be >= 1");

        // 1. Predict the next reference from the lookback ring.
        const ThreePhase pred = lstm_forward(*models.lstm, s.window_.data());
        s.predictions_.erase(s.predictions_.begin());
        s.predictions_.push_back(pred);
        s.last_prediction_ = pred;

        // 2. Classify the window of recent predictions.
        std::vector<double> feature(static_cast<std::size_t>(models.knn->dim()));
        fill_prediction_feature(s.predictions_, s.predictions_.size() - 1,
                                s.feature_window_, feature.data());
        const FaultClass raw = knn_classify(*models.knn, feature).label;

        if (raw == s.pending_) {
            if (s.pending_count_ < opt.debounce) ++s.pending_count_;
        } else {
            s.pending_ = raw;
            s.pending_count_ = 1;
        }
        if (s.pending_count_ >= opt.debounce) s.active_ = s.pending_;

        // 3. Emit: prediction when normal, MLP correction when faulted.
        ThreePhase emitted;
        if (s.active_ == FaultClass::NORMAL) {
            emitted = {clamp_pu(pred.a), clamp_pu(pred.b), clamp_pu(pred.c)};
        } else {
            emitted = mlp_forward(*models.mlp, v_g, i_inv);
        }

        const ThreePhase& feed =
            (opt.feed_conventional && v_star_conv) ? *v_star_conv : emitted;
        push_sample(s.window_, s.lookback_, v_g, i_inv, feed);

        return {emitted, s.active_, raw};
    }
};

FtcStepResult ftc_step(FtcState& s, const ThreePhase& v_g_pu, const ThreePhase& i_inv_pu,
                       const FtcModels& models, const FtcOptions& opt,
                       const ThreePhase* v_star_conv) {
    return FtcStepAccess::step(s, v_g_pu, i_inv_pu, models, opt, v_star_conv);
}

FtcTrace run_closed_loop(const ScenarioSchedule& sched, const CircuitParams& p,
                         const FtcModels& models, std::uint64_t seed,
                         double sample_period, double duration,
                         const SimOptions& sim_opt, const FtcOptions& ftc_opt) {
    p.validate();
    if (!models.lstm || !models.knn || !models.mlp)
        throw ContractError("run_closed_loop: all three models must be loaded");

    const auto n = static_cast<std::size_t>(std::floor(duration / sample_period + 1e-9));
    FtcTrace trace;
    trace.sample_period = sample_period;
    trace.bases = sim_opt.bases;
    trace.rows.reserve(n);

    FtcState ftc = FtcState::init(seed, models.lstm->dims().lookback,
                                  models.knn->feature_window);
    CircuitState state;
    ControllerState cs = make_controller_state(p);

    const FaultSpec* active_spec = nullptr;
    FaultNetwork net;
    const double half_vdc = p.vdc / 2.0;
    const double v_base = sim_opt.bases.v_base;
    const double i_base = sim_opt.bases.i_base;
    const int substeps = stability_substeps(p, sample_period);

    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * sample_period;
        const FaultSpec* spec = t <= sched.duration() ? sched.active_at(t) : nullptr;
        if (spec != active_spec) {
            active_spec = spec;
            net = spec ? fault_admittance(*spec) : FaultNetwork{};
        }

        const ThreePhase v_src = p.source_voltage(t);
        const ThreePhase v_pcc = solve_pcc_voltage(v_src, state.i_g, net, p);

        // The conventional regulator tracks the same plant in parallel.
        cs = pll_step(v_pcc, cs, sample_period, p, sim_opt.gains);
        const ThreePhase m_conv =
            pi_current_step(state.i_g, v_pcc, cs, sample_period, p, sim_opt.gains);

        FtcRow row;
        row.v_g = {per_unit(v_pcc.a, v_base), per_unit(v_pcc.b, v_base),
                   per_unit(v_pcc.c, v_base)};
        row.i_inv = {per_unit(state.i_l.a, i_base), per_unit(state.i_l.b, i_base),
                     per_unit(state.i_l.c, i_base)};
        row.v_star_conv = {per_unit(m_conv.a * half_vdc, v_base),
                           per_unit(m_conv.b * half_vdc, v_base),
                           per_unit(m_conv.c * half_vdc, v_base)};

        const FtcStepResult res = ftc_step(ftc, row.v_g, row.i_inv, models, ftc_opt,
                                           &row.v_star_conv);
        row.v_star = res.v_star;
        row.label_true = spec ? spec->fault_class : FaultClass::NORMAL;
        row.label_raw = res.raw;
        row.label_active = res.classified;
        trace.rows.push_back(row);

        // The emitted per-unit reference drives the averaged inverter.
        const ThreePhase m_ftc = res.v_star * (v_base / half_vdc);
        const ThreePhase v_inv = averaged_inverter(m_ftc, p.vdc);
        const double dt = sample_period / substeps;
        for (int sub = 0; sub < substeps; ++sub)
            state = step_rk4(state, v_inv, v_pcc, dt, p);
        if (!state.finite())
            throw SimulationError("run_closed_loop: state diverged at step " +
                                  std::to_string(k) + " (t = " + std::to_string(t) + " s)");
    }
    return trace;
}

} // namespace gridfdd
