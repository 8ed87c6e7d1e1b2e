#pragma once

#include "dataset.hpp"
#include "knn.hpp"
#include "lstm.hpp"
#include "mlp.hpp"

#include <cstdint>
#include <vector>

namespace gridfdd {

struct FtcModels {
    const LstmModel* lstm = nullptr;
    const KnnModel* knn = nullptr;
    const MlpModel* mlp = nullptr;
};

struct FtcOptions {
    /// Consecutive agreeing classifications before the active class switches.
    /// 1 reproduces the undebounced behaviour.
    int debounce = 3;
    /// Feed the conventional controller's reference into the LSTM history
    /// instead of the emitted one.
    bool feed_conventional = false;
};

/// Rolling state of the detection/correction loop: the lookback ring of
/// (v_g, i_inv, v_star) samples the predictor consumes, the ring of recent
/// predictions the classifier consumes, and the debounced classification.
class FtcState {
public:
    FtcState() = default;

    /// Ring zero-padded except the v_star channels and the prediction ring,
    /// which start from seeded uniform [-1, 1] values (nothing has been
    /// emitted yet when the loop starts).
    static FtcState init(std::uint64_t seed, int lookback = 20, int feature_window = 20);

    int lookback() const { return lookback_; }
    int feature_window() const { return feature_window_; }
    bool correction_active() const { return active_ != FaultClass::NORMAL; }
    FaultClass active_class() const { return active_; }
    const ThreePhase& last_prediction() const { return last_prediction_; }

    /// Lookback window as a lookback x 9 row-major block (oldest first).
    const std::vector<double>& window() const { return window_; }

    friend struct FtcStepAccess;

private:
    int lookback_ = 20;
    int feature_window_ = 20;
    std::vector<double> window_;          // lookback x 9, row-major, oldest first
    std::vector<ThreePhase> predictions_; // feature_window entries, oldest first
    ThreePhase last_prediction_;
    FaultClass active_ = FaultClass::NORMAL;
    FaultClass pending_ = FaultClass::NORMAL;
    int pending_count_ = 0;
    std::uint64_t seed_ = 0;
};

struct FtcStepResult {
    ThreePhase v_star;      ///< emitted per-unit reference
    FaultClass classified;  ///< debounced class driving the branch
    FaultClass raw;         ///< undebounced classifier output
};

/// One loop step: predict the next reference from the ring, classify the
/// prediction window, emit either the (clamped) prediction or the MLP
/// correction, and append the new sample to the ring. v_star_conv is only
/// consulted when FtcOptions::feed_conventional is set.
FtcStepResult ftc_step(FtcState& s, const ThreePhase& v_g_pu, const ThreePhase& i_inv_pu,
                       const FtcModels& models, const FtcOptions& opt = {},
                       const ThreePhase* v_star_conv = nullptr);

/// One recorded step of a closed-loop run.
struct FtcRow {
    ThreePhase v_g;
    ThreePhase i_inv;
    ThreePhase v_star;      ///< emitted
    ThreePhase v_star_conv; ///< parallel conventional controller, same plant
    FaultClass label_true;
    FaultClass label_raw;
    FaultClass label_active;
};

struct FtcTrace {
    double sample_period = 5e-6;
    PuBases bases;
    std::vector<FtcRow> rows;

    double time_of(std::size_t i) const { return static_cast<double>(i) * sample_period; }
};

/// Full closed loop: the emitted reference drives the averaged inverter while
/// the fault schedule acts on the PCC. A conventional controller runs in
/// parallel on the same measurements (for the optional history feed and for
/// the record). Throws SimulationError with the timestep on divergence.
FtcTrace run_closed_loop(const ScenarioSchedule& sched, const CircuitParams& p,
                         const FtcModels& models, std::uint64_t seed,
                         double sample_period, double duration,
                         const SimOptions& sim_opt = {}, const FtcOptions& ftc_opt = {});

} // namespace gridfdd
