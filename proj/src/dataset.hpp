#pragma once

#include "circuit.hpp"
#include "controller.hpp"
#include "fault.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace gridfdd {

/// x / base clamped to [-1, 1]. Increments *clip_counter when clamping.
/// Throws ConfigError when base <= 0.
double per_unit(double x, double base, std::int64_t* clip_counter = nullptr);

/// Per-unit normalization bases. Voltage base defaults to the phase peak of
/// the 220 V line-line grid; current base to twice the current setpoint.
struct PuBases {
    double v_base = 220.0 * std::sqrt(2.0 / 3.0);
    double i_base = 20.0;
};

/// Per-sample signals of one simulated scenario, stored per-unit:
/// PCC voltage, inverter-side current, and the PWM reference voltage,
/// with the active fault label at every sample.
class RecordedTrace {
public:
    static constexpr int kChannels = 9; // vg abc, iinv abc, vstar abc

    RecordedTrace() = default;
    RecordedTrace(double sample_period, PuBases bases)
        : sample_period_(sample_period), bases_(bases) {}

    std::size_t size() const { return labels_.size(); }
    double sample_period() const { return sample_period_; }
    const PuBases& bases() const { return bases_; }
    std::int64_t clip_count() const { return clips_; }

    const double* row(std::size_t i) const { return values_.data() + i * kChannels; }
    FaultClass label(std::size_t i) const { return labels_[i]; }
    double time_of(std::size_t i) const { return static_cast<double>(i) * sample_period_; }

    void append(const ThreePhase& v_g_pu, const ThreePhase& i_inv_pu,
                const ThreePhase& v_star_pu, FaultClass label);
    void add_clips(std::int64_t n) { clips_ += n; }

    /// v_star channels of sample i.
    ThreePhase v_star(std::size_t i) const {
        const double* r = row(i);
        return {r[6], r[7], r[8]};
    }
    ThreePhase v_g(std::size_t i) const {
        const double* r = row(i);
        return {r[0], r[1], r[2]};
    }
    ThreePhase i_inv(std::size_t i) const {
        const double* r = row(i);
        return {r[3], r[4], r[5]};
    }

    static const char* channel_name(int ch);

private:
    double sample_period_ = 5e-6;
    PuBases bases_;
    std::vector<double> values_; // row-major, kChannels per sample
    std::vector<FaultClass> labels_;
    std::int64_t clips_ = 0;
};

/// Knobs of the closed-loop data-generation run.
struct SimOptions {
    ControllerGains gains;
    PuBases bases;
    bool switched_pwm = false; ///< SPWM inverter at 1 us substeps when true
    double switched_dt = 1e-6;
};

/// Closed-loop simulation (PI controller + inverter + LCL + fault network),
/// one recorded row per sample period. Rows land at t = k * sample_period for
/// k in [0, duration / sample_period). Throws SimulationError (with the
/// timestep) if the state leaves the finite range.
RecordedTrace run_scenario(const ScenarioSchedule& sched, const CircuitParams& p,
                           double sample_period, double duration,
                           const SimOptions& opt = {});

/// Lookback windows over a trace. Window i covers samples
/// [start_i, start_i + p); its target and label sit at start_i + p.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::shared_ptr<const RecordedTrace> trace, std::vector<std::size_t> starts,
            int lookback, std::uint64_t seed);

    std::size_t size() const { return starts_.size(); }
    int lookback() const { return lookback_; }
    std::uint64_t seed() const { return seed_; }
    const RecordedTrace& trace() const { return *trace_; }
    std::shared_ptr<const RecordedTrace> trace_ptr() const { return trace_; }
    const std::vector<std::size_t>& starts() const { return starts_; }

    std::size_t target_index(std::size_t w) const { return starts_[w] + lookback_; }
    ThreePhase target(std::size_t w) const { return trace_->v_star(target_index(w)); }
    FaultClass label(std::size_t w) const { return trace_->label(target_index(w)); }

    /// Copy the p x 9 input block of window w into dst (row-major, p rows).
    void copy_inputs(std::size_t w, double* dst) const;

    Dataset subset(const std::vector<std::size_t>& indices) const;

private:
    std::shared_ptr<const RecordedTrace> trace_;
    std::vector<std::size_t> starts_;
    int lookback_ = 20;
    std::uint64_t seed_ = 0;
};

/// Sliding windows of length p with stride s; one window per start index i
/// (stepping by s) with i + p < trace length. Throws ConfigError when the
/// trace is shorter than p + 1 samples.
Dataset make_windows(std::shared_ptr<const RecordedTrace> trace, int lookback = 20,
                     std::size_t stride = 1, std::uint64_t seed = 0);

/// Random (default) or chronological disjoint partition by window.
std::pair<Dataset, Dataset> split_train_val(const Dataset& d, double fraction = 0.70,
                                            std::uint64_t seed = 0,
                                            bool chronological = false);

struct KfoldSplit {
    std::vector<std::size_t> train; // indices into the dataset
    std::vector<std::size_t> val;
};

/// k random folds of near-equal size (they differ by at most one); every
/// window lands in exactly one validation fold.
std::vector<KfoldSplit> kfold(const Dataset& d, int k = 10, std::uint64_t seed = 0);

/// Trace / dataset CSV: a single '#' header line carrying the column names,
/// sample period, bases, seed, and windowing parameters, then one CSV row per
/// sample. Numeric fields round-trip exactly.
struct TraceMeta {
    std::uint64_t seed = 0;
    int lookback = 20;
    std::size_t stride = 1;
    std::string schedule;
};

void write_trace_csv(const std::string& path, const RecordedTrace& trace,
                     const TraceMeta& meta);
std::pair<std::shared_ptr<RecordedTrace>, TraceMeta> read_trace_csv(const std::string& path);

} // namespace gridfdd
