#pragma once

#include "ftc.hpp"
#include "nn_common.hpp"

#include <string>
#include <vector>

namespace gridfdd {

/// One scenario's closed-loop run joined with its baselines: the uncorrected
/// conventional run of the same schedule and the fault-free reference run.
struct ScenarioEval {
    std::string name;
    FtcTrace ftc;                        ///< closed-loop run (faults active)
    std::vector<ThreePhase> v_star_conv; ///< conventional run, faults active
    std::vector<ThreePhase> v_star_ref;  ///< conventional run, faults disabled
};

/// Per fault class x phase MAE of the emitted reference against the
/// fault-free reference, for up to two scenarios (Table II shape).
struct MaeReport {
    struct Cell {
        double mae[3] = {0, 0, 0};
        bool present = false;
    };
    std::vector<std::string> scenario_names;
    // [scenario][class], classes in enumeration order, NORMAL excluded.
    std::vector<std::array<Cell, kNumFaultClasses>> cells;

    double overall_mean(std::size_t scenario) const;
};

MaeReport build_mae_report(const std::vector<ScenarioEval>& scenarios);
void write_mae_report_csv(const std::string& path, const MaeReport& report);

/// One contiguous ground-truth fault interval and both MAEs over it.
struct EpisodeStat {
    FaultClass fault;
    std::size_t first = 0, last = 0; ///< row range, inclusive
    double mae_ftc = 0.0;            ///< emitted vs fault-free reference
    double mae_conv = 0.0;           ///< uncorrected conventional vs reference
    double detection_overlap = 0.0;  ///< fraction of rows classified non-normal
};

std::vector<EpisodeStat> episode_stats(const ScenarioEval& scenario);

void write_confusion_csv(const std::string& path, const ConfusionMatrix& cm);

/// Joined per-row CSV for one scenario (consumed by eval and plot).
void write_ftc_csv(const std::string& path, const ScenarioEval& scenario);
ScenarioEval read_ftc_csv(const std::string& path);

} // namespace gridfdd
