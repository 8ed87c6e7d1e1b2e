#pragma once

#include "circuit.hpp"
#include "three_phase.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace gridfdd {

/// The 11 short-circuit classes plus the no-fault class. Enumeration order is
/// also the deterministic tie-break order for classification.
enum class FaultClass {
    AG, BG, CG,        // single phase to ground
    AB, BC, CA,        // phase to phase
    ABG, BCG, CAG,     // two phase to ground
    ABC, ABCG,         // three phase, without / with ground
    NORMAL,
};

constexpr int kNumFaultClasses = 12;

/// Canonical lowercase token, e.g. "a-b-g" or "normal".
std::string to_string(FaultClass c);

/// Accepts "a-b-g", "abg", or "ABG". Throws ScheduleError on unknown tokens.
FaultClass fault_class_from_string(const std::string& s);

bool involves_ground(FaultClass c);

/// Phases shorted by the class, as flags for {a, b, c}. NORMAL -> all false.
std::array<bool, 3> faulted_phases(FaultClass c);

/// One scheduled fault event. Resistance semantics: every faulted phase
/// connects through r_phase to a common fault-neutral node; for ground
/// classes that node ties through r_ground to ground, otherwise it floats.
struct FaultSpec {
    FaultClass fault_class = FaultClass::NORMAL;
    double t_start = 0.0;
    double t_end = 0.0;
    std::optional<double> r_phase;  ///< [ohm], absent only for NORMAL
    std::optional<double> r_ground; ///< [ohm], present iff class grounds

    /// Throws ScheduleError when interval or resistance rules are violated.
    void validate() const;

    bool contains(double t) const { return t >= t_start && t < t_end; }
};

/// The shunt network seen at the PCC while a fault is active, reduced to the
/// data the nodal solve needs.
struct FaultNetwork {
    std::array<bool, 3> phases{false, false, false};
    double g_phase = 0.0;  ///< 1 / r_phase [S]
    double g_ground = 0.0; ///< 1 / r_ground [S]; 0 for floating-node faults
    bool grounded = false;
    int num_phases = 0;

    bool empty() const { return num_phases == 0; }
};

/// Reduce a FaultSpec to its shunt network. NORMAL yields an empty network.
FaultNetwork fault_admittance(const FaultSpec& spec);

/// An ordered list of fault events over [0, duration].
/// The two Table I schedules are available as built-ins by name; note the
/// published test set nests a-b inside a-g, so overlapping intervals are
/// accepted with latest-start-wins precedence (see label_at / active_at).
class ScenarioSchedule {
public:
    ScenarioSchedule() = default;
    ScenarioSchedule(std::vector<FaultSpec> specs, double duration);

    /// Parse the line-oriented format `class t_start t_end r_phase r_ground`
    /// with `-` for an absent resistance and `#` comments.
    static ScenarioSchedule parse(const std::string& text, double duration);
    static ScenarioSchedule load(const std::string& path, double duration);

    /// Built-in schedules: "table1-train", "table1-test" (the published test
    /// rows), and "table1-test-s1" (test timing with the training
    /// resistances; the paper's scenario 1). Throws ScheduleError otherwise.
    static ScenarioSchedule builtin(const std::string& name);
    static bool is_builtin(const std::string& name);

    /// Resolve by built-in name first, then as a file path.
    static ScenarioSchedule by_name_or_path(const std::string& name, double duration);

    const std::vector<FaultSpec>& specs() const { return specs_; }
    double duration() const { return duration_; }

    /// Class label at time t; the latest-starting spec containing t wins.
    /// Throws std::out_of_range outside [0, duration].
    FaultClass label_at(double t) const;

    /// The spec governing time t, or nullptr when no fault is active.
    const FaultSpec* active_at(double t) const;

    std::string to_text() const;

private:
    std::vector<FaultSpec> specs_; // sorted by t_start
    double duration_ = 0.0;
};

/// PCC phase voltages from KCL at the three PCC nodes with the grid source
/// behind its series impedance (taken quasi-statically at f_grid), the
/// inverter injection i_g, and the active fault network:
///   (G_s I + Y_fault) v_pcc = G_s e + i_g
/// With no fault this reduces to v_pcc = e + |Z_s| i_g.
ThreePhase solve_pcc_voltage(const ThreePhase& v_src, const ThreePhase& i_g,
                             const FaultSpec* active, const CircuitParams& p);

/// Same solve given a prebuilt network (the per-step hot path).
ThreePhase solve_pcc_voltage(const ThreePhase& v_src, const ThreePhase& i_g,
                             const FaultNetwork& net, const CircuitParams& p);

/// Currents drawn from the PCC into the fault network, per phase.
ThreePhase fault_branch_currents(const ThreePhase& v_pcc, const FaultNetwork& net);

} // namespace gridfdd
