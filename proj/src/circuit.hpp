#pragma once

#include "three_phase.hpp"

namespace gridfdd {

/// Electrical parameters of the inverter, LCL filter, and grid tie.
/// Defaults are the study-system values: 0.5 ohm / 0.09 mH filter arms,
/// 4.5 uF capacitor, 500 V DC link, 220 V line-line 60 Hz grid, 10 kHz carrier.
struct CircuitParams {
    double r1 = 0.5;              ///< inverter-side filter resistance [ohm]
    double r2 = 0.5;              ///< grid-side filter resistance [ohm]
    double l1 = 0.09e-3;          ///< inverter-side filter inductance [H]
    double l2 = 0.09e-3;          ///< grid-side filter inductance [H]
    double c = 4.5e-6;            ///< filter capacitance [F]
    double vdc = 500.0;           ///< DC-link voltage [V]
    double f_grid = 60.0;         ///< grid frequency [Hz]
    double v_ll_rms = 220.0;      ///< grid line-line RMS voltage [V]
    double f_sw = 10e3;           ///< PWM carrier frequency [Hz]
    double grid_series_r = 0.1;   ///< grid Thevenin series resistance [ohm]
    double grid_series_l = 0.05e-3; ///< grid Thevenin series inductance [H]

    /// Throws ConfigError when a sign/zero constraint is violated.
    void validate() const;

    /// Peak of the phase-neutral grid voltage, v_ll_rms * sqrt(2/3).
    double phase_peak() const;

    /// Magnitude of the grid series impedance at f_grid. The PCC solve treats
    /// the series branch quasi-statically with this effective resistance.
    double series_impedance_mag() const;

    /// Ideal balanced source voltages at time t (phase a = cos(w t)).
    ThreePhase source_voltage(double t) const;
};

/// Integrator state: per-phase inverter-side currents, capacitor voltages,
/// and grid-side currents, plus simulation time.
struct CircuitState {
    ThreePhase i_l; ///< current through L1 [A]
    ThreePhase v_c; ///< capacitor voltage [V]
    ThreePhase i_g; ///< current through L2 into the PCC [A]
    double t = 0.0; ///< simulation time [s]

    bool finite() const { return i_l.finite() && v_c.finite() && i_g.finite(); }

    /// Total stored energy 1/2 (L1 |i_l|^2 + C |v_c|^2 + L2 |i_g|^2).
    double energy(const CircuitParams& p) const;
};

/// Time derivative of a CircuitState (t carries dt/dt = 1).
struct CircuitStateDerivative {
    ThreePhase di_l;
    ThreePhase dv_c;
    ThreePhase di_g;
};

/// Per-phase LCL ladder equations:
///   dI_L/dt = (V_inv - V_C - R1 I_L) / L1
///   dV_C/dt = (I_L - I_g) / C
///   dI_g/dt = (V_C - V_pcc - R2 I_g) / L2
/// Phases are fully decoupled. Throws NumericError on non-finite input.
CircuitStateDerivative lcl_derivative(const CircuitState& state,
                                      const ThreePhase& v_inv,
                                      const ThreePhase& v_pcc,
                                      const CircuitParams& p);

/// Classical RK4 step with both inputs held constant over dt.
/// Throws ConfigError when dt <= 0.
CircuitState step_rk4(const CircuitState& state, const ThreePhase& v_inv,
                      const ThreePhase& v_pcc, double dt, const CircuitParams& p);

/// Averaged inverter model: v = m * vdc / 2 per phase. Modulation entries
/// outside [-1, 1] are clamped; *saturated is set when that happens.
ThreePhase averaged_inverter(const ThreePhase& m, double vdc, bool* saturated = nullptr);

/// Switched inverter model: +-vdc/2 from comparing m against a symmetric
/// triangular carrier in [-1, 1] at f_sw. Same clamping rule as above.
ThreePhase spwm_inverter(const ThreePhase& m, double t, double vdc, double f_sw,
                         bool* saturated = nullptr);

/// The carrier used by spwm_inverter; starts at -1 and rises.
double triangular_carrier(double t, double f_sw);

/// RK4 sub-steps needed to integrate one sample period stably. 1 at the
/// default 5 us sampling; grows when the sample period approaches the LCL
/// resonance stability limit.
int stability_substeps(const CircuitParams& p, double sample_period);

} // namespace gridfdd
