#pragma once

#include "circuit.hpp"
#include "three_phase.hpp"

namespace gridfdd {

struct DqPair {
    double d = 0.0;
    double q = 0.0;
};

/// Amplitude-invariant Park transform. A balanced positive-sequence cosine
/// set of peak V aligned with theta maps to (V, 0).
DqPair abc_to_dq(const ThreePhase& x, double theta);

/// Inverse Park; exact inverse of abc_to_dq on zero-sum signals.
ThreePhase dq_to_abc(const DqPair& x, double theta);

/// Gains and setpoints of the baseline synchronous-frame controller.
/// current_kp is capped by the LCL resonance: the grid-current plant peaks
/// at |P| ~ 0.9 near 11.2 kHz with ~180 deg of lag, so kp must stay below
/// ~0.55 for the default passives; tracking bandwidth comes from ki.
struct ControllerGains {
    double pll_kp = 50.0;   ///< [rad/s per pu of q-axis voltage]
    double pll_ki = 1000.0; ///< [rad/s^2 per pu]
    double current_kp = 0.4;   ///< [V/A]
    double current_ki = 400.0; ///< [V/(A s)]
    double i_ref_d = 10.0;     ///< grid current setpoint, d axis [A]
    double i_ref_q = 0.0;      ///< [A]
};

/// Mutable state of the PLL and the dq current regulator.
struct ControllerState {
    double pll_theta = 0.0;          ///< [rad], wrapped to [0, 2 pi)
    double pll_integrator = 0.0;     ///< integral part of the frequency PI [rad/s]
    double pll_omega = 0.0;          ///< last estimated frequency [rad/s]
    DqPair current_integrator;       ///< integral part of the current PI [V]
};

/// Start at t = 0 locked to the ideal source (theta = 0, omega = 2 pi f).
ControllerState make_controller_state(const CircuitParams& p);

/// One SRF-PLL update: PI on the normalized q-axis PCC voltage drives the
/// frequency estimate; theta advances by omega dt.
ControllerState pll_step(const ThreePhase& v_pcc, const ControllerState& s,
                         double dt, const CircuitParams& p,
                         const ControllerGains& g);

/// One current-regulator update. PI on dq grid-current error plus per-phase
/// PCC voltage feedforward, normalized by vdc/2 and clamped to [-1, 1].
/// Integrators hold while the output is saturated.
ThreePhase pi_current_step(const ThreePhase& i_g, const ThreePhase& v_pcc,
                           ControllerState& s, double dt, const CircuitParams& p,
                           const ControllerGains& g);

} // namespace gridfdd
