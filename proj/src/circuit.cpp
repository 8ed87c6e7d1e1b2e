#include "circuit.hpp"

#include "errors.hpp"

#include <cmath>
#include <numbers>

namespace gridfdd {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double clamp_unit(double x, bool* saturated) {
    if (x > 1.0) {
        if (saturated) *saturated = true;
        return 1.0;
    }
    if (x < -1.0) {
        if (saturated) *saturated = true;
        return -1.0;
    }
    return x;
}

} // namespace

void CircuitParams::validate() const {
    if (r1 < 0 || r2 < 0 || grid_series_r < 0)
        throw ConfigError("circuit: resistances must be >= 0");
    if (l1 <= 0 || l2 <= 0 || c <= 0 || grid_series_l <= 0)
        throw ConfigError("circuit: inductances and capacitance must be > 0");
    if (vdc <= 0 || f_grid <= 0 || v_ll_rms <= 0 || f_sw <= 0)
        throw ConfigError("circuit: vdc, f_grid, v_ll_rms, f_sw must be > 0");
}

double CircuitParams::phase_peak() const {
    return v_ll_rms * std::sqrt(2.0 / 3.0);
}

double CircuitParams::series_impedance_mag() const {
    return std::hypot(grid_series_r, kTwoPi * f_grid * grid_series_l);
}

ThreePhase CircuitParams::source_voltage(double t) const {
    const double vp = phase_peak();
    const double wt = kTwoPi * f_grid * t;
    return {vp * std::cos(wt), vp * std::cos(wt - kTwoPi / 3.0),
            vp * std::cos(wt + kTwoPi / 3.0)};
}

double CircuitState::energy(const CircuitParams& p) const {
    return 0.5 * (p.l1 * i_l.norm2() + p.c * v_c.norm2() + p.l2 * i_g.norm2());
}

CircuitStateDerivative lcl_derivative(const CircuitState& state,
                                      const ThreePhase& v_inv,
                                      const ThreePhase& v_pcc,
                                      const CircuitParams& p) {
    if (!state.finite() || !v_inv.finite() || !v_pcc.finite())
        throw NumericError("lcl_derivative: non-finite state or input");

    CircuitStateDerivative d;
    for (int ph = 0; ph < 3; ++ph) {
        d.di_l[ph] = (v_inv[ph] - state.v_c[ph] - p.r1 * state.i_l[ph]) / p.l1;
        d.dv_c[ph] = (state.i_l[ph] - state.i_g[ph]) / p.c;
        d.di_g[ph] = (state.v_c[ph] - v_pcc[ph] - p.r2 * state.i_g[ph]) / p.l2;
    }
    return d;
}

CircuitState step_rk4(const CircuitState& state, const ThreePhase& v_inv,
                      const ThreePhase& v_pcc, double dt, const CircuitParams& p) {
    if (!(dt > 0.0)) throw ConfigError("step_rk4: dt must be > 0");

    auto advance = [&](const CircuitStateDerivative& d, double h) {
        CircuitState s = state;
        s.i_l += d.di_l * h;
        s.v_c += d.dv_c * h;
        s.i_g += d.di_g * h;
        return s;
    };

    const CircuitStateDerivative k1 = lcl_derivative(state, v_inv, v_pcc, p);
    const CircuitStateDerivative k2 = lcl_derivative(advance(k1, dt / 2), v_inv, v_pcc, p);
    const CircuitStateDerivative k3 = lcl_derivative(advance(k2, dt / 2), v_inv, v_pcc, p);
    const CircuitStateDerivative k4 = lcl_derivative(advance(k3, dt), v_inv, v_pcc, p);

    CircuitState out = state;
    const double h6 = dt / 6.0;
    for (int ph = 0; ph < 3; ++ph) {
        out.i_l[ph] += h6 * (k1.di_l[ph] + 2 * k2.di_l[ph] + 2 * k3.di_l[ph] + k4.di_l[ph]);
        out.v_c[ph] += h6 * (k1.dv_c[ph] + 2 * k2.dv_c[ph] + 2 * k3.dv_c[ph] + k4.dv_c[ph]);
        out.i_g[ph] += h6 * (k1.di_g[ph] + 2 * k2.di_g[ph] + 2 * k3.di_g[ph] + k4.di_g[ph]);
    }
    out.t = state.t + dt;
    return out;
}

ThreePhase averaged_inverter(const ThreePhase& m, double vdc, bool* saturated) {
    ThreePhase v;
    for (int ph = 0; ph < 3; ++ph) v[ph] = clamp_unit(m[ph], saturated) * vdc / 2.0;
    return v;
}

double triangular_carrier(double t, double f_sw) {
    double phase = t * f_sw - std::floor(t * f_sw); // [0, 1)
    return phase < 0.5 ? 4.0 * phase - 1.0 : 3.0 - 4.0 * phase;
}

int stability_substeps(const CircuitParams& p, double sample_period) {
    // Dominant eigenfrequency of the LCL ladder, padded for the grid coupling
    // and damping terms; RK4 is stable to |lambda| dt ~ 2.8.
    const double w_res = std::sqrt((p.l1 + p.l2) / (p.l1 * p.l2 * p.c));
    const double lambda = 1.25 * w_res + p.r1 / p.l1 + p.r2 / p.l2;
    const double dt_max = 2.0 / lambda;
    return std::max(1, static_cast<int>(std::ceil(sample_period / dt_max)));
}

ThreePhase spwm_inverter(const ThreePhase& m, double t, double vdc, double f_sw,
                         bool* saturated) {
    const double carrier = triangular_carrier(t, f_sw);
    ThreePhase v;
    for (int ph = 0; ph < 3; ++ph)
        v[ph] = (clamp_unit(m[ph], saturated) >= carrier) ? vdc / 2.0 : -vdc / 2.0;
    return v;
}

} // namespace gridfdd
