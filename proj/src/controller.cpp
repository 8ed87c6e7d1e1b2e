#include "controller.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gridfdd {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kTwoThirdsPi = kTwoPi / 3.0;

double wrap_angle(double theta) {
    theta = std::fmod(theta, kTwoPi);
    return theta < 0.0 ? theta + kTwoPi : theta;
}
} // namespace

DqPair abc_to_dq(const ThreePhase& x, double theta) {
    const double ca = std::cos(theta), cb = std::cos(theta - kTwoThirdsPi),
                 cc = std::cos(theta + kTwoThirdsPi);
    const double sa = std::sin(theta), sb = std::sin(theta - kTwoThirdsPi),
                 sc = std::sin(theta + kTwoThirdsPi);
    return {(2.0 / 3.0) * (x.a * ca + x.b * cb + x.c * cc),
            -(2.0 / 3.0) * (x.a * sa + x.b * sb + x.c * sc)};
}

ThreePhase dq_to_abc(const DqPair& x, double theta) {
    return {x.d * std::cos(theta) - x.q * std::sin(theta),
            x.d * std::cos(theta - kTwoThirdsPi) - x.q * std::sin(theta - kTwoThirdsPi),
            x.d * std::cos(theta + kTwoThirdsPi) - x.q * std::sin(theta + kTwoThirdsPi)};
}

ControllerState make_controller_state(const CircuitParams& p) {
    ControllerState s;
    s.pll_omega = kTwoPi * p.f_grid;
    return s;
}

ControllerState pll_step(const ThreePhase& v_pcc, const ControllerState& s,
                         double dt, const CircuitParams& p,
                         const ControllerGains& g) {
    const double vq = abc_to_dq(v_pcc, s.pll_theta).q;
    const double err = vq / p.phase_peak(); // per-unit phase error signal

    ControllerState out = s;
    out.pll_integrator = s.pll_integrator + g.pll_ki * err * dt;
    out.pll_omega = kTwoPi * p.f_grid + g.pll_kp * err + out.pll_integrator;
    out.pll_theta = wrap_angle(s.pll_theta + out.pll_omega * dt);
    return out;
}

ThreePhase pi_current_step(const ThreePhase& i_g, const ThreePhase& v_pcc,
                           ControllerState& s, double dt, const CircuitParams& p,
                           const ControllerGains& g) {
    const DqPair i_dq = abc_to_dq(i_g, s.pll_theta);
    const double err_d = g.i_ref_d - i_dq.d;
    const double err_q = g.i_ref_q - i_dq.q;

    auto modulation = [&](const DqPair& integ) {
        const DqPair v_cmd{g.current_kp * err_d + integ.d,
                           g.current_kp * err_q + integ.q};
        const ThreePhase v_abc = dq_to_abc(v_cmd, s.pll_theta);
        // Per-phase feedforward of the measured PCC voltage.
        return (v_abc + v_pcc) * (2.0 / p.vdc);
    };

    const DqPair integ_next{s.current_integrator.d + g.current_ki * err_d * dt,
                            s.current_integrator.q + g.current_ki * err_q * dt};
    ThreePhase m = modulation(integ_next);

    const bool saturates = std::fabs(m.a) > 1.0 || std::fabs(m.b) > 1.0 || std::fabs(m.c) > 1.0;
    if (saturates) {
        // Conditional anti-windup: hold the integrator, re-evaluate, clamp.
        m = modulation(s.current_integrator);
        for (int ph = 0; ph < 3; ++ph) m[ph] = std::clamp(m[ph], -1.0, 1.0);
    } else {
        s.current_integrator = integ_next;
    }
    return m;
}

} // namespace gridfdd
