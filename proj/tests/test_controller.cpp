#include "controller.hpp"

#include "fault.hpp"
#include "oracles.hpp"
#include "rng.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace gridfdd;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

ThreePhase balanced(double amp, double angle) {
    return {amp * std::cos(angle), amp * std::cos(angle - kTwoPi / 3.0),
            amp * std::cos(angle + kTwoPi / 3.0)};
}
} // namespace

TEST_CASE("abc_to_dq: zeros, alignment, and the amplitude-invariant scaling") {
    const DqPair zero = abc_to_dq({0, 0, 0}, 1.234);
    CHECK(zero.d == doctest::Approx(0.0));
    CHECK(zero.q == doctest::Approx(0.0));

    for (double theta : {0.0, 0.7, 2.9, 5.5}) {
        const DqPair dq = abc_to_dq(balanced(1.0, theta), theta);
        CHECK(dq.d == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(dq.q == doctest::Approx(0.0).scale(1.0));
    }
}

TEST_CASE("dq_to_abc: inverse transform at theta = 0") {
    const ThreePhase x = dq_to_abc({1.0, 0.0}, 0.0);
    CHECK(x.a == doctest::Approx(1.0));
    CHECK(x.b == doctest::Approx(-0.5));
    CHECK(x.c == doctest::Approx(-0.5));

    const ThreePhase z = dq_to_abc({0.0, 0.0}, 2.1);
    CHECK(z.a == 0.0);
    CHECK(z.b == 0.0);
    CHECK(z.c == 0.0);
}

TEST_CASE("park round trip is the identity on zero-sum signals") {
    Rng rng(99);
    for (int i = 0; i < 200; ++i) {
        const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
        const ThreePhase x{a, b, -a - b}; // zero-sum by construction
        const double theta = rng.uniform(0, kTwoPi);
        const ThreePhase y = dq_to_abc(abc_to_dq(x, theta), theta);
        CHECK(y.a == doctest::Approx(x.a).epsilon(1e-12).scale(1.0));
        CHECK(y.b == doctest::Approx(x.b).epsilon(1e-12).scale(1.0));
        CHECK(y.c == doctest::Approx(x.c).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("pll: locked on the nominal grid, theta error stays below 0.01 rad") {
    const CircuitParams p;
    const ControllerGains g;
    ControllerState s = make_controller_state(p);
    const double dt = 5e-5;
    double worst = 0.0;
    for (int i = 0; i < 20000; ++i) { // 1 s
        const double t = i * dt;
        s = pll_step(p.source_voltage(t), s, dt, p, g);
        const double target = std::fmod(kTwoPi * p.f_grid * (t + dt), kTwoPi);
        const double err = test::wrap_pi(s.pll_theta - target);
        worst = std::max(worst, std::fabs(err));
    }
    CHECK(worst < 0.01);
}

TEST_CASE("pll: zero input keeps omega at the nominal frequency") {
    const CircuitParams p;
    const ControllerGains g;
    ControllerState s = make_controller_state(p);
    for (int i = 0; i < 2000; ++i) s = pll_step({0, 0, 0}, s, 5e-5, p, g);
    CHECK(s.pll_omega == doctest::Approx(kTwoPi * 60.0));
    CHECK(s.pll_integrator == 0.0);
}

TEST_CASE("pll: relocks within 0.2 s after a 1 Hz frequency step") {
    const CircuitParams p;
    const ControllerGains g;
    ControllerState s = make_controller_state(p);
    const double dt = 5e-5;
    // Settle on the nominal grid first.
    for (int i = 0; i < 10000; ++i) s = pll_step(p.source_voltage(i * dt), s, dt, p, g);

    const double f2 = 61.0;
    const double t0 = 10000 * dt;
    double locked_since = -1.0;
    for (int i = 0; i < 20000; ++i) {
        const double t = t0 + i * dt;
        const ThreePhase v = balanced(p.phase_peak(), kTwoPi * f2 * (t - t0));
        s = pll_step(v, s, dt, p, g);
        const double target = std::fmod(kTwoPi * f2 * (t + dt - t0), kTwoPi);
        const double err = std::fabs(test::wrap_pi(s.pll_theta - target));
        if (err < 0.01) {
            if (locked_since < 0) locked_since = t + dt - t0;
        } else {
            locked_since = -1.0;
        }
    }
    REQUIRE(locked_since >= 0.0);
    CHECK(locked_since < 0.2);
}

TEST_CASE("pi_current_step: zero error passes the feedforward through") {
    const CircuitParams p;
    const ControllerGains g;
    ControllerState s = make_controller_state(p);
    // Grid current exactly on the (10, 0) A setpoint in the controller frame.
    const ThreePhase i_g = dq_to_abc({g.i_ref_d, g.i_ref_q}, s.pll_theta);
    const ThreePhase v_pcc{120.0, -60.0, -60.0};
    const ThreePhase m = pi_current_step(i_g, v_pcc, s, 5e-6, p, g);
    CHECK(m.a == doctest::Approx(v_pcc.a / (p.vdc / 2)).epsilon(1e-12));
    CHECK(m.b == doctest::Approx(v_pcc.b / (p.vdc / 2)).epsilon(1e-12));
    CHECK(m.c == doctest::Approx(v_pcc.c / (p.vdc / 2)).epsilon(1e-12));
}

TEST_CASE("pi_current_step: zero reference and measurements give zero output") {
    const CircuitParams p;
    ControllerGains g;
    g.i_ref_d = 0.0;
    g.i_ref_q = 0.0;
    ControllerState s = make_controller_state(p);
    const ThreePhase m = pi_current_step({0, 0, 0}, {0, 0, 0}, s, 5e-6, p, g);
    CHECK(m.a == 0.0);
    CHECK(m.b == 0.0);
    CHECK(m.c == 0.0);
}

TEST_CASE("pi_current_step: output modulation always within [-1, 1]") {
    const CircuitParams p;
    const ControllerGains g;
    ControllerState s = make_controller_state(p);
    Rng rng(5);
    for (int i = 0; i < 500; ++i) {
        ThreePhase ig{rng.uniform(-300, 300), rng.uniform(-300, 300), rng.uniform(-300, 300)};
        ThreePhase v{rng.uniform(-400, 400), rng.uniform(-400, 400), rng.uniform(-400, 400)};
        const ThreePhase m = pi_current_step(ig, v, s, 5e-6, p, g);
        for (int ph = 0; ph < 3; ++ph) {
            CHECK(m[ph] <= 1.0);
            CHECK(m[ph] >= -1.0);
        }
    }
}

// Closed loop: controller + averaged inverter + LCL + stiff grid, no fault.
namespace {
struct LoopResult {
    std::vector<double> ig_a;
    std::vector<DqPair> ig_dq;
    CircuitState state;
};

LoopResult run_loop(double seconds, double dt) {
    const CircuitParams p;
    const ControllerGains g;
    CircuitState st;
    ControllerState cs = make_controller_state(p);
    LoopResult out;
    const auto steps = static_cast<std::size_t>(seconds / dt);
    out.ig_a.reserve(steps);
    for (std::size_t i = 0; i < steps; ++i) {
        const double t = static_cast<double>(i) * dt;
        const ThreePhase v_pcc = solve_pcc_voltage(p.source_voltage(t), st.i_g, nullptr, p);
        cs = pll_step(v_pcc, cs, dt, p, g);
        const ThreePhase m = pi_current_step(st.i_g, v_pcc, cs, dt, p, g);
        st = step_rk4(st, averaged_inverter(m, p.vdc), v_pcc, dt, p);
        out.ig_a.push_back(st.i_g.a);
        out.ig_dq.push_back(abc_to_dq(st.i_g, cs.pll_theta));
    }
    out.state = st;
    return out;
}
} // namespace

TEST_CASE("closed loop: grid current reaches the setpoint within 0.1 s / 2%") {
    const LoopResult r = run_loop(0.1, 5e-6);
    const ControllerGains g;
    // Average the dq current over the last cycle.
    const std::size_t cycle = static_cast<std::size_t>(1.0 / 60.0 / 5e-6);
    double d = 0.0, q = 0.0;
    for (std::size_t i = r.ig_dq.size() - cycle; i < r.ig_dq.size(); ++i) {
        d += r.ig_dq[i].d;
        q += r.ig_dq[i].q;
    }
    d /= static_cast<double>(cycle);
    q /= static_cast<double>(cycle);
    CHECK(d == doctest::Approx(g.i_ref_d).epsilon(0.02));
    CHECK(std::fabs(q) < 0.02 * g.i_ref_d);
}

TEST_CASE("closed loop: grid current THD below 1% after lock") {
    const LoopResult r = run_loop(0.3, 5e-6);
    const double dt = 5e-6;
    const std::size_t cycle = static_cast<std::size_t>(1.0 / 60.0 / dt);
    const std::size_t first = r.ig_a.size() - 6 * cycle;

    // DFT magnitudes at harmonics 1..40 over an integer number of cycles.
    auto magnitude = [&](int harmonic) {
        double c = 0.0, s = 0.0;
        const std::size_t n = 6 * cycle;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(first + i) * dt;
            const double w = kTwoPi * 60.0 * harmonic;
            c += r.ig_a[first + i] * std::cos(w * t);
            s += r.ig_a[first + i] * std::sin(w * t);
        }
        return 2.0 * std::hypot(c, s) / static_cast<double>(n);
    };
    const double fundamental = magnitude(1);
    REQUIRE(fundamental > 1.0);
    double harm2 = 0.0;
    for (int h = 2; h <= 40; ++h) {
        const double m = magnitude(h);
        harm2 += m * m;
    }
    CHECK(std::sqrt(harm2) / fundamental < 0.01);
}
