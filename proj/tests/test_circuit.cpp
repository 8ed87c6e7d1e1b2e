#include "circuit.hpp"
#include "errors.hpp"
#include "fault.hpp"
#include "oracles.hpp"
#include "rng.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace gridfdd;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

CircuitState random_state(std::uint64_t seed) {
    Rng rng(seed);
    CircuitState s;
    for (int ph = 0; ph < 3; ++ph) {
        s.i_l[ph] = rng.uniform(-20, 20);
        s.v_c[ph] = rng.uniform(-200, 200);
        s.i_g[ph] = rng.uniform(-20, 20);
    }
    return s;
}
} // namespace

TEST_CASE("params: defaults match the study system and validate") {
    CircuitParams p;
    CHECK(p.r1 == 0.5);
    CHECK(p.r2 == 0.5);
    CHECK(p.c == 4.5e-6);
    CHECK(p.l1 == 0.09e-3);
    CHECK(p.l2 == 0.09e-3);
    CHECK(p.vdc == 500.0);
    CHECK(p.f_grid == 60.0);
    CHECK(p.v_ll_rms == 220.0);
    CHECK(p.f_sw == 10e3);
    CHECK_NOTHROW(p.validate());
    CHECK(p.phase_peak() == doctest::Approx(179.6292478041).epsilon(1e-10));

    p.l1 = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = CircuitParams{};
    p.vdc = -1;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("lcl_derivative: zero state and inputs give zero derivative") {
    const CircuitParams p;
    const auto d = lcl_derivative({}, {}, {}, p);
    for (int ph = 0; ph < 3; ++ph) {
        CHECK(d.di_l[ph] == 0.0);
        CHECK(d.dv_c[ph] == 0.0);
        CHECK(d.di_g[ph] == 0.0);
    }
}

TEST_CASE("lcl_derivative: single-term R1/L1 decay on phase a") {
    const CircuitParams p;
    CircuitState s;
    s.i_l.a = 1.0;
    const auto d = lcl_derivative(s, {}, {}, p);
    CHECK(d.di_l.a == doctest::Approx(-0.5 / 0.09e-3).epsilon(1e-12)); // -5555.6 A/s
    CHECK(d.dv_c.a == doctest::Approx(1.0 / 4.5e-6));
    CHECK(d.di_g.a == 0.0);
    CHECK(d.di_l.b == 0.0);
}

TEST_CASE("lcl_derivative: rejects non-finite input") {
    const CircuitParams p;
    CircuitState s;
    s.v_c.b = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(lcl_derivative(s, {}, {}, p), NumericError);
    s = {};
    ThreePhase bad{0, std::numeric_limits<double>::infinity(), 0};
    CHECK_THROWS_AS(lcl_derivative(s, bad, {}, p), NumericError);
}

TEST_CASE("lcl_derivative: phases are decoupled bit-for-bit") {
    const CircuitParams p;
    const CircuitState s = random_state(11);
    const ThreePhase v_inv{40.0, -12.0, 7.5};
    const ThreePhase v_pcc{150.0, -80.0, -70.0};
    const auto base = lcl_derivative(s, v_inv, v_pcc, p);

    CircuitState s2 = s;
    s2.i_l.a += 3.0;
    s2.v_c.a -= 25.0;
    const auto mod = lcl_derivative(s2, {v_inv.a + 10.0, v_inv.b, v_inv.c}, v_pcc, p);
    CHECK(mod.di_l.b == base.di_l.b);
    CHECK(mod.dv_c.b == base.dv_c.b);
    CHECK(mod.di_g.c == base.di_g.c);
    CHECK(mod.di_l.a != base.di_l.a);
}

TEST_CASE("lcl_derivative: consistent with the phasor solution in steady state") {
    const CircuitParams p;
    const double omega = kTwoPi * p.f_grid;
    const std::complex<double> v_inv_ph{190.0, 10.0};
    const std::complex<double> e_ph{179.0, 0.0};
    const auto sol = test::phasor_ladder(v_inv_ph, e_ph, omega, p);

    // Build the balanced three-phase state at t = 0 from the phasors.
    auto inst = [](std::complex<double> ph, double shift) {
        return (ph * std::exp(std::complex<double>(0.0, shift))).real();
    };
    CircuitState s;
    ThreePhase v_inv, v_pcc;
    const double shifts[3] = {0.0, -kTwoPi / 3.0, kTwoPi / 3.0};
    for (int ph = 0; ph < 3; ++ph) {
        s.i_l[ph] = inst(sol.i_l, shifts[ph]);
        s.v_c[ph] = inst(sol.v_c, shifts[ph]);
        s.i_g[ph] = inst(sol.i_g, shifts[ph]);
        v_inv[ph] = inst(v_inv_ph, shifts[ph]);
        v_pcc[ph] = inst(sol.v_pcc, shifts[ph]);
    }
    const auto d = lcl_derivative(s, v_inv, v_pcc, p);
    // d/dt of Re(X e^{jwt}) at t=0 is Re(jw X).
    auto expect = [&](std::complex<double> ph, double shift) {
        return (std::complex<double>(0.0, omega) * ph *
                std::exp(std::complex<double>(0.0, shift)))
            .real();
    };
    for (int ph = 0; ph < 3; ++ph) {
        CHECK(d.di_l[ph] == doctest::Approx(expect(sol.i_l, shifts[ph])).epsilon(1e-9));
        CHECK(d.dv_c[ph] == doctest::Approx(expect(sol.v_c, shifts[ph])).epsilon(1e-9));
        CHECK(d.di_g[ph] == doctest::Approx(expect(sol.i_g, shifts[ph])).epsilon(1e-9));
    }
}

TEST_CASE("step_rk4: zero state with zero inputs stays zero; dt validated") {
    const CircuitParams p;
    const CircuitState out = step_rk4({}, {}, {}, 5e-6, p);
    CHECK(out.i_l.norm2() == 0.0);
    CHECK(out.v_c.norm2() == 0.0);
    CHECK(out.i_g.norm2() == 0.0);
    CHECK(out.t == doctest::Approx(5e-6));
    CHECK_THROWS_AS(step_rk4({}, {}, {}, 0.0, p), ConfigError);
    CHECK_THROWS_AS(step_rk4({}, {}, {}, -1e-6, p), ConfigError);
}

TEST_CASE("step_rk4: unforced state decays over one grid period") {
    const CircuitParams p;
    CircuitState s = random_state(3);
    const double e0 = s.energy(p);
    const double dt = 5e-6;
    const auto steps = static_cast<int>(1.0 / p.f_grid / dt);
    for (int i = 0; i < steps; ++i) s = step_rk4(s, {}, {}, dt, p);
    CHECK(s.energy(p) < 0.05 * e0);
}

TEST_CASE("step_rk4: passivity, stored energy non-increasing every step") {
    const CircuitParams p;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        CircuitState s = random_state(seed);
        double prev = s.energy(p);
        const double dt = 5e-6;
        for (int i = 0; i < 3400; ++i) { // one grid period
            s = step_rk4(s, {}, {}, dt, p);
            const double e = s.energy(p);
            CHECK(e <= prev * (1.0 + 1e-12));
            prev = e;
        }
    }
}

TEST_CASE("step_rk4: response is linear in the inputs") {
    const CircuitParams p;
    const double dt = 5e-6;
    auto drive = [&](double amp_inv, double amp_pcc) {
        CircuitState s;
        for (int i = 0; i < 400; ++i) {
            const double t = i * dt;
            ThreePhase v_inv, v_pcc;
            for (int ph = 0; ph < 3; ++ph) {
                v_inv[ph] = amp_inv * std::cos(kTwoPi * 60 * t + ph);
                v_pcc[ph] = amp_pcc * std::sin(kTwoPi * 60 * t + 2 * ph);
            }
            s = step_rk4(s, v_inv, v_pcc, dt, p);
        }
        return s;
    };
    const CircuitState a = drive(120.0, 0.0);
    const CircuitState b = drive(0.0, 90.0);
    const CircuitState ab = drive(120.0, 90.0);
    for (int ph = 0; ph < 3; ++ph) {
        CHECK(ab.i_l[ph] == doctest::Approx(a.i_l[ph] + b.i_l[ph]).epsilon(1e-9));
        CHECK(ab.v_c[ph] == doctest::Approx(a.v_c[ph] + b.v_c[ph]).epsilon(1e-9));
        CHECK(ab.i_g[ph] == doctest::Approx(a.i_g[ph] + b.i_g[ph]).epsilon(1e-9));
    }
}

TEST_CASE("averaged_inverter: definition and clamp rule") {
    bool sat = false;
    const ThreePhase zero = averaged_inverter({0, 0, 0}, 500.0, &sat);
    CHECK(zero.a == 0.0);
    CHECK(zero.b == 0.0);
    CHECK(zero.c == 0.0);
    CHECK_FALSE(sat);

    const ThreePhase v = averaged_inverter({1.0, -1.0, 0.0}, 500.0, &sat);
    CHECK(v.a == 250.0);
    CHECK(v.b == -250.0);
    CHECK(v.c == 0.0);
    CHECK_FALSE(sat);

    const ThreePhase clamped = averaged_inverter({1.2, 0.0, 0.0}, 500.0, &sat);
    CHECK(clamped.a == 250.0);
    CHECK(clamped.b == 0.0);
    CHECK(sat);
}

TEST_CASE("spwm_inverter: rail selection and carrier averages") {
    // m = 1 ties or beats the carrier everywhere.
    for (double t : {0.0, 1.23e-4, 7.7e-5})
        CHECK(spwm_inverter({1, 1, 1}, t, 500.0, 10e3).a == 250.0);

    // Zero modulation averages to zero over one carrier period.
    const double period = 1.0 / 10e3;
    const int n = 1000;
    ThreePhase acc{};
    for (int i = 0; i < n; ++i)
        acc += spwm_inverter({0, 0, 0}, (i + 0.5) * period / n, 500.0, 10e3) * (1.0 / n);
    CHECK(std::fabs(acc.a) < 1.0);

    // Duty-cycle integral: m = 0.5 averages to 0.5 * vdc / 2 = 125 V.
    double mean = 0.0;
    for (int i = 0; i < n; ++i)
        mean += spwm_inverter({0.5, 0, 0}, (i + 0.5) * period / n, 500.0, 10e3).a / n;
    CHECK(mean == doctest::Approx(125.0).epsilon(0.008)); // +-1 V

    // Carrier shape: symmetric triangle from -1.
    CHECK(triangular_carrier(0.0, 10e3) == doctest::Approx(-1.0));
    CHECK(triangular_carrier(0.25 * period, 10e3) == doctest::Approx(0.0));
    CHECK(triangular_carrier(0.5 * period, 10e3) == doctest::Approx(1.0));
    CHECK(triangular_carrier(0.75 * period, 10e3) == doctest::Approx(0.0));
}

TEST_CASE("steady state matches the phasor oracle within 0.5% / 0.5 deg") {
    const CircuitParams p;
    const double omega = kTwoPi * p.f_grid;
    const double ts = 5e-6;
    const double m_amp = 0.75, m_phase = 0.12;

    // Fixed sinusoidal modulation against the stiff grid source, no fault.
    CircuitState s;
    const auto steps = static_cast<std::size_t>(12.0 / p.f_grid / ts); // 12 cycles
    std::vector<double> iga;
    iga.reserve(steps);
    for (std::size_t i = 0; i < steps; ++i) {
        const double t = static_cast<double>(i) * ts;
        ThreePhase m;
        const double shifts[3] = {0.0, -kTwoPi / 3.0, kTwoPi / 3.0};
        for (int ph = 0; ph < 3; ++ph) m[ph] = m_amp * std::cos(omega * t + m_phase + shifts[ph]);
        const ThreePhase v_inv = averaged_inverter(m, p.vdc);
        const ThreePhase v_pcc = solve_pcc_voltage(p.source_voltage(t), s.i_g, nullptr, p);
        s = step_rk4(s, v_inv, v_pcc, ts, p);
        iga.push_back(s.i_g.a);
    }

    const std::complex<double> v_inv_ph = std::polar(m_amp * p.vdc / 2.0, m_phase);
    const auto sol = test::phasor_ladder(v_inv_ph, {p.phase_peak(), 0.0}, omega, p);

    // Fit the last two cycles (states recorded at t + ts).
    const auto cycle = static_cast<std::size_t>(1.0 / p.f_grid / ts);
    const auto fit = test::fit_sine(iga, steps - 2 * cycle, 2 * cycle, omega, ts, ts);
    CHECK(fit.amplitude == doctest::Approx(std::abs(sol.i_g)).epsilon(0.005));
    const double phase_err = test::wrap_pi(fit.phase - std::arg(sol.i_g));
    CHECK(std::fabs(phase_err) < 0.5 * std::numbers::pi / 180.0);
}
