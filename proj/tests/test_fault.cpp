#include "fault.hpp"

#include "errors.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace gridfdd;

namespace {

FaultSpec spec_of(FaultClass cls, double t0, double t1, double rp, double rg) {
    FaultSpec s;
    s.fault_class = cls;
    s.t_start = t0;
    s.t_end = t1;
    if (rp > 0) s.r_phase = rp;
    if (rg > 0) s.r_ground = rg;
    return s;
}

// Table I, verbatim: class, start, end, r_phase, r_ground (0 = absent).
struct Row {
    FaultClass cls;
    double t0, t1, rp, rg;
};

constexpr Row kTrainRows[] = {
    {FaultClass::AG, 0.40, 0.50, 0.08, 0.08},  {FaultClass::BG, 0.60, 0.70, 0.08, 0.08},
    {FaultClass::CG, 0.85, 0.95, 0.08, 0.08},  {FaultClass::AB, 1.05, 1.15, 0.30, 0},
    {FaultClass::BC, 1.40, 1.60, 0.10, 0},     {FaultClass::CA, 1.70, 1.85, 0.60, 0},
    {FaultClass::ABG, 2.00, 2.10, 0.08, 0.08}, {FaultClass::BCG, 2.50, 2.80, 0.10, 0.10},
    {FaultClass::CAG, 3.00, 3.15, 0.50, 0.50}, {FaultClass::ABC, 3.50, 3.70, 0.30, 0},
    {FaultClass::ABCG, 3.85, 3.95, 0.30, 0.30},
};

constexpr Row kTestRows[] = {
    {FaultClass::AG, 1.00, 1.22, 0.30, 0.30},  {FaultClass::BG, 2.62, 2.75, 0.20, 0.20},
    {FaultClass::CG, 0.32, 0.50, 0.10, 0.10},  {FaultClass::AB, 1.12, 1.19, 0.07, 0},
    {FaultClass::BC, 2.22, 2.30, 0.30, 0},     {FaultClass::CA, 1.89, 2.17, 0.10, 0},
    {FaultClass::ABG, 0.10, 0.18, 0.25, 0.25}, {FaultClass::BCG, 2.41, 2.50, 0.30, 0.30},
    {FaultClass::CAG, 3.70, 3.82, 0.08, 0.08}, {FaultClass::ABC, 1.70, 1.81, 0.10, 0},
    {FaultClass::ABCG, 0.72, 0.80, 0.50, 0.50},
};

void check_rows(const ScenarioSchedule& sched, const Row* rows, std::size_t n) {
    REQUIRE(sched.specs().size() == n);
    for (std::size_t i = 0; i < n; ++i) {
        // Schedules sort by start time; find the row for this class.
        const Row* want = nullptr;
        for (std::size_t r = 0; r < n; ++r)
            if (rows[r].cls == sched.specs()[i].fault_class) want = &rows[r];
        REQUIRE(want != nullptr);
        const FaultSpec& got = sched.specs()[i];
        CHECK(got.t_start == want->t0);
        CHECK(got.t_end == want->t1);
        REQUIRE(got.r_phase.has_value());
        CHECK(*got.r_phase == want->rp);
        if (want->rg > 0) {
            REQUIRE(got.r_ground.has_value());
            CHECK(*got.r_ground == want->rg);
        } else {
            CHECK_FALSE(got.r_ground.has_value());
        }
    }
}

} // namespace

TEST_CASE("fault classes: twelve distinct labels with round-tripping tokens") {
    for (int c = 0; c < kNumFaultClasses; ++c) {
        const auto cls = static_cast<FaultClass>(c);
        CHECK(fault_class_from_string(to_string(cls)) == cls);
    }
    CHECK(fault_class_from_string("A-B-G") == FaultClass::ABG);
    CHECK(fault_class_from_string("abcg") == FaultClass::ABCG);
    CHECK_THROWS_AS(fault_class_from_string("a-x"), ScheduleError);
}

TEST_CASE("fault spec validation enforces the resistance rules") {
    CHECK_NOTHROW(spec_of(FaultClass::AG, 0.1, 0.2, 0.08, 0.08).validate());
    // interval
    CHECK_THROWS_AS(spec_of(FaultClass::AG, 0.2, 0.2, 0.08, 0.08).validate(), ScheduleError);
    // grounded class without r_ground
    CHECK_THROWS_AS(spec_of(FaultClass::AG, 0.1, 0.2, 0.08, 0).validate(), ScheduleError);
    // ungrounded class with r_ground
    CHECK_THROWS_AS(spec_of(FaultClass::AB, 0.1, 0.2, 0.3, 0.3).validate(), ScheduleError);
    // missing r_phase
    CHECK_THROWS_AS(spec_of(FaultClass::AB, 0.1, 0.2, 0, 0).validate(), ScheduleError);
    // NORMAL carries no resistances
    CHECK_THROWS_AS(spec_of(FaultClass::NORMAL, 0, 0, 0.1, 0).validate(), ScheduleError);
}

TEST_CASE("fault_admittance: AG chain, AB floating pair, NORMAL empty") {
    const FaultNetwork ag = fault_admittance(spec_of(FaultClass::AG, 0.4, 0.5, 0.08, 0.08));
    CHECK(ag.phases == std::array<bool, 3>{true, false, false});
    CHECK(ag.num_phases == 1);
    CHECK(ag.g_phase == doctest::Approx(1.0 / 0.08));
    CHECK(ag.g_ground == doctest::Approx(1.0 / 0.08));
    CHECK(ag.grounded);

    const FaultNetwork ab = fault_admittance(spec_of(FaultClass::AB, 1.05, 1.15, 0.3, 0));
    CHECK(ab.phases == std::array<bool, 3>{true, true, false});
    CHECK(ab.num_phases == 2);
    CHECK_FALSE(ab.grounded);
    CHECK(ab.g_ground == 0.0);

    FaultSpec normal;
    CHECK(fault_admittance(normal).empty());
}

TEST_CASE("solve_pcc_voltage: no fault and no current means no drop") {
    const CircuitParams p;
    const ThreePhase e = p.source_voltage(0.123);
    const ThreePhase v = solve_pcc_voltage(e, {}, nullptr, p);
    CHECK(v.a == e.a);
    CHECK(v.b == e.b);
    CHECK(v.c == e.c);
}

TEST_CASE("solve_pcc_voltage: series drop with injected current") {
    const CircuitParams p;
    const ThreePhase e{100.0, -50.0, -50.0};
    const ThreePhase ig{10.0, -4.0, -6.0};
    const ThreePhase v = solve_pcc_voltage(e, ig, nullptr, p);
    const double zs = p.series_impedance_mag();
    CHECK(v.a == doctest::Approx(100.0 + zs * 10.0).epsilon(1e-12));
    CHECK(v.b == doctest::Approx(-50.0 - zs * 4.0).epsilon(1e-12));
}

TEST_CASE("solve_pcc_voltage: bolted three-phase fault collapses the bus") {
    const CircuitParams p;
    const FaultSpec abcg = spec_of(FaultClass::ABCG, 0, 1, 1e-6, 1e-6);
    const ThreePhase e = p.source_voltage(0.004);
    const ThreePhase v = solve_pcc_voltage(e, {}, &abcg, p);
    CHECK(std::sqrt(v.norm2()) < 0.01 * std::sqrt(e.norm2()));
}

TEST_CASE("solve_pcc_voltage: AG divider matches the two-node nodal oracle") {
    const CircuitParams p;
    const FaultSpec ag = spec_of(FaultClass::AG, 0, 1, 0.08, 0.08);
    const ThreePhase e = p.source_voltage(0.0);
    const ThreePhase v = solve_pcc_voltage(e, {}, &ag, p);

    // Oracle: phase a feeds r_phase + r_ground through the series resistance.
    const double r_chain = 0.08 + 0.08;
    const double zs = p.series_impedance_mag();
    CHECK(v.a == doctest::Approx(e.a * r_chain / (r_chain + zs)).epsilon(1e-12));
    // Healthy phases are untouched at zero current.
    CHECK(v.b == e.b);
    CHECK(v.c == e.c);
}

TEST_CASE("solve_pcc_voltage: r -> infinity recovers the no-fault solution") {
    const CircuitParams p;
    const ThreePhase e = p.source_voltage(0.002);
    const ThreePhase ig{3.0, -1.0, -2.0};
    const ThreePhase base = solve_pcc_voltage(e, ig, nullptr, p);
    for (FaultClass cls : {FaultClass::AG, FaultClass::BC, FaultClass::ABCG}) {
        const bool g = involves_ground(cls);
        const FaultSpec weak = spec_of(cls, 0, 1, 1e9, g ? 1e9 : 0);
        const ThreePhase v = solve_pcc_voltage(e, ig, &weak, p);
        for (int ph = 0; ph < 3; ++ph)
            CHECK(v[ph] == doctest::Approx(base[ph]).epsilon(1e-6));
    }
}

TEST_CASE("solve_pcc_voltage: floating-node branch currents sum to zero") {
    const CircuitParams p;
    for (FaultClass cls : {FaultClass::AB, FaultClass::BC, FaultClass::CA, FaultClass::ABC}) {
        const FaultSpec spec = spec_of(cls, 0, 1, 0.17, 0);
        const FaultNetwork net = fault_admittance(spec);
        const ThreePhase e = p.source_voltage(0.0071);
        const ThreePhase ig{5.0, 1.0, -6.0};
        const ThreePhase v = solve_pcc_voltage(e, ig, &spec, p);
        const ThreePhase i_f = fault_branch_currents(v, net);
        CHECK(std::fabs(i_f.a + i_f.b + i_f.c) < 1e-9);
    }
}

TEST_CASE("solve_pcc_voltage: KCL holds at every PCC node") {
    const CircuitParams p;
    const FaultSpec spec = spec_of(FaultClass::BCG, 0, 1, 0.1, 0.1);
    const FaultNetwork net = fault_admittance(spec);
    const ThreePhase e = p.source_voltage(0.013);
    const ThreePhase ig{-2.0, 7.0, -5.0};
    const ThreePhase v = solve_pcc_voltage(e, ig, &spec, p);
    const ThreePhase i_f = fault_branch_currents(v, net);
    const double gs = 1.0 / p.series_impedance_mag();
    for (int ph = 0; ph < 3; ++ph) {
        const double kcl = gs * (e[ph] - v[ph]) + ig[ph] - i_f[ph];
        CHECK(std::fabs(kcl) < 1e-9);
    }
}

TEST_CASE("built-in schedules reproduce every Table I row exactly") {
    check_rows(ScenarioSchedule::builtin("table1-train"), kTrainRows, 11);
    check_rows(ScenarioSchedule::builtin("table1-test"), kTestRows, 11);
    CHECK(ScenarioSchedule::builtin("table1-train").duration() == 4.0);
    CHECK(ScenarioSchedule::builtin("table1-test").duration() == 4.0);
    CHECK_THROWS_AS(ScenarioSchedule::builtin("nope"), ScheduleError);
}

TEST_CASE("scenario 1 keeps the test timing but the training resistances") {
    const auto s1 = ScenarioSchedule::builtin("table1-test-s1");
    REQUIRE(s1.specs().size() == 11);
    for (const FaultSpec& s : s1.specs()) {
        const Row* timing = nullptr;
        const Row* training = nullptr;
        for (const Row& r : kTestRows)
            if (r.cls == s.fault_class) timing = &r;
        for (const Row& r : kTrainRows)
            if (r.cls == s.fault_class) training = &r;
        REQUIRE(timing);
        REQUIRE(training);
        CHECK(s.t_start == timing->t0);
        CHECK(s.t_end == timing->t1);
        CHECK(*s.r_phase == training->rp);
        if (training->rg > 0) CHECK(*s.r_ground == training->rg);
    }
}

TEST_CASE("label_at: Table I train lookups and range checking") {
    const auto train = ScenarioSchedule::builtin("table1-train");
    CHECK(train.label_at(0.45) == FaultClass::AG);
    CHECK(train.label_at(0.0) == FaultClass::NORMAL);
    CHECK(train.label_at(2.6) == FaultClass::BCG);
    // Interval semantics: [t_start, t_end).
    CHECK(train.label_at(0.40) == FaultClass::AG);
    CHECK(train.label_at(0.50) == FaultClass::NORMAL);
    CHECK_THROWS_AS(train.label_at(-0.1), std::out_of_range);
    CHECK_THROWS_AS(train.label_at(4.1), std::out_of_range);
}

TEST_CASE("label_at: exactly one label everywhere, nested test rows resolved") {
    const auto test_sched = ScenarioSchedule::builtin("table1-test");
    // The published a-b row sits inside the a-g row; the later start wins.
    CHECK(test_sched.label_at(1.05) == FaultClass::AG);
    CHECK(test_sched.label_at(1.15) == FaultClass::AB);
    CHECK(test_sched.label_at(1.20) == FaultClass::AG);
    CHECK(test_sched.label_at(1.22) == FaultClass::NORMAL);
    for (double t = 0.0; t <= 4.0; t += 0.001) CHECK_NOTHROW(test_sched.label_at(t));
}

TEST_CASE("schedule invariants: same start rejected, duration must cover") {
    std::vector<FaultSpec> two = {spec_of(FaultClass::AG, 0.1, 0.2, 0.1, 0.1),
                                  spec_of(FaultClass::BG, 0.1, 0.3, 0.1, 0.1)};
    CHECK_THROWS_AS(ScenarioSchedule(two, 1.0), ScheduleError);
    std::vector<FaultSpec> late = {spec_of(FaultClass::AG, 0.1, 1.2, 0.1, 0.1)};
    CHECK_THROWS_AS(ScenarioSchedule(late, 1.0), ScheduleError);
}

TEST_CASE("schedule text format round-trips and rejects malformed lines") {
    const std::string text = "# demo schedule\n"
                             "a-g 0.1 0.2 0.08 0.08\n"
                             "a-b 0.3 0.4 0.3 -  # floating pair\n"
                             "\n"
                             "a-b-c 0.5 0.6 0.2 -\n";
    const auto sched = ScenarioSchedule::parse(text, 1.0);
    REQUIRE(sched.specs().size() == 3);
    CHECK(sched.specs()[0].fault_class == FaultClass::AG);
    CHECK(sched.specs()[1].fault_class == FaultClass::AB);
    CHECK_FALSE(sched.specs()[1].r_ground.has_value());

    const auto reparsed = ScenarioSchedule::parse(sched.to_text(), 1.0);
    REQUIRE(reparsed.specs().size() == 3);
    CHECK(reparsed.specs()[2].t_end == 0.6);
    CHECK(*reparsed.specs()[2].r_phase == 0.2);

    CHECK_THROWS_AS(ScenarioSchedule::parse("a-g 0.1 0.2 0.08\n", 1.0), ScheduleError);
    CHECK_THROWS_AS(ScenarioSchedule::parse("a-g 0.1 0.2 0.08 0.08 junk\n", 1.0),
                    ScheduleError);
    CHECK_THROWS_AS(ScenarioSchedule::parse("wat 0.1 0.2 0.08 0.08\n", 1.0), ScheduleError);
    CHECK_THROWS_AS(ScenarioSchedule::parse("a-g 0.1 0.2 oops 0.08\n", 1.0), ScheduleError);
    CHECK_THROWS_AS(ScenarioSchedule::parse("normal 0.1 0.2 - -\n", 1.0), ScheduleError);
}
