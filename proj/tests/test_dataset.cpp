#include "dataset.hpp"

#include "errors.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <set>

using namespace gridfdd;

namespace {

std::shared_ptr<RecordedTrace> synthetic_trace(std::size_t len, double ts = 5e-6) {
    auto tr = std::make_shared<RecordedTrace>(ts, PuBases{});
    for (std::size_t i = 0; i < len; ++i) {
        const double x = 1e-3 * static_cast<double>(i);
        tr->append({x, -x, 0.5 * x}, {0.1, -0.1, 0.0}, {x, x, -x},
                   i % 7 == 0 ? FaultClass::AG : FaultClass::NORMAL);
    }
    return tr;
}

} // namespace

TEST_CASE("per_unit: scaling, clamping, and the clip counter") {
    std::int64_t clips = 0;
    const double base = 179.6292478041;
    CHECK(per_unit(base, base, &clips) == 1.0);
    CHECK(per_unit(0.0, base, &clips) == 0.0);
    CHECK(clips == 0);
    CHECK(per_unit(-2.0 * base, base, &clips) == -1.0);
    CHECK(clips == 1);
    CHECK(per_unit(1.5 * base, base, &clips) == 1.0);
    CHECK(clips == 2);
    CHECK_THROWS_AS(per_unit(1.0, 0.0, &clips), ConfigError);
    CHECK_THROWS_AS(per_unit(1.0, -2.0, &clips), ConfigError);
}

TEST_CASE("run_scenario: zero duration yields an empty trace") {
    const auto sched = ScenarioSchedule::builtin("table1-train");
    const RecordedTrace tr = run_scenario(sched, {}, 5e-6, 0.0);
    CHECK(tr.size() == 0);
}

TEST_CASE("run_scenario: fault-free schedule labels everything normal") {
    const ScenarioSchedule sched({}, 0.02);
    const RecordedTrace tr = run_scenario(sched, {}, 5e-6, 0.02);
    REQUIRE(tr.size() == 4000);
    for (std::size_t i = 0; i < tr.size(); ++i) CHECK(tr.label(i) == FaultClass::NORMAL);
}

TEST_CASE("run_scenario: labels follow the schedule at every sample") {
    const auto sched = ScenarioSchedule::builtin("table1-train");
    const double ts = 1e-4;
    const RecordedTrace tr = run_scenario(sched, {}, ts, 1.0);
    for (std::size_t i = 0; i < tr.size(); ++i)
        CHECK(tr.label(i) == sched.label_at(tr.time_of(i)));
}

TEST_CASE("run_scenario: per-unit range and finite values everywhere") {
    const auto sched = ScenarioSchedule::builtin("table1-train");
    const RecordedTrace tr = run_scenario(sched, {}, 5e-5, 0.8); // includes a-g, b-g
    REQUIRE(tr.size() == 16000);
    for (std::size_t i = 0; i < tr.size(); ++i)
        for (int ch = 0; ch < RecordedTrace::kChannels; ++ch) {
            CHECK(tr.row(i)[ch] <= 1.0);
            CHECK(tr.row(i)[ch] >= -1.0);
        }
}

TEST_CASE("run_scenario: the Table I horizon at 5 us yields 800000 rows") {
    const auto sched = ScenarioSchedule::builtin("table1-train");
    const RecordedTrace tr = run_scenario(sched, {}, 5e-6, 4.0);
    CHECK(tr.size() == 800000);
}

TEST_CASE("run_scenario: deterministic, bit-identical reruns") {
    const auto sched = ScenarioSchedule::builtin("table1-train");
    const RecordedTrace a = run_scenario(sched, {}, 5e-5, 0.6);
    const RecordedTrace b = run_scenario(sched, {}, 5e-5, 0.6);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (int ch = 0; ch < RecordedTrace::kChannels; ++ch)
            CHECK(a.row(i)[ch] == b.row(i)[ch]);
        CHECK(a.label(i) == b.label(i));
    }
}

TEST_CASE("run_scenario: switched PWM model stays bounded and close to averaged") {
    const auto sched = ScenarioSchedule::builtin("table1-train");
    SimOptions opt;
    opt.switched_pwm = true;
    opt.switched_dt = 1e-6;
    const RecordedTrace sw = run_scenario(sched, {}, 5e-6, 0.02, opt);
    REQUIRE(sw.size() == 4000);
    for (std::size_t i = 0; i < sw.size(); ++i)
        CHECK(std::isfinite(sw.row(i)[0]));
    CHECK_THROWS_AS(run_scenario(sched, {}, 2.5e-6, 0.01, opt), ConfigError);
}

TEST_CASE("make_windows: counting rules") {
    CHECK(make_windows(synthetic_trace(25), 20, 1).size() == 5);
    CHECK(make_windows(synthetic_trace(21), 20, 1).size() == 1);
    CHECK(make_windows(synthetic_trace(800000), 20, 1).size() == 799980);
    CHECK(make_windows(synthetic_trace(800000), 20, 19).size() == 42105);
    CHECK(make_windows(synthetic_trace(800000), 20, 20).size() == 39999);
    CHECK_THROWS_AS(make_windows(synthetic_trace(20), 20, 1), ConfigError);
    CHECK_THROWS_AS(make_windows(synthetic_trace(25), 20, 0), ConfigError);
}

TEST_CASE("make_windows: targets, labels, and input blocks line up") {
    const auto tr = synthetic_trace(60);
    const Dataset d = make_windows(tr, 20, 3);
    REQUIRE(d.size() > 0);
    std::vector<double> buf(20 * RecordedTrace::kChannels);
    for (std::size_t w = 0; w < d.size(); ++w) {
        const std::size_t target = d.target_index(w);
        CHECK(target == d.starts()[w] + 20);
        CHECK(d.label(w) == tr->label(target));
        const ThreePhase t = d.target(w);
        CHECK(t.a == tr->v_star(target).a);
        d.copy_inputs(w, buf.data());
        CHECK(buf[0] == tr->row(d.starts()[w])[0]);
        CHECK(buf.back() == tr->row(d.starts()[w] + 19)[8]);
    }
}

TEST_CASE("split_train_val: sizes, disjointness, coverage, determinism") {
    const Dataset d = make_windows(synthetic_trace(120), 20, 1); // 100 windows
    auto [train, val] = split_train_val(d, 0.70, 42);
    CHECK(train.size() == 70);
    CHECK(val.size() == 30);

    std::set<std::size_t> starts;
    for (std::size_t s : train.starts()) starts.insert(s);
    for (std::size_t s : val.starts()) starts.insert(s);
    CHECK(starts.size() == 100); // disjoint and covering

    auto [t2, v2] = split_train_val(d, 0.70, 42);
    CHECK(t2.starts() == train.starts());
    auto [t3, v3] = split_train_val(d, 0.70, 43);
    CHECK(t3.starts() != train.starts());

    const Dataset d10 = make_windows(synthetic_trace(30), 20, 1); // 10 windows
    auto [t10, v10] = split_train_val(d10, 0.70, 1);
    CHECK(t10.size() == 7);
    CHECK(v10.size() == 3);

    CHECK_THROWS_AS(split_train_val(d, 0.0, 1), ConfigError);
    CHECK_THROWS_AS(split_train_val(d, 1.0, 1), ConfigError);
}

TEST_CASE("split_train_val: chronological mode keeps order") {
    const Dataset d = make_windows(synthetic_trace(120), 20, 1);
    auto [train, val] = split_train_val(d, 0.70, 9, true);
    CHECK(train.size() == 70);
    CHECK(std::is_sorted(train.starts().begin(), train.starts().end()));
    CHECK(val.starts().front() > train.starts().back());
}

TEST_CASE("kfold: partition laws and near-equal sizes") {
    const Dataset d10 = make_windows(synthetic_trace(30), 20, 1); // 10 windows
    const auto folds10 = kfold(d10, 10, 7);
    REQUIRE(folds10.size() == 10);
    for (const auto& f : folds10) CHECK(f.val.size() == 1);

    const Dataset d25 = make_windows(synthetic_trace(45), 20, 1); // 25 windows
    const auto folds = kfold(d25, 10, 7);
    REQUIRE(folds.size() == 10);
    std::multiset<std::size_t> sizes;
    std::set<std::size_t> all_val;
    for (const auto& f : folds) {
        sizes.insert(f.val.size());
        for (std::size_t i : f.val) {
            CHECK(all_val.insert(i).second); // each window in exactly one fold
            CHECK(std::find(f.train.begin(), f.train.end(), i) == f.train.end());
        }
        CHECK(f.train.size() + f.val.size() == 25);
    }
    CHECK(all_val.size() == 25);
    CHECK(sizes.count(3) == 5); // five folds of 3 and five of 2
    CHECK(sizes.count(2) == 5);

    const auto again = kfold(d25, 10, 7);
    for (int f = 0; f < 10; ++f) CHECK(again[f].val == folds[f].val);

    CHECK_THROWS_AS(kfold(d10, 1, 0), ConfigError);
    CHECK_THROWS_AS(kfold(d10, 11, 0), ConfigError);
}

TEST_CASE("trace csv: exact numeric round trip with metadata") {
    const auto sched = ScenarioSchedule::builtin("table1-train");
    const RecordedTrace tr = run_scenario(sched, {}, 1e-4, 0.5);
    TraceMeta meta;
    meta.seed = 1234;
    meta.lookback = 20;
    meta.stride = 7;
    meta.schedule = "table1-train";

    const std::string path = std::filesystem::temp_directory_path() / "gridfdd_trace_test.csv";
    write_trace_csv(path, tr, meta);
    auto [rt, rmeta] = read_trace_csv(path);
    std::filesystem::remove(path);

    REQUIRE(rt->size() == tr.size());
    CHECK(rt->sample_period() == tr.sample_period());
    CHECK(rt->bases().v_base == tr.bases().v_base);
    CHECK(rt->bases().i_base == tr.bases().i_base);
    CHECK(rt->clip_count() == tr.clip_count());
    CHECK(rmeta.seed == 1234);
    CHECK(rmeta.lookback == 20);
    CHECK(rmeta.stride == 7);
    CHECK(rmeta.schedule == "table1-train");
    for (std::size_t i = 0; i < tr.size(); ++i) {
        for (int ch = 0; ch < RecordedTrace::kChannels; ++ch)
            CHECK(rt->row(i)[ch] == tr.row(i)[ch]); // bit-exact
        CHECK(rt->label(i) == tr.label(i));
    }
}

TEST_CASE("trace csv: rejects files that are not traces") {
    namespace fs = std::filesystem;
    const std::string path = fs::temp_directory_path() / "gridfdd_bogus.csv";
    {
        std::FILE* f = std::fopen(path.c_str(), "w");
        std::fputs("hello,world\n1,2\n", f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(read_trace_csv(path), IoError);
    fs::remove(path);
    CHECK_THROWS_AS(read_trace_csv("/nonexistent/nope.csv"), IoError);
}
