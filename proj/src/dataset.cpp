#include "dataset.hpp"

#include "errors.hpp"
#include "rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

namespace gridfdd {

double per_unit(double x, double base, std::int64_t* clip_counter) {
    if (!(base > 0.0)) throw ConfigError("per_unit: base must be > 0");
    double pu = x / base;
    if (pu > 1.0) {
        if (clip_counter) ++*clip_counter;
        return 1.0;
    }
    if (pu < -1.0) {
        if (clip_counter) ++*clip_counter;
        return -1.0;
    }
    return pu;
}

void RecordedTrace::append(const ThreePhase& v_g_pu, const ThreePhase& i_inv_pu,
                           const ThreePhase& v_star_pu, FaultClass label) {
    values_.insert(values_.end(), {v_g_pu.a, v_g_pu.b, v_g_pu.c, i_inv_pu.a, i_inv_pu.b,
                                   i_inv_pu.c, v_star_pu.a, v_star_pu.b, v_star_pu.c});
    labels_.push_back(label);
}

const char* RecordedTrace::channel_name(int ch) {
    static const char* names[kChannels] = {"vg_a", "vg_b", "vg_c", "iinv_a", "iinv_b",
                                           "iinv_c", "vstar_a", "vstar_b", "vstar_c"};
    return names[ch];
}

RecordedTrace run_scenario(const ScenarioSchedule& sched, const CircuitParams& p,
                           double sample_period, double duration, const SimOptions& opt) {
    p.validate();
    if (!(sample_period > 0)) throw ConfigError("run_scenario: sample_period must be > 0");
    if (duration < 0) throw ConfigError("run_scenario: duration must be >= 0");

    int substeps = stability_substeps(p, sample_period);
    if (opt.switched_pwm) {
        const double ratio = sample_period / opt.switched_dt;
        substeps = static_cast<int>(std::llround(ratio));
        if (substeps < 1 || std::fabs(ratio - substeps) > 1e-9 * ratio)
            throw ConfigError("run_scenario: sample_period must be an integer "
                              "multiple of the switched-model dt");
    }

    const std::size_t n = static_cast<std::size_t>(std::floor(duration / sample_period + 1e-9));
    RecordedTrace trace(sample_period, opt.bases);

    CircuitState state;
    ControllerState cs = make_controller_state(p);

    // Cache the active fault's network; rebuilding it per sample is wasteful.
    const FaultSpec* active_spec = nullptr;
    FaultNetwork net;
    std::int64_t clips = 0;

    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * sample_period;

        const FaultSpec* spec = t <= sched.duration() ? sched.active_at(t) : nullptr;
        if (spec != active_spec) {
            active_spec = spec;
            net = spec ? fault_admittance(*spec) : FaultNetwork{};
        }

        const ThreePhase v_src = p.source_voltage(t);
        const ThreePhase v_pcc = solve_pcc_voltage(v_src, state.i_g, net, p);

        cs = pll_step(v_pcc, cs, sample_period, p, opt.gains);
        const ThreePhase m = pi_current_step(state.i_g, v_pcc, cs, sample_period, p, opt.gains);

        const FaultClass label = spec ? spec->fault_class : FaultClass::NORMAL;
        const double half_vdc = p.vdc / 2.0;
        trace.append({per_unit(v_pcc.a, opt.bases.v_base, &clips),
                      per_unit(v_pcc.b, opt.bases.v_base, &clips),
                      per_unit(v_pcc.c, opt.bases.v_base, &clips)},
                     {per_unit(state.i_l.a, opt.bases.i_base, &clips),
                      per_unit(state.i_l.b, opt.bases.i_base, &clips),
                      per_unit(state.i_l.c, opt.bases.i_base, &clips)},
                     {per_unit(m.a * half_vdc, opt.bases.v_base, &clips),
                      per_unit(m.b * half_vdc, opt.bases.v_base, &clips),
                      per_unit(m.c * half_vdc, opt.bases.v_base, &clips)},
                     label);

        if (opt.switched_pwm) {
            const double dt = sample_period / substeps;
            for (int sub = 0; sub < substeps; ++sub) {
                const ThreePhase v_inv = spwm_inverter(m, state.t, p.vdc, p.f_sw);
                state = step_rk4(state, v_inv, v_pcc, dt, p);
            }
        } else {
            const ThreePhase v_inv = averaged_inverter(m, p.vdc);
            const double dt = sample_period / substeps;
            for (int sub = 0; sub < substeps; ++sub)
                state = step_rk4(state, v_inv, v_pcc, dt, p);
        }
        if (!state.finite())
            throw SimulationError("run_scenario: state diverged at step " +
                                  std::to_string(k) + " (t = " + std::to_string(t) + " s)");
    }
    trace.add_clips(clips);
    return trace;
}

Dataset::Dataset(std::shared_ptr<const RecordedTrace> trace, std::vector<std::size_t> starts,
                 int lookback, std::uint64_t seed)
    : trace_(std::move(trace)), starts_(std::move(starts)), lookback_(lookback), seed_(seed) {}

void Dataset::copy_inputs(std::size_t w, double* dst) const {
    const double* src = trace_->row(starts_[w]);
    std::memcpy(dst, src, sizeof(double) * RecordedTrace::kChannels * lookback_);
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
    std::vector<std::size_t> starts;
    starts.reserve(indices.size());
    for (std::size_t i : indices) starts.push_back(starts_.at(i));
    return Dataset(trace_, std::move(starts), lookback_, seed_);
}

Dataset make_windows(std::shared_ptr<const RecordedTrace> trace, int lookback,
                     std::size_t stride, std::uint64_t seed) {
    if (lookback < 1) throw ConfigError("make_windows: lookback must be >= 1");
    if (stride < 1) throw ConfigError("make_windows: stride must be >= 1");
    const std::size_t len = trace->size();
    if (len < static_cast<std::size_t>(lookback) + 1)
        throw ConfigError("make_windows: trace shorter than lookback + 1, no window fits");

    std::vector<std::size_t> starts;
    for (std::size_t i = 0; i + lookback < len; i += stride) starts.push_back(i);
    return Dataset(std::move(trace), std::move(starts), lookback, seed);
}

std::pair<Dataset, Dataset> split_train_val(const Dataset& d, double fraction,
                                            std::uint64_t seed, bool chronological) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw ConfigError("split_train_val: fraction must be in (0, 1)");

    std::vector<std::size_t> idx(d.size());
    std::iota(idx.begin(), idx.end(), 0);
    if (!chronological) {
        Rng rng(seed);
        rng.shuffle(idx);
    }
    const auto n_train = static_cast<std::size_t>(
        std::llround(static_cast<double>(d.size()) * fraction));
    std::vector<std::size_t> train(idx.begin(), idx.begin() + n_train);
    std::vector<std::size_t> val(idx.begin() + n_train, idx.end());
    return {d.subset(train), d.subset(val)};
}

std::vector<KfoldSplit> kfold(const Dataset& d, int k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("kfold: k must be >= 2");
    if (d.size() < static_cast<std::size_t>(k))
        throw ConfigError("kfold: dataset smaller than k");

    std::vector<std::size_t> idx(d.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    rng.shuffle(idx);

    // Deal contiguous slices; the first (n mod k) folds get one extra window.
    std::vector<KfoldSplit> folds(k);
    const std::size_t base = d.size() / k, extra = d.size() % k;
    std::size_t pos = 0;
    for (int f = 0; f < k; ++f) {
        const std::size_t sz = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
        folds[f].val.assign(idx.begin() + pos, idx.begin() + pos + sz);
        pos += sz;
    }
    for (int f = 0; f < k; ++f) {
        folds[f].train.reserve(d.size() - folds[f].val.size());
        for (int other = 0; other < k; ++other)
            if (other != f)
                folds[f].train.insert(folds[f].train.end(), folds[other].val.begin(),
                                      folds[other].val.end());
    }
    return folds;
}

namespace {

void append_double(std::string& out, double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

double parse_double(const char*& p, const char* end) {
    double v;
    auto res = std::from_chars(p, end, v);
    if (res.ec != std::errc()) throw IoError("trace csv: bad numeric field");
    p = res.ptr;
    return v;
}

} // namespace

void write_trace_csv(const std::string& path, const RecordedTrace& trace,
                     const TraceMeta& meta) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path);

    std::string header = "# gridfdd-trace v1";
    auto kv = [&](const char* key, double v) {
        header += ' ';
        header += key;
        header += '=';
        append_double(header, v);
    };
    kv("sample_period", trace.sample_period());
    kv("v_base", trace.bases().v_base);
    kv("i_base", trace.bases().i_base);
    header += " seed=" + std::to_string(meta.seed);
    header += " p=" + std::to_string(meta.lookback);
    header += " stride=" + std::to_string(meta.stride);
    if (!meta.schedule.empty()) header += " schedule=" + meta.schedule;
    kv("clips", static_cast<double>(trace.clip_count()));
    header += " columns=";
    for (int ch = 0; ch < RecordedTrace::kChannels; ++ch) {
        header += RecordedTrace::channel_name(ch);
        header += ',';
    }
    header += "label\n";
    f << header;

    std::string line;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        line.clear();
        const double* r = trace.row(i);
        for (int ch = 0; ch < RecordedTrace::kChannels; ++ch) {
            append_double(line, r[ch]);
            line += ',';
        }
        line += to_string(trace.label(i));
        line += '\n';
        f << line;
    }
    if (!f) throw IoError("short write: " + path);
}

std::pair<std::shared_ptr<RecordedTrace>, TraceMeta> read_trace_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open trace csv: " + path);

    std::string header;
    if (!std::getline(f, header) || header.rfind("# gridfdd-trace v1", 0) != 0)
        throw IoError("not a gridfdd trace csv: " + path);

    double sample_period = 5e-6;
    PuBases bases;
    TraceMeta meta;
    std::int64_t clips = 0;
    {
        std::istringstream hs(header.substr(18));
        std::string tok;
        while (hs >> tok) {
            auto eq = tok.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
            if (key == "sample_period") sample_period = std::stod(val);
            else if (key == "v_base") bases.v_base = std::stod(val);
            else if (key == "i_base") bases.i_base = std::stod(val);
            else if (key == "seed") meta.seed = std::stoull(val);
            else if (key == "p") meta.lookback = std::stoi(val);
            else if (key == "stride") meta.stride = std::stoull(val);
            else if (key == "schedule") meta.schedule = val;
            else if (key == "clips") clips = std::llround(std::stod(val));
            // columns list is fixed; ignored on read
        }
    }

    auto trace = std::make_shared<RecordedTrace>(sample_period, bases);
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const char* ptr = line.data();
        const char* end = line.data() + line.size();
        double v[RecordedTrace::kChannels];
        for (double& x : v) {
            x = parse_double(ptr, end);
            if (ptr == end || *ptr != ',') throw IoError("trace csv: expected ','");
            ++ptr;
        }
        trace->append({v[0], v[1], v[2]}, {v[3], v[4], v[5]}, {v[6], v[7], v[8]},
                      fault_class_from_string(std::string(ptr, end)));
    }
    trace->add_clips(clips);
    return {trace, meta};
}

} // namespace gridfdd
