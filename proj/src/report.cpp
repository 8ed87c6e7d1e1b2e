#include "report.hpp"

#include "errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace gridfdd {

double MaeReport::overall_mean(std::size_t scenario) const {
    double acc = 0.0;
    int n = 0;
    for (const auto& cell : cells.at(scenario)) {
        if (!cell.present) continue;
        acc += cell.mae[0] + cell.mae[1] + cell.mae[2];
        n += 3;
    }
    return n ? acc / n : 0.0;
}

MaeReport build_mae_report(const std::vector<ScenarioEval>& scenarios) {
    MaeReport rep;
    for (const auto& sc : scenarios) {
        rep.scenario_names.push_back(sc.name);
        std::array<MaeReport::Cell, kNumFaultClasses> row{};
        std::array<std::array<double, 3>, kNumFaultClasses> acc{};
        std::array<std::size_t, kNumFaultClasses> counts{};

        const std::size_t n = sc.ftc.rows.size();
        if (sc.v_star_ref.size() != n || sc.v_star_conv.size() != n)
            throw ContractError("mae report: trace length mismatch across runs");

        for (std::size_t i = 0; i < n; ++i) {
            const FaultClass cls = sc.ftc.rows[i].label_true;
            if (cls == FaultClass::NORMAL) continue;
            const int ci = static_cast<int>(cls);
            for (int ph = 0; ph < 3; ++ph)
                acc[ci][ph] += std::fabs(sc.ftc.rows[i].v_star[ph] - sc.v_star_ref[i][ph]);
            ++counts[ci];
        }
        for (int ci = 0; ci < kNumFaultClasses; ++ci) {
            if (!counts[ci]) continue;
            row[ci].present = true;
            for (int ph = 0; ph < 3; ++ph)
                row[ci].mae[ph] = acc[ci][ph] / static_cast<double>(counts[ci]);
        }
        rep.cells.push_back(row);
    }
    return rep;
}

void write_mae_report_csv(const std::string& path, const MaeReport& report) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << "fault";
    for (const auto& name : report.scenario_names)
        f << ',' << name << "_va," << name << "_vb," << name << "_vc";
    f << '\n';
    for (int ci = 0; ci < kNumFaultClasses; ++ci) {
        if (static_cast<FaultClass>(ci) == FaultClass::NORMAL) continue;
        f << to_string(static_cast<FaultClass>(ci));
        for (std::size_t s = 0; s < report.cells.size(); ++s) {
            const auto& cell = report.cells[s][ci];
            for (int ph = 0; ph < 3; ++ph) {
                f << ',';
                if (cell.present) f << cell.mae[ph];
                else f << "nan";
            }
        }
        f << '\n';
    }
    f << "average";
    for (std::size_t s = 0; s < report.cells.size(); ++s) {
        const double m = report.overall_mean(s);
        f << ',' << m << ',' << m << ',' << m;
    }
    f << '\n';
}

std::vector<EpisodeStat> episode_stats(const ScenarioEval& sc) {
    std::vector<EpisodeStat> out;
    const std::size_t n = sc.ftc.rows.size();
    if (sc.v_star_ref.size() != n || sc.v_star_conv.size() != n)
        throw ContractError("episode stats: trace length mismatch across runs");

    std::size_t i = 0;
    while (i < n) {
        const FaultClass cls = sc.ftc.rows[i].label_true;
        if (cls == FaultClass::NORMAL) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < n && sc.ftc.rows[j + 1].label_true == cls) ++j;

        EpisodeStat ep;
        ep.fault = cls;
        ep.first = i;
        ep.last = j;
        double acc_ftc = 0.0, acc_conv = 0.0;
        std::size_t detected = 0;
        for (std::size_t r = i; r <= j; ++r) {
            for (int ph = 0; ph < 3; ++ph) {
                acc_ftc += std::fabs(sc.ftc.rows[r].v_star[ph] - sc.v_star_ref[r][ph]);
                acc_conv += std::fabs(sc.v_star_conv[r][ph] - sc.v_star_ref[r][ph]);
            }
            if (sc.ftc.rows[r].label_active != FaultClass::NORMAL) ++detected;
        }
        const double cnt = static_cast<double>((j - i + 1) * 3);
        ep.mae_ftc = acc_ftc / cnt;
        ep.mae_conv = acc_conv / cnt;
        ep.detection_overlap = static_cast<double>(detected) / static_cast<double>(j - i + 1);
        out.push_back(ep);
        i = j + 1;
    }
    return out;
}

void write_confusion_csv(const std::string& path, const ConfusionMatrix& cm) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << "true\\pred";
    for (int c = 0; c < kNumFaultClasses; ++c) f << ',' << to_string(static_cast<FaultClass>(c));
    f << '\n';
    for (int r = 0; r < kNumFaultClasses; ++r) {
        f << to_string(static_cast<FaultClass>(r));
        for (int c = 0; c < kNumFaultClasses; ++c) f << ',' << cm[r][c];
        f << '\n';
    }
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
    if (res.ec != std::errc()) throw IoError("ftc csv: bad numeric field");
    p = res.ptr;
    return v;
}

void expect_comma(const char*& p, const char* end) {
    if (p == end || *p != ',') throw IoError("ftc csv: expected ','");
    ++p;
}

std::string take_field(const char*& p, const char* end) {
    const char* start = p;
    while (p != end && *p != ',') ++p;
    return {start, p};
}

} // namespace

void write_ftc_csv(const std::string& path, const ScenarioEval& sc) {
    const std::size_t n = sc.ftc.rows.size();
    if (sc.v_star_ref.size() != n || sc.v_star_conv.size() != n)
        throw ContractError("ftc csv: trace length mismatch across runs");

    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path);

    std::string header = "# gridfdd-ftc v1 scenario=" + sc.name + " sample_period=";
    append_double(header, sc.ftc.sample_period);
    header += " v_base=";
    append_double(header, sc.ftc.bases.v_base);
    header += " i_base=";
    append_double(header, sc.ftc.bases.i_base);
    header += " columns=label_true,label_raw,label_active,vg_a,vg_b,vg_c,iinv_a,iinv_b,"
              "iinv_c,vstar_ftc_a,vstar_ftc_b,vstar_ftc_c,vstar_conv_a,vstar_conv_b,"
              "vstar_conv_c,vstar_ref_a,vstar_ref_b,vstar_ref_c\n";
    f << header;

    std::string line;
    for (std::size_t i = 0; i < n; ++i) {
        const FtcRow& r = sc.ftc.rows[i];
        line.clear();
        line += to_string(r.label_true);
        line += ',';
        line += to_string(r.label_raw);
        line += ',';
        line += to_string(r.label_active);
        const ThreePhase* blocks[5] = {&r.v_g, &r.i_inv, &r.v_star, &sc.v_star_conv[i],
                                       &sc.v_star_ref[i]};
        for (const ThreePhase* tp : blocks)
            for (int ph = 0; ph < 3; ++ph) {
                line += ',';
                append_double(line, (*tp)[ph]);
            }
        line += '\n';
        f << line;
    }
    if (!f) throw IoError("short write: " + path);
}

ScenarioEval read_ftc_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open ftc csv: " + path);
    std::string header;
    if (!std::getline(f, header) || header.rfind("# gridfdd-ftc v1", 0) != 0)
        throw IoError("not a gridfdd ftc csv: " + path);

    ScenarioEval sc;
    {
        std::istringstream hs(header.substr(16));
        std::string tok;
        while (hs >> tok) {
            auto eq = tok.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
            if (key == "scenario") sc.name = val;
            else if (key == "sample_period") sc.ftc.sample_period = std::stod(val);
            else if (key == "v_base") sc.ftc.bases.v_base = std::stod(val);
            else if (key == "i_base") sc.ftc.bases.i_base = std::stod(val);
        }
    }

    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const char* p = line.data();
        const char* end = line.data() + line.size();
        FtcRow row;
        row.label_true = fault_class_from_string(take_field(p, end));
        expect_comma(p, end);
        row.label_raw = fault_class_from_string(take_field(p, end));
        expect_comma(p, end);
        row.label_active = fault_class_from_string(take_field(p, end));
        double v[15];
        for (double& x : v) {
            expect_comma(p, end);
            x = parse_double(p, end);
        }
        row.v_g = {v[0], v[1], v[2]};
        row.i_inv = {v[3], v[4], v[5]};
        row.v_star = {v[6], v[7], v[8]};
        sc.ftc.rows.push_back(row);
        sc.v_star_conv.push_back({v[9], v[10], v[11]});
        sc.v_star_ref.push_back({v[12], v[13], v[14]});
    }
    return sc;
}

} // namespace gridfdd
