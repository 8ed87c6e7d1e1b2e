#include "config.hpp"

#include "errors.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

namespace gridfdd {

namespace {

// The full key vocabulary; set() rejects anything else.
constexpr std::array kKnownKeys = {
    "circuit.r1", "circuit.r2", "circuit.l1", "circuit.l2", "circuit.c",
    "circuit.vdc", "circuit.f_grid", "circuit.v_ll_rms", "circuit.f_sw",
    "circuit.grid_series_r", "circuit.grid_series_l",
    "controller.pll_kp", "controller.pll_ki", "controller.current_kp",
    "controller.current_ki", "controller.i_ref_d", "controller.i_ref_q",
    "dataset.sample_period", "dataset.duration", "dataset.stride",
    "dataset.lookback", "dataset.split_fraction", "dataset.chronological_split",
    "dataset.v_base", "dataset.i_base", "dataset.switched_pwm", "dataset.switched_dt",
    "lstm.learning_rate", "lstm.batch_size", "lstm.max_epochs", "lstm.patience",
    "lstm.hidden1", "lstm.hidden2",
    "mlp.learning_rate", "mlp.batch_size", "mlp.max_epochs", "mlp.patience",
    "mlp.hidden1", "mlp.hidden2",
    "knn.k", "knn.feature_window", "knn.max_exemplars",
    "ftc.debounce", "ftc.feed_conventional",
    "eval.scenario1", "eval.scenario2",
    "plot.samples",
    "run.schedule", "run.out_dir", "run.seed",
};

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

Config Config::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

Config Config::parse(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty())
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": key outside any [section]");
        cfg.set(section + "." + key, value);
    }
    return cfg;
}

void Config::set(const std::string& key, const std::string& value) {
    if (std::find(kKnownKeys.begin(), kKnownKeys.end(), key) == kKnownKeys.end())
        throw ConfigError("unknown config key: '" + key + "'");
    values_[key] = value;
}

std::string Config::get_raw(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("config key not set: '" + key + "'");
    return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        std::size_t pos = 0;
        double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': bad numeric value '" + it->second + "'");
    }
}

long Config::get_long(const std::string& key, long fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        std::size_t pos = 0;
        long v = std::stol(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': bad integer value '" + it->second + "'");
    }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string& v = it->second;
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key '" + key + "': bad boolean value '" + v + "'");
}

RunConfig RunConfig::from(const Config& cfg) {
    RunConfig rc;

    rc.circuit.r1 = cfg.get_double("circuit.r1", rc.circuit.r1);
    rc.circuit.r2 = cfg.get_double("circuit.r2", rc.circuit.r2);
    rc.circuit.l1 = cfg.get_double("circuit.l1", rc.circuit.l1);
    rc.circuit.l2 = cfg.get_double("circuit.l2", rc.circuit.l2);
    rc.circuit.c = cfg.get_double("circuit.c", rc.circuit.c);
    rc.circuit.vdc = cfg.get_double("circuit.vdc", rc.circuit.vdc);
    rc.circuit.f_grid = cfg.get_double("circuit.f_grid", rc.circuit.f_grid);
    rc.circuit.v_ll_rms = cfg.get_double("circuit.v_ll_rms", rc.circuit.v_ll_rms);
    rc.circuit.f_sw = cfg.get_double("circuit.f_sw", rc.circuit.f_sw);
    rc.circuit.grid_series_r = cfg.get_double("circuit.grid_series_r", rc.circuit.grid_series_r);
    rc.circuit.grid_series_l = cfg.get_double("circuit.grid_series_l", rc.circuit.grid_series_l);
    rc.circuit.validate();

    rc.gains.pll_kp = cfg.get_double("controller.pll_kp", rc.gains.pll_kp);
    rc.gains.pll_ki = cfg.get_double("controller.pll_ki", rc.gains.pll_ki);
    rc.gains.current_kp = cfg.get_double("controller.current_kp", rc.gains.current_kp);
    rc.gains.current_ki = cfg.get_double("controller.current_ki", rc.gains.current_ki);
    rc.gains.i_ref_d = cfg.get_double("controller.i_ref_d", rc.gains.i_ref_d);
    rc.gains.i_ref_q = cfg.get_double("controller.i_ref_q", rc.gains.i_ref_q);

    rc.bases.v_base = cfg.get_double("dataset.v_base", rc.circuit.phase_peak());
    const double iref_mag = std::hypot(rc.gains.i_ref_d, rc.gains.i_ref_q);
    rc.bases.i_base = cfg.get_double("dataset.i_base", iref_mag > 0 ? 2.0 * iref_mag : 20.0);
    if (!(rc.bases.v_base > 0) || !(rc.bases.i_base > 0))
        throw ConfigError("per-unit bases must be > 0");

    rc.schedule = cfg.get_string("run.schedule", rc.schedule);
    rc.out_dir = cfg.get_string("run.out_dir", rc.out_dir);
    rc.seed = static_cast<std::uint64_t>(cfg.get_long("run.seed", static_cast<long>(rc.seed)));
    rc.sample_period = cfg.get_double("dataset.sample_period", rc.sample_period);
    rc.duration = cfg.get_double("dataset.duration", rc.duration);
    rc.stride = static_cast<std::size_t>(cfg.get_long("dataset.stride", 1));
    rc.lookback = static_cast<int>(cfg.get_long("dataset.lookback", rc.lookback));
    rc.split_fraction = cfg.get_double("dataset.split_fraction", rc.split_fraction);
    rc.chronological_split = cfg.get_bool("dataset.chronological_split", false);
    rc.switched_pwm = cfg.get_bool("dataset.switched_pwm", false);
    rc.switched_dt = cfg.get_double("dataset.switched_dt", rc.switched_dt);
    if (!(rc.sample_period > 0)) throw ConfigError("dataset.sample_period must be > 0");
    if (rc.stride < 1) throw ConfigError("dataset.stride must be >= 1");
    if (rc.lookback < 1) throw ConfigError("dataset.lookback must be >= 1");

    rc.lstm_train.learning_rate = cfg.get_double("lstm.learning_rate", 1e-4);
    rc.lstm_train.batch_size = static_cast<int>(cfg.get_long("lstm.batch_size", 32));
    rc.lstm_train.max_epochs = static_cast<int>(cfg.get_long("lstm.max_epochs", 50));
    rc.lstm_train.patience = static_cast<int>(cfg.get_long("lstm.patience", 5));
    rc.lstm_train.seed = rc.seed;
    rc.lstm_dims.hidden1 = static_cast<int>(cfg.get_long("lstm.hidden1", 32));
    rc.lstm_dims.hidden2 = static_cast<int>(cfg.get_long("lstm.hidden2", 64));
    rc.lstm_dims.lookback = rc.lookback;
    rc.lstm_train.validate();

    rc.mlp_train.learning_rate = cfg.get_double("mlp.learning_rate", 1e-3);
    rc.mlp_train.batch_size = static_cast<int>(cfg.get_long("mlp.batch_size", 16));
    rc.mlp_train.max_epochs = static_cast<int>(cfg.get_long("mlp.max_epochs", 30));
    rc.mlp_train.patience = static_cast<int>(cfg.get_long("mlp.patience", 5));
    rc.mlp_train.seed = rc.seed;
    rc.mlp_dims.hidden1 = static_cast<int>(cfg.get_long("mlp.hidden1", 64));
    rc.mlp_dims.hidden2 = static_cast<int>(cfg.get_long("mlp.hidden2", 128));
    rc.mlp_train.validate();

    rc.knn_k = static_cast<int>(cfg.get_long("knn.k", 5));
    rc.knn_feature_window = static_cast<int>(cfg.get_long("knn.feature_window", 20));
    rc.knn_max_exemplars =
        static_cast<std::size_t>(cfg.get_long("knn.max_exemplars", 50000));
    if (rc.knn_k < 1) throw ConfigError("knn.k must be >= 1");
    if (rc.knn_feature_window < 1) throw ConfigError("knn.feature_window must be >= 1");

    rc.ftc.debounce = static_cast<int>(cfg.get_long("ftc.debounce", 3));
    rc.ftc.feed_conventional = cfg.get_bool("ftc.feed_conventional", false);
    if (rc.ftc.debounce < 1) throw ConfigError("ftc.debounce must be >= 1");

    rc.eval_scenario1 = cfg.get_string("eval.scenario1", rc.eval_scenario1);
    rc.eval_scenario2 = cfg.get_string("eval.scenario2", rc.eval_scenario2);
    rc.plot_samples = static_cast<std::size_t>(cfg.get_long("plot.samples", 4000));

    return rc;
}

SimOptions RunConfig::sim_options() const {
    SimOptions opt;
    opt.gains = gains;
    opt.bases = bases;
    opt.switched_pwm = switched_pwm;
    opt.switched_dt = switched_dt;
    return opt;
}

} // namespace gridfdd
