#pragma once

#include "circuit.hpp"
#include "controller.hpp"
#include "dataset.hpp"
#include "ftc.hpp"
#include "nn_common.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace gridfdd {

/// Flat `key = value` configuration with `[section]` headers and `#` comments.
/// Keys address as "section.key". Every numeric default of the pipeline can be
/// overridden here; unknown keys are rejected up front rather than silently
/// ignored.
class Config {
public:
    Config() = default;

    static Config load(const std::string& path);
    static Config parse(const std::string& text);

    /// Throws ConfigError when the key is not a known setting.
    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const { return values_.count(key) > 0; }
    std::string get_raw(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long get_long(const std::string& key, long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

/// Typed view of a Config with every default resolved.
struct RunConfig {
    CircuitParams circuit;
    ControllerGains gains;
    PuBases bases;

    std::string schedule = "table1-train";
    std::string out_dir = "out";
    double sample_period = 5e-6;
    double duration = 4.0;
    std::size_t stride = 1;
    int lookback = 20;
    std::uint64_t seed = 1;
    double split_fraction = 0.70;
    bool chronological_split = false;
    bool switched_pwm = false;
    double switched_dt = 1e-6;

    TrainConfig lstm_train;   // lr 1e-4, batch 32, 50 epochs
    LstmModel::Dims lstm_dims;
    TrainConfig mlp_train;    // lr 1e-3, batch 16, 30 epochs
    MlpModel::Dims mlp_dims;

    int knn_k = 5;
    int knn_feature_window = 20;
    std::size_t knn_max_exemplars = 50000;

    FtcOptions ftc;
    std::string eval_scenario1 = "table1-test-s1";
    std::string eval_scenario2 = "table1-test";
    std::size_t plot_samples = 4000;

    static RunConfig from(const Config& cfg);

    SimOptions sim_options() const;
};

} // namespace gridfdd
