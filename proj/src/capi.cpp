#include "gridfdd/gridfdd.h"

#include "commands.hpp"
#include "config.hpp"
#include "errors.hpp"

#include <cstring>
#include <string>

using namespace gridfdd;

struct gfdd_config {
    Config cfg;
};

namespace {

thread_local std::string t_last_error;
thread_local std::string t_last_summary;

gfdd_status fail(gfdd_status code, const char* msg) {
    t_last_error = msg ? msg : "";
    return code;
}

// Run a command body, translating exceptions into status codes.
template <typename Fn>
gfdd_status guarded(Fn&& fn) {
    try {
        t_last_summary = fn();
        t_last_error.clear();
        return GFDD_OK;
    } catch (const ConfigError& e) {
        return fail(GFDD_ERR_CONFIG, e.what());
    } catch (const ScheduleError& e) {
        return fail(GFDD_ERR_CONFIG, e.what());
    } catch (const IoError& e) {
        return fail(GFDD_ERR_IO, e.what());
    } catch (const NumericError& e) {
        return fail(GFDD_ERR_NUMERIC, e.what());
    } catch (const SimulationError& e) {
        return fail(GFDD_ERR_NUMERIC, e.what());
    } catch (const TrainingError& e) {
        return fail(GFDD_ERR_NUMERIC, e.what());
    } catch (const ContractError& e) {
        return fail(GFDD_ERR_CONTRACT, e.what());
    } catch (const std::exception& e) {
        return fail(GFDD_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(GFDD_ERR_INTERNAL, "unknown error");
    }
}

} // namespace

extern "C" {

const char* gfdd_version(void) { return "gridfdd 1.0.0"; }

gfdd_config* gfdd_config_create(void) {
    try {
        return new gfdd_config{};
    } catch (...) {
        return nullptr;
    }
}

void gfdd_config_destroy(gfdd_config* cfg) { delete cfg; }

gfdd_status gfdd_config_load(gfdd_config* cfg, const char* path) {
    if (!cfg || !path) return fail(GFDD_ERR_INVALID_ARG, "null config or path");
    return guarded([&] {
        const Config loaded = Config::load(path);
        for (const auto& [k, v] : loaded.values()) cfg->cfg.set(k, v);
        return "loaded " + std::string(path);
    });
}

gfdd_status gfdd_config_set(gfdd_config* cfg, const char* key, const char* value) {
    if (!cfg || !key || !value) return fail(GFDD_ERR_INVALID_ARG, "null config, key, or value");
    return guarded([&] {
        cfg->cfg.set(key, value);
        RunConfig::from(cfg->cfg); // reject values the typed view cannot accept
        return std::string();
    });
}

gfdd_status gfdd_config_get(const gfdd_config* cfg, const char* key, char* buf, size_t buflen) {
    if (!cfg || !key || !buf || buflen == 0)
        return fail(GFDD_ERR_INVALID_ARG, "null config, key, or buffer");
    try {
        const std::string v = cfg->cfg.get_raw(key);
        std::strncpy(buf, v.c_str(), buflen - 1);
        buf[buflen - 1] = '\0';
        t_last_error.clear();
        return GFDD_OK;
    } catch (const ConfigError& e) {
        return fail(GFDD_ERR_CONFIG, e.what());
    }
}

gfdd_status gfdd_simulate(gfdd_config* cfg) {
    if (!cfg) return fail(GFDD_ERR_INVALID_ARG, "null config");
    return guarded([&] { return cmd_simulate(RunConfig::from(cfg->cfg)); });
}

gfdd_status gfdd_gen_dataset(gfdd_config* cfg) {
    if (!cfg) return fail(GFDD_ERR_INVALID_ARG, "null config");
    return guarded([&] { return cmd_gen_dataset(RunConfig::from(cfg->cfg)); });
}

gfdd_status gfdd_train(gfdd_config* cfg, const char* which) {
    if (!cfg || !which) return fail(GFDD_ERR_INVALID_ARG, "null config or model name");
    return guarded([&] { return cmd_train(RunConfig::from(cfg->cfg), which); });
}

gfdd_status gfdd_eval(gfdd_config* cfg) {
    if (!cfg) return fail(GFDD_ERR_INVALID_ARG, "null config");
    return guarded([&] { return cmd_eval(RunConfig::from(cfg->cfg)); });
}

gfdd_status gfdd_run_ftc(gfdd_config* cfg) {
    if (!cfg) return fail(GFDD_ERR_INVALID_ARG, "null config");
    return guarded([&] { return cmd_run_ftc(RunConfig::from(cfg->cfg)); });
}

gfdd_status gfdd_plot(gfdd_config* cfg, const char* trace_csv, double t0, double t1) {
    if (!cfg) return fail(GFDD_ERR_INVALID_ARG, "null config");
    return guarded([&] {
        return cmd_plot(RunConfig::from(cfg->cfg), trace_csv ? trace_csv : "", t0, t1);
    });
}

const char* gfdd_last_error(void) { return t_last_error.c_str(); }

const char* gfdd_last_summary(void) { return t_last_summary.c_str(); }

} // extern "C"
