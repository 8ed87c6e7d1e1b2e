// gridfdd command-line front end. Talks to the shared library exclusively
// through the C API in gridfdd/gridfdd.h.

#include <gridfdd/gridfdd.h>

#include <CLI11.hpp>

#include <cstdio>
#include <memory>
#include <string>

namespace {

struct ConfigDeleter {
    void operator()(gfdd_config* c) const { gfdd_config_destroy(c); }
};
using ConfigPtr = std::unique_ptr<gfdd_config, ConfigDeleter>;

int finish(gfdd_status st) {
    if (st == GFDD_OK) {
        const char* summary = gfdd_last_summary();
        if (summary && summary[0]) std::printf("%s\n", summary);
        return 0;
    }
    std::fprintf(stderr, "error: %s\n", gfdd_last_error());
    return static_cast<int>(st);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Grid-fault detection, diagnosis, and fault-tolerant control "
                 "pipeline for a three-phase inverter"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    long long seed = -1;
    app.add_option("--config", config_path, "Configuration file (INI-style sections)");
    app.add_option("--seed", seed, "Master random seed (overrides run.seed)");
    app.add_option("--out", out_dir, "Output directory (overrides run.out_dir)");

    auto* sim = app.add_subcommand("simulate", "Run one scenario and write trace.csv");
    auto* gen = app.add_subcommand("gen-dataset", "Run one scenario and write dataset.csv");
    auto* train = app.add_subcommand("train", "Train a model from dataset.csv");
    std::string which;
    train->add_option("model", which, "lstm | knn | mlp")->required();
    auto* eval = app.add_subcommand("eval", "Confusion matrix, recall, and MAE report");
    auto* ftc = app.add_subcommand("run-ftc", "Closed-loop FDD+FTC runs on both scenarios");
    auto* plot = app.add_subcommand("plot", "Waveform SVGs from a closed-loop trace");
    std::string trace_csv;
    double t0 = -1.0, t1 = -1.0;
    plot->add_option("trace", trace_csv, "ftc trace csv (default: ftc_scenario2.csv)");
    plot->add_option("--t0", t0, "Interval start [s]");
    plot->add_option("--t1", t1, "Interval end [s]");

    CLI11_PARSE(app, argc, argv);

    ConfigPtr cfg(gfdd_config_create());
    if (!cfg) {
        std::fprintf(stderr, "error: out of memory\n");
        return 1;
    }
    if (!config_path.empty()) {
        if (gfdd_config_load(cfg.get(), config_path.c_str()) != GFDD_OK)
            return finish(GFDD_ERR_IO);
    }
    if (seed >= 0 &&
        gfdd_config_set(cfg.get(), "run.seed", std::to_string(seed).c_str()) != GFDD_OK)
        return finish(GFDD_ERR_CONFIG);
    if (!out_dir.empty() &&
        gfdd_config_set(cfg.get(), "run.out_dir", out_dir.c_str()) != GFDD_OK)
        return finish(GFDD_ERR_CONFIG);

    if (sim->parsed()) return finish(gfdd_simulate(cfg.get()));
    if (gen->parsed()) return finish(gfdd_gen_dataset(cfg.get()));
    if (train->parsed()) return finish(gfdd_train(cfg.get(), which.c_str()));
    if (eval->parsed()) return finish(gfdd_eval(cfg.get()));
    if (ftc->parsed()) return finish(gfdd_run_ftc(cfg.get()));
    if (plot->parsed())
        return finish(gfdd_plot(cfg.get(), trace_csv.empty() ? nullptr : trace_csv.c_str(),
                                t0, t1));
    return 1;
}
