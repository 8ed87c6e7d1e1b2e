#pragma once

#include "config.hpp"

#include <string>

namespace gridfdd {

/// Pipeline commands behind the CLI and the C API. Each returns a one-line
/// summary, writes its artifacts under RunConfig::out_dir, and is
/// deterministic for a fixed config. Artifact names:
///   simulate     -> trace.csv
///   gen-dataset  -> dataset.csv
///   train lstm   -> lstm.ckpt, lstm_history.csv
///   train mlp    -> mlp.ckpt, mlp_history.csv
///   train knn    -> knn.ckpt            (needs dataset.csv + lstm.ckpt)
///   run-ftc      -> ftc_scenario1.csv, ftc_scenario2.csv
///   eval         -> confusion.csv, recall.csv, mae_report.csv
///   plot         -> plot_phase_{a,b,c}.svg
/// A missing prerequisite raises IoError naming the file and the command
/// that produces it.

std::string cmd_simulate(const RunConfig& cfg);
std::string cmd_gen_dataset(const RunConfig& cfg);
std::string cmd_train(const RunConfig& cfg, const std::string& which); // lstm | knn | mlp
std::string cmd_eval(const RunConfig& cfg);
std::string cmd_run_ftc(const RunConfig& cfg);
/// trace_csv may be empty to use the default ftc_scenario2.csv; t0 < 0 plots
/// cfg.plot_samples samples starting at the first fault.
std::string cmd_plot(const RunConfig& cfg, const std::string& trace_csv, double t0, double t1);

} // namespace gridfdd
