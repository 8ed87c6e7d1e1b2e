#include "commands.hpp"

#include "checkpoint.hpp"
#include "errors.hpp"
#include "report.hpp"
#include "svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace gridfdd {

namespace fs = std::filesystem;

namespace {

std::string artifact(const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.out_dir);
    return (fs::path(cfg.out_dir) / name).string();
}

void require_artifact(const std::string& path, const std::string& producer) {
    if (!fs::exists(path))
        throw IoError("missing artifact '" + path + "'; produce it with the `" + producer +
                      "` command first");
}

ScenarioSchedule load_schedule(const RunConfig& cfg, const std::string& name) {
    return ScenarioSchedule::by_name_or_path(name, cfg.duration);
}

RecordedTrace simulate_schedule(const RunConfig& cfg, const ScenarioSchedule& sched) {
    return run_scenario(sched, cfg.circuit, cfg.sample_period, cfg.duration,
                        cfg.sim_options());
}

struct LoadedDataset {
    std::shared_ptr<RecordedTrace> trace;
    TraceMeta meta;
    Dataset windows;
};

LoadedDataset load_dataset(const RunConfig& cfg) {
    const std::string path = artifact(cfg, "dataset.csv");
    require_artifact(path, "gen-dataset");
    auto [trace, meta] = read_trace_csv(path);
    LoadedDataset out{trace, meta, {}};
    out.windows = make_windows(trace, meta.lookback, meta.stride, meta.seed);
    return out;
}

// Prediction-window features for the given dataset windows. Windows whose
// target precedes `feature_window` predictions are skipped (kept off both the
// exemplar and query sides); `kept` reports the surviving window indices.
void prediction_features(const Dataset& d, const std::vector<ThreePhase>& predictions,
                         int lookback, int feature_window, std::vector<double>& features,
                         std::vector<FaultClass>& labels, std::vector<std::size_t>* kept) {
    const int dim = 3 * feature_window;
    features.clear();
    labels.clear();
    if (kept) kept->clear();
    for (std::size_t w = 0; w < d.size(); ++w) {
        const std::size_t target = d.target_index(w);      // trace sample index
        const std::size_t pred_last = target - lookback;   // predictions[] index of target
        if (pred_last + 1 < static_cast<std::size_t>(feature_window)) continue;
        const std::size_t off = features.size();
        features.resize(off + dim);
        fill_prediction_feature(predictions, pred_last, feature_window,
                                features.data() + off);
        labels.push_back(d.label(w));
        if (kept) kept->push_back(w);
    }
}

Dataset filter_normal(const Dataset& d) {
    std::vector<std::size_t> idx;
    for (std::size_t w = 0; w < d.size(); ++w)
        if (d.label(w) == FaultClass::NORMAL) idx.push_back(w);
    return d.subset(idx);
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

} // namespace

std::string cmd_simulate(const RunConfig& cfg) {
    const auto sched = load_schedule(cfg, cfg.schedule);
    const RecordedTrace trace = simulate_schedule(cfg, sched);
    TraceMeta meta;
    meta.seed = cfg.seed;
    meta.lookback = cfg.lookback;
    meta.stride = cfg.stride;
    meta.schedule = cfg.schedule;
    const std::string path = artifact(cfg, "trace.csv");
    write_trace_csv(path, trace, meta);
    return "simulate: wrote " + std::to_string(trace.size()) + " rows (" +
           std::to_string(trace.clip_count()) + " clipped samples) to " + path;
}

std::string cmd_gen_dataset(const RunConfig& cfg) {
    const auto sched = load_schedule(cfg, cfg.schedule);
    const RecordedTrace trace = simulate_schedule(cfg, sched);
    TraceMeta meta;
    meta.seed = cfg.seed;
    meta.lookback = cfg.lookback;
    meta.stride = cfg.stride;
    meta.schedule = cfg.schedule;
    const std::string path = artifact(cfg, "dataset.csv");
    write_trace_csv(path, trace, meta);

    std::size_t windows = 0;
    if (trace.size() > static_cast<std::size_t>(cfg.lookback))
        windows = (trace.size() - cfg.lookback - 1) / cfg.stride + 1;
    return "gen-dataset: wrote " + std::to_string(trace.size()) + " rows / " +
           std::to_string(windows) + " windows (stride " + std::to_string(cfg.stride) +
           ") to " + path;
}

namespace {

std::string train_lstm_cmd(const RunConfig& cfg) {
    LoadedDataset ds = load_dataset(cfg);
    auto [train, val] = split_train_val(ds.windows, cfg.split_fraction, ds.meta.seed,
                                        cfg.chronological_split);
    LstmModel::Dims dims = cfg.lstm_dims;
    dims.lookback = ds.meta.lookback;
    TrainConfig tc = cfg.lstm_train;
    tc.seed = ds.meta.seed;
    LstmTrainResult res = train_lstm(train, val, tc, dims);
    save_lstm(artifact(cfg, "lstm.ckpt"), res.model);
    write_history_csv(artifact(cfg, "lstm_history.csv"), res.history);
    const double best = res.history.empty() ? 0.0
                        : std::min_element(res.history.begin(), res.history.end(),
                                           [](const EpochStats& a, const EpochStats& b) {
                                               return a.val_loss < b.val_loss;
                                           })
                              ->val_loss;
    return "train lstm: " + std::to_string(res.history.size()) + " epochs, best val mse " +
           format_double(best) + ", saved lstm.ckpt";
}

std::string train_mlp_cmd(const RunConfig& cfg) {
    LoadedDataset ds = load_dataset(cfg);
    auto [train, val] = split_train_val(ds.windows, cfg.split_fraction, ds.meta.seed,
                                        cfg.chronological_split);
    const Dataset train_n = filter_normal(train);
    const Dataset val_n = filter_normal(val);
    TrainConfig tc = cfg.mlp_train;
    tc.seed = ds.meta.seed;
    MlpTrainResult res = train_mlp(train_n, val_n, tc, cfg.mlp_dims);
    save_mlp(artifact(cfg, "mlp.ckpt"), res.model);
    write_history_csv(artifact(cfg, "mlp_history.csv"), res.history);
    return "train mlp: " + std::to_string(res.history.size()) + " epochs on " +
           std::to_string(train_n.size()) + " normal windows, saved mlp.ckpt";
}

std::string train_knn_cmd(const RunConfig& cfg) {
    LoadedDataset ds = load_dataset(cfg);
    const std::string lstm_path = artifact(cfg, "lstm.ckpt");
    require_artifact(lstm_path, "train lstm");
    const LstmModel lstm = load_lstm(lstm_path);
    if (lstm.dims().lookback != ds.meta.lookback)
        throw ContractError("train knn: lstm lookback does not match dataset");

    const std::vector<ThreePhase> predictions = predict_trace(lstm, *ds.trace);
    auto [train, val] = split_train_val(ds.windows, cfg.split_fraction, ds.meta.seed,
                                        cfg.chronological_split);

    std::vector<double> features;
    std::vector<FaultClass> labels;
    prediction_features(train, predictions, ds.meta.lookback, cfg.knn_feature_window,
                        features, labels, nullptr);
    const KnnModel knn = build_knn(cfg.knn_k, cfg.knn_feature_window, features, labels,
                                   cfg.knn_max_exemplars, ds.meta.seed);
    save_knn(artifact(cfg, "knn.ckpt"), knn);
    return "train knn: stored " + std::to_string(knn.count()) + " exemplars (k=" +
           std::to_string(knn.k) + ", w=" + std::to_string(knn.feature_window) +
           "), saved knn.ckpt";
}

} // namespace

std::string cmd_train(const RunConfig& cfg, const std::string& which) {
    if (which == "lstm") return train_lstm_cmd(cfg);
    if (which == "mlp") return train_mlp_cmd(cfg);
    if (which == "knn") return train_knn_cmd(cfg);
    throw ConfigError("train: unknown model '" + which + "' (expected lstm, knn, or mlp)");
}

std::string cmd_run_ftc(const RunConfig& cfg) {
    const std::string lstm_path = artifact(cfg, "lstm.ckpt");
    const std::string knn_path = artifact(cfg, "knn.ckpt");
    const std::string mlp_path = artifact(cfg, "mlp.ckpt");
    require_artifact(lstm_path, "train lstm");
    require_artifact(knn_path, "train knn");
    require_artifact(mlp_path, "train mlp");
    const LstmModel lstm = load_lstm(lstm_path);
    const KnnModel knn = load_knn(knn_path);
    const MlpModel mlp = load_mlp(mlp_path);
    const FtcModels models{&lstm, &knn, &mlp};

    // Fault-free reference: the conventional controller on a clean grid.
    const ScenarioSchedule no_faults({}, cfg.duration);
    const RecordedTrace ref = simulate_schedule(cfg, no_faults);

    const std::pair<std::string, std::string> scenarios[2] = {
        {"scenario1", cfg.eval_scenario1}, {"scenario2", cfg.eval_scenario2}};

    std::size_t improved = 0, episodes = 0;
    double overlap_acc = 0.0;
    std::ostringstream files;
    for (const auto& [key, sched_name] : scenarios) {
        const auto sched = load_schedule(cfg, sched_name);
        const RecordedTrace conv = simulate_schedule(cfg, sched);

        ScenarioEval sc;
        sc.name = sched_name;
        sc.ftc = run_closed_loop(sched, cfg.circuit, models, cfg.seed, cfg.sample_period,
                                 cfg.duration, cfg.sim_options(), cfg.ftc);
        sc.v_star_conv.reserve(conv.size());
        sc.v_star_ref.reserve(ref.size());
        for (std::size_t i = 0; i < conv.size(); ++i) {
            sc.v_star_conv.push_back(conv.v_star(i));
            sc.v_star_ref.push_back(ref.v_star(i));
        }

        for (const EpisodeStat& ep : episode_stats(sc)) {
            ++episodes;
            if (ep.mae_ftc < ep.mae_conv) ++improved;
            overlap_acc += ep.detection_overlap;
        }

        const std::string path = artifact(cfg, "ftc_" + key + ".csv");
        write_ftc_csv(path, sc);
        files << ' ' << path;
    }

    std::ostringstream out;
    out << "run-ftc: " << improved << '/' << episodes
        << " fault episodes improved vs conventional, mean detection overlap "
        << format_double(episodes ? overlap_acc / static_cast<double>(episodes) : 0.0)
        << ", wrote" << files.str();
    return out.str();
}

std::string cmd_eval(const RunConfig& cfg) {
    // Classifier evaluation on the held-out portion of the dataset.
    LoadedDataset ds = load_dataset(cfg);
    const std::string lstm_path = artifact(cfg, "lstm.ckpt");
    const std::string knn_path = artifact(cfg, "knn.ckpt");
    require_artifact(lstm_path, "train lstm");
    require_artifact(knn_path, "train knn");
    const LstmModel lstm = load_lstm(lstm_path);
    const KnnModel knn = load_knn(knn_path);

    const std::vector<ThreePhase> predictions = predict_trace(lstm, *ds.trace);
    auto [train, val] = split_train_val(ds.windows, cfg.split_fraction, ds.meta.seed,
                                        cfg.chronological_split);

    std::vector<double> features;
    std::vector<FaultClass> labels;
    prediction_features(val, predictions, ds.meta.lookback, knn.feature_window, features,
                        labels, nullptr);
    if (labels.empty()) throw ContractError("eval: no evaluable windows in the split");

    std::vector<FaultClass> preds;
    preds.reserve(labels.size());
    const int dim = knn.dim();
    for (std::size_t q = 0; q < labels.size(); ++q)
        preds.push_back(knn_classify(knn, features.data() + q * dim, dim).label);

    const ConfusionMatrix cm = confusion_matrix(preds, labels);
    write_confusion_csv(artifact(cfg, "confusion.csv"), cm);
    const double acc = accuracy(cm);

    {
        std::ofstream rf(artifact(cfg, "recall.csv"));
        rf << "class,recall\n";
        const auto recall = per_class_recall(cm);
        for (int c = 0; c < kNumFaultClasses; ++c)
            if (recall[c] >= 0)
                rf << to_string(static_cast<FaultClass>(c)) << ',' << recall[c] << '\n';
    }

    // Table II style MAE report from the closed-loop traces.
    std::vector<ScenarioEval> scenarios;
    for (const char* key : {"scenario1", "scenario2"}) {
        const std::string path = artifact(cfg, std::string("ftc_") + key + ".csv");
        require_artifact(path, "run-ftc");
        scenarios.push_back(read_ftc_csv(path));
    }
    const MaeReport report = build_mae_report(scenarios);
    write_mae_report_csv(artifact(cfg, "mae_report.csv"), report);

    std::ostringstream out;
    out << "eval: knn accuracy " << format_double(acc) << " on " << labels.size()
        << " held-out windows; mean MAE " << report.scenario_names[0] << ' '
        << format_double(report.overall_mean(0)) << ", " << report.scenario_names[1] << ' '
        << format_double(report.overall_mean(1));
    return out.str();
}

std::string cmd_plot(const RunConfig& cfg, const std::string& trace_csv, double t0, double t1) {
    std::string path = trace_csv;
    if (path.empty()) {
        path = artifact(cfg, "ftc_scenario2.csv");
        require_artifact(path, "run-ftc");
    }
    const ScenarioEval sc = read_ftc_csv(path);
    const std::size_t n = sc.ftc.rows.size();
    if (n == 0) throw ContractError("plot: trace is empty");
    const double ts = sc.ftc.sample_period;

    std::size_t first = 0, count = std::min(cfg.plot_samples, n);
    if (t0 >= 0.0) {
        first = std::min(n - 1, static_cast<std::size_t>(t0 / ts));
        if (t1 > t0)
            count = std::min(n - first, static_cast<std::size_t>((t1 - t0) / ts));
    } else {
        // Default: a fault-centred window of cfg.plot_samples samples.
        for (std::size_t i = 0; i < n; ++i)
            if (sc.ftc.rows[i].label_true != FaultClass::NORMAL) {
                first = i > count / 4 ? i - count / 4 : 0;
                break;
            }
        count = std::min(count, n - first);
    }
    if (count < 2) throw ContractError("plot: interval too short");

    std::vector<double> x(count);
    for (std::size_t i = 0; i < count; ++i) x[i] = static_cast<double>(first + i) * ts;

    std::ostringstream names;
    const char* phase_names[3] = {"a", "b", "c"};
    for (int ph = 0; ph < 3; ++ph) {
        std::vector<double> conv(count), ftc(count);
        for (std::size_t i = 0; i < count; ++i) {
            conv[i] = sc.v_star_conv[first + i][ph];
            ftc[i] = sc.ftc.rows[first + i].v_star[ph];
        }
        const std::string out_path =
            artifact(cfg, std::string("plot_phase_") + phase_names[ph] + ".svg");
        write_svg_plot(out_path,
                       "Reference voltage, phase " + std::string(phase_names[ph]) + " (" +
                           sc.name + ")",
                       "time [s]", "v* [pu]", x,
                       {{"conventional", "#c62828", &conv}, {"fdd+ftc", "#1565c0", &ftc}});
        names << ' ' << out_path;
    }
    return "plot: wrote" + names.str() + " (" + std::to_string(count) + " samples)";
}

} // namespace gridfdd
