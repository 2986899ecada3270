/*
* Copyright (C) 2026 epimag contributors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*/

// epimag command-line driver.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "epimag/checkpoint.hpp"
#include "epimag/experiment.hpp"
#include "epimag/plot.hpp"
#include "epimag/sir.hpp"
#include "epimag/studies.hpp"

namespace fs = std::filesystem;
using namespace epimag;

namespace
{

// Command-line spellings of config keys. Flags win over the config file, which wins over defaults.
const std::vector<std::pair<std::string, std::string>> kOverrideFlags{
    {"dataset", "dataset"},   {"registry", "registry"},   {"counts", "counts"},   {"adjacency", "adjacency"},
    {"output", "output_dir"}, {"horizon", "horizon"},     {"window", "window"},   {"lambda", "lambda"},
    {"delta", "delta"},       {"dims", "dims"},           {"seed", "seed"},       {"variant", "variant"},
    {"epochs", "max_epochs"}, {"patience", "patience"},   {"batch-size", "batch_size"},
    {"lr", "lr"},             {"weight-decay", "weight_decay"}, {"residual", "residual"}};

struct ConfigFlags
{
    std::string config_file;
    std::map<std::string, std::string> values;
    std::vector<std::string> sets;
    bool allow_single_step = false;

    void attach(CLI::App* cmd)
    {
        cmd->add_option("-c,--config", config_file, "key = value experiment config file");
        for (const auto& [flag, key] : kOverrideFlags) {
            const auto name = flag == "output" ? std::string("-o,--output") : "--" + flag;
            cmd->add_option(name, values[key], "override config key '" + key + "'");
        }
        cmd->add_option("--set", sets, "override any config key (key=value)");
        cmd->add_flag("--allow-single-step", allow_single_step, "permit horizon 1");
    }

    ExperimentConfig resolve() const
    {
        ExperimentConfig cfg;
        if (!config_file.empty()) {
            cfg.apply(load_key_values(config_file));
        }
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) {
                throw ConfigError("--set expects key=value, got '" + s + "'");
            }
            cfg.set(trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
        }
        for (const auto& [key, value] : values) {
            if (!value.empty()) {
                cfg.set(key, value);
            }
        }
        if (allow_single_step) {
            cfg.allow_single_step = true;
        }
        cfg.validate();
        return cfg;
    }
};

fs::path ensure_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw DataError("cannot create " + dir.string() + ": " + ec.message());
    }
    return dir;
}

EpidemicSeries load_series(const ExperimentConfig& cfg, GeoAdjacency& adj)
{
    const auto entry = resolve_dataset(cfg);
    auto series      = load_csv(entry.counts);
    adj              = load_adjacency(entry.adjacency, series.locations());
    return series;
}

void print_metrics(const std::string& label, const MetricReport& r)
{
    std::cout << label << " rmse=" << r.rmse << " pcc=";
    if (r.pcc) {
        std::cout << *r.pcc;
    }
    else {
        std::cout << "undefined";
    }
    std::cout << " n=" << r.n_samples << '\n';
}

void write_forecast_csv(const fs::path& path, const SeriesForecast& fc, const std::vector<std::string>& ids,
                        int horizon)
{
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out.precision(10);
    out << "target_row,location,truth,predicted,persistence\n";
    for (Eigen::Index k = 0; k < fc.truth.rows(); ++k) {
        for (Eigen::Index j = 0; j < fc.truth.cols(); ++j) {
            out << fc.anchors[static_cast<std::size_t>(k)] + horizon << ',' << ids[static_cast<std::size_t>(j)] << ','
                << fc.truth(k, j) << ',' << fc.predicted(k, j) << ',' << fc.last_observed(k, j) << '\n';
        }
    }
}

void write_matrix_csv(const fs::path& path, const Matrix& m, const std::vector<std::string>& header)
{
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out.precision(12);
    for (std::size_t j = 0; j < header.size(); ++j) {
        out << (j ? "," : "") << header[j];
    }
    if (!header.empty()) {
        out << '\n';
    }
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            out << (c ? "," : "") << m(r, c);
        }
        out << '\n';
    }
}

json study_json(const std::vector<StudyRow>& rows)
{
    json arr = json::array();
    for (const auto& r : rows) {
        json per_seed = json::array();
        for (std::size_t k = 0; k < r.summary.seeds.size(); ++k) {
            per_seed.push_back({{"seed", r.summary.seeds[k]},
                                {"rmse", r.summary.reports[k].rmse},
                                {"pcc", pcc_json(r.summary.reports[k].pcc)}});
        }
        arr.push_back({{"label", r.label},
                       {"value", r.value},
                       {"variant", to_string(r.config.model.variant)},
                       {"dataset", r.config.dataset},
                       {"horizon", r.config.horizon},
                       {"mean_rmse", r.summary.mean_rmse},
                       {"mean_pcc", pcc_json(r.summary.mean_pcc)},
                       {"config_hash", r.config.hash()},
                       {"runs", per_seed}});
    }
    return arr;
}

void write_study(const fs::path& stem, const std::vector<StudyRow>& rows)
{
    std::ofstream csv(stem.string() + ".csv");
    if (!csv) {
        throw DataError("cannot write " + stem.string() + ".csv");
    }
    csv.precision(10);
    csv << study_csv_header() << '\n';
    for (const auto& r : rows) {
        write_study_row(csv, r);
        write_study_row(std::cout, r);
    }
    write_json(stem.string() + ".json", study_json(rows));
}

std::vector<std::vector<std::string>> read_text_csv(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open " + path.string());
    }
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!trim(line).empty()) {
            rows.push_back(detail::split_fields(line));
        }
    }
    if (rows.size() < 2) {
        throw DataError(path.string() + ": no data rows");
    }
    return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name, const fs::path& path)
{
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (trim(header[j]) == name) {
            return j;
        }
    }
    throw DataError(path.string() + ": missing column '" + name + "'");
}

double cell(const std::vector<std::string>& row, std::size_t j, const fs::path& path)
{
    if (j >= row.size()) {
        throw DataError(path.string() + ": short row");
    }
    if (trim(row[j]).empty()) {
        return NAN;
    }
    return detail::parse_number(row[j], path.string());
}

// ---- subcommands ----------------------------------------------------------------------

int cmd_prepare(const ConfigFlags& flags)
{
    const auto cfg  = flags.resolve();
    const auto data = load_prepared_data(cfg);
    const auto out  = ensure_dir(cfg.output_dir);
    const auto sum  = summarize(data.series);
    const auto sz   = split_sizes(data.series.steps(), cfg.split);
    json j{{"dataset", cfg.dataset},
           {"steps", sum.steps},
           {"locations", sum.locations},
           {"min", sum.min},
           {"max", sum.max},
           {"mean", sum.mean},
           {"sd", sum.sd},
           {"adjacency_edges", data.adjacency.matrix().sum() / 2},
           {"split_rows", {{"train", sz.train}, {"val", sz.val}, {"test", sz.test}}},
           {"windows", {{"train", data.train.size()}, {"val", data.val.size()}, {"test", data.test.size()}}},
           {"window", cfg.model.window},
           {"horizon", cfg.horizon},
           {"normalization",
            {{"min", detail::vector_to_json(data.stats.per_location_min)},
             {"max", detail::vector_to_json(data.stats.per_location_max)}}},
           {"config_hash", cfg.hash()}};
    write_json(out / "prepare.json", j);
    save_csv(out / "train.csv", data.parts.train);
    save_csv(out / "val.csv", data.parts.val);
    save_csv(out / "test.csv", data.parts.test);
    std::cout << cfg.dataset << ": " << sum.steps << " steps x " << sum.locations << " locations; split " << sz.train
              << '/' << sz.val << '/' << sz.test << "; windows " << data.train.size() << '/' << data.val.size() << '/'
              << data.test.size() << '\n';
    return 0;
}

int cmd_train(const ConfigFlags& flags, bool quiet)
{
    const auto cfg  = flags.resolve();
    const auto data = load_prepared_data(cfg);
    const auto out  = ensure_dir(cfg.output_dir);
    std::ofstream log(out / "training_log.csv");
    if (!log) {
        throw DataError("cannot write training log in " + out.string());
    }
    log.precision(10);
    log << training_log_header() << '\n';
    auto run = run_experiment(data, cfg, [&](const EpochRecord& r) {
        write_training_log_row(log, r);
        if (!quiet && (r.epoch == 1 || r.epoch % 50 == 0)) {
            std::cout << "epoch " << r.epoch << " loss " << r.train.total << " val " << r.val_loss << '\n';
        }
    });
    save_checkpoint(out / "checkpoint.json", make_checkpoint(run, data.series.location_ids));
    save_key_values(out / "config.cfg", cfg.to_key_values());
    std::cout << "best epoch " << run.history.best_epoch << " of " << run.history.stopped_epoch
              << (run.history.early_stopped ? " (early stop)" : "") << ", " << run.train_seconds << " s\n";
    print_metrics("val", run.val_metrics);
    std::cout << "checkpoint " << (out / "checkpoint.json").string() << '\n';
    return 0;
}

Checkpoint checkpoint_with_data(const ConfigFlags& flags, const std::string& path, PreparedData& data)
{
    auto ck = load_checkpoint(path);
    // data locations may be re-pointed from the command line; model settings come from the checkpoint
    auto cfg = ck.config;
    for (const auto& key : {"dataset", "registry", "counts", "adjacency", "output_dir"}) {
        const auto it = flags.values.find(key);
        if (it != flags.values.end() && !it->second.empty()) {
            cfg.set(key, it->second);
        }
    }
    if (!flags.config_file.empty() || !flags.sets.empty()) {
        warn("evaluation uses the checkpoint's model settings; config file and --set are ignored");
    }
    ck.config = cfg;
    data      = load_prepared_data(cfg);
    if (data.series.location_ids != ck.location_ids) {
        throw DataError("dataset locations do not match the checkpoint");
    }
    data.stats = ck.stats;
    return ck;
}

std::string default_checkpoint(const ConfigFlags& flags, const std::string& given)
{
    if (!given.empty()) {
        return given;
    }
    const auto it = flags.values.find("output_dir");
    const fs::path dir = it != flags.values.end() && !it->second.empty() ? fs::path(it->second) : fs::path("runs");
    return (dir / "checkpoint.json").string();
}

int cmd_evaluate(const ConfigFlags& flags, const std::string& ck_path, const std::string& split)
{
    PreparedData data;
    const auto ck  = checkpoint_with_data(flags, default_checkpoint(flags, ck_path), data);
    const auto out = ensure_dir(ck.config.output_dir);
    const auto& span = split == "val" ? data.parts.val : data.parts.test;
    SeriesForecast fc;
    const auto report = score_span(ck.model, data, span, ck.config, &fc);
    write_json(out / "metrics.json", metrics_json(ck.config, report, split));
    write_forecast_csv(out / "forecast.csv", fc, data.series.location_ids, ck.config.horizon);
    print_metrics(split, report);
    print_metrics("persistence", evaluate(fc.last_observed, fc.truth));
    return 0;
}

int cmd_ablate(const ConfigFlags& flags, int seeds)
{
    const auto cfg = flags.resolve();
    GeoAdjacency adj;
    const auto series = load_series(cfg, adj);
    const auto out    = ensure_dir(cfg.output_dir);
    StudyOptions opts;
    opts.seeds  = seed_range(cfg.train.seed, seeds);
    opts.on_run = [](const StudyRow& row, std::uint64_t seed, const ForecastRun& run) {
        std::cerr << row.label << " seed " << seed << " rmse " << run.test_metrics.rmse << '\n';
    };
    std::cout << study_csv_header() << '\n';
    write_study(out / "ablation", run_ablation(series, adj, cfg, opts));
    return 0;
}

int cmd_sweep(const ConfigFlags& flags, const std::string& param_name, const std::string& values_text, int seeds)
{
    auto cfg = flags.resolve();
    const auto param  = parse_sweep_param(param_name);
    const auto values = values_text.empty() ? default_sweep_values(param) : parse_values(values_text);
    GeoAdjacency adj;
    const auto series = load_series(cfg, adj);
    const auto out    = ensure_dir(cfg.output_dir);
    StudyOptions opts;
    opts.seeds  = seed_range(cfg.train.seed, seeds);
    opts.on_run = [](const StudyRow& row, std::uint64_t seed, const ForecastRun& run) {
        std::cerr << row.label << " seed " << seed << " rmse " << run.test_metrics.rmse << '\n';
    };
    std::cout << study_csv_header() << '\n';
    write_study(out / (std::string("sweep_") + to_string(param)), run_sweep(series, adj, cfg, param, values, opts));
    return 0;
}

int cmd_simulate(const fs::path& out_dir, std::uint64_t seed, int weeks, const std::string& name)
{
    auto spec = sir::default_benchmark(seed);
    if (weeks > 0) {
        spec.weeks = weeks;
    }
    const auto sim = sir::simulate(spec);
    const auto out = ensure_dir(out_dir);
    save_csv(out / (name + "_counts.csv"), sim.counts);
    save_adjacency(out / (name + "_adjacency.csv"), GeoAdjacency::from_matrix(sir::default_benchmark_adjacency()));
    write_matrix_csv(out / (name + "_beta.csv"), sim.trajectory.beta, sim.counts.location_ids);
    write_matrix_csv(out / (name + "_gamma.csv"), sim.trajectory.gamma, sim.counts.location_ids);
    write_matrix_csv(out / (name + "_infected_fraction.csv"), sim.trajectory.I, sim.counts.location_ids);

    const auto registry = out / "datasets.cfg";
    KeyValues reg;
    if (fs::exists(registry)) {
        reg = load_key_values(registry);
    }
    reg[name + ".counts"]    = name + "_counts.csv";
    reg[name + ".adjacency"] = name + "_adjacency.csv";
    save_key_values(registry, reg);
    std::cout << "wrote " << spec.weeks << " weeks x " << spec.locations << " locations to " << out.string()
              << " (registry " << registry.string() << ")\n";
    return 0;
}

int cmd_inspect_mag(const ConfigFlags& flags, const std::string& ck_path, const std::string& split, int index)
{
    PreparedData data;
    const auto ck = checkpoint_with_data(flags, default_checkpoint(flags, ck_path), data);
    if (!ck.config.model.uses_transmission_graph()) {
        throw ConfigError(std::string("variant '") + to_string(ck.config.model.variant) + "' builds no affinity graph");
    }
    const auto& windows = split == "train" ? data.train : split == "val" ? data.val : data.test;
    if (index < 0 || index >= static_cast<int>(windows.size())) {
        throw ConfigError("window index " + std::to_string(index) + " out of range [0, " +
                          std::to_string(windows.size()) + ")");
    }
    const auto& sample = windows[static_cast<std::size_t>(index)];
    const auto result  = ck.model.forward(sample, data.adjacency);
    const auto out     = ensure_dir(ck.config.output_dir);
    const auto path    = out / ("mag_" + split + "_" + std::to_string(index) + ".csv");
    std::vector<std::string> header{"location"};
    header.insert(header.end(), data.series.location_ids.begin(), data.series.location_ids.end());
    std::ofstream csv(path);
    if (!csv) {
        throw DataError("cannot write " + path.string());
    }
    csv.precision(12);
    for (std::size_t j = 0; j < header.size(); ++j) {
        csv << (j ? "," : "") << header[j];
    }
    csv << '\n';
    const Matrix& m = result.mag->matrix;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        csv << data.series.location_ids[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            csv << ',' << m(r, c);
        }
        csv << '\n';
    }
    std::cout << "affinity graph (delta " << result.mag->threshold_used << ", " << count_nonzero(m) << " nonzero) -> "
              << path.string() << '\n';
    return 0;
}

int cmd_baseline(const ConfigFlags& flags, const std::string& kind_name, int order)
{
    const auto cfg  = flags.resolve();
    const auto kind = parse_baseline(kind_name);
    GeoAdjacency adj;
    const auto series = load_series(cfg, adj);
    const auto out    = ensure_dir(cfg.output_dir);
    const auto res =
        run_baseline(series, kind, static_cast<int>(cfg.model.window), cfg.horizon, order, cfg.split, cfg.window_options());
    auto j        = metrics_json(cfg, res.report);
    j["variant"]  = std::string("baseline-") + to_string(kind);
    j["order"]    = order > 0 ? order : static_cast<int>(cfg.model.window);
    write_json(out / (std::string("baseline_") + to_string(kind) + ".json"), j);
    print_metrics(to_string(kind), res.report);
    return 0;
}

int cmd_timing(const ConfigFlags& flags, const std::string& sizes_text, int repeats)
{
    const auto cfg   = flags.resolve();
    const auto sizes = parse_values(sizes_text);
    const auto out   = ensure_dir(cfg.output_dir);
    std::ofstream csv(out / "timing.csv");
    if (!csv) {
        throw DataError("cannot write timing.csv");
    }
    csv << "locations,mean_ms,min_ms,repeats\n";
    std::cout << "locations mean_ms min_ms\n";
    std::mt19937_64 rng(cfg.train.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double size : sizes) {
        const auto n = static_cast<Eigen::Index>(size);
        if (n < 2 || static_cast<double>(n) != size) {
            throw ConfigError("location counts must be integers >= 2");
        }
        Forecaster model(cfg.model);
        model.initialize(cfg.train.seed);
        Matrix ring = Matrix::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            ring(i, (i + 1) % n) = ring((i + 1) % n, i) = 1.0;
        }
        const Matrix prop = normalized_laplacian_operator(GeoAdjacency::from_matrix(ring));
        Matrix history(cfg.model.window, n);
        for (Eigen::Index k = 0; k < history.size(); ++k) {
            history.data()[k] = u(rng);
        }
        model.predict(history, prop);
        double total = 0, best = INFINITY;
        for (int r = 0; r < repeats; ++r) {
            const auto t0 = std::chrono::steady_clock::now();
            model.predict(history, prop);
            const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            total += ms;
            best = std::min(best, ms);
        }
        csv << n << ',' << total / repeats << ',' << best << ',' << repeats << '\n';
        std::cout << n << ' ' << total / repeats << ' ' << best << '\n';
    }
    return 0;
}

int cmd_plot(const std::string& forecast_path, const std::string& sweep_path, const std::string& output)
{
    if (forecast_path.empty() == sweep_path.empty()) {
        throw ConfigError("plot needs exactly one of --forecast or --sweep");
    }
    std::vector<PlotPanel> panels;
    fs::path target = output;
    if (!forecast_path.empty()) {
        const auto rows  = read_text_csv(forecast_path);
        const auto& head = rows.front();
        const auto c_row = column(head, "target_row", forecast_path);
        const auto c_loc = column(head, "location", forecast_path);
        const auto c_tru = column(head, "truth", forecast_path);
        const auto c_pre = column(head, "predicted", forecast_path);
        std::vector<std::string> order;
        std::map<std::string, PlotPanel> by_loc;
        for (std::size_t r = 1; r < rows.size(); ++r) {
            const auto loc = trim(rows[r].at(c_loc));
            auto [it, fresh] = by_loc.try_emplace(loc);
            if (fresh) {
                order.push_back(loc);
                it->second.title   = loc;
                it->second.x_label = "week";
                it->second.y_label = "count";
                it->second.series  = {PlotSeries{"truth", {}, {}, "#222222", false, false},
                                      PlotSeries{"forecast", {}, {}, "#d62728", true, false}};
            }
            const double x = cell(rows[r], c_row, forecast_path);
            it->second.series[0].x.push_back(x);
            it->second.series[0].y.push_back(cell(rows[r], c_tru, forecast_path));
            it->second.series[1].x.push_back(x);
            it->second.series[1].y.push_back(cell(rows[r], c_pre, forecast_path));
        }
        for (const auto& loc : order) {
            panels.push_back(by_loc[loc]);
        }
        if (target.empty()) {
            target = fs::path(forecast_path).replace_extension(".svg");
        }
    }
    else {
        const auto rows   = read_text_csv(sweep_path);
        const auto& head  = rows.front();
        const auto c_val  = column(head, "value", sweep_path);
        const auto c_rmse = column(head, "mean_rmse", sweep_path);
        const auto c_pcc  = column(head, "mean_pcc", sweep_path);
        const auto c_lab  = column(head, "label", sweep_path);
        const auto label  = trim(rows[1].at(c_lab));
        const auto param  = label.substr(0, label.find('='));
        PlotPanel rmse_panel{"RMSE", param, "RMSE", {PlotSeries{"rmse", {}, {}, "#1f77b4", false, true}}};
        PlotPanel pcc_panel{"PCC", param, "PCC", {PlotSeries{"pcc", {}, {}, "#2ca02c", false, true}}};
        for (std::size_t r = 1; r < rows.size(); ++r) {
            const double x = cell(rows[r], c_val, sweep_path);
            rmse_panel.series[0].x.push_back(x);
            rmse_panel.series[0].y.push_back(cell(rows[r], c_rmse, sweep_path));
            pcc_panel.series[0].x.push_back(x);
            pcc_panel.series[0].y.push_back(cell(rows[r], c_pcc, sweep_path));
        }
        panels = {rmse_panel, pcc_panel};
        if (target.empty()) {
            target = fs::path(sweep_path).replace_extension(".svg");
        }
    }
    write_svg(target, panels);
    std::cout << "wrote " << target.string() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"epimag: epidemic forecasting with mechanistic affinity graphs"};
    app.require_subcommand(1);
    set_warning_sink([](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; });

    ConfigFlags flags;
    bool quiet = false;
    std::string checkpoint, split = "test", param, values, sizes = "5,10,20,50,100", forecast, sweep_file, plot_out,
                            kind = "gar", sim_name = "synthetic";
    std::string sim_out = "data";
    int seeds = 1, index = 0, order = 0, repeats = 20, weeks = 0;
    std::uint64_t sim_seed = 7;

    auto* prepare = app.add_subcommand("prepare", "validate a dataset and write its splits and census");
    flags.attach(prepare);

    auto* train = app.add_subcommand("train", "train a model; writes checkpoint and training log");
    flags.attach(train);
    train->add_flag("-q,--quiet", quiet, "no per-epoch progress");

    auto* evaluate_cmd = app.add_subcommand("evaluate", "score a checkpoint; writes metrics.json and forecast.csv");
    flags.attach(evaluate_cmd);
    evaluate_cmd->add_option("--checkpoint", checkpoint, "checkpoint file (default <output>/checkpoint.json)");
    evaluate_cmd->add_option("--split", split, "val or test")->check(CLI::IsMember({"val", "test"}));

    auto* ablate = app.add_subcommand("ablate", "train full, no-pl, no-tg and no-tp variants");
    flags.attach(ablate);
    ablate->add_option("--seeds", seeds, "runs per variant, seeds counting up from --seed")->check(CLI::PositiveNumber);

    auto* sweep_cmd = app.add_subcommand("sweep", "vary one hyperparameter over a grid");
    flags.attach(sweep_cmd);
    sweep_cmd->add_option("--param", param, "window, horizon, lambda or delta")->required();
    sweep_cmd->add_option("--values", values, "list a,b,c or range lo..hi[:step]; default grid if omitted");
    sweep_cmd->add_option("--seeds", seeds, "runs per value")->check(CLI::PositiveNumber);

    auto* simulate_cmd = app.add_subcommand("simulate", "write the synthetic SIR benchmark and a registry entry");
    simulate_cmd->add_option("-o,--output", sim_out, "output directory");
    simulate_cmd->add_option("--seed", sim_seed, "population seed");
    simulate_cmd->add_option("--weeks", weeks, "number of weeks (default 200)");
    simulate_cmd->add_option("--name", sim_name, "dataset name in the registry");

    auto* inspect = app.add_subcommand("inspect-mag", "dump the affinity graph of one window as CSV");
    flags.attach(inspect);
    inspect->add_option("--checkpoint", checkpoint, "checkpoint file (default <output>/checkpoint.json)");
    inspect->add_option("--split", split, "train, val or test")->check(CLI::IsMember({"train", "val", "test"}));
    inspect->add_option("--index", index, "window index within the split");

    auto* baseline = app.add_subcommand("baseline", "fit and score a persistence, AR or GAR baseline");
    flags.attach(baseline);
    baseline->add_option("--kind", kind, "persistence, ar or gar");
    baseline->add_option("--order", order, "lag order (default: window)");

    auto* timing = app.add_subcommand("timing", "forward-pass latency against location count");
    flags.attach(timing);
    timing->add_option("--locations", sizes, "location counts, list or range");
    timing->add_option("--repeats", repeats, "timed passes per size")->check(CLI::PositiveNumber);

    auto* plot = app.add_subcommand("plot", "render forecast.csv or a sweep CSV as SVG");
    plot->add_option("--forecast", forecast, "forecast.csv from evaluate");
    plot->add_option("--sweep", sweep_file, "sweep_<param>.csv from sweep");
    plot->add_option("-o,--output", plot_out, "SVG path (default: input with .svg)");

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*prepare) return cmd_prepare(flags);
        if (*train) return cmd_train(flags, quiet);
        if (*evaluate_cmd) return cmd_evaluate(flags, checkpoint, split);
        if (*ablate) return cmd_ablate(flags, seeds);
        if (*sweep_cmd) return cmd_sweep(flags, param, values, seeds);
        if (*simulate_cmd) return cmd_simulate(sim_out, sim_seed, weeks, sim_name);
        if (*inspect) return cmd_inspect_mag(flags, checkpoint, split, index);
        if (*baseline) return cmd_baseline(flags, kind, order);
        if (*timing) return cmd_timing(flags, sizes, repeats);
        if (*plot) return cmd_plot(forecast, sweep_file, plot_out);
    }
    catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    catch (const DivergenceError& e) {
        std::cerr << "training diverged: " << e.what() << '\n';
        return 3;
    }
    catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    }
    catch (const ShapeError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    }
    catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
