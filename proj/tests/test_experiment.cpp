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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "epimag/checkpoint.hpp"
#include "epimag/plot.hpp"
#include "epimag/sir.hpp"
#include "epimag/studies.hpp"
#include "test_support.hpp"

using namespace epimag;
using namespace epimag::fixtures;
namespace fs = std::filesystem;

namespace
{

fs::path scratch_dir(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / "epimag_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

ExperimentConfig tiny_config()
{
    ExperimentConfig cfg;
    cfg.model            = small_model_config();
    cfg.train.max_epochs = 2;
    cfg.train.patience   = 2;
    return cfg;
}

struct Benchmark
{
    EpidemicSeries series;
    GeoAdjacency adjacency;
};

const Benchmark& benchmark()
{
    static const Benchmark b{sir::simulate(sir::default_benchmark()).counts,
                             GeoAdjacency::from_matrix(sir::default_benchmark_adjacency())};
    return b;
}

} // namespace

TEST(ExperimentConfig, KeyValueRoundTrip)
{
    ExperimentConfig cfg;
    cfg.horizon       = 5;
    cfg.model.delta   = 0.35;
    cfg.train.lambda  = 0.25;
    cfg.model.variant = Variant::NoTransmissionGraph;
    ExperimentConfig back;
    back.apply(cfg.to_key_values());
    EXPECT_EQ(back.to_key_values(), cfg.to_key_values());
    EXPECT_EQ(back.hash(), cfg.hash());
}

TEST(ExperimentConfig, ParsesFileWithComments)
{
    const auto dir = scratch_dir("cfg");
    std::ofstream(dir / "exp.cfg") << "# experiment\ndataset = us-regions\nhorizon = 5\n\ndims = 16, 8, 12\nlambda=0.2\n";
    const auto cfg = load_experiment_config(dir / "exp.cfg");
    EXPECT_EQ(cfg.dataset, "us-regions");
    EXPECT_EQ(cfg.horizon, 5);
    EXPECT_EQ(cfg.model.st_dim, 16);
    EXPECT_EQ(cfg.model.head_dim, 8);
    EXPECT_EQ(cfg.model.htgn_dim, 12);
    EXPECT_DOUBLE_EQ(cfg.train.lambda, 0.2);
}

TEST(ExperimentConfig, RejectsBadInput)
{
    ExperimentConfig cfg;
    EXPECT_THROW(cfg.set("unknown", "1"), ConfigError);
    EXPECT_THROW(cfg.set("horizon", "two"), ConfigError);
    EXPECT_THROW(cfg.set("dims", "1,2"), ConfigError);
    EXPECT_THROW(cfg.set("variant", "w/o"), ConfigError);
    cfg.horizon = 1;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg.allow_single_step = true;
    EXPECT_NO_THROW(cfg.validate());
    cfg.model.delta = 1.2;
    EXPECT_THROW(cfg.validate(), ConfigError);
    EXPECT_THROW(load_experiment_config("/nonexistent.cfg"), ConfigError);
}

TEST(ExperimentConfig, HashIgnoresPathsOnly)
{
    ExperimentConfig a, b;
    b.output_dir = "elsewhere";
    b.counts     = "x.csv";
    EXPECT_EQ(a.hash(), b.hash());
    b.train.seed = 43;
    EXPECT_NE(a.hash(), b.hash());
    EXPECT_EQ(a.hash().size(), 16u);
}

TEST(ExperimentConfig, ResolveDatasetErrors)
{
    const auto dir = scratch_dir("resolve");
    ExperimentConfig cfg;
    cfg.registry = dir / "missing.cfg";
    EXPECT_THROW(resolve_dataset(cfg), ConfigError);
    std::ofstream(dir / "reg.cfg") << "a.counts = a.csv\na.adjacency = a_adj.csv\n";
    cfg.registry = dir / "reg.cfg";
    cfg.dataset  = "b";
    EXPECT_THROW(resolve_dataset(cfg), ConfigError);
    cfg.dataset = "a";
    EXPECT_THROW(resolve_dataset(cfg), ConfigError);  // files absent
    cfg.counts = dir / "a.csv";
    EXPECT_THROW(resolve_dataset(cfg), ConfigError);  // adjacency missing
}

TEST(PrepareData, CensusOnBenchmark)
{
    auto cfg        = tiny_config();
    const auto data = prepare_data(benchmark().series, benchmark().adjacency, cfg);
    EXPECT_EQ(data.parts.train.steps(), 120);
    EXPECT_EQ(data.train.size(), static_cast<std::size_t>(window_count(120, 10, 2)));
    EXPECT_EQ(data.test.size(), static_cast<std::size_t>(window_count(40, 10, 2)));
    EXPECT_DOUBLE_EQ(data.stats.per_location_max.maxCoeff(), data.parts.train.values.maxCoeff());
    EXPECT_THROW(prepare_data(benchmark().series, GeoAdjacency::from_matrix(path_adjacency(4)), cfg), DataError);
}

TEST(Checkpoint, RoundTripPreservesPredictions)
{
    auto cfg        = tiny_config();
    const auto data = prepare_data(benchmark().series, benchmark().adjacency, cfg);
    const auto run  = run_experiment(data, cfg);
    const auto dir  = scratch_dir("ckpt");
    save_checkpoint(dir / "model.json", make_checkpoint(run, data.series.location_ids));
    const auto ck = load_checkpoint(dir / "model.json");
    EXPECT_EQ(ck.config.hash(), cfg.hash());
    EXPECT_EQ(ck.location_ids, data.series.location_ids);
    EXPECT_EQ(ck.stats.per_location_max, run.stats.per_location_max);
    EXPECT_EQ(ck.history.best_epoch, run.history.best_epoch);
    for (std::size_t i = 0; i < ck.model.parameters().size(); ++i) {
        EXPECT_EQ(ck.model.parameters()[i].value, run.model.parameters()[i].value);
    }
    const auto again = score_span(ck.model, data, data.parts.test, ck.config);
    EXPECT_EQ(again.rmse, run.test_metrics.rmse);
}

TEST(Checkpoint, RejectsForeignFiles)
{
    const auto dir = scratch_dir("ckpt_bad");
    std::ofstream(dir / "other.json") << R"({"format": "something"})";
    EXPECT_THROW(load_checkpoint(dir / "other.json"), DataError);
    std::ofstream(dir / "broken.json") << "{ not json";
    EXPECT_THROW(load_checkpoint(dir / "broken.json"), DataError);
    EXPECT_THROW(load_checkpoint(dir / "absent.json"), ConfigError);
}

TEST(MetricsJson, Schema)
{
    ExperimentConfig cfg;
    MetricReport r{12.5, std::nullopt, 40};
    const auto j = metrics_json(cfg, r);
    for (const char* key : {"dataset", "horizon", "seed", "rmse", "pcc", "config_hash"}) {
        EXPECT_TRUE(j.contains(key)) << key;
    }
    EXPECT_TRUE(j["pcc"].is_null());
    EXPECT_EQ(j["config_hash"], cfg.hash());
}

TEST(Studies, ParseValues)
{
    EXPECT_EQ(parse_values("1..6"), (std::vector<double>{1, 2, 3, 4, 5, 6}));
    EXPECT_EQ(parse_values("20, 40,60"), (std::vector<double>{20, 40, 60}));
    const auto lam = parse_values("0..1:0.2");
    ASSERT_EQ(lam.size(), 6u);
    EXPECT_NEAR(lam.back(), 1.0, 1e-12);
    EXPECT_THROW(parse_values("3..1"), ConfigError);
    EXPECT_THROW(parse_values("a,b"), ConfigError);
    EXPECT_THROW(parse_values(""), ConfigError);
    EXPECT_EQ(default_sweep_values(SweepParam::Horizon).size(), 6u);
    EXPECT_EQ(default_sweep_values(SweepParam::Window).front(), 20);
    EXPECT_EQ(default_sweep_values(SweepParam::Delta).back(), 0.8);
    EXPECT_THROW(parse_sweep_param("beta"), ConfigError);
}

TEST(Studies, SweepValueApplication)
{
    auto cfg = tiny_config();
    apply_sweep_value(cfg, SweepParam::Horizon, 1);
    EXPECT_TRUE(cfg.allow_single_step);
    EXPECT_NO_THROW(cfg.validate());
    EXPECT_THROW(apply_sweep_value(cfg, SweepParam::Window, 2.5), ConfigError);
    apply_sweep_value(cfg, SweepParam::Delta, 0.4);
    EXPECT_DOUBLE_EQ(cfg.model.delta, 0.4);
}

TEST(Studies, AblationHasFourRows)
{
    auto cfg        = tiny_config();
    const auto rows = run_ablation(benchmark().series, benchmark().adjacency, cfg);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0].label, "full");
    EXPECT_EQ(rows[3].config.model.variant, Variant::NoTransmissionPath);
    for (const auto& r : rows) {
        EXPECT_TRUE(std::isfinite(r.summary.mean_rmse));
    }
}

TEST(Studies, HorizonSweepHasSixRows)
{
    auto cfg        = tiny_config();
    cfg.train.max_epochs = 1;
    cfg.train.patience   = 1;
    const auto rows = run_sweep(benchmark().series, benchmark().adjacency, cfg, SweepParam::Horizon,
                                parse_values("1..6"));
    ASSERT_EQ(rows.size(), 6u);
    EXPECT_EQ(rows[5].config.horizon, 6);
    EXPECT_EQ(rows[0].label, "horizon=1");
}

TEST(Plot, RendersPanels)
{
    Matrix truth(3, 2), pred(3, 2);
    truth << 1, 2, 3, 4, 5, 6;
    pred << 1, 2, 2, 5, 6, 6;
    const auto panels = forecast_panels(truth, pred, {10, 11, 12}, {"a", "b&c"});
    ASSERT_EQ(panels.size(), 2u);
    const auto svg = render_svg(panels);
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("b&amp;c"), std::string::npos);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    EXPECT_THROW(forecast_panels(truth, pred, {1, 2}, {}), ShapeError);
}
