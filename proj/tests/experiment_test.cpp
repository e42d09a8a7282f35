// Copyright 2026 The dpkan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dpkan/experiment.hpp"
#include "dpkan/model_io.hpp"

namespace dpkan {
namespace {

namespace fs = std::filesystem;

const fs::path kTmp = fs::path(DPKAN_TEST_TMP) / "experiment_test";
const fs::path kMnist = fs::path(DPKAN_SOURCE_DIR) / "data" / "mnist-subset";

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_synthetic(bool private_mode, ModelKind kind = ModelKind::kLinear) {
  ExperimentConfig cfg = parse_config(
      "version = 1\n"
      "task = regression\n"
      "seed = 7\n"
      "trials = 2\n"
      "data.source = synthetic\n"
      "data.synthetic.n = 600\n"
      "data.synthetic.d = 3\n"
      "train.epochs = 3\n"
      "train.batch_size = 32\n"
      "train.learning_rate = 0.05\n");
  cfg.model.kind = kind;
  if (kind == ModelKind::kKan) {
    cfg.model.grid_lo = -4;
    cfg.model.grid_hi = 4;
  }
  cfg.train.private_mode = private_mode;
  cfg.output_dir = kTmp / "run";
  return cfg;
}

ExperimentConfig small_mnist() {
  ExperimentConfig cfg;
  cfg.task = Task::kClassification;
  cfg.data.source = DataSource::kMnist;
  cfg.data.mnist_train_images = kMnist / "train-images-idx3-ubyte";
  cfg.data.mnist_train_labels = kMnist / "train-labels-idx1-ubyte";
  cfg.data.mnist_test_images = kMnist / "test-images-idx3-ubyte";
  cfg.data.mnist_test_labels = kMnist / "test-labels-idx1-ubyte";
  cfg.data.train_limit = 200;
  cfg.data.test_limit = 100;
  cfg.train.epochs = 1;
  cfg.train.batch_size = 50;
  cfg.train.noise_multiplier = 1.0;
  cfg.output_dir = kTmp / "sweep";
  return cfg;
}

// Config ---------------------------------------------------------------------

TEST(Config, ParsesAllSections) {
  const ExperimentConfig cfg = parse_config(
      "# comment\n"
      "version = 1\n"
      "task = classification\n"
      "trials = 3\n"
      "model.kind = fasterkan\n"
      "model.hidden = 32, 16\n"
      "model.grid_min = -1.2\n"
      "model.num_grids = 4\n"
      "data.source = csv\n"
      "data.csv.path = x.csv\n"
      "data.csv.target = label\n"
      "train.private = false\n"
      "train.batch_clip = 2.5\n"
      "train.sampling = full\n");
  EXPECT_EQ(cfg.task, Task::kClassification);
  EXPECT_EQ(cfg.trials, 3);
  EXPECT_EQ(cfg.model.kind, ModelKind::kFasterKan);
  EXPECT_EQ(cfg.model.hidden, (std::vector<Index>{32, 16}));
  EXPECT_EQ(cfg.model.num_grids, 4);
  EXPECT_EQ(cfg.data.source, DataSource::kCsv);
  EXPECT_EQ(cfg.data.csv_target, "label");
  EXPECT_FALSE(cfg.train.private_mode);
  EXPECT_EQ(cfg.train.non_private_batch_clip, 2.5);
  EXPECT_EQ(cfg.train.sampling, BatchSampling::kFullBatch);
}

TEST(Config, EmitParseRoundTrip) {
  ExperimentConfig cfg = small_synthetic(true, ModelKind::kKan);
  cfg.model.hidden = {5};
  cfg.data.train_limit = 100;
  cfg.train.non_private_batch_clip = 0.5;
  const ExperimentConfig back = parse_config(emit_config(cfg));
  EXPECT_EQ(config_entries(back), config_entries(cfg));
}

TEST(Config, RejectsUnknownKey) {
  EXPECT_THROW(parse_config("version = 1\ntrain.learning_rat = 0.1\n"), ConfigError);
}

TEST(Config, RejectsDuplicateKey) {
  EXPECT_THROW(parse_config("version = 1\ntrials = 2\ntrials = 3\n"), ConfigError);
}

TEST(Config, RequiresVersion) {
  EXPECT_THROW(parse_config("trials = 2\n"), VersionError);
  EXPECT_THROW(parse_config("version = 2\n"), VersionError);
}

TEST(Config, RejectsBadValues) {
  EXPECT_THROW(parse_config("version = 1\ntrials = many\n"), ConfigError);
  EXPECT_THROW(parse_config("version = 1\nmodel.kind = transformer\n"), ConfigError);
  EXPECT_THROW(parse_config("version = 1\ntrain.sampling = sometimes\n"), ConfigError);
  EXPECT_THROW(parse_config("version = 1\nno equals sign\n"), ConfigError);
}

TEST(Config, ValidateCatchesMissingFiles) {
  ExperimentConfig cfg = parse_config("version = 1\ndata.source = csv\ndata.csv.path = nope.csv\n");
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.data.csv_path.clear();
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Config, ValidateCatchesInconsistentSettings) {
  ExperimentConfig cfg = small_synthetic(true);
  cfg.validate();
  cfg.model.hidden = {4};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = small_synthetic(true);
  cfg.train.clip_norm = -1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = small_synthetic(true);
  cfg.task = Task::kClassification;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Config, DataPathsResolveAgainstConfigDirectory) {
  fs::create_directories(kTmp / "cfgdir");
  {
    std::ofstream out(kTmp / "cfgdir" / "a.cfg");
    out << "version = 1\ndata.source = csv\ndata.csv.path = data.csv\n";
  }
  const ExperimentConfig cfg = load_config(kTmp / "cfgdir" / "a.cfg");
  EXPECT_EQ(cfg.data.csv_path, kTmp / "cfgdir" / "data.csv");
  EXPECT_THROW(load_config(kTmp / "cfgdir" / "missing.cfg"), ConfigError);
}

// Reports --------------------------------------------------------------------

TEST(Report, RoundTrip) {
  RunReport r;
  r.task = Task::kClassification;
  r.metric = "accuracy";
  r.trial_metrics = {0.9731, 0.97, 0.9699999999999999};
  r.mean = 0.9710333333333333;
  r.half_range = 0.0015500000000000513;
  r.epsilon = 0.8684514837538205;
  r.delta = 1e-5;
  r.parameter_count = 52490;
  r.wall_clock_seconds = 12.5;
  r.seeds = {0, 1, 2};
  r.config = {{"version", "1"}, {"model.kind", "fasterkan"}};
  EXPECT_EQ(parse_report(emit_report(r)), r);

  RunReport untimed = r;
  untimed.epsilon.reset();
  untimed.wall_clock_seconds = 0.0;
  EXPECT_EQ(parse_report(emit_report(untimed, false)), untimed);
}

TEST(Report, RejectsMalformed) {
  EXPECT_THROW(parse_report("something else\n"), VersionError);
  EXPECT_THROW(parse_report("dpkan-report v1\ntrials=2\ntrial_metrics=0.5\nseeds=0\n"), ParseError);
  EXPECT_THROW(parse_report("dpkan-report v1\nwhatever=1\n"), ParseError);
}

// Runs -----------------------------------------------------------------------

TEST(Run, NonPrivateLinearFitsSynthetic) {
  ExperimentConfig cfg = small_synthetic(false);
  cfg.data.synthetic_n = 3000;
  cfg.train.epochs = 10;
  const RunReport r = run_experiment(cfg, false);
  EXPECT_EQ(r.metric, "r2");
  EXPECT_GE(r.mean, 0.99);
  EXPECT_FALSE(r.epsilon.has_value());
  EXPECT_EQ(r.parameter_count, 4);
  EXPECT_EQ(r.seeds, (std::vector<std::uint64_t>{7, 8}));
}

TEST(Run, SameConfigGivesSameReport) {
  for (bool priv : {false, true}) {
    const ExperimentConfig cfg = small_synthetic(priv, ModelKind::kKan);
    const RunReport a = run_experiment(cfg, false);
    const RunReport b = run_experiment(cfg, false);
    EXPECT_EQ(emit_report(a, false), emit_report(b, false)) << priv;
    EXPECT_EQ(a.epsilon.has_value(), priv);
  }
}

TEST(Run, WritesArtifacts) {
  ExperimentConfig cfg = small_synthetic(true);
  cfg.output_dir = kTmp / "artifacts";
  fs::remove_all(cfg.output_dir);
  const RunReport r = run_experiment(cfg, true);
  const RunReport disk = parse_report(read_file(cfg.output_dir / "report.txt"));
  EXPECT_EQ(emit_report(disk, false), emit_report(r, false));
  const TrainingLog log = parse_training_log(read_file(cfg.output_dir / "log_trial1.txt"));
  EXPECT_EQ(log.epochs.size(), 3u);
  const Model m = load_model(cfg.output_dir / "model_trial0.dpkan");
  EXPECT_EQ(m.parameter_count(), r.parameter_count);
  EXPECT_TRUE(m.input_scaling().has_value());
}

TEST(QualityDrop, Percent) {
  EXPECT_NEAR(quality_drop(0.9975, 0.9967), 0.0802, 1e-4);
  EXPECT_EQ(quality_drop(0.9, 0.95), 0.0);
  EXPECT_THROW(quality_drop(0.0, 0.5), UndefinedMetricError);
}

// Sweep ----------------------------------------------------------------------

TEST(Sweep, RowsAndParameterCounts) {
  fs::remove_all(kTmp / "sweep");
  const std::vector<SweepRow> rows = sweep(small_mnist(), {ModelKind::kMlp}, {16, 32}, true);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].width, 16);
  EXPECT_FALSE(rows[0].private_mode);
  EXPECT_TRUE(rows[1].private_mode);
  EXPECT_EQ(rows[0].parameter_count, 12730);
  EXPECT_EQ(rows[2].parameter_count, 25450);
  EXPECT_FALSE(rows[0].epsilon.has_value());
  EXPECT_TRUE(rows[1].epsilon.has_value());
  const std::string tsv = read_file(kTmp / "sweep" / "sweep.tsv");
  EXPECT_EQ(tsv, emit_sweep_tsv(rows));
  EXPECT_TRUE(fs::exists(kTmp / "sweep" / "mlp_w32_private" / "report.txt"));
}

TEST(Sweep, RejectsRegressionAndLinear) {
  EXPECT_THROW(sweep(small_synthetic(false), {ModelKind::kMlp}, {4}, false), ConfigError);
  EXPECT_THROW(sweep(small_mnist(), {ModelKind::kLinear}, {4}, false), ArgumentError);
  EXPECT_THROW(sweep(small_mnist(), {ModelKind::kMlp}, {}, false), ArgumentError);
}

}  // namespace
}  // namespace dpkan
