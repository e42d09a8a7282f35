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

// Experiment orchestration: typed configs, multi-trial runs, reports, and
// width sweeps.
//
// Config files are flat `key = value` lines with '#' comments. `version = 1`
// is required and unknown keys are rejected. The schema is documented in
// docs/config_schema.md.

#ifndef DPKAN_EXPERIMENT_HPP
#define DPKAN_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dpkan/data.hpp"
#include "dpkan/model.hpp"
#include "dpkan/optimizer.hpp"

namespace dpkan {

enum class ModelKind { kLinear, kMlp, kKan, kFasterKan };
enum class DataSource { kSynthetic, kCsv, kMnist };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& s);

struct ModelSpec {
  ModelKind kind = ModelKind::kLinear;
  std::vector<Index> hidden;  // input and output widths come from the data
  Activation activation = Activation::kRelu;
  // kan
  int grid_size = 2;
  int spline_degree = 2;
  double grid_lo = -1.0;
  double grid_hi = 1.0;
  // fasterkan
  double grid_min = -1.2;
  double grid_max = 0.2;
  int num_grids = 2;
  double inv_denominator = 0.5;
  bool layer_norm = true;
};

/// Builds the model for `n_in` features and `n_out` outputs.
Model build_model(const ModelSpec& spec, Index n_in, Index n_out);

struct DataSpec {
  DataSource source = DataSource::kSynthetic;
  // synthetic
  Index synthetic_n = 20000;
  Index synthetic_d = 10;
  double synthetic_noise = 0.05;
  // csv
  std::filesystem::path csv_path;
  std::string csv_target = "y";
  bool csv_has_header = true;
  // mnist; when test files are given they replace the random split
  std::filesystem::path mnist_train_images;
  std::filesystem::path mnist_train_labels;
  std::filesystem::path mnist_test_images;
  std::filesystem::path mnist_test_labels;
  std::optional<Index> train_limit;  // keep the first n training rows
  std::optional<Index> test_limit;
  double test_fraction = 0.2;
  std::optional<bool> standardize;  // default: on for synthetic/csv, off for mnist
};

struct ExperimentConfig {
  int version = 1;
  Task task = Task::kRegression;
  ModelSpec model;
  DataSpec data;
  DpSgdConfig train;
  int trials = 1;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";

  /// Throws ConfigError on invalid values or missing paths.
  void validate() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical key/value listing of every field, in schema order.
std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& cfg);
std::string emit_config(const ExperimentConfig& cfg);

struct RunReport {
  Task task = Task::kRegression;
  std::string metric;  // "r2" or "accuracy", on the test split
  std::vector<double> trial_metrics;
  double mean = 0.0;
  double half_range = 0.0;  // (max - min) / 2
  std::optional<double> epsilon;
  double delta = 0.0;
  Index parameter_count = 0;
  double wall_clock_seconds = 0.0;
  std::vector<std::uint64_t> seeds;
  std::vector<std::pair<std::string, std::string>> config;

  bool operator==(const RunReport&) const = default;
};

/// With `include_timing` false the wall-clock line is omitted; that form is
/// a pure function of the config and seeds.
std::string emit_report(const RunReport& report, bool include_timing = true);
RunReport parse_report(const std::string& text);

/// One trained and evaluated trial.
struct TrialResult {
  Model model;
  TrainingLog log;
  double test_metric = 0.0;
};

/// Loads, splits, standardizes, trains and evaluates a single trial.
TrialResult run_trial(const ExperimentConfig& cfg, std::uint64_t trial_seed);

/// Trials use seeds root + i. Writes report.txt, log_trial<i>.txt and
/// model_trial<i>.dpkan into cfg.output_dir unless `write_outputs` is false.
RunReport run_experiment(const ExperimentConfig& cfg, bool write_outputs = true);

/// max(0, (nonprivate - private) / nonprivate * 100).
double quality_drop(double nonprivate_metric, double private_metric);

struct SweepRow {
  ModelKind kind = ModelKind::kMlp;
  Index width = 0;
  bool private_mode = false;
  Index parameter_count = 0;
  double mean = 0.0;
  double half_range = 0.0;
  std::optional<double> epsilon;
};

/// One run_experiment per (kind, width, privacy mode), each with a single
/// hidden layer of the given width. Rows are ordered kind-major, then width,
/// then non-private before private.
std::vector<SweepRow> sweep(const ExperimentConfig& base, const std::vector<ModelKind>& kinds,
                            const std::vector<Index>& widths, bool write_outputs = true);

/// Tab-separated table with a header line.
std::string emit_sweep_tsv(const std::vector<SweepRow>& rows);

}  // namespace dpkan

#endif  // DPKAN_EXPERIMENT_HPP
