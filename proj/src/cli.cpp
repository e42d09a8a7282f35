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

#include "dpkan/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dpkan/accountant.hpp"
#include "dpkan/error.hpp"
#include "dpkan/experiment.hpp"
#include "dpkan/metrics.hpp"
#include "dpkan/model_io.hpp"
#include "dpkan/text_format.hpp"

namespace dpkan {

namespace {

using text::format_double;

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

struct TrainArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

struct EvaluateArgs {
  std::string model;
  std::string data;
  std::string metric;
  std::string target = "y";
  bool no_header = false;
};

struct AccountantArgs {
  std::optional<double> sigma;
  std::optional<double> target_epsilon;
  std::int64_t batch_size = 0;
  std::int64_t dataset_size = 0;
  std::int64_t epochs = 0;
  double delta = 1e-5;
};

struct SyntheticArgs {
  Index n = 0;
  Index d = 0;
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::string out;
};

struct SweepArgs {
  std::string config;
  std::string widths;
  std::string kinds;
  std::optional<std::string> out;
};

void print_report(const RunReport& r, const ExperimentConfig& cfg, std::ostream& out) {
  out << r.metric << "_mean=" << format_double(r.mean)
      << " half_range=" << format_double(r.half_range)
      << " epsilon=" << (r.epsilon ? format_double(*r.epsilon) : std::string("none"))
      << " parameters=" << r.parameter_count << " report=" << (cfg.output_dir / "report.txt").string()
      << '\n';
}

int run_train(const TrainArgs& a, std::ostream& out) {
  ExperimentConfig cfg = load_config(a.config);
  if (a.seed) cfg.seed = *a.seed;
  if (a.out) cfg.output_dir = *a.out;
  const RunReport r = run_experiment(cfg);
  print_report(r, cfg, out);
  return kExitOk;
}

int run_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const Model model = load_model(a.model);
  Dataset data;
  const auto comma = a.data.find(',');
  if (comma != std::string::npos) {
    data = load_mnist_idx(a.data.substr(0, comma), a.data.substr(comma + 1));
  } else {
    data = load_csv(a.data, a.target, !a.no_header);
  }
  std::string metric = a.metric;
  if (metric.empty()) metric = data.task == Task::kClassification ? "accuracy" : "r2";
  if (metric == "accuracy" && data.task == Task::kRegression) data = to_classification(std::move(data));
  if (metric == "r2" && data.task == Task::kClassification) {
    throw ArgumentError("r2 needs a regression dataset");
  }
  if (model.n_in() != data.dims()) {
    throw ShapeError("model takes " + std::to_string(model.n_in()) + " features, data has " +
                     std::to_string(data.dims()));
  }
  const Matrix outputs = model.predict(data.features);
  out << metric << '=' << format_double(task_metric(data, outputs)) << '\n';
  return kExitOk;
}

int run_accountant(const AccountantArgs& a, std::ostream& out) {
  if (a.sigma) {
    const PrivacySpend s =
        compute_epsilon(*a.sigma, a.batch_size, a.dataset_size, a.epochs, a.delta);
    out << "epsilon=" << format_double(s.epsilon) << " delta=" << format_double(s.delta)
        << " order=" << format_double(s.optimal_order) << '\n';
  } else {
    const double sigma =
        calibrate_sigma(*a.target_epsilon, a.delta, a.batch_size, a.dataset_size, a.epochs);
    const PrivacySpend s = compute_epsilon(sigma, a.batch_size, a.dataset_size, a.epochs, a.delta);
    out << "sigma=" << format_double(sigma) << " epsilon=" << format_double(s.epsilon)
        << " delta=" << format_double(s.delta) << '\n';
  }
  return kExitOk;
}

int run_gen_synthetic(const SyntheticArgs& a, std::ostream& out) {
  const Dataset data = gen_synthetic(a.n, a.d, a.noise, a.seed);
  const std::filesystem::path out_path(a.out);
  if (out_path.has_parent_path()) std::filesystem::create_directories(out_path.parent_path());
  write_csv(data, out_path);
  out << "wrote " << data.size() << " rows to " << a.out << '\n';
  return kExitOk;
}

int run_sweep(const SweepArgs& a, std::ostream& out) {
  ExperimentConfig cfg = load_config(a.config);
  if (a.out) cfg.output_dir = *a.out;
  std::vector<Index> widths;
  for (const auto& tok : text::split(a.widths, ',')) {
    widths.push_back(static_cast<Index>(text::parse_int(tok, "--widths")));
  }
  std::vector<ModelKind> kinds;
  if (a.kinds.empty()) {
    kinds.push_back(cfg.model.kind);
  } else {
    for (const auto& tok : text::split(a.kinds, ',')) kinds.push_back(parse_model_kind(tok));
  }
  const auto rows = sweep(cfg, kinds, widths);
  out << emit_sweep_tsv(rows);
  return kExitOk;
}

const char* error_kind(const Error& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return "config";
  if (dynamic_cast<const ParseError*>(&e)) return "parse";
  if (dynamic_cast<const InfeasibleError*>(&e)) return "infeasible";
  if (dynamic_cast<const DivergenceError*>(&e)) return "divergence";
  if (dynamic_cast<const ShapeError*>(&e)) return "shape";
  if (dynamic_cast<const ArgumentError*>(&e)) return "argument";
  if (dynamic_cast<const UndefinedMetricError*>(&e)) return "metric";
  return "runtime";
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Differentially private KAN, FasterKAN and MLP training", "dpkan"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Run an experiment from a config file");
  train_cmd->add_option("--config", train_args.config, "Experiment config")->required();
  train_cmd->add_option("--seed", train_args.seed, "Override the root seed");
  train_cmd->add_option("--out", train_args.out, "Override the output directory");

  EvaluateArgs eval_args;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score a saved model on a dataset");
  eval_cmd->add_option("--model", eval_args.model, "Model file")->required();
  eval_cmd->add_option("--data", eval_args.data, "CSV path, or IMAGES,LABELS IDX paths")
      ->required();
  eval_cmd->add_option("--metric", eval_args.metric, "r2 or accuracy")
      ->check(CLI::IsMember({"r2", "accuracy"}));
  eval_cmd->add_option("--target", eval_args.target, "CSV target column");
  eval_cmd->add_flag("--no-header", eval_args.no_header, "CSV has no header line");

  AccountantArgs acc_args;
  auto* acc_cmd = app.add_subcommand("accountant", "Privacy accounting for DP training");
  auto* sigma_opt = acc_cmd->add_option("--sigma", acc_args.sigma, "Noise multiplier");
  auto* target_opt =
      acc_cmd->add_option("--target-epsilon", acc_args.target_epsilon, "Calibrate sigma");
  sigma_opt->excludes(target_opt);
  acc_cmd->add_option("--batch-size", acc_args.batch_size, "Expected batch size")->required();
  acc_cmd->add_option("--dataset-size", acc_args.dataset_size, "Training set size")->required();
  acc_cmd->add_option("--epochs", acc_args.epochs, "Epochs")->required();
  acc_cmd->add_option("--delta", acc_args.delta, "Target delta");

  SyntheticArgs syn_args;
  auto* syn_cmd = app.add_subcommand("gen-synthetic", "Write a synthetic regression CSV");
  syn_cmd->add_option("--n", syn_args.n, "Rows")->required();
  syn_cmd->add_option("--d", syn_args.d, "Features")->required();
  syn_cmd->add_option("--noise", syn_args.noise, "Target noise standard deviation")->required();
  syn_cmd->add_option("--seed", syn_args.seed, "Seed")->required();
  syn_cmd->add_option("--out", syn_args.out, "Output CSV")->required();

  SweepArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "Accuracy versus hidden width");
  sweep_cmd->add_option("--config", sweep_args.config, "Template config")->required();
  sweep_cmd->add_option("--widths", sweep_args.widths, "Comma-separated hidden widths")
      ->required();
  sweep_cmd->add_option("--kinds", sweep_args.kinds, "Comma-separated model kinds");
  sweep_cmd->add_option("--out", sweep_args.out, "Override the output directory");

  if (argc > 1 && argv[1][0] != '-') {
    const std::string name = argv[1];
    bool known = false;
    for (const auto* sub : app.get_subcommands({})) known = known || sub->get_name() == name;
    if (!known) {
      err << "error: usage: unknown subcommand '" << name << "'\n" << app.help();
      return kExitUsage;
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ValidationError& e) {
    err << "error: usage: " << one_line(e.what()) << '\n';
    return kExitFailure;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << one_line(e.what()) << '\n' << app.help();
    return kExitUsage;
  }

  try {
    if (*train_cmd) return run_train(train_args, out);
    if (*eval_cmd) return run_evaluate(eval_args, out);
    if (*acc_cmd) {
      if (!acc_args.sigma && !acc_args.target_epsilon) {
        err << "error: usage: accountant needs --sigma or --target-epsilon\n";
        return kExitUsage;
      }
      return run_accountant(acc_args, out);
    }
    if (*syn_cmd) return run_gen_synthetic(syn_args, out);
    if (*sweep_cmd) return run_sweep(sweep_args, out);
  } catch (const Error& e) {
    err << "error: " << error_kind(e) << ": " << one_line(e.what()) << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: runtime: " << one_line(e.what()) << '\n';
    return kExitFailure;
  }
  err << "error: usage: no subcommand\n" << app.help();
  return kExitUsage;
}

}  // namespace dpkan
