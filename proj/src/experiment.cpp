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

#include "dpkan/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "dpkan/error.hpp"
#include "dpkan/metrics.hpp"
#include "dpkan/model_io.hpp"
#include "dpkan/text_format.hpp"

namespace dpkan {

namespace fs = std::filesystem;
using text::format_double;

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLinear: return "linear";
    case ModelKind::kMlp: return "mlp";
    case ModelKind::kKan: return "kan";
    case ModelKind::kFasterKan: return "fasterkan";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& s) {
  if (s == "linear") return ModelKind::kLinear;
  if (s == "mlp") return ModelKind::kMlp;
  if (s == "kan") return ModelKind::kKan;
  if (s == "fasterkan") return ModelKind::kFasterKan;
  throw ConfigError("unknown model kind '" + s + "' (expected linear, mlp, kan, fasterkan)");
}

Model build_model(const ModelSpec& spec, Index n_in, Index n_out) {
  std::vector<Index> widths{n_in};
  widths.insert(widths.end(), spec.hidden.begin(), spec.hidden.end());
  widths.push_back(n_out);
  switch (spec.kind) {
    case ModelKind::kLinear:
      if (!spec.hidden.empty()) throw ConfigError("a linear model has no hidden layers");
      return make_mlp(widths, Activation::kNone);
    case ModelKind::kMlp:
      return make_mlp(widths, spec.activation);
    case ModelKind::kKan:
      return make_kan(widths,
                      BSplineGrid<double>(spec.grid_size, spec.spline_degree, spec.grid_lo,
                                          spec.grid_hi));
    case ModelKind::kFasterKan:
      return make_fasterkan(widths,
                            RswafGrid<double>(spec.grid_min, spec.grid_max, spec.num_grids,
                                              spec.inv_denominator),
                            spec.layer_norm);
  }
  throw ConfigError("unknown model kind");
}

namespace {

std::string task_name(Task t) { return t == Task::kRegression ? "regression" : "classification"; }

Task parse_task(const std::string& s) {
  if (s == "regression") return Task::kRegression;
  if (s == "classification") return Task::kClassification;
  throw ConfigError("unknown task '" + s + "' (expected regression or classification)");
}

std::string source_name(DataSource s) {
  switch (s) {
    case DataSource::kSynthetic: return "synthetic";
    case DataSource::kCsv: return "csv";
    case DataSource::kMnist: return "mnist";
  }
  return "unknown";
}

DataSource parse_source(const std::string& s) {
  if (s == "synthetic") return DataSource::kSynthetic;
  if (s == "csv") return DataSource::kCsv;
  if (s == "mnist") return DataSource::kMnist;
  throw ConfigError("unknown data source '" + s + "' (expected synthetic, csv, mnist)");
}

std::string bool_name(bool b) { return b ? "true" : "false"; }

std::string index_list(const std::vector<Index>& v) {
  return text::join(v, [](Index i) { return std::to_string(i); });
}

std::vector<Index> parse_index_list(const std::string& s, const std::string& what) {
  std::vector<Index> out;
  if (text::trim(s).empty()) return out;
  for (const auto& tok : text::split(s, ',')) {
    const auto v = text::parse_int(tok, what);
    if (v < 1) throw ConfigError(what + ": widths must be positive");
    out.push_back(static_cast<Index>(v));
  }
  return out;
}

// Rethrows value parse failures as configuration errors naming the key.
template <typename F>
auto as_config(const std::string& key, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

struct Field {
  std::string key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  // Returns nullopt for unset optional fields, which are not emitted.
  std::function<std::optional<std::string>(const ExperimentConfig&)> get;
};

using Cfg = ExperimentConfig;
using Opt = std::optional<std::string>;

double num(const std::string& key, const std::string& v) {
  return as_config(key, [&] { return text::parse_double(v, key); });
}
std::int64_t integer(const std::string& key, const std::string& v) {
  return as_config(key, [&] { return text::parse_int(v, key); });
}
bool boolean(const std::string& key, const std::string& v) {
  return as_config(key, [&] { return text::parse_bool(v, key); });
}

const std::vector<Field>& schema() {
  static const std::vector<Field> fields = {
      {"version", [](Cfg& c, const std::string& v) { c.version = static_cast<int>(integer("version", v)); },
       [](const Cfg& c) -> Opt { return std::to_string(c.version); }},
      {"task", [](Cfg& c, const std::string& v) { c.task = parse_task(v); },
       [](const Cfg& c) -> Opt { return task_name(c.task); }},
      {"seed",
       [](Cfg& c, const std::string& v) {
         c.seed = as_config("seed", [&] { return text::parse_uint(v, "seed"); });
       },
       [](const Cfg& c) -> Opt { return std::to_string(c.seed); }},
      {"trials", [](Cfg& c, const std::string& v) { c.trials = static_cast<int>(integer("trials", v)); },
       [](const Cfg& c) -> Opt { return std::to_string(c.trials); }},
      {"output_dir", [](Cfg& c, const std::string& v) { c.output_dir = v; },
       [](const Cfg& c) -> Opt { return c.output_dir.string(); }},

      {"model.kind", [](Cfg& c, const std::string& v) { c.model.kind = parse_model_kind(v); },
       [](const Cfg& c) -> Opt { return to_string(c.model.kind); }},
      {"model.hidden",
       [](Cfg& c, const std::string& v) { c.model.hidden = parse_index_list(v, "model.hidden"); },
       [](const Cfg& c) -> Opt { return index_list(c.model.hidden); }},
      {"model.activation",
       [](Cfg& c, const std::string& v) {
         c.model.activation = as_config("model.activation", [&] { return parse_activation(v); });
       },
       [](const Cfg& c) -> Opt { return to_string(c.model.activation); }},
      {"model.grid_size",
       [](Cfg& c, const std::string& v) { c.model.grid_size = static_cast<int>(integer("model.grid_size", v)); },
       [](const Cfg& c) -> Opt { return std::to_string(c.model.grid_size); }},
      {"model.spline_degree",
       [](Cfg& c, const std::string& v) {
         c.model.spline_degree = static_cast<int>(integer("model.spline_degree", v));
       },
       [](const Cfg& c) -> Opt { return std::to_string(c.model.spline_degree); }},
      {"model.grid_lo", [](Cfg& c, const std::string& v) { c.model.grid_lo = num("model.grid_lo", v); },
       [](const Cfg& c) -> Opt { return format_double(c.model.grid_lo); }},
      {"model.grid_hi", [](Cfg& c, const std::string& v) { c.model.grid_hi = num("model.grid_hi", v); },
       [](const Cfg& c) -> Opt { return format_double(c.model.grid_hi); }},
      {"model.grid_min", [](Cfg& c, const std::string& v) { c.model.grid_min = num("model.grid_min", v); },
       [](const Cfg& c) -> Opt { return format_double(c.model.grid_min); }},
      {"model.grid_max", [](Cfg& c, const std::string& v) { c.model.grid_max = num("model.grid_max", v); },
       [](const Cfg& c) -> Opt { return format_double(c.model.grid_max); }},
      {"model.num_grids",
       [](Cfg& c, const std::string& v) { c.model.num_grids = static_cast<int>(integer("model.num_grids", v)); },
       [](const Cfg& c) -> Opt { return std::to_string(c.model.num_grids); }},
      {"model.inv_denominator",
       [](Cfg& c, const std::string& v) { c.model.inv_denominator = num("model.inv_denominator", v); },
       [](const Cfg& c) -> Opt { return format_double(c.model.inv_denominator); }},
      {"model.layer_norm",
       [](Cfg& c, const std::string& v) { c.model.layer_norm = boolean("model.layer_norm", v); },
       [](const Cfg& c) -> Opt { return bool_name(c.model.layer_norm); }},

      {"data.source", [](Cfg& c, const std::string& v) { c.data.source = parse_source(v); },
       [](const Cfg& c) -> Opt { return source_name(c.data.source); }},
      {"data.synthetic.n",
       [](Cfg& c, const std::string& v) { c.data.synthetic_n = integer("data.synthetic.n", v); },
       [](const Cfg& c) -> Opt { return std::to_string(c.data.synthetic_n); }},
      {"data.synthetic.d",
       [](Cfg& c, const std::string& v) { c.data.synthetic_d = integer("data.synthetic.d", v); },
       [](const Cfg& c) -> Opt { return std::to_string(c.data.synthetic_d); }},
      {"data.synthetic.noise",
       [](Cfg& c, const std::string& v) { c.data.synthetic_noise = num("data.synthetic.noise", v); },
       [](const Cfg& c) -> Opt { return format_double(c.data.synthetic_noise); }},
      {"data.csv.path", [](Cfg& c, const std::string& v) { c.data.csv_path = v; },
       [](const Cfg& c) -> Opt {
         return c.data.csv_path.empty() ? Opt{} : Opt{c.data.csv_path.string()};
       }},
      {"data.csv.target", [](Cfg& c, const std::string& v) { c.data.csv_target = v; },
       [](const Cfg& c) -> Opt { return c.data.csv_target; }},
      {"data.csv.has_header",
       [](Cfg& c, const std::string& v) { c.data.csv_has_header = boolean("data.csv.has_header", v); },
       [](const Cfg& c) -> Opt { return bool_name(c.data.csv_has_header); }},
      {"data.mnist.train_images", [](Cfg& c, const std::string& v) { c.data.mnist_train_images = v; },
       [](const Cfg& c) -> Opt {
         return c.data.mnist_train_images.empty() ? Opt{} : Opt{c.data.mnist_train_images.string()};
       }},
      {"data.mnist.train_labels", [](Cfg& c, const std::string& v) { c.data.mnist_train_labels = v; },
       [](const Cfg& c) -> Opt {
         return c.data.mnist_train_labels.empty() ? Opt{} : Opt{c.data.mnist_train_labels.string()};
       }},
      {"data.mnist.test_images", [](Cfg& c, const std::string& v) { c.data.mnist_test_images = v; },
       [](const Cfg& c) -> Opt {
         return c.data.mnist_test_images.empty() ? Opt{} : Opt{c.data.mnist_test_images.string()};
       }},
      {"data.mnist.test_labels", [](Cfg& c, const std::string& v) { c.data.mnist_test_labels = v; },
       [](const Cfg& c) -> Opt {
         return c.data.mnist_test_labels.empty() ? Opt{} : Opt{c.data.mnist_test_labels.string()};
       }},
      {"data.train_limit",
       [](Cfg& c, const std::string& v) { c.data.train_limit = integer("data.train_limit", v); },
       [](const Cfg& c) -> Opt {
         return c.data.train_limit ? Opt{std::to_string(*c.data.train_limit)} : Opt{};
       }},
      {"data.test_limit",
       [](Cfg& c, const std::string& v) { c.data.test_limit = integer("data.test_limit", v); },
       [](const Cfg& c) -> Opt {
         return c.data.test_limit ? Opt{std::to_string(*c.data.test_limit)} : Opt{};
       }},
      {"data.test_fraction",
       [](Cfg& c, const std::string& v) { c.data.test_fraction = num("data.test_fraction", v); },
       [](const Cfg& c) -> Opt { return format_double(c.data.test_fraction); }},
      {"data.standardize",
       [](Cfg& c, const std::string& v) { c.data.standardize = boolean("data.standardize", v); },
       [](const Cfg& c) -> Opt {
         return c.data.standardize ? Opt{bool_name(*c.data.standardize)} : Opt{};
       }},

      {"train.private",
       [](Cfg& c, const std::string& v) { c.train.private_mode = boolean("train.private", v); },
       [](const Cfg& c) -> Opt { return bool_name(c.train.private_mode); }},
      {"train.epochs", [](Cfg& c, const std::string& v) { c.train.epochs = integer("train.epochs", v); },
       [](const Cfg& c) -> Opt { return std::to_string(c.train.epochs); }},
      {"train.learning_rate",
       [](Cfg& c, const std::string& v) { c.train.learning_rate = num("train.learning_rate", v); },
       [](const Cfg& c) -> Opt { return format_double(c.train.learning_rate); }},
      {"train.clip_norm",
       [](Cfg& c, const std::string& v) { c.train.clip_norm = num("train.clip_norm", v); },
       [](const Cfg& c) -> Opt { return format_double(c.train.clip_norm); }},
      {"train.noise_multiplier",
       [](Cfg& c, const std::string& v) { c.train.noise_multiplier = num("train.noise_multiplier", v); },
       [](const Cfg& c) -> Opt { return format_double(c.train.noise_multiplier); }},
      {"train.batch_size",
       [](Cfg& c, const std::string& v) { c.train.batch_size = integer("train.batch_size", v); },
       [](const Cfg& c) -> Opt { return std::to_string(c.train.batch_size); }},
      {"train.delta", [](Cfg& c, const std::string& v) { c.train.delta = num("train.delta", v); },
       [](const Cfg& c) -> Opt { return format_double(c.train.delta); }},
      {"train.batch_clip",
       [](Cfg& c, const std::string& v) { c.train.non_private_batch_clip = num("train.batch_clip", v); },
       [](const Cfg& c) -> Opt {
         return c.train.non_private_batch_clip ? Opt{format_double(*c.train.non_private_batch_clip)}
                                               : Opt{};
       }},
      {"train.beta1", [](Cfg& c, const std::string& v) { c.train.adam.beta1 = num("train.beta1", v); },
       [](const Cfg& c) -> Opt { return format_double(c.train.adam.beta1); }},
      {"train.beta2", [](Cfg& c, const std::string& v) { c.train.adam.beta2 = num("train.beta2", v); },
       [](const Cfg& c) -> Opt { return format_double(c.train.adam.beta2); }},
      {"train.adam_eps", [](Cfg& c, const std::string& v) { c.train.adam.eps = num("train.adam_eps", v); },
       [](const Cfg& c) -> Opt { return format_double(c.train.adam.eps); }},
      {"train.weight_decay",
       [](Cfg& c, const std::string& v) { c.train.adam.weight_decay = num("train.weight_decay", v); },
       [](const Cfg& c) -> Opt { return format_double(c.train.adam.weight_decay); }},
      {"train.sampling",
       [](Cfg& c, const std::string& v) {
         if (v == "poisson") c.train.sampling = BatchSampling::kPoisson;
         else if (v == "full") c.train.sampling = BatchSampling::kFullBatch;
         else throw ConfigError("train.sampling must be poisson or full, got '" + v + "'");
       },
       [](const Cfg& c) -> Opt {
         return std::string(c.train.sampling == BatchSampling::kPoisson ? "poisson" : "full");
       }},
      {"train.check_clipping",
       [](Cfg& c, const std::string& v) { c.train.check_clipping = boolean("train.check_clipping", v); },
       [](const Cfg& c) -> Opt { return bool_name(c.train.check_clipping); }},
  };
  return fields;
}

const Field* find_field(const std::string& key) {
  for (const auto& f : schema()) {
    if (f.key == key) return &f;
  }
  return nullptr;
}

void require_file(const fs::path& p, const std::string& key) {
  if (p.empty()) throw ConfigError(key + " is required for this data source");
  if (!fs::is_regular_file(p)) throw ConfigError(key + ": file not found: " + p.string());
}

bool standardize_enabled(const DataSpec& d) {
  return d.standardize.value_or(d.source != DataSource::kMnist);
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("write failed: " + path.string());
}

constexpr char kReportHeader[] = "dpkan-report v1";

}  // namespace

void ExperimentConfig::validate() const {
  if (version != 1) throw VersionError("unsupported config version " + std::to_string(version));
  if (trials < 1) throw ConfigError("trials must be at least 1");
  try {
    train.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("train: ") + e.what());
  }
  if (model.kind == ModelKind::kLinear && !model.hidden.empty()) {
    throw ConfigError("model.hidden must be empty for a linear model");
  }
  if (model.kind == ModelKind::kKan) {
    if (model.grid_size < 1 || model.spline_degree < 0 || !(model.grid_lo < model.grid_hi)) {
      throw ConfigError("KAN grid needs grid_size >= 1, spline_degree >= 0, grid_lo < grid_hi");
    }
  }
  if (model.kind == ModelKind::kFasterKan) {
    if (model.num_grids < 1 || !(model.grid_min < model.grid_max) ||
        !(model.inv_denominator > 0.0)) {
      throw ConfigError(
          "FasterKAN grid needs num_grids >= 1, grid_min < grid_max, inv_denominator > 0");
    }
  }
  if (!(data.test_fraction > 0.0 && data.test_fraction < 1.0)) {
    throw ConfigError("data.test_fraction must lie in (0, 1)");
  }
  if (data.train_limit && *data.train_limit < 1) throw ConfigError("data.train_limit must be >= 1");
  if (data.test_limit && *data.test_limit < 1) throw ConfigError("data.test_limit must be >= 1");
  switch (data.source) {
    case DataSource::kSynthetic:
      if (task != Task::kRegression) throw ConfigError("synthetic data is a regression task");
      if (data.synthetic_n < 2 || data.synthetic_d < 1 || !(data.synthetic_noise >= 0.0)) {
        throw ConfigError("synthetic data needs n >= 2, d >= 1, noise >= 0");
      }
      break;
    case DataSource::kCsv:
      require_file(data.csv_path, "data.csv.path");
      if (data.csv_target.empty()) throw ConfigError("data.csv.target is empty");
      break;
    case DataSource::kMnist:
      if (task != Task::kClassification) throw ConfigError("MNIST is a classification task");
      require_file(data.mnist_train_images, "data.mnist.train_images");
      require_file(data.mnist_train_labels, "data.mnist.train_labels");
      if (data.mnist_test_images.empty() != data.mnist_test_labels.empty()) {
        throw ConfigError("data.mnist.test_images and data.mnist.test_labels go together");
      }
      if (!data.mnist_test_images.empty()) {
        require_file(data.mnist_test_images, "data.mnist.test_images");
        require_file(data.mnist_test_labels, "data.mnist.test_labels");
      }
      break;
  }
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::string key, value;
    try {
      if (!text::split_key_value(line, key, value, line_no)) continue;
    } catch (const ParseError& e) {
      throw ConfigError(e.what());
    }
    const Field* f = find_field(key);
    if (!f) throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    if (!seen.insert(key).second) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    f->set(cfg, value);
  }
  if (!seen.count("version")) throw VersionError("config is missing the required 'version' key");
  if (cfg.version != 1) throw VersionError("unsupported config version " + std::to_string(cfg.version));
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  ExperimentConfig cfg = parse_config(ss.str());
  // Data paths are relative to the config file.
  const fs::path base = path.parent_path();
  for (fs::path* p : {&cfg.data.csv_path, &cfg.data.mnist_train_images, &cfg.data.mnist_train_labels,
                      &cfg.data.mnist_test_images, &cfg.data.mnist_test_labels}) {
    if (!p->empty() && p->is_relative()) *p = base / *p;
  }
  return cfg;
}

std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : schema()) {
    if (auto v = f.get(cfg)) out.emplace_back(f.key, *v);
  }
  return out;
}

std::string emit_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : config_entries(cfg)) out += k + " = " + v + "\n";
  return out;
}

std::string emit_report(const RunReport& r, bool include_timing) {
  std::ostringstream os;
  os << kReportHeader << '\n';
  os << "task=" << task_name(r.task) << '\n';
  os << "metric=" << r.metric << '\n';
  os << "trials=" << r.trial_metrics.size() << '\n';
  os << "trial_metrics=" << text::join(r.trial_metrics, format_double) << '\n';
  os << "mean=" << format_double(r.mean) << '\n';
  os << "half_range=" << format_double(r.half_range) << '\n';
  os << "epsilon=" << (r.epsilon ? format_double(*r.epsilon) : std::string("none")) << '\n';
  os << "delta=" << format_double(r.delta) << '\n';
  os << "parameter_count=" << r.parameter_count << '\n';
  if (include_timing) os << "wall_clock_seconds=" << format_double(r.wall_clock_seconds) << '\n';
  os << "seeds=" << text::join(r.seeds, [](std::uint64_t s) { return std::to_string(s); }) << '\n';
  for (const auto& [k, v] : r.config) os << "config." << k << '=' << v << '\n';
  return os.str();
}

RunReport parse_report(const std::string& content) {
  std::istringstream is(content);
  std::string line;
  if (!std::getline(is, line) || text::trim(line) != kReportHeader) {
    throw VersionError("report: missing or unsupported header (expected '" +
                       std::string(kReportHeader) + "')");
  }
  RunReport r;
  std::optional<std::int64_t> trials;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    std::string key, value;
    if (!text::split_key_value(line, key, value, line_no)) continue;
    const std::string where = "report line " + std::to_string(line_no);
    if (key.starts_with("config.")) {
      r.config.emplace_back(key.substr(7), value);
    } else if (key == "task") {
      if (value == "regression") r.task = Task::kRegression;
      else if (value == "classification") r.task = Task::kClassification;
      else throw ParseError(where + ": unknown task '" + value + "'");
    } else if (key == "metric") {
      r.metric = value;
    } else if (key == "trials") {
      trials = text::parse_int(value, where);
    } else if (key == "trial_metrics") {
      for (const auto& tok : text::split(value, ',')) {
        if (!tok.empty()) r.trial_metrics.push_back(text::parse_double(tok, where));
      }
    } else if (key == "mean") {
      r.mean = text::parse_double(value, where);
    } else if (key == "half_range") {
      r.half_range = text::parse_double(value, where);
    } else if (key == "epsilon") {
      if (value == "none") r.epsilon.reset();
      else r.epsilon = text::parse_double(value, where);
    } else if (key == "delta") {
      r.delta = text::parse_double(value, where);
    } else if (key == "parameter_count") {
      r.parameter_count = text::parse_int(value, where);
    } else if (key == "wall_clock_seconds") {
      r.wall_clock_seconds = text::parse_double(value, where);
    } else if (key == "seeds") {
      for (const auto& tok : text::split(value, ',')) {
        if (!tok.empty()) r.seeds.push_back(text::parse_uint(tok, where));
      }
    } else {
      throw ParseError(where + ": unknown key '" + key + "'");
    }
  }
  if (!trials || static_cast<std::size_t>(*trials) != r.trial_metrics.size() ||
      r.seeds.size() != r.trial_metrics.size()) {
    throw ParseError("report: trial count does not match the listed metrics and seeds");
  }
  return r;
}

TrialResult run_trial(const ExperimentConfig& cfg, std::uint64_t trial_seed) {
  Dataset train_set;
  Dataset test_set;
  const DataSpec& d = cfg.data;
  switch (d.source) {
    case DataSource::kSynthetic: {
      auto [tr, te] = train_test_split(
          gen_synthetic(d.synthetic_n, d.synthetic_d, d.synthetic_noise, trial_seed),
          d.test_fraction, trial_seed);
      train_set = std::move(tr);
      test_set = std::move(te);
      break;
    }
    case DataSource::kCsv: {
      Dataset full = load_csv(d.csv_path, d.csv_target, d.csv_has_header);
      if (cfg.task == Task::kClassification) full = to_classification(std::move(full));
      auto [tr, te] = train_test_split(full, d.test_fraction, trial_seed);
      train_set = std::move(tr);
      test_set = std::move(te);
      break;
    }
    case DataSource::kMnist: {
      Dataset full = load_mnist_idx(d.mnist_train_images, d.mnist_train_labels);
      if (!d.mnist_test_images.empty()) {
        train_set = std::move(full);
        test_set = load_mnist_idx(d.mnist_test_images, d.mnist_test_labels);
      } else {
        auto [tr, te] = train_test_split(full, d.test_fraction, trial_seed);
        train_set = std::move(tr);
        test_set = std::move(te);
      }
      break;
    }
  }
  if (d.train_limit) train_set = train_set.head(*d.train_limit);
  if (d.test_limit) test_set = test_set.head(*d.test_limit);
  if (test_set.task == Task::kClassification) {
    // Both sides must agree on the output width.
    const int classes = std::max(train_set.num_classes, test_set.num_classes);
    train_set.num_classes = test_set.num_classes = classes;
  }
  if (standardize_enabled(d)) {
    auto scaled = standardize(train_set, {test_set});
    train_set = std::move(scaled[0]);
    test_set = std::move(scaled[1]);
  }

  const Index n_out = cfg.task == Task::kClassification ? train_set.num_classes : 1;
  Model model = build_model(cfg.model, train_set.dims(), n_out);
  RngState rng(trial_seed);
  model.initialize(rng.stream(Stream::kInit));

  DpSgdConfig tc = cfg.train;
  tc.seed = trial_seed;
  TrainResult result = train(std::move(model), train_set, tc, default_loss(train_set));
  result.model.set_input_scaling(train_set.scaling);
  const double metric = task_metric(test_set, result.model.forward(test_set.features));
  return {std::move(result.model), std::move(result.log), metric};
}

RunReport run_experiment(const ExperimentConfig& cfg, bool write_outputs) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.task = cfg.task;
  report.metric = cfg.task == Task::kRegression ? "r2" : "accuracy";
  report.config = config_entries(cfg);
  if (write_outputs) fs::create_directories(cfg.output_dir);
  for (int i = 0; i < cfg.trials; ++i) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(i);
    TrialResult trial;
    try {
      trial = run_trial(cfg, seed);
    } catch (const Error& e) {
      throw Error("trial " + std::to_string(i) + " (seed " + std::to_string(seed) +
                  ") failed: " + e.what());
    }
    report.seeds.push_back(seed);
    report.trial_metrics.push_back(trial.test_metric);
    report.parameter_count = trial.model.parameter_count();
    report.epsilon = trial.log.epsilon;
    report.delta = trial.log.delta;
    if (write_outputs) {
      const std::string idx = std::to_string(i);
      write_text(cfg.output_dir / ("log_trial" + idx + ".txt"), emit_training_log(trial.log));
      save_model(trial.model, cfg.output_dir / ("model_trial" + idx + ".dpkan"));
    }
  }
  const auto [lo, hi] = std::minmax_element(report.trial_metrics.begin(), report.trial_metrics.end());
  double sum = 0.0;
  for (double m : report.trial_metrics) sum += m;
  report.mean = sum / static_cast<double>(report.trial_metrics.size());
  report.half_range = (*hi - *lo) / 2.0;
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (write_outputs) write_text(cfg.output_dir / "report.txt", emit_report(report));
  return report;
}

double quality_drop(double nonprivate_metric, double private_metric) {
  if (nonprivate_metric == 0.0) throw UndefinedMetricError("quality_drop: non-private metric is 0");
  return std::max(0.0, (nonprivate_metric - private_metric) / nonprivate_metric * 100.0);
}

std::vector<SweepRow> sweep(const ExperimentConfig& base, const std::vector<ModelKind>& kinds,
                            const std::vector<Index>& widths, bool write_outputs) {
  if (base.task != Task::kClassification) throw ConfigError("sweep needs a classification task");
  if (kinds.empty() || widths.empty()) throw ArgumentError("sweep: no kinds or widths given");
  std::vector<SweepRow> rows;
  for (ModelKind kind : kinds) {
    if (kind == ModelKind::kLinear) throw ArgumentError("sweep: linear models have no width");
    for (Index width : widths) {
      if (width < 1) throw ArgumentError("sweep: widths must be positive");
      for (bool priv : {false, true}) {
        ExperimentConfig cfg = base;
        cfg.model.kind = kind;
        cfg.model.hidden = {width};
        cfg.train.private_mode = priv;
        cfg.output_dir = base.output_dir / (to_string(kind) + "_w" + std::to_string(width) +
                                            (priv ? "_private" : "_nonprivate"));
        const RunReport r = run_experiment(cfg, write_outputs);
        rows.push_back({kind, width, priv, r.parameter_count, r.mean, r.half_range, r.epsilon});
      }
    }
  }
  if (write_outputs) {
    fs::create_directories(base.output_dir);
    write_text(base.output_dir / "sweep.tsv", emit_sweep_tsv(rows));
  }
  return rows;
}

std::string emit_sweep_tsv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "kind\twidth\tmode\tparameters\taccuracy_mean\taccuracy_half_range\tepsilon\n";
  for (const auto& r : rows) {
    os << to_string(r.kind) << '\t' << r.width << '\t' << (r.private_mode ? "private" : "nonprivate")
       << '\t' << r.parameter_count << '\t' << format_double(r.mean) << '\t'
       << format_double(r.half_range) << '\t'
       << (r.epsilon ? format_double(*r.epsilon) : std::string("none")) << '\n';
  }
  return os.str();
}

}  // namespace dpkan
