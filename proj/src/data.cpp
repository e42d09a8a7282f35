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

#include "dpkan/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>

#include "dpkan/text_format.hpp"

namespace dpkan {

std::string to_string(Task task) {
  return task == Task::kRegression ? "regression" : "classification";
}

Dataset Dataset::subset(std::span<const Index> indices) const {
  Dataset out;
  out.task = task;
  out.num_classes = num_classes;
  out.feature_names = feature_names;
  out.scaling = scaling;
  out.features.resize(static_cast<Index>(indices.size()), features.cols());
  if (task == Task::kRegression) out.targets.resize(static_cast<Index>(indices.size()));
  else out.labels.resize(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const Index src = indices[r];
    if (src < 0 || src >= size()) throw ArgumentError("Dataset::subset: index out of range");
    out.features.row(static_cast<Index>(r)) = features.row(src);
    if (task == Task::kRegression) out.targets[static_cast<Index>(r)] = targets[src];
    else out.labels[r] = labels[static_cast<std::size_t>(src)];
  }
  return out;
}

Dataset Dataset::head(Index n) const {
  std::vector<Index> idx(static_cast<std::size_t>(std::min(n, size())));
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<Index>(i);
  return subset(idx);
}

Targets Dataset::targets_for(std::span<const Index> indices) const {
  if (task == Task::kRegression) {
    Matrix t(static_cast<Index>(indices.size()), 1);
    for (std::size_t r = 0; r < indices.size(); ++r) t(static_cast<Index>(r), 0) = targets[indices[r]];
    return t;
  }
  std::vector<int> l(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) l[r] = labels[static_cast<std::size_t>(indices[r])];
  return l;
}

Targets Dataset::all_targets() const {
  if (task == Task::kRegression) return Matrix(targets);
  return labels;
}

void Dataset::validate() const {
  if (task == Task::kRegression) {
    if (targets.size() != features.rows()) {
      throw ShapeError("Dataset: " + std::to_string(targets.size()) + " targets for " +
                       std::to_string(features.rows()) + " rows");
    }
    return;
  }
  if (static_cast<Index>(labels.size()) != features.rows()) {
    throw ShapeError("Dataset: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(features.rows()) + " rows");
  }
  for (int l : labels) {
    if (l < 0 || l >= num_classes) {
      throw ArgumentError("Dataset: label " + std::to_string(l) + " outside [0, " +
                          std::to_string(num_classes) + ")");
    }
  }
}

// --- CSV ---------------------------------------------------------------------

namespace {

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* first = t.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), out);
  return ec == std::errc() && ptr == t.data() + t.size() && std::isfinite(out);
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const std::string& target_column,
                 bool has_header) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open CSV file " + path.string());

  std::vector<std::string> names;
  std::string line;
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  bool first = true;
  std::size_t data_row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cells = split_commas(line);
    if (first && has_header) {
      for (auto& c : cells) names.push_back(trim(c));
      width = names.size();
      first = false;
      continue;
    }
    if (first) {
      width = cells.size();
      for (std::size_t c = 0; c < width; ++c) names.push_back("c" + std::to_string(c));
      first = false;
    }
    ++data_row;
    if (cells.size() != width) {
      throw RaggedRowError("CSV row " + std::to_string(data_row) + " has " +
                           std::to_string(cells.size()) + " cells, expected " +
                           std::to_string(width));
    }
    std::vector<double> values(width);
    for (std::size_t c = 0; c < width; ++c) {
      if (!parse_double(cells[c], values[c])) {
        throw NonNumericCellError(data_row, c + 1, trim(cells[c]));
      }
    }
    rows.push_back(std::move(values));
  }

  std::size_t target = names.size();
  for (std::size_t c = 0; c < names.size(); ++c) {
    if (names[c] == target_column) target = c;
  }
  if (target == names.size()) {
    std::string available;
    for (const auto& n : names) available += (available.empty() ? "" : ", ") + n;
    throw MissingColumnError("target column '" + target_column +
                             "' not found; available columns: " + available);
  }

  Dataset ds;
  ds.task = Task::kRegression;
  ds.features.resize(static_cast<Index>(rows.size()), static_cast<Index>(width - 1));
  ds.targets.resize(static_cast<Index>(rows.size()));
  for (std::size_t c = 0; c < width; ++c) {
    if (c != target) ds.feature_names.push_back(names[c]);
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    Index col = 0;
    for (std::size_t c = 0; c < width; ++c) {
      if (c == target) ds.targets[static_cast<Index>(r)] = rows[r][c];
      else ds.features(static_cast<Index>(r), col++) = rows[r][c];
    }
  }
  return ds;
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  if (data.task != Task::kRegression) throw ArgumentError("write_csv: regression datasets only");
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  for (Index c = 0; c < data.dims(); ++c) out << 'x' << c << ',';
  out << "y\n";
  out << std::setprecision(17);
  for (Index r = 0; r < data.size(); ++r) {
    for (Index c = 0; c < data.dims(); ++c) out << data.features(r, c) << ',';
    out << data.targets[r] << '\n';
  }
  if (!out) throw Error("failed writing " + path.string());
}

// --- MNIST IDX ---------------------------------------------------------------

namespace {

std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open IDX file " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<std::uint8_t>& b, std::size_t off,
                   const std::filesystem::path& path) {
  if (b.size() < off + 4) throw TruncationError("IDX header truncated in " + path.string());
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) |
         (std::uint32_t{b[off + 2]} << 8) | std::uint32_t{b[off + 3]};
}

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;  // 2051
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;  // 2049

}  // namespace

Dataset load_mnist_idx(const std::filesystem::path& images_path,
                       const std::filesystem::path& labels_path) {
  const auto img = read_all(images_path);
  const auto lab = read_all(labels_path);

  const std::uint32_t img_magic = be32(img, 0, images_path);
  if (img_magic != kIdxImagesMagic) {
    throw MagicNumberError("image file magic " + std::to_string(img_magic) + " != 2051");
  }
  const std::uint32_t lab_magic = be32(lab, 0, labels_path);
  if (lab_magic != kIdxLabelsMagic) {
    throw MagicNumberError("label file magic " + std::to_string(lab_magic) + " != 2049");
  }
  const std::uint64_t n = be32(img, 4, images_path);
  const std::uint64_t rows = be32(img, 8, images_path);
  const std::uint64_t cols = be32(img, 12, images_path);
  const std::uint64_t n_labels = be32(lab, 4, labels_path);
  if (n != n_labels) {
    throw CountMismatchError("image count " + std::to_string(n) + " != label count " +
                             std::to_string(n_labels));
  }
  const std::uint64_t pixels = rows * cols;
  if (pixels == 0 || n > (img.size() - 16) / pixels) {
    throw TruncationError("image payload truncated in " + images_path.string());
  }
  if (lab.size() - 8 < n) throw TruncationError("label payload truncated in " + labels_path.string());

  Dataset ds;
  ds.task = Task::kClassification;
  ds.num_classes = 10;
  ds.features.resize(static_cast<Index>(n), static_cast<Index>(pixels));
  ds.labels.resize(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    for (std::uint64_t p = 0; p < pixels; ++p) {
      const double unit = static_cast<double>(img[16 + i * pixels + p]) / 255.0;
      ds.features(static_cast<Index>(i), static_cast<Index>(p)) = mnist_standardize(unit);
    }
    const int label = lab[8 + i];
    if (label > 9) throw ParseError("label " + std::to_string(label) + " outside 0..9");
    ds.labels[i] = label;
  }
  return ds;
}

// --- Synthetic ---------------------------------------------------------------

Vector synthetic_weights(Index d) {
  Vector w(d);
  for (Index j = 0; j < d; ++j) {
    w[j] = (j % 2 == 0 ? 1.0 : -1.0) * (1.0 + static_cast<double>(j) / static_cast<double>(d));
  }
  return w;
}

Dataset gen_synthetic(Index n, Index d, double noise_std, std::uint64_t seed) {
  if (n < 1 || d < 1) throw ArgumentError("gen_synthetic: n and d must be positive");
  if (!(noise_std >= 0.0)) throw ArgumentError("gen_synthetic: noise_std must be nonnegative");
  RngState rng(seed);
  Generator& g = rng.stream(Stream::kData);
  Dataset ds;
  ds.task = Task::kRegression;
  ds.features.resize(n, d);
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < d; ++c) ds.features(r, c) = g.normal();
  const Vector w = synthetic_weights(d);
  ds.targets = ds.features * w;
  Generator& noise = rng.stream(Stream::kNoise);
  if (noise_std > 0.0) {
    for (Index r = 0; r < n; ++r) ds.targets[r] += noise_std * noise.normal();
  }
  for (Index c = 0; c < d; ++c) ds.feature_names.push_back("x" + std::to_string(c));
  return ds;
}

// --- Standardization and splitting ------------------------------------------

FeatureScaling compute_scaling(const Matrix& features) {
  if (features.rows() < 1) throw ArgumentError("standardize: training set is empty");
  const double n = static_cast<double>(features.rows());
  FeatureScaling s;
  s.mean = features.colwise().sum().transpose() / n;
  s.std.resize(features.cols());
  for (Index c = 0; c < features.cols(); ++c) {
    const double var = (features.col(c).array() - s.mean[c]).square().sum() / n;
    if (var > 0.0) {
      s.std[c] = std::sqrt(var);
    } else {
      s.mean[c] = 0.0;
      s.std[c] = 1.0;
    }
  }
  return s;
}

std::vector<Dataset> standardize(const Dataset& train, const std::vector<Dataset>& others) {
  const FeatureScaling s = compute_scaling(train.features);
  std::vector<Dataset> out;
  out.reserve(others.size() + 1);
  auto transform = [&](const Dataset& d) {
    Dataset t = d;
    t.features = s.apply(d.features);
    t.scaling = s;
    return t;
  };
  out.push_back(transform(train));
  for (const auto& d : others) out.push_back(transform(d));
  return out;
}

std::vector<Index> permutation(Index n, Generator& rng) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(i + 1)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  return idx;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& data, double test_fraction,
                                             std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ArgumentError("train_test_split: test_fraction must lie in (0, 1)");
  }
  const Index n = data.size();
  const auto n_test = static_cast<Index>(std::llround(static_cast<double>(n) * test_fraction));
  if (n_test < 1 || n_test >= n) {
    throw ArgumentError("train_test_split: split of " + std::to_string(n) +
                        " rows leaves one side empty");
  }
  RngState rng(seed);
  const auto perm = permutation(n, rng.stream(Stream::kSplit));
  const std::span<const Index> all(perm);
  return {data.subset(all.subspan(static_cast<std::size_t>(n_test))),
          data.subset(all.first(static_cast<std::size_t>(n_test)))};
}

Dataset to_classification(Dataset d) {
  d.task = Task::kClassification;
  d.labels.resize(static_cast<std::size_t>(d.targets.size()));
  int max_label = 0;
  for (Index i = 0; i < d.targets.size(); ++i) {
    const double v = d.targets[i];
    if (!(v >= 0.0) || v != std::floor(v) || v > 1e6) {
      throw ArgumentError("classification target in row " + std::to_string(i + 1) +
                          " is not a nonnegative integer: " + text::format_double(v));
    }
    d.labels[static_cast<std::size_t>(i)] = static_cast<int>(v);
    max_label = std::max(max_label, static_cast<int>(v));
  }
  d.num_classes = max_label + 1;
  d.targets.resize(0);
  return d;
}

}  // namespace dpkan
