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

// End-to-end acceptance suite. Prints one PASS/FAIL/SKIP line per criterion
// and exits nonzero if any criterion fails. Tolerances are fixed here.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dpkan/accountant.hpp"
#include "dpkan/basis.hpp"
#include "dpkan/experiment.hpp"
#include "dpkan/loss.hpp"
#include "dpkan/model.hpp"
#include "dpkan/numerics.hpp"
#include "dpkan/optimizer.hpp"
#include "gradient_check.hpp"

namespace {

using namespace dpkan;
namespace fs = std::filesystem;

const fs::path kSource = DPKAN_SOURCE_DIR;
const fs::path kMnist = DPKAN_MNIST_DIR;
const fs::path kTmp = fs::path(DPKAN_TEST_TMP) / "acceptance";

enum class Status { kPass, kFail, kSkip };

struct Outcome {
  Status status = Status::kFail;
  std::string detail;
};

std::string fmt(double v, int digits = 6) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome judge(bool ok, std::string detail) {
  return {ok ? Status::kPass : Status::kFail, std::move(detail)};
}

// 1 --------------------------------------------------------------------------

Model random_model(Generator& rng, bool& classification) {
  const auto pick = [&](int lo, int hi) {
    return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
  };
  const int depth = pick(1, 2);
  std::vector<Index> widths;
  for (int i = 0; i <= depth; ++i) widths.push_back(pick(1, 4));
  classification = rng.uniform() < 0.5;
  if (classification) widths.back() = pick(2, 4);
  Model m;
  switch (pick(0, 2)) {
    case 0: {
      // Degree 1 splines have kinks a hidden input can cross under a step of h.
      const int degree = depth == 1 ? pick(1, 3) : pick(2, 3);
      const double lo = -1.0 - 2.0 * rng.uniform();
      m = make_kan(widths, BSplineGrid<double>(pick(2, 6), degree, lo, -lo));
      break;
    }
    case 1:
      m = make_fasterkan(widths, RswafGrid<double>(-1.2, 0.2, pick(1, 4), 0.5 + rng.uniform()),
                         rng.uniform() < 0.5);
      break;
    default:
      // Linear layers without the ReLU kink, which central differences cannot see.
      m = make_mlp(widths, Activation::kNone);
      break;
  }
  m.initialize(rng);
  return m;
}

Outcome gradient_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  Generator rng(20260101);
  double worst = 0.0;
  std::string worst_desc;
  int kinds[3] = {0, 0, 0};
  for (int trial = 0; trial < 50; ++trial) {
    bool classification = false;
    Model m = random_model(rng, classification);
    const auto& first = m.layers().front();
    ++kinds[first.index()];
    const Index batch = 3;
    Matrix x(batch, m.n_in());
    for (Index i = 0; i < x.size(); ++i) x.data()[i] = 1.8 * rng.uniform() - 0.9;
    Targets y;
    if (classification) {
      std::vector<int> labels;
      for (Index i = 0; i < batch; ++i) labels.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(m.n_out()))));
      y = labels;
    } else {
      Matrix t(batch, m.n_out());
      for (Index i = 0; i < t.size(); ++i) t.data()[i] = rng.normal();
      y = t;
    }
    const Matrix analytic = per_sample_gradient_matrix(m, x, y);
    const Matrix numeric = testing::finite_difference_gradients(m, x, y, testing::kFiniteDifferenceStep);
    const auto cmp = testing::compare_gradients(analytic, numeric, 1e-8);
    if (cmp.max_relative_error >= worst) {
      worst = cmp.max_relative_error;
      worst_desc = "model " + std::to_string(trial) + ": " + testing::describe(cmp);
    }
  }
  const double secs = seconds_since(t0);
  return judge(worst < 1e-5 && secs < 30.0,
               "50 models (first layers kan/fasterkan/linear: " + std::to_string(kinds[1]) + "/" +
                   std::to_string(kinds[2]) + "/" + std::to_string(kinds[0]) + "), worst " +
                   worst_desc + ", " + fmt(secs, 3) + " s");
}

// 2 --------------------------------------------------------------------------

double five_point(const std::function<double(double)>& f, double x, double h) {
  return (8.0 * (f(x + h) - f(x - h)) - (f(x + 2 * h) - f(x - 2 * h))) / (12.0 * h);
}

double rel_err(double a, double n) {
  return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-8});
}

Outcome basis_properties() {
  const auto t0 = std::chrono::steady_clock::now();
  Generator rng(7);
  const double h = 1e-4;
  double worst_pou = 0.0;
  double worst_deriv = 0.0;
  std::string where;
  for (int g = 2; g <= 10; ++g) {
    for (int k = 1; k <= 3; ++k) {
      const BSplineGrid<double> grid(g, k, -1.0, 1.0);
      const auto& t = grid.knots();
      for (int s = 0; s < 1000; ++s) {
        const double x = -1.0 + 2.0 * rng.uniform();
        const auto b = bspline_basis(x, grid);
        worst_pou = std::max(worst_pou, std::abs(b.sum() - 1.0));
        // The pieces are polynomials of degree <= 3, where the stencil is exact;
        // skip points whose stencil straddles a knot.
        const bool near_knot = std::any_of(t.begin(), t.end(),
                                           [&](double kn) { return std::abs(x - kn) <= 2.5 * h; });
        if (near_knot || s % 10 != 0) continue;
        const auto d = bspline_basis_derivative(x, grid);
        for (Index i = 0; i < d.size(); ++i) {
          const double n = five_point([&](double z) { return bspline_basis(z, grid)[i]; }, x, h);
          const double e = rel_err(d[i], n);
          if (e > worst_deriv) {
            worst_deriv = e;
            where = "B-spline G=" + std::to_string(g) + " k=" + std::to_string(k);
          }
        }
      }
    }
  }
  for (int s = 0; s < 1000; ++s) {
    const double x = -8.0 + 16.0 * rng.uniform();
    const double e = rel_err(silu_derivative(x), five_point([](double z) { return silu(z); }, x, h));
    if (e > worst_deriv) {
      worst_deriv = e;
      where = "SiLU";
    }
  }
  const RswafGrid<double> rg(-1.2, 0.2, 4, 0.5);
  for (int s = 0; s < 1000; ++s) {
    const double x = -4.0 + 8.0 * rng.uniform();
    const auto d = rswaf_derivative(x, rg);
    for (Index i = 0; i < d.size(); ++i) {
      const double e =
          rel_err(d[i], five_point([&](double z) { return rswaf_basis(z, rg)[i]; }, x, h));
      if (e > worst_deriv) {
        worst_deriv = e;
        where = "RSWAF";
      }
    }
  }
  const double secs = seconds_since(t0);
  return judge(worst_pou < 1e-9 && worst_deriv < 1e-6 && secs < 10.0,
               "max |sum B - 1| " + fmt(worst_pou, 3) + ", max derivative rel err " +
                   fmt(worst_deriv, 3) + " (" + where + "), " + fmt(secs, 3) + " s");
}

// 3 --------------------------------------------------------------------------

Outcome clipping_invariant() {
  ExperimentConfig cfg = load_config(kSource / "configs" / "synthetic_kan_dp.cfg");
  cfg.train.check_clipping = true;
  const TrialResult r = run_trial(cfg, cfg.seed);
  const std::int64_t per_step_samples = r.log.examples_processed;
  return judge(r.log.clip_violations == 0 && r.log.clipped_examples > 0,
               std::to_string(r.log.clip_violations) + " violations over " +
                   std::to_string(r.log.total_steps) + " steps / " +
                   std::to_string(per_step_samples) + " per-sample gradients (" +
                   std::to_string(r.log.clipped_examples) + " were scaled down)");
}

// 4 --------------------------------------------------------------------------

Outcome noise_calibration() {
  const auto t0 = std::chrono::steady_clock::now();
  const double sigma = 1.0, c = 0.5;
  const Index b = 10, dim = 4;
  const double target = sigma * c / static_cast<double>(b);
  Generator data_rng(3);
  std::vector<ClippedGradient> clipped;
  for (Index i = 0; i < b; ++i) {
    Vector g(dim);
    for (Index j = 0; j < dim; ++j) g[j] = data_rng.normal();
    clipped.push_back(clip_gradient({g, i}, c));
  }
  Generator unused(0);
  const Vector mean = noisy_aggregate(clipped, 0.0, c, b, dim, unused);
  Generator rng(11);
  const int draws = 100000;
  Vector sum = Vector::Zero(dim), sum_sq = Vector::Zero(dim);
  for (int t = 0; t < draws; ++t) {
    const Vector d = noisy_aggregate(clipped, sigma, c, b, dim, rng) - mean;
    sum += d;
    sum_sq += d.cwiseProduct(d);
  }
  double worst = 0.0;
  for (Index j = 0; j < dim; ++j) {
    const double m = sum[j] / draws;
    const double sd = std::sqrt(sum_sq[j] / draws - m * m);
    worst = std::max(worst, std::abs(sd / target - 1.0));
  }
  const double secs = seconds_since(t0);
  return judge(worst <= 0.03 && secs < 20.0,
               "max |std / (sigma C / B) - 1| = " + fmt(worst, 3) + " over " +
                   std::to_string(dim) + " coordinates, " + fmt(secs, 3) + " s");
}

// 5 --------------------------------------------------------------------------

Outcome accountant_anchor() {
  const auto t0 = std::chrono::steady_clock::now();
  const PrivacySpend s = compute_epsilon(1.0, 64, 60000, 15, 1e-5);
  const double secs = seconds_since(t0);
  return judge(s.epsilon >= 0.78 && s.epsilon <= 0.96 && secs < 5.0,
               "epsilon " + fmt(s.epsilon, 8) + " at order " + fmt(s.optimal_order, 4) +
                   " (window [0.78, 0.96]), " + fmt(secs, 3) + " s");
}

// 6 --------------------------------------------------------------------------

Outcome accountant_round_trip() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::string detail;
  for (double target : {0.1, 0.5, 1.0, 3.0, 8.0}) {
    const double sigma = calibrate_sigma(target, 1e-5, 256, 60000, 15);
    const double eps = compute_epsilon(sigma, 256, 60000, 15, 1e-5).epsilon;
    const double rel = std::abs(eps - target) / target;
    worst = std::max(worst, rel);
    detail += fmt(target, 3) + "->sigma " + fmt(sigma, 5) + " ";
  }
  const double secs = seconds_since(t0);
  return judge(worst < 1e-3 && secs < 30.0,
               detail + "max rel err " + fmt(worst, 3) + ", " + fmt(secs, 3) + " s");
}

// 7 --------------------------------------------------------------------------

Outcome synthetic_end_to_end(std::vector<std::pair<std::string, Outcome>>& sub) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto run = [](const std::string& name) {
    ExperimentConfig cfg = load_config(kSource / "configs" / (name + ".cfg"));
    cfg.output_dir = kTmp / name;
    return run_experiment(cfg);
  };
  const RunReport lin = run("synthetic_linear");
  const RunReport kan = run("synthetic_kan");
  const RunReport lin_dp = run("synthetic_linear_dp");
  const RunReport kan_dp = run("synthetic_kan_dp");
  const double secs = seconds_since(t0);

  const auto r2 = [](const RunReport& r) { return fmt(r.mean, 6) + " +- " + fmt(r.half_range, 2); };
  sub.emplace_back("7a", judge(lin.mean >= 0.99 && kan.mean >= 0.99,
                               "non-private R2 linear " + r2(lin) + ", kan " + r2(kan) +
                                   " (threshold 0.99)"));
  sub.emplace_back("7b", judge(lin_dp.mean >= 0.985 && kan_dp.mean >= 0.985,
                               "private R2 linear " + r2(lin_dp) + ", kan " + r2(kan_dp) +
                                   " at epsilon " + fmt(lin_dp.epsilon.value_or(NAN), 4) +
                                   " (threshold 0.985)"));
  const double drop_lin = quality_drop(lin.mean, lin_dp.mean);
  const double drop_kan = quality_drop(kan.mean, kan_dp.mean);
  sub.emplace_back("7c", judge(drop_lin < 1.0 && drop_kan < 1.0,
                               "privacy drop linear " + fmt(drop_lin, 3) + "%, kan " +
                                   fmt(drop_kan, 3) + "% (threshold 1%)"));
  const bool all = std::all_of(sub.begin(), sub.end(),
                               [](const auto& s) { return s.second.status == Status::kPass; });
  return judge(all && secs < 300.0, "4 configs x 3 trials, " + fmt(secs, 4) + " s (budget 300 s)");
}

// 8 --------------------------------------------------------------------------

Outcome mnist_subset(std::vector<std::pair<std::string, Outcome>>& sub) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg = load_config(kSource / "configs" / "mnist_fasterkan.cfg");
  cfg.data.mnist_train_images = kMnist / "train-images-idx3-ubyte";
  cfg.data.mnist_train_labels = kMnist / "train-labels-idx1-ubyte";
  cfg.data.mnist_test_images = kMnist / "test-images-idx3-ubyte";
  cfg.data.mnist_test_labels = kMnist / "test-labels-idx1-ubyte";
  cfg.data.train_limit = 10000;
  cfg.train.epochs = 5;
  cfg.trials = 1;
  cfg.output_dir = kTmp / "mnist_fasterkan_subset";
  if (!fs::exists(cfg.data.mnist_train_images)) {
    sub.emplace_back("8a", Outcome{Status::kFail, "missing " + cfg.data.mnist_train_images.string()});
    return {Status::kFail, "MNIST files not found"};
  }
  const Dataset train_rows = load_mnist_idx(cfg.data.mnist_train_images, cfg.data.mnist_train_labels);
  const RunReport r = run_experiment(cfg);
  const double secs = seconds_since(t0);
  const Index used = std::min<Index>(train_rows.size(), 10000);
  sub.emplace_back("8a", judge(r.mean >= 0.88 && secs < 600.0,
                               "FasterKAN [784, 32, 10], " + std::to_string(used) +
                                   " training examples, 5 epochs: test accuracy " + fmt(r.mean, 5) +
                                   " (threshold 0.88), " + fmt(secs, 4) + " s"));
  const bool full = train_rows.size() >= 60000;
  sub.emplace_back("8b", Outcome{Status::kSkip,
                                 full ? "optional full 60k / 15-epoch runs not requested"
                                      : "full 60k MNIST training set not available (" +
                                            std::to_string(train_rows.size()) + " rows)"});
  return sub.front().second;
}

// 9 --------------------------------------------------------------------------

Outcome parameter_counts() {
  const std::vector<std::pair<Index, Index>> mlp = {
      {4096, 3256330}, {2048, 1628170}, {1024, 814090}, {512, 407050}, {256, 203530},
      {128, 101770},   {64, 50890},     {32, 25450},    {16, 12730}};
  const std::vector<std::pair<Index, Index>> fk = {
      {2048, 3257888}, {1024, 1629728}, {512, 815648}, {256, 408608},
      {128, 205088},   {64, 103328},    {32, 52448},   {16, 27008}};
  bool ok = true;
  int mlp_exact = 0;
  double worst_fk = 0.0;
  for (const auto& [w, expected] : mlp) {
    const bool exact = count_parameters(make_mlp({784, w, 10})) == expected;
    mlp_exact += exact;
    ok = ok && exact;
  }
  const RswafGrid<double> grid(-1.2, 0.2, 2, 0.5);
  for (const auto& [w, expected] : fk) {
    const Index got = count_parameters(make_fasterkan({784, w, 10}, grid));
    const double rel = std::abs(static_cast<double>(got - expected)) / static_cast<double>(expected);
    worst_fk = std::max(worst_fk, rel);
  }
  ok = ok && worst_fk <= 0.01;
  return judge(ok, "MLP exact " + std::to_string(mlp_exact) + "/" + std::to_string(mlp.size()) +
                       ", FasterKAN max rel diff " + fmt(100 * worst_fk, 3) + "% (limit 1%)");
}

// 10 -------------------------------------------------------------------------

Outcome determinism() {
  std::vector<ExperimentConfig> cfgs;
  ExperimentConfig kan = load_config(kSource / "configs" / "synthetic_kan_dp.cfg");
  kan.data.synthetic_n = 4000;
  kan.train.epochs = 3;
  cfgs.push_back(kan);
  ExperimentConfig lin = load_config(kSource / "configs" / "synthetic_linear.cfg");
  lin.data.synthetic_n = 4000;
  lin.train.epochs = 3;
  cfgs.push_back(lin);
  ExperimentConfig fk = load_config(kSource / "configs" / "mnist_fasterkan_dp.cfg");
  fk.data.mnist_train_images = kMnist / "train-images-idx3-ubyte";
  fk.data.mnist_train_labels = kMnist / "train-labels-idx1-ubyte";
  fk.data.mnist_test_images = kMnist / "test-images-idx3-ubyte";
  fk.data.mnist_test_labels = kMnist / "test-labels-idx1-ubyte";
  fk.data.train_limit = 1000;
  fk.data.test_limit = 500;
  fk.train.epochs = 1;
  fk.trials = 2;
  cfgs.push_back(fk);
  int identical = 0;
  for (auto& cfg : cfgs) {
    cfg.output_dir = kTmp / "determinism";
    const std::string a = emit_report(run_experiment(cfg), false);
    const std::string b = emit_report(run_experiment(cfg), false);
    identical += a == b;
  }
  return judge(identical == static_cast<int>(cfgs.size()),
               std::to_string(identical) + "/" + std::to_string(cfgs.size()) +
                   " configs (2 private) gave identical reports on repeat");
}

const char* label(Status s) {
  switch (s) {
    case Status::kPass:
      return "PASS";
    case Status::kSkip:
      return "SKIP";
    default:
      return "FAIL";
  }
}

}  // namespace

int main() {
  fs::create_directories(kTmp);
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome(std::vector<std::pair<std::string, Outcome>>&)> run;
  };
  const auto plain = [](Outcome (*f)()) {
    return [f](std::vector<std::pair<std::string, Outcome>>&) { return f(); };
  };
  const std::vector<Criterion> criteria = {
      {1, "gradient correctness", plain(gradient_correctness)},
      {2, "basis properties", plain(basis_properties)},
      {3, "clipping invariant", plain(clipping_invariant)},
      {4, "noise calibration", plain(noise_calibration)},
      {5, "accountant anchor", plain(accountant_anchor)},
      {6, "accountant round trip", plain(accountant_round_trip)},
      {7, "synthetic regression end to end", synthetic_end_to_end},
      {8, "MNIST desk scale", mnist_subset},
      {9, "parameter counts", plain(parameter_counts)},
      {10, "determinism", plain(determinism)},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    std::vector<std::pair<std::string, Outcome>> sub;
    Outcome o;
    try {
      o = c.run(sub);
    } catch (const std::exception& e) {
      o = {Status::kFail, std::string("exception: ") + e.what()};
    }
    for (const auto& [id, s] : sub) {
      std::cout << "  " << label(s.status) << ' ' << id << ": " << s.detail << '\n';
    }
    failures += o.status == Status::kFail;
    std::cout << label(o.status) << " criterion " << c.id << " (" << c.name << "): " << o.detail
              << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << '\n';
  return failures == 0 ? 0 : 1;
}
