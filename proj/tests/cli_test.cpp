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
#include <string>
#include <vector>

#include "dpkan/cli.hpp"
#include "dpkan/text_format.hpp"

namespace dpkan {
namespace {

namespace fs = std::filesystem;

const fs::path kTmp = fs::path(DPKAN_TEST_TMP) / "cli_test";

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "dpkan");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// Value of `key=` in a space-separated key=value line.
std::string field(const std::string& line, const std::string& key) {
  const auto pos = line.find(key + "=");
  if (pos == std::string::npos) return {};
  const auto start = pos + key.size() + 1;
  return line.substr(start, line.find_first_of(" \n", start) - start);
}

void write(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << text;
}

TEST(Cli, AccountantReportsEpsilon) {
  const Outcome o = run({"accountant", "--sigma", "1.0", "--batch-size", "64", "--dataset-size",
                         "60000", "--epochs", "15", "--delta", "1e-5"});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  const double eps = text::parse_double(field(o.out, "epsilon"), "epsilon");
  EXPECT_GE(eps, 0.78);
  EXPECT_LE(eps, 0.96);
}

TEST(Cli, AccountantCalibrates) {
  const Outcome o = run({"accountant", "--target-epsilon", "2.0", "--batch-size", "256",
                         "--dataset-size", "60000", "--epochs", "10"});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  EXPECT_LE(text::parse_double(field(o.out, "epsilon"), "epsilon"), 2.0);
  EXPECT_GT(text::parse_double(field(o.out, "sigma"), "sigma"), 0.0);
}

TEST(Cli, AccountantInfeasibleTargetFails) {
  const Outcome o = run({"accountant", "--target-epsilon", "1e-9", "--batch-size", "60000",
                         "--dataset-size", "60000", "--epochs", "100"});
  EXPECT_EQ(o.code, kExitFailure);
  EXPECT_NE(o.err.find("infeasible"), std::string::npos) << o.err;
}

TEST(Cli, UnknownSubcommandIsUsageError) {
  const Outcome o = run({"foo"});
  EXPECT_EQ(o.code, kExitUsage);
  EXPECT_NE(o.err.find("usage"), std::string::npos);
}

TEST(Cli, MissingSubcommandAndUnknownFlag) {
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"accountant", "--bogus", "1"}).code, kExitUsage);
  EXPECT_EQ(run({"accountant", "--batch-size", "64", "--dataset-size", "100", "--epochs", "1"}).code,
            kExitUsage);
}

TEST(Cli, ValidationFailureExitsOne) {
  EXPECT_EQ(run({"evaluate", "--model", "m", "--data", "d", "--metric", "f1"}).code, kExitFailure);
  EXPECT_EQ(run({"accountant", "--sigma", "-1", "--batch-size", "64", "--dataset-size", "100",
                 "--epochs", "1"})
                .code,
            kExitFailure);
  const Outcome missing = run({"train", "--config", (kTmp / "no_such.cfg").string()});
  EXPECT_EQ(missing.code, kExitFailure);
  EXPECT_NE(missing.err.find("config"), std::string::npos);
}

TEST(Cli, HelpExitsZero) {
  const Outcome o = run({"--help"});
  EXPECT_EQ(o.code, kExitOk);
  EXPECT_NE(o.out.find("accountant"), std::string::npos);
}

TEST(Cli, NoiselessSyntheticLinearFitIsExact) {
  const fs::path csv = kTmp / "exact" / "data.csv";
  fs::remove_all(kTmp / "exact");
  Outcome o = run({"gen-synthetic", "--n", "10", "--d", "2", "--noise", "0", "--seed", "3", "--out",
                   csv.string()});
  ASSERT_EQ(o.code, kExitOk) << o.err;

  const fs::path cfg = kTmp / "exact" / "linear.cfg";
  write(cfg,
        "version = 1\n"
        "task = regression\n"
        "model.kind = linear\n"
        "data.source = csv\n"
        "data.csv.path = data.csv\n"
        "data.test_fraction = 0.2\n"
        "train.private = false\n"
        "train.epochs = 3000\n"
        "train.batch_size = 8\n"
        "train.learning_rate = 0.01\n");
  const fs::path out_dir = kTmp / "exact" / "out";
  o = run({"train", "--config", cfg.string(), "--out", out_dir.string()});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  EXPECT_NEAR(text::parse_double(field(o.out, "r2_mean"), "r2"), 1.0, 1e-6) << o.out;
  EXPECT_EQ(field(o.out, "epsilon"), "none");
  EXPECT_EQ(field(o.out, "parameters"), "3");
  ASSERT_TRUE(fs::exists(out_dir / "report.txt"));

  // The saved model carries its input standardization, so raw CSV rows score.
  o = run({"evaluate", "--model", (out_dir / "model_trial0.dpkan").string(), "--data", csv.string()});
  ASSERT_EQ(o.code, kExitOk) << o.err;
  EXPECT_NEAR(text::parse_double(field(o.out, "r2"), "r2"), 1.0, 1e-6) << o.out;
}

TEST(Cli, EvaluateShapeMismatchFails) {
  const fs::path dir = kTmp / "shape";
  fs::remove_all(dir);
  ASSERT_EQ(run({"gen-synthetic", "--n", "20", "--d", "2", "--noise", "0.1", "--seed", "1", "--out",
                 (dir / "a.csv").string()})
                .code,
            kExitOk);
  ASSERT_EQ(run({"gen-synthetic", "--n", "20", "--d", "3", "--noise", "0.1", "--seed", "1", "--out",
                 (dir / "b.csv").string()})
                .code,
            kExitOk);
  write(dir / "c.cfg",
        "version = 1\nmodel.kind = linear\ndata.source = csv\ndata.csv.path = a.csv\n"
        "train.private = false\ntrain.batch_size = 4\n");
  ASSERT_EQ(run({"train", "--config", (dir / "c.cfg").string(), "--out", (dir / "out").string()}).code,
            kExitOk);
  const Outcome o = run({"evaluate", "--model", (dir / "out" / "model_trial0.dpkan").string(),
                         "--data", (dir / "b.csv").string()});
  EXPECT_EQ(o.code, kExitFailure);
  EXPECT_NE(o.err.find("shape"), std::string::npos) << o.err;
}

}  // namespace
}  // namespace dpkan
