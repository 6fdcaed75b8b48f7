// Copyright 2026 The Climb Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "climb/io.hpp"

#include <filesystem>
#include <string>

#include "climb/scaling_law.hpp"
#include "doctest.h"
#include "test_support.hpp"

namespace climb {
namespace {

using testing::expect_error;

std::string error_text(ErrorCode code, auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    CHECK(e.code() == code);
    return e.what();
  }
  FAIL("expected ", error_code_name(code));
  return {};
}

TEST_CASE("experiment log CSV round trip is lossless") {
  const auto world = sample_world(3, 6, {}, 0.01);
  const auto log = simulate_experiments(world);
  const auto text = records_to_csv(log);
  const auto back = parse_records(text);
  CHECK(back.languages == log.languages);
  REQUIRE(back.records.size() == log.records.size());
  for (std::size_t n = 0; n < log.records.size(); ++n) {
    const auto& a = log.records[n];
    const auto& b = back.records[n];
    CHECK(a.run_id() == b.run_id());
    CHECK(a.token_budget() == b.token_budget());
    CHECK(a.step_fraction() == b.step_fraction());
    CHECK(a.language() == b.language());
    CHECK(a.val_loss() == b.val_loss());
    for (std::size_t i = 0; i < 3; ++i) CHECK(a.mixture()[i] == b.mixture()[i]);
  }
  CHECK(records_to_csv(back) == text);
}

TEST_CASE("CSV parsing accepts common variants") {
  const std::string text =
      "\xEF\xBB\xBFrun_id,token_budget,step_fraction,language,proportion,val_loss\r\n"
      "a,5e10,1,en,0.5,2.5\r\n"
      "\r\n"
      "a,50000000000,1,zh,0.5,2.7\r\n";
  const auto log = parse_records(text);
  CHECK(log.languages.codes() == std::vector<std::string>{"en", "zh"});
  REQUIRE(log.records.size() == 2);
  CHECK(log.records[0].token_budget() == 50'000'000'000ULL);
  CHECK(log.records[1].mixture() == testing::mix({0.5, 0.5}));
}

TEST_CASE("header-only CSV gives an empty log") {
  const auto log = parse_records(std::string(kCsvHeader) + "\n");
  CHECK(log.records.empty());
  CHECK(log.languages.size() == 0);
}

TEST_CASE("CSV errors name the line or the run") {
  const std::string header = std::string(kCsvHeader) + "\n";
  auto msg = error_text(ErrorCode::kInvariantViolation, [&] {
    (void)parse_records(header + "mix7,1000,1,en,0.6,2.5\nmix7,1000,1,zh,0.6,2.6\n");
  });
  CHECK(msg.find("mix7") != std::string::npos);

  msg = error_text(ErrorCode::kInvariantViolation, [&] {
    (void)parse_records(header + "r,1000,1,en,0.5,2.5\nr,1000,1,en,0.5,2.6\n");
  });
  CHECK(msg.find("twice") != std::string::npos);

  msg = error_text(ErrorCode::kParseError,
                   [&] { (void)parse_records(header + "r,1000,1,en,1,2.5\nr,1000,1.5,zh,1,2.5\n"); });
  CHECK(msg.find("line 3") != std::string::npos);

  msg = error_text(ErrorCode::kParseError, [&] { (void)parse_records(header + "r,1000,1,en,1\n"); });
  CHECK(msg.find("line 2") != std::string::npos);

  error_text(ErrorCode::kParseError,
             [&] { (void)parse_records(header + "r,12.5,1,en,1,2.5\n"); });
  error_text(ErrorCode::kParseError, [&] { (void)parse_records(header + "r,100,1,en,1,-2\n"); });
  error_text(ErrorCode::kParseError, [&] { (void)parse_records(header + "r,100,1,en,1,nan\n"); });
  msg = error_text(ErrorCode::kParseError,
                   [&] { (void)parse_records("run,budget\nr,100,1,en,1,2\n"); });
  CHECK(msg.find("line 1") != std::string::npos);
  error_text(ErrorCode::kParseError, [&] { (void)parse_records(""); });
}

TEST_CASE("files are written atomically and read back") {
  const auto dir = std::filesystem::temp_directory_path() / "climb_io_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "log.csv";
  const auto log = simulate_experiments(sample_world(2, 3));
  write_records(path, log);
  CHECK(read_text(path) == records_to_csv(log));
  CHECK(read_records(path).records.size() == log.records.size());
  error_text(ErrorCode::kIoError, [&] { (void)read_text(dir / "missing.csv"); });
  std::filesystem::remove_all(dir);
}

TEST_CASE("model JSON round trip") {
  const auto model = testing::world3();
  const auto doc = model_to_json(model, Json{{"source", "test"}});
  CHECK(doc["index_convention"] == std::string(kIndexConvention));
  CHECK(doc["transfer"]["b"][1][0].get<double>() == 0.3);
  CHECK(doc["eta"]["zh"].get<double>() == 5.0);
  const auto back = model_from_json(parse_json(dump_json(doc)));
  CHECK(back.languages() == model.languages());
  CHECK(back.mono() == model.mono());
  CHECK(back.transfer().b() == model.transfer().b());
  CHECK(back.transfer().k() == model.transfer().k());
  CHECK(back.transfer().eta() == model.transfer().eta());
  CHECK(dump_json(model_to_json(back, Json{{"source", "test"}})) == dump_json(doc));

  Json broken = doc;
  broken.erase("mono");
  error_text(ErrorCode::kParseError, [&] { (void)model_from_json(broken); });
  broken = doc;
  broken["transfer"]["b"][0][0] = 0.5;
  CHECK_THROWS_AS((void)model_from_json(broken), Error);
}

TEST_CASE("world JSON round trip") {
  auto world = sample_world(3, 77, {}, 0.02);
  world.natural_counts = std::vector<double>{5, 3, 2};
  const auto back = world_from_json(parse_json(dump_json(world_to_json(world))));
  CHECK(back.seed == 77);
  CHECK(back.noise_sigma == 0.02);
  CHECK(back.natural_counts == world.natural_counts);
  CHECK(back.ground_truth.mono() == world.ground_truth.mono());
  CHECK(back.ground_truth.transfer().k() == world.ground_truth.transfer().k());

  const auto plain = world_from_json(world_to_json(sample_world(2, 1)));
  CHECK_FALSE(plain.natural_counts.has_value());
}

TEST_CASE("doubles keep every bit") {
  const double v = 0.1 + 0.2;
  CHECK(std::stod(format_double(v)) == v);
  CHECK(parse_json(dump_json(Json{{"v", v}}))["v"].get<double>() == v);
}

TEST_CASE("command-line value parsers") {
  CHECK(parse_budget("5e10") == 5e10);
  CHECK(parse_budget("50B") == 5e10);
  CHECK(parse_budget("1.5T") == 1.5e12);
  CHECK(parse_budget("200M") == 2e8);
  CHECK(parse_budget("3K") == 3e3);
  expect_error(ErrorCode::kInvalidArgument, [] { (void)parse_budget("-1B"); });
  expect_error(ErrorCode::kInvalidArgument, [] { (void)parse_budget("lots"); });

  const LanguageSet langs({"en", "zh", "ar"});
  CHECK(parse_weights("en=1,zh=0.5", langs) == std::vector<double>{1.0, 0.5, 0.0});
  expect_error(ErrorCode::kInvalidArgument, [&] { (void)parse_weights("fr=1", langs); });
  expect_error(ErrorCode::kInvalidArgument, [&] { (void)parse_weights("en=1,en=2", langs); });
  expect_error(ErrorCode::kNegativeEntry, [&] { (void)parse_weights("en=-1", langs); });
  expect_error(ErrorCode::kInvalidArgument, [&] { (void)parse_weights("en", langs); });

  CHECK(parse_mixture("en=0.6, ar=0.4", langs) == testing::mix({0.6, 0.0, 0.4}));
  expect_error(ErrorCode::kNotNormalized, [&] { (void)parse_mixture("en=0.6,zh=0.6", langs); });
}

TEST_CASE("configuration overrides") {
  FitConfig fit;
  OptimizerConfig opt;
  ExperimentDesign design;
  apply_config(parse_json(R"({"fit": {"delta": 0.002, "eta_bounds": [0.01, 20]},
                              "optimizer": {"rho": 10, "seed": 7},
                              "design": {"proportions": [0.3]}})"),
               fit, opt, design);
  CHECK(fit.delta == 0.002);
  CHECK(fit.eta_min == 0.01);
  CHECK(fit.eta_max == 20.0);
  CHECK(opt.rho == 10.0);
  CHECK(opt.seed == 7);
  CHECK(design.proportions == std::vector<double>{0.3});
  CHECK(fit.max_iterations == 500);

  auto fresh = [] {
    FitConfig f;
    OptimizerConfig o;
    ExperimentDesign d;
    return std::tuple{f, o, d};
  };
  auto [f1, o1, d1] = fresh();
  expect_error(ErrorCode::kInvalidArgument,
               [&] { apply_config(parse_json(R"({"fit": {"e_grid": [0]}})"), f1, o1, d1); });
  expect_error(ErrorCode::kInvalidArgument,
               [&] { apply_config(parse_json(R"({"solver": {}})"), f1, o1, d1); });
  expect_error(ErrorCode::kInvalidArgument,
               [&] { apply_config(parse_json(R"({"fit": {"delta": "big"}})"), f1, o1, d1); });
  expect_error(ErrorCode::kInvalidArgument,
               [&] { apply_config(parse_json(R"({"optimizer": {"rho": -1}})"), f1, o1, d1); });

  auto [f2, o2, d2] = fresh();
  const auto doc = config_to_json(f2, o2, d2);
  auto [f3, o3, d3] = fresh();
  apply_config(doc, f3, o3, d3);
  CHECK(config_to_json(f3, o3, d3) == doc);
}

TEST_CASE("manifests") {
  CHECK(manifest_path("out/model.json").string() == "out/model.json.manifest.json");
  const auto ts = utc_timestamp();
  CHECK(ts.size() == 20);
  CHECK(ts.back() == 'Z');
  RunManifest m{"fit", {"log.csv"}, {"model.json"}, Json::object(), std::string(kToolVersion), ts};
  const auto doc = manifest_to_json(m);
  CHECK(doc["command"] == "fit");
  CHECK(doc["tool_version"] == "0.1.0");
  error_text(ErrorCode::kParseError, [] { (void)parse_json("{"); });
}

TEST_CASE("plot CSV") {
  const std::vector<PlotPoint> points{{"loss_vs_budget", "en", 1e9, 1e9, 2.5}};
  CHECK(plot_csv(points) == "curve,language,token_budget,x,y\nloss_vs_budget,en,1000000000,1000000000,2.5\n");
}

}  // namespace
}  // namespace climb
