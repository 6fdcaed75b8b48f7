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

#include "climb/allocator.hpp"

#include <cmath>
#include <vector>

#include "climb/scaling_law.hpp"
#include "climb/synthetic.hpp"
#include "doctest.h"
#include "test_support.hpp"

namespace climb {
namespace {

using testing::expect_error;
using testing::mix;
using testing::rel_err;

ClimbModel no_transfer(std::vector<MonoScalingParams> mono) {
  std::vector<std::string> codes;
  for (std::size_t i = 0; i < mono.size(); ++i) codes.push_back(default_languages(mono.size()).code(i));
  const std::size_t m = mono.size();
  return ClimbModel(LanguageSet(codes), std::move(mono), TransferParams::zero(m));
}

double loss_sum(const ClimbModel& model, std::span<const double> weights,
                std::span<const double> x, double D) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (weights[i] == 0.0) continue;
    const auto& p = model.mono(i);
    total += weights[i] * p.B() / std::pow(D * x[i], p.beta());
  }
  return total;
}

TEST_CASE("optimal direction reference values") {
  const auto model = no_transfer({MonoScalingParams(1, 0.5, 2), MonoScalingParams(1, 1.0, 2)});
  const ImportanceWeights w({1, 1});
  const auto p = optimal_direction(model, w, 1e9);
  CHECK(rel_err(p[0], 0.9920944921048862715) <= 1e-14);
  CHECK(rel_err(p[1], 0.0079055078951137285001) <= 1e-12);
  const std::vector<double> ones{1, 1};
  const auto numeric = testing::numeric_direction(model, ones, 1e9);
  CHECK(std::abs(numeric[0] - p[0]) <= 1e-6);
  CHECK(std::abs(numeric[1] - p[1]) <= 1e-6);

  // The normalized per-language closed form misses the minimizer when the
  // exponents differ.
  const auto closed = closed_form_direction(model, w, 1e9);
  CHECK(rel_err(closed[0], 0.95220136825152938572) <= 1e-14);
  CHECK(rel_err(closed[1], 0.047798631748470614279) <= 1e-13);
  CHECK(loss_sum(model, ones, closed, 1e9) > loss_sum(model, ones, p, 1e9));
}

TEST_CASE("closed form and optimal direction agree for equal exponents") {
  const auto model = no_transfer({MonoScalingParams(1, 0.4, 2), MonoScalingParams(3, 0.4, 1.5),
                                  MonoScalingParams(0.7, 0.4, 2.2)});
  const ImportanceWeights w({1, 2, 3});
  const auto a = optimal_direction(model, w, 1e10);
  const auto b = closed_form_direction(model, w, 1e10);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-14);
}

TEST_CASE("optimal direction symmetry and zero weights") {
  const auto same = no_transfer({MonoScalingParams(2, 0.3, 1.5), MonoScalingParams(2, 0.3, 1.5),
                                 MonoScalingParams(2, 0.3, 1.5), MonoScalingParams(2, 0.3, 1.5)});
  for (double v : optimal_direction(same, ImportanceWeights::uniform(4), 1e10)) {
    CHECK(std::abs(v - 0.25) <= 1e-15);
  }
  const auto pair = testing::symmetric_pair(0.3);
  const auto p = optimal_direction(pair, ImportanceWeights({1, 0}), 1e9);
  CHECK(p[0] == 1.0);
  CHECK(p[1] == 0.0);
}

TEST_CASE("the direction depends on weight ratios only") {
  const auto model = no_transfer({MonoScalingParams(1, 0.4, 2), MonoScalingParams(3, 0.4, 1.5),
                                  MonoScalingParams(0.7, 0.4, 2.2)});
  const auto a = optimal_direction(model, ImportanceWeights({1, 2, 3}), 1e10);
  const auto b = optimal_direction(model, ImportanceWeights({7, 14, 21}), 1e10);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-15);
  const auto c = optimal_direction(model, ImportanceWeights({1, 2, 3}), 1e12);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(a[i] - c[i]) <= 1e-14);
}

TEST_CASE("direction balances marginal benefits and is a minimum") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto model = sample_world(3, seed).ground_truth;
    const std::vector<double> w{1.0, 2.0, 0.5};
    const double D = 5e10;
    const auto p = optimal_direction(model, ImportanceWeights(w), D);
    std::vector<double> marginal;
    for (std::size_t i = 0; i < 3; ++i) {
      const auto& q = model.mono(i);
      marginal.push_back(w[i] * q.B() * q.beta() /
                         (std::pow(D, q.beta()) * std::pow(p[i], q.beta() + 1)));
    }
    CHECK(rel_err(marginal[1], marginal[0]) <= 1e-6);
    CHECK(rel_err(marginal[2], marginal[0]) <= 1e-6);

    const double best = loss_sum(model, w, p, D);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        if (i == j) continue;
        for (double sign : {-1.0, 1.0}) {
          auto q = p;
          const double step = sign * 0.01 * std::min(p[i], p[j]);
          q[i] += step;
          q[j] -= step;
          CHECK(loss_sum(model, w, q, D) > best);
        }
      }
    }
  }
}

TEST_CASE("magnitude objective") {
  const auto model = testing::symmetric_pair(0.0);
  const std::vector<double> p{0.3, 0.7};
  const std::vector<double> r{0.5, 0.5};
  // Without transfer F = -1 + rho * |r - p|^2.
  CHECK(magnitude_objective(model, p, r, 1e9, 2.0) == doctest::Approx(-1.0 + 2.0 * 0.08).epsilon(1e-14));
}

TEST_CASE("zero transfer allocation equals the direction") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto model = sample_world(3, seed).ground_truth.without_transfer();
    const ImportanceWeights w({1.0, 1.5, 0.5});
    const auto result = optimize_allocation(model, w, 5e10, OptimizerConfig{});
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(std::abs(result.allocation[i] - result.direction[i]) <= 1e-6);
    }
  }
}

TEST_CASE("symmetric positive transfer splits evenly") {
  const auto result =
      optimize_allocation(testing::symmetric_pair(0.4, 1e9), ImportanceWeights::uniform(2), 1e10,
                          OptimizerConfig{});
  CHECK(std::abs(result.allocation[0] - 0.5) <= 1e-6);
  CHECK(std::abs(result.allocation[1] - 0.5) <= 1e-6);
  CHECK(result.rho == 1.0);
  CHECK(result.token_budget == 1e10);
  CHECK(result.effective_ratios.size() == 2);
}

TEST_CASE("optimizer result is internally consistent and descends") {
  const auto model = sample_world(3, 4).ground_truth;
  const ImportanceWeights w = ImportanceWeights::uniform(3);
  const double D = 5e10;
  OptimizerConfig config;
  const auto result = optimize_allocation(model, w, D, config);
  const auto r = result.allocation.values();
  CHECK(result.objective_value ==
        doctest::Approx(magnitude_objective(model, result.direction, r, D, 1.0)).epsilon(1e-15));
  CHECK(result.weighted_loss ==
        doctest::Approx(weighted_objective(model, w, result.allocation, D)).epsilon(1e-15));
  CHECK(result.objective_value <= magnitude_objective(model, result.direction, result.direction, D, 1.0));
  const std::vector<double> uniform(3, 1.0 / 3);
  CHECK(result.objective_value <= magnitude_objective(model, result.direction, uniform, D, 1.0));
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(result.predicted_losses[i] == predicted_loss(model, result.allocation, i, D));
  }
}

TEST_CASE("optimizer stays close to the lattice oracle") {
  const auto model = sample_world(3, 8).ground_truth;
  const ImportanceWeights w = ImportanceWeights::uniform(3);
  const auto result = optimize_allocation(model, w, 5e10, OptimizerConfig{});
  const auto oracle = grid_oracle(model, w, 5e10, 0.01, 4);
  CHECK(result.weighted_loss <= oracle.best_objective * 1.005);
}

TEST_CASE("optimizer output does not depend on the worker count") {
  const auto model = sample_world(3, 21).ground_truth;
  OptimizerConfig one, many;
  many.workers = 8;
  const auto a = optimize_allocation(model, ImportanceWeights::uniform(3), 5e10, one);
  const auto b = optimize_allocation(model, ImportanceWeights::uniform(3), 5e10, many);
  for (std::size_t i = 0; i < 3; ++i) CHECK(a.allocation[i] == b.allocation[i]);
  CHECK(a.objective_value == b.objective_value);
}

TEST_CASE("strongly negative transfer has no feasible start") {
  const auto model = testing::symmetric_pair(-5.0, 0.0, 50.0);
  expect_error(ErrorCode::kInfeasibleStart, [&] {
    (void)optimize_allocation(model, ImportanceWeights::uniform(2), 1e9, OptimizerConfig{});
  });
  expect_error(ErrorCode::kInfeasibleStart,
               [&] { (void)grid_oracle(model, ImportanceWeights::uniform(2), 1e9, 0.1); });
}

TEST_CASE("optimizer configuration validation") {
  OptimizerConfig c;
  c.rho = -1.0;
  expect_error(ErrorCode::kInvalidArgument, [&] { c.validate(); });
  c = OptimizerConfig{};
  c.barrier_shrink = 1.0;
  expect_error(ErrorCode::kInvalidArgument, [&] { c.validate(); });
  expect_error(ErrorCode::kInvalidArgument, [] {
    (void)optimize_allocation(
        ClimbModel(LanguageSet({"en"}), {MonoScalingParams(1, 0.5, 2)}, TransferParams::zero(1)),
        ImportanceWeights({1.0}), 1e9, OptimizerConfig{});
  });
}

TEST_CASE("lattice enumeration") {
  const auto model = testing::symmetric_pair(0.3);
  const auto all = grid_oracle(model, ImportanceWeights::uniform(2), 1e9, 0.5);
  CHECK(all.lattice_points == 3);
  // (0, 1) and (1, 0) leave a weighted language with no effective ratio.
  CHECK(all.evaluated_count == 1);
  CHECK(all.best_mixture == mix({0.5, 0.5}));

  const auto one = grid_oracle(model, ImportanceWeights({1, 0}), 1e9, 0.5);
  CHECK(one.lattice_points == 3);
  CHECK(one.evaluated_count == 2);
  CHECK(one.best_mixture == mix({1.0, 0.0}));

  const auto w = testing::world3();
  const auto g = grid_oracle(w, ImportanceWeights({1, 2, 0.5}), 1e10, 0.1);
  CHECK(g.lattice_points == 66);
  CHECK(g.best_objective == weighted_objective(w, ImportanceWeights({1, 2, 0.5}), g.best_mixture, 1e10));
  CHECK(g.resolution == 0.1);
}

TEST_CASE("lattice oracle on a symmetric model picks the centre") {
  const auto model = no_transfer({MonoScalingParams(1, 0.5, 2), MonoScalingParams(1, 0.5, 2),
                                  MonoScalingParams(1, 0.5, 2)});
  const auto g = grid_oracle(model, ImportanceWeights::uniform(3), 1e9, 0.05);
  // 20 steps do not split in three; any permutation of (7, 7, 6) steps is
  // equally good and the lexicographically smallest wins.
  CHECK(g.best_mixture == mix({0.30, 0.35, 0.35}));
  const auto h = grid_oracle(model, ImportanceWeights::uniform(3), 1e9, 0.1 / 3.0);
  CHECK(std::abs(h.best_mixture[0] - 1.0 / 3) <= 1e-9);
}

TEST_CASE("coarse and fine lattice optima agree") {
  const auto model = sample_world(3, 12).ground_truth;
  const ImportanceWeights w = ImportanceWeights::uniform(3);
  const auto coarse = grid_oracle(model, w, 5e10, 0.05, 2);
  const auto fine = grid_oracle(model, w, 5e10, 0.01, 2);
  CHECK(fine.best_objective <= coarse.best_objective);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::abs(coarse.best_mixture[i] - fine.best_mixture[i]) <= 0.05 + 1e-12);
  }
}

TEST_CASE("lattice oracle does not depend on the worker count") {
  const auto model = sample_world(3, 30).ground_truth;
  const auto a = grid_oracle(model, ImportanceWeights::uniform(3), 5e10, 0.01, 1);
  const auto b = grid_oracle(model, ImportanceWeights::uniform(3), 5e10, 0.01, 8);
  CHECK(a.best_objective == b.best_objective);
  CHECK(a.evaluated_count == b.evaluated_count);
  for (std::size_t i = 0; i < 3; ++i) CHECK(a.best_mixture[i] == b.best_mixture[i]);
}

TEST_CASE("lattice size guard") {
  const auto model = sample_world(6, 1).ground_truth;
  expect_error(ErrorCode::kTooManyLatticePoints,
               [&] { (void)grid_oracle(model, ImportanceWeights::uniform(6), 5e10, 0.01); });
  expect_error(ErrorCode::kInvalidArgument,
               [&] { (void)grid_oracle(model, ImportanceWeights::uniform(6), 5e10, 0.3); });
}

TEST_CASE("baselines") {
  const auto four = no_transfer({MonoScalingParams(1, 0.5, 2), MonoScalingParams(2, 0.3, 2),
                                 MonoScalingParams(1, 0.2, 2), MonoScalingParams(3, 0.4, 2)});
  const auto u = baseline_allocation(BaselineKind::kUniform, four, ImportanceWeights::uniform(4), 1e9);
  CHECK(u == mix({0.25, 0.25, 0.25, 0.25}));

  const auto same = testing::symmetric_pair(0.5);
  CHECK(baseline_allocation(BaselineKind::kIsolated, same, ImportanceWeights::uniform(2), 1e9) ==
        mix({0.5, 0.5}));
  const auto w3 = testing::world3();
  const auto iso = baseline_allocation(BaselineKind::kIsolated, w3, ImportanceWeights::uniform(3), 1e10);
  const auto dir = optimal_direction(w3.without_transfer(), ImportanceWeights::uniform(3), 1e10);
  for (std::size_t i = 0; i < 3; ++i) CHECK(iso[i] == doctest::Approx(dir[i]).epsilon(1e-15));

  const auto nat = baseline_allocation(BaselineKind::kNatural, w3, ImportanceWeights::uniform(3),
                                       1e10, std::vector<double>{30, 10, 10});
  CHECK(nat == mix({0.6, 0.2, 0.2}));
  expect_error(ErrorCode::kMissingNaturalCounts, [&] {
    (void)baseline_allocation(BaselineKind::kNatural, w3, ImportanceWeights::uniform(3), 1e10);
  });
  expect_error(ErrorCode::kMissingNaturalCounts, [&] {
    (void)baseline_allocation(BaselineKind::kNatural, w3, ImportanceWeights::uniform(3), 1e10,
                              std::vector<double>{0, 0, 0});
  });
  expect_error(ErrorCode::kNegativeEntry, [&] {
    (void)baseline_allocation(BaselineKind::kNatural, w3, ImportanceWeights::uniform(3), 1e10,
                              std::vector<double>{1, -1, 3});
  });
}

TEST_CASE("magnitude profile") {
  const auto model = no_transfer({MonoScalingParams(1, 0.5, 2), MonoScalingParams(2, 1.0, 2)});
  const std::vector<double> p{0.4, 0.6};
  const std::vector<double> c{0.5, 1.0, 2.0};
  const auto prof = magnitude_profile(model, p, 1e6, c);
  REQUIRE(prof.size() == 3);
  CHECK(prof[0].first == 0.5);
  CHECK(rel_err(prof[0].second, 0.0022427346441664563631) <= 1e-14);
  CHECK(rel_err(prof[1].second, 0.0015844721634175229993) <= 1e-14);
  CHECK(rel_err(prof[2].second, 0.0011197006554165615149) <= 1e-14);

  const ClimbModel single(LanguageSet({"en"}), {MonoScalingParams(3, 1.0, 2)}, TransferParams::zero(1));
  const std::vector<double> one{1.0};
  const std::vector<double> cs{1.0, 2.0};
  const auto halves = magnitude_profile(single, one, 1e6, cs);
  CHECK(halves[1].second == doctest::Approx(halves[0].second / 2).epsilon(1e-15));

  const std::vector<double> bad{0.0};
  expect_error(ErrorCode::kInvalidArgument, [&] { (void)magnitude_profile(model, p, 1e6, bad); });
}

TEST_CASE("magnitude profile decreases along ascending c") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto model = sample_world(4, seed).ground_truth;
    const auto p = optimal_direction(model, ImportanceWeights::uniform(4), 5e10);
    std::vector<double> c;
    for (int n = 1; n <= 100; ++n) c.push_back(0.05 * n);
    const auto prof = magnitude_profile(model, p, 5e10, c);
    for (std::size_t n = 1; n < prof.size(); ++n) CHECK(prof[n].second < prof[n - 1].second);
  }
}

}  // namespace
}  // namespace climb
