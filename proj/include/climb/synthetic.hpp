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

// Synthetic ground-truth worlds, simulated experiment logs, and end-to-end
// comparisons of allocation strategies under the ground truth.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "climb/allocator.hpp"
#include "climb/core_model.hpp"
#include "climb/fitting.hpp"

namespace climb {

struct ParameterRanges {
  std::pair<double, double> B{0.5, 5.0};
  std::pair<double, double> beta{0.15, 0.6};
  std::pair<double, double> E{1.2, 2.5};
  std::pair<double, double> b{-0.2, 0.8};
  std::pair<double, double> k{-2e9, 1e10};
  std::pair<double, double> eta{0.5, 10.0};

  void validate() const;
};

struct WorldSpec {
  ClimbModel ground_truth;
  double noise_sigma = 0.0;  // std of log-space multiplicative noise
  std::uint64_t seed = 0;
  std::optional<std::vector<double>> natural_counts;

  const LanguageSet& languages() const { return ground_truth.languages(); }
};

// First m codes of a fixed list of sixteen; longer sets continue as l17, l18...
LanguageSet default_languages(std::size_t m);

// Draws every parameter uniformly from `ranges`; deterministic per seed.
WorldSpec sample_world(std::size_t m, std::uint64_t seed, const ParameterRanges& ranges = {},
                       double noise_sigma = 0.0);

struct ExperimentDesign {
  std::vector<std::uint64_t> budgets{50'000'000'000ULL, 200'000'000'000ULL};
  std::vector<double> proportions{0.25, 0.6};  // target share in multilingual runs
  std::vector<double> step_fractions{0.85, 0.9, 0.95, 1.0};

  void validate() const;
  // One monolingual run plus one run per proportion, per language and budget.
  std::size_t run_count(std::size_t m) const {
    return (1 + proportions.size()) * m * budgets.size();
  }
};

// Monolingual runs record only their language; multilingual runs record
// every language. Throws kNonPositiveEffectiveRatio when the ground truth
// gives some recorded language no positive effective ratio, which the
// default ranges rule out for m <= 3 at the default budgets.
ExperimentLog simulate_experiments(const WorldSpec& world, const ExperimentDesign& design = {});

struct StrategyOutcome {
  std::string name;
  ProportionVector allocation;
  double ground_truth_loss = 0.0;  // +infinity when undefined
  double regret = 0.0;
  double relative_regret = 0.0;
};

struct ComparisonReport {
  std::vector<StrategyOutcome> strategies;  // climb, uniform, isolated, natural
  GridOracleResult oracle;
  double token_budget = 0.0;
  double resolution = 0.0;

  const StrategyOutcome& strategy(std::string_view name) const;
};

struct EvaluationSettings {
  std::optional<std::vector<double>> weights;  // uniform when absent
  double token_budget = 5e10;
  double resolution = 0.01;
  unsigned workers = 1;
};

struct EndToEndResult {
  ClimbFit fit;
  AllocationResult allocation;  // computed on the recovered model
  ComparisonReport comparison;  // evaluated on the ground truth
};

// simulate, fit, optimize, then compare strategies against the grid oracle
// under the ground-truth model. Errors carry a stage label.
EndToEndResult end_to_end(const WorldSpec& world, const ExperimentDesign& design,
                          const FitConfig& fit_config, const OptimizerConfig& opt_config,
                          const EvaluationSettings& settings = {});

struct PlotPoint {
  std::string curve;  // "loss_vs_budget" or "ratio_vs_share"
  std::string language;
  double token_budget = 0.0;
  double x = 0.0;
  double y = 0.0;
};

// Monolingual loss against tokens on a log grid spanning `budgets`, and the
// effective ratio against the own share at each budget with the remaining
// share split equally among the other languages.
std::vector<PlotPoint> plot_curves(const ClimbModel& model, std::span<const double> budgets,
                                   std::size_t points = 99);

}  // namespace climb
