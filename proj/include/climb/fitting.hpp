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

// Parameter estimation from experiment logs: monolingual laws first, then
// effective ratios, per-budget transfer strengths with a shared saturation
// rate, and finally the linear-in-1/D transfer model.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "climb/core_model.hpp"

namespace climb {

struct FitConfig {
  double delta = 1e-3;  // Huber threshold, loss units.
  int max_iterations = 500;
  std::vector<double> beta_grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  double eta_min = 1e-3;
  double eta_max = 50.0;
  double min_tail_fraction = 0.85;
  unsigned workers = 1;

  void validate() const;
};

template <typename Params>
struct FitReport {
  Params params;
  // Absent when the observed values have zero variance.
  std::optional<double> r_squared{};
  double huber = 0.0;  // Mean per-point Huber loss.
  std::size_t n_points = 0;
  bool converged = false;
  std::vector<double> residuals{};  // predicted - observed
};

struct GoodnessOfFit {
  double r_squared = 0.0;
  double huber_mean = 0.0;
};

// Keeps records measured at step_fraction >= min_fraction, in order.
std::vector<ExperimentRecord> filter_tail(std::span<const ExperimentRecord> records,
                                          double min_fraction = 0.85);

// 0.5 r^2 inside |r| <= delta, delta (|r| - delta / 2) outside.
double huber(double residual, double delta);

// Throws kDegenerateVariance when the observed values are all identical.
GoodnessOfFit goodness_of_fit(std::span<const double> observed,
                              std::span<const double> predicted, double delta);

// Fits (B, beta, E) to monolingual (share == 1) records of one language by
// minimizing the summed Huber loss of raw-loss residuals.
FitReport<MonoScalingParams> fit_monolingual(std::span<const ExperimentRecord> records,
                                             const FitConfig& config);

// One observed (r_i, r~_i) pair. `token_budget` is the token count at the
// time of measurement.
struct RatioPair {
  std::string run_id;
  std::size_t language = 0;
  double token_budget = 0.0;
  double share = 0.0;
  double effective = 0.0;
  std::vector<double> mixture;
};

// True when every language other than `pair.language` has the same share.
bool has_equal_companions(const RatioPair& pair, double tolerance = 1e-9);

// Inverts every record's loss through its language's monolingual law.
std::vector<RatioPair> ratio_pairs(std::span<const ExperimentRecord> records,
                                   std::span<const MonoScalingParams> mono);

struct BudgetAlpha {
  double token_budget = 0.0;
  // Coefficient of (1 - r_i) in the equal-share form; in per-pair mode the
  // plain mean of by_source.
  double aggregate = 0.0;
  std::vector<double> by_source;  // alpha_{j->i}; the target's own entry is 0.
};

struct AlphaEstimate {
  std::size_t target = 0;
  double eta = 1.0;
  bool eta_identifiable = true;
  bool per_pair = false;
  std::vector<BudgetAlpha> budgets;  // ascending token budget
};

struct AlphaFitOptions {
  // Resolve alpha_{j->i} per source. Needs runs whose companion shares
  // differ; equal-share designs only identify the aggregate.
  bool per_pair = false;
  std::optional<double> fixed_eta;
  double eta_min = 1e-3;
  double eta_max = 50.0;
  int max_iterations = 500;
  // Below this max |alpha| the saturation rate is reported non-identifiable.
  double identifiability_threshold = 1e-3;
};

// Fits transfer strengths for one target language. Pairs are grouped by
// token budget; one saturation rate eta is shared by all budgets.
FitReport<AlphaEstimate> fit_alpha_at_budget(std::span<const RatioPair> pairs,
                                             std::size_t language_count,
                                             const AlphaFitOptions& options);

struct AlphaObservation {
  std::size_t source = 0;
  std::size_t target = 0;
  double token_budget = 0.0;
  double alpha_hat = 0.0;
};

// Per-source observations from an estimate. An aggregate estimate is spread
// evenly: every source receives the aggregate, which reproduces it exactly
// under equal companion shares.
std::vector<AlphaObservation> alpha_observations(const AlphaEstimate& estimate,
                                                 std::size_t language_count);

struct TransferEstimate {
  Eigen::MatrixXd b;  // [target][source]
  Eigen::MatrixXd k;
};

// Ordinary least squares of alpha_hat on (1, 1/D) for every ordered pair.
// Each pair needs observations at two or more distinct budgets.
FitReport<TransferEstimate> fit_transfer(std::span<const AlphaObservation> observations,
                                         std::size_t language_count);

struct StageSummary {
  std::optional<double> r_squared{};
  double huber = 0.0;
  std::size_t n_points = 0;
  std::size_t skipped = 0;
};

struct ClimbFit {
  ClimbModel model;
  std::vector<FitReport<MonoScalingParams>> mono;
  std::vector<FitReport<AlphaEstimate>> ratio;
  FitReport<TransferEstimate> transfer;
  // Complete-law loss predictions on the tail records with equal companion
  // shares (monolingual and equal-share runs), the ones the fit identifies.
  StageSummary complete;
  std::size_t tail_records = 0;
  // Multilingual records left out of the ratio stage: their loss is not
  // above the fitted floor, or too few records remain at their token count.
  std::size_t ratio_skipped = 0;
};

// Full estimation pipeline over a log produced by the 3 x m x 2 design:
// tail filter, monolingual fits, ratio inversion, equal-share transfer fits,
// and the 1/D regression. Errors carry a stage label.
ClimbFit fit_climb_model(const ExperimentLog& log, const FitConfig& config);

}  // namespace climb
