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

// Allocation: the closed-form optimal direction, the magnitude problem on
// the simplex, a brute-force lattice oracle, and baseline allocations.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "climb/core_model.hpp"

namespace climb {

struct OptimizerConfig {
  double rho = 1.0;  // weight of the direction penalty
  double barrier_initial = 1e-2;
  double barrier_shrink = 0.2;
  double trust_radius_initial = 0.1;
  int max_outer = 50;
  double tolerance = 1e-10;  // on the reduced gradient norm
  std::uint64_t seed = 42;
  unsigned workers = 1;
  int random_starts = 8;

  void validate() const;
};

// Lower bound kept by the barrier on every share and effective ratio.
inline constexpr double kBarrierEpsilon = 1e-9;

// Minimizer of sum_i omega_i B_i / (D x_i)^beta_i over the simplex: the
// point where omega_i B_i beta_i / (D^beta_i x_i^(beta_i+1)) is equal for
// every weighted language. Zero-weight languages receive exactly zero.
// Throws kAllWeightsZero.
std::vector<double> optimal_direction(const ClimbModel& model, const ImportanceWeights& weights,
                                      double token_budget);

// x_i proportional to (omega_i B_i beta_i)^(1/(beta_i+1)) D^(-beta_i/(beta_i+1)).
// Equals optimal_direction when every beta_i is the same; otherwise the
// marginal benefits it leaves are unequal.
std::vector<double> closed_form_direction(const ClimbModel& model,
                                          const ImportanceWeights& weights, double token_budget);

// F(r) = -sum r~_i + rho * sum (r^_i - p_i)^2 with r^ = r~ / sum r~.
double magnitude_objective(const ClimbModel& model, std::span<const double> direction,
                           std::span<const double> mixture, double token_budget, double rho);

// Minimizes F over the simplex with a log-barrier trust-region method from
// several starts. Throws kInfeasibleStart or kNoConvergence.
AllocationResult optimize_allocation(const ClimbModel& model, const ImportanceWeights& weights,
                                     double token_budget, const OptimizerConfig& config);

struct GridOracleResult {
  ProportionVector best_mixture;
  double best_objective = 0.0;
  double resolution = 0.0;
  std::size_t evaluated_count = 0;  // lattice points with a finite objective
  std::size_t lattice_points = 0;   // all enumerated lattice points
};

inline constexpr std::size_t kMaxLatticePoints = 10'000'000;

// Exhaustive search of weighted_objective over the simplex lattice with step
// `resolution`. Ties go to the lexicographically smallest mixture.
GridOracleResult grid_oracle(const ClimbModel& model, const ImportanceWeights& weights,
                             double token_budget, double resolution, unsigned workers = 1);

enum class BaselineKind { kUniform, kIsolated, kNatural };

ProportionVector baseline_allocation(BaselineKind kind, const ClimbModel& model,
                                     const ImportanceWeights& weights, double token_budget,
                                     const std::optional<std::vector<double>>& natural_counts =
                                         std::nullopt);

// (c, sum_i B_i / (D c p_i)^beta_i) for every c.
std::vector<std::pair<double, double>> magnitude_profile(const ClimbModel& model,
                                                         std::span<const double> direction,
                                                         double token_budget,
                                                         std::span<const double> c_values);

}  // namespace climb
