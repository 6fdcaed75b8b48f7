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

// Forward model: monolingual law, transfer strength, interaction-aware
// effective ratio and the complete per-language loss prediction.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "climb/core_model.hpp"

namespace climb {

// Effective ratios at or below this value make the loss law undefined.
inline constexpr double kMinEffectiveRatio = 1e-12;

// B / tokens^beta + E. Throws kNonPositiveTokens for tokens <= 0.
double mono_loss(const MonoScalingParams& params, double tokens);

// Inverts the monolingual law: the fraction of `token_budget` that, spent on
// this language alone, reaches `observed_loss`. Throws kLossAtOrBelowFloor
// when the loss does not exceed E by more than 1e-12.
double interaction_ratio_from_loss(const MonoScalingParams& params, double token_budget,
                                   double observed_loss);

// b + k / token_budget.
double transfer_strength(double b, double k, double token_budget);

// Effective ratio r~_i = r_i + (sum_{j != i} alpha_{j->i}(D) r_j)(1 - exp(-eta_i r_i)).
// Exactly r_i when r_i is 0 or 1.
double predicted_ratio(const ClimbModel& model, const ProportionVector& mixture,
                       std::size_t language, double token_budget);

// All effective ratios. The span overload accepts any point (also outside the
// simplex) and is what the optimizer evaluates during its iterations.
std::vector<double> predicted_ratios(const ClimbModel& model, std::span<const double> mixture,
                                     double token_budget);
std::vector<double> predicted_ratios(const ClimbModel& model, const ProportionVector& mixture,
                                     double token_budget);

// Monolingual law evaluated at D * r~_i. Throws kNonPositiveEffectiveRatio
// when r~_i <= 1e-12.
double predicted_loss(const ClimbModel& model, const ProportionVector& mixture,
                      std::size_t language, double token_budget);

// Sum_i omega_i * predicted_loss(i); zero-weight languages are skipped.
double weighted_objective(const ClimbModel& model, const ImportanceWeights& weights,
                          const ProportionVector& mixture, double token_budget);

}  // namespace climb
