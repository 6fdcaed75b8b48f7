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

#include "climb/scaling_law.hpp"

#include <cmath>

#include <fmt/format.h>

namespace climb {

namespace {

void require_positive_tokens(double tokens) {
  if (!(tokens > 0.0)) {
    throw Error(ErrorCode::kNonPositiveTokens, fmt::format("token count {} is not positive", tokens));
  }
}

void require_dimension(const ClimbModel& model, std::size_t n, std::size_t language) {
  if (n != model.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("mixture has {} entries, model has {} languages", n, model.size()));
  }
  if (language >= n) {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("language index {} out of range", language));
  }
}

double ratio_at(const ClimbModel& model, std::span<const double> r, std::size_t i, double D) {
  const auto& transfer = model.transfer();
  double pooled = 0.0;
  for (std::size_t j = 0; j < r.size(); ++j) {
    if (j != i) pooled += transfer.alpha(i, j, D) * r[j];
  }
  // -expm1(-x) is exactly zero at x == 0, so r_i == 0 stays exactly zero.
  const double saturation = -std::expm1(-transfer.eta()[i] * r[i]);
  return r[i] + pooled * saturation;
}

}  // namespace

double mono_loss(const MonoScalingParams& params, double tokens) {
  require_positive_tokens(tokens);
  return params.B() / std::pow(tokens, params.beta()) + params.E();
}

double interaction_ratio_from_loss(const MonoScalingParams& params, double token_budget,
                                   double observed_loss) {
  require_positive_tokens(token_budget);
  if (!(observed_loss > params.E() + 1e-12)) {
    throw Error(ErrorCode::kLossAtOrBelowFloor,
                fmt::format("loss {:.17g} does not exceed the irreducible floor {:.17g}",
                            observed_loss, params.E()));
  }
  const double equivalent_tokens =
      std::pow(params.B() / (observed_loss - params.E()), 1.0 / params.beta());
  return equivalent_tokens / token_budget;
}

double transfer_strength(double b, double k, double token_budget) {
  require_positive_tokens(token_budget);
  return b + k / token_budget;
}

double predicted_ratio(const ClimbModel& model, const ProportionVector& mixture,
                       std::size_t language, double token_budget) {
  require_dimension(model, mixture.size(), language);
  require_positive_tokens(token_budget);
  return ratio_at(model, mixture.values(), language, token_budget);
}

std::vector<double> predicted_ratios(const ClimbModel& model, std::span<const double> mixture,
                                     double token_budget) {
  require_dimension(model, mixture.size(), 0);
  require_positive_tokens(token_budget);
  std::vector<double> out(mixture.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ratio_at(model, mixture, i, token_budget);
  return out;
}

std::vector<double> predicted_ratios(const ClimbModel& model, const ProportionVector& mixture,
                                     double token_budget) {
  return predicted_ratios(model, mixture.values(), token_budget);
}

double predicted_loss(const ClimbModel& model, const ProportionVector& mixture,
                      std::size_t language, double token_budget) {
  const double effective = predicted_ratio(model, mixture, language, token_budget);
  if (!(effective > kMinEffectiveRatio)) {
    throw Error(ErrorCode::kNonPositiveEffectiveRatio,
                fmt::format("effective ratio of '{}' is {:.6g}", model.languages().code(language),
                            effective));
  }
  return mono_loss(model.mono(language), token_budget * effective);
}

double weighted_objective(const ClimbModel& model, const ImportanceWeights& weights,
                          const ProportionVector& mixture, double token_budget) {
  if (weights.size() != model.size()) {
    throw Error(ErrorCode::kInvalidArgument, "weights and model disagree on language count");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    if (weights[i] == 0.0) continue;
    total += weights[i] * predicted_loss(model, mixture, i, token_budget);
  }
  return total;
}

}  // namespace climb
