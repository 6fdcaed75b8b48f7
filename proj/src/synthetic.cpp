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

#include "climb/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "climb/scaling_law.hpp"

namespace climb {

namespace {

constexpr std::array<const char*, 16> kCodes{"en", "zh", "ar", "es", "ko", "ja", "fr", "de",
                                             "ru", "vi", "th", "id", "pt", "it", "hi", "tr"};

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  return std::mt19937_64(seq);
}

void check_range(const std::pair<double, double>& r, const char* name) {
  if (!(r.first <= r.second) || !std::isfinite(r.first) || !std::isfinite(r.second)) {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("range for {} is not ordered", name));
  }
}

template <typename Fn>
auto staged(const char* stage, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw e.with_context(stage);
  }
}

}  // namespace

void ParameterRanges::validate() const {
  check_range(B, "B");
  check_range(beta, "beta");
  check_range(E, "E");
  check_range(b, "b");
  check_range(k, "k");
  check_range(eta, "eta");
  if (!(B.first > 0.0)) throw Error(ErrorCode::kInvalidArgument, "B range must be positive");
  if (!(beta.first > 0.0 && beta.second <= 2.0)) {
    throw Error(ErrorCode::kInvalidArgument, "beta range must lie in (0, 2]");
  }
  if (!(E.first >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "E range must be nonnegative");
  if (!(eta.first > 0.0)) throw Error(ErrorCode::kInvalidArgument, "eta range must be positive");
}

LanguageSet default_languages(std::size_t m) {
  std::vector<std::string> codes;
  for (std::size_t i = 0; i < m; ++i) {
    codes.push_back(i < kCodes.size() ? std::string(kCodes[i]) : fmt::format("l{}", i + 1));
  }
  return LanguageSet(std::move(codes));
}

WorldSpec sample_world(std::size_t m, std::uint64_t seed, const ParameterRanges& ranges,
                       double noise_sigma) {
  if (m < 2) throw Error(ErrorCode::kInvalidArgument, "a world needs at least two languages");
  if (!(noise_sigma >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "noise_sigma must be nonnegative");
  }
  ranges.validate();
  auto rng = stream(seed, m, 0x776f726cULL);
  auto draw = [&rng](const std::pair<double, double>& r) {
    return std::uniform_real_distribution<double>(r.first, r.second)(rng);
  };
  std::vector<MonoScalingParams> mono;
  for (std::size_t i = 0; i < m; ++i) {
    const double B = draw(ranges.B);
    const double beta = draw(ranges.beta);
    const double E = draw(ranges.E);
    mono.emplace_back(B, beta, E);
  }
  const auto n = static_cast<Eigen::Index>(m);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      b(i, j) = draw(ranges.b);
      k(i, j) = draw(ranges.k);
    }
  }
  std::vector<double> eta(m);
  for (auto& e : eta) e = draw(ranges.eta);
  return WorldSpec{ClimbModel(default_languages(m), std::move(mono),
                              TransferParams(std::move(b), std::move(k), std::move(eta))),
                   noise_sigma, seed, std::nullopt};
}

void ExperimentDesign::validate() const {
  if (budgets.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "the design needs at least two budgets");
  }
  for (auto d : budgets) {
    if (d == 0) throw Error(ErrorCode::kNonPositiveTokens, "design budgets must be positive");
  }
  if (proportions.empty()) throw Error(ErrorCode::kInvalidArgument, "no design proportions");
  for (double c : proportions) {
    if (!(c > 0.0 && c < 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "design proportions must lie in (0, 1)");
    }
  }
  if (step_fractions.empty()) throw Error(ErrorCode::kInvalidArgument, "no step fractions");
  for (double f : step_fractions) {
    if (!(f > 0.0 && f <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "step fractions must lie in (0, 1]");
    }
  }
}

ExperimentLog simulate_experiments(const WorldSpec& world, const ExperimentDesign& design) {
  design.validate();
  const ClimbModel& model = world.ground_truth;
  const std::size_t m = model.size();
  const auto& codes = model.languages().codes();
  ExperimentLog log{model.languages(), {}};

  std::uint64_t run_index = 0;
  auto emit_run = [&](const std::string& run_id, std::uint64_t budget,
                      const ProportionVector& mixture) {
    auto rng = stream(world.seed, run_index++, 0x6e6f6973ULL);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double f : design.step_fractions) {
      const double tokens = static_cast<double>(budget) * f;
      for (std::size_t i = 0; i < m; ++i) {
        if (!(mixture[i] > 0.0)) continue;
        const double eff = predicted_ratio(model, mixture, i, tokens);
        if (!(eff > kMinEffectiveRatio)) {
          throw Error(ErrorCode::kNonPositiveEffectiveRatio,
                      fmt::format("run '{}': effective ratio {} for language '{}'", run_id, eff,
                                  codes[i]));
        }
        double loss = predicted_loss(model, mixture, i, tokens);
        if (world.noise_sigma > 0.0) loss *= std::exp(world.noise_sigma * normal(rng));
        log.records.emplace_back(run_id, budget, f, mixture, i, loss);
      }
    }
  };

  for (std::size_t bi = 0; bi < design.budgets.size(); ++bi) {
    const std::uint64_t budget = design.budgets[bi];
    for (std::size_t i = 0; i < m; ++i) {
      emit_run(fmt::format("D{}-{}-mono", bi + 1, codes[i]), budget, ProportionVector::vertex(m, i));
      for (std::size_t ci = 0; ci < design.proportions.size(); ++ci) {
        const double c = design.proportions[ci];
        std::vector<double> shares(m, (1.0 - c) / static_cast<double>(m - 1));
        shares[i] = c;
        emit_run(fmt::format("D{}-{}-c{}", bi + 1, codes[i], ci + 1), budget,
                 ProportionVector::make(shares));
      }
    }
  }
  return log;
}

const StrategyOutcome& ComparisonReport::strategy(std::string_view name) const {
  for (const auto& s : strategies) {
    if (s.name == name) return s;
  }
  throw Error(ErrorCode::kInvalidArgument, fmt::format("no strategy named '{}'", name));
}

EndToEndResult end_to_end(const WorldSpec& world, const ExperimentDesign& design,
                          const FitConfig& fit_config, const OptimizerConfig& opt_config,
                          const EvaluationSettings& settings) {
  const std::size_t m = world.ground_truth.size();
  const ExperimentLog log = staged("simulate", [&] { return simulate_experiments(world, design); });
  ClimbFit fit = fit_climb_model(log, fit_config);
  const ImportanceWeights weights =
      settings.weights ? ImportanceWeights(*settings.weights) : ImportanceWeights::uniform(m);
  const double D = settings.token_budget;

  AllocationResult allocation = staged(
      "optimize", [&] { return optimize_allocation(fit.model, weights, D, opt_config); });
  const GridOracleResult oracle = staged("oracle", [&] {
    return grid_oracle(world.ground_truth, weights, D, settings.resolution, settings.workers);
  });

  std::vector<std::pair<std::string, ProportionVector>> candidates;
  candidates.emplace_back("climb", allocation.allocation);
  candidates.emplace_back("uniform", ProportionVector::uniform(m));
  candidates.emplace_back("isolated", staged("baseline/isolated", [&] {
                            return baseline_allocation(BaselineKind::kIsolated, fit.model,
                                                       weights, D);
                          }));
  candidates.emplace_back("natural", staged("baseline/natural", [&] {
                            return world.natural_counts
                                       ? baseline_allocation(BaselineKind::kNatural, fit.model,
                                                             weights, D, world.natural_counts)
                                       : ProportionVector::uniform(m);
                          }));

  ComparisonReport report{{}, oracle, D, settings.resolution};
  for (auto& [name, mixture] : candidates) {
    double loss = std::numeric_limits<double>::infinity();
    try {
      loss = weighted_objective(world.ground_truth, weights, mixture, D);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNonPositiveEffectiveRatio) throw e.with_context("evaluate");
    }
    const double regret = loss - oracle.best_objective;
    report.strategies.push_back(StrategyOutcome{name, std::move(mixture), loss, regret,
                                                regret / oracle.best_objective});
  }
  return EndToEndResult{std::move(fit), std::move(allocation), std::move(report)};
}

std::vector<PlotPoint> plot_curves(const ClimbModel& model, std::span<const double> budgets,
                                   std::size_t points) {
  if (budgets.empty() || points < 2) {
    throw Error(ErrorCode::kInvalidArgument, "plot curves need budgets and at least two points");
  }
  for (double d : budgets) {
    if (!(d > 0.0)) throw Error(ErrorCode::kNonPositiveTokens, "plot budgets must be positive");
  }
  const std::size_t m = model.size();
  const auto& codes = model.languages().codes();
  std::vector<PlotPoint> out;

  const auto [lo_it, hi_it] = std::minmax_element(budgets.begin(), budgets.end());
  const double lo = std::log10(*lo_it) - 1.0;
  const double hi = std::log10(*hi_it) + 1.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t s = 0; s < points; ++s) {
      const double tokens =
          std::pow(10.0, lo + (hi - lo) * static_cast<double>(s) / static_cast<double>(points - 1));
      out.push_back(PlotPoint{"loss_vs_budget", codes[i], tokens, tokens,
                              mono_loss(model.mono(i), tokens)});
    }
  }
  if (m < 2) return out;
  for (double D : budgets) {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t s = 1; s <= points; ++s) {
        const double r = static_cast<double>(s) / static_cast<double>(points + 1);
        std::vector<double> shares(m, (1.0 - r) / static_cast<double>(m - 1));
        shares[i] = r;
        const auto mixture = ProportionVector::make(shares);
        out.push_back(
            PlotPoint{"ratio_vs_share", codes[i], D, r, predicted_ratio(model, mixture, i, D)});
      }
    }
  }
  return out;
}

}  // namespace climb
