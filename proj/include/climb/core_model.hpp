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

// Domain types shared by fitting, prediction and allocation. Every type
// validates its invariants at construction and is immutable afterwards.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "climb/error.hpp"

namespace climb {

// Accepted deviation of a raw mixture from sum 1 before rejection.
inline constexpr double kRawSimplexTolerance = 1e-6;
// Guaranteed deviation from sum 1 after construction.
inline constexpr double kSimplexTolerance = 1e-9;
// Index-wise equality tolerance for mixtures.
inline constexpr double kProportionEqualityTolerance = 1e-12;

// Ordered, unique language codes. The order fixes the index of each language
// in every vector and matrix downstream.
class LanguageSet {
 public:
  explicit LanguageSet(std::vector<std::string> codes);

  std::size_t size() const noexcept { return codes_.size(); }
  const std::string& code(std::size_t i) const { return codes_.at(i); }
  const std::vector<std::string>& codes() const noexcept { return codes_; }

  std::optional<std::size_t> find(std::string_view code) const;
  // Throws kInvalidArgument for unknown codes.
  std::size_t index_of(std::string_view code) const;

  bool operator==(const LanguageSet& other) const = default;

 private:
  std::vector<std::string> codes_;
};

// A point on the probability simplex.
class ProportionVector {
 public:
  // Validates `values`: entries below -1e-12 are rejected (kNegativeEntry),
  // tiny negatives are clamped to zero, and sums further than 1e-6 from one
  // are rejected (kNotNormalized). Accepted inputs are renormalized unless
  // already within 1e-12 of one, which keeps text round-trips lossless.
  static ProportionVector make(std::span<const double> values);
  static ProportionVector uniform(std::size_t m);
  static ProportionVector vertex(std::size_t m, std::size_t i);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }

  // Index-wise within 1e-12.
  bool operator==(const ProportionVector& other) const;

 private:
  explicit ProportionVector(std::vector<double> values)
      : values_(std::move(values)) {}
  std::vector<double> values_;
};

inline ProportionVector make_proportion(std::span<const double> values) {
  return ProportionVector::make(values);
}

// Monolingual law loss(t) = B / t^beta + E.
class MonoScalingParams {
 public:
  MonoScalingParams(double B, double beta, double E);

  double B() const noexcept { return B_; }
  double beta() const noexcept { return beta_; }
  double E() const noexcept { return E_; }

  bool operator==(const MonoScalingParams& other) const = default;

 private:
  double B_;
  double beta_;
  double E_;
};

// Pairwise transfer parameters. Matrices are indexed [target][source]: the
// strength of transfer from language j into language i at budget D is
// b(i, j) + k(i, j) / D. Off-diagonal entries may take either sign.
class TransferParams {
 public:
  TransferParams(Eigen::MatrixXd b, Eigen::MatrixXd k, std::vector<double> eta);

  // No transfer at all; eta defaults to one.
  static TransferParams zero(std::size_t m);

  std::size_t size() const noexcept { return eta_.size(); }
  const Eigen::MatrixXd& b() const noexcept { return b_; }
  const Eigen::MatrixXd& k() const noexcept { return k_; }
  const std::vector<double>& eta() const noexcept { return eta_; }

  double alpha(std::size_t target, std::size_t source, double token_budget) const;
  bool is_zero() const;

 private:
  Eigen::MatrixXd b_;
  Eigen::MatrixXd k_;
  std::vector<double> eta_;
};

class ClimbModel {
 public:
  ClimbModel(LanguageSet languages, std::vector<MonoScalingParams> mono,
             TransferParams transfer);

  std::size_t size() const noexcept { return languages_.size(); }
  const LanguageSet& languages() const noexcept { return languages_; }
  const std::vector<MonoScalingParams>& mono() const noexcept { return mono_; }
  const MonoScalingParams& mono(std::size_t i) const { return mono_.at(i); }
  const TransferParams& transfer() const noexcept { return transfer_; }

  // Same monolingual laws with every b and k set to zero.
  ClimbModel without_transfer() const;

 private:
  LanguageSet languages_;
  std::vector<MonoScalingParams> mono_;
  TransferParams transfer_;
};

// One validation-loss measurement of one language in one run at one step.
// `language` indexes the LanguageSet of the owning ExperimentLog.
class ExperimentRecord {
 public:
  ExperimentRecord(std::string run_id, std::uint64_t token_budget,
                   double step_fraction, ProportionVector mixture,
                   std::size_t language, double val_loss);

  const std::string& run_id() const noexcept { return run_id_; }
  std::uint64_t token_budget() const noexcept { return token_budget_; }
  double step_fraction() const noexcept { return step_fraction_; }
  const ProportionVector& mixture() const noexcept { return mixture_; }
  std::size_t language() const noexcept { return language_; }
  double val_loss() const noexcept { return val_loss_; }

  // The language's own share of the mixture.
  double share() const { return mixture_[language_]; }
  // Tokens consumed when the measurement was taken: step_fraction * budget.
  double tokens_seen() const {
    return static_cast<double>(token_budget_) * step_fraction_;
  }

 private:
  std::string run_id_;
  std::uint64_t token_budget_;
  double step_fraction_;
  ProportionVector mixture_;
  std::size_t language_;
  double val_loss_;
};

struct ExperimentLog {
  LanguageSet languages;
  std::vector<ExperimentRecord> records;
};

class ImportanceWeights {
 public:
  explicit ImportanceWeights(std::vector<double> omega);
  static ImportanceWeights uniform(std::size_t m);

  std::size_t size() const noexcept { return omega_.size(); }
  double operator[](std::size_t i) const { return omega_[i]; }
  std::span<const double> values() const noexcept { return omega_; }

 private:
  std::vector<double> omega_;
};

struct AllocationResult {
  std::vector<double> direction;         // p
  ProportionVector allocation;           // r*
  std::vector<double> effective_ratios;  // r~ at r*
  // +infinity where the effective ratio is not positive.
  std::vector<double> predicted_losses;
  double objective_value = 0.0;  // magnitude objective F at r*
  double weighted_loss = 0.0;    // sum of omega_i * loss_i at r*
  double rho = 0.0;
  double token_budget = 0.0;
};

}  // namespace climb
