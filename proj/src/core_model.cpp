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

#include "climb/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include <fmt/format.h>

namespace climb {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNegativeEntry: return "NegativeEntry";
    case ErrorCode::kNotNormalized: return "NotNormalized";
    case ErrorCode::kNonPositiveTokens: return "NonPositiveTokens";
    case ErrorCode::kLossAtOrBelowFloor: return "LossAtOrBelowFloor";
    case ErrorCode::kNonPositiveEffectiveRatio: return "NonPositiveEffectiveRatio";
    case ErrorCode::kEmptyAfterFilter: return "EmptyAfterFilter";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kSingularDesign: return "SingularDesign";
    case ErrorCode::kDegenerateVariance: return "DegenerateVariance";
    case ErrorCode::kAllWeightsZero: return "AllWeightsZero";
    case ErrorCode::kInfeasibleStart: return "InfeasibleStart";
    case ErrorCode::kTooManyLatticePoints: return "TooManyLatticePoints";
    case ErrorCode::kMissingNaturalCounts: return "MissingNaturalCounts";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kInvariantViolation: return "InvariantViolation";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

namespace {

[[noreturn]] void invalid(const std::string& message) {
  throw Error(ErrorCode::kInvalidArgument, message);
}

}  // namespace

LanguageSet::LanguageSet(std::vector<std::string> codes) : codes_(std::move(codes)) {
  std::unordered_set<std::string> seen;
  for (const auto& c : codes_) {
    if (c.empty()) invalid("language codes must be non-empty");
    if (!seen.insert(c).second) invalid(fmt::format("duplicate language code '{}'", c));
  }
}

std::optional<std::size_t> LanguageSet::find(std::string_view code) const {
  auto it = std::find(codes_.begin(), codes_.end(), code);
  if (it == codes_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - codes_.begin());
}

std::size_t LanguageSet::index_of(std::string_view code) const {
  if (auto i = find(code)) return *i;
  invalid(fmt::format("unknown language code '{}'", code));
}

ProportionVector ProportionVector::make(std::span<const double> values) {
  if (values.empty()) invalid("mixture must have at least one entry");
  std::vector<double> v(values.begin(), values.end());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) invalid(fmt::format("mixture entry {} is not finite", i));
    if (v[i] < -1e-12) {
      throw Error(ErrorCode::kNegativeEntry,
                  fmt::format("mixture entry {} is {:.17g}", i, v[i]));
    }
    if (v[i] < 0.0) v[i] = 0.0;
  }
  const double sum = std::accumulate(v.begin(), v.end(), 0.0);
  if (std::abs(sum - 1.0) > kRawSimplexTolerance) {
    throw Error(ErrorCode::kNotNormalized,
                fmt::format("mixture sums to {:.17g}", sum));
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    for (auto& x : v) x /= sum;
  }
  return ProportionVector(std::move(v));
}

ProportionVector ProportionVector::uniform(std::size_t m) {
  if (m == 0) invalid("mixture must have at least one entry");
  return ProportionVector(std::vector<double>(m, 1.0 / static_cast<double>(m)));
}

ProportionVector ProportionVector::vertex(std::size_t m, std::size_t i) {
  if (i >= m) invalid("vertex index out of range");
  std::vector<double> v(m, 0.0);
  v[i] = 1.0;
  return ProportionVector(std::move(v));
}

bool ProportionVector::operator==(const ProportionVector& other) const {
  if (size() != other.size()) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    if (std::abs(values_[i] - other.values_[i]) > kProportionEqualityTolerance) return false;
  }
  return true;
}

MonoScalingParams::MonoScalingParams(double B, double beta, double E)
    : B_(B), beta_(beta), E_(E) {
  if (!(std::isfinite(B) && B > 0.0)) invalid(fmt::format("B must be positive, got {}", B));
  if (!(beta > 0.0 && beta <= 2.0)) {
    invalid(fmt::format("beta must lie in (0, 2], got {}", beta));
  }
  if (!(std::isfinite(E) && E >= 0.0)) invalid(fmt::format("E must be nonnegative, got {}", E));
}

TransferParams::TransferParams(Eigen::MatrixXd b, Eigen::MatrixXd k, std::vector<double> eta)
    : b_(std::move(b)), k_(std::move(k)), eta_(std::move(eta)) {
  const auto m = static_cast<Eigen::Index>(eta_.size());
  if (m == 0) invalid("transfer parameters need at least one language");
  if (b_.rows() != m || b_.cols() != m || k_.rows() != m || k_.cols() != m) {
    invalid(fmt::format("transfer matrices must be {}x{}", m, m));
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (b_(i, i) != 0.0 || k_(i, i) != 0.0) {
      invalid(fmt::format("self-transfer entry ({0},{0}) must be exactly zero", i));
    }
    if (!(std::isfinite(eta_[i]) && eta_[i] > 0.0)) {
      invalid(fmt::format("eta[{}] must be positive, got {}", i, eta_[i]));
    }
  }
  if (!b_.allFinite() || !k_.allFinite()) invalid("transfer matrices must be finite");
}

TransferParams TransferParams::zero(std::size_t m) {
  const auto n = static_cast<Eigen::Index>(m);
  return TransferParams(Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n),
                        std::vector<double>(m, 1.0));
}

double TransferParams::alpha(std::size_t target, std::size_t source, double token_budget) const {
  const auto t = static_cast<Eigen::Index>(target);
  const auto s = static_cast<Eigen::Index>(source);
  return b_(t, s) + k_(t, s) / token_budget;
}

bool TransferParams::is_zero() const { return b_.isZero(0.0) && k_.isZero(0.0); }

ClimbModel::ClimbModel(LanguageSet languages, std::vector<MonoScalingParams> mono,
                       TransferParams transfer)
    : languages_(std::move(languages)), mono_(std::move(mono)), transfer_(std::move(transfer)) {
  if (languages_.size() == 0) invalid("a model needs at least one language");
  if (mono_.size() != languages_.size() || transfer_.size() != languages_.size()) {
    invalid(fmt::format("model has {} languages but {} monolingual laws and {} transfer rows",
                        languages_.size(), mono_.size(), transfer_.size()));
  }
}

ClimbModel ClimbModel::without_transfer() const {
  const auto n = static_cast<Eigen::Index>(size());
  return ClimbModel(languages_, mono_,
                    TransferParams(Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n),
                                   transfer_.eta()));
}

ExperimentRecord::ExperimentRecord(std::string run_id, std::uint64_t token_budget,
                                   double step_fraction, ProportionVector mixture,
                                   std::size_t language, double val_loss)
    : run_id_(std::move(run_id)),
      token_budget_(token_budget),
      step_fraction_(step_fraction),
      mixture_(std::move(mixture)),
      language_(language),
      val_loss_(val_loss) {
  if (token_budget_ < 1) invalid(fmt::format("run '{}': token budget must be >= 1", run_id_));
  if (!(step_fraction_ > 0.0 && step_fraction_ <= 1.0)) {
    invalid(fmt::format("run '{}': step fraction {} outside (0, 1]", run_id_, step_fraction_));
  }
  if (!(std::isfinite(val_loss_) && val_loss_ > 0.0)) {
    invalid(fmt::format("run '{}': validation loss must be positive", run_id_));
  }
  if (language_ >= mixture_.size()) {
    invalid(fmt::format("run '{}': language index {} outside mixture of size {}", run_id_,
                        language_, mixture_.size()));
  }
}

ImportanceWeights::ImportanceWeights(std::vector<double> omega) : omega_(std::move(omega)) {
  if (omega_.empty()) invalid("importance weights must not be empty");
  bool any_positive = false;
  for (std::size_t i = 0; i < omega_.size(); ++i) {
    if (!(std::isfinite(omega_[i]) && omega_[i] >= 0.0)) {
      invalid(fmt::format("weight {} must be a nonnegative finite number", i));
    }
    any_positive = any_positive || omega_[i] > 0.0;
  }
  if (!any_positive) throw Error(ErrorCode::kAllWeightsZero, "every importance weight is zero");
}

ImportanceWeights ImportanceWeights::uniform(std::size_t m) {
  return ImportanceWeights(std::vector<double>(m, 1.0));
}

}  // namespace climb
