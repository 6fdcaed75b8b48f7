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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace climb {

enum class ErrorCode {
  kInvalidArgument,
  kNegativeEntry,
  kNotNormalized,
  kNonPositiveTokens,
  kLossAtOrBelowFloor,
  kNonPositiveEffectiveRatio,
  kEmptyAfterFilter,
  kInsufficientData,
  kNoConvergence,
  kSingularDesign,
  kDegenerateVariance,
  kAllWeightsZero,
  kInfeasibleStart,
  kTooManyLatticePoints,
  kMissingNaturalCounts,
  kParseError,
  kInvariantViolation,
  kIoError,
};

std::string_view error_code_name(ErrorCode code);

// Every failure in the library surfaces as this exception; callers that need
// to branch on the failure kind inspect code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

  // Same error with a stage label prepended, e.g. "fit/mono[en]: ...".
  Error with_context(std::string_view context) const {
    return Error(code_, std::string(context) + ": " + detail_);
  }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace climb
