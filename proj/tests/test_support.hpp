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

// Shared fixtures for the unit tests.

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "climb/core_model.hpp"
#include "climb/error.hpp"
#include "direction_oracle.hpp"
#include "doctest.h"

namespace climb::testing {

// Runs `fn` and checks that it throws climb::Error with `code`.
template <typename Fn>
void expect_error(ErrorCode code, Fn&& fn) {
  try {
    fn();
    FAIL("expected ", error_code_name(code), ", nothing was thrown");
  } catch (const Error& e) {
    CHECK_MESSAGE(e.code() == code, "expected ", error_code_name(code), ", got ", e.what());
  }
}

inline double rel_err(double got, double want) {
  return want == 0.0 ? std::abs(got) : std::abs(got / want - 1.0);
}

inline Eigen::MatrixXd matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd m(n, static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

inline ProportionVector mix(std::initializer_list<double> values) {
  return ProportionVector::make(std::vector<double>(values));
}

// Two identical languages (B=1, beta=0.5, E=2) with transfer strength
// alpha = b + k/D in both directions.
inline ClimbModel symmetric_pair(double b, double k = 0.0, double eta = 2.0) {
  return ClimbModel(LanguageSet({"en", "zh"}),
                    {MonoScalingParams(1.0, 0.5, 2.0), MonoScalingParams(1.0, 0.5, 2.0)},
                    TransferParams(matrix({{0, b}, {b, 0}}), matrix({{0, k}, {k, 0}}), {eta, eta}));
}

// Three-language reference world with mixed-sign transfer.
inline ClimbModel world3() {
  return ClimbModel(
      LanguageSet({"en", "zh", "ar"}),
      {MonoScalingParams(2.0, 0.3, 1.8), MonoScalingParams(1.5, 0.25, 2.1),
       MonoScalingParams(3.0, 0.4, 1.6)},
      TransferParams(matrix({{0, 0.2, 0.1}, {0.3, 0, -0.05}, {0.15, 0.25, 0}}),
                     matrix({{0, 1e9, 2e9}, {5e8, 0, 0}, {0, 3e9, 0}}), {2.0, 5.0, 1.0}));
}


}  // namespace climb::testing
