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

// The climb command line: fit, predict, optimize, simulate, benchmark.

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "climb/io.hpp"
#include "climb/synthetic.hpp"

namespace climb {

// Runs one command. `args` excludes the program name. Primary data goes to
// files or `out`, diagnostics to `err`. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Document written by `benchmark --output`.
Json benchmark_document(const WorldSpec& world, const EndToEndResult& result,
                        const std::string& manifest_name);

}  // namespace climb
