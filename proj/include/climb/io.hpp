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

// File formats: the experiment-log CSV, model/world/result JSON documents,
// command-line value parsers, and run manifests.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "climb/allocator.hpp"
#include "climb/core_model.hpp"
#include "climb/fitting.hpp"
#include "climb/synthetic.hpp"

namespace climb {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kCsvHeader =
    "run_id,token_budget,step_fraction,language,proportion,val_loss";
inline constexpr std::string_view kIndexConvention =
    "b[i][j] and k[i][j] give the transfer from source language j into target language i";
inline constexpr std::string_view kToolVersion = "0.1.0";

// 17 significant digits.
std::string format_double(double value);

// One row per record. Rows of a run at one step list the languages it
// trains on; a language without a row has share zero.
std::string records_to_csv(const ExperimentLog& log);
ExperimentLog parse_records(std::string_view text);

std::string read_text(const std::filesystem::path& path);
// Writes through a temporary file and renames it into place.
void write_text(const std::filesystem::path& path, std::string_view text);

ExperimentLog read_records(const std::filesystem::path& path);
void write_records(const std::filesystem::path& path, const ExperimentLog& log);

Json model_to_json(const ClimbModel& model, const Json& fit_meta = Json::object());
ClimbModel model_from_json(const Json& doc);

Json world_to_json(const WorldSpec& world);
WorldSpec world_from_json(const Json& doc);

Json allocation_to_json(const AllocationResult& result, const LanguageSet& languages);
Json fit_summary_to_json(const ClimbFit& fit);
Json comparison_to_json(const ComparisonReport& report, const LanguageSet& languages);

// Overrides fields present under "fit", "optimizer" and "design".
void apply_config(const Json& doc, FitConfig& fit, OptimizerConfig& optimizer,
                  ExperimentDesign& design);
Json config_to_json(const FitConfig& fit, const OptimizerConfig& optimizer,
                    const ExperimentDesign& design);

std::string plot_csv(const std::vector<PlotPoint>& points);

// "5e10", "50B", "1.5T"; K, M, B and T scale by powers of 1000.
double parse_budget(std::string_view text);
// "en=1,zh=0.5". Unlisted languages get weight zero.
std::vector<double> parse_weights(std::string_view text, const LanguageSet& languages);
// "en=0.6,zh=0.4". Unlisted languages get share zero.
ProportionVector parse_mixture(std::string_view text, const LanguageSet& languages);

struct RunManifest {
  std::string command;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  Json config = Json::object();
  std::string tool_version{kToolVersion};
  std::string timestamp;  // UTC, ISO 8601
};

Json manifest_to_json(const RunManifest& manifest);
// Sidecar of an output file: "<output>.manifest.json".
std::filesystem::path manifest_path(const std::filesystem::path& output);
std::string utc_timestamp();

// Pretty-printed with a trailing newline.
std::string dump_json(const Json& doc);
Json parse_json(std::string_view text);

}  // namespace climb
