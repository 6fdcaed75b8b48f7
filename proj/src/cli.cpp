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

#include "climb/cli.hpp"

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <optional>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "climb/allocator.hpp"
#include "climb/scaling_law.hpp"

namespace climb {

namespace {

constexpr std::uint64_t kDefaultSeed = 42;

struct Options {
  std::string input;
  std::string output;
  std::string model;
  std::string budget;
  std::string weights;
  std::string mixture;
  std::string config;
  std::string world;
  std::string world_output;
  std::string plot_output;
  std::optional<double> rho;
  double grid_res = 0.01;
  std::optional<std::uint64_t> seed;
  std::optional<double> noise;
  std::optional<double> delta;
  unsigned threads = 1;
  std::size_t languages = 3;
};

struct Configs {
  FitConfig fit;
  OptimizerConfig optimizer;
  ExperimentDesign design;
};

std::uint64_t resolve_seed(const Options& o) {
  if (o.seed) return *o.seed;
  if (const char* env = std::getenv("CLIMB_SEED"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == nullptr || *end != '\0') {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("CLIMB_SEED '{}' is not a nonnegative integer", env));
    }
    return v;
  }
  return kDefaultSeed;
}

Configs load_configs(const Options& o) {
  Configs c;
  if (!o.config.empty()) {
    apply_config(parse_json(read_text(o.config)), c.fit, c.optimizer, c.design);
  }
  if (o.delta) c.fit.delta = *o.delta;
  if (o.rho) c.optimizer.rho = *o.rho;
  c.optimizer.seed = resolve_seed(o);
  c.fit.workers = o.threads;
  c.optimizer.workers = o.threads;
  c.fit.validate();
  c.optimizer.validate();
  return c;
}

ClimbModel load_model(const std::string& path) {
  try {
    return model_from_json(parse_json(read_text(path)));
  } catch (const Error& e) {
    throw e.with_context(path);
  }
}

ImportanceWeights load_weights(const Options& o, const LanguageSet& languages) {
  if (o.weights.empty()) return ImportanceWeights::uniform(languages.size());
  return ImportanceWeights(parse_weights(o.weights, languages));
}

std::string manifest_name(const std::string& output) {
  return manifest_path(output).filename().string();
}

void write_manifest(const std::string& output, const std::string& command,
                    std::vector<std::string> inputs, const Json& config) {
  RunManifest m;
  m.command = command;
  m.inputs = std::move(inputs);
  m.outputs = {output};
  m.config = config;
  m.timestamp = utc_timestamp();
  write_text(manifest_path(output), dump_json(manifest_to_json(m)));
}

std::string fmt_optional(const std::optional<double>& v) {
  return v ? fmt::format("{:.12f}", *v) : std::string("n/a");
}

int cmd_fit(const Options& o, std::ostream& out) {
  const Configs c = load_configs(o);
  const ExperimentLog log = read_records(o.input);
  const ClimbFit fit = fit_climb_model(log, c.fit);
  const Json config = config_to_json(c.fit, c.optimizer, c.design);
  Json meta = Json::object();
  meta["manifest"] = manifest_name(o.output);
  meta["fit_config"] = config.at("fit");
  meta["stages"] = fit_summary_to_json(fit);
  write_text(o.output, dump_json(model_to_json(fit.model, meta)));
  write_manifest(o.output, "fit", {o.input}, config);

  const auto& langs = fit.model.languages();
  out << fmt::format("{:<10}{:<10}{:>8}  {:<16}{}\n", "stage", "language", "points", "r_squared",
                     "huber");
  for (std::size_t i = 0; i < fit.mono.size(); ++i) {
    const auto& r = fit.mono[i];
    out << fmt::format("{:<10}{:<10}{:>8}  {:<16}{:.6e}\n", "mono", langs.code(i), r.n_points,
                       fmt_optional(r.r_squared), r.huber);
  }
  for (const auto& r : fit.ratio) {
    out << fmt::format("{:<10}{:<10}{:>8}  {:<16}{:.6e}\n", "ratio", langs.code(r.params.target),
                       r.n_points, fmt_optional(r.r_squared), r.huber);
  }
  if (langs.size() >= 2) {
    out << fmt::format("{:<10}{:<10}{:>8}  {:<16}{:.6e}\n", "transfer", "all",
                       fit.transfer.n_points, fmt_optional(fit.transfer.r_squared),
                       fit.transfer.huber);
  }
  out << fmt::format("{:<10}{:<10}{:>8}  {:<16}{:.6e}\n", "complete", "all", fit.complete.n_points,
                     fmt_optional(fit.complete.r_squared), fit.complete.huber);
  if (fit.ratio_skipped > 0) {
    out << fmt::format("ratio stage skipped {} records\n", fit.ratio_skipped);
  }
  return 0;
}

int cmd_predict(const Options& o, std::ostream& out) {
  const ClimbModel model = load_model(o.model);
  const auto& langs = model.languages();
  const double D = parse_budget(o.budget);
  const ProportionVector mixture = parse_mixture(o.mixture, langs);
  const ImportanceWeights weights = load_weights(o, langs);
  std::vector<double> eff(model.size()), loss(model.size());
  out << fmt::format("{:<10}{:<24}{:<24}{}\n", "language", "share", "effective_ratio", "loss");
  for (std::size_t i = 0; i < model.size(); ++i) {
    eff[i] = predicted_ratio(model, mixture, i, D);
    loss[i] = eff[i] > kMinEffectiveRatio ? predicted_loss(model, mixture, i, D)
                                          : std::numeric_limits<double>::infinity();
    out << fmt::format("{:<10}{:<24}{:<24}{}\n", langs.code(i), format_double(mixture[i]),
                       format_double(eff[i]),
                       std::isfinite(loss[i]) ? format_double(loss[i]) : "undefined");
  }
  const double objective = weighted_objective(model, weights, mixture, D);
  out << fmt::format("weighted objective: {}\n", format_double(objective));
  if (!o.output.empty()) {
    Json doc = Json::object();
    doc["manifest"] = manifest_name(o.output);
    doc["languages"] = langs.codes();
    doc["token_budget"] = D;
    Json m = Json::object(), e = Json::object(), l = Json::object();
    for (std::size_t i = 0; i < model.size(); ++i) {
      m[langs.code(i)] = mixture[i];
      e[langs.code(i)] = eff[i];
      l[langs.code(i)] = loss[i];
    }
    doc["mixture"] = std::move(m);
    doc["effective_ratios"] = std::move(e);
    doc["predicted_losses"] = std::move(l);
    doc["weighted_objective"] = objective;
    write_text(o.output, dump_json(doc));
    write_manifest(o.output, "predict", {o.model}, Json{{"budget", D}});
  }
  return 0;
}

int cmd_optimize(const Options& o, std::ostream& out) {
  const Configs c = load_configs(o);
  const ClimbModel model = load_model(o.model);
  const auto& langs = model.languages();
  const double D = parse_budget(o.budget);
  const ImportanceWeights weights = load_weights(o, langs);
  const AllocationResult result = optimize_allocation(model, weights, D, c.optimizer);

  if (!o.output.empty()) {
    Json doc = Json::object();
    doc["manifest"] = manifest_name(o.output);
    doc.update(allocation_to_json(result, langs));
    write_text(o.output, dump_json(doc));
    write_manifest(o.output, "optimize", {o.model},
                   config_to_json(c.fit, c.optimizer, c.design).at("optimizer"));
  }

  out << fmt::format("{:<10}{:<24}{:<24}{:<24}{}\n", "language", "direction", "allocation",
                     "effective_ratio", "loss");
  double max_gap = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    max_gap = std::max(max_gap, std::abs(result.allocation[i] - result.direction[i]));
    const double loss = result.predicted_losses[i];
    out << fmt::format("{:<10}{:<24}{:<24}{:<24}{}\n", langs.code(i),
                       format_double(result.direction[i]), format_double(result.allocation[i]),
                       format_double(result.effective_ratios[i]),
                       std::isfinite(loss) ? format_double(loss) : "undefined");
  }
  out << fmt::format("objective F(r*): {}\n", format_double(result.objective_value));
  out << fmt::format("weighted loss: {}\n", format_double(result.weighted_loss));
  out << fmt::format("max |r* - p|: {:.3e}\n", max_gap);
  if (model.transfer().is_zero()) {
    out << fmt::format("zero-transfer check: {} (max |r* - p| {:.3e}, limit 1e-6)\n",
                       max_gap <= 1e-6 ? "PASS" : "FAIL", max_gap);
  } else {
    out << "zero-transfer check: not applicable (model has transfer)\n";
  }
  return 0;
}

WorldSpec load_or_sample_world(const Options& o) {
  WorldSpec world = [&] {
    if (!o.world.empty()) {
      try {
        return world_from_json(parse_json(read_text(o.world)));
      } catch (const Error& e) {
        throw e.with_context(o.world);
      }
    }
    return sample_world(o.languages, resolve_seed(o), {}, o.noise.value_or(0.0));
  }();
  if (o.noise) {
    if (!(*o.noise >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "noise must be nonnegative");
    world.noise_sigma = *o.noise;
  }
  return world;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const Configs c = load_configs(o);
  const WorldSpec world = load_or_sample_world(o);
  const ExperimentLog log = simulate_experiments(world, c.design);
  write_records(o.output, log);
  const Json config = Json{{"design", config_to_json(c.fit, c.optimizer, c.design).at("design")},
                           {"seed", world.seed},
                           {"noise_sigma", world.noise_sigma}};
  std::vector<std::string> inputs;
  if (!o.world.empty()) inputs.push_back(o.world);
  write_manifest(o.output, "simulate", inputs, config);
  if (!o.world_output.empty()) {
    write_text(o.world_output, dump_json(world_to_json(world)));
    write_manifest(o.world_output, "simulate", inputs, config);
  }
  out << fmt::format("wrote {} records from {} runs for {} languages\n", log.records.size(),
                     c.design.run_count(world.ground_truth.size()), world.ground_truth.size());
  return 0;
}

int cmd_benchmark(const Options& o, std::ostream& out) {
  const Configs c = load_configs(o);
  const WorldSpec world = load_or_sample_world(o);
  EvaluationSettings settings;
  settings.token_budget = o.budget.empty() ? settings.token_budget : parse_budget(o.budget);
  settings.resolution = o.grid_res;
  settings.workers = o.threads;
  if (!o.weights.empty()) settings.weights = parse_weights(o.weights, world.languages());
  const EndToEndResult result = end_to_end(world, c.design, c.fit, c.optimizer, settings);

  Json config = config_to_json(c.fit, c.optimizer, c.design);
  config["evaluation"] = Json{{"token_budget", settings.token_budget},
                              {"resolution", settings.resolution}};
  std::vector<std::string> inputs;
  if (!o.world.empty()) inputs.push_back(o.world);
  if (!o.output.empty()) {
    write_text(o.output, dump_json(benchmark_document(world, result, manifest_name(o.output))));
    write_manifest(o.output, "benchmark", inputs, config);
  }
  if (!o.plot_output.empty()) {
    std::vector<double> budgets;
    for (auto d : c.design.budgets) budgets.push_back(static_cast<double>(d));
    write_text(o.plot_output, plot_csv(plot_curves(result.fit.model, budgets)));
    write_manifest(o.plot_output, "benchmark", inputs, config);
  }
  if (!o.world_output.empty()) {
    write_text(o.world_output, dump_json(world_to_json(world)));
    write_manifest(o.world_output, "benchmark", inputs, config);
  }

  const auto& report = result.comparison;
  out << fmt::format("{:<10}{:<26}{:<26}{}\n", "strategy", "ground_truth_loss", "regret",
                     "relative_regret");
  for (const auto& s : report.strategies) {
    out << fmt::format("{:<10}{:<26}{:<26}{}\n", s.name, format_double(s.ground_truth_loss),
                       format_double(s.regret), format_double(s.relative_regret));
  }
  out << fmt::format("{:<10}{:<26}(resolution {}, {} lattice points)\n", "oracle",
                     format_double(report.oracle.best_objective), report.resolution,
                     report.oracle.lattice_points);
  return 0;
}

}  // namespace

Json benchmark_document(const WorldSpec& world, const EndToEndResult& result,
                        const std::string& manifest) {
  Json doc = Json::object();
  doc["manifest"] = manifest;
  doc["world"] = world_to_json(world);
  doc["recovered_model"] = model_to_json(result.fit.model, fit_summary_to_json(result.fit));
  doc["allocation"] = allocation_to_json(result.allocation, world.languages());
  doc["comparison"] = comparison_to_json(result.comparison, world.languages());
  return doc;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cross-lingual interaction-aware scaling laws and language allocation", "climb"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));
  Options o;

  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", o.config, "JSON overriding fit/optimizer/design settings")
        ->check(CLI::ExistingFile);
    cmd->add_option("--threads", o.threads, "Worker threads")->check(CLI::Range(1u, 256u));
  };
  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", o.seed, "Random seed (falls back to CLIMB_SEED, then 42)");
  };

  auto* fit = app.add_subcommand("fit", "Fit a model to an experiment log");
  fit->add_option("--input", o.input, "Experiment-log CSV")->required()->check(CLI::ExistingFile);
  fit->add_option("--output", o.output, "Model JSON to write")->required();
  fit->add_option("--delta", o.delta, "Huber threshold");
  add_config(fit);

  auto* predict = app.add_subcommand("predict", "Predict per-language losses for a mixture");
  predict->add_option("--model", o.model, "Model JSON")->required()->check(CLI::ExistingFile);
  predict->add_option("--mixture", o.mixture, "code=share,...")->required();
  predict->add_option("--budget", o.budget, "Token budget (K/M/B/T suffixes)")->required();
  predict->add_option("--weights", o.weights, "code=weight,... (default uniform)");
  predict->add_option("--output", o.output, "Prediction JSON to write");

  auto* optimize = app.add_subcommand("optimize", "Compute the optimal language allocation");
  optimize->add_option("--model", o.model, "Model JSON")->required()->check(CLI::ExistingFile);
  optimize->add_option("--budget", o.budget, "Token budget (K/M/B/T suffixes)")->required();
  optimize->add_option("--weights", o.weights, "code=weight,... (default uniform)");
  optimize->add_option("--rho", o.rho, "Direction-penalty weight");
  optimize->add_option("--output", o.output, "Allocation JSON to write");
  add_seed(optimize);
  add_config(optimize);

  auto* simulate = app.add_subcommand("simulate", "Simulate an experiment log from a world");
  simulate->add_option("--world", o.world, "World JSON (sampled when absent)")
      ->check(CLI::ExistingFile);
  simulate->add_option("--languages", o.languages, "Languages in a sampled world")
      ->check(CLI::Range(2ul, 16ul));
  simulate->add_option("--noise", o.noise, "Log-space noise standard deviation");
  simulate->add_option("--output", o.output, "Experiment-log CSV to write")->required();
  simulate->add_option("--world-output", o.world_output, "World JSON to write");
  add_seed(simulate);
  add_config(simulate);

  auto* benchmark = app.add_subcommand("benchmark", "Run the end-to-end strategy comparison");
  benchmark->add_option("--world", o.world, "World JSON (sampled when absent)")
      ->check(CLI::ExistingFile);
  benchmark->add_option("--languages", o.languages, "Languages in a sampled world")
      ->check(CLI::Range(2ul, 16ul));
  benchmark->add_option("--noise", o.noise, "Log-space noise standard deviation");
  benchmark->add_option("--budget", o.budget, "Evaluation token budget (default 5e10)");
  benchmark->add_option("--weights", o.weights, "code=weight,... (default uniform)");
  benchmark->add_option("--rho", o.rho, "Direction-penalty weight");
  benchmark->add_option("--grid-res", o.grid_res, "Grid-oracle resolution");
  benchmark->add_option("--output", o.output, "Comparison JSON to write");
  benchmark->add_option("--plot-output", o.plot_output, "Plot-data CSV to write");
  benchmark->add_option("--world-output", o.world_output, "World JSON to write");
  add_seed(benchmark);
  add_config(benchmark);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*fit) return cmd_fit(o, out);
    if (*predict) return cmd_predict(o, out);
    if (*optimize) return cmd_optimize(o, out);
    if (*simulate) return cmd_simulate(o, out);
    if (*benchmark) return cmd_benchmark(o, out);
  } catch (const Error& e) {
    err << "error: " << error_code_name(e.code()) << ": " << e.detail() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace climb
