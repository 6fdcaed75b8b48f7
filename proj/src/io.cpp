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

#include "climb/io.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include <fmt/format.h>

namespace climb {

namespace {

[[noreturn]] void parse_error(std::size_t line, const std::string& message) {
  throw Error(ErrorCode::kParseError, fmt::format("line {}: {}", line, message));
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos
                                                                 : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

std::optional<std::uint64_t> to_budget(std::string_view s) {
  s = trim(s);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec == std::errc() && ptr == s.data() + s.size() && !s.empty()) return value;
  const auto d = to_double(s);
  if (!d || !(*d >= 1.0) || *d >= 1.8e19 || std::floor(*d) != *d) return std::nullopt;
  return static_cast<std::uint64_t>(*d);
}

[[noreturn]] void json_error(const std::string& message) {
  throw Error(ErrorCode::kParseError, message);
}

const Json& member(const Json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) json_error(fmt::format("missing field '{}'", key));
  return doc.at(key);
}

double number(const Json& value, const std::string& what) {
  if (!value.is_number()) json_error(fmt::format("'{}' must be a number", what));
  return value.get<double>();
}

Json by_code(const LanguageSet& languages, std::span<const double> values) {
  Json out = Json::object();
  for (std::size_t i = 0; i < languages.size(); ++i) out[languages.code(i)] = values[i];
  return out;
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& doc, std::size_t m, const char* name) {
  if (!doc.is_array() || doc.size() != m) {
    json_error(fmt::format("'{}' must be a {} x {} array", name, m, m));
  }
  const auto n = static_cast<Eigen::Index>(m);
  Eigen::MatrixXd out(n, n);
  for (std::size_t i = 0; i < m; ++i) {
    const Json& row = doc[i];
    if (!row.is_array() || row.size() != m) {
      json_error(fmt::format("'{}' must be a {} x {} array", name, m, m));
    }
    for (std::size_t j = 0; j < m; ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          number(row[j], fmt::format("{}[{}][{}]", name, i, j));
    }
  }
  return out;
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::vector<std::pair<std::size_t, double>> parse_assignments(std::string_view text,
                                                              const LanguageSet& languages,
                                                              const char* what) {
  std::vector<std::pair<std::size_t, double>> out;
  std::vector<bool> seen(languages.size(), false);
  for (auto item : split(text, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("{} entry '{}' is not code=value", what, item));
    }
    const auto code = trim(item.substr(0, eq));
    const auto index = languages.find(code);
    if (!index) {
      throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown language '{}' in {}", code,
                                                           what));
    }
    if (seen[*index]) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("language '{}' appears twice in {}", code, what));
    }
    seen[*index] = true;
    const auto value = to_double(item.substr(eq + 1));
    if (!value || !std::isfinite(*value)) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("{} value for '{}' is not a number", what, code));
    }
    out.emplace_back(*index, *value);
  }
  return out;
}

template <typename T>
void set_if(const Json& section, const char* key, T& field) {
  if (section.contains(key)) field = section.at(key).get<T>();
}

void reject_unknown(const Json& section, std::initializer_list<std::string_view> keys,
                    const char* name) {
  for (const auto& [key, value] : section.items()) {
    bool known = false;
    for (auto k : keys) known = known || key == k;
    if (!known) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("unknown key '{}' in config section '{}'", key, name));
    }
  }
}

}  // namespace

std::string format_double(double value) { return fmt::format("{:.17g}", value); }

std::string records_to_csv(const ExperimentLog& log) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : log.records) {
    out += fmt::format("{},{},{},{},{},{}\n", r.run_id(), r.token_budget(),
                       format_double(r.step_fraction()), log.languages.code(r.language()),
                       format_double(r.share()), format_double(r.val_loss()));
  }
  return out;
}

ExperimentLog parse_records(std::string_view text) {
  struct Row {
    std::size_t line;
    std::string run_id;
    std::uint64_t budget;
    double step;
    std::size_t language;
    double proportion;
    double loss;
  };
  std::vector<std::string> codes;
  std::map<std::string, std::size_t, std::less<>> code_index;
  std::vector<Row> rows;

  std::size_t line_no = 0;
  bool header_seen = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
    if (!header_seen) {
      if (line != kCsvHeader) parse_error(line_no, fmt::format("expected header '{}'", kCsvHeader));
      header_seen = true;
      continue;
    }
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 6) {
      parse_error(line_no, fmt::format("expected 6 fields, found {}", fields.size()));
    }
    Row row{line_no, std::string(trim(fields[0])), 0, 0.0, 0, 0.0, 0.0};
    if (row.run_id.empty()) parse_error(line_no, "empty run_id");
    const auto budget = to_budget(fields[1]);
    if (!budget || *budget == 0) parse_error(line_no, "token_budget must be a positive integer");
    row.budget = *budget;
    const auto step = to_double(fields[2]);
    if (!step || !(*step > 0.0 && *step <= 1.0)) {
      parse_error(line_no, "step_fraction must be a number in (0, 1]");
    }
    row.step = *step;
    const auto code = trim(fields[3]);
    if (code.empty()) parse_error(line_no, "empty language code");
    auto it = code_index.find(code);
    if (it == code_index.end()) {
      it = code_index.emplace(std::string(code), codes.size()).first;
      codes.emplace_back(code);
    }
    row.language = it->second;
    const auto prop = to_double(fields[4]);
    if (!prop || !std::isfinite(*prop)) parse_error(line_no, "proportion is not a number");
    row.proportion = *prop;
    const auto loss = to_double(fields[5]);
    if (!loss || !std::isfinite(*loss) || !(*loss > 0.0)) {
      parse_error(line_no, "val_loss must be a positive finite number");
    }
    row.loss = *loss;
    rows.push_back(std::move(row));
  }
  if (!header_seen) parse_error(1, "missing header");

  const std::size_t m = codes.size();
  using Key = std::tuple<std::string, std::uint64_t, double>;
  std::map<Key, std::vector<std::size_t>> groups;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    groups[{rows[r].run_id, rows[r].budget, rows[r].step}].push_back(r);
  }
  std::map<Key, ProportionVector> mixtures;
  for (const auto& [key, members] : groups) {
    const auto& [run_id, budget, step] = key;
    std::vector<double> shares(m, 0.0);
    std::vector<bool> seen(m, false);
    for (std::size_t r : members) {
      const Row& row = rows[r];
      if (seen[row.language]) {
        throw Error(ErrorCode::kInvariantViolation,
                    fmt::format("run '{}' (budget {}, step {}) lists language '{}' twice (line {})",
                                run_id, budget, step, codes[row.language], row.line));
      }
      seen[row.language] = true;
      shares[row.language] = row.proportion;
    }
    try {
      mixtures.emplace(key, ProportionVector::make(shares));
    } catch (const Error& e) {
      throw Error(ErrorCode::kInvariantViolation,
                  fmt::format("run '{}' (budget {}, step {}): {}", run_id, budget, step,
                              e.detail()));
    }
  }

  ExperimentLog log{LanguageSet(codes), {}};
  log.records.reserve(rows.size());
  for (auto& row : rows) {
    const auto& mixture = mixtures.at({row.run_id, row.budget, row.step});
    log.records.emplace_back(std::move(row.run_id), row.budget, row.step, mixture, row.language,
                             row.loss);
  }
  return log;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, fmt::format("cannot write '{}'", path.string()));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error(ErrorCode::kIoError, fmt::format("cannot write '{}'", path.string()));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw Error(ErrorCode::kIoError,
                fmt::format("cannot move output into '{}': {}", path.string(), ec.message()));
  }
}

ExperimentLog read_records(const std::filesystem::path& path) {
  try {
    return parse_records(read_text(path));
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

void write_records(const std::filesystem::path& path, const ExperimentLog& log) {
  write_text(path, records_to_csv(log));
}

Json model_to_json(const ClimbModel& model, const Json& fit_meta) {
  const auto& langs = model.languages();
  Json doc = Json::object();
  doc["languages"] = langs.codes();
  doc["index_convention"] = kIndexConvention;
  Json mono = Json::object();
  for (std::size_t i = 0; i < model.size(); ++i) {
    const auto& p = model.mono(i);
    mono[langs.code(i)] = Json{{"B", p.B()}, {"beta", p.beta()}, {"E", p.E()}};
  }
  doc["mono"] = std::move(mono);
  doc["transfer"] = Json{{"b", matrix_to_json(model.transfer().b())},
                         {"k", matrix_to_json(model.transfer().k())}};
  doc["eta"] = by_code(langs, model.transfer().eta());
  doc["fit_meta"] = fit_meta;
  return doc;
}

ClimbModel model_from_json(const Json& doc) {
  try {
    const Json& langs_doc = member(doc, "languages");
    if (!langs_doc.is_array()) json_error("'languages' must be an array of codes");
    std::vector<std::string> codes;
    for (const auto& c : langs_doc) {
      if (!c.is_string()) json_error("'languages' must be an array of codes");
      codes.push_back(c.get<std::string>());
    }
    LanguageSet languages(codes);
    const std::size_t m = languages.size();
    const Json& mono_doc = member(doc, "mono");
    std::vector<MonoScalingParams> mono;
    for (const auto& code : codes) {
      const Json& p = member(mono_doc, code.c_str());
      mono.emplace_back(number(member(p, "B"), code + ".B"), number(member(p, "beta"), code + ".beta"),
                        number(member(p, "E"), code + ".E"));
    }
    const Json& transfer = member(doc, "transfer");
    auto b = matrix_from_json(member(transfer, "b"), m, "b");
    auto k = matrix_from_json(member(transfer, "k"), m, "k");
    const Json& eta_doc = member(doc, "eta");
    std::vector<double> eta;
    for (const auto& code : codes) eta.push_back(number(member(eta_doc, code.c_str()), "eta." + code));
    return ClimbModel(std::move(languages), std::move(mono),
                      TransferParams(std::move(b), std::move(k), std::move(eta)));
  } catch (const Json::exception& e) {
    json_error(fmt::format("malformed model document: {}", e.what()));
  }
}

Json world_to_json(const WorldSpec& world) {
  Json doc = Json::object();
  doc["seed"] = world.seed;
  doc["noise_sigma"] = world.noise_sigma;
  doc["natural_counts"] = world.natural_counts ? Json(*world.natural_counts) : Json(nullptr);
  doc["ground_truth"] = model_to_json(world.ground_truth);
  return doc;
}

WorldSpec world_from_json(const Json& doc) {
  try {
    const Json& seed = member(doc, "seed");
    if (!seed.is_number_unsigned()) json_error("'seed' must be a nonnegative integer");
    const double sigma = number(member(doc, "noise_sigma"), "noise_sigma");
    if (!(sigma >= 0.0)) json_error("'noise_sigma' must be nonnegative");
    std::optional<std::vector<double>> counts;
    if (doc.contains("natural_counts") && !doc.at("natural_counts").is_null()) {
      counts = doc.at("natural_counts").get<std::vector<double>>();
    }
    return WorldSpec{model_from_json(member(doc, "ground_truth")), sigma,
                     seed.get<std::uint64_t>(), std::move(counts)};
  } catch (const Json::exception& e) {
    json_error(fmt::format("malformed world document: {}", e.what()));
  }
}

Json allocation_to_json(const AllocationResult& result, const LanguageSet& languages) {
  Json doc = Json::object();
  doc["languages"] = languages.codes();
  doc["token_budget"] = result.token_budget;
  doc["rho"] = result.rho;
  doc["direction"] = by_code(languages, result.direction);
  doc["allocation"] = by_code(languages, result.allocation.values());
  doc["effective_ratios"] = by_code(languages, result.effective_ratios);
  doc["predicted_losses"] = by_code(languages, result.predicted_losses);
  doc["objective_value"] = result.objective_value;
  doc["weighted_loss"] = result.weighted_loss;
  return doc;
}

Json fit_summary_to_json(const ClimbFit& fit) {
  const auto& langs = fit.model.languages();
  Json doc = Json::object();
  doc["tail_records"] = fit.tail_records;
  doc["ratio_skipped"] = fit.ratio_skipped;
  Json mono = Json::object();
  for (std::size_t i = 0; i < fit.mono.size(); ++i) {
    const auto& r = fit.mono[i];
    mono[langs.code(i)] = Json{{"r_squared", optional_number(r.r_squared)},
                               {"huber", r.huber},
                               {"n_points", r.n_points},
                               {"converged", r.converged}};
  }
  doc["mono"] = std::move(mono);
  Json ratio = Json::object();
  for (const auto& r : fit.ratio) {
    Json budgets = Json::array();
    for (const auto& b : r.params.budgets) {
      budgets.push_back(Json{{"token_budget", b.token_budget}, {"alpha", b.aggregate}});
    }
    ratio[langs.code(r.params.target)] = Json{{"eta", r.params.eta},
                                              {"eta_identifiable", r.params.eta_identifiable},
                                              {"r_squared", optional_number(r.r_squared)},
                                              {"huber", r.huber},
                                              {"n_points", r.n_points},
                                              {"converged", r.converged},
                                              {"budgets", std::move(budgets)}};
  }
  doc["ratio"] = std::move(ratio);
  doc["transfer"] = Json{{"r_squared", optional_number(fit.transfer.r_squared)},
                         {"huber", fit.transfer.huber},
                         {"n_points", fit.transfer.n_points}};
  doc["complete"] = Json{{"r_squared", optional_number(fit.complete.r_squared)},
                         {"huber", fit.complete.huber},
                         {"n_points", fit.complete.n_points},
                         {"skipped", fit.complete.skipped}};
  return doc;
}

Json comparison_to_json(const ComparisonReport& report, const LanguageSet& languages) {
  Json doc = Json::object();
  doc["languages"] = languages.codes();
  doc["token_budget"] = report.token_budget;
  doc["resolution"] = report.resolution;
  doc["oracle"] = Json{{"mixture", by_code(languages, report.oracle.best_mixture.values())},
                       {"objective", report.oracle.best_objective},
                       {"evaluated_count", report.oracle.evaluated_count},
                       {"lattice_points", report.oracle.lattice_points}};
  Json strategies = Json::array();
  for (const auto& s : report.strategies) {
    strategies.push_back(Json{{"name", s.name},
                              {"allocation", by_code(languages, s.allocation.values())},
                              {"ground_truth_loss", s.ground_truth_loss},
                              {"regret", s.regret},
                              {"relative_regret", s.relative_regret}});
  }
  doc["strategies"] = std::move(strategies);
  return doc;
}

void apply_config(const Json& doc, FitConfig& fit, OptimizerConfig& optimizer,
                  ExperimentDesign& design) {
  try {
    if (!doc.is_object()) throw Error(ErrorCode::kInvalidArgument, "config must be an object");
    reject_unknown(doc, {"fit", "optimizer", "design"}, "<root>");
    if (doc.contains("fit")) {
      const Json& s = doc.at("fit");
      reject_unknown(s,
                     {"delta", "max_iterations", "beta_grid", "eta_min", "eta_max", "eta_bounds",
                      "min_tail_fraction", "workers"},
                     "fit");
      set_if(s, "delta", fit.delta);
      set_if(s, "max_iterations", fit.max_iterations);
      set_if(s, "beta_grid", fit.beta_grid);
      set_if(s, "eta_min", fit.eta_min);
      set_if(s, "eta_max", fit.eta_max);
      if (s.contains("eta_bounds")) {
        const auto bounds = s.at("eta_bounds").get<std::vector<double>>();
        if (bounds.size() != 2) {
          throw Error(ErrorCode::kInvalidArgument, "eta_bounds must hold two numbers");
        }
        fit.eta_min = bounds[0];
        fit.eta_max = bounds[1];
      }
      set_if(s, "min_tail_fraction", fit.min_tail_fraction);
      set_if(s, "workers", fit.workers);
    }
    if (doc.contains("optimizer")) {
      const Json& s = doc.at("optimizer");
      reject_unknown(s,
                     {"rho", "barrier_initial", "barrier_shrink", "trust_radius_initial",
                      "max_outer", "tolerance", "seed", "workers", "random_starts"},
                     "optimizer");
      set_if(s, "rho", optimizer.rho);
      set_if(s, "barrier_initial", optimizer.barrier_initial);
      set_if(s, "barrier_shrink", optimizer.barrier_shrink);
      set_if(s, "trust_radius_initial", optimizer.trust_radius_initial);
      set_if(s, "max_outer", optimizer.max_outer);
      set_if(s, "tolerance", optimizer.tolerance);
      set_if(s, "seed", optimizer.seed);
      set_if(s, "workers", optimizer.workers);
      set_if(s, "random_starts", optimizer.random_starts);
    }
    if (doc.contains("design")) {
      const Json& s = doc.at("design");
      reject_unknown(s, {"budgets", "proportions", "step_fractions"}, "design");
      set_if(s, "budgets", design.budgets);
      set_if(s, "proportions", design.proportions);
      set_if(s, "step_fractions", design.step_fractions);
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("bad config value: {}", e.what()));
  }
  fit.validate();
  optimizer.validate();
  design.validate();
}

Json config_to_json(const FitConfig& fit, const OptimizerConfig& optimizer,
                    const ExperimentDesign& design) {
  return Json{{"fit",
               {{"delta", fit.delta},
                {"max_iterations", fit.max_iterations},
                {"beta_grid", fit.beta_grid},
                {"eta_min", fit.eta_min},
                {"eta_max", fit.eta_max},
                {"min_tail_fraction", fit.min_tail_fraction}}},
              {"optimizer",
               {{"rho", optimizer.rho},
                {"barrier_initial", optimizer.barrier_initial},
                {"barrier_shrink", optimizer.barrier_shrink},
                {"trust_radius_initial", optimizer.trust_radius_initial},
                {"max_outer", optimizer.max_outer},
                {"tolerance", optimizer.tolerance},
                {"seed", optimizer.seed},
                {"random_starts", optimizer.random_starts}}},
              {"design",
               {{"budgets", design.budgets},
                {"proportions", design.proportions},
                {"step_fractions", design.step_fractions}}}};
}

std::string plot_csv(const std::vector<PlotPoint>& points) {
  std::string out = "curve,language,token_budget,x,y\n";
  for (const auto& p : points) {
    out += fmt::format("{},{},{},{},{}\n", p.curve, p.language, format_double(p.token_budget),
                       format_double(p.x), format_double(p.y));
  }
  return out;
}

double parse_budget(std::string_view text) {
  auto s = trim(text);
  double scale = 1.0;
  if (!s.empty()) {
    switch (s.back()) {
      case 'K': case 'k': scale = 1e3; break;
      case 'M': case 'm': scale = 1e6; break;
      case 'B': case 'b': scale = 1e9; break;
      case 'T': case 't': scale = 1e12; break;
      default: break;
    }
    if (scale != 1.0) s.remove_suffix(1);
  }
  const auto value = to_double(s);
  if (!value || !std::isfinite(*value * scale) || !(*value > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("'{}' is not a positive token budget", text));
  }
  return *value * scale;
}

std::vector<double> parse_weights(std::string_view text, const LanguageSet& languages) {
  std::vector<double> out(languages.size(), 0.0);
  for (const auto& [i, v] : parse_assignments(text, languages, "weights")) {
    if (v < 0.0) {
      throw Error(ErrorCode::kNegativeEntry,
                  fmt::format("weight for '{}' is negative", languages.code(i)));
    }
    out[i] = v;
  }
  return out;
}

ProportionVector parse_mixture(std::string_view text, const LanguageSet& languages) {
  std::vector<double> out(languages.size(), 0.0);
  for (const auto& [i, v] : parse_assignments(text, languages, "mixture")) out[i] = v;
  return ProportionVector::make(out);
}

Json manifest_to_json(const RunManifest& manifest) {
  return Json{{"command", manifest.command},
              {"inputs", manifest.inputs},
              {"outputs", manifest.outputs},
              {"config", manifest.config},
              {"tool_version", manifest.tool_version},
              {"timestamp", manifest.timestamp}};
}

std::filesystem::path manifest_path(const std::filesystem::path& output) {
  auto p = output;
  p += ".manifest.json";
  return p;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string dump_json(const Json& doc) { return doc.dump(2) + "\n"; }

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kParseError, fmt::format("invalid JSON: {}", e.what()));
  }
}

}  // namespace climb
