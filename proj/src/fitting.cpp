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

#include "climb/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <utility>

#include <boost/math/tools/minima.hpp>
#include <fmt/format.h>

#include "climb/parallel.hpp"
#include "climb/scaling_law.hpp"

namespace climb {

namespace {

constexpr double kMinB = 1e-300;
constexpr double kBetaLower = 1e-4;
constexpr double kBetaUpper = 2.0;
constexpr int kBrentBits = std::numeric_limits<double>::digits / 2;

[[noreturn]] void insufficient(const std::string& message) {
  throw Error(ErrorCode::kInsufficientData, message);
}

double huber_sum(std::span<const double> residuals, double delta) {
  double total = 0.0;
  for (double r : residuals) total += huber(r, delta);
  return total;
}

std::optional<double> optional_r_squared(std::span<const double> observed,
                                         std::span<const double> predicted, double delta) {
  try {
    return goodness_of_fit(observed, predicted, delta).r_squared;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kDegenerateVariance) return std::nullopt;
    throw;
  }
}

// --- monolingual law --------------------------------------------------------

struct LinearPart {
  double B = kMinB;
  double E = 0.0;
};

double weighted_sse(std::span<const double> x, std::span<const double> y,
                    std::span<const double> w, const LinearPart& p) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = p.B * x[i] + p.E - y[i];
    total += w[i] * r * r;
  }
  return total;
}

// argmin over B >= kMinB, E >= 0 of sum w (B x + E - y)^2. The problem is a
// convex quadratic, so the answer is the unconstrained minimizer when it is
// feasible and otherwise the better of the two clamped edge minimizers.
LinearPart constrained_weighted_ls(std::span<const double> x, std::span<const double> y,
                                   std::span<const double> w) {
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double xbar = sx / sw;
  const double ybar = sy / sw;
  double sxx = 0.0, sxy = 0.0, sxx0 = 0.0, sxy0 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - xbar;
    sxx += w[i] * dx * dx;
    sxy += w[i] * dx * (y[i] - ybar);
    sxx0 += w[i] * x[i] * x[i];
    sxy0 += w[i] * x[i] * y[i];
  }
  if (sxx > 0.0) {
    LinearPart free{sxy / sxx, 0.0};
    free.E = ybar - free.B * xbar;
    if (free.B >= kMinB && free.E >= 0.0) return free;
  }
  const LinearPart floor_edge{std::max(kMinB, sxx0 > 0.0 ? sxy0 / sxx0 : kMinB), 0.0};
  const LinearPart scale_edge{kMinB, std::max(0.0, ybar - kMinB * xbar)};
  return weighted_sse(x, y, w, scale_edge) < weighted_sse(x, y, w, floor_edge) ? scale_edge
                                                                               : floor_edge;
}

struct Profile {
  double objective = std::numeric_limits<double>::infinity();
  LinearPart linear;
};

class MonoProblem {
 public:
  MonoProblem(std::vector<double> tokens, std::vector<double> losses, double delta)
      : tokens_(std::move(tokens)), losses_(std::move(losses)), delta_(delta) {
    log_tokens_.reserve(tokens_.size());
    for (double t : tokens_) log_tokens_.push_back(std::log(t));
  }

  std::size_t size() const { return tokens_.size(); }

  std::vector<double> residuals(double B, double beta, double E) const {
    std::vector<double> r(size());
    for (std::size_t i = 0; i < size(); ++i) {
      r[i] = B * std::exp(-beta * log_tokens_[i]) + E - losses_[i];
    }
    return r;
  }

  double objective(double B, double beta, double E) const {
    return huber_sum(residuals(B, beta, E), delta_);
  }

  // For fixed beta the law is affine in (B, E); Huber regression of an affine
  // model is convex, solved here by iteratively reweighted least squares.
  Profile profile(double beta) const {
    std::vector<double> x(size());
    for (std::size_t i = 0; i < size(); ++i) x[i] = std::exp(-beta * log_tokens_[i]);
    std::vector<double> w(size(), 1.0);
    Profile best;
    LinearPart current = constrained_weighted_ls(x, losses_, w);
    for (int iter = 0; iter < 200; ++iter) {
      const double obj = objective(current.B, beta, current.E);
      if (obj < best.objective) best = Profile{obj, current};
      for (std::size_t i = 0; i < size(); ++i) {
        const double r = std::abs(current.B * x[i] + current.E - losses_[i]);
        w[i] = r <= delta_ ? 1.0 : delta_ / r;
      }
      const LinearPart next = constrained_weighted_ls(x, losses_, w);
      const bool settled = std::abs(next.B - current.B) <= 1e-15 * std::abs(current.B) &&
                           std::abs(next.E - current.E) <= 1e-15 * std::abs(current.E);
      current = next;
      if (settled) break;
    }
    const double obj = objective(current.B, beta, current.E);
    if (obj < best.objective) best = Profile{obj, current};
    return best;
  }

  // Gauss-Newton on (B, beta, E) with Huber weights; only non-increasing
  // steps are accepted.
  void polish(double& B, double& beta, double& E, int max_iterations) const {
    double obj = objective(B, beta, E);
    for (int iter = 0; iter < max_iterations; ++iter) {
      const auto r = residuals(B, beta, E);
      Eigen::MatrixXd J(size(), 3);
      Eigen::VectorXd rhs(size());
      for (std::size_t i = 0; i < size(); ++i) {
        const double w = std::sqrt(std::abs(r[i]) <= delta_ ? 1.0 : delta_ / std::abs(r[i]));
        const double x = std::exp(-beta * log_tokens_[i]);
        const auto row = static_cast<Eigen::Index>(i);
        J(row, 0) = w * x;
        J(row, 1) = -w * B * log_tokens_[i] * x;
        J(row, 2) = w;
        rhs(row) = -w * r[i];
      }
      Eigen::Vector3d scale = J.colwise().norm().transpose();
      for (int c = 0; c < 3; ++c) {
        if (scale(c) == 0.0) scale(c) = 1.0;
        J.col(c) /= scale(c);
      }
      Eigen::Vector3d step = J.colPivHouseholderQr().solve(rhs).cwiseQuotient(scale);
      if (!step.allFinite()) return;
      bool accepted = false;
      for (int halving = 0; halving < 30; ++halving) {
        const double nb = B + step(0), nbeta = beta + step(1), ne = E + step(2);
        if (nb >= kMinB && nbeta >= kBetaLower && nbeta <= kBetaUpper && ne >= 0.0) {
          const double nobj = objective(nb, nbeta, ne);
          if (nobj <= obj) {
            const bool tiny = std::abs(step(1)) <= 1e-15 * nbeta &&
                              std::abs(step(0)) <= 1e-15 * nb &&
                              std::abs(step(2)) <= 1e-15 * std::max(ne, 1e-300);
            B = nb;
            beta = nbeta;
            E = ne;
            obj = nobj;
            accepted = !tiny;
            break;
          }
        }
        step *= 0.5;
      }
      if (!accepted) return;
    }
  }

 private:
  std::vector<double> tokens_;
  std::vector<double> log_tokens_;
  std::vector<double> losses_;
  double delta_;
};

struct LocalResult {
  double objective = std::numeric_limits<double>::infinity();
  double beta = 0.0;
  bool converged = false;
};

// Brent search for the profile minimum inside a window around `start`; the
// window slides while the minimizer sits on one of its interior edges.
LocalResult search_beta(const MonoProblem& problem, double start, double half_width,
                        int max_iterations) {
  auto f = [&](double beta) { return problem.profile(beta).objective; };
  double lo = std::max(kBetaLower, start - half_width);
  double hi = std::min(kBetaUpper, start + half_width);
  LocalResult out;
  for (int slide = 0; slide < 64; ++slide) {
    std::uintmax_t iters = static_cast<std::uintmax_t>(max_iterations);
    const auto [beta, value] = boost::math::tools::brent_find_minima(f, lo, hi, kBrentBits, iters);
    out = LocalResult{value, beta, iters < static_cast<std::uintmax_t>(max_iterations)};
    const double edge = 1e-6 * (hi - lo);
    if (beta - lo < edge && lo > kBetaLower) {
      hi = lo + edge;
      lo = std::max(kBetaLower, lo - 2.0 * half_width);
    } else if (hi - beta < edge && hi < kBetaUpper) {
      lo = hi - edge;
      hi = std::min(kBetaUpper, hi + 2.0 * half_width);
    } else {
      break;
    }
  }
  if (!std::isfinite(out.objective)) out.converged = false;
  return out;
}

// --- transfer strengths -----------------------------------------------------

struct BudgetGroup {
  double token_budget = 0.0;
  std::vector<const RatioPair*> pairs;
};

std::vector<BudgetGroup> group_by_budget(std::span<const RatioPair> pairs) {
  std::vector<const RatioPair*> sorted;
  sorted.reserve(pairs.size());
  for (const auto& p : pairs) sorted.push_back(&p);
  std::stable_sort(sorted.begin(), sorted.end(), [](const RatioPair* a, const RatioPair* b) {
    return a->token_budget < b->token_budget;
  });
  std::vector<BudgetGroup> groups;
  for (const RatioPair* p : sorted) {
    if (groups.empty() ||
        std::abs(p->token_budget - groups.back().token_budget) >
            1e-12 * groups.back().token_budget) {
      groups.push_back(BudgetGroup{p->token_budget, {}});
    }
    groups.back().pairs.push_back(p);
  }
  return groups;
}

double saturation(double eta, double share) { return -std::expm1(-eta * share); }

struct AlphaSolution {
  double rss = 0.0;
  std::vector<BudgetAlpha> budgets;
  std::vector<double> predicted;  // aligned with the grouped pair order
};

class AlphaProblem {
 public:
  AlphaProblem(std::vector<BudgetGroup> groups, std::size_t target, std::size_t m, bool per_pair)
      : groups_(std::move(groups)), target_(target), m_(m), per_pair_(per_pair) {}

  AlphaSolution solve(double eta) const {
    AlphaSolution out;
    for (const auto& group : groups_) {
      BudgetAlpha ba;
      ba.token_budget = group.token_budget;
      ba.by_source.assign(m_, 0.0);
      if (per_pair_) {
        solve_per_pair(group, eta, ba, out);
      } else {
        solve_aggregate(group, eta, ba, out);
      }
      out.budgets.push_back(std::move(ba));
    }
    return out;
  }

 private:
  void solve_aggregate(const BudgetGroup& group, double eta, BudgetAlpha& ba,
                       AlphaSolution& out) const {
    double num = 0.0, den = 0.0;
    for (const RatioPair* p : group.pairs) {
      const double g = (1.0 - p->share) * saturation(eta, p->share);
      num += g * (p->effective - p->share);
      den += g * g;
    }
    const double alpha = den > 0.0 ? num / den : 0.0;
    for (const RatioPair* p : group.pairs) {
      const double pred = p->share + alpha * (1.0 - p->share) * saturation(eta, p->share);
      out.predicted.push_back(pred);
      out.rss += (pred - p->effective) * (pred - p->effective);
    }
    ba.aggregate = alpha;
    for (std::size_t j = 0; j < m_; ++j) {
      if (j != target_) ba.by_source[j] = alpha;
    }
  }

  void solve_per_pair(const BudgetGroup& group, double eta, BudgetAlpha& ba,
                      AlphaSolution& out) const {
    const auto n = static_cast<Eigen::Index>(group.pairs.size());
    Eigen::MatrixXd A(n, static_cast<Eigen::Index>(m_ - 1));
    Eigen::VectorXd y(n);
    for (Eigen::Index row = 0; row < n; ++row) {
      const RatioPair* p = group.pairs[static_cast<std::size_t>(row)];
      const double s = saturation(eta, p->share);
      Eigen::Index col = 0;
      for (std::size_t j = 0; j < m_; ++j) {
        if (j != target_) A(row, col++) = s * p->mixture[j];
      }
      y(row) = p->effective - p->share;
    }
    const Eigen::VectorXd alpha = A.colPivHouseholderQr().solve(y);
    const Eigen::VectorXd fitted = A * alpha;
    Eigen::Index col = 0;
    double mean = 0.0;
    for (std::size_t j = 0; j < m_; ++j) {
      if (j == target_) continue;
      ba.by_source[j] = alpha(col++);
      mean += ba.by_source[j];
    }
    ba.aggregate = mean / static_cast<double>(m_ - 1);
    for (Eigen::Index row = 0; row < n; ++row) {
      const RatioPair* p = group.pairs[static_cast<std::size_t>(row)];
      const double pred = p->share + fitted(row);
      out.predicted.push_back(pred);
      out.rss += (pred - p->effective) * (pred - p->effective);
    }
  }

  std::vector<BudgetGroup> groups_;
  std::size_t target_;
  std::size_t m_;
  bool per_pair_;
};

}  // namespace

void FitConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::kInvalidArgument, what); };
  if (!(delta > 0.0)) bad("delta must be positive");
  if (max_iterations < 1) bad("max_iterations must be at least 1");
  if (beta_grid.empty()) bad("beta_grid must not be empty");
  for (double b : beta_grid) {
    if (!(b > 0.0 && b <= kBetaUpper)) bad("beta_grid entries must lie in (0, 2]");
  }
  if (!(eta_min > 0.0 && eta_max > eta_min)) bad("eta bounds must satisfy 0 < min < max");
  if (!(min_tail_fraction > 0.0 && min_tail_fraction < 1.0)) {
    bad("min_tail_fraction must lie in (0, 1)");
  }
}

std::vector<ExperimentRecord> filter_tail(std::span<const ExperimentRecord> records,
                                          double min_fraction) {
  if (!(min_fraction > 0.0 && min_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "min_fraction must lie in (0, 1)");
  }
  std::vector<ExperimentRecord> kept;
  for (const auto& r : records) {
    if (r.step_fraction() >= min_fraction) kept.push_back(r);
  }
  if (kept.empty()) {
    throw Error(ErrorCode::kEmptyAfterFilter,
                fmt::format("no record at step fraction >= {}", min_fraction));
  }
  return kept;
}

double huber(double residual, double delta) {
  const double a = std::abs(residual);
  return a <= delta ? 0.5 * residual * residual : delta * (a - 0.5 * delta);
}

GoodnessOfFit goodness_of_fit(std::span<const double> observed,
                              std::span<const double> predicted, double delta) {
  if (observed.size() != predicted.size() || observed.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "goodness_of_fit needs two equally long vectors of at least two values");
  }
  if (!(delta > 0.0)) throw Error(ErrorCode::kInvalidArgument, "delta must be positive");
  const double n = static_cast<double>(observed.size());
  const double mean = std::accumulate(observed.begin(), observed.end(), 0.0) / n;
  double ss_res = 0.0, ss_tot = 0.0, hub = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double r = predicted[i] - observed[i];
    ss_res += r * r;
    ss_tot += (observed[i] - mean) * (observed[i] - mean);
    hub += huber(r, delta);
  }
  if (ss_tot == 0.0) {
    throw Error(ErrorCode::kDegenerateVariance, "observed values have zero variance");
  }
  return GoodnessOfFit{1.0 - ss_res / ss_tot, hub / n};
}

FitReport<MonoScalingParams> fit_monolingual(std::span<const ExperimentRecord> records,
                                             const FitConfig& config) {
  config.validate();
  if (records.size() < 3) {
    insufficient(fmt::format("monolingual fit needs at least 3 points, got {}", records.size()));
  }
  const std::size_t language = records.front().language();
  std::vector<double> tokens, losses;
  std::vector<std::uint64_t> budgets;
  for (const auto& r : records) {
    if (r.language() != language) {
      throw Error(ErrorCode::kInvalidArgument, "monolingual fit mixes several languages");
    }
    if (std::abs(r.share() - 1.0) > 1e-12) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("run '{}' is not monolingual (share {})", r.run_id(), r.share()));
    }
    tokens.push_back(r.tokens_seen());
    losses.push_back(r.val_loss());
    budgets.push_back(r.token_budget());
  }
  std::sort(budgets.begin(), budgets.end());
  if (std::unique(budgets.begin(), budgets.end()) - budgets.begin() < 2) {
    insufficient("monolingual fit needs runs at two or more distinct token budgets");
  }

  const MonoProblem problem(tokens, losses, config.delta);
  std::vector<double> starts = config.beta_grid;
  const double half_width =
      starts.size() > 1 ? (*std::max_element(starts.begin(), starts.end()) -
                           *std::min_element(starts.begin(), starts.end())) /
                              static_cast<double>(starts.size() - 1)
                        : 0.1;
  std::vector<LocalResult> local(starts.size());
  parallel_for(starts.size(), config.workers, [&](std::size_t s) {
    local[s] = search_beta(problem, starts[s], half_width, config.max_iterations);
  });

  std::size_t best = local.size();
  for (std::size_t s = 0; s < local.size(); ++s) {
    if (!std::isfinite(local[s].objective)) continue;
    if (best == local.size() || local[s].objective < local[best].objective) best = s;
  }
  if (best == local.size()) {
    throw Error(ErrorCode::kNoConvergence, "no multi-start candidate produced a finite objective");
  }

  double beta = local[best].beta;
  const Profile prof = problem.profile(beta);
  double B = prof.linear.B;
  double E = prof.linear.E;
  problem.polish(B, beta, E, 50);

  FitReport<MonoScalingParams> report{.params = MonoScalingParams(B, beta, E)};
  report.residuals = problem.residuals(B, beta, E);
  std::vector<double> predicted(losses.size());
  for (std::size_t i = 0; i < losses.size(); ++i) predicted[i] = losses[i] + report.residuals[i];
  report.r_squared = optional_r_squared(losses, predicted, config.delta);
  report.huber = huber_sum(report.residuals, config.delta) / static_cast<double>(losses.size());
  report.n_points = losses.size();
  report.converged = local[best].converged;
  return report;
}

bool has_equal_companions(const RatioPair& pair, double tolerance) {
  std::optional<double> first;
  for (std::size_t j = 0; j < pair.mixture.size(); ++j) {
    if (j == pair.language) continue;
    if (!first) {
      first = pair.mixture[j];
    } else if (std::abs(pair.mixture[j] - *first) > tolerance) {
      return false;
    }
  }
  return true;
}

std::vector<RatioPair> ratio_pairs(std::span<const ExperimentRecord> records,
                                   std::span<const MonoScalingParams> mono) {
  std::vector<RatioPair> pairs;
  pairs.reserve(records.size());
  for (const auto& r : records) {
    if (r.language() >= mono.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("run '{}': no monolingual law for language {}", r.run_id(),
                              r.language()));
    }
    double effective = 0.0;
    try {
      effective = interaction_ratio_from_loss(mono[r.language()], r.tokens_seen(), r.val_loss());
    } catch (const Error& e) {
      throw e.with_context(fmt::format("run '{}' language {} step {}", r.run_id(), r.language(),
                                       r.step_fraction()));
    }
    const auto mix = r.mixture().values();
    pairs.push_back(RatioPair{r.run_id(), r.language(), r.tokens_seen(), r.share(), effective,
                              std::vector<double>(mix.begin(), mix.end())});
  }
  return pairs;
}

FitReport<AlphaEstimate> fit_alpha_at_budget(std::span<const RatioPair> pairs,
                                             std::size_t language_count,
                                             const AlphaFitOptions& options) {
  if (pairs.empty()) insufficient("no ratio pairs to fit");
  if (language_count < 2) {
    throw Error(ErrorCode::kInvalidArgument, "transfer needs at least two languages");
  }
  if (!(options.eta_min > 0.0 && options.eta_max > options.eta_min)) {
    throw Error(ErrorCode::kInvalidArgument, "eta bounds must satisfy 0 < min < max");
  }
  const std::size_t target = pairs.front().language;
  for (const auto& p : pairs) {
    if (p.language != target) {
      throw Error(ErrorCode::kInvalidArgument, "ratio pairs target several languages");
    }
    if (p.mixture.size() != language_count) {
      throw Error(ErrorCode::kInvalidArgument, "ratio pair mixture has the wrong length");
    }
    if (!options.per_pair && !has_equal_companions(p)) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("run '{}' does not give equal shares to the other languages",
                              p.run_id));
    }
  }
  auto groups = group_by_budget(pairs);
  for (const auto& g : groups) {
    if (g.pairs.size() < 2) {
      insufficient(fmt::format("need at least 2 ratio pairs at budget {:.6g}, got {}",
                               g.token_budget, g.pairs.size()));
    }
    if (options.per_pair) {
      Eigen::MatrixXd companions(static_cast<Eigen::Index>(g.pairs.size()),
                                 static_cast<Eigen::Index>(language_count - 1));
      for (std::size_t row = 0; row < g.pairs.size(); ++row) {
        Eigen::Index col = 0;
        for (std::size_t j = 0; j < language_count; ++j) {
          if (j != target) companions(static_cast<Eigen::Index>(row), col++) = g.pairs[row]->mixture[j];
        }
      }
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(companions);
      qr.setThreshold(1e-10);
      if (qr.rank() < static_cast<Eigen::Index>(language_count - 1)) {
        throw Error(ErrorCode::kSingularDesign,
                    fmt::format("companion shares at budget {:.6g} have rank {} < {}",
                                g.token_budget, qr.rank(), language_count - 1));
      }
    }
  }

  const AlphaProblem problem(groups, target, language_count, options.per_pair);
  double eta = 0.0;
  bool converged = true;
  if (options.fixed_eta) {
    eta = *options.fixed_eta;
    if (!(eta > 0.0)) throw Error(ErrorCode::kInvalidArgument, "fixed eta must be positive");
  } else {
    // Coarse log-spaced scan, then Brent between the neighbours of the best
    // grid point.
    constexpr int kGrid = 64;
    const double ulo = std::log(options.eta_min);
    const double uhi = std::log(options.eta_max);
    std::vector<double> rss(kGrid);
    for (int g = 0; g < kGrid; ++g) {
      rss[g] = problem.solve(std::exp(ulo + (uhi - ulo) * g / (kGrid - 1))).rss;
    }
    const int best = static_cast<int>(std::min_element(rss.begin(), rss.end()) - rss.begin());
    const double a = ulo + (uhi - ulo) * std::max(0, best - 1) / (kGrid - 1);
    const double b = ulo + (uhi - ulo) * std::min(kGrid - 1, best + 1) / (kGrid - 1);
    std::uintmax_t iters = static_cast<std::uintmax_t>(options.max_iterations);
    const auto [u, value] = boost::math::tools::brent_find_minima(
        [&](double uu) { return problem.solve(std::exp(uu)).rss; }, a, b, kBrentBits, iters);
    eta = value <= rss[best] ? std::exp(u) : std::exp(ulo + (uhi - ulo) * best / (kGrid - 1));
    converged = iters < static_cast<std::uintmax_t>(options.max_iterations);
  }

  const AlphaSolution solution = problem.solve(eta);
  FitReport<AlphaEstimate> report{.params = AlphaEstimate{target, eta, true, options.per_pair,
                                                solution.budgets}};
  double largest = 0.0;
  for (const auto& ba : solution.budgets) {
    for (double a : ba.by_source) largest = std::max(largest, std::abs(a));
  }
  report.params.eta_identifiable =
      options.fixed_eta.has_value() || largest >= options.identifiability_threshold;

  std::vector<double> observed;
  for (const auto& g : groups) {
    for (const RatioPair* p : g.pairs) observed.push_back(p->effective);
  }
  report.residuals.resize(observed.size());
  for (std::size_t i = 0; i < observed.size(); ++i) {
    report.residuals[i] = solution.predicted[i] - observed[i];
  }
  report.r_squared = optional_r_squared(observed, solution.predicted, 1e-3);
  report.huber = huber_sum(report.residuals, 1e-3) / static_cast<double>(observed.size());
  report.n_points = observed.size();
  report.converged = converged;
  return report;
}

std::vector<AlphaObservation> alpha_observations(const AlphaEstimate& estimate,
                                                 std::size_t language_count) {
  std::vector<AlphaObservation> out;
  for (const auto& ba : estimate.budgets) {
    for (std::size_t j = 0; j < language_count; ++j) {
      if (j == estimate.target) continue;
      out.push_back(AlphaObservation{j, estimate.target, ba.token_budget, ba.by_source.at(j)});
    }
  }
  return out;
}

FitReport<TransferEstimate> fit_transfer(std::span<const AlphaObservation> observations,
                                         std::size_t language_count) {
  const auto m = static_cast<Eigen::Index>(language_count);
  std::map<std::pair<std::size_t, std::size_t>, std::vector<const AlphaObservation*>> by_pair;
  for (const auto& o : observations) {
    if (o.source == o.target || o.source >= language_count || o.target >= language_count) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("invalid transfer pair {} -> {}", o.source, o.target));
    }
    if (!(o.token_budget > 0.0)) {
      throw Error(ErrorCode::kNonPositiveTokens, "alpha observation with non-positive budget");
    }
    by_pair[{o.target, o.source}].push_back(&o);
  }
  TransferEstimate est{Eigen::MatrixXd::Zero(m, m), Eigen::MatrixXd::Zero(m, m)};
  std::vector<double> observed, predicted;
  for (std::size_t i = 0; i < language_count; ++i) {
    for (std::size_t j = 0; j < language_count; ++j) {
      if (i == j) continue;
      auto it = by_pair.find({i, j});
      if (it == by_pair.end()) insufficient(fmt::format("no alpha observations for {} -> {}", j, i));
      const auto& obs = it->second;
      double xbar = 0.0, ybar = 0.0;
      for (const auto* o : obs) {
        xbar += 1.0 / o->token_budget;
        ybar += o->alpha_hat;
      }
      xbar /= static_cast<double>(obs.size());
      ybar /= static_cast<double>(obs.size());
      double sxx = 0.0, sxy = 0.0;
      for (const auto* o : obs) {
        const double dx = 1.0 / o->token_budget - xbar;
        sxx += dx * dx;
        sxy += dx * (o->alpha_hat - ybar);
      }
      if (!(sxx > 0.0)) {
        insufficient(fmt::format("alpha {} -> {} observed at a single budget", j, i));
      }
      const double k = sxy / sxx;
      const double b = ybar - k * xbar;
      est.b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = b;
      est.k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = k;
      for (const auto* o : obs) {
        observed.push_back(o->alpha_hat);
        predicted.push_back(b + k / o->token_budget);
      }
    }
  }
  FitReport<TransferEstimate> report{.params = std::move(est)};
  report.residuals.resize(observed.size());
  for (std::size_t i = 0; i < observed.size(); ++i) report.residuals[i] = predicted[i] - observed[i];
  report.r_squared = observed.size() >= 2 ? optional_r_squared(observed, predicted, 1e-3)
                                          : std::nullopt;
  report.huber = observed.empty() ? 0.0
                                  : huber_sum(report.residuals, 1e-3) /
                                        static_cast<double>(observed.size());
  report.n_points = observed.size();
  report.converged = true;
  return report;
}

ClimbFit fit_climb_model(const ExperimentLog& log, const FitConfig& config) {
  config.validate();
  const std::size_t m = log.languages.size();
  const auto& codes = log.languages.codes();
  if (m == 0) insufficient("the experiment log names no languages");

  std::vector<ExperimentRecord> tail;
  try {
    tail = filter_tail(log.records, config.min_tail_fraction);
  } catch (const Error& e) {
    throw e.with_context("fit/tail");
  }

  std::vector<std::optional<FitReport<MonoScalingParams>>> mono_slots(m);
  parallel_for(m, config.workers, [&](std::size_t i) {
    std::vector<ExperimentRecord> mono_records;
    for (const auto& r : tail) {
      if (r.language() == i && std::abs(r.share() - 1.0) <= 1e-12) mono_records.push_back(r);
    }
    FitConfig inner = config;
    inner.workers = 1;
    try {
      mono_slots[i] = fit_monolingual(mono_records, inner);
    } catch (const Error& e) {
      throw e.with_context(fmt::format("fit/mono[{}]", codes[i]));
    }
  });
  std::vector<FitReport<MonoScalingParams>> mono_reports;
  std::vector<MonoScalingParams> mono;
  for (auto& slot : mono_slots) {
    mono.push_back(slot->params);
    mono_reports.push_back(std::move(*slot));
  }

  std::vector<FitReport<AlphaEstimate>> ratio_reports;
  std::vector<AlphaObservation> observations;
  std::vector<double> eta(m, 1.0);
  TransferParams transfer = TransferParams::zero(m);
  FitReport<TransferEstimate> transfer_report{
      .params = TransferEstimate{Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m),
                                             static_cast<Eigen::Index>(m)),
                       Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m),
                                             static_cast<Eigen::Index>(m))}};
  transfer_report.converged = true;
  std::size_t total_skipped = 0;

  if (m >= 2) {
    AlphaFitOptions options;
    options.eta_min = config.eta_min;
    options.eta_max = config.eta_max;
    options.max_iterations = config.max_iterations;
    std::vector<std::optional<FitReport<AlphaEstimate>>> ratio_slots(m);
    std::vector<std::size_t> skipped(m, 0);
    parallel_for(m, config.workers, [&](std::size_t i) {
      const std::string label = fmt::format("fit/ratio[{}]", codes[i]);
      std::vector<ExperimentRecord> multi;
      for (const auto& r : tail) {
        if (r.language() != i || !(r.share() > 1e-12 && r.share() < 1.0 - 1e-12)) continue;
        if (r.val_loss() <= mono[i].E() + 1e-12) {
          ++skipped[i];
          continue;
        }
        multi.push_back(r);
      }
      try {
        auto pairs = ratio_pairs(multi, mono);
        std::erase_if(pairs, [](const RatioPair& p) { return !has_equal_companions(p); });
        std::map<double, std::size_t> per_budget;
        for (const auto& p : pairs) ++per_budget[p.token_budget];
        skipped[i] += static_cast<std::size_t>(std::erase_if(pairs, [&](const RatioPair& p) {
          return per_budget[p.token_budget] < 2;
        }));
        ratio_slots[i] = fit_alpha_at_budget(pairs, m, options);
      } catch (const Error& e) {
        throw e.with_context(label);
      }
    });
    for (std::size_t i = 0; i < m; ++i) {
      total_skipped += skipped[i];
      eta[i] = ratio_slots[i]->params.eta;
      auto obs = alpha_observations(ratio_slots[i]->params, m);
      observations.insert(observations.end(), obs.begin(), obs.end());
      ratio_reports.push_back(std::move(*ratio_slots[i]));
    }
    try {
      transfer_report = fit_transfer(observations, m);
    } catch (const Error& e) {
      throw e.with_context("fit/transfer");
    }
    transfer = TransferParams(transfer_report.params.b, transfer_report.params.k, eta);
  }

  ClimbModel model(log.languages, mono, transfer);

  StageSummary complete;
  std::vector<double> observed, predicted;
  for (const auto& r : tail) {
    if (r.share() <= 0.0) continue;
    const auto mix = r.mixture().values();
    const RatioPair probe{r.run_id(), r.language(), 0.0, r.share(), 0.0,
                          std::vector<double>(mix.begin(), mix.end())};
    if (!has_equal_companions(probe)) continue;
    try {
      predicted.push_back(predicted_loss(model, r.mixture(), r.language(), r.tokens_seen()));
      observed.push_back(r.val_loss());
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNonPositiveEffectiveRatio) throw;
      ++complete.skipped;
    }
  }
  complete.n_points = observed.size();
  if (observed.size() >= 2) {
    complete.r_squared = optional_r_squared(observed, predicted, config.delta);
    double hub = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
      hub += huber(predicted[i] - observed[i], config.delta);
    }
    complete.huber = hub / static_cast<double>(observed.size());
  }

  return ClimbFit{std::move(model), std::move(mono_reports), std::move(ratio_reports),
                  std::move(transfer_report), complete, tail.size(), total_skipped};
}

}  // namespace climb
