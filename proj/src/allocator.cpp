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

#include "climb/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "climb/parallel.hpp"
#include "climb/scaling_law.hpp"

namespace climb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_budget(double token_budget) {
  if (!(token_budget > 0.0) || !std::isfinite(token_budget)) {
    throw Error(ErrorCode::kNonPositiveTokens,
                fmt::format("token budget must be positive, got {}", token_budget));
  }
}

// exp(logs) scaled to sum to one; -inf entries give exactly zero.
std::vector<double> normalized_exp(const std::vector<double>& logs) {
  const double peak = *std::max_element(logs.begin(), logs.end());
  std::vector<double> out(logs.size(), 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    if (logs[i] == -kInf) continue;
    out[i] = std::exp(logs[i] - peak);
    sum += out[i];
  }
  for (auto& v : out) v /= sum;
  return out;
}

void require_size(const ClimbModel& model, std::size_t n, const char* what) {
  if (n != model.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("{} has {} entries for {} languages", what, n, model.size()));
  }
}

// Effective ratios and their derivatives at a fixed budget.
class Evaluator {
 public:
  Evaluator(const ClimbModel& model, std::vector<double> direction, double token_budget,
            double rho)
      : m_(model.size()),
        alpha_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m_),
                                     static_cast<Eigen::Index>(m_))),
        eta_(model.transfer().eta()),
        p_(std::move(direction)),
        rho_(rho) {
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < m_; ++j) {
        if (i != j) {
          alpha_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
              model.transfer().alpha(i, j, token_budget);
        }
      }
    }
  }

  std::size_t size() const { return m_; }

  void effective(std::span<const double> r, std::vector<double>& eff,
                 std::vector<double>& transfer_sum) const {
    eff.resize(m_);
    transfer_sum.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < m_; ++j) {
        if (j != i) s += alpha(i, j) * r[j];
      }
      transfer_sum[i] = s;
      eff[i] = r[i] + s * -std::expm1(-eta_[i] * r[i]);
    }
  }

  double objective_from_effective(std::span<const double> eff) const {
    double total = 0.0;
    for (double e : eff) total += e;
    if (!(total > 0.0)) return kInf;
    double penalty = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      const double d = eff[i] / total - p_[i];
      penalty += d * d;
    }
    return -total + rho_ * penalty;
  }

  double objective(std::span<const double> r) const {
    std::vector<double> eff, s;
    effective(r, eff, s);
    return objective_from_effective(eff);
  }

  double barrier_value(std::span<const double> r, double mu) const {
    std::vector<double> eff, s;
    effective(r, eff, s);
    double log_sum = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      const double a = r[i] - kBarrierEpsilon;
      const double b = eff[i] - kBarrierEpsilon;
      if (!(a > 0.0) || !(b > 0.0)) return kInf;
      log_sum += std::log(a) + std::log(b);
    }
    return objective_from_effective(eff) - mu * log_sum;
  }

  // Gradient of the barrier function with respect to every share.
  std::vector<double> barrier_gradient(std::span<const double> r, double mu) const {
    std::vector<double> eff, s;
    effective(r, eff, s);
    double total = 0.0;
    for (double e : eff) total += e;
    double cross = 0.0;
    for (std::size_t i = 0; i < m_; ++i) cross += (eff[i] / total - p_[i]) * eff[i] / total;
    std::vector<double> g_eff(m_);
    for (std::size_t k = 0; k < m_; ++k) {
      g_eff[k] = -1.0 + 2.0 * rho_ / total * ((eff[k] / total - p_[k]) - cross) -
                 mu / (eff[k] - kBarrierEpsilon);
    }
    std::vector<double> grad(m_);
    for (std::size_t j = 0; j < m_; ++j) {
      double g = g_eff[j] * (1.0 + s[j] * eta_[j] * std::exp(-eta_[j] * r[j]));
      for (std::size_t k = 0; k < m_; ++k) {
        if (k != j) g += g_eff[k] * alpha(k, j) * -std::expm1(-eta_[k] * r[k]);
      }
      grad[j] = g - mu / (r[j] - kBarrierEpsilon);
    }
    return grad;
  }

  bool interior(std::span<const double> r) const {
    std::vector<double> eff, s;
    effective(r, eff, s);
    for (std::size_t i = 0; i < m_; ++i) {
      if (!(r[i] > kBarrierEpsilon) || !(eff[i] > kBarrierEpsilon)) return false;
    }
    return true;
  }

  std::optional<std::size_t> first_violation(std::span<const double> r) const {
    std::vector<double> eff, s;
    effective(r, eff, s);
    for (std::size_t i = 0; i < m_; ++i) {
      if (!(r[i] > kBarrierEpsilon) || !(eff[i] > kBarrierEpsilon)) return i;
    }
    return std::nullopt;
  }

 private:
  double alpha(std::size_t i, std::size_t j) const {
    return alpha_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  std::size_t m_;
  Eigen::MatrixXd alpha_;
  std::vector<double> eta_;
  std::vector<double> p_;
  double rho_;
};

// The simplex with coordinate `dependent` eliminated: r_dep = 1 - sum(x).
class ReducedProblem {
 public:
  ReducedProblem(const Evaluator& ev, std::size_t dependent, double mu)
      : ev_(ev), dep_(dependent), mu_(mu) {}

  std::vector<double> full(const Eigen::VectorXd& x) const {
    std::vector<double> r(ev_.size());
    double sum = 0.0;
    Eigen::Index c = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i == dep_) continue;
      r[i] = x(c++);
      sum += r[i];
    }
    r[dep_] = 1.0 - sum;
    return r;
  }

  Eigen::VectorXd reduce(std::span<const double> r) const {
    Eigen::VectorXd x(static_cast<Eigen::Index>(r.size() - 1));
    Eigen::Index c = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i != dep_) x(c++) = r[i];
    }
    return x;
  }

  double value(const Eigen::VectorXd& x) const { return ev_.barrier_value(full(x), mu_); }

  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const {
    const auto g = ev_.barrier_gradient(full(x), mu_);
    Eigen::VectorXd out(x.size());
    Eigen::Index c = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (i != dep_) out(c++) = g[i] - g[dep_];
    }
    return out;
  }

  // Smallest linear slack r_i - epsilon over all coordinates.
  double slack(const Eigen::VectorXd& x) const {
    const auto r = full(x);
    double s = kInf;
    for (double v : r) s = std::min(s, v - kBarrierEpsilon);
    return s;
  }

  // Central differences of the analytic gradient, step 1e-6 relative.
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const {
    const Eigen::Index n = x.size();
    Eigen::MatrixXd H(n, n);
    const double cap = 1e-3 * slack(x);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double h = std::min(1e-6 * std::max(std::abs(x(j)), 1e-12), cap);
      Eigen::VectorXd up = x, down = x;
      up(j) += h;
      down(j) -= h;
      H.col(j) = (gradient(up) - gradient(down)) / (2.0 * h);
    }
    return 0.5 * (H + H.transpose());
  }

  // Largest tau in (0, 1] keeping every share at least 1% of its slack
  // away from the bound along `step`.
  double fraction_to_boundary(const Eigen::VectorXd& x, const Eigen::VectorXd& step) const {
    const auto r = full(x);
    std::vector<double> dr(r.size());
    double sum = 0.0;
    Eigen::Index c = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i == dep_) continue;
      dr[i] = step(c++);
      sum += dr[i];
    }
    dr[dep_] = -sum;
    double tau = 1.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (dr[i] < 0.0) tau = std::min(tau, -0.99 * (r[i] - kBarrierEpsilon) / dr[i]);
    }
    return tau;
  }

 private:
  const Evaluator& ev_;
  std::size_t dep_;
  double mu_;
};

Eigen::VectorXd dogleg(const Eigen::VectorXd& g, Eigen::MatrixXd& H, double radius) {
  Eigen::LLT<Eigen::MatrixXd> llt(H);
  if (llt.info() != Eigen::Success) {
    const Eigen::Index n = H.rows();
    double tau = std::max(1e-10, 1e-8 * H.cwiseAbs().maxCoeff());
    for (int attempt = 0; attempt < 60; ++attempt) {
      Eigen::MatrixXd shifted = H + tau * Eigen::MatrixXd::Identity(n, n);
      llt.compute(shifted);
      if (llt.info() == Eigen::Success) {
        H = shifted;
        break;
      }
      tau *= 10.0;
    }
  }
  const double gnorm = g.norm();
  if (llt.info() != Eigen::Success) return -radius * g / gnorm;
  const Eigen::VectorXd newton = -llt.solve(g);
  if (newton.norm() <= radius) return newton;
  const double ghg = g.dot(H * g);
  const Eigen::VectorXd cauchy = -(g.squaredNorm() / ghg) * g;
  if (cauchy.norm() >= radius) return -radius * g / gnorm;
  const Eigen::VectorXd diff = newton - cauchy;
  const double a = diff.squaredNorm();
  const double b = 2.0 * cauchy.dot(diff);
  const double c = cauchy.squaredNorm() - radius * radius;
  const double s = (-b + std::sqrt(b * b - 4.0 * a * c)) / (2.0 * a);
  return cauchy + s * diff;
}

struct StartOutcome {
  bool feasible = false;
  std::vector<double> mixture;
  double objective = kInf;
};

// One barrier stage: trust-region iterations at fixed mu.
Eigen::VectorXd solve_stage(const ReducedProblem& problem, Eigen::VectorXd x, double mu,
                            const OptimizerConfig& config) {
  const double gtol = std::max(config.tolerance, mu);
  double radius = config.trust_radius_initial;
  double f = problem.value(x);
  for (int iter = 0; iter < 500; ++iter) {
    const Eigen::VectorXd g = problem.gradient(x);
    if (!g.allFinite() || g.lpNorm<Eigen::Infinity>() <= gtol) break;
    Eigen::MatrixXd H = problem.hessian(x);
    if (!H.allFinite()) break;
    Eigen::VectorXd step = dogleg(g, H, radius);
    step *= problem.fraction_to_boundary(x, step);
    const double predicted = -(g.dot(step) + 0.5 * step.dot(H * step));
    const Eigen::VectorXd trial = x + step;
    const double f_trial = problem.value(trial);
    const double ratio = predicted > 0.0 ? (f - f_trial) / predicted : -1.0;
    if (!std::isfinite(f_trial) || ratio < 0.25) {
      radius = 0.25 * step.norm();
    } else if (ratio > 0.75 && step.norm() >= 0.99 * radius) {
      radius = std::min(2.0 * radius, 1.0);
    }
    if (std::isfinite(f_trial) && ratio > 1e-4) {
      x = trial;
      f = f_trial;
    }
    if (radius < 1e-18) break;
  }
  return x;
}

StartOutcome run_start(const Evaluator& ev, std::vector<double> r, const OptimizerConfig& config) {
  const std::size_t m = ev.size();
  for (int nudge = 0; nudge < 64; ++nudge) {
    const auto bad = ev.first_violation(r);
    if (!bad) break;
    for (std::size_t i = 0; i < m; ++i) r[i] = 0.5 * (r[i] + (i == *bad ? 1.0 : 0.0));
  }
  if (!ev.interior(r)) return StartOutcome{};

  double mu = config.barrier_initial;
  for (int stage = 1;; ++stage) {
    if (stage > config.max_outer) {
      throw Error(ErrorCode::kNoConvergence,
                  fmt::format("barrier parameter still {} after {} stages", mu, config.max_outer));
    }
    const auto dependent =
        static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
    const ReducedProblem problem(ev, dependent, mu);
    r = problem.full(solve_stage(problem, problem.reduce(r), mu, config));
    if (mu * 2.0 * static_cast<double>(m) <= config.tolerance) break;
    mu *= config.barrier_shrink;
  }
  return StartOutcome{true, r, ev.objective(r)};
}

std::vector<std::vector<double>> starting_points(std::span<const double> direction,
                                                 const OptimizerConfig& config) {
  const std::size_t m = direction.size();
  const double u = 1.0 / static_cast<double>(m);
  std::vector<std::vector<double>> raw;
  raw.emplace_back(direction.begin(), direction.end());
  raw.emplace_back(m, u);
  std::mt19937_64 rng(config.seed);
  std::exponential_distribution<double> expo(1.0);
  for (int s = 0; s < config.random_starts; ++s) {
    std::vector<double> v(m);
    double sum = 0.0;
    for (auto& x : v) sum += (x = expo(rng));
    for (auto& x : v) x /= sum;
    raw.push_back(std::move(v));
  }
  for (auto& v : raw) {
    for (auto& x : v) x = 0.999 * x + 0.001 * u;
  }
  return raw;
}

// Objective at an exact candidate, or nothing when a positive share has a
// non-positive effective ratio.
std::optional<double> candidate_objective(const Evaluator& ev, std::span<const double> r) {
  std::vector<double> eff, s;
  ev.effective(r, eff, s);
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] > 0.0 && !(eff[i] > kBarrierEpsilon)) return std::nullopt;
    if (r[i] < 0.0) return std::nullopt;
  }
  const double f = ev.objective_from_effective(eff);
  if (!std::isfinite(f)) return std::nullopt;
  return f;
}

}  // namespace

void OptimizerConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::kInvalidArgument, what); };
  if (!(rho >= 0.0) || !std::isfinite(rho)) bad("rho must be nonnegative");
  if (!(barrier_initial > 0.0)) bad("barrier_initial must be positive");
  if (!(barrier_shrink > 0.0 && barrier_shrink < 1.0)) bad("barrier_shrink must lie in (0, 1)");
  if (!(trust_radius_initial > 0.0)) bad("trust_radius_initial must be positive");
  if (max_outer < 1) bad("max_outer must be at least 1");
  if (!(tolerance > 0.0)) bad("tolerance must be positive");
  if (random_starts < 0) bad("random_starts must be nonnegative");
}

std::vector<double> closed_form_direction(const ClimbModel& model,
                                          const ImportanceWeights& weights,
                                          double token_budget) {
  require_budget(token_budget);
  require_size(model, weights.size(), "importance weights");
  const std::size_t m = model.size();
  const double log_d = std::log(token_budget);
  std::vector<double> logs(m, -kInf);
  for (std::size_t i = 0; i < m; ++i) {
    if (weights[i] <= 0.0) continue;
    const auto& p = model.mono(i);
    logs[i] = (std::log(weights[i] * p.B() * p.beta()) - p.beta() * log_d) / (p.beta() + 1.0);
  }
  return normalized_exp(logs);
}

std::vector<double> optimal_direction(const ClimbModel& model, const ImportanceWeights& weights,
                                      double token_budget) {
  require_budget(token_budget);
  require_size(model, weights.size(), "importance weights");
  const std::size_t m = model.size();
  const double log_d = std::log(token_budget);
  // Stationarity: omega_i B_i beta_i D^-beta_i x_i^-(beta_i+1) = lambda.
  // With u = log lambda, log x_i = (log a_i - u) / (beta_i + 1) and u is the
  // root of sum_i x_i(u) = 1, which is decreasing in u.
  std::vector<double> log_a(m, -kInf), power(m, 1.0);
  std::size_t active = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (weights[i] <= 0.0) continue;
    const auto& p = model.mono(i);
    log_a[i] = std::log(weights[i] * p.B() * p.beta()) - p.beta() * log_d;
    power[i] = 1.0 / (p.beta() + 1.0);
    ++active;
  }
  if (active == 0) throw Error(ErrorCode::kAllWeightsZero, "all importance weights are zero");
  auto shares = [&](double u) {
    std::vector<double> logs(m, -kInf);
    for (std::size_t i = 0; i < m; ++i) {
      if (log_a[i] != -kInf) logs[i] = (log_a[i] - u) * power[i];
    }
    return logs;
  };
  auto excess = [&](double u) {
    double total = 0.0;
    for (double l : shares(u)) total += std::exp(l);
    return total - 1.0;
  };
  // Some share exceeds 1 at lo; every share is below 1/active at hi.
  double lo = -kInf, hi = -kInf;
  for (std::size_t i = 0; i < m; ++i) {
    if (log_a[i] == -kInf) continue;
    lo = std::max(lo, log_a[i] - 1.0);
    hi = std::max(hi, log_a[i] + std::log(static_cast<double>(active)) / power[i] + 1.0);
  }
  double u = lo;
  if (active > 1) {
    std::uintmax_t iters = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(
        excess, lo, hi, excess(lo), excess(hi), boost::math::tools::eps_tolerance<double>(52),
        iters);
    u = 0.5 * (a + b);
  }
  return normalized_exp(shares(u));
}

double magnitude_objective(const ClimbModel& model, std::span<const double> direction,
                           std::span<const double> mixture, double token_budget, double rho) {
  require_budget(token_budget);
  require_size(model, direction.size(), "direction");
  require_size(model, mixture.size(), "mixture");
  const Evaluator ev(model, std::vector<double>(direction.begin(), direction.end()),
                     token_budget, rho);
  return ev.objective(mixture);
}

AllocationResult optimize_allocation(const ClimbModel& model, const ImportanceWeights& weights,
                                     double token_budget, const OptimizerConfig& config) {
  config.validate();
  const std::size_t m = model.size();
  if (m < 2) throw Error(ErrorCode::kInvalidArgument, "allocation needs at least two languages");
  const auto direction = optimal_direction(model, weights, token_budget);
  const Evaluator ev(model, direction, token_budget, config.rho);

  const auto starts = starting_points(direction, config);
  std::vector<StartOutcome> outcomes(starts.size());
  parallel_for(starts.size(), config.workers,
               [&](std::size_t s) { outcomes[s] = run_start(ev, starts[s], config); });

  std::optional<std::size_t> best;
  for (std::size_t s = 0; s < outcomes.size(); ++s) {
    if (!outcomes[s].feasible || !std::isfinite(outcomes[s].objective)) continue;
    if (!best || outcomes[s].objective < outcomes[*best].objective) best = s;
  }
  if (!best) {
    throw Error(ErrorCode::kInfeasibleStart,
                "no start reaches a point where every effective ratio is positive");
  }
  std::vector<double> r = outcomes[*best].mixture;
  double f = outcomes[*best].objective;

  // The exact direction and the uniform point compete with the optimized
  // result; agreement within rounding keeps the exact point.
  const std::vector<double> uniform(m, 1.0 / static_cast<double>(m));
  for (const auto* candidate : {&direction, &uniform}) {
    const auto fc = candidate_objective(ev, *candidate);
    if (fc && *fc <= f + 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(f))) {
      r = *candidate;
      f = *fc;
    }
  }

  AllocationResult result{direction, ProportionVector::make(r), {}, {}, f, 0.0,
                          config.rho, token_budget};
  result.effective_ratios = predicted_ratios(model, result.allocation, token_budget);
  result.predicted_losses.resize(m);
  double weighted = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double e = result.effective_ratios[i];
    const auto& p = model.mono(i);
    result.predicted_losses[i] =
        e > kMinEffectiveRatio ? p.B() / std::pow(token_budget * e, p.beta()) + p.E() : kInf;
    if (weights[i] > 0.0) weighted += weights[i] * result.predicted_losses[i];
  }
  result.weighted_loss = weighted;
  return result;
}

GridOracleResult grid_oracle(const ClimbModel& model, const ImportanceWeights& weights,
                             double token_budget, double resolution, unsigned workers) {
  require_budget(token_budget);
  require_size(model, weights.size(), "importance weights");
  if (!(resolution > 0.0 && resolution <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "resolution must lie in (0, 1]");
  }
  const double steps_real = 1.0 / resolution;
  const auto steps = static_cast<long>(std::llround(steps_real));
  if (std::abs(steps_real - static_cast<double>(steps)) > 1e-9 * steps_real) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("resolution {} does not divide 1 into whole steps", resolution));
  }
  const std::size_t m = model.size();
  // C(steps + m - 1, m - 1), stopping early once past the guard.
  double lattice = 1.0;
  for (std::size_t j = 1; j < m; ++j) {
    lattice = lattice * static_cast<double>(steps + static_cast<long>(j)) / static_cast<double>(j);
    if (lattice > static_cast<double>(kMaxLatticePoints) + 0.5) {
      throw Error(ErrorCode::kTooManyLatticePoints,
                  fmt::format("resolution {} with {} languages exceeds {} lattice points",
                              resolution, m, kMaxLatticePoints));
    }
  }
  const auto lattice_points = static_cast<std::size_t>(std::llround(lattice));

  struct Chunk {
    std::optional<ProportionVector> best;
    double objective = kInf;
    std::size_t evaluated = 0;
  };
  std::vector<Chunk> chunks(static_cast<std::size_t>(steps) + 1);
  const double n = static_cast<double>(steps);
  parallel_for(chunks.size(), workers, [&](std::size_t first) {
    Chunk& chunk = chunks[first];
    std::vector<long> counts(m, 0);
    counts[0] = static_cast<long>(first);
    const long rest = steps - counts[0];
    if (m == 1) {
      if (rest != 0) return;
    } else {
      counts[m - 1] = rest;
    }
    std::vector<double> values(m);
    while (true) {
      for (std::size_t i = 0; i < m; ++i) values[i] = static_cast<double>(counts[i]) / n;
      const auto mixture = ProportionVector::make(values);
      try {
        const double obj = weighted_objective(model, weights, mixture, token_budget);
        ++chunk.evaluated;
        if (obj < chunk.objective) {
          chunk.objective = obj;
          chunk.best = mixture;
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNonPositiveEffectiveRatio) throw;
      }
      // Lexicographic successor among coordinates 1..m-1: bump the rightmost
      // position in [1, m-2] whose suffix holds mass, then refill the suffix.
      if (m <= 2) break;
      std::size_t pos = m - 2;
      long after = counts[m - 1];
      bool done = false;
      while (after == 0) {
        if (pos == 1) {
          done = true;
          break;
        }
        after += counts[pos];
        --pos;
      }
      if (done) break;
      ++counts[pos];
      for (std::size_t i = pos + 1; i + 1 < m; ++i) counts[i] = 0;
      counts[m - 1] = after - 1;
    }
  });

  GridOracleResult out{ProportionVector::uniform(m), kInf, resolution, 0, lattice_points};
  bool found = false;
  for (auto& chunk : chunks) {
    out.evaluated_count += chunk.evaluated;
    if (chunk.best && chunk.objective < out.best_objective) {
      out.best_objective = chunk.objective;
      out.best_mixture = *chunk.best;
      found = true;
    }
  }
  if (!found) {
    throw Error(ErrorCode::kInfeasibleStart,
                "no lattice point gives every weighted language a positive effective ratio");
  }
  return out;
}

ProportionVector baseline_allocation(BaselineKind kind, const ClimbModel& model,
                                     const ImportanceWeights& weights, double token_budget,
                                     const std::optional<std::vector<double>>& natural_counts) {
  const std::size_t m = model.size();
  switch (kind) {
    case BaselineKind::kUniform:
      return ProportionVector::uniform(m);
    case BaselineKind::kIsolated: {
      const auto p = optimal_direction(model.without_transfer(), weights, token_budget);
      return ProportionVector::make(p);
    }
    case BaselineKind::kNatural: {
      if (!natural_counts) {
        throw Error(ErrorCode::kMissingNaturalCounts, "natural baseline needs corpus counts");
      }
      require_size(model, natural_counts->size(), "natural counts");
      double total = 0.0;
      for (double c : *natural_counts) {
        if (!(c >= 0.0) || !std::isfinite(c)) {
          throw Error(ErrorCode::kNegativeEntry, "natural counts must be nonnegative");
        }
        total += c;
      }
      if (!(total > 0.0)) {
        throw Error(ErrorCode::kMissingNaturalCounts, "natural counts are all zero");
      }
      std::vector<double> shares(m);
      for (std::size_t i = 0; i < m; ++i) shares[i] = (*natural_counts)[i] / total;
      return ProportionVector::make(shares);
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown baseline kind");
}

std::vector<std::pair<double, double>> magnitude_profile(const ClimbModel& model,
                                                         std::span<const double> direction,
                                                         double token_budget,
                                                         std::span<const double> c_values) {
  require_budget(token_budget);
  require_size(model, direction.size(), "direction");
  std::vector<std::pair<double, double>> out;
  out.reserve(c_values.size());
  for (double c : c_values) {
    double total = 0.0;
    for (std::size_t i = 0; i < direction.size(); ++i) {
      const double share = c * direction[i];
      if (!(share > 0.0)) {
        throw Error(ErrorCode::kInvalidArgument,
                    fmt::format("c * p_{} = {} is not positive", i, share));
      }
      const auto& p = model.mono(i);
      total += p.B() / std::pow(token_budget * share, p.beta());
    }
    out.emplace_back(c, total);
  }
  return out;
}

}  // namespace climb
