#include "copo/conservative.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "copo/errors.hpp"

namespace copo {

void ConservativeConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw PreconditionError("ConservativeConfig: alpha must lie in [0, 1]");
  }
  if (baseline_arm.dim() == 0) throw PreconditionError("ConservativeConfig: baseline arm is empty");
  if (!std::isfinite(baseline_mu)) {
    throw PreconditionError("ConservativeConfig: baseline mean must be finite");
  }
  if (checkpoint_period && *checkpoint_period == 0) {
    throw PreconditionError("ConservativeConfig: checkpoint period must be positive");
  }
}

std::size_t ceil_sqrt(std::size_t t) {
  if (t == 0) return 0;
  auto r = static_cast<std::size_t>(std::sqrt(static_cast<double>(t)));
  while (r * r > t) --r;
  while (r * r < t) ++r;
  return r;
}

Schedules::Schedules(ScheduleCase kind, double delta, std::size_t size)
    : kind_(kind), delta_(delta), size_(size) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("Schedules: delta must lie in (0, 1)");
  if (size == 0) throw PreconditionError("Schedules: arm count / dimension must be positive");
}

Schedules Schedules::discrete(double delta, std::size_t arm_count) {
  return Schedules(ScheduleCase::discrete, delta, arm_count);
}

Schedules Schedules::compact(double delta, std::size_t dim) {
  return Schedules(ScheduleCase::compact, delta, dim);
}

std::size_t Schedules::tau_at(std::size_t t) const {
  if (kind_ != ScheduleCase::compact) {
    throw PreconditionError("Schedules::tau_at: discretization schedule is compact-case only");
  }
  if (t == 0) throw PreconditionError("Schedules::tau_at: t must be >= 1");
  return ceil_sqrt(t);
}

double Schedules::arms_covered(std::size_t t) const {
  if (kind_ == ScheduleCase::discrete) return static_cast<double>(size_);
  return 1.0 + std::pow(static_cast<double>(tau_at(t)), static_cast<double>(size_));
}

double Schedules::delta_at(std::size_t t) const {
  if (t == 0) throw PreconditionError("Schedules::delta_at: t must be >= 1");
  const double tt = static_cast<double>(t);
  return 6.0 * delta_ / (tt * tt * std::numbers::pi * std::numbers::pi * arms_covered(t));
}

double Schedules::union_bound_mass(std::size_t horizon) const {
  double mass = 0.0;
  // Smallest terms first.
  for (std::size_t t = horizon; t >= 1; --t) mass += arms_covered(t) * delta_at(t);
  return mass;
}

double confidence_schedule(std::size_t t, const Schedules& schedules) {
  return schedules.delta_at(t);
}

StepEvaluator::StepEvaluator(const History& history, const ConservativeConfig& config,
                             const EstimatorOptions& estimator, double delta_t,
                             const BudgetState* budget_state)
    : history_(history),
      config_(config),
      estimator_(estimator),
      delta_t_(delta_t),
      budget_state_(budget_state) {
  if (history_.empty()) throw PreconditionError("StepEvaluator: history must be nonempty");
  if (config_.budget_mode == BudgetMode::frozen && budget_state_ == nullptr) {
    throw PreconditionError("StepEvaluator: frozen budget mode needs a BudgetState");
  }
}

const ArmBounds& StepEvaluator::bounds(const Arm& x) {
  if (auto it = cache_.find(x); it != cache_.end()) return it->second;
  ArmBounds b;
  if (x == config_.baseline_arm) {
    b.upper = b.lower = config_.baseline_mu;
    b.pinned = true;
  } else {
    b.bundle = confidence_interval(history_, x, delta_t_, estimator_);
    b.upper = b.bundle->upper;
    b.lower = b.bundle->clipped_lower;
  }
  return cache_.emplace(x, std::move(b)).first->second;
}

double StepEvaluator::past_lower_sum() {
  if (past_sum_) return *past_sum_;
  double sum = 0.0;
  if (config_.budget_mode == BudgetMode::frozen) {
    sum = budget_state_->frozen_sum();
  } else {
    for (std::size_t a = 0; a < history_.tracked_count(); ++a) {
      const std::size_t n = history_.play_count(a);
      if (n == 0) continue;
      sum += static_cast<double>(n) * bounds(history_.tracked_arm(a)).lower;
    }
  }
  past_sum_ = sum;
  return sum;
}

double StepEvaluator::budget_lower_bound(const Arm& candidate) {
  const double t = static_cast<double>(history_.size());
  return past_lower_sum() + bounds(candidate).lower -
         (1.0 - config_.alpha) * (t + 1.0) * config_.baseline_mu;
}

double StepEvaluator::safety_margin(const Arm& candidate) {
  return budget_lower_bound(candidate) + checkpoint_slack(history_.size(), config_);
}

double budget_lower_bound(const History& history, const Arm& candidate,
                          const ConservativeConfig& config, double delta_t,
                          const EstimatorOptions& estimator, const BudgetState* budget_state) {
  StepEvaluator eval(history, config, estimator, delta_t, budget_state);
  return eval.budget_lower_bound(candidate);
}

double checkpoint_slack(std::size_t t, const ConservativeConfig& config) {
  if (!config.checkpoint_period) return 0.0;
  const std::size_t period = *config.checkpoint_period;
  const std::size_t phase = t / period;
  const double remaining = static_cast<double>((phase + 1) * period - 1 - t);
  return config.alpha * remaining * config.baseline_mu;
}

std::size_t SafeSet::member_count() const {
  std::size_t n = 0;
  for (const auto& c : candidates) n += c.member ? 1 : 0;
  return n;
}

namespace {

void require_nonempty(const History& history, std::size_t arm_count, const char* what) {
  if (arm_count == 0) throw PreconditionError(std::string(what) + ": empty arm space");
  if (history.empty()) {
    throw PreconditionError(std::string(what) + ": step 0 plays the baseline; history must be nonempty");
  }
}

double d2_of(const ArmBounds& b) { return b.bundle ? b.bundle->d2 : 1.0; }

std::size_t argmax_upper(StepEvaluator& eval, const DiscreteArms& arms) {
  std::size_t best = 0;
  double best_upper = eval.bounds(arms[0]).upper;
  for (std::size_t i = 1; i < arms.size(); ++i) {
    const double u = eval.bounds(arms[i]).upper;
    if (u > best_upper) {
      best = i;
      best_upper = u;
    }
  }
  return best;
}

void fill_chosen(StepEvaluator& eval, const Arm& arm, SelectionDiagnostics& d) {
  const ArmBounds& b = eval.bounds(arm);
  d.chosen = arm;
  d.chosen_upper = b.upper;
  d.chosen_lower = b.lower;
  d.chosen_d2 = d2_of(b);
}

Selection select_from_safe_set(const History& history, const DiscreteArms& arms,
                               const ConservativeConfig& config, double delta_t,
                               const EstimatorOptions& estimator,
                               const BudgetState* budget_state) {
  StepEvaluator eval(history, config, estimator, delta_t, budget_state);
  Selection sel;
  auto& d = sel.diagnostics;
  d.t = history.size();
  d.delta_t = delta_t;
  d.candidate_count = arms.size();

  const std::size_t opt = argmax_upper(eval, arms);
  d.optimist = arms[opt];
  d.optimist_upper = eval.bounds(arms[opt]).upper;

  std::optional<std::size_t> best;
  double best_upper = 0.0;
  sel.safe_set.candidates.reserve(arms.size());
  for (std::size_t i = 0; i < arms.size(); ++i) {
    SafeSetEntry e;
    e.arm = arms[i];
    e.budget_lower_bound = eval.safety_margin(arms[i]);
    e.upper = eval.bounds(arms[i]).upper;
    e.member = e.budget_lower_bound >= 0.0;
    if (e.member && (!best || e.upper > best_upper)) {
      best = i;
      best_upper = e.upper;
    }
    sel.safe_set.candidates.push_back(std::move(e));
  }

  if (best) {
    sel.arm = arms[*best];
    d.safe = true;
    d.budget_lcb = sel.safe_set.candidates[*best].budget_lower_bound;
  } else {
    sel.arm = config.baseline_arm;
    d.safe = false;
    d.budget_lcb = eval.safety_margin(config.baseline_arm);
  }
  fill_chosen(eval, sel.arm, d);
  return sel;
}

}  // namespace

Selection select_optimist(const History& history, const DiscreteArms& arms,
                          const ConservativeConfig& config, const Schedules& schedules,
                          const EstimatorOptions& estimator) {
  require_nonempty(history, arms.size(), "select_optimist");
  const double delta_t = schedules.delta_at(history.size());
  // The budget is reported only; paper_exact keeps this independent of any BudgetState.
  ConservativeConfig cfg = config;
  cfg.budget_mode = BudgetMode::paper_exact;
  StepEvaluator eval(history, cfg, estimator, delta_t);
  Selection sel;
  auto& d = sel.diagnostics;
  d.t = history.size();
  d.delta_t = delta_t;
  d.candidate_count = arms.size();
  const std::size_t opt = argmax_upper(eval, arms);
  sel.arm = arms[opt];
  d.optimist = arms[opt];
  d.optimist_upper = eval.bounds(arms[opt]).upper;
  d.budget_lcb = eval.safety_margin(arms[opt]);
  d.safe = true;
  fill_chosen(eval, sel.arm, d);
  return sel;
}

Selection select_conservative_optimist(const History& history, const DiscreteArms& arms,
                                       const ConservativeConfig& config,
                                       const Schedules& schedules,
                                       const EstimatorOptions& estimator,
                                       const BudgetState* budget_state) {
  require_nonempty(history, arms.size(), "select_conservative_optimist");
  const double delta_t = schedules.delta_at(history.size());
  StepEvaluator eval(history, config, estimator, delta_t, budget_state);
  Selection sel;
  auto& d = sel.diagnostics;
  d.t = history.size();
  d.delta_t = delta_t;
  d.candidate_count = arms.size();

  const std::size_t opt = argmax_upper(eval, arms);
  d.optimist = arms[opt];
  d.optimist_upper = eval.bounds(arms[opt]).upper;
  d.budget_lcb = eval.safety_margin(arms[opt]);
  d.safe = d.budget_lcb >= 0.0;
  sel.arm = d.safe ? arms[opt] : config.baseline_arm;
  fill_chosen(eval, sel.arm, d);
  return sel;
}

Selection select_improved_conservative(const History& history, const DiscreteArms& arms,
                                       const ConservativeConfig& config,
                                       const Schedules& schedules,
                                       const EstimatorOptions& estimator,
                                       const BudgetState* budget_state) {
  require_nonempty(history, arms.size(), "select_improved_conservative");
  return select_from_safe_set(history, arms, config, schedules.delta_at(history.size()),
                              estimator, budget_state);
}

DiscreteArms discretize_box(const Box& box, std::size_t tau, std::size_t max_points) {
  if (tau == 0) throw PreconditionError("discretize_box: tau must be >= 1");
  if (box.dim == 0) throw PreconditionError("discretize_box: dimension must be >= 1");
  if (!(box.half_width > 0.0)) throw PreconditionError("discretize_box: half width must be > 0");
  std::size_t total = 1;
  for (std::size_t i = 0; i < box.dim; ++i) {
    if (total > max_points / tau) {
      throw ResourceError("discretize_box: tau^d exceeds the grid cap of " +
                          std::to_string(max_points) + " points");
    }
    total *= tau;
  }

  const double cell = 2.0 * box.half_width / static_cast<double>(tau);
  std::vector<double> axis(tau);
  for (std::size_t i = 0; i < tau; ++i) {
    axis[i] = -box.half_width + (static_cast<double>(i) + 0.5) * cell;
  }

  DiscreteArms grid;
  grid.reserve(total);
  std::vector<std::size_t> idx(box.dim, 0);
  for (std::size_t n = 0; n < total; ++n) {
    std::vector<double> p(box.dim);
    for (std::size_t i = 0; i < box.dim; ++i) p[i] = axis[idx[i]];
    grid.emplace_back(std::move(p));
    // Last axis varies fastest.
    for (std::size_t i = box.dim; i-- > 0;) {
      if (++idx[i] < tau) break;
      idx[i] = 0;
    }
  }
  return grid;
}

Selection select_discretized_conservative(const History& history, const Box& box,
                                          const ConservativeConfig& config,
                                          const Schedules& schedules,
                                          const EstimatorOptions& estimator,
                                          const BudgetState* budget_state,
                                          std::size_t max_grid_points) {
  if (schedules.kind() != ScheduleCase::compact) {
    throw PreconditionError("select_discretized_conservative: needs the compact-case schedule");
  }
  if (history.empty()) {
    throw PreconditionError("select_discretized_conservative: history must be nonempty");
  }
  const std::size_t t = history.size();
  DiscreteArms grid = discretize_box(box, schedules.tau_at(t), max_grid_points);
  bool has_baseline = false;
  for (const auto& x : grid) has_baseline = has_baseline || x == config.baseline_arm;
  if (!has_baseline) grid.push_back(config.baseline_arm);
  return select_from_safe_set(history, grid, config, schedules.delta_at(t), estimator,
                              budget_state);
}

}  // namespace copo
