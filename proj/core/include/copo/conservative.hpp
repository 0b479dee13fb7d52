#pragma once

// Conservative constraint machinery and the three arm-selection procedures.
//
// Every selector is a pure function of (history, arm set, config, schedule, t).
// The baseline arm is pinned: its upper and lower bounds both equal the known
// baseline mean. Argmax ties go to the lowest candidate index.

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "copo/arm.hpp"
#include "copo/history.hpp"
#include "copo/mis_estimator.hpp"

namespace copo {

enum class BudgetMode {
  paper_exact,  // recompute every past arm's lower bound with the current history and delta_t
  frozen,       // each past arm keeps the lower bound it had when played
};

struct ConservativeConfig {
  double alpha = 0.1;
  Arm baseline_arm;
  double baseline_mu = 0.0;
  std::optional<std::size_t> checkpoint_period;
  BudgetMode budget_mode = BudgetMode::paper_exact;

  // PreconditionError on alpha outside [0,1], empty baseline or a zero checkpoint period.
  void validate() const;
};

enum class ScheduleCase { discrete, compact };

/// Confidence schedule delta_t and discretization schedule tau_t.
///   discrete: delta_t = 6 delta / (t^2 pi^2 K)
///   compact:  delta_t = 6 delta / (t^2 pi^2 (1 + ceil(sqrt t)^d)),  tau_t = ceil(sqrt t)
class Schedules {
 public:
  static Schedules discrete(double delta, std::size_t arm_count);
  static Schedules compact(double delta, std::size_t dim);

  ScheduleCase kind() const { return kind_; }
  double global_delta() const { return delta_; }
  std::size_t arm_count_or_dim() const { return size_; }

  double delta_at(std::size_t t) const;
  std::size_t tau_at(std::size_t t) const;
  /// Number of arms the union bound covers at step t (K, or 1 + tau_t^d).
  double arms_covered(std::size_t t) const;
  /// sum_{t=1}^{horizon} arms_covered(t) * delta_t; never exceeds global_delta.
  double union_bound_mass(std::size_t horizon) const;

 private:
  Schedules(ScheduleCase kind, double delta, std::size_t size);
  ScheduleCase kind_;
  double delta_;
  std::size_t size_;
};

/// ceil(sqrt(t)) in exact integer arithmetic.
std::size_t ceil_sqrt(std::size_t t);

double confidence_schedule(std::size_t t, const Schedules& schedules);

/// Running record of lower bounds cached at play time (frozen budget mode).
class BudgetState {
 public:
  void record(double lower_bound_at_play) {
    frozen_sum_ += lower_bound_at_play;
    ++plays_;
  }
  double frozen_sum() const { return frozen_sum_; }
  std::size_t plays() const { return plays_; }

 private:
  double frozen_sum_ = 0.0;
  std::size_t plays_ = 0;
};

/// Bounds used for decisions: pinned for the baseline, range-clipped otherwise.
struct ArmBounds {
  double upper = 0.0;  // unclipped; clipping would only add argmax ties
  double lower = 0.0;  // clipped to the payoff range when one is configured
  std::optional<EstimateBundle> bundle;  // empty for the pinned baseline
  bool pinned = false;
};

/// Evaluates and caches arm bounds for one step t = history.size().
class StepEvaluator {
 public:
  StepEvaluator(const History& history, const ConservativeConfig& config,
                const EstimatorOptions& estimator, double delta_t,
                const BudgetState* budget_state = nullptr);

  std::size_t t() const { return history_.size(); }
  double delta_t() const { return delta_t_; }
  const ArmBounds& bounds(const Arm& x);

  /// sum_{i<t} L_t(x_i): recomputed (paper_exact) or cached at play time (frozen).
  double past_lower_sum();
  /// B_t(x) = past_lower_sum + L_t(x) - (1 - alpha)(t + 1) mu_b.
  double budget_lower_bound(const Arm& candidate);
  /// Budget plus checkpoint slack when a checkpoint period is configured.
  double safety_margin(const Arm& candidate);

 private:
  const History& history_;
  const ConservativeConfig& config_;
  const EstimatorOptions& estimator_;
  double delta_t_;
  const BudgetState* budget_state_;
  std::map<Arm, ArmBounds> cache_;
  std::optional<double> past_sum_;
};

double budget_lower_bound(const History& history, const Arm& candidate,
                          const ConservativeConfig& config, double delta_t,
                          const EstimatorOptions& estimator,
                          const BudgetState* budget_state = nullptr);

/// alpha ((k+1) C - 1 - t) mu_b with phase k = floor(t / C). Zero when no period is set.
double checkpoint_slack(std::size_t t, const ConservativeConfig& config);

struct SafeSetEntry {
  Arm arm;
  double budget_lower_bound = 0.0;
  double upper = 0.0;
  bool member = false;
};

struct SafeSet {
  std::vector<SafeSetEntry> candidates;
  std::size_t member_count() const;
};

struct SelectionDiagnostics {
  std::size_t t = 0;
  double delta_t = 0.0;
  Arm optimist;               // unconstrained argmax of the upper bound
  double optimist_upper = 0.0;
  Arm chosen;
  double chosen_upper = 0.0;  // upper bound of the arm actually played
  double chosen_lower = 0.0;
  double chosen_d2 = 1.0;     // 1 for the pinned baseline
  double budget_lcb = 0.0;    // B_t (plus slack) of the arm the safety test was applied to
  bool safe = true;           // false when the procedure fell back to the baseline
  std::size_t candidate_count = 0;
};

struct Selection {
  Arm arm;
  SelectionDiagnostics diagnostics;
  SafeSet safe_set;  // filled by the safe-set procedures only
};

/// Unconstrained OPTIMIST: argmax of the upper bound.
Selection select_optimist(const History& history, const DiscreteArms& arms,
                          const ConservativeConfig& config, const Schedules& schedules,
                          const EstimatorOptions& estimator);

/// Conservative OPTIMIST: play the optimist arm when its budget lower bound is
/// nonnegative, the baseline otherwise.
Selection select_conservative_optimist(const History& history, const DiscreteArms& arms,
                                       const ConservativeConfig& config,
                                       const Schedules& schedules,
                                       const EstimatorOptions& estimator,
                                       const BudgetState* budget_state = nullptr);

/// Improved Conservative OPTIMIST: argmax of the upper bound over the safe set
/// {x : B_t(x) >= 0}; the baseline when the safe set is empty.
Selection select_improved_conservative(const History& history, const DiscreteArms& arms,
                                       const ConservativeConfig& config,
                                       const Schedules& schedules,
                                       const EstimatorOptions& estimator,
                                       const BudgetState* budget_state = nullptr);

/// Cell centers of a uniform tau^d grid on the box, lexicographic order.
/// ResourceError when tau^d exceeds max_points.
DiscreteArms discretize_box(const Box& box, std::size_t tau, std::size_t max_points = 1000000);

/// Improved Conservative OPTIMIST on grid(tau_t) plus the baseline, compact schedule.
Selection select_discretized_conservative(const History& history, const Box& box,
                                          const ConservativeConfig& config,
                                          const Schedules& schedules,
                                          const EstimatorOptions& estimator,
                                          const BudgetState* budget_state = nullptr,
                                          std::size_t max_grid_points = 1000000);

}  // namespace copo
