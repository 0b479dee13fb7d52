#pragma once

// Full experiment runs: step 0 plays the baseline, then T selection/draw steps.
// Produces per-step traces, regret metrics, and the published regret bounds.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "copo/arm.hpp"
#include "copo/conservative.hpp"
#include "copo/environments.hpp"
#include "copo/history.hpp"
#include "copo/mis_estimator.hpp"

namespace copo {

enum class Algorithm {
  optimist,  // unconstrained OPTIMIST
  copo,      // Conservative OPTIMIST
  icopo,     // Improved Conservative OPTIMIST (safe set)
  icopo2,    // Improved Conservative OPTIMIST on a refining grid (compact arm space)
  baseline,  // always the baseline arm
};

std::string to_string(Algorithm algorithm);
Algorithm parse_algorithm(const std::string& name);
std::string to_string(BudgetMode mode);
BudgetMode parse_budget_mode(const std::string& name);
std::string to_string(Renyi2Mode mode);
Renyi2Mode parse_renyi2_mode(const std::string& name);

struct RunConfig {
  Algorithm algorithm = Algorithm::copo;
  std::size_t horizon = 1000;  // T
  double alpha = 0.1;
  double delta = 0.1;
  std::uint64_t seed = 0;
  std::optional<std::size_t> checkpoint_period;
  BudgetMode budget_mode = BudgetMode::paper_exact;
  std::optional<Arm> baseline;         // environment default when empty
  std::optional<double> baseline_mu;   // environment oracle when empty
  Renyi2Mode d2_mode = Renyi2Mode::component_bound;
  ThresholdLog threshold_log = ThresholdLog::two_over_delta;
  bool clip_to_payoff_range = true;
  // paper_exact is refused above this horizon unless allow_long_exact is set.
  std::size_t exact_horizon_limit = 5000;
  bool allow_long_exact = false;
  std::size_t max_grid_points = 1000000;

  /// Canonical text of every field except the seed; hashed into run metadata.
  std::string canonical(const std::string& env_name) const;
};

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string config_hash(const std::string& canonical_text);

struct TraceRow {
  std::size_t t = 0;
  long long arm_id = 0;
  Arm arm;
  double payoff = 0.0;
  double mu_true = 0.0;      // NaN without an oracle
  double budget_lcb = 0.0;   // NaN at step 0 and for the baseline-only algorithm
  double budget_exact = 0.0; // sum_{i<=t} mu(x_i) - (1 - alpha)(t + 1) mu_b
  bool safe = true;
  long long optimist_arm_id = 0;
  double delta_t = 0.0;      // NaN at step 0
  // Not exported to CSV.
  double chosen_upper = 0.0;
  double chosen_d2 = 1.0;
  double wall_time_s = 0.0;
};

struct RunTrace {
  std::string env_name;
  Algorithm algorithm = Algorithm::copo;
  std::uint64_t seed = 0;
  std::string config_hash;
  double alpha = 0.0;
  double delta = 0.0;
  Arm baseline;
  double baseline_mu = 0.0;
  std::optional<double> optimal_mu;
  std::vector<TraceRow> rows;  // T + 1 rows when valid
  bool valid = true;
  std::string error;
  double wall_time_s = 0.0;

  std::size_t horizon() const { return rows.empty() ? 0 : rows.size() - 1; }
  /// Running max of the played arm's d2, the empirical surrogate for v_eps.
  double empirical_v_eps() const;
  /// Every row satisfies budget_exact >= -tolerance.
  bool constraint_satisfied(double tolerance = 1e-9) const;
  double min_budget_exact() const;
};

/// Receives the history the selection was made on, before the draw.
using StepObserver = std::function<void(const History&, const Selection&)>;

/// Runs one algorithm on one environment. Estimator or selection failures stop
/// the run and return the partial trace with valid = false; configuration errors throw.
RunTrace run(const Environment& env, const RunConfig& config, const StepObserver& observer = {});

/// Independent runs over the given configs, at most `jobs` at a time.
std::vector<RunTrace> run_batch(const Environment& env, const std::vector<RunConfig>& configs,
                                std::size_t jobs = 1);

struct RegretMetrics {
  double optimal_mu = 0.0;
  double regret = 0.0;                     // Regret(T) = sum_{t=0}^{T} (mu* - mu(x_t))
  std::vector<double> cumulative;          // Regret(t), t = 0..T
  std::vector<double> regret_over_sqrt_t;  // Regret(t)/sqrt(t); entry 0 is NaN
  std::size_t baseline_plays = 0;          // T_b(T), including step 0
  std::map<long long, std::size_t> pulls;  // T_k(T) by arm id
  std::map<long long, double> gaps;        // Delta_k by arm id
};

/// Needs mu_true on every row (PreconditionError otherwise).
RegretMetrics regret_metrics(const RunTrace& trace, double optimal_mu);

enum class BoundCase { discrete, compact };

struct BoundConstants {
  double payoff_bound = 1.0;  // ||f||_inf
  double v_eps = 1.0;         // uniform d2 bound (empirical surrogate in practice)
  double delta = 0.1;
  double alpha = 0.1;
  double baseline_mu = 1.0;
  double baseline_gap = 0.0;  // Delta_b
  std::size_t arm_count = 1;  // K, discrete case
  std::size_t dim = 1;        // d, compact case
  double half_width = 1.0;    // D, compact case
  double lipschitz = 0.0;     // P, compact case
};

/// L = (a+b)^2 v_eps [2 log T + log(pi^2 K / (3 delta))].
double bound_constant_discrete(const BoundConstants& c, std::size_t horizon);
/// L' = ((a+b) v_eps^{1/2} [(2 + d/2) log T + d log 2 + log(pi^2/(3 delta))]^{1/2} + P D d)^2.
double bound_constant_compact(const BoundConstants& c, std::size_t horizon);

struct BoundTerms {
  double constant = 0.0;       // L or L'
  double baseline_gap = 0.0;   // Delta_b
  double sqrt_term = 0.0;      // 2 sqrt(L T)
  double baseline_term = 0.0;  // ||f|| Delta_b/(alpha mu_b)
  double arm_term = 0.0;       // 4 K L/(alpha mu_b) or 8 L'/(alpha mu_b)
  double total() const { return baseline_gap + sqrt_term + baseline_term + arm_term; }
};

BoundTerms theoretical_bound_terms(const BoundConstants& c, std::size_t horizon, BoundCase which);

/// discrete: Delta_b + 2 sqrt(L T) + ||f|| Delta_b/(alpha mu_b) + 4 K L/(alpha mu_b)
/// compact:  Delta_b + 2 sqrt(L' T) + ||f|| Delta_b/(alpha mu_b) + 8 L'/(alpha mu_b)
/// DomainError when alpha <= 0 or mu_b <= 0.
double theoretical_bound(const BoundConstants& c, std::size_t horizon, BoundCase which);

}  // namespace copo
