#pragma once

// Finite-horizon stochastic inventory control with (sigma, Sigma) threshold
// policies, an exact dynamic-programming value oracle, and the parameter-based
// hyperpolicy environment built on top of it.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "copo/environments.hpp"

namespace copo {

struct InventoryCosts {
  double revenue = 8.0;     // per unit sold
  double fixed_order = 4.0; // charged once whenever a > 0
  double unit_order = 2.0;  // per unit ordered
  double holding = 1.0;     // per unit on hand after delivery
};

struct InventoryConfig {
  int capacity = 6;
  int horizon = 10;
  int initial_stock = 0;
  InventoryCosts costs;
  // Demand pmf over {0, ..., capacity}; empty means uniform.
  std::vector<double> demand_pmf;

  // PreconditionError on inconsistent values.
  void validate() const;
  std::vector<double> demand_distribution() const;
};

/// Order up to `target` whenever stock falls below `threshold`.
struct ThresholdPolicy {
  int threshold = 0;  // sigma
  int target = 0;     // Sigma

  ThresholdPolicy() = default;
  // Requires 0 <= threshold <= target <= capacity.
  ThresholdPolicy(int threshold, int target, int capacity);

  int order(int stock) const { return stock < threshold ? target - stock : 0; }

  /// Round to nearest, clamp to [0, capacity], then threshold = min(threshold, target).
  /// The last step changes no decision: with s < sigma and s >= Sigma nothing is ordered.
  static ThresholdPolicy from_params(std::span<const double> theta, int capacity);

  friend bool operator==(const ThresholdPolicy&, const ThresholdPolicy&) = default;
};

struct InventoryStep {
  int stock = 0;
  int order = 0;
  int demand = 0;
  int next_stock = 0;
  double reward = 0.0;
};

struct InventoryEpisode {
  std::vector<InventoryStep> steps;
  double raw_return = 0.0;
  double normalized_return = 0.0;
};

class InventoryModel {
 public:
  explicit InventoryModel(InventoryConfig config);

  const InventoryConfig& config() const { return config_; }

  double step_reward(int stock, int order, int demand) const;
  /// Affine bounds on the episode return used for normalization to [0, 1].
  double return_min() const { return return_min_; }
  double return_max() const { return return_max_; }
  double normalize(double raw_return) const;

  InventoryEpisode episode(const ThresholdPolicy& policy, Rng& rng) const;
  InventoryEpisode episode_with_demands(const ThresholdPolicy& policy,
                                        std::span<const int> demands) const;

  /// p_theta(tau): probability of the (stock, order, next stock) sequence under the policy.
  double trajectory_probability(const InventoryEpisode& episode,
                                const ThresholdPolicy& policy) const;

 private:
  InventoryConfig config_;
  std::vector<double> demand_pmf_;
  double return_min_ = 0.0;
  double return_max_ = 1.0;
};

/// Exact expected normalized return of every threshold policy, indexed by (sigma, Sigma).
class PolicyValueTable {
 public:
  PolicyValueTable(int capacity, std::vector<double> values);

  int capacity() const { return capacity_; }
  /// Value of from_params-style (threshold, target); threshold is capped at target.
  double at(int threshold, int target) const;
  double at(const ThresholdPolicy& p) const { return at(p.threshold, p.target); }
  /// Best valid policy; ties go to the lexicographically smallest (sigma, Sigma).
  ThresholdPolicy argmax() const;

 private:
  int capacity_;
  std::vector<double> values_;  // (capacity+1)^2, row = threshold
};

/// Backward induction over the horizon for one policy.
double dp_policy_value(const InventoryModel& model, const ThresholdPolicy& policy);
PolicyValueTable dp_policy_values(const InventoryModel& model);

/// nu_target(theta) / nu_behavior(theta), computed in log space.
double hyperpolicy_weight(const LocationFamily& family, const Arm& xi_target,
                          const Arm& xi_behavior, std::span<const double> theta);

/// Parameter-based exploration on inventory control: arm xi is the mean of a
/// diagonal Gaussian hyperpolicy over theta = (sigma, Sigma); each draw samples
/// theta, runs one episode with the rounded threshold policy, and pays the
/// normalized return. z = theta; the trajectory factor cancels in every weight.
class InventoryHyperpolicyEnv final : public Environment {
 public:
  InventoryHyperpolicyEnv(InventoryConfig config, DiscreteArms arms, double hyper_stddev,
                          Arm baseline);

  std::string name() const override { return "inventory"; }
  const LocationFamily& family() const override { return family_; }
  const ArmSpace& arm_space() const override { return space_; }
  Arm default_baseline() const override { return baseline_; }
  Draw draw(const Arm& x, Rng& rng) const override;
  double payoff_bound() const override { return 1.0; }
  std::optional<PayoffRange> payoff_range() const override { return PayoffRange{0.0, 1.0}; }
  std::optional<double> mu(const Arm& x) const override;
  std::optional<double> optimal_mu() const override;

  const InventoryModel& model() const { return model_; }
  const PolicyValueTable& values() const { return values_; }

  /// One draw with the full episode retained.
  std::pair<std::vector<double>, InventoryEpisode> draw_episode(const Arm& x, Rng& rng) const;

  /// Probability that round-and-clamp maps theta ~ N(xi_i, s^2) to each integer in [0, capacity].
  std::vector<double> rounding_pmf(double mean) const;

 private:
  InventoryModel model_;
  PolicyValueTable values_;
  ArmSpace space_;
  LocationFamily family_;
  Arm baseline_;
};

/// Grid xi in {2,3,4} x {4,5,6}, hyperpolicy stddev 0.5, baseline (4, 4).
std::unique_ptr<InventoryHyperpolicyEnv> make_default_inventory(InventoryConfig config = {});

}  // namespace copo
