#include "copo/inventory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "copo/errors.hpp"

namespace copo {

void InventoryConfig::validate() const {
  if (capacity < 1) throw PreconditionError("inventory: capacity must be >= 1");
  if (horizon < 1) throw PreconditionError("inventory: horizon must be >= 1");
  if (initial_stock < 0 || initial_stock > capacity) {
    throw PreconditionError("inventory: initial stock must lie in [0, capacity]");
  }
  if (!demand_pmf.empty()) {
    if (demand_pmf.size() != static_cast<std::size_t>(capacity) + 1) {
      throw PreconditionError("inventory: demand pmf needs capacity + 1 entries");
    }
    double total = 0.0;
    for (double p : demand_pmf) {
      if (!(p >= 0.0)) throw PreconditionError("inventory: demand pmf must be nonnegative");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw PreconditionError("inventory: demand pmf must sum to 1");
  }
}

std::vector<double> InventoryConfig::demand_distribution() const {
  if (!demand_pmf.empty()) return demand_pmf;
  return std::vector<double>(static_cast<std::size_t>(capacity) + 1, 1.0 / (capacity + 1));
}

ThresholdPolicy::ThresholdPolicy(int threshold_, int target_, int capacity)
    : threshold(threshold_), target(target_) {
  if (!(0 <= threshold && threshold <= target && target <= capacity)) {
    throw PreconditionError("ThresholdPolicy: requires 0 <= sigma <= Sigma <= capacity");
  }
}

ThresholdPolicy ThresholdPolicy::from_params(std::span<const double> theta, int capacity) {
  if (theta.size() != 2) throw PreconditionError("ThresholdPolicy::from_params: theta must be 2-d");
  auto round_clamp = [capacity](double v) {
    if (!std::isfinite(v)) throw PreconditionError("ThresholdPolicy::from_params: non-finite theta");
    const double r = std::round(v);
    return static_cast<int>(std::clamp(r, 0.0, static_cast<double>(capacity)));
  };
  const int target = round_clamp(theta[1]);
  const int threshold = std::min(round_clamp(theta[0]), target);
  return ThresholdPolicy(threshold, target, capacity);
}

InventoryModel::InventoryModel(InventoryConfig config) : config_(std::move(config)) {
  config_.validate();
  demand_pmf_ = config_.demand_distribution();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  const int m = config_.capacity;
  for (int s = 0; s <= m; ++s) {
    for (int a = 0; a + s <= m; ++a) {
      for (int d = 0; d <= m; ++d) {
        if (demand_pmf_[d] <= 0.0) continue;
        const double r = step_reward(s, a, d);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
    }
  }
  if (!(hi > lo)) throw PreconditionError("inventory: per-step reward range is degenerate");
  return_min_ = config_.horizon * lo;
  return_max_ = config_.horizon * hi;
}

double InventoryModel::step_reward(int stock, int order, int demand) const {
  const auto& c = config_.costs;
  const int on_hand = stock + order;
  const int sold = std::min(on_hand, demand);
  const double order_cost = order > 0 ? c.fixed_order + c.unit_order * order : 0.0;
  return c.revenue * sold - order_cost - c.holding * on_hand;
}

double InventoryModel::normalize(double raw_return) const {
  return (raw_return - return_min_) / (return_max_ - return_min_);
}

InventoryEpisode InventoryModel::episode_with_demands(const ThresholdPolicy& policy,
                                                      std::span<const int> demands) const {
  if (demands.size() != static_cast<std::size_t>(config_.horizon)) {
    throw PreconditionError("episode_with_demands: one demand per month required");
  }
  InventoryEpisode ep;
  ep.steps.reserve(demands.size());
  int stock = config_.initial_stock;
  for (int demand : demands) {
    if (demand < 0 || demand > config_.capacity) {
      throw PreconditionError("episode_with_demands: demand outside [0, capacity]");
    }
    InventoryStep st;
    st.stock = stock;
    st.order = policy.order(stock);
    st.demand = demand;
    st.reward = step_reward(stock, st.order, demand);
    st.next_stock = std::max(0, stock + st.order - demand);
    ep.raw_return += st.reward;
    stock = st.next_stock;
    ep.steps.push_back(st);
  }
  ep.normalized_return = normalize(ep.raw_return);
  return ep;
}

InventoryEpisode InventoryModel::episode(const ThresholdPolicy& policy, Rng& rng) const {
  std::discrete_distribution<int> demand(demand_pmf_.begin(), demand_pmf_.end());
  std::vector<int> demands(static_cast<std::size_t>(config_.horizon));
  for (auto& d : demands) d = demand(rng);
  return episode_with_demands(policy, demands);
}

double InventoryModel::trajectory_probability(const InventoryEpisode& episode,
                                              const ThresholdPolicy& policy) const {
  double p = 1.0;
  for (const auto& st : episode.steps) {
    if (st.order != policy.order(st.stock)) return 0.0;
    const int on_hand = st.stock + st.order;
    if (st.next_stock > 0) {
      p *= demand_pmf_[on_hand - st.next_stock];
    } else {
      double tail = 0.0;
      for (int d = on_hand; d <= config_.capacity; ++d) tail += demand_pmf_[d];
      p *= tail;
    }
  }
  return p;
}

PolicyValueTable::PolicyValueTable(int capacity, std::vector<double> values)
    : capacity_(capacity), values_(std::move(values)) {
  const auto n = static_cast<std::size_t>(capacity_ + 1);
  if (values_.size() != n * n) throw PreconditionError("PolicyValueTable: wrong table size");
}

double PolicyValueTable::at(int threshold, int target) const {
  if (target < 0 || target > capacity_ || threshold < 0 || threshold > capacity_) {
    throw PreconditionError("PolicyValueTable::at: parameters outside [0, capacity]");
  }
  threshold = std::min(threshold, target);
  return values_[static_cast<std::size_t>(threshold) * (capacity_ + 1) + target];
}

ThresholdPolicy PolicyValueTable::argmax() const {
  ThresholdPolicy best(0, 0, capacity_);
  double best_value = at(0, 0);
  for (int sigma = 0; sigma <= capacity_; ++sigma) {
    for (int target = sigma; target <= capacity_; ++target) {
      if (at(sigma, target) > best_value) {
        best_value = at(sigma, target);
        best = ThresholdPolicy(sigma, target, capacity_);
      }
    }
  }
  return best;
}

double dp_policy_value(const InventoryModel& model, const ThresholdPolicy& policy) {
  const auto& cfg = model.config();
  const auto pmf = cfg.demand_distribution();
  const int m = cfg.capacity;
  std::vector<double> next(static_cast<std::size_t>(m) + 1, 0.0);
  std::vector<double> cur(next.size());
  for (int h = 0; h < cfg.horizon; ++h) {
    for (int s = 0; s <= m; ++s) {
      const int a = policy.order(s);
      double v = 0.0;
      for (int d = 0; d <= m; ++d) {
        if (pmf[d] == 0.0) continue;
        v += pmf[d] * (model.step_reward(s, a, d) + next[std::max(0, s + a - d)]);
      }
      cur[s] = v;
    }
    std::swap(cur, next);
  }
  return model.normalize(next[cfg.initial_stock]);
}

PolicyValueTable dp_policy_values(const InventoryModel& model) {
  const int m = model.config().capacity;
  const auto n = static_cast<std::size_t>(m + 1);
  std::vector<double> values(n * n, std::numeric_limits<double>::quiet_NaN());
  for (int sigma = 0; sigma <= m; ++sigma) {
    for (int target = sigma; target <= m; ++target) {
      values[sigma * n + target] = dp_policy_value(model, ThresholdPolicy(sigma, target, m));
    }
  }
  return PolicyValueTable(m, std::move(values));
}

double hyperpolicy_weight(const LocationFamily& family, const Arm& xi_target,
                          const Arm& xi_behavior, std::span<const double> theta) {
  return std::exp(family.at(xi_target).log_density(theta) -
                  family.at(xi_behavior).log_density(theta));
}

InventoryHyperpolicyEnv::InventoryHyperpolicyEnv(InventoryConfig config, DiscreteArms arms,
                                                 double hyper_stddev, Arm baseline)
    : model_(std::move(config)),
      values_(dp_policy_values(model_)),
      space_(std::move(arms)),
      family_(std::vector<double>{hyper_stddev, hyper_stddev}),
      baseline_(std::move(baseline)) {
  const auto& list = std::get<DiscreteArms>(space_);
  if (list.empty()) throw PreconditionError("inventory: arm set is empty");
  for (const auto& a : list) {
    if (a.dim() != 2) throw PreconditionError("inventory: arms are 2-d (sigma, Sigma) means");
  }
  require_baseline_in_space(space_, baseline_);
}

std::pair<std::vector<double>, InventoryEpisode> InventoryHyperpolicyEnv::draw_episode(
    const Arm& x, Rng& rng) const {
  auto theta = family_.at(x).sample(rng);
  const auto policy = ThresholdPolicy::from_params(theta, model_.config().capacity);
  auto ep = model_.episode(policy, rng);
  return {std::move(theta), std::move(ep)};
}

Draw InventoryHyperpolicyEnv::draw(const Arm& x, Rng& rng) const {
  auto [theta, ep] = draw_episode(x, rng);
  return Draw{std::move(theta), ep.normalized_return};
}

std::vector<double> InventoryHyperpolicyEnv::rounding_pmf(double mean) const {
  const int m = model_.config().capacity;
  const double s = family_.stddev()[0];
  auto cdf = [&](double v) { return 0.5 * std::erfc(-(v - mean) / (s * std::sqrt(2.0))); };
  std::vector<double> pmf(static_cast<std::size_t>(m) + 1);
  for (int i = 0; i <= m; ++i) {
    const double lo = i == 0 ? 0.0 : cdf(i - 0.5);
    const double hi = i == m ? 1.0 : cdf(i + 0.5);
    pmf[i] = hi - lo;
  }
  return pmf;
}

std::optional<double> InventoryHyperpolicyEnv::mu(const Arm& x) const {
  if (x.dim() != 2) throw PreconditionError("inventory: arms are 2-d");
  const auto p_threshold = rounding_pmf(x[0]);
  const auto p_target = rounding_pmf(x[1]);
  double mu = 0.0;
  for (std::size_t i = 0; i < p_threshold.size(); ++i) {
    for (std::size_t j = 0; j < p_target.size(); ++j) {
      mu += p_threshold[i] * p_target[j] * values_.at(static_cast<int>(i), static_cast<int>(j));
    }
  }
  return mu;
}

std::optional<double> InventoryHyperpolicyEnv::optimal_mu() const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& a : std::get<DiscreteArms>(space_)) best = std::max(best, *mu(a));
  return best;
}

std::unique_ptr<InventoryHyperpolicyEnv> make_default_inventory(InventoryConfig config) {
  DiscreteArms arms;
  for (double sigma : {2.0, 3.0, 4.0}) {
    for (double target : {4.0, 5.0, 6.0}) arms.push_back(Arm{sigma, target});
  }
  return std::make_unique<InventoryHyperpolicyEnv>(std::move(config), std::move(arms), 0.5,
                                                   Arm{4.0, 4.0});
}

}  // namespace copo
