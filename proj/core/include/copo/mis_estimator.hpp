#pragma once

// Truncated balance-heuristic multiple importance sampling over a History,
// with the adaptive truncation threshold and exponential confidence bounds.

#include <cstddef>
#include <optional>
#include <span>

#include "copo/arm.hpp"
#include "copo/dists.hpp"
#include "copo/history.hpp"

namespace copo {

/// Known payoff range [min, max]; enables clipping of the confidence bounds.
struct PayoffRange {
  double min = 0.0;
  double max = 1.0;
};

/// Which log term appears in the truncation threshold.
enum class ThresholdLog {
  two_over_delta,  // M_t = sqrt(t d2 / log(2/delta)), matching the bound expressions
  one_over_delta,  // M_N = sqrt(N d2 / log(1/delta))
};

struct EstimatorOptions {
  double payoff_bound = 1.0;  // ||f||_inf, declared by the environment
  std::optional<PayoffRange> payoff_range;
  Renyi2Mode d2_mode = Renyi2Mode::component_bound;
  ThresholdLog threshold_log = ThresholdLog::two_over_delta;
  Renyi2Options renyi;
};

/// Estimate and confidence interval for one target arm at one step.
///
/// `lower`/`upper` are the unclipped bounds: upper - mu_hat = a*beta and
/// mu_hat - lower = b*beta hold exactly. `clipped_lower`/`clipped_upper` are
/// intersected with the payoff range when one is declared, and equal the raw
/// bounds otherwise.
struct EstimateBundle {
  std::size_t t = 0;
  double mu_hat = 0.0;
  double d2 = 1.0;
  double threshold = 0.0;
  double beta = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double clipped_lower = 0.0;
  double clipped_upper = 0.0;
  double delta_t = 0.0;
  double payoff_bound = 1.0;
  bool certified = true;  // false when d2 came from a plug-in estimate
};

/// a = ||f|| (sqrt 2 + 4/3), the upper-bound width constant.
double upper_width_constant(double payoff_bound);
/// b = ||f|| (sqrt 2 + 1/3), the lower-bound width constant.
double lower_width_constant(double payoff_bound);

/// Adaptive truncation threshold (n d2 / log(2/delta))^{1/2}.
/// DomainError unless 0 < delta < 1, n >= 1 and d2 >= 1.
double truncation_threshold(std::size_t n, double d2, double delta,
                            ThresholdLog form = ThresholdLog::two_over_delta);

/// Truncated balance-heuristic estimate
///   (1/t) sum_k min{M, omega_k} f(z_k),   omega_k = p_x(z_k) / Phi_t(z_k),
/// with Phi_t = (1/t) sum_j p_{x_j}. For M = +inf this is the plain BH estimate
/// sum_k p_x(z_k) / sum_j p_{x_j}(z_k) f(z_k).
double truncated_bh_estimate(const History& history, const Arm& target, double threshold);

/// Same, from precomputed log p_x(z_k).
double truncated_bh_estimate(const History& history, std::span<const double> target_log_density,
                             double threshold);

/// d2(p_target || Phi_t) by the configured route.
/// component_bound: min over played arms a of d2(p_target || p_a) * t / count(a).
/// monte_carlo: plug-in mean of omega_k^2 over the stored samples (not certified).
Renyi2Result history_renyi2(const History& history, const Arm& target, Renyi2Mode mode,
                            const Renyi2Options& options = {});

/// mu_hat, d2, M_t and the bounds U = mu_hat + a beta, L = mu_hat - b beta,
/// beta = (d2 log(2/delta_t) / t)^{1/2}.
EstimateBundle confidence_interval(const History& history, const Arm& target, double delta_t,
                                   const EstimatorOptions& options);

}  // namespace copo
