#include "copo/mis_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "copo/errors.hpp"

namespace copo {

namespace {

double log_inverse_delta(double delta, ThresholdLog form) {
  return form == ThresholdLog::two_over_delta ? std::log(2.0 / delta) : std::log(1.0 / delta);
}

void require_probability(double delta, const char* what) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw DomainError(std::string(what) + ": delta must lie in (0, 1)");
  }
}

// Borrowed view of log p_x(z_k): the cached row when x is tracked, else computed.
struct TargetLogDensity {
  TargetLogDensity(const History& h, const Arm& x) {
    if (auto a = h.find(x); a != History::npos) {
      view = h.log_density_row(a);
    } else {
      owned = h.log_densities_of(x);
      view = owned;
    }
  }
  std::vector<double> owned;
  std::span<const double> view;
};

}  // namespace

double upper_width_constant(double payoff_bound) {
  return payoff_bound * (std::numbers::sqrt2 + 4.0 / 3.0);
}

double lower_width_constant(double payoff_bound) {
  return payoff_bound * (std::numbers::sqrt2 + 1.0 / 3.0);
}

double truncation_threshold(std::size_t n, double d2, double delta, ThresholdLog form) {
  require_probability(delta, "truncation_threshold");
  if (n == 0) throw DomainError("truncation_threshold: n must be >= 1");
  if (!(d2 >= 1.0)) throw DomainError("truncation_threshold: d2 must be >= 1");
  return std::sqrt(static_cast<double>(n) * d2 / log_inverse_delta(delta, form));
}

double truncated_bh_estimate(const History& history, std::span<const double> target_log_density,
                             double threshold) {
  if (history.empty()) throw PreconditionError("truncated_bh_estimate: empty history");
  if (target_log_density.size() != history.size()) {
    throw PreconditionError("truncated_bh_estimate: one log density per stored sample required");
  }
  if (!(threshold > 0.0)) throw DomainError("truncated_bh_estimate: threshold must be > 0");
  const auto log_den = history.log_mixture_denominators();
  const auto payoffs = history.payoffs();
  const double t = static_cast<double>(history.size());
  const double log_t = std::log(t);
  double sum = 0.0;
  for (std::size_t k = 0; k < log_den.size(); ++k) {
    if (!(log_den[k] > -std::numeric_limits<double>::infinity())) {
      throw DegenerateSupportError("truncated_bh_estimate: zero mixture denominator");
    }
    // omega_k = t * p_x(z_k) / sum_j p_{x_j}(z_k)
    const double omega = std::exp(target_log_density[k] - log_den[k] + log_t);
    sum += std::min(threshold, omega) * payoffs[k];
  }
  return sum / t;
}

double truncated_bh_estimate(const History& history, const Arm& target, double threshold) {
  if (history.empty()) throw PreconditionError("truncated_bh_estimate: empty history");
  TargetLogDensity lp(history, target);
  return truncated_bh_estimate(history, lp.view, threshold);
}

namespace {

double component_bound_from_history(const History& history, const DiagGaussian& target) {
  const double t = static_cast<double>(history.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < history.tracked_count(); ++a) {
    const std::size_t n = history.play_count(a);
    if (n == 0) continue;
    try {
      const double d2 = renyi2_closed_form(target, history.tracked_distribution(a));
      best = std::min(best, d2 * t / static_cast<double>(n));
    } catch (const DomainError&) {
    }
  }
  return best;
}

Renyi2Result plug_in_from_history(const History& history, std::span<const double> lp) {
  const auto log_den = history.log_mixture_denominators();
  const double t = static_cast<double>(history.size());
  const double log_t = std::log(t);
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t k = 0; k < lp.size(); ++k) {
    const double w = std::exp(lp[k] - log_den[k] + log_t);
    const double x = w * w;
    const double d = x - mean;
    mean += d / static_cast<double>(k + 1);
    m2 += d * (x - mean);
  }
  const double se = lp.size() > 1 ? std::sqrt(m2 / (t - 1.0) / t) : 0.0;
  return {mean, se};
}

// Trapezoid rule on the history's density grid; empty when the grid does not
// cover the target's +-10 sigma window.
std::optional<double> grid_renyi2(const History& history, const DiagGaussian& target) {
  if (!history.has_density_grid()) return std::nullopt;
  const auto z = history.grid_points();
  const double m = target.mean()[0];
  const double s = target.stddev()[0];
  if (m - 10.0 * s < z.front() || m + 10.0 * s > z.back()) return std::nullopt;
  const auto log_sum = history.log_grid_sums();
  const double log_t = std::log(static_cast<double>(history.size()));
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double zi[1] = {z[i]};
    const double term = std::exp(2.0 * target.log_density(zi) - log_sum[i] + log_t);
    total += (i == 0 || i + 1 == z.size()) ? 0.5 * term : term;
  }
  return total * history.grid_spacing();
}

}  // namespace

Renyi2Result history_renyi2(const History& history, const Arm& target, Renyi2Mode mode,
                            const Renyi2Options& options) {
  if (history.empty()) throw PreconditionError("history_renyi2: empty history");
  const DiagGaussian p = history.family().at(target);
  switch (mode) {
    case Renyi2Mode::component_bound:
      return {component_bound_from_history(history, p), 0.0};
    case Renyi2Mode::monte_carlo: {
      TargetLogDensity lp(history, target);
      return plug_in_from_history(history, lp.view);
    }
    case Renyi2Mode::quadrature:
      if (auto v = grid_renyi2(history, p)) return {*v, 0.0};
      return renyi2(p, history.behavior_mixture(), mode, options);
    case Renyi2Mode::closed_form:
      return renyi2(p, history.behavior_mixture(), mode, options);
  }
  throw CapabilityError("history_renyi2: unknown mode");
}

EstimateBundle confidence_interval(const History& history, const Arm& target, double delta_t,
                                   const EstimatorOptions& options) {
  if (history.empty()) throw PreconditionError("confidence_interval: empty history");
  require_probability(delta_t, "confidence_interval");
  if (!(options.payoff_bound > 0.0)) {
    throw DomainError("confidence_interval: payoff bound must be > 0");
  }

  TargetLogDensity lp(history, target);
  EstimateBundle out;
  out.t = history.size();
  out.delta_t = delta_t;
  out.payoff_bound = options.payoff_bound;

  Renyi2Result d2;
  if (options.d2_mode == Renyi2Mode::monte_carlo) {
    d2 = plug_in_from_history(history, lp.view);
    out.certified = false;
  } else {
    d2 = history_renyi2(history, target, options.d2_mode, options.renyi);
  }
  out.d2 = std::max(1.0, d2.value);

  const double t = static_cast<double>(out.t);
  const double log_term = std::log(2.0 / delta_t);
  if (std::isinf(out.d2)) {
    out.threshold = std::numeric_limits<double>::infinity();
    out.beta = std::numeric_limits<double>::infinity();
  } else {
    out.threshold = truncation_threshold(out.t, out.d2, delta_t, options.threshold_log);
    out.beta = std::sqrt(out.d2 * log_term / t);
  }
  out.mu_hat = truncated_bh_estimate(history, lp.view, out.threshold);
  out.upper = out.mu_hat + upper_width_constant(options.payoff_bound) * out.beta;
  out.lower = out.mu_hat - lower_width_constant(options.payoff_bound) * out.beta;
  out.clipped_lower = out.lower;
  out.clipped_upper = out.upper;
  if (options.payoff_range) {
    out.clipped_lower = std::clamp(out.lower, options.payoff_range->min, options.payoff_range->max);
    out.clipped_upper = std::clamp(out.upper, options.payoff_range->min, options.payoff_range->max);
  }
  return out;
}

}  // namespace copo
