#include "copo/history.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "copo/errors.hpp"
#include "numeric.hpp"

namespace copo {

History::History(LocationFamily family) : family_(std::move(family)) {}

std::size_t History::find(const Arm& x) const {
  auto it = index_.find(x);
  return it == index_.end() ? npos : it->second;
}

std::size_t History::track(const Arm& x) {
  if (auto found = find(x); found != npos) return found;
  const DiagGaussian dist = family_.at(x);
  std::vector<double> row;
  row.reserve(samples_.capacity());
  for (const auto& z : samples_) row.push_back(dist.log_density(z));
  const std::size_t a = arms_.size();
  arms_.push_back(x);
  dists_.push_back(dist);
  index_.emplace(x, a);
  counts_.push_back(0);
  log_density_.push_back(std::move(row));
  return a;
}

void History::append(const Arm& x, std::vector<double> z, double payoff) {
  if (z.size() != family_.dim()) {
    throw PreconditionError("History::append: sample has dimension " + std::to_string(z.size()) +
                            ", family has " + std::to_string(family_.dim()));
  }
  if (!std::isfinite(payoff)) throw PreconditionError("History::append: payoff must be finite");
  const std::size_t a = track(x);

  std::vector<double> lp(arms_.size());
  detail::LogSumExp denom;
  for (std::size_t b = 0; b < arms_.size(); ++b) {
    lp[b] = dists_[b].log_density(z);
    const std::size_t n = counts_[b] + (b == a ? 1 : 0);
    if (n > 0) denom.add(std::log(static_cast<double>(n)) + lp[b]);
  }
  const double log_den = denom.value();
  if (!(log_den > -std::numeric_limits<double>::infinity())) {
    throw DegenerateSupportError("History::append: every behavior density vanishes at the sample");
  }

  // The new play adds p_a(z_k) to every existing denominator.
  const auto& row_a = log_density_[a];
  for (std::size_t k = 0; k < log_denominator_.size(); ++k) {
    log_denominator_[k] = detail::log_add_exp(log_denominator_[k], row_a[k]);
  }
  ++counts_[a];
  for (std::size_t b = 0; b < arms_.size(); ++b) log_density_[b].push_back(lp[b]);
  log_denominator_.push_back(log_den);
  for (std::size_t i = 0; i < grid_z_.size(); ++i) {
    const double zi[1] = {grid_z_[i]};
    grid_log_sum_[i] = detail::log_add_exp(grid_log_sum_[i], dists_[a].log_density(zi));
  }
  played_.push_back(a);
  samples_.push_back(std::move(z));
  payoffs_.push_back(payoff);
}

double History::cross_density(std::size_t j, std::size_t k) const {
  return std::exp(log_density_[played_.at(j)].at(k));
}

double History::mixture_denominator(std::size_t k) const {
  return std::exp(log_denominator_.at(k));
}

std::vector<double> History::log_densities_of(const Arm& x) const {
  if (auto a = find(x); a != npos) return log_density_[a];
  const DiagGaussian dist = family_.at(x);
  std::vector<double> out;
  out.reserve(samples_.size());
  for (const auto& z : samples_) out.push_back(dist.log_density(z));
  return out;
}

Mixture History::behavior_mixture() const {
  if (empty()) throw PreconditionError("History::behavior_mixture: empty history");
  std::vector<DiagGaussian> comps;
  std::vector<double> weights;
  const double t = static_cast<double>(size());
  for (std::size_t a = 0; a < arms_.size(); ++a) {
    if (counts_[a] == 0) continue;
    comps.push_back(dists_[a]);
    weights.push_back(static_cast<double>(counts_[a]) / t);
  }
  // Renormalize away rounding so the mixture invariant holds at 1e-12.
  double total = 0.0;
  for (double w : weights) total += w;
  for (double& w : weights) w /= total;
  return Mixture(std::move(comps), std::move(weights));
}

void History::enable_density_grid(double lo, double hi, std::size_t points) {
  if (family_.dim() != 1) throw CapabilityError("History::enable_density_grid: one-dimensional only");
  if (!(lo < hi) || points < 3) {
    throw PreconditionError("History::enable_density_grid: need lo < hi and at least 3 points");
  }
  grid_h_ = (hi - lo) / static_cast<double>(points - 1);
  grid_z_.resize(points);
  grid_log_sum_.assign(points, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < points; ++i) {
    grid_z_[i] = lo + grid_h_ * static_cast<double>(i);
    const double zi[1] = {grid_z_[i]};
    detail::LogSumExp acc;
    for (std::size_t a = 0; a < arms_.size(); ++a) {
      if (counts_[a] == 0) continue;
      acc.add(std::log(static_cast<double>(counts_[a])) + dists_[a].log_density(zi));
    }
    grid_log_sum_[i] = acc.value();
  }
}

}  // namespace copo
