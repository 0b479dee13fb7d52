#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "copo/arm.hpp"
#include "copo/dists.hpp"

namespace copo {

/// Append-only record of plays (x_k, z_k, f(z_k)) with cached behavior densities.
///
/// Densities are kept per distinct ("tracked") arm rather than per play: play j
/// of arm a has cross density p_{x_j}(z_k) = row(a)[k], and the balance-heuristic
/// denominator sum_j p_{x_j}(z_k) = sum_a count(a) p_a(z_k). Everything is stored
/// in log space so that far-tail samples keep a finite, exact denominator.
///
/// Appending a play costs one density evaluation per tracked arm plus one
/// log-add per stored sample. Tracking a new arm costs one density evaluation
/// per stored sample.
///
/// Single writer. Const access is safe from many threads.
class History {
 public:
  explicit History(LocationFamily family);

  const LocationFamily& family() const { return family_; }

  /// Number of plays t.
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }

  /// Index of x in the tracked-arm table, registering it if needed.
  std::size_t track(const Arm& x);
  /// Tracked index of x, or npos.
  std::size_t find(const Arm& x) const;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  void append(const Arm& x, std::vector<double> z, double payoff);

  std::size_t tracked_count() const { return arms_.size(); }
  const Arm& tracked_arm(std::size_t a) const { return arms_[a]; }
  const DiagGaussian& tracked_distribution(std::size_t a) const { return dists_[a]; }
  std::size_t play_count(std::size_t a) const { return counts_[a]; }
  std::span<const double> log_density_row(std::size_t a) const { return log_density_[a]; }

  /// Tracked index of the arm played at step k.
  std::size_t played_index(std::size_t k) const { return played_[k]; }
  const Arm& played_arm(std::size_t k) const { return arms_[played_[k]]; }
  std::span<const double> sample(std::size_t k) const { return samples_[k]; }
  double payoff(std::size_t k) const { return payoffs_[k]; }
  std::span<const double> payoffs() const { return payoffs_; }

  /// p_{x_j}(z_k).
  double cross_density(std::size_t j, std::size_t k) const;
  /// sum_j p_{x_j}(z_k).
  double mixture_denominator(std::size_t k) const;
  double log_mixture_denominator(std::size_t k) const { return log_denominator_[k]; }
  std::span<const double> log_mixture_denominators() const { return log_denominator_; }

  /// log p_x(z_k) for every stored sample; reuses the cached row when x is tracked.
  std::vector<double> log_densities_of(const Arm& x) const;

  /// Phi_t = (1/t) sum_k p_{x_k}, grouped by distinct played arm.
  Mixture behavior_mixture() const;

  /// Tabulates log sum_k p_{x_k}(z) on `points` evenly spaced z in [lo, hi] and keeps
  /// it current on every append (one density per grid point). One-dimensional only.
  void enable_density_grid(double lo, double hi, std::size_t points);
  bool has_density_grid() const { return !grid_z_.empty(); }
  std::span<const double> grid_points() const { return grid_z_; }
  double grid_spacing() const { return grid_h_; }
  std::span<const double> log_grid_sums() const { return grid_log_sum_; }

 private:
  LocationFamily family_;
  std::vector<Arm> arms_;
  std::vector<DiagGaussian> dists_;
  std::map<Arm, std::size_t> index_;
  std::vector<std::size_t> counts_;
  std::vector<std::vector<double>> log_density_;  // [tracked arm][sample]

  std::vector<std::size_t> played_;
  std::vector<std::vector<double>> samples_;
  std::vector<double> payoffs_;
  std::vector<double> log_denominator_;

  std::vector<double> grid_z_;
  double grid_h_ = 0.0;
  std::vector<double> grid_log_sum_;
};

}  // namespace copo
