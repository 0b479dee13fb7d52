#pragma once

// Diagonal Gaussian sampling families, finite mixtures of them, and the
// exponentiated 2-Renyi divergence d2(P||Q) = E_Q[(p/q)^2] computed by several
// independent routes.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "copo/arm.hpp"

namespace copo {

using Rng = std::mt19937_64;

/// Seeded stream. Identical (seed, stream) pairs yield identical draws.
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

class DiagGaussian {
 public:
  // Throws PreconditionError on size mismatch or a non-positive / non-finite stddev.
  DiagGaussian(std::vector<double> mean, std::vector<double> stddev);

  std::size_t dim() const { return mean_.size(); }
  std::span<const double> mean() const { return mean_; }
  std::span<const double> stddev() const { return stddev_; }

  double density(std::span<const double> z) const;
  // Exact in log space; finite for any finite z.
  double log_density(std::span<const double> z) const;

  std::vector<double> sample(Rng& rng) const;

  friend bool operator==(const DiagGaussian&, const DiagGaussian&) = default;

 private:
  std::vector<double> mean_;
  std::vector<double> stddev_;
  double log_norm_ = 0.0;  // -sum(log sigma_i) - dim/2 log(2 pi)
};

/// Location family: arm x maps to N(x, diag(stddev^2)).
class LocationFamily {
 public:
  explicit LocationFamily(std::vector<double> stddev);

  std::size_t dim() const { return stddev_.size(); }
  std::span<const double> stddev() const { return stddev_; }
  DiagGaussian at(const Arm& x) const;

 private:
  std::vector<double> stddev_;
};

/// Finite mixture sum_j w_j Q_j. Weights are nonnegative and sum to one.
class Mixture {
 public:
  Mixture(std::vector<DiagGaussian> components, std::vector<double> weights);
  // Equal weights.
  explicit Mixture(std::vector<DiagGaussian> components);

  std::size_t size() const { return components_.size(); }
  std::size_t dim() const { return components_.front().dim(); }
  const std::vector<DiagGaussian>& components() const { return components_; }
  const std::vector<double>& weights() const { return weights_; }

  double density(std::span<const double> z) const;
  double log_density(std::span<const double> z) const;
  std::vector<double> sample(Rng& rng) const;

 private:
  std::vector<DiagGaussian> components_;
  std::vector<double> weights_;
};

enum class Renyi2Mode { closed_form, quadrature, monte_carlo, component_bound };

struct Renyi2Options {
  std::size_t mc_samples = 100000;
  std::uint64_t mc_seed = 0;
  double quadrature_tolerance = 1e-9;
};

/// Value and (for monte_carlo) its standard error; std_error is 0 for deterministic routes.
struct Renyi2Result {
  double value = 1.0;
  double std_error = 0.0;
};

/// Closed form for diagonal Gaussians; requires 2 sigma_Q^2 > sigma_P^2 per axis
/// (DomainError otherwise, the integral diverges).
double renyi2_closed_form(const DiagGaussian& target, const DiagGaussian& behavior);

/// d2(P || Phi) by adaptive Simpson over a window covering every component.
/// One-dimensional only (CapabilityError otherwise).
double renyi2_quadrature(const DiagGaussian& target, const Mixture& behavior,
                         double abs_tolerance = 1e-9);

/// Plug-in estimate from draws of the behavior mixture. Not a certified bound.
Renyi2Result renyi2_monte_carlo(const DiagGaussian& target, const Mixture& behavior,
                                std::size_t samples, Rng& rng);

/// min_j d2(P || Q_j) / w_j, a valid upper bound on d2(P || Phi).
/// Components violating the closed-form variance condition are skipped;
/// returns +inf when none qualify.
double renyi2_component_bound(const DiagGaussian& target, const Mixture& behavior);

Renyi2Result renyi2(const DiagGaussian& target, const Mixture& behavior, Renyi2Mode mode,
                    const Renyi2Options& options = {});
Renyi2Result renyi2(const DiagGaussian& target, const DiagGaussian& behavior, Renyi2Mode mode,
                    const Renyi2Options& options = {});

/// Adaptive Simpson quadrature of f over [lo, hi] to the given absolute tolerance.
double integrate_adaptive_simpson(const std::function<double(double)>& f, double lo, double hi,
                                  double abs_tolerance, int max_depth = 50);

}  // namespace copo
