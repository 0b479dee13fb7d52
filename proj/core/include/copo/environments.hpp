#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "copo/arm.hpp"
#include "copo/dists.hpp"
#include "copo/mis_estimator.hpp"

namespace copo {

class KeyValueConfig;

/// One observation: the density-bearing part of the sample and its payoff.
struct Draw {
  std::vector<double> z;
  double payoff = 0.0;
};

/// Binds arms to sampling distributions and a bounded payoff.
///
/// `family()` gives p_x over the density-bearing coordinates of z. Any further
/// randomness (e.g. a trajectory) must have a law that does not depend on the
/// arm once those coordinates are fixed, so it cancels in every density ratio.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual const LocationFamily& family() const = 0;
  virtual const ArmSpace& arm_space() const = 0;
  virtual Arm default_baseline() const = 0;
  virtual Draw draw(const Arm& x, Rng& rng) const = 0;

  virtual double payoff_bound() const = 0;
  virtual std::optional<PayoffRange> payoff_range() const = 0;

  /// Exact mu(x) = E_{z ~ p_x}[f(z)] when the environment has an oracle.
  virtual std::optional<double> mu(const Arm& x) const = 0;
  /// max_x mu(x) over the arm space.
  virtual std::optional<double> optimal_mu() const = 0;
};

/// PreconditionError unless the baseline belongs to the arm space.
void require_baseline_in_space(const ArmSpace& space, const Arm& baseline);

/// mu(x) = prod_i (1 + 2 sigma^2)^{-1/2} exp(-x_i^2 / (1 + 2 sigma^2)) for
/// p_x = N(x, sigma^2 I) and f(z) = exp(-|z|^2).
double synthetic_mu(const Arm& x, double noise_stddev);

/// Gaussian arms with payoff f(z) = exp(-|z|^2) in (0, 1].
class GaussianSyntheticEnv final : public Environment {
 public:
  // PreconditionError when noise_stddev <= 0, the space is empty, or dimensions disagree.
  GaussianSyntheticEnv(ArmSpace space, double noise_stddev, Arm baseline);

  std::string name() const override;
  const LocationFamily& family() const override { return family_; }
  const ArmSpace& arm_space() const override { return space_; }
  Arm default_baseline() const override { return baseline_; }
  Draw draw(const Arm& x, Rng& rng) const override;
  double payoff_bound() const override { return 1.0; }
  std::optional<PayoffRange> payoff_range() const override { return PayoffRange{0.0, 1.0}; }
  std::optional<double> mu(const Arm& x) const override;
  std::optional<double> optimal_mu() const override;

  double noise_stddev() const { return noise_stddev_; }
  /// |d mu / d x|_inf over the box, the Lipschitz constant w.r.t. the L1 norm.
  double lipschitz_constant() const;

  static double payoff(std::span<const double> z);

 private:
  ArmSpace space_;
  double noise_stddev_;
  Arm baseline_;
  LocationFamily family_;
};

/// Defaults used by the CLI and the acceptance suite.
/// Five 1-d arms {0, 0.1, 0.44, 0.7, 1}, noise 0.5, baseline 0.44 (gap ~0.099).
std::unique_ptr<GaussianSyntheticEnv> make_default_synthetic();
/// Box [-1, 1], noise 0.5, baseline 1.
std::unique_ptr<GaussianSyntheticEnv> make_default_synthetic_box();

/// Builds "synthetic", "synthetic-box" or "inventory" from config keys (see README).
std::unique_ptr<Environment> make_environment(const std::string& name,
                                              const KeyValueConfig& config);

}  // namespace copo
