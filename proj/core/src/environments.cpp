#include "copo/environments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "copo/config_file.hpp"
#include "copo/errors.hpp"
#include "copo/inventory.hpp"

namespace copo {

namespace {

std::size_t space_dim(const ArmSpace& space) {
  if (const auto* arms = std::get_if<DiscreteArms>(&space)) {
    if (arms->empty()) throw PreconditionError("arm space is empty");
    const std::size_t d = arms->front().dim();
    for (const auto& a : *arms) {
      if (a.dim() != d) throw PreconditionError("arm space mixes dimensions");
    }
    if (d == 0) throw PreconditionError("arms must have positive dimension");
    return d;
  }
  const auto& box = std::get<Box>(space);
  if (box.dim == 0 || !(box.half_width > 0.0)) throw PreconditionError("degenerate box");
  return box.dim;
}

double noise_checked(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw PreconditionError("GaussianSyntheticEnv: noise stddev must be > 0");
  }
  return s;
}

}  // namespace

void require_baseline_in_space(const ArmSpace& space, const Arm& baseline) {
  if (const auto* arms = std::get_if<DiscreteArms>(&space)) {
    if (std::find(arms->begin(), arms->end(), baseline) == arms->end()) {
      throw PreconditionError("baseline arm " + baseline.to_string() + " is not in the arm set");
    }
  } else if (!std::get<Box>(space).contains(baseline)) {
    throw PreconditionError("baseline arm " + baseline.to_string() + " lies outside the box");
  }
}

double synthetic_mu(const Arm& x, double noise_stddev) {
  const double s = 1.0 + 2.0 * noise_stddev * noise_stddev;
  double mu = 1.0;
  for (double xi : x.params()) mu *= std::exp(-xi * xi / s) / std::sqrt(s);
  return mu;
}

GaussianSyntheticEnv::GaussianSyntheticEnv(ArmSpace space, double noise_stddev, Arm baseline)
    : space_(std::move(space)),
      noise_stddev_(noise_checked(noise_stddev)),
      baseline_(std::move(baseline)),
      family_(std::vector<double>(space_dim(space_), noise_stddev_)) {
  if (baseline_.dim() != family_.dim()) {
    throw PreconditionError("GaussianSyntheticEnv: baseline dimension does not match arm space");
  }
  require_baseline_in_space(space_, baseline_);
}

std::string GaussianSyntheticEnv::name() const {
  return std::holds_alternative<Box>(space_) ? "synthetic-box" : "synthetic";
}

double GaussianSyntheticEnv::payoff(std::span<const double> z) {
  double sq = 0.0;
  for (double v : z) sq += v * v;
  return std::exp(-sq);
}

Draw GaussianSyntheticEnv::draw(const Arm& x, Rng& rng) const {
  Draw d;
  d.z = family_.at(x).sample(rng);
  d.payoff = payoff(d.z);
  return d;
}

std::optional<double> GaussianSyntheticEnv::mu(const Arm& x) const {
  return synthetic_mu(x, noise_stddev_);
}

std::optional<double> GaussianSyntheticEnv::optimal_mu() const {
  if (const auto* arms = std::get_if<DiscreteArms>(&space_)) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& a : *arms) best = std::max(best, synthetic_mu(a, noise_stddev_));
    return best;
  }
  // The box is centered at the origin, where the payoff mean peaks.
  return synthetic_mu(Arm(std::vector<double>(family_.dim(), 0.0)), noise_stddev_);
}

double GaussianSyntheticEnv::lipschitz_constant() const {
  const double s = 1.0 + 2.0 * noise_stddev_ * noise_stddev_;
  const double d = static_cast<double>(family_.dim());
  // sup |d/dx exp(-x^2/s)| = sqrt(2/s) e^{-1/2}; the other factors are at most 1/sqrt(s) each.
  return std::pow(s, -0.5 * d) * std::sqrt(2.0 / s) * std::exp(-0.5);
}

std::unique_ptr<GaussianSyntheticEnv> make_default_synthetic() {
  return std::make_unique<GaussianSyntheticEnv>(
      DiscreteArms{Arm{0.0}, Arm{0.1}, Arm{0.44}, Arm{0.7}, Arm{1.0}}, 0.5, Arm{0.44});
}

std::unique_ptr<GaussianSyntheticEnv> make_default_synthetic_box() {
  return std::make_unique<GaussianSyntheticEnv>(Box{1, 1.0}, 0.5, Arm{1.0});
}

std::unique_ptr<Environment> make_environment(const std::string& name,
                                              const KeyValueConfig& config) {
  if (name == "synthetic") {
    auto def = make_default_synthetic();
    auto arms = config.get_arms("synthetic.arms", std::get<DiscreteArms>(def->arm_space()));
    const double sigma = config.get_double("synthetic.noise_stddev", def->noise_stddev());
    auto baseline = config.get_arms("synthetic.baseline", {def->default_baseline()});
    if (baseline.size() != 1) throw PreconditionError("synthetic.baseline must name one arm");
    return std::make_unique<GaussianSyntheticEnv>(std::move(arms), sigma, baseline.front());
  }
  if (name == "synthetic-box") {
    const auto dim = config.get_int("box.dim", 1);
    if (dim < 1) throw PreconditionError("box.dim must be >= 1");
    Box box{static_cast<std::size_t>(dim), config.get_double("box.half_width", 1.0)};
    const double sigma = config.get_double("synthetic.noise_stddev", 0.5);
    auto baseline = config.get_arms(
        "synthetic.baseline", {Arm(std::vector<double>(static_cast<std::size_t>(dim), 1.0))});
    if (baseline.size() != 1) throw PreconditionError("synthetic.baseline must name one arm");
    if (!box.contains(baseline.front())) {
      throw PreconditionError("synthetic.baseline must lie inside the box");
    }
    return std::make_unique<GaussianSyntheticEnv>(box, sigma, baseline.front());
  }
  if (name == "inventory") {
    InventoryConfig inv;
    inv.capacity = static_cast<int>(config.get_int("inventory.capacity", inv.capacity));
    inv.horizon = static_cast<int>(config.get_int("inventory.horizon", inv.horizon));
    inv.initial_stock =
        static_cast<int>(config.get_int("inventory.initial_stock", inv.initial_stock));
    inv.costs.revenue = config.get_double("inventory.revenue", inv.costs.revenue);
    inv.costs.fixed_order = config.get_double("inventory.fixed_order_cost", inv.costs.fixed_order);
    inv.costs.unit_order = config.get_double("inventory.unit_order_cost", inv.costs.unit_order);
    inv.costs.holding = config.get_double("inventory.holding_cost", inv.costs.holding);
    inv.demand_pmf = config.get_doubles("inventory.demand_pmf", {});
    auto def = make_default_inventory(inv);
    auto arms = config.get_arms("inventory.arms", std::get<DiscreteArms>(def->arm_space()));
    const double stddev = config.get_double("inventory.hyper_stddev", def->family().stddev()[0]);
    auto baseline = config.get_arms("inventory.baseline", {def->default_baseline()});
    if (baseline.size() != 1) throw PreconditionError("inventory.baseline must name one arm");
    return std::make_unique<InventoryHyperpolicyEnv>(inv, std::move(arms), stddev,
                                                     baseline.front());
  }
  throw PreconditionError("unknown environment '" + name +
                          "' (expected synthetic, synthetic-box or inventory)");
}

}  // namespace copo
