#include "copo/dists.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "copo/errors.hpp"
#include "numeric.hpp"

namespace copo {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * log(2 pi)

void check_dim(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) {
    throw PreconditionError(std::string(what) + ": dimension mismatch (expected " +
                            std::to_string(expected) + ", got " + std::to_string(got) + ")");
  }
}

double simpson_recurse(const std::function<double(double)>& f, double a, double b, double fa,
                       double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::abs(left + right);
  if (depth <= 0 || std::abs(delta) <= 15.0 * std::max(tol, floor)) {
    return left + right + delta / 15.0;
  }
  return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

DiagGaussian::DiagGaussian(std::vector<double> mean, std::vector<double> stddev)
    : mean_(std::move(mean)), stddev_(std::move(stddev)) {
  if (mean_.empty()) throw PreconditionError("DiagGaussian: dimension must be positive");
  check_dim(mean_.size(), stddev_.size(), "DiagGaussian");
  log_norm_ = -static_cast<double>(mean_.size()) * kHalfLog2Pi;
  for (std::size_t i = 0; i < stddev_.size(); ++i) {
    if (!(stddev_[i] > 0.0) || !std::isfinite(stddev_[i])) {
      throw PreconditionError("DiagGaussian: stddev must be finite and > 0");
    }
    if (!std::isfinite(mean_[i])) throw PreconditionError("DiagGaussian: mean must be finite");
    log_norm_ -= std::log(stddev_[i]);
  }
}

double DiagGaussian::log_density(std::span<const double> z) const {
  check_dim(dim(), z.size(), "DiagGaussian::log_density");
  double quad = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double u = (z[i] - mean_[i]) / stddev_[i];
    quad += u * u;
  }
  return log_norm_ - 0.5 * quad;
}

double DiagGaussian::density(std::span<const double> z) const { return std::exp(log_density(z)); }

std::vector<double> DiagGaussian::sample(Rng& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> z(dim());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = mean_[i] + stddev_[i] * normal(rng);
  return z;
}

LocationFamily::LocationFamily(std::vector<double> stddev) : stddev_(std::move(stddev)) {
  // Validates the stddev vector once.
  DiagGaussian probe(std::vector<double>(stddev_.size(), 0.0), stddev_);
}

DiagGaussian LocationFamily::at(const Arm& x) const {
  check_dim(dim(), x.dim(), "LocationFamily::at");
  return DiagGaussian(std::vector<double>(x.params().begin(), x.params().end()), stddev_);
}

Mixture::Mixture(std::vector<DiagGaussian> components, std::vector<double> weights)
    : components_(std::move(components)), weights_(std::move(weights)) {
  if (components_.empty()) throw PreconditionError("Mixture: needs at least one component");
  check_dim(components_.size(), weights_.size(), "Mixture weights");
  double total = 0.0;
  for (std::size_t j = 0; j < components_.size(); ++j) {
    check_dim(components_.front().dim(), components_[j].dim(), "Mixture component");
    if (!(weights_[j] >= 0.0)) throw PreconditionError("Mixture: weights must be nonnegative");
    total += weights_[j];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw PreconditionError("Mixture: weights must sum to 1");
  }
}

Mixture::Mixture(std::vector<DiagGaussian> components)
    : Mixture(components,
              std::vector<double>(components.size(),
                                  components.empty() ? 0.0 : 1.0 / components.size())) {}

double Mixture::log_density(std::span<const double> z) const {
  detail::LogSumExp acc;
  for (std::size_t j = 0; j < components_.size(); ++j) {
    if (weights_[j] > 0.0) acc.add(std::log(weights_[j]) + components_[j].log_density(z));
  }
  return acc.value();
}

double Mixture::density(std::span<const double> z) const { return std::exp(log_density(z)); }

std::vector<double> Mixture::sample(Rng& rng) const {
  std::discrete_distribution<std::size_t> pick(weights_.begin(), weights_.end());
  return components_[pick(rng)].sample(rng);
}

double renyi2_closed_form(const DiagGaussian& target, const DiagGaussian& behavior) {
  check_dim(target.dim(), behavior.dim(), "renyi2_closed_form");
  double log_d2 = 0.0;
  for (std::size_t i = 0; i < target.dim(); ++i) {
    const double sp2 = target.stddev()[i] * target.stddev()[i];
    const double sq2 = behavior.stddev()[i] * behavior.stddev()[i];
    const double denom = 2.0 * sq2 - sp2;
    if (!(denom > 0.0)) {
      throw DomainError("renyi2_closed_form: requires 2*sigma_Q^2 > sigma_P^2 on every axis");
    }
    const double dm = target.mean()[i] - behavior.mean()[i];
    log_d2 += std::log(sq2) - std::log(target.stddev()[i]) - 0.5 * std::log(denom) +
              dm * dm / denom;
  }
  return std::exp(log_d2);
}

double integrate_adaptive_simpson(const std::function<double(double)>& f, double lo, double hi,
                                  double abs_tolerance, int max_depth) {
  const double fa = f(lo);
  const double fb = f(hi);
  const double fm = f(0.5 * (lo + hi));
  const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_recurse(f, lo, hi, fa, fm, fb, whole, abs_tolerance, max_depth);
}

double renyi2_quadrature(const DiagGaussian& target, const Mixture& behavior,
                         double abs_tolerance) {
  check_dim(target.dim(), behavior.dim(), "renyi2_quadrature");
  if (target.dim() != 1) throw CapabilityError("renyi2_quadrature: one-dimensional only");

  const double m = target.mean()[0];
  const double sp = target.stddev()[0];
  double sigma_max = sp;
  double shift = 0.0;
  for (const auto& q : behavior.components()) {
    sigma_max = std::max(sigma_max, q.stddev()[0]);
    shift = std::max(shift, std::abs(m - q.mean()[0]));
  }
  double lo = m - 10.0 * sigma_max - shift;
  double hi = m + 10.0 * sigma_max + shift;
  // p^2/q_j is a Gaussian bump with precision 2/sp^2 - 1/sq^2; cover each one.
  for (const auto& q : behavior.components()) {
    const double sq = q.stddev()[0];
    const double prec = 2.0 / (sp * sp) - 1.0 / (sq * sq);
    if (!(prec > 0.0)) continue;
    const double c = (2.0 * m / (sp * sp) - q.mean()[0] / (sq * sq)) / prec;
    const double s = 1.0 / std::sqrt(prec);
    lo = std::min(lo, c - 12.0 * s);
    hi = std::max(hi, c + 12.0 * s);
  }

  auto integrand = [&](double z) {
    const double zz[1] = {z};
    return std::exp(2.0 * target.log_density(zz) - behavior.log_density(zz));
  };
  // Fixed panels first, so narrow bumps far from the midpoint are not skipped.
  constexpr int kPanels = 64;
  const double width = (hi - lo) / kPanels;
  double total = 0.0;
  for (int p = 0; p < kPanels; ++p) {
    total += integrate_adaptive_simpson(integrand, lo + p * width, lo + (p + 1) * width,
                                        abs_tolerance / kPanels);
  }
  return total;
}

Renyi2Result renyi2_monte_carlo(const DiagGaussian& target, const Mixture& behavior,
                                std::size_t samples, Rng& rng) {
  check_dim(target.dim(), behavior.dim(), "renyi2_monte_carlo");
  if (samples < 2) throw PreconditionError("renyi2_monte_carlo: needs at least 2 samples");
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t n = 0; n < samples; ++n) {
    const auto z = behavior.sample(rng);
    const double w = std::exp(target.log_density(z) - behavior.log_density(z));
    const double x = w * w;
    const double d = x - mean;
    mean += d / static_cast<double>(n + 1);
    m2 += d * (x - mean);
  }
  const double var = m2 / static_cast<double>(samples - 1);
  return {mean, std::sqrt(var / static_cast<double>(samples))};
}

double renyi2_component_bound(const DiagGaussian& target, const Mixture& behavior) {
  check_dim(target.dim(), behavior.dim(), "renyi2_component_bound");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < behavior.size(); ++j) {
    if (!(behavior.weights()[j] > 0.0)) continue;
    try {
      best = std::min(best, renyi2_closed_form(target, behavior.components()[j]) /
                                behavior.weights()[j]);
    } catch (const DomainError&) {
      continue;
    }
  }
  return best;
}

Renyi2Result renyi2(const DiagGaussian& target, const Mixture& behavior, Renyi2Mode mode,
                    const Renyi2Options& options) {
  switch (mode) {
    case Renyi2Mode::closed_form:
      if (behavior.size() != 1) {
        throw CapabilityError("renyi2: closed_form needs a single behavior distribution");
      }
      return {renyi2_closed_form(target, behavior.components().front()), 0.0};
    case Renyi2Mode::quadrature:
      return {renyi2_quadrature(target, behavior, options.quadrature_tolerance), 0.0};
    case Renyi2Mode::monte_carlo: {
      auto rng = make_rng(options.mc_seed);
      return renyi2_monte_carlo(target, behavior, options.mc_samples, rng);
    }
    case Renyi2Mode::component_bound:
      return {renyi2_component_bound(target, behavior), 0.0};
  }
  throw CapabilityError("renyi2: unknown mode");
}

Renyi2Result renyi2(const DiagGaussian& target, const DiagGaussian& behavior, Renyi2Mode mode,
                    const Renyi2Options& options) {
  return renyi2(target, Mixture({behavior}, {1.0}), mode, options);
}

}  // namespace copo
