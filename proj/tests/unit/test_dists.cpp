#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"

#include "copo/dists.hpp"
#include "copo/errors.hpp"

using namespace copo;

namespace {

DiagGaussian g1(double mean, double sd) { return DiagGaussian({mean}, {sd}); }

// Composite Simpson with a fixed fine mesh, independent of the library integrator.
template <class F>
double simpson(F f, double lo, double hi, int panels = 20000) {
  const double h = (hi - lo) / panels;
  double s = f(lo) + f(hi);
  for (int i = 1; i < panels; ++i) s += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// d2 of N(0,1) against the equal mixture of N(0,1) and N(3,1), integrated offline.
constexpr double kMixtureD2 = 1.8027574978005583;

}  // namespace

TEST_SUITE("dists") {

TEST_CASE("density closed forms") {
  const double root2pi = std::sqrt(2.0 * std::numbers::pi);
  CHECK(g1(0, 1).density(std::vector<double>{0.0}) == doctest::Approx(1.0 / root2pi).epsilon(1e-15));
  CHECK(g1(0, 1).density(std::vector<double>{0.0}) == doctest::Approx(0.3989422804).epsilon(1e-10));
  CHECK(g1(1, 2).density(std::vector<double>{1.0}) ==
        doctest::Approx(1.0 / (2.0 * root2pi)).epsilon(1e-15));
  DiagGaussian two({0.0, 0.0}, {1.0, 1.0});
  CHECK(two.density(std::vector<double>{0.0, 0.0}) ==
        doctest::Approx(1.0 / (2.0 * std::numbers::pi)).epsilon(1e-15));
}

TEST_CASE("log density is consistent and finite far in the tail") {
  const auto d = DiagGaussian({0.3, -1.0}, {0.5, 2.0});
  for (double u : {-5.0, -1.0, 0.0, 0.7, 3.0, 8.0}) {
    const std::vector<double> z{0.3 + u * 0.5, -1.0 - u * 2.0};
    const double p = d.density(z);
    if (p > 1e-300) CHECK(std::abs(std::log(p) - d.log_density(z)) <= 1e-10);
  }
  const auto s = g1(0, 1);
  const double lp = s.log_density(std::vector<double>{40.0});
  CHECK(std::isfinite(lp));
  CHECK(lp == doctest::Approx(-800.0 - 0.5 * std::log(2.0 * std::numbers::pi)).epsilon(1e-14));
}

TEST_CASE("density integrates to one") {
  const auto d = g1(0.4, 0.7);
  const double mass =
      simpson([&](double z) { return d.density(std::vector<double>{z}); }, 0.4 - 7.0, 0.4 + 7.0);
  CHECK(std::abs(mass - 1.0) <= 1e-6);
}

TEST_CASE("dimension mismatch and invalid stddev are rejected") {
  CHECK_THROWS_AS(g1(0, 1).density(std::vector<double>{0.0, 1.0}), PreconditionError);
  CHECK_THROWS_AS(g1(5, 0), PreconditionError);
  CHECK_THROWS_AS(g1(5, -1), PreconditionError);
  CHECK_THROWS_AS(DiagGaussian({0.0}, {1.0, 1.0}), PreconditionError);
  CHECK_THROWS_AS(Mixture({g1(0, 1), g1(1, 1)}, {0.5, 0.6}), PreconditionError);
}

TEST_CASE("sampling is reproducible and centered") {
  const auto d = g1(0, 1);
  auto a = make_rng(42, 3);
  auto b = make_rng(42, 3);
  for (int i = 0; i < 5; ++i) CHECK(d.sample(a) == d.sample(b));

  auto rng = make_rng(7);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += d.sample(rng)[0];
  CHECK(std::abs(sum / n) <= 0.0127);
}

TEST_CASE("mixture weights sum to one") {
  const Mixture m({g1(0, 1), g1(1, 1), g1(2, 1)});
  double s = 0.0;
  for (double w : m.weights()) s += w;
  CHECK(std::abs(s - 1.0) <= 1e-12);
}

TEST_CASE("renyi2 of a distribution against itself is one") {
  for (auto mode : {Renyi2Mode::closed_form, Renyi2Mode::quadrature, Renyi2Mode::component_bound}) {
    CHECK(std::abs(renyi2(g1(0.3, 0.8), g1(0.3, 0.8), mode).value - 1.0) <= 1e-9);
  }
  DiagGaussian p({0.1, 0.2}, {0.5, 0.9});
  CHECK(std::abs(renyi2_closed_form(p, p) - 1.0) <= 1e-12);
}

TEST_CASE("closed form matches quadrature over a grid of shifts and scales") {
  for (double dm : {0.0, 0.25, 0.5, 1.0, 2.0}) {
    for (double sq : {0.5, 1.0, 2.0}) {
      for (double ratio : {0.8, 1.0, 1.25}) {
        const double sp = sq * ratio;
        const auto p = g1(dm, sp);
        const auto q = g1(0.0, sq);
        const double cf = renyi2_closed_form(p, q);
        const double quad = renyi2_quadrature(p, Mixture({q}));
        // Window covers the target and the bump of p^2/q.
        const double prec = 2.0 / (sp * sp) - 1.0 / (sq * sq);
        const double c = 2.0 * dm / (sp * sp) / prec;
        const double w = 12.0 / std::sqrt(prec);
        const double lo = std::min(dm - 10.0 * std::max(sp, sq), c - w);
        const double hi = std::max(dm + 10.0 * std::max(sp, sq), c + w);
        const double oracle = simpson(
            [&](double z) {
              const double up = (z - dm) / sp;
              const double uq = z / sq;
              return std::exp(-up * up + 0.5 * uq * uq) * sq / (sp * sp * std::sqrt(2.0 * std::numbers::pi));
            },
            lo, hi, 200000);
        CAPTURE(dm);
        CAPTURE(sp);
        CAPTURE(sq);
        CHECK(std::abs(cf - oracle) / oracle <= 1e-6);
        CHECK(std::abs(quad - oracle) / oracle <= 1e-6);
        if (ratio == 1.0) CHECK(cf == doctest::Approx(std::exp(dm * dm / (sq * sq))).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("closed form refuses the divergent variance regime") {
  CHECK_THROWS_AS(renyi2_closed_form(g1(0, 2), g1(0, 1)), DomainError);
  CHECK_THROWS_AS(renyi2(g1(0, 1), Mixture({g1(0, 1), g1(3, 1)}), Renyi2Mode::closed_form),
                  CapabilityError);
  DiagGaussian two({0.0, 0.0}, {1.0, 1.0});
  CHECK_THROWS_AS(renyi2_quadrature(two, Mixture({two})), CapabilityError);
}

TEST_CASE("mixture d2 by quadrature and Monte Carlo") {
  const auto p = g1(0, 1);
  const Mixture mix({g1(0, 1), g1(3, 1)}, {0.5, 0.5});
  const double quad = renyi2_quadrature(p, mix);
  CHECK(quad == doctest::Approx(kMixtureD2).epsilon(1e-8));

  auto rng = make_rng(2024);
  const auto mc = renyi2_monte_carlo(p, mix, 1000000, rng);
  CHECK(mc.std_error > 0.0);
  CHECK(std::abs(mc.value - quad) <= 3.0 * mc.std_error);
}

TEST_CASE("component bound dominates quadrature on mixtures") {
  const std::vector<Mixture> fixtures{
      Mixture({g1(0, 1), g1(3, 1)}),
      Mixture({g1(-1, 0.5), g1(0.5, 0.5), g1(2, 0.5)}),
      Mixture({g1(0, 0.8), g1(0.2, 1.5)}, {0.2, 0.8}),
      Mixture({g1(1, 1)}),
      Mixture({g1(0.11, 0.5), g1(0.22, 0.5), g1(0.44, 0.5), g1(0.44, 0.5)}, {0.1, 0.2, 0.3, 0.4}),
  };
  for (double target : {-0.5, 0.0, 0.44, 1.0, 2.5}) {
    for (const auto& mix : fixtures) {
      const auto p = g1(target, mix.components().front().stddev()[0]);
      const double quad = renyi2_quadrature(p, mix);
      const double bound = renyi2_component_bound(p, mix);
      CHECK(quad >= 1.0 - 1e-9);
      CHECK(bound >= quad * (1.0 - 1e-9));
    }
  }
}

TEST_CASE("monte carlo agrees with quadrature on one-dimensional cases") {
  auto rng = make_rng(99);
  for (double shift : {0.3, 1.0}) {
    const auto p = g1(shift, 0.6);
    const Mixture mix({g1(0, 0.6), g1(0.5, 0.6)});
    const auto mc = renyi2_monte_carlo(p, mix, 200000, rng);
    const double quad = renyi2_quadrature(p, mix);
    CHECK(std::abs(mc.value - quad) <= 3.0 * mc.std_error);
  }
}

}  // TEST_SUITE
