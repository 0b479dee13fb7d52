// Acceptance suite: one PASS/FAIL line per criterion.
//
//   copo_acceptance            run every criterion
//   copo_acceptance 4 5 8      run a subset
//
// Exit status is nonzero when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "copo/conservative.hpp"
#include "copo/dists.hpp"
#include "copo/environments.hpp"
#include "copo/harness.hpp"
#include "copo/history.hpp"
#include "copo/inventory.hpp"
#include "copo/mis_estimator.hpp"

using namespace copo;

namespace {

constexpr std::size_t kSeeds = 20;
constexpr std::size_t kRequiredSafeRuns = 18;
constexpr double kAlpha = 0.1;
constexpr double kDelta = 0.1;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::size_t jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

RunConfig base_config(Algorithm algo, std::size_t T, std::uint64_t seed, BudgetMode mode,
                      Renyi2Mode d2) {
  RunConfig c;
  c.algorithm = algo;
  c.horizon = T;
  c.alpha = kAlpha;
  c.delta = kDelta;
  c.seed = seed;
  c.budget_mode = mode;
  c.d2_mode = d2;
  return c;
}

std::vector<RunConfig> seeded(Algorithm algo, std::size_t T, BudgetMode mode,
                              Renyi2Mode d2 = Renyi2Mode::quadrature) {
  std::vector<RunConfig> out;
  for (std::uint64_t s = 0; s < kSeeds; ++s) out.push_back(base_config(algo, T, s, mode, d2));
  return out;
}

History round_robin(const GaussianSyntheticEnv& env, const DiscreteArms& arms, std::size_t per_arm,
                    Rng& rng) {
  History h(env.family());
  for (std::size_t i = 0; i < per_arm; ++i) {
    for (const auto& x : arms) {
      auto d = env.draw(x, rng);
      h.append(x, std::move(d.z), d.payoff);
    }
  }
  return h;
}

// 1. Untruncated estimate is unbiased.
Outcome estimator_unbiased() {
  const auto env = make_default_synthetic();
  const auto& arms = std::get<DiscreteArms>(env->arm_space());
  const Arm target{0.2};
  const double mu = *env->mu(target);
  const int reps = 500;
  double sum = 0.0, sum2 = 0.0;
  for (int r = 0; r < reps; ++r) {
    auto rng = make_rng(1000 + static_cast<std::uint64_t>(r));
    const auto h = round_robin(*env, arms, 400, rng);
    const double v = truncated_bh_estimate(h, target, kInf);
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / reps;
  const double se = std::sqrt((sum2 / reps - mean * mean) / (reps - 1));
  const double z = std::abs(mean - mu) / se;
  return {z <= 3.0, fmt("mean %.6f vs mu %.6f, |z| = %.2f (limit 3)", mean, mu, z)};
}

// 2. Confidence interval coverage at t = 200, delta_t = 0.1.
Outcome interval_coverage() {
  const auto env = make_default_synthetic();
  const auto& arms = std::get<DiscreteArms>(env->arm_space());
  const Arm target{0.2};
  const double mu = *env->mu(target);
  EstimatorOptions opt;
  opt.payoff_bound = env->payoff_bound();
  opt.d2_mode = Renyi2Mode::quadrature;
  const int reps = 500;
  int covered = 0;
  for (int r = 0; r < reps; ++r) {
    auto rng = make_rng(5000 + static_cast<std::uint64_t>(r));
    const auto h = round_robin(*env, arms, 40, rng);
    const auto e = confidence_interval(h, target, 0.1, opt);
    covered += (e.lower <= mu && mu <= e.upper) ? 1 : 0;
  }
  const double need = 0.9 * reps - 3.0 * std::sqrt(reps * 0.9 * 0.1);
  return {covered >= need, fmt("%d/%d covered (need >= %.1f)", covered, reps, need)};
}

// 3. Renyi divergence routes agree.
Outcome renyi_agreement() {
  double worst = 0.0;
  int pairs = 0;
  for (double dm : {0.0, 0.1, 0.25, 0.5, 1.0, 1.5, 2.0}) {
    for (double sigma : {0.25, 0.5, 1.0, 2.0}) {
      for (double ratio : {0.75, 1.0, 1.3}) {
        const DiagGaussian p({dm}, {sigma * ratio});
        const DiagGaussian q({0.0}, {sigma});
        const double cf = renyi2_closed_form(p, q);
        const double quad = renyi2_quadrature(p, Mixture({q}));
        worst = std::max(worst, std::abs(cf - quad) / cf);
        ++pairs;
      }
    }
  }
  int fixtures = 0, violations = 0;
  const std::vector<Mixture> mixes{
      Mixture({DiagGaussian({0.0}, {1.0}), DiagGaussian({3.0}, {1.0})}),
      Mixture({DiagGaussian({-1.0}, {0.5}), DiagGaussian({0.5}, {0.5}), DiagGaussian({2.0}, {0.5})}),
      Mixture({DiagGaussian({0.0}, {0.8}), DiagGaussian({0.2}, {1.5})}, {0.2, 0.8}),
      Mixture({DiagGaussian({0.0}, {0.5}), DiagGaussian({0.11}, {0.5}), DiagGaussian({0.22}, {0.5}),
               DiagGaussian({0.33}, {0.5}), DiagGaussian({0.44}, {0.5})},
              {0.05, 0.05, 0.1, 0.2, 0.6}),
  };
  for (const auto& mix : mixes) {
    for (double x : {-1.0, 0.0, 0.2, 0.44, 1.0, 3.0}) {
      const DiagGaussian p({x}, {mix.components().front().stddev()[0]});
      const double quad = renyi2_quadrature(p, mix);
      const double bound = renyi2_component_bound(p, mix);
      violations += bound < quad * (1.0 - 1e-9) ? 1 : 0;
      ++fixtures;
    }
  }
  return {worst <= 1e-6 && violations == 0,
          fmt("max rel err %.2e over %d pairs (limit 1e-6); component bound below quadrature in %d/%d",
              worst, pairs, violations, fixtures)};
}

struct DiscreteRuns {
  std::vector<RunTrace> copo;
  std::vector<RunTrace> icopo;
  std::size_t dominance_steps = 0;
  std::size_t dominance_violations = 0;
  double seconds_copo = 0.0;
};

// Shared by criteria 4, 5 and 6.
const DiscreteRuns& discrete_runs() {
  static const DiscreteRuns runs = [] {
    DiscreteRuns out;
    const auto env = make_default_synthetic();
    const auto t0 = std::chrono::steady_clock::now();
    out.copo = run_batch(*env, seeded(Algorithm::copo, 2000, BudgetMode::paper_exact), jobs());
    out.seconds_copo = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    // Replays the conservative optimist on every history the improved variant sees.
    const auto& arms = std::get<DiscreteArms>(env->arm_space());
    ConservativeConfig cc;
    cc.alpha = kAlpha;
    cc.baseline_arm = env->default_baseline();
    cc.baseline_mu = *env->mu(cc.baseline_arm);
    cc.budget_mode = BudgetMode::paper_exact;
    EstimatorOptions est;
    est.payoff_bound = env->payoff_bound();
    est.payoff_range = env->payoff_range();
    est.d2_mode = Renyi2Mode::quadrature;
    const auto sched = Schedules::discrete(kDelta, arms.size());
    for (const auto& cfg : seeded(Algorithm::icopo, 2000, BudgetMode::paper_exact)) {
      out.icopo.push_back(run(*env, cfg, [&](const History& h, const Selection& s) {
        const auto alg1 = select_conservative_optimist(h, arms, cc, sched, est);
        ++out.dominance_steps;
        if (s.diagnostics.chosen_upper < alg1.diagnostics.chosen_upper) ++out.dominance_violations;
      }));
    }
    return out;
  }();
  return runs;
}

std::size_t count_safe(const std::vector<RunTrace>& traces) {
  std::size_t n = 0;
  for (const auto& t : traces) n += (t.valid && t.constraint_satisfied()) ? 1 : 0;
  return n;
}

bool all_valid(const std::vector<RunTrace>& traces) {
  return std::all_of(traces.begin(), traces.end(), [](const RunTrace& t) { return t.valid; });
}

std::string first_error(const std::vector<RunTrace>& traces) {
  for (const auto& t : traces) {
    if (!t.valid) return "; invalid run: " + t.error;
  }
  return "";
}

// 4. Conservative constraint for the conservative optimist.
Outcome discrete_constraint() {
  const auto& r = discrete_runs();
  const std::size_t safe = count_safe(r.copo);
  double worst = kInf;
  for (const auto& t : r.copo) worst = std::min(worst, t.min_budget_exact());
  const bool pass = all_valid(r.copo) && safe >= kRequiredSafeRuns && r.seconds_copo < 600.0;
  return {pass, fmt("%zu/%zu runs satisfy the constraint at every step (need >= %zu); min budget %.4f; "
                    "%.1f s",
                    safe, kSeeds, kRequiredSafeRuns, worst, r.seconds_copo) +
                    first_error(r.copo)};
}

struct TrendCheck {
  double ratio = 0.0;
  std::size_t within_bound = 0;
  double worst_fraction = 0.0;  // max Regret(T) / bound
};

TrendCheck regret_trend(const std::vector<RunTrace>& traces, double optimal_mu,
                        const std::function<double(const RunTrace&)>& bound) {
  std::vector<double> early, late;
  TrendCheck out;
  for (const auto& t : traces) {
    const auto m = regret_metrics(t, optimal_mu);
    const std::size_t T = t.horizon();
    early.push_back(m.cumulative[T / 10] / static_cast<double>(T / 10));
    late.push_back(m.cumulative[T] / static_cast<double>(T));
    const double b = bound(t);
    out.within_bound += m.regret <= b ? 1 : 0;
    out.worst_fraction = std::max(out.worst_fraction, m.regret / b);
  }
  out.ratio = median(late) / median(early);
  return out;
}

// 5. Regret per step halves between t = 200 and t = 2000, under the discrete bound.
Outcome discrete_regret() {
  const auto& r = discrete_runs();
  const auto env = make_default_synthetic();
  const double mu_b = *env->mu(env->default_baseline());
  const auto trend = regret_trend(r.copo, *env->optimal_mu(), [&](const RunTrace& t) {
    BoundConstants c;
    c.payoff_bound = env->payoff_bound();
    c.v_eps = t.empirical_v_eps();
    c.delta = kDelta;
    c.alpha = kAlpha;
    c.baseline_mu = mu_b;
    c.baseline_gap = *env->optimal_mu() - mu_b;
    c.arm_count = std::get<DiscreteArms>(env->arm_space()).size();
    return theoretical_bound(c, t.horizon(), BoundCase::discrete);
  });
  const bool pass = all_valid(r.copo) && trend.ratio < 0.5 && trend.within_bound == r.copo.size();
  return {pass, fmt("median Regret/t ratio (t=2000 over t=200) %.3f (limit 0.5); %zu/%zu runs under "
                    "the bound (max regret/bound %.2e)",
                    trend.ratio, trend.within_bound, r.copo.size(), trend.worst_fraction)};
}

// 6. Improved variant dominates per step and is no worse on average.
Outcome improved_dominance() {
  const auto& r = discrete_runs();
  const auto env = make_default_synthetic();
  std::vector<double> diff;
  double mean1 = 0.0, mean2 = 0.0;
  for (std::size_t i = 0; i < r.copo.size(); ++i) {
    const double r1 = regret_metrics(r.copo[i], *env->optimal_mu()).regret;
    const double r2 = regret_metrics(r.icopo[i], *env->optimal_mu()).regret;
    mean1 += r1;
    mean2 += r2;
    diff.push_back(r2 - r1);
  }
  const double n = static_cast<double>(diff.size());
  mean1 /= n;
  mean2 /= n;
  const double dbar = std::accumulate(diff.begin(), diff.end(), 0.0) / n;
  double ss = 0.0;
  for (double d : diff) ss += (d - dbar) * (d - dbar);
  const double paired_se = std::sqrt(ss / (n - 1.0) / n);
  const bool pass = all_valid(r.icopo) && r.dominance_violations == 0 && r.dominance_steps > 0 &&
                    mean2 <= mean1 + 2.0 * paired_se;
  return {pass, fmt("upper bound dominance at %zu/%zu steps; mean regret %.2f vs %.2f (+2 paired SE "
                    "= %.2f)",
                    r.dominance_steps - r.dominance_violations, r.dominance_steps, mean2, mean1,
                    mean1 + 2.0 * paired_se) +
                    first_error(r.icopo)};
}

// 7. Discretized variant on the unit box.
Outcome compact_case() {
  const auto env = make_default_synthetic_box();
  const auto& box = std::get<Box>(env->arm_space());
  std::vector<RunTrace> traces;
  std::size_t grid_steps = 0, grid_mismatch = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& cfg : seeded(Algorithm::icopo2, 2000, BudgetMode::frozen)) {
    traces.push_back(run(*env, cfg, [&](const History& h, const Selection& s) {
      std::size_t grid = 0;
      for (const auto& c : s.safe_set.candidates) grid += c.arm == env->default_baseline() ? 0 : 1;
      ++grid_steps;
      grid_mismatch += grid == ceil_sqrt(h.size()) ? 0 : 1;
    }));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const std::size_t safe = count_safe(traces);
  const double mu_b = *env->mu(env->default_baseline());
  const auto trend = regret_trend(traces, *env->optimal_mu(), [&](const RunTrace& t) {
    BoundConstants c;
    c.payoff_bound = env->payoff_bound();
    c.v_eps = t.empirical_v_eps();
    c.delta = kDelta;
    c.alpha = kAlpha;
    c.baseline_mu = mu_b;
    c.baseline_gap = *env->optimal_mu() - mu_b;
    c.dim = box.dim;
    c.half_width = box.half_width;
    c.lipschitz = env->lipschitz_constant();
    return theoretical_bound(c, t.horizon(), BoundCase::compact);
  });
  const bool pass = all_valid(traces) && grid_mismatch == 0 && safe >= kRequiredSafeRuns &&
                    trend.ratio < 0.5 && trend.within_bound == traces.size();
  return {pass,
          fmt("grid size matches ceil(sqrt t) at %zu/%zu steps; %zu/%zu runs safe (need >= %zu); "
              "Regret/t ratio %.3f (limit 0.5); %zu/%zu under the bound; %.1f s",
              grid_steps - grid_mismatch, grid_steps, safe, kSeeds, kRequiredSafeRuns, trend.ratio,
              trend.within_bound, traces.size(), secs) +
              first_error(traces)};
}

// Largest gap between the algorithm's mean regret curve and the baseline-only curve.
constexpr double kInventoryBand = 20.0;

// 8. Inventory control with the exact dynamic-programming oracle.
Outcome inventory() {
  const auto env = make_default_inventory();
  const auto t0 = std::chrono::steady_clock::now();
  const auto traces = run_batch(*env, seeded(Algorithm::copo, 10000, BudgetMode::frozen, Renyi2Mode::component_bound), jobs());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const std::size_t safe = count_safe(traces);
  const double opt = *env->optimal_mu();
  const double gap_b = opt - *env->mu(env->default_baseline());

  std::vector<double> mean_curve(10001, 0.0);
  for (const auto& t : traces) {
    if (!t.valid) continue;
    const auto m = regret_metrics(t, opt);
    for (std::size_t i = 0; i < mean_curve.size(); ++i) mean_curve[i] += m.cumulative[i];
  }
  double band = 0.0;
  for (std::size_t i = 0; i < mean_curve.size(); ++i) {
    mean_curve[i] /= static_cast<double>(traces.size());
    band = std::max(band, std::abs(mean_curve[i] - static_cast<double>(i + 1) * gap_b));
  }
  const bool pass = all_valid(traces) && safe >= kRequiredSafeRuns && band <= kInventoryBand &&
                    secs < 1800.0;
  return {pass, fmt("%zu/%zu runs safe (need >= %zu); mean regret %.1f vs baseline-only %.1f; max gap "
                    "between curves %.1f (band %.0f); %.1f s",
                    safe, kSeeds, kRequiredSafeRuns, mean_curve.back(), 10001.0 * gap_b, band,
                    kInventoryBand, secs) +
                    first_error(traces)};
}

struct Criterion {
  int id;
  const char* name;
  Outcome (*check)();
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "estimator unbiasedness", estimator_unbiased},
      {2, "confidence interval coverage", interval_coverage},
      {3, "Renyi divergence agreement", renyi_agreement},
      {4, "discrete conservative constraint", discrete_constraint},
      {5, "discrete sublinear regret", discrete_regret},
      {6, "improved dominance", improved_dominance},
      {7, "compact case", compact_case},
      {8, "inventory reproduction", inventory},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  bool ok = true;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
    ok = ok && o.pass;
  }
  return ok ? EXIT_SUCCESS : EXIT_FAILURE;
}
