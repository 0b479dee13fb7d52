#include "copo/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include "copo/errors.hpp"
#include "numeric.hpp"

namespace copo {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <typename E>
struct NameTable {
  E value;
  const char* name;
};

constexpr NameTable<Algorithm> kAlgorithms[] = {
    {Algorithm::optimist, "optimist"}, {Algorithm::copo, "copo"},
    {Algorithm::icopo, "icopo"},       {Algorithm::icopo2, "icopo2"},
    {Algorithm::baseline, "baseline"},
};
constexpr NameTable<BudgetMode> kBudgetModes[] = {
    {BudgetMode::paper_exact, "paper_exact"},
    {BudgetMode::frozen, "frozen"},
};
constexpr NameTable<Renyi2Mode> kRenyiModes[] = {
    {Renyi2Mode::closed_form, "closed_form"},
    {Renyi2Mode::quadrature, "quadrature"},
    {Renyi2Mode::monte_carlo, "monte_carlo"},
    {Renyi2Mode::component_bound, "component_bound"},
};

template <typename E, std::size_t N>
std::string name_of(const NameTable<E> (&table)[N], E value) {
  for (const auto& e : table) {
    if (e.value == value) return e.name;
  }
  return "?";
}

template <typename E, std::size_t N>
E parse_name(const NameTable<E> (&table)[N], const std::string& name, const char* what) {
  std::string options;
  for (const auto& e : table) {
    if (name == e.name) return e.value;
    options += options.empty() ? "" : ", ";
    options += e.name;
  }
  throw PreconditionError(std::string("unknown ") + what + " '" + name + "' (expected one of " +
                          options + ")");
}

}  // namespace

std::string to_string(Algorithm algorithm) { return name_of(kAlgorithms, algorithm); }
Algorithm parse_algorithm(const std::string& name) {
  return parse_name(kAlgorithms, name, "algorithm");
}
std::string to_string(BudgetMode mode) { return name_of(kBudgetModes, mode); }
BudgetMode parse_budget_mode(const std::string& name) {
  return parse_name(kBudgetModes, name, "budget mode");
}
std::string to_string(Renyi2Mode mode) { return name_of(kRenyiModes, mode); }
Renyi2Mode parse_renyi2_mode(const std::string& name) {
  return parse_name(kRenyiModes, name, "d2 mode");
}

std::string RunConfig::canonical(const std::string& env_name) const {
  std::string s = "env=" + env_name;
  s += ";algo=" + to_string(algorithm);
  s += ";T=" + std::to_string(horizon);
  s += ";alpha=" + detail::format_double(alpha);
  s += ";delta=" + detail::format_double(delta);
  s += ";checkpoint=" + (checkpoint_period ? std::to_string(*checkpoint_period) : "none");
  s += ";budget=" + to_string(budget_mode);
  s += ";baseline=" + (baseline ? baseline->to_string() : "default");
  s += ";baseline_mu=" + (baseline_mu ? detail::format_double(*baseline_mu) : "oracle");
  s += ";d2=" + to_string(d2_mode);
  s += ";threshold_log=";
  s += threshold_log == ThresholdLog::two_over_delta ? "2/delta" : "1/delta";
  s += ";clip=" + std::string(clip_to_payoff_range ? "1" : "0");
  return s;
}

std::string config_hash(const std::string& canonical_text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : canonical_text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double RunTrace::empirical_v_eps() const {
  double v = 1.0;
  for (const auto& r : rows) v = std::max(v, r.chosen_d2);
  return v;
}

bool RunTrace::constraint_satisfied(double tolerance) const {
  return std::all_of(rows.begin(), rows.end(),
                     [&](const TraceRow& r) { return r.budget_exact >= -tolerance; });
}

double RunTrace::min_budget_exact() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) m = std::min(m, r.budget_exact);
  return m;
}

namespace {

struct Setup {
  ConservativeConfig conservative;
  EstimatorOptions estimator;
  std::optional<Schedules> schedules;
  const DiscreteArms* arms = nullptr;
  const Box* box = nullptr;
};

Setup prepare(const Environment& env, const RunConfig& cfg) {
  if (cfg.horizon < 1) throw PreconditionError("run: T must be >= 1");
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw PreconditionError("run: delta must lie in (0, 1)");
  if (cfg.budget_mode == BudgetMode::paper_exact && cfg.horizon > cfg.exact_horizon_limit &&
      !cfg.allow_long_exact && cfg.algorithm != Algorithm::baseline &&
      cfg.algorithm != Algorithm::optimist) {
    throw PreconditionError("run: paper_exact budget mode is limited to T <= " +
                            std::to_string(cfg.exact_horizon_limit) +
                            " (use frozen mode or allow the long run explicitly)");
  }

  Setup s;
  s.conservative.alpha = cfg.alpha;
  s.conservative.baseline_arm = cfg.baseline.value_or(env.default_baseline());
  require_baseline_in_space(env.arm_space(), s.conservative.baseline_arm);
  if (cfg.baseline_mu) {
    s.conservative.baseline_mu = *cfg.baseline_mu;
  } else if (auto mu = env.mu(s.conservative.baseline_arm)) {
    s.conservative.baseline_mu = *mu;
  } else {
    throw PreconditionError("run: the baseline mean is unknown; set it explicitly");
  }
  s.conservative.checkpoint_period = cfg.checkpoint_period;
  s.conservative.budget_mode = cfg.budget_mode;
  s.conservative.validate();

  s.estimator.payoff_bound = env.payoff_bound();
  if (cfg.clip_to_payoff_range) s.estimator.payoff_range = env.payoff_range();
  s.estimator.d2_mode = cfg.d2_mode;
  s.estimator.threshold_log = cfg.threshold_log;

  s.arms = std::get_if<DiscreteArms>(&env.arm_space());
  s.box = std::get_if<Box>(&env.arm_space());
  if (cfg.algorithm == Algorithm::icopo2) {
    if (!s.box) throw PreconditionError("run: icopo2 needs a compact (box) arm space");
    s.schedules = Schedules::compact(cfg.delta, s.box->dim);
  } else if (cfg.algorithm != Algorithm::baseline) {
    if (!s.arms) {
      throw PreconditionError("run: " + to_string(cfg.algorithm) +
                              " needs a discrete arm space (use icopo2 on a box)");
    }
    s.schedules = Schedules::discrete(cfg.delta, s.arms->size());
  }
  return s;
}

}  // namespace

RunTrace run(const Environment& env, const RunConfig& cfg, const StepObserver& observer) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  Setup setup = prepare(env, cfg);
  const auto& cc = setup.conservative;

  RunTrace trace;
  trace.env_name = env.name();
  trace.algorithm = cfg.algorithm;
  trace.seed = cfg.seed;
  trace.config_hash = config_hash(cfg.canonical(env.name()));
  trace.alpha = cfg.alpha;
  trace.delta = cfg.delta;
  trace.baseline = cc.baseline_arm;
  trace.baseline_mu = cc.baseline_mu;
  trace.optimal_mu = env.optimal_mu();
  trace.rows.reserve(cfg.horizon + 1);

  History history(env.family());
  // Discrete arms get ids equal to their list position; the baseline comes first otherwise.
  if (setup.arms) {
    for (const auto& a : *setup.arms) history.track(a);
  } else {
    history.track(cc.baseline_arm);
  }
  if (cfg.d2_mode == Renyi2Mode::quadrature && env.family().dim() == 1) {
    double lo = cc.baseline_arm[0];
    double hi = lo;
    if (setup.arms) {
      for (const auto& a : *setup.arms) {
        lo = std::min(lo, a[0]);
        hi = std::max(hi, a[0]);
      }
    } else {
      lo = -setup.box->half_width;
      hi = setup.box->half_width;
    }
    const double s = env.family().stddev()[0];
    const double margin = 12.0 * s;
    const auto points = static_cast<std::size_t>(std::ceil((hi - lo + 2.0 * margin) / (s / 40.0))) + 1;
    history.enable_density_grid(lo - margin, hi + margin, points);
  }
  BudgetState budget;
  Rng rng = make_rng(cfg.seed);
  double mu_sum = 0.0;

  auto record = [&](std::size_t t, const Arm& arm, const Draw& draw, const Selection* sel) {
    TraceRow row;
    row.t = t;
    row.arm_id = static_cast<long long>(history.find(arm));
    row.arm = arm;
    row.payoff = draw.payoff;
    const auto mu = env.mu(arm);
    row.mu_true = mu.value_or(kNaN);
    mu_sum += row.mu_true;
    row.budget_exact = mu_sum - (1.0 - cc.alpha) * static_cast<double>(t + 1) * cc.baseline_mu;
    if (sel) {
      const auto& d = sel->diagnostics;
      row.budget_lcb = d.budget_lcb;
      row.safe = d.safe;
      row.optimist_arm_id = static_cast<long long>(history.find(d.optimist));
      row.delta_t = d.delta_t;
      row.chosen_upper = d.chosen_upper;
      row.chosen_d2 = d.chosen_d2;
    } else {
      row.budget_lcb = kNaN;
      row.safe = true;
      row.optimist_arm_id = row.arm_id;
      row.delta_t = kNaN;
      row.chosen_upper = cc.baseline_mu;
      row.chosen_d2 = 1.0;
    }
    row.wall_time_s = std::chrono::duration<double>(Clock::now() - start).count();
    trace.rows.push_back(std::move(row));
  };

  {
    Draw d0 = env.draw(cc.baseline_arm, rng);
    history.append(cc.baseline_arm, d0.z, d0.payoff);
    budget.record(cc.baseline_mu);
    record(0, cc.baseline_arm, d0, nullptr);
  }

  for (std::size_t t = 1; t <= cfg.horizon; ++t) {
    Selection sel;
    try {
      switch (cfg.algorithm) {
        case Algorithm::baseline:
          sel.arm = cc.baseline_arm;
          break;
        case Algorithm::optimist:
          sel = select_optimist(history, *setup.arms, cc, *setup.schedules, setup.estimator);
          break;
        case Algorithm::copo:
          sel = select_conservative_optimist(history, *setup.arms, cc, *setup.schedules,
                                             setup.estimator, &budget);
          break;
        case Algorithm::icopo:
          sel = select_improved_conservative(history, *setup.arms, cc, *setup.schedules,
                                             setup.estimator, &budget);
          break;
        case Algorithm::icopo2:
          sel = select_discretized_conservative(history, *setup.box, cc, *setup.schedules,
                                                setup.estimator, &budget,
                                                cfg.max_grid_points);
          break;
      }
      if (observer && cfg.algorithm != Algorithm::baseline) observer(history, sel);
    } catch (const std::exception& e) {
      trace.valid = false;
      trace.error = "step " + std::to_string(t) + ": " + e.what();
      break;
    }

    Draw d = env.draw(sel.arm, rng);
    history.append(sel.arm, d.z, d.payoff);
    const bool has_diag = cfg.algorithm != Algorithm::baseline;
    budget.record(has_diag ? sel.diagnostics.chosen_lower : cc.baseline_mu);
    record(t, sel.arm, d, has_diag ? &sel : nullptr);
    if (!has_diag) {
      trace.rows.back().delta_t = kNaN;
    }
  }
  trace.wall_time_s = std::chrono::duration<double>(Clock::now() - start).count();
  return trace;
}

std::vector<RunTrace> run_batch(const Environment& env, const std::vector<RunConfig>& configs,
                                std::size_t jobs) {
  std::vector<RunTrace> out(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        out[i] = run(env, configs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  jobs = std::max<std::size_t>(1, std::min(jobs, configs.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

RegretMetrics regret_metrics(const RunTrace& trace, double optimal_mu) {
  RegretMetrics m;
  m.optimal_mu = optimal_mu;
  m.cumulative.reserve(trace.rows.size());
  m.regret_over_sqrt_t.reserve(trace.rows.size());
  double total = 0.0;
  for (const auto& r : trace.rows) {
    if (std::isnan(r.mu_true)) {
      throw PreconditionError("regret_metrics: trace has no mu oracle column");
    }
    const double gap = optimal_mu - r.mu_true;
    total += gap;
    m.cumulative.push_back(total);
    m.regret_over_sqrt_t.push_back(r.t == 0 ? kNaN : total / std::sqrt(static_cast<double>(r.t)));
    ++m.pulls[r.arm_id];
    m.gaps[r.arm_id] = gap;
    if (r.arm == trace.baseline) ++m.baseline_plays;
  }
  m.regret = total;
  return m;
}

namespace {

void check_bound_domain(const BoundConstants& c) {
  if (!(c.alpha > 0.0)) throw DomainError("theoretical_bound: alpha must be > 0");
  if (!(c.baseline_mu > 0.0)) throw DomainError("theoretical_bound: baseline mean must be > 0");
  if (!(c.delta > 0.0 && c.delta < 1.0)) throw DomainError("theoretical_bound: delta in (0, 1)");
  if (!(c.v_eps >= 1.0)) throw DomainError("theoretical_bound: v_eps must be >= 1");
}

double width_sum(const BoundConstants& c) {
  return upper_width_constant(c.payoff_bound) + lower_width_constant(c.payoff_bound);
}

}  // namespace

double bound_constant_discrete(const BoundConstants& c, std::size_t horizon) {
  check_bound_domain(c);
  if (horizon < 1) throw DomainError("theoretical_bound: T must be >= 1");
  const double ab = width_sum(c);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  return ab * ab * c.v_eps *
         (2.0 * std::log(static_cast<double>(horizon)) +
          std::log(pi2 * static_cast<double>(c.arm_count) / (3.0 * c.delta)));
}

double bound_constant_compact(const BoundConstants& c, std::size_t horizon) {
  check_bound_domain(c);
  if (horizon < 1) throw DomainError("theoretical_bound: T must be >= 1");
  const double ab = width_sum(c);
  const double d = static_cast<double>(c.dim);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double bracket = (2.0 + d / 2.0) * std::log(static_cast<double>(horizon)) +
                         d * std::log(2.0) + std::log(pi2 / (3.0 * c.delta));
  const double root = ab * std::sqrt(c.v_eps) * std::sqrt(bracket) + c.lipschitz * c.half_width * d;
  return root * root;
}

BoundTerms theoretical_bound_terms(const BoundConstants& c, std::size_t horizon,
                                   BoundCase which) {
  check_bound_domain(c);
  const double T = static_cast<double>(horizon);
  const double am = c.alpha * c.baseline_mu;
  BoundTerms b;
  b.constant = which == BoundCase::discrete ? bound_constant_discrete(c, horizon)
                                            : bound_constant_compact(c, horizon);
  b.baseline_gap = c.baseline_gap;
  b.sqrt_term = 2.0 * std::sqrt(b.constant * T);
  b.baseline_term = c.payoff_bound * c.baseline_gap / am;
  b.arm_term = which == BoundCase::discrete
                   ? 4.0 * static_cast<double>(c.arm_count) * b.constant / am
                   : 8.0 * b.constant / am;
  return b;
}

double theoretical_bound(const BoundConstants& c, std::size_t horizon, BoundCase which) {
  return theoretical_bound_terms(c, horizon, which).total();
}

}  // namespace copo
