#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "copo/config_file.hpp"
#include "copo/environments.hpp"
#include "copo/errors.hpp"
#include "copo/harness.hpp"
#include "copo/trace_io.hpp"

namespace copo::cli {

namespace {

// Flag values stay as text so that config-file fallbacks go through the same checks.
struct Raw {
  std::map<std::string, std::string> values;  // config key -> text
  std::map<std::string, CLI::Option*> options;

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help,
           const std::string& type = "TEXT") {
    options[key] = app->add_option(flag, values[key], help)->type_name(type);
  }
  void add_flag(CLI::App* app, const std::string& flag, const std::string& key,
                const std::string& help) {
    options[key] = app->add_flag(flag, help);
  }
  bool given(const std::string& key) const {
    auto it = options.find(key);
    return it != options.end() && it->second->count() > 0;
  }
};

class Settings {
 public:
  Settings(const Raw& raw, KeyValueConfig config) : raw_(raw), config_(std::move(config)) {}

  std::optional<std::string> text(const std::string& key) const {
    if (raw_.given(key)) return raw_.values.at(key);
    return config_.get(key);
  }
  std::string string(const std::string& key, const std::string& fallback) const {
    return text(key).value_or(fallback);
  }
  bool flag(const std::string& key) const {
    if (raw_.given(key)) return true;
    auto v = config_.get(key);
    return v && (*v == "1" || *v == "true" || *v == "yes");
  }
  std::optional<double> real(const std::string& key) const {
    auto v = text(key);
    if (!v) return std::nullopt;
    try {
      std::size_t used = 0;
      const double d = std::stod(*v, &used);
      if (used != v->size()) throw std::invalid_argument("trailing characters");
      return d;
    } catch (const std::exception&) {
      throw PreconditionError("--" + flag_name(key) + ": not a number: '" + *v + "'");
    }
  }
  std::optional<long long> integer(const std::string& key) const {
    auto v = text(key);
    if (!v) return std::nullopt;
    long long out = 0;
    auto res = std::from_chars(v->data(), v->data() + v->size(), out);
    if (res.ec != std::errc() || res.ptr != v->data() + v->size()) {
      throw PreconditionError("--" + flag_name(key) + ": not an integer: '" + *v + "'");
    }
    return out;
  }
  const KeyValueConfig& config() const { return config_; }

  static std::string flag_name(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return key;
  }

 private:
  const Raw& raw_;
  KeyValueConfig config_;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_real(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double d = std::stod(text, &used);
    if (used == text.size()) return d;
  } catch (const std::exception&) {
  }
  throw PreconditionError(what + ": not a number: '" + text + "'");
}

std::string default_output_dir() {
  if (const char* env = std::getenv("COPO_OUTPUT_DIR"); env && *env) return env;
  return "copo_out";
}

void add_experiment_options(CLI::App* app, Raw& raw) {
  raw.add(app, "--env", "env", "Environment: synthetic, synthetic-box, inventory");
  raw.add(app, "--T", "T", "Horizon T >= 1 (steps after the forced baseline step)", "INT");
  raw.add(app, "--delta", "delta", "Confidence level in (0, 1)", "FLOAT");
  raw.add(app, "--seeds", "seeds", "Number of seeds, starting at --seed", "INT");
  raw.add(app, "--seed", "seed", "First seed", "UINT");
  raw.add(app, "--seed-list", "seed_list", "Explicit comma-separated seeds");
  raw.add(app, "--checkpoint", "checkpoint", "Checkpoint period C (constraint every C steps)",
          "INT");
  raw.add(app, "--budget-mode", "budget_mode", "paper_exact or frozen");
  raw.add(app, "--d2-mode", "d2_mode",
          "auto, closed_form, quadrature, monte_carlo or component_bound");
  raw.add(app, "--baseline", "baseline", "Baseline arm, ';' between coordinates");
  raw.add(app, "--baseline-mu", "baseline_mu", "Baseline mean (defaults to the oracle)",
          "FLOAT");
  raw.add(app, "--out", "out", "Output directory (default $COPO_OUTPUT_DIR or ./copo_out)");
  raw.add(app, "--config", "config", "Key-value config file; flags take precedence");
  raw.add(app, "--jobs", "jobs", "Concurrent runs", "INT");
  raw.add_flag(app, "--allow-long-exact", "allow_long_exact",
               "Allow paper_exact budget mode above T = 5000");
}

struct Experiment {
  std::string env_name;
  std::unique_ptr<Environment> env;
  RunConfig base;
  std::vector<std::uint64_t> seeds;
  std::string out_dir;
  std::size_t jobs = 1;
  std::map<std::string, std::string> summary_config;
};

Experiment resolve_experiment(const Settings& s) {
  Experiment e;
  e.env_name = s.string("env", "synthetic");
  e.env = make_environment(e.env_name, s.config());

  RunConfig& c = e.base;
  const auto T = s.integer("T").value_or(1000);
  if (T < 1) throw PreconditionError("--T must be >= 1");
  c.horizon = static_cast<std::size_t>(T);
  c.delta = s.real("delta").value_or(0.1);
  if (!(c.delta > 0.0 && c.delta < 1.0)) throw PreconditionError("--delta must lie in (0, 1)");
  if (auto cp = s.integer("checkpoint")) {
    if (*cp < 1) throw PreconditionError("--checkpoint must be >= 1");
    c.checkpoint_period = static_cast<std::size_t>(*cp);
  }
  c.budget_mode = parse_budget_mode(s.string("budget_mode", "paper_exact"));
  const std::string d2 = s.string("d2_mode", "auto");
  c.d2_mode = d2 == "auto" ? (e.env->family().dim() == 1 ? Renyi2Mode::quadrature
                                                          : Renyi2Mode::component_bound)
                           : parse_renyi2_mode(d2);
  if (auto b = s.text("baseline")) c.baseline = Arm::parse(*b);
  c.baseline_mu = s.real("baseline_mu");
  c.allow_long_exact = s.flag("allow_long_exact");

  if (auto list = s.text("seed_list")) {
    for (const auto& item : split_list(*list)) {
      std::uint64_t v = 0;
      auto res = std::from_chars(item.data(), item.data() + item.size(), v);
      if (res.ec != std::errc() || res.ptr != item.data() + item.size()) {
        throw PreconditionError("--seed-list: not a seed: '" + item + "'");
      }
      e.seeds.push_back(v);
    }
    if (e.seeds.empty()) throw PreconditionError("--seed-list is empty");
  } else {
    const auto count = s.integer("seeds").value_or(1);
    const auto first = s.integer("seed").value_or(0);
    if (count < 1) throw PreconditionError("--seeds must be >= 1");
    if (first < 0) throw PreconditionError("--seed must be >= 0");
    for (long long i = 0; i < count; ++i) e.seeds.push_back(static_cast<std::uint64_t>(first + i));
  }
  const auto jobs = s.integer("jobs").value_or(1);
  if (jobs < 1) throw PreconditionError("--jobs must be >= 1");
  e.jobs = static_cast<std::size_t>(jobs);
  e.out_dir = s.string("out", default_output_dir());

  auto& m = e.summary_config;
  for (const auto& [k, v] : s.config().entries()) m[k] = v;
  m["env"] = e.env_name;
  m["T"] = std::to_string(c.horizon);
  m["delta"] = s.string("delta", "0.1");
  m["budget_mode"] = to_string(c.budget_mode);
  m["d2_mode"] = to_string(c.d2_mode);
  m["checkpoint"] = c.checkpoint_period ? std::to_string(*c.checkpoint_period) : "none";
  return e;
}

double resolve_alpha(const std::string& text) {
  const double a = parse_real(text, "--alpha");
  if (!(a >= 0.0 && a <= 1.0)) throw PreconditionError("--alpha must lie in [0, 1]");
  return a;
}

int execute(Experiment& e, const std::vector<RunConfig>& configs, std::ostream& out,
            std::ostream& err) {
  const auto traces = run_batch(*e.env, configs, e.jobs);
  const auto files = export_traces(traces, e.out_dir, e.summary_config);
  std::size_t invalid = 0;
  for (const auto& t : traces) {
    if (!t.valid) {
      ++invalid;
      err << "copo: " << to_string(t.algorithm) << " seed " << t.seed << ": " << t.error << "\n";
    }
  }
  out << "wrote " << traces.size() << " trace(s) and summary.json to " << e.out_dir << "\n";
  return invalid ? runtime_failure : ok;
}

int cmd_run(const Raw& raw, std::ostream& out, std::ostream& err, const KeyValueConfig& cfg) {
  Settings s(raw, cfg);
  Experiment e = resolve_experiment(s);
  e.base.algorithm = parse_algorithm(s.string("algo", "copo"));
  e.base.alpha = resolve_alpha(s.string("alpha", "0.1"));
  e.summary_config["algo"] = to_string(e.base.algorithm);
  e.summary_config["alpha"] = s.string("alpha", "0.1");
  std::vector<RunConfig> configs;
  for (auto seed : e.seeds) {
    RunConfig c = e.base;
    c.seed = seed;
    configs.push_back(c);
  }
  return execute(e, configs, out, err);
}

int cmd_sweep(const Raw& raw, std::ostream& out, std::ostream& err, const KeyValueConfig& cfg) {
  Settings s(raw, cfg);
  Experiment e = resolve_experiment(s);
  std::vector<Algorithm> algos;
  for (const auto& a : split_list(s.string("algos", "optimist,copo,icopo,baseline"))) {
    algos.push_back(parse_algorithm(a));
  }
  std::vector<double> alphas;
  for (const auto& a : split_list(s.string("alphas", "0.1"))) alphas.push_back(resolve_alpha(a));
  if (algos.empty() || alphas.empty()) throw PreconditionError("--algos and --alphas need values");
  e.summary_config["algos"] = s.string("algos", "optimist,copo,icopo,baseline");
  e.summary_config["alphas"] = s.string("alphas", "0.1");
  std::vector<RunConfig> configs;
  for (auto algo : algos) {
    for (double alpha : alphas) {
      for (auto seed : e.seeds) {
        RunConfig c = e.base;
        c.algorithm = algo;
        c.alpha = alpha;
        c.seed = seed;
        configs.push_back(c);
      }
    }
  }
  return execute(e, configs, out, err);
}

int cmd_summarize(const Raw& raw, std::ostream& out, const KeyValueConfig& cfg) {
  Settings s(raw, cfg);
  const auto dir = s.text("dir");
  if (!dir) throw PreconditionError("summarize needs --dir");
  std::optional<double> optimal = s.real("optimal_mu");
  std::map<std::string, std::string> summary_config;
  if (!optimal) {
    if (auto name = s.text("env")) {
      optimal = make_environment(*name, cfg)->optimal_mu();
      summary_config["env"] = *name;
    }
  }
  const auto path = summarize_directory(*dir, optimal, summary_config);
  out << "wrote " << path.string() << "\n";
  return ok;
}

int cmd_bound(const Raw& raw, std::ostream& out, const KeyValueConfig& cfg) {
  Settings s(raw, cfg);
  const std::string which = s.string("case", "discrete");
  BoundCase bc;
  if (which == "discrete") {
    bc = BoundCase::discrete;
  } else if (which == "compact") {
    bc = BoundCase::compact;
  } else {
    throw PreconditionError("--case must be discrete or compact");
  }
  const auto T = s.integer("T");
  if (!T || *T < 1) throw PreconditionError("bound needs --T >= 1");
  BoundConstants c;
  c.payoff_bound = s.real("payoff_bound").value_or(1.0);
  c.v_eps = s.real("v_eps").value_or(1.0);
  c.delta = s.real("delta").value_or(0.1);
  c.alpha = s.real("alpha").value_or(0.1);
  const auto mu_b = s.real("mu_b");
  if (!mu_b) throw PreconditionError("bound needs --mu-b");
  c.baseline_mu = *mu_b;
  c.baseline_gap = s.real("gap").value_or(0.0);
  const auto K = s.integer("K").value_or(1);
  const auto d = s.integer("d").value_or(1);
  if (K < 1 || d < 1) throw PreconditionError("--K and --d must be >= 1");
  c.arm_count = static_cast<std::size_t>(K);
  c.dim = static_cast<std::size_t>(d);
  c.half_width = s.real("D").value_or(1.0);
  c.lipschitz = s.real("P").value_or(0.0);

  const auto terms = theoretical_bound_terms(c, static_cast<std::size_t>(*T), bc);
  out << std::setprecision(17);
  out << "case " << which << "\n";
  out << "T " << *T << "\n";
  out << (bc == BoundCase::discrete ? "L " : "L' ") << terms.constant << "\n";
  out << "gap_term " << terms.baseline_gap << "\n";
  out << "sqrt_term " << terms.sqrt_term << "\n";
  out << "baseline_term " << terms.baseline_term << "\n";
  out << "arm_term " << terms.arm_term << "\n";
  out << "bound " << terms.total() << "\n";
  return ok;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Conservative policy optimization experiments", "copo"};
  app.require_subcommand(1);

  Raw run_raw, sweep_raw, sum_raw, bound_raw;

  auto* run = app.add_subcommand("run", "Run one configuration across seeds and export traces");
  add_experiment_options(run, run_raw);
  run_raw.add(run, "--algo", "algo", "optimist, copo, icopo, icopo2 or baseline");
  run_raw.add(run, "--alpha", "alpha", "Conservative level in [0, 1]", "FLOAT");

  auto* sweep = app.add_subcommand("sweep", "Cross algorithms and alpha values across seeds");
  add_experiment_options(sweep, sweep_raw);
  sweep_raw.add(sweep, "--algos", "algos", "Comma-separated algorithms");
  sweep_raw.add(sweep, "--alphas", "alphas", "Comma-separated alpha values");

  auto* summarize = app.add_subcommand("summarize", "Aggregate trace CSVs into summary.json");
  sum_raw.add(summarize, "--dir", "dir", "Directory with trace CSVs");
  sum_raw.add(summarize, "--env", "env", "Environment whose oracle gives the optimal mean");
  sum_raw.add(summarize, "--optimal-mu", "optimal_mu", "Optimal mean for regret", "FLOAT");
  sum_raw.add(summarize, "--config", "config", "Key-value config file for --env");

  auto* bound = app.add_subcommand("bound", "Print the regret bound for given constants");
  bound_raw.add(bound, "--case", "case", "discrete or compact");
  bound_raw.add(bound, "--T", "T", "Horizon", "INT");
  bound_raw.add(bound, "--K", "K", "Number of arms (discrete)", "INT");
  bound_raw.add(bound, "--d", "d", "Dimension (compact)", "INT");
  bound_raw.add(bound, "--D", "D", "Box half width (compact)", "FLOAT");
  bound_raw.add(bound, "--P", "P", "Lipschitz constant (compact)", "FLOAT");
  bound_raw.add(bound, "--v-eps", "v_eps", "Uniform d2 bound", "FLOAT");
  bound_raw.add(bound, "--delta", "delta", "Confidence level", "FLOAT");
  bound_raw.add(bound, "--alpha", "alpha", "Conservative level", "FLOAT");
  bound_raw.add(bound, "--mu-b", "mu_b", "Baseline mean", "FLOAT");
  bound_raw.add(bound, "--gap", "gap", "Baseline gap", "FLOAT");
  bound_raw.add(bound, "--payoff-bound", "payoff_bound", "Sup norm of the payoff", "FLOAT");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(std::move(rev));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "copo: " << e.what() << "\n";
    return usage_error;
  }

  try {
    auto load = [](const Raw& raw) {
      if (raw.given("config")) return KeyValueConfig::load(raw.values.at("config"));
      return KeyValueConfig{};
    };
    if (run->parsed()) return cmd_run(run_raw, out, err, load(run_raw));
    if (sweep->parsed()) return cmd_sweep(sweep_raw, out, err, load(sweep_raw));
    if (summarize->parsed()) return cmd_summarize(sum_raw, out, load(sum_raw));
    if (bound->parsed()) return cmd_bound(bound_raw, out, KeyValueConfig{});
  } catch (const PreconditionError& e) {
    err << "copo: " << e.what() << "\n";
    return usage_error;
  } catch (const DomainError& e) {
    err << "copo: " << e.what() << "\n";
    return usage_error;
  } catch (const std::exception& e) {
    err << "copo: " << e.what() << "\n";
    return runtime_failure;
  }
  return usage_error;
}

}  // namespace copo::cli
