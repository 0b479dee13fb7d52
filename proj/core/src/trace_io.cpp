#include "copo/trace_io.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "copo/errors.hpp"
#include "numeric.hpp"

namespace copo {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

void append_value(std::string& out, double v) {
  if (std::isnan(v)) {
    out += "nan";
  } else {
    detail::append_double(out, v);
  }
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    parts.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

long long parse_integer(std::string_view s) {
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("not an integer: '" + std::string(s) + "'");
  }
  return v;
}

// "<algo>_alpha<alpha>_seed<seed>"
void apply_file_name(RunTrace& trace, const std::string& stem) {
  const auto a = stem.find("_alpha");
  const auto s = stem.rfind("_seed");
  if (a == std::string::npos || s == std::string::npos || s < a) return;
  try {
    const Algorithm algo = parse_algorithm(stem.substr(0, a));
    const double alpha = detail::parse_double(stem.substr(a + 6, s - a - 6));
    const long long seed = parse_integer(stem.substr(s + 5));
    trace.algorithm = algo;
    trace.alpha = alpha;
    trace.seed = static_cast<std::uint64_t>(seed);
  } catch (const std::exception&) {
  }
}

ordered_json number_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace

std::string trace_file_name(const RunTrace& trace) {
  return to_string(trace.algorithm) + "_alpha" + detail::format_double(trace.alpha) + "_seed" +
         std::to_string(trace.seed) + ".csv";
}

void write_trace_csv(std::ostream& out, const RunTrace& trace) { out << trace_to_csv(trace); }

std::string trace_to_csv(const RunTrace& trace) {
  std::string s;
  s.reserve(96 * (trace.rows.size() + 1));
  s += kTraceCsvHeader;
  s += '\n';
  for (const auto& r : trace.rows) {
    s += std::to_string(r.t);
    s += ',';
    s += std::to_string(r.arm_id);
    s += ',';
    s += r.arm.to_string();
    s += ',';
    append_value(s, r.payoff);
    s += ',';
    append_value(s, r.mu_true);
    s += ',';
    append_value(s, r.budget_lcb);
    s += ',';
    append_value(s, r.budget_exact);
    s += ',';
    s += r.safe ? '1' : '0';
    s += ',';
    s += std::to_string(r.optimist_arm_id);
    s += ',';
    append_value(s, r.delta_t);
    s += '\n';
  }
  return s;
}

RunTrace read_trace_csv(std::istream& in, const std::string& source) {
  RunTrace trace;
  std::string line;
  if (!std::getline(in, line)) throw IoError(source + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceCsvHeader) {
    throw IoError(source + ": unexpected header '" + line + "'");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_commas(line);
    if (f.size() != 10) {
      throw IoError(source + ":" + std::to_string(line_no) + ": expected 10 fields, got " +
                    std::to_string(f.size()));
    }
    try {
      TraceRow r;
      r.t = static_cast<std::size_t>(parse_integer(f[0]));
      r.arm_id = parse_integer(f[1]);
      r.arm = Arm::parse(f[2]);
      r.payoff = detail::parse_double(f[3]);
      r.mu_true = detail::parse_double(f[4]);
      r.budget_lcb = detail::parse_double(f[5]);
      r.budget_exact = detail::parse_double(f[6]);
      if (f[7] != "0" && f[7] != "1") throw std::invalid_argument("safe_flag must be 0 or 1");
      r.safe = f[7] == "1";
      r.optimist_arm_id = parse_integer(f[8]);
      r.delta_t = detail::parse_double(f[9]);
      trace.rows.push_back(std::move(r));
    } catch (const std::invalid_argument& e) {
      throw IoError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!trace.rows.empty()) trace.baseline = trace.rows.front().arm;
  return trace;
}

RunTrace import_trace_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  RunTrace trace = read_trace_csv(in, path.string());
  apply_file_name(trace, path.stem().string());
  return trace;
}

RunSummary summarize_run(const RunTrace& trace, const std::string& file,
                         std::optional<double> optimal_mu) {
  RunSummary s;
  s.file = file;
  s.env_name = trace.env_name;
  s.algorithm = to_string(trace.algorithm);
  s.seed = trace.seed;
  s.alpha = trace.alpha;
  s.delta = trace.delta;
  s.config_hash = trace.config_hash;
  s.horizon = trace.horizon();
  s.valid = trace.valid;
  s.error = trace.error;
  s.final_budget_exact = trace.rows.empty() ? 0.0 : trace.rows.back().budget_exact;
  s.min_budget_exact = trace.rows.empty() ? 0.0 : trace.min_budget_exact();
  s.constraint_satisfied = trace.constraint_satisfied();
  s.v_eps_empirical = trace.empirical_v_eps();
  for (const auto& r : trace.rows) {
    if (r.arm == trace.baseline) ++s.baseline_plays;
  }
  const bool has_mu = std::none_of(trace.rows.begin(), trace.rows.end(),
                                   [](const TraceRow& r) { return std::isnan(r.mu_true); });
  if (optimal_mu && has_mu && !trace.rows.empty()) {
    s.regret = regret_metrics(trace, *optimal_mu).regret;
  }
  return s;
}

std::string summary_json(const std::vector<RunSummary>& runs,
                         const std::map<std::string, std::string>& config) {
  ordered_json doc;
  doc["schema_version"] = 1;
  doc["config"] = ordered_json::object();
  for (const auto& [k, v] : config) doc["config"][k] = v;

  std::set<std::uint64_t> seeds;
  for (const auto& r : runs) seeds.insert(r.seed);
  doc["seeds"] = std::vector<std::uint64_t>(seeds.begin(), seeds.end());
  doc["runs"] = runs.size();

  auto per_run = ordered_json::array();
  for (const auto& r : runs) {
    ordered_json j;
    j["file"] = r.file;
    j["env"] = r.env_name;
    j["algorithm"] = r.algorithm;
    j["seed"] = r.seed;
    j["alpha"] = r.alpha;
    j["delta"] = r.delta;
    j["config_hash"] = r.config_hash;
    j["T"] = r.horizon;
    j["valid"] = r.valid;
    if (!r.error.empty()) j["error"] = r.error;
    j["regret"] = r.regret ? number_or_null(*r.regret) : ordered_json(nullptr);
    j["final_budget_exact"] = number_or_null(r.final_budget_exact);
    j["min_budget_exact"] = number_or_null(r.min_budget_exact);
    j["constraint_satisfied"] = r.constraint_satisfied;
    j["baseline_plays"] = r.baseline_plays;
    j["v_eps_empirical"] = number_or_null(r.v_eps_empirical);
    per_run.push_back(std::move(j));
  }
  doc["per_run"] = std::move(per_run);

  // Grouped by (algorithm, alpha) in first-seen order.
  std::vector<std::pair<std::string, double>> keys;
  std::map<std::pair<std::string, double>, std::vector<const RunSummary*>> groups;
  for (const auto& r : runs) {
    auto key = std::make_pair(r.algorithm, r.alpha);
    if (!groups.count(key)) keys.push_back(key);
    groups[key].push_back(&r);
  }
  auto aggregate = ordered_json::array();
  for (const auto& key : keys) {
    const auto& g = groups[key];
    ordered_json a;
    a["algorithm"] = key.first;
    a["alpha"] = key.second;
    a["runs"] = g.size();
    std::size_t satisfied = 0, valid = 0;
    double min_budget = std::numeric_limits<double>::infinity();
    std::vector<double> regrets;
    for (const auto* r : g) {
      satisfied += r->constraint_satisfied ? 1 : 0;
      valid += r->valid ? 1 : 0;
      min_budget = std::min(min_budget, r->min_budget_exact);
      if (r->regret) regrets.push_back(*r->regret);
    }
    a["valid_runs"] = valid;
    a["constraint_satisfied_runs"] = satisfied;
    a["min_budget_exact"] = number_or_null(min_budget);
    if (!regrets.empty() && regrets.size() == g.size()) {
      double mean = 0.0;
      for (double x : regrets) mean += x;
      mean /= static_cast<double>(regrets.size());
      double var = 0.0;
      for (double x : regrets) var += (x - mean) * (x - mean);
      const double n = static_cast<double>(regrets.size());
      a["mean_regret"] = mean;
      a["stderr_regret"] = n > 1 ? std::sqrt(var / (n - 1) / n) : 0.0;
      a["median_regret"] = median(regrets);
    } else {
      a["mean_regret"] = nullptr;
      a["stderr_regret"] = nullptr;
      a["median_regret"] = nullptr;
    }
    aggregate.push_back(std::move(a));
  }
  doc["aggregate"] = std::move(aggregate);
  return doc.dump(2) + "\n";
}

std::vector<fs::path> export_traces(const std::vector<RunTrace>& traces, const fs::path& dir,
                                    const std::map<std::string, std::string>& config) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());

  std::vector<fs::path> written;
  std::vector<RunSummary> summaries;
  std::set<std::string> names;
  for (const auto& trace : traces) {
    const std::string name = trace_file_name(trace);
    if (!names.insert(name).second) {
      throw PreconditionError("export_traces: duplicate output file '" + name + "'");
    }
    const fs::path path = dir / name;
    write_file(path, trace_to_csv(trace));
    written.push_back(path);
    summaries.push_back(summarize_run(trace, name, trace.optimal_mu));
  }
  const fs::path summary = dir / "summary.json";
  write_file(summary, summary_json(summaries, config));
  written.push_back(summary);
  return written;
}

fs::path summarize_directory(const fs::path& dir, std::optional<double> optimal_mu,
                             const std::map<std::string, std::string>& config) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("'" + dir.string() + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") {
      files.push_back(entry.path());
    }
  }
  if (ec) throw IoError("cannot list '" + dir.string() + "': " + ec.message());
  std::sort(files.begin(), files.end());
  std::vector<RunSummary> summaries;
  for (const auto& f : files) {
    const RunTrace trace = import_trace_csv(f);
    summaries.push_back(summarize_run(trace, f.filename().string(), optimal_mu));
  }
  const fs::path summary = dir / "summary.json";
  write_file(summary, summary_json(summaries, config));
  return summary;
}

}  // namespace copo
