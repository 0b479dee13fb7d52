#pragma once

// CSV traces and the JSON run summary.
//
// CSV columns: t, arm_id, arm_params, payoff, mu_true, budget_lcb, budget_exact,
// safe_flag, optimist_arm_id, delta_t. Doubles use the shortest text that parses
// back to the same value; missing values are written as "nan".

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "copo/harness.hpp"

namespace copo {

inline constexpr const char* kTraceCsvHeader =
    "t,arm_id,arm_params,payoff,mu_true,budget_lcb,budget_exact,safe_flag,optimist_arm_id,delta_t";

/// "<algo>_alpha<alpha>_seed<seed>.csv"
std::string trace_file_name(const RunTrace& trace);

void write_trace_csv(std::ostream& out, const RunTrace& trace);
std::string trace_to_csv(const RunTrace& trace);

/// Rows only; algorithm, alpha and seed are recovered from the file name when it
/// follows trace_file_name. IoError with the path on any failure.
RunTrace read_trace_csv(std::istream& in, const std::string& source = "<stream>");
RunTrace import_trace_csv(const std::filesystem::path& path);

struct RunSummary {
  std::string file;
  std::string env_name;
  std::string algorithm;
  std::uint64_t seed = 0;
  double alpha = 0.0;
  double delta = 0.0;
  std::string config_hash;
  std::size_t horizon = 0;
  bool valid = true;
  std::string error;
  std::optional<double> regret;  // needs mu_true and an optimal mean
  double final_budget_exact = 0.0;
  double min_budget_exact = 0.0;
  bool constraint_satisfied = true;
  std::size_t baseline_plays = 0;
  double v_eps_empirical = 1.0;
};

RunSummary summarize_run(const RunTrace& trace, const std::string& file,
                         std::optional<double> optimal_mu);

/// JSON document: {"schema_version", "config", "seeds", "runs", "per_run", "aggregate"}.
std::string summary_json(const std::vector<RunSummary>& runs,
                         const std::map<std::string, std::string>& config);

/// Writes one CSV per trace plus summary.json into `dir` (created if missing).
/// An empty trace list writes only the summary. Returns the written paths.
std::vector<std::filesystem::path> export_traces(
    const std::vector<RunTrace>& traces, const std::filesystem::path& dir,
    const std::map<std::string, std::string>& config = {});

/// Reads every *.csv in `dir` (sorted by name) and writes summary.json there.
/// Regret is reported only when optimal_mu is given.
std::filesystem::path summarize_directory(const std::filesystem::path& dir,
                                          std::optional<double> optimal_mu,
                                          const std::map<std::string, std::string>& config = {});

}  // namespace copo
