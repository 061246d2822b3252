#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "omas/bounds.hpp"
#include "omas/graphon.hpp"
#include "omas/openmas.hpp"
#include "omas/spectral.hpp"

namespace omas {

inline constexpr const char* kToolVersion = "0.3.0";

enum class ExperimentKind { replacements, open, bound_sweep, oracle_check };
std::string to_string(ExperimentKind k);

/// How the E[e^{-2γμ₂}] term feeding a bound is obtained.
///   auto        exact enumeration for n ≤ 5, Monte Carlo above; closed form for complete graphs
///   exact       enumeration only (n ≤ 5)
///   monte-carlo sampling with `trials` graphs
///   thm3        the analytic upper bound from μ̄₂
/// Monte Carlo values are inflated by `inflation` standard errors.
struct ETermSpec {
  std::string method = "auto";
  std::size_t trials = 10000;
  double inflation = 3.0;
};

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::replacements;
  nlohmann::json graphon_doc;
  Graphon graphon = Graphon::constant(1.0);

  ReplacementConfig replacement;
  OpenSystemConfig open;

  std::size_t trials = 100;
  double burn_in = 0.5;
  std::filesystem::path out = "out";
  std::uint64_t seed = 0;
  ETermSpec e_term;
  std::size_t trajectory_files = 0;  // per-event CSVs for the first k trials

  // bound-sweep
  std::string formula = "thm1";
  std::vector<double> gammas;
  std::vector<std::size_t> sizes;
  double sigma2 = 1.0;
  double epsilon = default_epsilon();

  // oracle-check
  std::size_t oracle_n = 4;
  double oracle_gamma = 1.0;
  std::size_t oracle_trials = 100000;

  nlohmann::json source;  // document as given, echoed into the manifest
};

/// Parses and validates an experiment document; throws std::invalid_argument
/// naming the offending field.
ExperimentSpec parse_experiment(const nlohmann::json& doc);
ExperimentSpec load_experiment(const std::filesystem::path& path);

struct RunManifest {
  nlohmann::json spec;
  std::string tool_version = kToolVersion;
  std::uint64_t seed = 0;
  std::string started;
  std::string finished;
  std::map<std::string, std::string> digests;  // file name → SHA-256

  nlohmann::json to_json() const;
};

struct RunResult {
  nlohmann::json summary;
  RunManifest manifest;
};

/// Executes the experiment and writes summary.json, trials.csv (or
/// sweep.csv), optional trajectories and manifest.json into spec.out.
RunResult run(const ExperimentSpec& spec);

/// Computes the E-term for size n under the experiment's E-term rule.
ExpMu2Estimate e_term_for(const Graphon& w, std::size_t n, double gamma, const ETermSpec& rule, std::uint64_t seed);
/// E-term maximized over n ∈ [n_min, n_max].
ExpMu2Estimate e_term_max_for(const Graphon& w, std::size_t n_min, std::size_t n_max, double gamma,
                              const ETermSpec& rule, std::uint64_t seed);

struct ComparisonRow {
  std::string file;
  std::string kind;
  std::string formula;
  double gamma = 0.0;
  std::string size;  // "n" or "n_min-n_max"
  std::optional<double> empirical;
  std::optional<double> stderr_;
  std::optional<double> bound;
  bool valid = false;
};

/// Reads summary files, returns rows grouped by formula tag (stable within a group).
std::vector<ComparisonRow> compare_bounds(const std::vector<std::filesystem::path>& summaries);
void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows);
/// Long format: file, formula, gamma, size, metric, value.
void write_comparison_long(std::ostream& out, const std::vector<ComparisonRow>& rows);

std::string sha256_file(const std::filesystem::path& path);

}  // namespace omas
