#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "omas/graphon.hpp"

namespace omas {

/// Right-hand sides of the four one-step disagreement maps.
struct Prop1Maps {
  double continuous;   // V e^{-2 λ₂ dt}
  double departure;    // (1 - 1/(n-1)²) V
  double arrival;      // n/(n+1) V + σ²/(n+1)
  double replacement;  // (n²-n-1)/n² V + (n²-1)/n³ σ²
};

Prop1Maps prop1_maps(double v, std::size_t n, double sigma2, double lambda2, double dt);

struct BoundFlag {
  std::string name;
  bool ok = false;
};

/// A closed-form bound together with its inputs and validity conditions.
/// `value` is empty when the formula cannot be evaluated at all.
struct BoundReport {
  std::string formula;  // "thm1" | "thm2" | "thm3"
  std::optional<double> value;
  std::map<std::string, double> inputs;
  std::string e_term_source;
  std::vector<BoundFlag> flags;

  bool valid() const;
  /// Name of the first failing flag, empty when valid.
  std::string failed_condition() const;
};

nlohmann::json to_json(const BoundReport& r);
BoundReport bound_report_from_json(const nlohmann::json& j);

/// Steady-state bound for n agents under replacements, E-term = E[e^{-2γμ₂}].
BoundReport thm1_bound(std::size_t n, double sigma2, double gamma, double e_term,
                       std::string e_term_source = "given");

/// Steady-state bound under arrivals/departures, E-term = max_n E[e^{-2γμ₂⁽ⁿ⁾}].
BoundReport thm2_bound(std::size_t n_min, std::size_t n_max, double sigma2, double gamma, double e_term_max,
                       std::string e_term_source = "given");

/// Correction term Ψ(n); empty outside its domain (n ≤ 9γ).
std::optional<double> psi(double n, double gamma);

/// Upper bound on E[e^{-2γμ₂}] from μ̄₂ of the expected graph.
BoundReport thm3_bound(double mu2_bar, std::size_t n, double gamma);

/// thm3_bound with μ̄₂ computed from the graphon (block reduction for SBM,
/// dense expected-graph spectrum otherwise) and the large-n conditions
/// attached as an extra validity flag.
BoundReport thm3_bound(const Graphon& w, std::size_t n, double gamma, double epsilon);

struct LargeEnough {
  bool interval_widths = false;  // 2/n < min_k (α_k - α_{k-1})
  bool degree = false;           // (1/n) log(2n/ε) + (2K + 3L)/n < max_x d(x)
  bool tail = false;             // n e^{-n/5} < ε
  bool log_growth = false;       // 9 log(2en) < n
  bool all() const { return interval_widths && degree && tail && log_growth; }
};

inline double default_epsilon() { return std::exp(-1.0) / 2.0; }

LargeEnough large_enough(std::size_t n, double epsilon, const PiecewiseLipschitz& descriptor, double max_degree);
/// Uses the graphon's descriptor and its exact (SBM) or grid maximum degree.
LargeEnough large_enough(std::size_t n, double epsilon, const Graphon& w);

nlohmann::json to_json(const LargeEnough& c);

/// Limit of the expected size of the birth-death size process.
double expected_n_limit(std::size_t n_min, std::size_t n_max);

/// One step of the expected-size recursion: (1 - 2τ) n + τ(n_max + n_min).
double expected_n_step(double n, std::size_t n_min, std::size_t n_max);

}  // namespace omas
