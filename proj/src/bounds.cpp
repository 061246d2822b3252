#include "omas/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "omas/errors.hpp"
#include "omas/spectral.hpp"

namespace omas {

namespace {

void check_e_term(double e, const char* who) {
  if (!(e > 0.0 && e <= 1.0)) {
    std::ostringstream os;
    os << who << ": E-term " << e << " outside (0,1]";
    throw DomainError(os.str());
  }
}

void check_common(double sigma2, double gamma, const char* who) {
  if (!(sigma2 >= 0.0)) throw DomainError(std::string(who) + ": sigma2 must be nonnegative");
  if (!(gamma >= 0.0)) throw DomainError(std::string(who) + ": gamma must be nonnegative");
}

}  // namespace

Prop1Maps prop1_maps(double v, std::size_t n, double sigma2, double lambda2, double dt) {
  if (n < 2) throw DomainError("prop1_maps: departure map needs n >= 2");
  const double nd = static_cast<double>(n);
  return {
      v * std::exp(-2.0 * lambda2 * dt),
      (1.0 - 1.0 / ((nd - 1.0) * (nd - 1.0))) * v,
      nd / (nd + 1.0) * v + sigma2 / (nd + 1.0),
      (nd * nd - nd - 1.0) / (nd * nd) * v + (nd * nd - 1.0) / (nd * nd * nd) * sigma2,
  };
}

bool BoundReport::valid() const {
  if (!value) return false;
  for (const auto& f : flags)
    if (!f.ok) return false;
  return true;
}

std::string BoundReport::failed_condition() const {
  for (const auto& f : flags)
    if (!f.ok) return f.name;
  return value ? std::string{} : std::string{"not-evaluable"};
}

nlohmann::json to_json(const BoundReport& r) {
  nlohmann::json flags = nlohmann::json::object();
  for (const auto& f : r.flags) flags[f.name] = f.ok;
  nlohmann::json j{{"formula", r.formula}, {"inputs", r.inputs}, {"e_term_source", r.e_term_source},
                   {"flags", flags}, {"valid", r.valid()}};
  j["value"] = r.value ? nlohmann::json(*r.value) : nlohmann::json(nullptr);
  if (!r.valid()) j["failed_condition"] = r.failed_condition();
  return j;
}

BoundReport bound_report_from_json(const nlohmann::json& j) {
  BoundReport r;
  r.formula = j.at("formula").get<std::string>();
  if (!j.at("value").is_null()) r.value = j.at("value").get<double>();
  r.inputs = j.at("inputs").get<std::map<std::string, double>>();
  r.e_term_source = j.value("e_term_source", "");
  for (const auto& [name, ok] : j.at("flags").items()) r.flags.push_back({name, ok.get<bool>()});
  return r;
}

BoundReport thm1_bound(std::size_t n, double sigma2, double gamma, double e_term, std::string e_term_source) {
  if (n < 2) throw DomainError("thm1_bound: need n >= 2");
  check_common(sigma2, gamma, "thm1_bound");
  check_e_term(e_term, "thm1_bound");
  const double nd = static_cast<double>(n);
  const double denominator = nd * (nd * nd - (nd * nd - nd - 1.0) * e_term);
  BoundReport r;
  r.formula = "thm1";
  r.inputs = {{"n", nd}, {"sigma2", sigma2}, {"gamma", gamma}, {"e_term", e_term}};
  r.e_term_source = std::move(e_term_source);
  r.flags.push_back({"denominator_positive", denominator > 0.0});
  if (denominator > 0.0) r.value = sigma2 * (nd * nd - 1.0) / denominator;
  return r;
}

BoundReport thm2_bound(std::size_t n_min, std::size_t n_max, double sigma2, double gamma, double e_term_max,
                       std::string e_term_source) {
  if (n_max <= 3) throw HypothesisViolation("thm2_bound: requires n_max > 3");
  if (n_min < 1) throw DomainError("thm2_bound: need n_min >= 1");
  if (n_min > n_max) throw DomainError("thm2_bound: need n_min <= n_max");
  check_common(sigma2, gamma, "thm2_bound");
  check_e_term(e_term_max, "thm2_bound");
  const double lo = static_cast<double>(n_min);
  const double hi = static_cast<double>(n_max);
  const double a = (hi - 1.0) * (hi - 1.0);
  const double denominator = 2.0 * (lo + 1.0) * (a - hi * (hi - 2.0) * e_term_max);
  BoundReport r;
  r.formula = "thm2";
  r.inputs = {{"n_min", lo}, {"n_max", hi}, {"sigma2", sigma2}, {"gamma", gamma}, {"e_term", e_term_max}};
  r.e_term_source = std::move(e_term_source);
  r.flags.push_back({"n_max_gt_3", true});
  r.flags.push_back({"denominator_positive", denominator > 0.0});
  if (denominator > 0.0) r.value = sigma2 * a / denominator;
  return r;
}

std::optional<double> psi(double n, double gamma) {
  if (!(gamma >= 0.0) || !(n >= 1.0)) return std::nullopt;
  if (!(n > 9.0 * gamma)) return std::nullopt;
  if (gamma == 0.0) return 0.0;
  const double pi = std::numbers::pi;
  const double a = 4.0 / (9.0 * pi * n) * (n - 9.0 * gamma) * (n - 9.0 * gamma);
  const double s = std::sqrt(n * std::log(2.0 * std::numbers::e * n)) - 3.0 * gamma;
  const double b = s * s / n;
  // sqrt(1 - e^{-x}) via expm1 keeps the difference accurate when both terms are near 1.
  const double diff = std::sqrt(-std::expm1(-a)) - std::sqrt(-std::expm1(-b));
  return 12.0 * gamma * std::sqrt(pi * n) * std::exp(9.0 * gamma * gamma / n) * diff;
}

BoundReport thm3_bound(double mu2_bar, std::size_t n, double gamma) {
  if (!(mu2_bar >= 0.0 && mu2_bar <= 1.0)) throw DomainError("thm3_bound: mu2_bar outside [0,1]");
  if (n < 1) throw DomainError("thm3_bound: need n >= 1");
  if (!(gamma >= 0.0)) throw DomainError("thm3_bound: gamma must be nonnegative");
  const double nd = static_cast<double>(n);
  BoundReport r;
  r.formula = "thm3";
  r.inputs = {{"n", nd}, {"gamma", gamma}, {"mu2_bar", mu2_bar}};
  r.e_term_source = "mu2_bar";
  const auto correction = psi(nd, gamma);
  r.flags.push_back({"psi_domain", correction.has_value()});
  if (!correction) return r;
  const double spread = std::exp(6.0 * gamma * std::sqrt(std::log(2.0 * std::numbers::e * nd) / nd));
  const double value = std::exp(-2.0 * gamma * mu2_bar) * (spread + *correction);
  r.value = value;
  r.inputs["psi"] = *correction;
  r.flags.push_back({"below_one", value < 1.0});
  return r;
}

BoundReport thm3_bound(const Graphon& w, std::size_t n, double gamma, double epsilon) {
  double mu2_bar = 0.0;
  std::string source = "dense-expected-graph";
  const auto& sbm = w.as_sbm();
  const auto counts = sbm ? sbm->block_counts(n) : std::vector<std::size_t>{};
  // The shortcut's within-block eigenvalue δ_k only exists for blocks holding two or more vertices.
  const bool reducible = sbm && n >= sbm->blocks() &&
                         std::all_of(counts.begin(), counts.end(), [](std::size_t c) { return c >= 2; });
  if (reducible) {
    mu2_bar = sbm_mu2_analytic(*sbm, n);
    source = "sbm-analytic";
  } else {
    mu2_bar = mu2(expected_graph(w, n));
  }
  BoundReport r = thm3_bound(std::clamp(mu2_bar, 0.0, 1.0), n, gamma);
  r.e_term_source = source;
  r.inputs["epsilon"] = epsilon;
  r.flags.push_back({"large_enough", large_enough(n, epsilon, w).all()});
  return r;
}

LargeEnough large_enough(std::size_t n, double epsilon, const PiecewiseLipschitz& descriptor, double max_degree) {
  if (!(epsilon > 0.0 && epsilon < std::exp(-1.0)))
    throw HypothesisViolation("large_enough: epsilon must lie in (0, 1/e)");
  if (n < 1) throw DomainError("large_enough: need n >= 1");
  const double nd = static_cast<double>(n);
  const double k = static_cast<double>(descriptor.interior_points());
  LargeEnough c;
  // A single interval has no interior boundary to resolve.
  c.interval_widths = descriptor.interior_points() == 0 || 2.0 / nd < descriptor.min_interval_width();
  c.degree = std::log(2.0 * nd / epsilon) / nd + (2.0 * k + 3.0 * descriptor.lipschitz) / nd < max_degree;
  c.tail = nd * std::exp(-nd / 5.0) < epsilon;
  c.log_growth = 9.0 * std::log(2.0 * std::numbers::e * nd) < nd;
  return c;
}

LargeEnough large_enough(std::size_t n, double epsilon, const Graphon& w) {
  if (!w.descriptor()) throw DomainError("large_enough: graphon has no piecewise-Lipschitz descriptor");
  return large_enough(n, epsilon, *w.descriptor(), max_degree(w));
}

nlohmann::json to_json(const LargeEnough& c) {
  return {{"interval_widths", c.interval_widths}, {"degree", c.degree}, {"tail", c.tail},
          {"log_growth", c.log_growth}, {"all", c.all()}};
}

double expected_n_limit(std::size_t n_min, std::size_t n_max) {
  if (n_max <= n_min) throw DomainError("expected_n_limit: need n_max > n_min");
  return (static_cast<double>(n_max) + static_cast<double>(n_min)) / 2.0;
}

double expected_n_step(double n, std::size_t n_min, std::size_t n_max) {
  if (n_max <= n_min) throw DomainError("expected_n_step: need n_max > n_min");
  const double tau = 1.0 / static_cast<double>(n_max - n_min);
  return (1.0 - 2.0 * tau) * n + tau * (static_cast<double>(n_max) + static_cast<double>(n_min));
}

}  // namespace omas
