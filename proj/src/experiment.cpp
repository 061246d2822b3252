#include "omas/experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>

#include "omas/errors.hpp"
#include "omas/parallel.hpp"
#include "omas/rng.hpp"

namespace omas {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::replacements: return "replacements";
    case ExperimentKind::open: return "open";
    case ExperimentKind::bound_sweep: return "bound-sweep";
    case ExperimentKind::oracle_check: return "oracle-check";
  }
  return "?";
}

namespace {

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
  throw std::invalid_argument("experiment field \"" + field + "\": " + why);
}

template <class T>
T field(const json& doc, const std::string& key, T fallback) {
  if (!doc.contains(key)) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    bad_field(key, e.what());
  }
}

template <class T>
T required(const json& doc, const std::string& key) {
  if (!doc.contains(key)) bad_field(key, "missing");
  return field<T>(doc, key, T{});
}

ExperimentKind parse_kind(const std::string& s) {
  if (s == "replacements") return ExperimentKind::replacements;
  if (s == "open") return ExperimentKind::open;
  if (s == "bound-sweep") return ExperimentKind::bound_sweep;
  if (s == "oracle-check") return ExperimentKind::oracle_check;
  bad_field("kind", "unknown kind \"" + s + "\"");
}

InitialState parse_initial(const json& doc) {
  if (!doc.contains("initial")) return InitialFromArrivals{};
  const json& v = doc.at("initial");
  if (v.is_string() && v.get<std::string>() == "arrivals") return InitialFromArrivals{};
  if (v.is_object() && v.contains("constant")) return InitialConstant{v.at("constant").get<double>()};
  if (v.is_object() && v.contains("values")) return InitialExplicit{v.at("values").get<std::vector<double>>()};
  bad_field("initial", "expected \"arrivals\", {\"constant\": c} or {\"values\": [...]}");
}

const std::set<std::string> kKnownKeys = {
    "kind",   "graphon", "n",       "gamma",   "sigma2", "arrival",           "events",           "resample_topology",
    "initial", "n_min",  "n_max",   "n0",      "trials", "burn_in",           "seed",             "out",
    "e_term", "formula", "gammas",  "sizes",   "epsilon", "mc_trials",        "trajectory_files", "comment"};

std::string iso_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void ensure_writable(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
  const fs::path probe = dir / ".write-probe";
  {
    std::ofstream out(probe);
    if (!out) throw std::runtime_error("output directory " + dir.string() + " is not writable");
  }
  fs::remove(probe, ec);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

bool is_complete_graphon(const Graphon& w) {
  const auto& s = w.as_sbm();
  return s && (s->probabilities().array() == 1.0).all();
}

struct Moments {
  double mean = 0.0;
  double stderr_ = 0.0;
};

// Welford over values in index order.
Moments moments(const std::vector<double>& v) {
  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = v[i] - mean;
    mean += d / static_cast<double>(i + 1);
    m2 += d * (v[i] - mean);
  }
  const double n = static_cast<double>(v.size());
  return {mean, v.size() > 1 ? std::sqrt(m2 / (n - 1.0) / n) : 0.0};
}

}  // namespace

ExperimentSpec parse_experiment(const json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("experiment document must be a JSON object");
  for (const auto& [key, _] : doc.items())
    if (!kKnownKeys.contains(key)) bad_field(key, "unknown field");

  ExperimentSpec s;
  s.source = doc;
  s.kind = parse_kind(required<std::string>(doc, "kind"));
  s.trials = field<std::size_t>(doc, "trials", s.trials);
  s.burn_in = field<double>(doc, "burn_in", s.burn_in);
  s.seed = field<std::uint64_t>(doc, "seed", s.seed);
  s.out = field<std::string>(doc, "out", s.out.string());
  s.trajectory_files = field<std::size_t>(doc, "trajectory_files", 0);
  if (s.trials < 1) bad_field("trials", "must be >= 1");
  if (!(s.burn_in >= 0.0 && s.burn_in < 1.0)) bad_field("burn_in", "must lie in [0,1)");

  s.graphon_doc = doc.value("graphon", json{{"type", "constant"}, {"p", 1.0}});
  try {
    s.graphon = graphon_from_json(s.graphon_doc);
  } catch (const std::exception& e) {
    bad_field("graphon", e.what());
  }

  if (doc.contains("e_term")) {
    const json& e = doc.at("e_term");
    s.e_term.method = field<std::string>(e, "method", s.e_term.method);
    s.e_term.trials = field<std::size_t>(e, "trials", s.e_term.trials);
    s.e_term.inflation = field<double>(e, "inflation", s.e_term.inflation);
    static const std::set<std::string> methods{"auto", "exact", "monte-carlo", "thm3"};
    if (!methods.contains(s.e_term.method)) bad_field("e_term.method", "expected auto|exact|monte-carlo|thm3");
    if (s.e_term.trials < 1) bad_field("e_term.trials", "must be >= 1");
    if (!(s.e_term.inflation >= 0.0)) bad_field("e_term.inflation", "must be >= 0");
  }

  const double gamma = field<double>(doc, "gamma", 1.0);
  const double sigma2 = field<double>(doc, "sigma2", 1.0);
  if (!(gamma >= 0.0)) bad_field("gamma", "must be >= 0");
  if (!(sigma2 >= 0.0)) bad_field("sigma2", "must be >= 0");
  ArrivalDistribution arrivals;
  try {
    arrivals.family = parse_family(field<std::string>(doc, "arrival", "gaussian"));
  } catch (const std::exception& e) {
    bad_field("arrival", e.what());
  }
  arrivals.variance = sigma2;
  s.sigma2 = sigma2;

  switch (s.kind) {
    case ExperimentKind::replacements: {
      auto& r = s.replacement;
      r.graphon = s.graphon;
      r.n = required<std::size_t>(doc, "n");
      r.gamma = gamma;
      r.arrivals = arrivals;
      r.events = field<std::size_t>(doc, "events", r.events);
      r.initial = parse_initial(doc);
      r.resample_topology = field<bool>(doc, "resample_topology", true);
      if (r.n < 2) bad_field("n", "must be >= 2");
      if (r.events < 1) bad_field("events", "must be >= 1");
      break;
    }
    case ExperimentKind::open: {
      auto& o = s.open;
      o.graphon = s.graphon;
      o.n_min = required<std::size_t>(doc, "n_min");
      o.n_max = required<std::size_t>(doc, "n_max");
      o.n0 = field<std::size_t>(doc, "n0", (o.n_min + o.n_max) / 2);
      o.gamma = gamma;
      o.arrivals = arrivals;
      o.events = field<std::size_t>(doc, "events", o.events);
      o.initial = parse_initial(doc);
      try {
        o.validate();
      } catch (const std::exception& e) {
        bad_field("n_min/n_max/n0", e.what());
      }
      break;
    }
    case ExperimentKind::bound_sweep: {
      s.formula = field<std::string>(doc, "formula", "thm1");
      if (s.formula != "thm1" && s.formula != "thm3") bad_field("formula", "bound-sweep supports thm1|thm3");
      s.gammas = required<std::vector<double>>(doc, "gammas");
      s.sizes = required<std::vector<std::size_t>>(doc, "sizes");
      s.epsilon = field<double>(doc, "epsilon", s.epsilon);
      if (s.gammas.empty()) bad_field("gammas", "must not be empty");
      if (s.sizes.empty()) bad_field("sizes", "must not be empty");
      for (double g : s.gammas)
        if (!(g >= 0.0)) bad_field("gammas", "entries must be >= 0");
      for (auto n : s.sizes)
        if (n < 2) bad_field("sizes", "entries must be >= 2");
      break;
    }
    case ExperimentKind::oracle_check: {
      s.oracle_n = required<std::size_t>(doc, "n");
      s.oracle_gamma = gamma;
      s.oracle_trials = field<std::size_t>(doc, "mc_trials", s.oracle_trials);
      if (s.oracle_n < 2 || s.oracle_n > kMaxEnumerationSize) bad_field("n", "oracle-check needs 2 <= n <= 5");
      if (s.oracle_trials < 1) bad_field("mc_trials", "must be >= 1");
      break;
    }
  }
  return s;
}

ExperimentSpec load_experiment(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open experiment document " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
  return parse_experiment(doc);
}

json RunManifest::to_json() const {
  return {{"spec", spec},       {"tool_version", tool_version}, {"seed", seed},
          {"started", started}, {"finished", finished},         {"digests", digests}};
}

ExpMu2Estimate e_term_for(const Graphon& w, std::size_t n, double gamma, const ETermSpec& rule, std::uint64_t seed) {
  if (gamma == 0.0) return {1.0, "closed-form", 0, 0.0, std::nullopt};
  if (rule.method == "thm3") {
    const BoundReport r = thm3_bound(w, n, gamma, default_epsilon());
    if (!r.value) throw DomainError("e-term: thm3 bound not evaluable at n = " + std::to_string(n));
    return {std::min(1.0, *r.value), "thm3", 0, 0.0, std::nullopt};
  }
  if (rule.method == "auto" && is_complete_graphon(w)) {
    // Every realization is the complete graph, μ₂ = 1.
    return {std::exp(-2.0 * gamma), "closed-form", 0, 0.0, std::nullopt};
  }
  ExpMu2Method method;
  if (rule.method == "exact") {
    method = ExactEnumeration{};
  } else if (rule.method == "monte-carlo") {
    method = MonteCarlo{rule.trials, seed};
  } else {
    method = AutoMethod{rule.trials, seed};
  }
  ExpMu2Estimate e = exp_mu2(expected_graph(w, n), gamma, method);
  if (e.method == "monte-carlo" && rule.inflation > 0.0) {
    e.estimate = e.upper(rule.inflation);
    e.method = "monte-carlo+" + std::to_string(static_cast<int>(rule.inflation)) + "se";
  }
  return e;
}

ExpMu2Estimate e_term_max_for(const Graphon& w, std::size_t n_min, std::size_t n_max, double gamma,
                              const ETermSpec& rule, std::uint64_t seed) {
  if (n_min < 2 || n_max <= n_min) throw DomainError("e-term max: need 2 <= n_min < n_max");
  std::optional<ExpMu2Estimate> best;
  for (std::size_t n = n_min; n <= n_max; ++n) {
    ExpMu2Estimate e = e_term_for(w, n, gamma, rule, derive_seed(seed, n, "exp-mu2-max"));
    if (!best || e.estimate > best->estimate) {
      best = e;
      best->argmax_n = n;
    }
  }
  return *best;
}

namespace {

struct TrialOutcome {
  std::uint64_t seed = 0;
  double steady_v = 0.0;
  double mean_n = 0.0;
  std::size_t final_n = 0;
  std::size_t events = 0;
};

json run_simulation(const ExperimentSpec& spec, std::vector<std::string>& written) {
  const bool open = spec.kind == ExperimentKind::open;
  std::vector<TrialOutcome> outcomes(spec.trials);
  const fs::path traj_dir = spec.out / "trajectories";
  if (spec.trajectory_files > 0) fs::create_directories(traj_dir);

  parallel_for(spec.trials, [&](std::size_t i) {
    TrialOutcome o;
    o.seed = derive_seed(spec.seed, i, "trial");
    Trajectory t;
    if (open) {
      OpenSystemConfig cfg = spec.open;
      cfg.seed = o.seed;
      t = simulate_open(cfg);
    } else {
      ReplacementConfig cfg = spec.replacement;
      cfg.seed = o.seed;
      t = simulate_replacements(cfg);
    }
    o.steady_v = steady_state_disagreement(t, spec.burn_in);
    o.mean_n = mean_size(t, spec.burn_in);
    o.final_n = t.events.back().n_after;
    o.events = t.events.size();
    if (i < spec.trajectory_files) {
      std::ostringstream name;
      name << "trial_" << std::setw(5) << std::setfill('0') << i << ".csv";
      std::ofstream out(traj_dir / name.str());
      write_trajectory_csv(out, t);
    }
    outcomes[i] = o;
  });
  for (std::size_t i = 0; i < std::min(spec.trajectory_files, spec.trials); ++i) {
    std::ostringstream name;
    name << "trajectories/trial_" << std::setw(5) << std::setfill('0') << i << ".csv";
    written.push_back(name.str());
  }

  {
    std::ostringstream csv;
    csv << "trial,seed,steady_state_V,mean_n,final_n,events\n" << std::setprecision(17);
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      const auto& o = outcomes[i];
      csv << i << ',' << o.seed << ',' << o.steady_v << ',' << o.mean_n << ',' << o.final_n << ',' << o.events << '\n';
    }
    write_text(spec.out / "trials.csv", csv.str());
    written.push_back("trials.csv");
  }

  std::vector<double> v(outcomes.size()), sizes(outcomes.size());
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    v[i] = outcomes[i].steady_v;
    sizes[i] = outcomes[i].mean_n;
  }
  const Moments mv = moments(v);
  const std::uint64_t e_seed = derive_seed(spec.seed, 0, "e-term");

  json summary;
  summary["kind"] = to_string(spec.kind);
  summary["graphon"] = spec.graphon.to_json();
  summary["trials"] = spec.trials;
  summary["burn_in"] = spec.burn_in;
  summary["seed"] = spec.seed;
  summary["empirical_mean"] = mv.mean;
  summary["stderr"] = mv.stderr_;
  summary["statistic"] = "mean of V+ over post-burn-in events, averaged over trials";

  BoundReport bound;
  if (open) {
    const auto& o = spec.open;
    const Moments mn = moments(sizes);
    summary["params"] = {{"n_min", o.n_min}, {"n_max", o.n_max}, {"n0", o.n0}, {"gamma", o.gamma},
                         {"sigma2", o.arrivals.variance}, {"arrival", to_string(o.arrivals.family)},
                         {"events", o.events}};
    summary["mean_size"] = mn.mean;
    summary["mean_size_stderr"] = mn.stderr_;
    summary["expected_size_limit"] = expected_n_limit(o.n_min, o.n_max);
    summary["formula"] = "thm2";
    if (o.n_max <= 3 || o.n_min < 2) {
      // Outside the bound's hypothesis: report the failed condition, no number.
      bound.formula = "thm2";
      bound.inputs = {{"n_min", double(o.n_min)}, {"n_max", double(o.n_max)}, {"sigma2", o.arrivals.variance},
                      {"gamma", o.gamma}};
      bound.flags.push_back({o.n_max <= 3 ? "n_max_gt_3" : "n_min_ge_2", false});
    } else {
      const ExpMu2Estimate e = e_term_max_for(o.graphon, o.n_min, o.n_max, o.gamma, spec.e_term, e_seed);
      summary["e_term"] = to_json(e);
      bound = thm2_bound(o.n_min, o.n_max, o.arrivals.variance, o.gamma, e.estimate, e.method);
    }
  } else {
    const auto& r = spec.replacement;
    summary["params"] = {{"n", r.n}, {"gamma", r.gamma}, {"sigma2", r.arrivals.variance},
                         {"arrival", to_string(r.arrivals.family)}, {"events", r.events},
                         {"resample_topology", r.resample_topology}};
    summary["formula"] = "thm1";
    ExpMu2Estimate e;
    if (!r.resample_topology) {
      // Fixed topology: the E-term is e^{-2γμ₂} of the single sampled graph, which differs per trial.
      // Report the worst (largest) one so the bound covers every trial.
      double worst = 0.0;
      for (std::size_t i = 0; i < spec.trials; ++i) {
        Rng topo = make_stream(derive_seed(spec.seed, i, "trial"), 0, "topology");
        const SimpleGraph g = sample_simple_graph(expected_graph(r.graphon, r.n), topo);
        worst = std::max(worst, std::exp(-2.0 * r.gamma * mu2(g)));
      }
      e = {worst, "fixed-topology-max", spec.trials, 0.0, std::nullopt};
    } else {
      e = e_term_for(r.graphon, r.n, r.gamma, spec.e_term, e_seed);
    }
    summary["e_term"] = to_json(e);
    bound = thm1_bound(r.n, r.arrivals.variance, r.gamma, e.estimate, e.method);
  }
  summary["bound"] = to_json(bound);
  if (bound.value) {
    summary["margin"] = *bound.value - mv.mean;
    summary["bound_satisfied"] = mv.mean <= *bound.value;
  } else {
    summary["margin"] = nullptr;
    summary["bound_satisfied"] = nullptr;
  }
  return summary;
}

json run_oracle(const ExperimentSpec& spec) {
  const ExpectedGraph g = expected_graph(spec.graphon, spec.oracle_n);
  const ExpMu2Estimate exact = exp_mu2(g, spec.oracle_gamma, ExactEnumeration{});
  const ExpMu2Estimate mc =
      exp_mu2(g, spec.oracle_gamma, MonteCarlo{spec.oracle_trials, derive_seed(spec.seed, 0, "oracle")});
  const double diff = std::abs(exact.estimate - mc.estimate);
  return {{"kind", "oracle-check"},
          {"graphon", spec.graphon.to_json()},
          {"n", spec.oracle_n},
          {"gamma", spec.oracle_gamma},
          {"seed", spec.seed},
          {"exact", to_json(exact)},
          {"monte_carlo", to_json(mc)},
          {"abs_diff", diff},
          {"within_3_stderr", diff <= 3.0 * mc.stderr_}};
}

json run_sweep(const ExperimentSpec& spec, std::vector<std::string>& written) {
  std::ostringstream csv;
  csv << "formula,gamma,n,e_term,e_term_method,bound,valid,failed_condition\n" << std::setprecision(17);
  json rows = json::array();
  for (double gamma : spec.gammas) {
    for (std::size_t n : spec.sizes) {
      BoundReport r;
      if (spec.formula == "thm3") {
        r = thm3_bound(spec.graphon, n, gamma, spec.epsilon);
      } else {
        const ExpMu2Estimate e = e_term_for(spec.graphon, n, gamma, spec.e_term, derive_seed(spec.seed, n, "sweep"));
        r = thm1_bound(n, spec.sigma2, gamma, e.estimate, e.method);
      }
      rows.push_back({{"gamma", gamma}, {"n", n}, {"bound", to_json(r)}});
      csv << r.formula << ',' << gamma << ',' << n << ',' << r.inputs.at(spec.formula == "thm3" ? "mu2_bar" : "e_term")
          << ',' << r.e_term_source << ',';
      if (r.value) csv << *r.value;
      csv << ',' << (r.valid() ? "true" : "false") << ',' << r.failed_condition() << '\n';
    }
  }
  write_text(spec.out / "sweep.csv", csv.str());
  written.push_back("sweep.csv");
  return {{"kind", "bound-sweep"}, {"formula", spec.formula}, {"graphon", spec.graphon.to_json()},
          {"sigma2", spec.sigma2}, {"seed", spec.seed},          {"rows", rows}};
}

}  // namespace

RunResult run(const ExperimentSpec& spec) {
  ensure_writable(spec.out);
  RunResult result;
  result.manifest.spec = spec.source;
  result.manifest.seed = spec.seed;
  result.manifest.started = iso_now();

  std::vector<std::string> written;
  switch (spec.kind) {
    case ExperimentKind::replacements:
    case ExperimentKind::open: result.summary = run_simulation(spec, written); break;
    case ExperimentKind::oracle_check: result.summary = run_oracle(spec); break;
    case ExperimentKind::bound_sweep: result.summary = run_sweep(spec, written); break;
  }
  result.summary["tool_version"] = kToolVersion;
  write_text(spec.out / "summary.json", result.summary.dump(2) + "\n");
  written.push_back("summary.json");

  for (const auto& name : written) result.manifest.digests[name] = sha256_file(spec.out / name);
  result.manifest.finished = iso_now();
  write_text(spec.out / "manifest.json", result.manifest.to_json().dump(2) + "\n");
  return result;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw std::runtime_error("sha256 init failed");
  char buf[1 << 14];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

namespace {

[[noreturn]] void schema_error(const fs::path& file, const std::string& field, const std::string& why) {
  throw std::invalid_argument(file.string() + ": field \"" + field + "\": " + why);
}

double number_at(const json& j, const fs::path& file, const std::string& path_text, const json::json_pointer& ptr) {
  if (!j.contains(ptr)) schema_error(file, path_text, "missing");
  const json& v = j.at(ptr);
  if (!v.is_number()) schema_error(file, path_text, "expected a number");
  return v.get<double>();
}

std::optional<double> optional_number(const json& j, const json::json_pointer& ptr) {
  if (!j.contains(ptr) || !j.at(ptr).is_number()) return std::nullopt;
  return j.at(ptr).get<double>();
}

ComparisonRow row_from_bound(const fs::path& file, const std::string& kind, const json& bound) {
  ComparisonRow row;
  row.file = file.string();
  row.kind = kind;
  if (!bound.is_object() || !bound.contains("formula")) schema_error(file, "bound.formula", "missing");
  row.formula = bound.at("formula").get<std::string>();
  row.gamma = number_at(bound, file, "bound.inputs.gamma", "/inputs/gamma"_json_pointer);
  if (bound.contains("/inputs/n"_json_pointer)) {
    row.size = std::to_string(static_cast<long long>(bound.at("/inputs/n"_json_pointer).get<double>()));
  } else {
    row.size = std::to_string(static_cast<long long>(number_at(bound, file, "bound.inputs.n_min", "/inputs/n_min"_json_pointer))) +
               "-" + std::to_string(static_cast<long long>(number_at(bound, file, "bound.inputs.n_max", "/inputs/n_max"_json_pointer)));
  }
  row.bound = optional_number(bound, "/value"_json_pointer);
  if (!bound.contains("valid")) schema_error(file, "bound.valid", "missing");
  row.valid = bound.at("valid").get<bool>();
  return row;
}

}  // namespace

std::vector<ComparisonRow> compare_bounds(const std::vector<fs::path>& summaries) {
  if (summaries.empty()) throw std::invalid_argument("compare: at least one summary file is required");
  std::vector<ComparisonRow> rows;
  for (const auto& file : summaries) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open " + file.string());
    json doc;
    try {
      in >> doc;
    } catch (const json::parse_error& e) {
      throw std::invalid_argument(file.string() + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("kind") || !doc.at("kind").is_string())
      schema_error(file, "kind", "missing or not a string");
    const std::string kind = doc.at("kind").get<std::string>();
    if (kind == "replacements" || kind == "open") {
      if (!doc.contains("bound")) schema_error(file, "bound", "missing");
      ComparisonRow row = row_from_bound(file, kind, doc.at("bound"));
      row.empirical = number_at(doc, file, "empirical_mean", "/empirical_mean"_json_pointer);
      row.stderr_ = number_at(doc, file, "stderr", "/stderr"_json_pointer);
      rows.push_back(row);
    } else if (kind == "bound-sweep") {
      if (!doc.contains("rows") || !doc.at("rows").is_array()) schema_error(file, "rows", "missing or not an array");
      for (const auto& r : doc.at("rows")) {
        if (!r.contains("bound")) schema_error(file, "rows[].bound", "missing");
        rows.push_back(row_from_bound(file, kind, r.at("bound")));
      }
    } else {
      schema_error(file, "kind", "\"" + kind + "\" carries no bound to compare");
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.formula < b.formula; });
  return rows;
}

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  auto opt = [&](const std::optional<double>& v) {
    if (v) out << *v;
  };
  out << "formula,kind,file,gamma,size,empirical,stderr,bound,margin,valid\n" << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.formula << ',' << r.kind << ',' << r.file << ',' << r.gamma << ',' << r.size << ',';
    opt(r.empirical);
    out << ',';
    opt(r.stderr_);
    out << ',';
    opt(r.bound);
    out << ',';
    if (r.bound && r.empirical) out << *r.bound - *r.empirical;
    out << ',' << (r.valid ? "true" : "false") << '\n';
  }
}

void write_comparison_long(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  out << "file,formula,gamma,size,metric,value\n" << std::setprecision(17);
  for (const auto& r : rows) {
    auto emit = [&](const char* metric, const std::optional<double>& v) {
      if (v) out << r.file << ',' << r.formula << ',' << r.gamma << ',' << r.size << ',' << metric << ',' << *v << '\n';
    };
    emit("empirical", r.empirical);
    emit("stderr", r.stderr_);
    emit("bound", r.bound);
  }
}

}  // namespace omas
