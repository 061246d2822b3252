#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>

#include "omas/bounds.hpp"
#include "omas/errors.hpp"
#include "omas/experiment.hpp"
#include "omas/graphon.hpp"
#include "omas/spectral.hpp"

using namespace omas;
using nlohmann::json;

namespace {

struct GraphonArgs {
  std::string file;
  std::optional<double> constant;

  void add(CLI::App* app) {
    auto* f = app->add_option("--graphon", file, "graphon document (JSON)")->check(CLI::ExistingFile);
    auto* c = app->add_option("--constant", constant, "constant graphon W = p")->check(CLI::Range(0.0, 1.0));
    f->excludes(c);
    c->excludes(f);
  }

  Graphon get() const {
    if (!file.empty()) return load_graphon(file);
    if (constant) return Graphon::constant(*constant);
    throw CLI::ValidationError("graphon", "one of --graphon or --constant is required");
  }
};

// Writes to the named file, or stdout when empty.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw std::runtime_error("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void print_json(const json& j) { std::cout << j.dump(2) << '\n'; }

ExpMu2Method make_method(const std::string& name, std::size_t trials, std::uint64_t seed) {
  if (name == "exact") return ExactEnumeration{};
  if (name == "mc") return MonteCarlo{trials, seed};
  return AutoMethod{trials, seed};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"omaslab: open multi-agent consensus on graphon-sampled networks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  // sample
  GraphonArgs sample_g;
  std::size_t sample_n = 10;
  std::uint64_t sample_seed = 0;
  std::string sample_out;
  bool sample_expected = false;
  auto* sample = app.add_subcommand("sample", "sample a simple graph and print its edge list");
  sample_g.add(sample);
  sample->add_option("-n,--size", sample_n, "number of vertices")->check(CLI::PositiveNumber);
  sample->add_option("--seed", sample_seed, "random seed");
  sample->add_option("--out", sample_out, "output CSV (default stdout)");
  sample->add_flag("--expected", sample_expected, "print the expected graph's weighted edges instead");

  // spectrum
  GraphonArgs spec_g;
  std::size_t spec_n = 10;
  std::uint64_t spec_seed = 0;
  std::string spec_out;
  bool spec_expected = false;
  auto* spectrum = app.add_subcommand("spectrum", "Laplacian spectrum of a sampled (or the expected) graph");
  spec_g.add(spectrum);
  spectrum->add_option("-n,--size", spec_n, "number of vertices")->check(CLI::PositiveNumber);
  spectrum->add_option("--seed", spec_seed, "random seed");
  spectrum->add_option("--out", spec_out, "output CSV (default stdout)");
  spectrum->add_flag("--expected", spec_expected, "use the expected graph");

  // mu2-sbm
  GraphonArgs sbm_g;
  std::size_t sbm_n = 100;
  bool sbm_dense = false;
  auto* mu2_sbm = app.add_subcommand("mu2-sbm", "block-reduced spectral gap of an SBM expected graph");
  sbm_g.add(mu2_sbm);
  mu2_sbm->add_option("-n,--size", sbm_n, "number of vertices")->check(CLI::PositiveNumber);
  mu2_sbm->add_flag("--dense", sbm_dense, "also compute the dense expected-graph value");

  // exp-mu2
  GraphonArgs exp_g;
  std::size_t exp_n = 4, exp_trials = 10000;
  std::optional<std::size_t> exp_n_max;
  double exp_gamma = 1.0;
  std::string exp_method = "auto";
  std::uint64_t exp_seed = 0;
  auto* exp_cmd = app.add_subcommand("exp-mu2", "estimate E[exp(-2 gamma mu2)]");
  exp_g.add(exp_cmd);
  exp_cmd->add_option("-n,--size", exp_n, "number of vertices (lower end with --n-max)")->check(CLI::Range(2, 1 << 20));
  exp_cmd->add_option("--n-max", exp_n_max, "maximize over sizes n..n-max");
  exp_cmd->add_option("--gamma", exp_gamma, "inter-event scale")->check(CLI::NonNegativeNumber);
  exp_cmd->add_option("--method", exp_method, "exact | mc | auto")->check(CLI::IsMember({"exact", "mc", "auto"}));
  exp_cmd->add_option("--trials", exp_trials, "Monte Carlo samples")->check(CLI::PositiveNumber);
  exp_cmd->add_option("--seed", exp_seed, "random seed");

  // bound
  auto* bound = app.add_subcommand("bound", "evaluate a closed-form bound");
  bound->require_subcommand(1);
  double b_sigma2 = 1.0, b_gamma = 1.0, b_eps = default_epsilon();
  std::optional<double> b_e_term, b_mu2_bar;
  std::size_t b_n = 10, b_n_min = 4, b_n_max = 10, b_trials = 10000;
  std::uint64_t b_seed = 0;
  GraphonArgs b_g1, b_g2, b_g3;
  std::string b_method = "auto";

  auto* thm1 = bound->add_subcommand("thm1", "replacement steady-state bound");
  thm1->add_option("-n,--size", b_n, "number of agents")->check(CLI::Range(2, 1 << 20));
  thm1->add_option("--sigma2", b_sigma2, "arrival variance")->check(CLI::NonNegativeNumber);
  thm1->add_option("--gamma", b_gamma, "inter-event scale")->check(CLI::NonNegativeNumber);
  thm1->add_option("--e-term", b_e_term, "E[exp(-2 gamma mu2)]; computed from the graphon when omitted");
  thm1->add_option("--method", b_method, "E-term rule: auto | exact | monte-carlo | thm3")
      ->check(CLI::IsMember({"auto", "exact", "monte-carlo", "thm3"}));
  thm1->add_option("--trials", b_trials, "Monte Carlo samples for the E-term");
  thm1->add_option("--seed", b_seed, "random seed for the E-term");
  b_g1.add(thm1);

  auto* thm2 = bound->add_subcommand("thm2", "arrival/departure steady-state bound");
  thm2->add_option("--n-min", b_n_min, "minimum size")->check(CLI::PositiveNumber);
  thm2->add_option("--n-max", b_n_max, "maximum size")->check(CLI::PositiveNumber);
  thm2->add_option("--sigma2", b_sigma2, "arrival variance")->check(CLI::NonNegativeNumber);
  thm2->add_option("--gamma", b_gamma, "inter-event scale")->check(CLI::NonNegativeNumber);
  thm2->add_option("--e-term", b_e_term, "max over n of E[exp(-2 gamma mu2)]; computed when omitted");
  thm2->add_option("--method", b_method, "E-term rule: auto | exact | monte-carlo | thm3")
      ->check(CLI::IsMember({"auto", "exact", "monte-carlo", "thm3"}));
  thm2->add_option("--trials", b_trials, "Monte Carlo samples for the E-term");
  thm2->add_option("--seed", b_seed, "random seed for the E-term");
  b_g2.add(thm2);

  auto* thm3 = bound->add_subcommand("thm3", "spectral upper bound on E[exp(-2 gamma mu2)]");
  thm3->add_option("-n,--size", b_n, "number of agents")->check(CLI::PositiveNumber);
  thm3->add_option("--gamma", b_gamma, "inter-event scale")->check(CLI::NonNegativeNumber);
  thm3->add_option("--mu2-bar", b_mu2_bar, "expected-graph gap; computed from the graphon when omitted");
  thm3->add_option("--epsilon", b_eps, "epsilon for the large-n conditions");
  b_g3.add(thm3);

  // check-large-n
  GraphonArgs ln_g;
  std::size_t ln_n = 100;
  double ln_eps = default_epsilon();
  auto* large = app.add_subcommand("check-large-n", "evaluate the large-n conditions");
  ln_g.add(large);
  large->add_option("-n,--size", ln_n, "number of vertices")->check(CLI::PositiveNumber);
  large->add_option("--epsilon", ln_eps, "epsilon in (0, 1/e)");

  // simulate / run
  std::string sim_config, sim_out;
  std::optional<std::uint64_t> sim_seed;
  std::optional<std::size_t> sim_trials;
  auto* simulate = app.add_subcommand("simulate", "run a Monte Carlo experiment");
  simulate->require_subcommand(1);
  auto add_sim = [&](CLI::App* sub) {
    sub->add_option("--config", sim_config, "experiment document (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", sim_seed, "override the master seed");
    sub->add_option("--trials", sim_trials, "override the trial count");
    sub->add_option("--out", sim_out, "override the output directory");
  };
  auto* sim_rep = simulate->add_subcommand("replacements", "fixed-size system under replacements");
  auto* sim_open = simulate->add_subcommand("open", "arrivals and departures");
  add_sim(sim_rep);
  add_sim(sim_open);
  auto* run_cmd = app.add_subcommand("run", "run any experiment document");
  add_sim(run_cmd);

  // compare
  std::vector<std::string> cmp_files;
  std::string cmp_out, cmp_long;
  auto* compare = app.add_subcommand("compare", "tabulate empirical values against bounds");
  compare->add_option("summaries", cmp_files, "summary.json files")->check(CLI::ExistingFile);
  compare->add_option("--out", cmp_out, "CSV output (default stdout)");
  compare->add_option("--long", cmp_long, "also write a long-format CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sample) {
      const ExpectedGraph e = expected_graph(sample_g.get(), sample_n);
      Output out(sample_out);
      auto& os = out.stream();
      if (sample_expected) {
        os << "i,j,weight\n" << std::setprecision(17);
        for (std::size_t i = 0; i < sample_n; ++i)
          for (std::size_t j = i + 1; j < sample_n; ++j) {
            const double w = e.adjacency(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            if (w > 0.0) os << i << ',' << j << ',' << w << '\n';
          }
      } else {
        Rng rng = make_stream(sample_seed, 0, "sample");
        const SimpleGraph g = sample_simple_graph(e, rng);
        os << "i,j\n";
        for (std::size_t i = 0; i < sample_n; ++i)
          for (std::size_t j = i + 1; j < sample_n; ++j)
            if (g.edge(i, j)) os << i << ',' << j << '\n';
      }
    } else if (*spectrum) {
      const ExpectedGraph e = expected_graph(spec_g.get(), spec_n);
      Eigen::MatrixXd a = e.adjacency;
      if (!spec_expected) {
        Rng rng = make_stream(spec_seed, 0, "sample");
        a = sample_simple_graph(e, rng).adjacency();
      }
      Output out(spec_out);
      write_spectrum_csv(out.stream(), laplacian_spectrum(a));
    } else if (*mu2_sbm) {
      const Graphon w = sbm_g.get();
      if (!w.as_sbm()) throw DomainError("mu2-sbm: graphon is not an SBM");
      json j = to_json(sbm_reduction(*w.as_sbm(), sbm_n));
      j["mu2_bar"] = sbm_mu2_analytic(*w.as_sbm(), sbm_n);
      j["n"] = sbm_n;
      if (sbm_dense) j["mu2_bar_dense"] = mu2(expected_graph(w, sbm_n));
      print_json(j);
    } else if (*exp_cmd) {
      const Graphon w = exp_g.get();
      const ExpMu2Method m = make_method(exp_method, exp_trials, exp_seed);
      if (exp_n_max) {
        print_json(to_json(exp_mu2_max(w, exp_gamma, exp_n, *exp_n_max, m)));
      } else {
        print_json(to_json(exp_mu2(expected_graph(w, exp_n), exp_gamma, m)));
      }
    } else if (*thm1) {
      const ETermSpec rule{b_method, b_trials, 3.0};
      json j;
      double e = 0.0;
      std::string source = "given";
      if (b_e_term) {
        e = *b_e_term;
      } else {
        const ExpMu2Estimate est = e_term_for(b_g1.get(), b_n, b_gamma, rule, b_seed);
        e = est.estimate;
        source = est.method;
        j["e_term"] = to_json(est);
      }
      j["bound"] = to_json(thm1_bound(b_n, b_sigma2, b_gamma, e, source));
      print_json(j);
    } else if (*thm2) {
      const ETermSpec rule{b_method, b_trials, 3.0};
      json j;
      double e = 0.0;
      std::string source = "given";
      if (b_e_term) {
        e = *b_e_term;
      } else {
        const ExpMu2Estimate est = e_term_max_for(b_g2.get(), b_n_min, b_n_max, b_gamma, rule, b_seed);
        e = est.estimate;
        source = est.method;
        j["e_term"] = to_json(est);
      }
      j["bound"] = to_json(thm2_bound(b_n_min, b_n_max, b_sigma2, b_gamma, e, source));
      print_json(j);
    } else if (*thm3) {
      json j;
      if (b_mu2_bar) {
        j["bound"] = to_json(thm3_bound(*b_mu2_bar, b_n, b_gamma));
      } else {
        const Graphon w = b_g3.get();
        j["bound"] = to_json(thm3_bound(w, b_n, b_gamma, b_eps));
        j["large_enough"] = to_json(large_enough(b_n, b_eps, w));
      }
      print_json(j);
    } else if (*large) {
      const Graphon w = ln_g.get();
      json j = to_json(large_enough(ln_n, ln_eps, w));
      j["n"] = ln_n;
      j["epsilon"] = ln_eps;
      j["max_degree"] = max_degree(w);
      const InfDegree eta = inf_degree(w);
      j["inf_degree"] = eta.value;
      j["inf_degree_grid_points"] = eta.grid_points;
      print_json(j);
    } else if (*simulate || *run_cmd) {
      std::ifstream in(sim_config);
      json doc = json::parse(in);
      if (*sim_rep || *sim_open) {
        const std::string want = *sim_rep ? "replacements" : "open";
        if (!doc.contains("kind")) doc["kind"] = want;
        if (doc["kind"] != want)
          throw std::invalid_argument("experiment field \"kind\": document is \"" + doc["kind"].get<std::string>() +
                                      "\", subcommand is \"" + want + "\"");
      }
      if (sim_seed) doc["seed"] = *sim_seed;
      if (sim_trials) doc["trials"] = *sim_trials;
      if (!sim_out.empty()) doc["out"] = sim_out;
      const ExperimentSpec spec = parse_experiment(doc);
      const RunResult r = run(spec);
      std::cerr << "wrote " << spec.out.string() << '\n';
      print_json(r.summary);
    } else if (*compare) {
      std::vector<std::filesystem::path> paths(cmp_files.begin(), cmp_files.end());
      if (paths.empty()) {
        std::cerr << "compare: at least one summary file is required\n" << compare->help();
        return 2;
      }
      const auto rows = compare_bounds(paths);
      Output out(cmp_out);
      write_comparison_csv(out.stream(), rows);
      if (!cmp_long.empty()) {
        Output lf(cmp_long);
        write_comparison_long(lf.stream(), rows);
      }
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
