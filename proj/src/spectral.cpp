#include "omas/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "omas/errors.hpp"
#include "omas/parallel.hpp"
#include "omas/rng.hpp"

namespace omas {

namespace {

Eigen::MatrixXd laplacian_of(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw ContractViolation("laplacian: adjacency must be square");
  const Eigen::Index n = a.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (a(i, j) != a(j, i)) {
        std::ostringstream os;
        os << "laplacian: adjacency not symmetric at (" << i << "," << j << ")";
        throw ContractViolation(os.str());
      }
      if (a(i, j) < 0.0) throw ContractViolation("laplacian: negative edge weight");
    }
  }
  Eigen::MatrixXd l = -a;
  l.diagonal().setZero();
  l.diagonal() = -l.rowwise().sum();
  return l;
}

Eigen::VectorXd sorted_eigenvalues(const Eigen::MatrixXd& symmetric) {
  if (symmetric.rows() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigensolver failed to converge");
  Eigen::VectorXd v = solver.eigenvalues();  // ascending already; keep the contract explicit
  std::sort(v.data(), v.data() + v.size());
  return v;
}

double mu2_checked(const Eigen::MatrixXd& adjacency) {
  if (adjacency.rows() < 2) throw DomainError("mu2: need at least two vertices");
  auto s = laplacian_spectrum(adjacency);
  return s.mu(1);
}

// One graph realization per pair mask; μ₂ of each realization.
ExpMu2Estimate enumerate_exact(const ExpectedGraph& g, double gamma) {
  const std::size_t n = g.n;
  if (n > kMaxEnumerationSize) {
    std::ostringstream os;
    os << "exp_mu2: exact enumeration needs 2^" << n * (n - 1) / 2
       << " graphs for n = " << n << "; refused above n = " << kMaxEnumerationSize
       << ", use monte-carlo";
    throw DomainError(os.str());
  }
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));

  const std::size_t graphs = std::size_t{1} << pairs.size();
  double total = 0.0;
  Eigen::MatrixXd a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t mask = 0; mask < graphs; ++mask) {
    double prob = 1.0;
    a.setZero();
    for (std::size_t e = 0; e < pairs.size(); ++e) {
      const auto [i, j] = pairs[e];
      const double p = g.adjacency(i, j);
      if (mask >> e & 1U) {
        prob *= p;
        a(i, j) = a(j, i) = 1.0;
      } else {
        prob *= 1.0 - p;
      }
    }
    if (prob == 0.0) continue;
    total += prob * std::exp(-2.0 * gamma * mu2_checked(a));
  }
  return {total, "exact-enumeration", graphs, 0.0, std::nullopt};
}

ExpMu2Estimate monte_carlo(const ExpectedGraph& g, double gamma, std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw DomainError("exp_mu2: monte-carlo needs at least one trial");
  std::vector<double> values(trials);
  parallel_for(trials, [&](std::size_t t) {
    Rng rng = make_stream(seed, t, "exp-mu2");
    const SimpleGraph s = sample_simple_graph(g, rng);
    values[t] = std::exp(-2.0 * gamma * mu2(s));
  });
  // Welford in index order: identical result for any worker schedule.
  double mean = 0.0, m2 = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const double d = values[t] - mean;
    mean += d / static_cast<double>(t + 1);
    m2 += d * (values[t] - mean);
  }
  const double se = trials > 1 ? std::sqrt(m2 / static_cast<double>(trials - 1) / static_cast<double>(trials)) : 0.0;
  return {mean, "monte-carlo", trials, se, std::nullopt};
}

}  // namespace

LaplacianSpectrum laplacian_spectrum(const Eigen::MatrixXd& adjacency) {
  const Eigen::MatrixXd l = laplacian_of(adjacency);
  LaplacianSpectrum s;
  s.n = static_cast<std::size_t>(adjacency.rows());
  s.lambda = sorted_eigenvalues(l);
  s.mu = s.n > 0 ? Eigen::VectorXd(s.lambda / static_cast<double>(s.n)) : Eigen::VectorXd();
  return s;
}

double mu2(const SimpleGraph& g) { return mu2_checked(g.adjacency()); }
double mu2(const ExpectedGraph& g) { return mu2_checked(g.adjacency); }
double mu2_of_adjacency(const Eigen::MatrixXd& adjacency) { return mu2_checked(adjacency); }

Eigen::VectorXd SbmReduction::laplacian_eigenvalues() const {
  const auto m = static_cast<Eigen::Index>(block_sizes.size());
  Eigen::VectorXd root(m);
  for (Eigen::Index k = 0; k < m; ++k) root(k) = std::sqrt(static_cast<double>(block_sizes[static_cast<std::size_t>(k)]));
  // S = E^½ L E^-½ is symmetric because P is.
  Eigen::MatrixXd s = root.asDiagonal() * laplacian * root.cwiseInverse().asDiagonal();
  s = 0.5 * (s + s.transpose()).eval();
  return sorted_eigenvalues(s);
}

SbmReduction sbm_reduction(const SbmGraphon& w, std::size_t n) {
  const std::size_t m = w.blocks();
  if (n < m) throw DomainError("sbm_reduction: n must be at least the number of blocks");
  SbmReduction r;
  r.block_sizes = w.block_counts(n);
  for (std::size_t k = 0; k < m; ++k) {
    if (r.block_sizes[k] == 0) {
      std::ostringstream os;
      os << "sbm_reduction: block " << k << " holds no latent point for n = " << n;
      throw DomainError(os.str());
    }
  }
  Eigen::VectorXd sizes(static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < m; ++k) sizes(static_cast<Eigen::Index>(k)) = static_cast<double>(r.block_sizes[k]);
  r.adjacency = w.probabilities() * sizes.asDiagonal() / static_cast<double>(n);
  r.degrees = r.adjacency.rowwise().sum();
  r.laplacian = Eigen::MatrixXd(r.degrees.asDiagonal()) - r.adjacency;
  r.min_degree = r.degrees.minCoeff();
  return r;
}

double sbm_mu2_analytic(const SbmGraphon& w, std::size_t n) {
  const SbmReduction r = sbm_reduction(w, n);
  if (r.block_sizes.size() == 1) return r.min_degree;
  const Eigen::VectorXd ev = r.laplacian_eigenvalues();
  return std::min(ev(1), r.min_degree);
}

double ExpMu2Estimate::upper(double k) const { return std::min(1.0, estimate + k * stderr_); }

ExpMu2Estimate exp_mu2(const ExpectedGraph& expected, double gamma, const ExpMu2Method& method) {
  if (!(gamma >= 0.0)) throw DomainError("exp_mu2: gamma must be nonnegative");
  if (expected.n < 2) throw DomainError("exp_mu2: need n >= 2");
  return std::visit(
      [&](const auto& m) -> ExpMu2Estimate {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, ExactEnumeration>) {
          return enumerate_exact(expected, gamma);
        } else if constexpr (std::is_same_v<M, MonteCarlo>) {
          return monte_carlo(expected, gamma, m.trials, m.seed);
        } else {
          if (expected.n <= kMaxEnumerationSize) return enumerate_exact(expected, gamma);
          return monte_carlo(expected, gamma, m.trials, m.seed);
        }
      },
      method);
}

ExpMu2Estimate exp_mu2_max(const Graphon& w, double gamma, std::size_t n_min, std::size_t n_max,
                           const ExpMu2Method& method) {
  if (n_min < 2 || n_max <= n_min) throw DomainError("exp_mu2_max: need 2 <= n_min < n_max");
  std::optional<ExpMu2Estimate> best;
  for (std::size_t n = n_min; n <= n_max; ++n) {
    // Each size gets its own sub-stream.
    ExpMu2Method per_n = method;
    std::visit(
        [&](auto& m) {
          if constexpr (!std::is_same_v<std::decay_t<decltype(m)>, ExactEnumeration>)
            m.seed = derive_seed(m.seed, n, "exp-mu2-max");
        },
        per_n);
    ExpMu2Estimate e = exp_mu2(expected_graph(w, n), gamma, per_n);
    if (!best || e.estimate > best->estimate) {
      best = e;
      best->argmax_n = n;
    }
  }
  return *best;
}

void write_spectrum_csv(std::ostream& out, const LaplacianSpectrum& s) {
  out << "index,lambda,mu\n" << std::setprecision(17);
  for (Eigen::Index i = 0; i < s.lambda.size(); ++i) out << i + 1 << ',' << s.lambda(i) << ',' << s.mu(i) << '\n';
}

nlohmann::json to_json(const ExpMu2Estimate& e) {
  nlohmann::json j{{"estimate", e.estimate}, {"stderr", e.stderr_}, {"method", e.method}, {"trials", e.samples}};
  if (e.argmax_n) j["argmax_n"] = *e.argmax_n;
  return j;
}

nlohmann::json to_json(const SbmReduction& r) {
  auto matrix = [](const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      std::vector<double> row(static_cast<std::size_t>(m.cols()));
      for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
      rows.push_back(row);
    }
    return rows;
  };
  std::vector<double> deg(r.degrees.data(), r.degrees.data() + r.degrees.size());
  return {{"block_sizes", r.block_sizes}, {"A_sbm", matrix(r.adjacency)}, {"degrees", deg},
          {"L_sbm", matrix(r.laplacian)}, {"delta_min", r.min_degree}};
}

}  // namespace omas
