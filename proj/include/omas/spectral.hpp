#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "omas/graphon.hpp"

namespace omas {

/// Laplacian eigenvalues sorted ascending, plus μ_i = λ_i / n.
struct LaplacianSpectrum {
  std::size_t n = 0;
  Eigen::VectorXd lambda;
  Eigen::VectorXd mu;
};

/// Spectrum of L = D - A for a symmetric nonnegative adjacency. Diagonal
/// entries of A are ignored (self-loops cancel in D - A).
LaplacianSpectrum laplacian_spectrum(const Eigen::MatrixXd& adjacency);

/// Second smallest normalized Laplacian eigenvalue.
double mu2(const SimpleGraph& g);
double mu2(const ExpectedGraph& g);
double mu2_of_adjacency(const Eigen::MatrixXd& adjacency);

/// Block-level reduction of the expected graph of an SBM graphon.
struct SbmReduction {
  std::vector<std::size_t> block_sizes;
  Eigen::MatrixXd adjacency;  // A_SBM = (1/n) P diag(n_B)
  Eigen::VectorXd degrees;    // row sums of A_SBM
  Eigen::MatrixXd laplacian;  // D_SBM - A_SBM
  double min_degree = 0.0;

  /// Eigenvalues of the (non-symmetric) laplacian, ascending. Computed on
  /// the similar symmetric matrix diag(n_B)^½ L diag(n_B)^-½.
  Eigen::VectorXd laplacian_eigenvalues() const;
};

SbmReduction sbm_reduction(const SbmGraphon& w, std::size_t n);

/// μ̄₂ = min(λ₂(L_SBM), δ_min); δ_min alone when there is a single block.
double sbm_mu2_analytic(const SbmGraphon& w, std::size_t n);

struct ExactEnumeration {};
struct MonteCarlo {
  std::size_t trials = 10000;
  std::uint64_t seed = 0;
};
/// Exact enumeration where n ≤ kMaxEnumerationSize, Monte Carlo above.
struct AutoMethod {
  std::size_t trials = 10000;
  std::uint64_t seed = 0;
};
using ExpMu2Method = std::variant<ExactEnumeration, MonteCarlo, AutoMethod>;

inline constexpr std::size_t kMaxEnumerationSize = 5;

/// Estimate of E[exp(-2γ μ₂)] over graphs sampled from an expected graph.
struct ExpMu2Estimate {
  double estimate = 1.0;
  std::string method;  // "exact-enumeration" | "monte-carlo" | "closed-form"
  std::size_t samples = 0;
  double stderr_ = 0.0;
  std::optional<std::size_t> argmax_n;

  /// estimate + k·stderr clipped to 1; used as a conservative E-term.
  double upper(double k) const;
};

ExpMu2Estimate exp_mu2(const ExpectedGraph& expected, double gamma, const ExpMu2Method& method);

/// max over n ∈ {n_min..n_max} of exp_mu2 at size n; argmax_n is reported.
ExpMu2Estimate exp_mu2_max(const Graphon& w, double gamma, std::size_t n_min, std::size_t n_max,
                           const ExpMu2Method& method);

void write_spectrum_csv(std::ostream& out, const LaplacianSpectrum& s);
nlohmann::json to_json(const ExpMu2Estimate& e);
nlohmann::json to_json(const SbmReduction& r);

}  // namespace omas
