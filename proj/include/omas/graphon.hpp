#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "omas/rng.hpp"

namespace omas {

/// Piecewise-Lipschitz descriptor: the kernel is L-Lipschitz on every
/// rectangle [α_{k-1}, α_k) × [α_{l-1}, α_l). `boundaries` holds
/// α_0 = 0 < α_1 < ... < α_{K+1} = 1, so K is the number of interior points.
struct PiecewiseLipschitz {
  std::vector<double> boundaries{0.0, 1.0};
  double lipschitz = 0.0;

  std::size_t interior_points() const { return boundaries.size() - 2; }
  double min_interval_width() const;
};

/// Stochastic block model graphon: blocks B_k = (α_{k-1}, α_k] (the first one
/// also holds 0) with symmetric edge probabilities P. With latent points
/// u_i = i/n this gives block k exactly #{i : α_{k-1} < i/n ≤ α_k} vertices,
/// so a boundary at α with αn integral splits the vertices evenly.
class SbmGraphon {
 public:
  SbmGraphon(std::vector<double> boundaries, Eigen::MatrixXd probabilities);

  /// Two equal blocks with in-block probability p and cross-block q.
  static SbmGraphon two_block(double p, double q);

  std::size_t blocks() const { return static_cast<std::size_t>(p_.rows()); }
  const std::vector<double>& boundaries() const { return boundaries_; }
  const Eigen::MatrixXd& probabilities() const { return p_; }
  double block_width(std::size_t k) const { return boundaries_[k + 1] - boundaries_[k]; }

  /// Index k with x ∈ (α_k, α_{k+1}]; x = 0 maps to the first block.
  std::size_t block_of(double x) const;

  double operator()(double x, double y) const { return p_(block_of(x), block_of(y)); }

  /// Closed-form degree of every block: Σ_j P_kj |B_j|.
  Eigen::VectorXd block_degrees() const;

  /// Number of latent points u_i = i/n (i = 1..n) falling in each block.
  std::vector<std::size_t> block_counts(std::size_t n) const;

 private:
  std::vector<double> boundaries_;
  Eigen::MatrixXd p_;
};

/// Symmetric kernel W : [0,1]² → [0,1]. SBM graphons (including the constant
/// one) keep their block structure so degrees are computed in closed form.
class Graphon {
 public:
  using Kernel = std::function<double(double, double)>;

  static Graphon constant(double p);
  static Graphon sbm(SbmGraphon g);
  static Graphon from_kernel(Kernel w, std::optional<PiecewiseLipschitz> descriptor = {},
                             std::string label = "kernel");

  double operator()(double x, double y) const { return kernel_(x, y); }

  const std::optional<SbmGraphon>& as_sbm() const { return sbm_; }
  const std::optional<PiecewiseLipschitz>& descriptor() const { return descriptor_; }
  const std::string& label() const { return label_; }

  nlohmann::json to_json() const;

 private:
  Graphon() = default;

  Kernel kernel_;
  std::optional<SbmGraphon> sbm_;
  std::optional<PiecewiseLipschitz> descriptor_;
  std::string label_;
};

/// Node count of the midpoint rule used for degrees of non-SBM graphons.
inline constexpr std::size_t kDegreeQuadratureNodes = 2048;
/// Grid size used by inf_degree for non-SBM graphons.
inline constexpr std::size_t kInfDegreeGridPoints = 1025;

/// d(x) = ∫₀¹ W(x, y) dy.
double degree(const Graphon& w, double x);

struct InfDegree {
  double value = 0.0;
  /// 0 when exact (SBM), otherwise the number of grid points searched.
  std::size_t grid_points = 0;
};

/// η_W = inf_x d(x).
InfDegree inf_degree(const Graphon& w);

/// max_x d(x); exact for SBM, grid maximum otherwise.
double max_degree(const Graphon& w);

/// Complete weighted graph Ā(i,j) = W(i/n, j/n), zero diagonal.
struct ExpectedGraph {
  std::size_t n = 0;
  Eigen::MatrixXd adjacency;
};

/// Latent position of 0-based vertex index i, i.e. (i+1)/n.
inline double latent(std::size_t i, std::size_t n) {
  return static_cast<double>(i + 1) / static_cast<double>(n);
}

ExpectedGraph expected_graph(const Graphon& w, std::size_t n);

/// Simple undirected graph: symmetric 0/1 adjacency, no loops.
class SimpleGraph {
 public:
  explicit SimpleGraph(std::size_t n) : n_(n), adj_(n * n, 0) {}

  std::size_t size() const { return n_; }
  bool edge(std::size_t i, std::size_t j) const { return adj_[i * n_ + j] != 0; }
  void set_edge(std::size_t i, std::size_t j, bool on);
  std::size_t edge_count() const;

  Eigen::MatrixXd adjacency() const;
  Eigen::MatrixXd laplacian() const;

  bool operator==(const SimpleGraph&) const = default;

 private:
  std::size_t n_;
  std::vector<std::uint8_t> adj_;
};

/// One Bernoulli(Ā(i,j)) per unordered pair, pairs visited row-major (i < j),
/// exactly one uniform variate drawn per pair.
SimpleGraph sample_simple_graph(const ExpectedGraph& expected, Rng& rng);

/// SBM document: {"boundaries": [0, ..., 1], "P": [[...], ...]} or
/// {"type": "constant", "p": 0.5}.
Graphon graphon_from_json(const nlohmann::json& doc);
Graphon load_graphon(const std::filesystem::path& path);

}  // namespace omas
