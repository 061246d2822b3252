#include "omas/graphon.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "omas/errors.hpp"

namespace omas {

namespace {

void check_boundaries(const std::vector<double>& b) {
  if (b.size() < 2) throw DomainError("graphon: need at least two boundary points");
  if (b.front() != 0.0 || b.back() != 1.0)
    throw DomainError("graphon: boundaries must start at 0 and end at 1");
  for (std::size_t k = 1; k < b.size(); ++k) {
    if (!(b[k] > b[k - 1])) throw DomainError("graphon: boundaries must be strictly increasing");
  }
}

void check_unit(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) {
    std::ostringstream os;
    os << what << ": point " << x << " outside [0,1]";
    throw DomainError(os.str());
  }
}

}  // namespace

double PiecewiseLipschitz::min_interval_width() const {
  double w = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < boundaries.size(); ++k) w = std::min(w, boundaries[k] - boundaries[k - 1]);
  return w;
}

SbmGraphon::SbmGraphon(std::vector<double> boundaries, Eigen::MatrixXd probabilities)
    : boundaries_(std::move(boundaries)), p_(std::move(probabilities)) {
  check_boundaries(boundaries_);
  const auto m = static_cast<Eigen::Index>(boundaries_.size() - 1);
  if (p_.rows() != m || p_.cols() != m)
    throw DomainError("sbm: P must be m×m with m = number of blocks");
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (!(p_(i, j) >= 0.0 && p_(i, j) <= 1.0)) throw DomainError("sbm: P entries must lie in [0,1]");
      if (p_(i, j) != p_(j, i)) throw DomainError("sbm: P must be symmetric");
    }
  }
}

SbmGraphon SbmGraphon::two_block(double p, double q) {
  Eigen::MatrixXd P(2, 2);
  P << p, q, q, p;
  return SbmGraphon({0.0, 0.5, 1.0}, P);
}

std::size_t SbmGraphon::block_of(double x) const {
  check_unit(x, "sbm");
  // First boundary >= x closes the block (α_{k-1}, α_k]; x = 0 joins the first block.
  const auto it = std::lower_bound(boundaries_.begin(), boundaries_.end(), x);
  const auto k = static_cast<std::size_t>(it - boundaries_.begin());
  return k == 0 ? 0 : k - 1;
}

Eigen::VectorXd SbmGraphon::block_degrees() const {
  Eigen::VectorXd widths(p_.rows());
  for (Eigen::Index k = 0; k < widths.size(); ++k) widths(k) = block_width(static_cast<std::size_t>(k));
  return p_ * widths;
}

std::vector<std::size_t> SbmGraphon::block_counts(std::size_t n) const {
  std::vector<std::size_t> counts(blocks(), 0);
  for (std::size_t i = 0; i < n; ++i) ++counts[block_of(latent(i, n))];
  return counts;
}

Graphon Graphon::constant(double p) {
  Eigen::MatrixXd P(1, 1);
  P(0, 0) = p;
  Graphon g = sbm(SbmGraphon({0.0, 1.0}, P));
  std::ostringstream os;
  os << "constant(" << p << ")";
  g.label_ = os.str();
  return g;
}

Graphon Graphon::sbm(SbmGraphon s) {
  Graphon g;
  g.descriptor_ = PiecewiseLipschitz{s.boundaries(), 0.0};
  g.label_ = "sbm(m=" + std::to_string(s.blocks()) + ")";
  g.kernel_ = [s](double x, double y) { return s(x, y); };
  g.sbm_ = std::move(s);
  return g;
}

Graphon Graphon::from_kernel(Kernel w, std::optional<PiecewiseLipschitz> descriptor, std::string label) {
  if (!w) throw DomainError("graphon: empty kernel");
  if (descriptor) check_boundaries(descriptor->boundaries);
  Graphon g;
  g.kernel_ = std::move(w);
  g.descriptor_ = std::move(descriptor);
  g.label_ = std::move(label);
  return g;
}

nlohmann::json Graphon::to_json() const {
  nlohmann::json j;
  j["label"] = label_;
  if (sbm_) {
    j["type"] = "sbm";
    j["boundaries"] = sbm_->boundaries();
    auto& P = sbm_->probabilities();
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < P.rows(); ++r) {
      std::vector<double> row(P.cols());
      for (Eigen::Index c = 0; c < P.cols(); ++c) row[c] = P(r, c);
      rows.push_back(row);
    }
    j["P"] = rows;
  } else {
    j["type"] = "kernel";
  }
  return j;
}

double degree(const Graphon& w, double x) {
  check_unit(x, "degree");
  if (const auto& s = w.as_sbm()) return s->block_degrees()(static_cast<Eigen::Index>(s->block_of(x)));
  const double h = 1.0 / static_cast<double>(kDegreeQuadratureNodes);
  double sum = 0.0;
  for (std::size_t k = 0; k < kDegreeQuadratureNodes; ++k) sum += w(x, (static_cast<double>(k) + 0.5) * h);
  return sum * h;
}

InfDegree inf_degree(const Graphon& w) {
  if (const auto& s = w.as_sbm()) return {s->block_degrees().minCoeff(), 0};
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < kInfDegreeGridPoints; ++k) {
    const double x = static_cast<double>(k) / static_cast<double>(kInfDegreeGridPoints - 1);
    best = std::min(best, degree(w, x));
  }
  return {best, kInfDegreeGridPoints};
}

double max_degree(const Graphon& w) {
  if (const auto& s = w.as_sbm()) return s->block_degrees().maxCoeff();
  double best = 0.0;
  for (std::size_t k = 0; k < kInfDegreeGridPoints; ++k) {
    const double x = static_cast<double>(k) / static_cast<double>(kInfDegreeGridPoints - 1);
    best = std::max(best, degree(w, x));
  }
  return best;
}

ExpectedGraph expected_graph(const Graphon& w, std::size_t n) {
  if (n == 0) throw DomainError("expected_graph: n must be positive");
  ExpectedGraph g{n, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = w(latent(i, n), latent(j, n));
      if (!(v >= 0.0 && v <= 1.0)) throw DomainError("expected_graph: kernel value outside [0,1]");
      g.adjacency(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      g.adjacency(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  }
  return g;
}

void SimpleGraph::set_edge(std::size_t i, std::size_t j, bool on) {
  if (i == j) throw ContractViolation("SimpleGraph: self-loops are not allowed");
  adj_[i * n_ + j] = on;
  adj_[j * n_ + i] = on;
}

std::size_t SimpleGraph::edge_count() const {
  return static_cast<std::size_t>(std::count(adj_.begin(), adj_.end(), std::uint8_t{1})) / 2;
}

Eigen::MatrixXd SimpleGraph::adjacency() const {
  const auto n = static_cast<Eigen::Index>(n_);
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = adj_[static_cast<std::size_t>(i * n + j)];
  return a;
}

Eigen::MatrixXd SimpleGraph::laplacian() const {
  Eigen::MatrixXd l = -adjacency();
  l.diagonal() = -l.rowwise().sum();
  return l;
}

SimpleGraph sample_simple_graph(const ExpectedGraph& expected, Rng& rng) {
  SimpleGraph g(expected.n);
  for (std::size_t i = 0; i < expected.n; ++i) {
    for (std::size_t j = i + 1; j < expected.n; ++j) {
      const double u = uniform01(rng);
      if (u < expected.adjacency(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) g.set_edge(i, j, true);
    }
  }
  return g;
}

Graphon graphon_from_json(const nlohmann::json& doc) {
  const std::string type = doc.value("type", doc.contains("p") && !doc.contains("P") ? "constant" : "sbm");
  if (type == "constant") {
    if (!doc.contains("p")) throw DomainError("graphon document: constant graphon needs \"p\"");
    const double p = doc.at("p").get<double>();
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("graphon document: p outside [0,1]");
    return Graphon::constant(p);
  }
  if (type != "sbm") throw DomainError("graphon document: unknown type \"" + type + "\"");
  if (!doc.contains("boundaries") || !doc.contains("P"))
    throw DomainError("graphon document: sbm needs \"boundaries\" and \"P\"");
  auto boundaries = doc.at("boundaries").get<std::vector<double>>();
  auto rows = doc.at("P").get<std::vector<std::vector<double>>>();
  Eigen::MatrixXd P(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows.size()) throw DomainError("graphon document: P must be square");
    for (std::size_t c = 0; c < rows.size(); ++c) P(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  }
  return Graphon::sbm(SbmGraphon(std::move(boundaries), std::move(P)));
}

Graphon load_graphon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graphon document " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  return graphon_from_json(doc);
}

}  // namespace omas
