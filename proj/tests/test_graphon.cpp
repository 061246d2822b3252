#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "omas/errors.hpp"
#include "omas/graphon.hpp"

using namespace omas;

namespace {

// Indicator-sum form of W_SBM, written independently of SbmGraphon::block_of.
double indicator_sum(const std::vector<double>& b, const Eigen::MatrixXd& P, double x, double y) {
  auto chi = [&](std::size_t k, double z) {
    const bool first = k == 0;
    return (z > b[k] || (first && z == 0.0)) && z <= b[k + 1] ? 1.0 : 0.0;
  };
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < b.size(); ++i)
    for (std::size_t j = 0; j + 1 < b.size(); ++j) sum += P(i, j) * chi(i, x) * chi(j, y);
  return sum;
}

void check_simple(const SimpleGraph& g) {
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK_FALSE(g.edge(i, i));
    for (std::size_t j = 0; j < g.size(); ++j) REQUIRE(g.edge(i, j) == g.edge(j, i));
  }
}

}  // namespace

TEST_CASE("degree of constant and zero graphons") {
  CHECK(degree(Graphon::constant(0.3), 0.0) == doctest::Approx(0.3));
  CHECK(degree(Graphon::constant(0.3), 0.77) == doctest::Approx(0.3));
  CHECK(degree(Graphon::constant(0.0), 0.5) == 0.0);
}

TEST_CASE("degree of a two-block SBM is the block row sum") {
  const Graphon w = Graphon::sbm(SbmGraphon::two_block(0.8, 0.2));
  CHECK(degree(w, 0.25) == doctest::Approx(0.5));
  CHECK(degree(w, 0.75) == doctest::Approx(0.5));
}

TEST_CASE("degree rejects points outside [0,1]") {
  CHECK_THROWS_AS(degree(Graphon::constant(0.5), 1.5), DomainError);
  CHECK_THROWS_AS(degree(Graphon::constant(0.5), -0.1), DomainError);
}

TEST_CASE("quadrature degree of a smooth kernel") {
  // W(x,y) = (x + y)/2 has d(x) = x/2 + 1/4; the midpoint rule is exact for linear integrands.
  const Graphon w = Graphon::from_kernel([](double x, double y) { return 0.5 * (x + y); });
  CHECK(degree(w, 0.3) == doctest::Approx(0.4).epsilon(1e-12));
  const InfDegree eta = inf_degree(w);
  CHECK(eta.value == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(eta.grid_points == kInfDegreeGridPoints);
  CHECK(max_degree(w) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("inf_degree is exact for SBM graphons") {
  CHECK(inf_degree(Graphon::constant(0.4)).value == doctest::Approx(0.4));
  CHECK(inf_degree(Graphon::sbm(SbmGraphon::two_block(0.8, 0.2))).value == doctest::Approx(0.5));
  Eigen::MatrixXd P(2, 2);
  P << 0.9, 0.1, 0.1, 0.3;
  const InfDegree eta = inf_degree(Graphon::sbm(SbmGraphon({0.0, 0.5, 1.0}, P)));
  CHECK(eta.value == doctest::Approx(0.2));
  CHECK(eta.grid_points == 0);
}

TEST_CASE("SBM evaluation equals the indicator-sum formula") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<double> b{0.0, 0.2, 0.55, 0.6, 1.0};
  Eigen::MatrixXd P(4, 4);
  P << 0.1, 0.5, 0.3, 0.9,  //
      0.5, 0.7, 0.2, 0.0,   //
      0.3, 0.2, 1.0, 0.4,   //
      0.9, 0.0, 0.4, 0.6;
  const SbmGraphon s(b, P);
  for (int k = 0; k < 1000; ++k) {
    const double x = u(gen), y = u(gen);
    REQUIRE(s(x, y) == indicator_sum(b, P, x, y));
  }
  // Boundary points, including the endpoints and the latent points of small n.
  for (double x : {0.0, 0.2, 0.55, 0.6, 1.0})
    for (double y : {0.0, 0.2, 0.55, 0.6, 1.0}) CHECK(s(x, y) == indicator_sum(b, P, x, y));
}

TEST_CASE("SBM validation") {
  Eigen::MatrixXd asym(2, 2);
  asym << 0.5, 0.1, 0.2, 0.5;
  CHECK_THROWS_AS(SbmGraphon({0.0, 0.5, 1.0}, asym), DomainError);
  Eigen::MatrixXd big(1, 1);
  big << 1.5;
  CHECK_THROWS_AS(SbmGraphon({0.0, 1.0}, big), DomainError);
  CHECK_THROWS_AS(SbmGraphon({0.0, 0.6, 0.4, 1.0}, Eigen::MatrixXd::Zero(3, 3)), DomainError);
  CHECK_THROWS_AS(SbmGraphon({0.1, 1.0}, Eigen::MatrixXd::Zero(1, 1)), DomainError);
}

TEST_CASE("block counts use u_i = i/n") {
  const SbmGraphon s = SbmGraphon::two_block(0.8, 0.2);
  CHECK(s.block_counts(100) == std::vector<std::size_t>{50, 50});
  CHECK(s.block_counts(4) == std::vector<std::size_t>{2, 2});
  CHECK(s.block_counts(3) == std::vector<std::size_t>{1, 2});
}

TEST_CASE("expected graph entries") {
  SUBCASE("W = 1") {
    const ExpectedGraph g = expected_graph(Graphon::constant(1.0), 3);
    for (Eigen::Index i = 0; i < 3; ++i)
      for (Eigen::Index j = 0; j < 3; ++j) CHECK(g.adjacency(i, j) == (i == j ? 0.0 : 1.0));
  }
  SUBCASE("W = 0") { CHECK(expected_graph(Graphon::constant(0.0), 5).adjacency.isZero(0.0)); }
  SUBCASE("two-block SBM, n = 4") {
    const ExpectedGraph g = expected_graph(Graphon::sbm(SbmGraphon::two_block(0.8, 0.2)), 4);
    // u = (1/4, 2/4, 3/4, 1): first two in block 0, last two in block 1.
    const int block[4] = {0, 0, 1, 1};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        if (i == j) {
          CHECK(g.adjacency(i, j) == 0.0);
        } else {
          CHECK(g.adjacency(i, j) == (block[i] == block[j] ? 0.8 : 0.2));
        }
      }
  }
  CHECK_THROWS_AS(expected_graph(Graphon::constant(0.5), 0), DomainError);
}

TEST_CASE("expected graph evaluates a generic kernel at the latent grid") {
  const Graphon w = Graphon::from_kernel([](double x, double y) { return x * y; });
  const ExpectedGraph g = expected_graph(w, 5);
  CHECK(g.adjacency(1, 3) == doctest::Approx(0.4 * 0.8));
  CHECK(g.adjacency.isApprox(g.adjacency.transpose()));
}

TEST_CASE("sampling extremes") {
  Rng rng(3);
  for (std::size_t n : {1, 2, 7, 20}) {
    const SimpleGraph full = sample_simple_graph(expected_graph(Graphon::constant(1.0), n), rng);
    check_simple(full);
    CHECK(full.edge_count() == n * (n - 1) / 2);
    const SimpleGraph empty = sample_simple_graph(expected_graph(Graphon::constant(0.0), n), rng);
    CHECK(empty.edge_count() == 0);
  }
}

TEST_CASE("sampling is deterministic per seed") {
  const ExpectedGraph e = expected_graph(Graphon::sbm(SbmGraphon::two_block(0.7, 0.1)), 30);
  Rng a(99), b(99), c(100);
  const SimpleGraph ga = sample_simple_graph(e, a);
  CHECK(ga == sample_simple_graph(e, b));
  CHECK_FALSE(ga == sample_simple_graph(e, c));
}

TEST_CASE("sampling consumes one variate per pair in row-major order") {
  const std::size_t n = 6;
  const ExpectedGraph e = expected_graph(Graphon::constant(0.5), n);
  Rng rng(5), replay(5);
  const SimpleGraph g = sample_simple_graph(e, rng);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) CHECK(g.edge(i, j) == (uniform01(replay) < 0.5));
  CHECK(rng() == replay());
}

TEST_CASE("edge marginals match the expected graph") {
  // 10^4 samples; per-pair tolerance 4 standard errors. With 45 pairs per
  // graphon a union bound keeps the family-wise false alarm rate below 0.3%.
  const std::size_t samples = 10000;
  for (const Graphon& w : {Graphon::constant(0.5), Graphon::sbm(SbmGraphon::two_block(0.9, 0.15))}) {
    const std::size_t n = 10;
    const ExpectedGraph e = expected_graph(w, n);
    Eigen::MatrixXd freq = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t s = 0; s < samples; ++s) {
      Rng rng = make_stream(11, s, "marginals");
      const SimpleGraph g = sample_simple_graph(e, rng);
      if (s % 97 == 0) check_simple(g);
      freq += g.adjacency();
    }
    freq /= static_cast<double>(samples);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double p = e.adjacency(i, j);
        const double se = std::sqrt(p * (1 - p) / samples);
        CHECK(std::abs(freq(i, j) - p) <= 4.0 * se);
      }
  }
}

TEST_CASE("W = 0.5, n = 50: per-pair frequency within 3 standard errors of 0.5") {
  const std::size_t n = 50, samples = 10000;
  const ExpectedGraph e = expected_graph(Graphon::constant(0.5), n);
  Eigen::MatrixXd freq = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t s = 0; s < samples; ++s) {
    Rng rng = make_stream(12, s, "half");
    freq += sample_simple_graph(e, rng).adjacency();
  }
  freq /= static_cast<double>(samples);
  const double se = std::sqrt(0.25 / samples);
  std::size_t outside = 0, pairs = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j, ++pairs) {
      const double dev = std::abs(freq(i, j) - 0.5);
      outside += dev > 3.0 * se;
      worst = std::max(worst, dev);
    }
  // 1225 pairs at 3 SE: about 3 expected exceedances; 4 SE is never exceeded in practice.
  CHECK(outside <= 12);
  CHECK(worst <= 4.5 * se);
  CHECK(pairs == 1225);
}

TEST_CASE("graphon documents") {
  const Graphon c = graphon_from_json(nlohmann::json::parse(R"({"type":"constant","p":0.25})"));
  CHECK(c(0.1, 0.9) == 0.25);
  const Graphon s = graphon_from_json(nlohmann::json::parse(R"({"boundaries":[0,0.5,1],"P":[[0.8,0.2],[0.2,0.8]]})"));
  REQUIRE(s.as_sbm());
  CHECK(s(0.1, 0.9) == 0.2);
  CHECK(s(0.9, 0.9) == 0.8);
  CHECK_THROWS_AS(graphon_from_json(nlohmann::json::parse(R"({"type":"sbm","boundaries":[0,1]})")), DomainError);
  CHECK_THROWS_AS(graphon_from_json(nlohmann::json::parse(R"({"type":"constant","p":2})")), DomainError);
  CHECK_THROWS_AS(graphon_from_json(nlohmann::json::parse(R"({"boundaries":[0,0.5,1],"P":[[0.8,0.2],[0.3,0.8]]})")),
                  DomainError);
}
