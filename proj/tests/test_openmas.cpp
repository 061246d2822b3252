#include <doctest.h>

#include <cmath>
#include <sstream>

#include "omas/bounds.hpp"
#include "omas/errors.hpp"
#include "omas/openmas.hpp"

using namespace omas;

namespace {

AgentStates vec(std::initializer_list<double> v) {
  AgentStates x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) x(i++) = e;
  return x;
}

AgentStates remove_index(const AgentStates& x, Eigen::Index i) {
  AgentStates out(x.size() - 1);
  out << x.head(i), x.tail(x.size() - i - 1);
  return out;
}

double mean_over_removals(const AgentStates& x) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) sum += disagreement(remove_index(x, i));
  return sum / static_cast<double>(x.size());
}

OpenSystemConfig open_config(std::size_t n_min, std::size_t n_max) {
  OpenSystemConfig cfg;
  cfg.n_min = n_min;
  cfg.n_max = n_max;
  cfg.n0 = n_min;
  return cfg;
}

}  // namespace

TEST_CASE("departure keeps all but one agent") {
  Rng rng(1);
  const AgentStates x = vec({5.0, 6.0});
  const AgentStates y = apply_departure(x, rng);
  REQUIRE(y.size() == 1);
  CHECK((y(0) == 5.0 || y(0) == 6.0));
  CHECK(disagreement(y) == 0.0);
  CHECK_THROWS_AS(apply_departure(vec({1.0}), rng), DomainError);
}

TEST_CASE("departure identity averaged over every removal") {
  CHECK(mean_over_removals(vec({1.0, 2.0, 3.0})) == doctest::Approx(0.5).epsilon(1e-15));
  for (std::size_t n = 3; n <= 10; ++n) {
    for (std::size_t s = 0; s < 100; ++s) {
      Rng rng = make_stream(2, n * 1000 + s, "departure");
      AgentStates x(static_cast<Eigen::Index>(n));
      for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = 4.0 * uniform01(rng) - 2.0;
      const double nd = static_cast<double>(n);
      const double expected = (1.0 - 1.0 / ((nd - 1.0) * (nd - 1.0))) * disagreement(x);
      REQUIRE(std::abs(mean_over_removals(x) - expected) <= 1e-12);
    }
  }
}

TEST_CASE("departure picks indices uniformly") {
  const AgentStates x = vec({0.0, 1.0, 2.0, 3.0});
  std::array<int, 4> hits{};
  Rng rng(3);
  const int draws = 40000;
  for (int k = 0; k < draws; ++k) {
    const AgentStates y = apply_departure(x, rng);
    const double missing = 6.0 - y.sum();
    ++hits[static_cast<std::size_t>(missing)];
  }
  const double se = std::sqrt(draws * 0.25 * 0.75);
  for (int h : hits) CHECK(std::abs(h - draws / 4.0) <= 4.0 * se);
}

TEST_CASE("arrival appends a draw") {
  Rng rng(4);
  ArrivalDistribution none{ArrivalDistribution::Family::gaussian, 0.0};
  const AgentStates y = apply_arrival(vec({0.0, 0.0}), none, rng);
  CHECK(y.size() == 3);
  CHECK(disagreement(y) == 0.0);
}

TEST_CASE("arrival Monte Carlo matches the zero-mean formula") {
  // x̄ = 0: E[V⁺] = n/(n+1) V + n σ²/(n+1)², below the one-step arrival map.
  for (auto family : {ArrivalDistribution::Family::gaussian, ArrivalDistribution::Family::uniform}) {
    const ArrivalDistribution dist{family, 1.0};
    for (const AgentStates& x : {vec({0.0, 0.0}), vec({1.0, -2.0, 1.0})}) {
      const double n = static_cast<double>(x.size());
      const double v = disagreement(x);
      const std::size_t draws = 1000000;
      Rng rng = make_stream(5, static_cast<std::uint64_t>(x.size()), to_string(family));
      double mean = 0.0, m2 = 0.0;
      for (std::size_t k = 0; k < draws; ++k) {
        const double vp = disagreement(apply_arrival(x, dist, rng));
        const double d = vp - mean;
        mean += d / static_cast<double>(k + 1);
        m2 += d * (vp - mean);
      }
      const double se = std::sqrt(m2 / static_cast<double>(draws - 1) / static_cast<double>(draws));
      const double exact = n / (n + 1.0) * v + n / ((n + 1.0) * (n + 1.0));
      CHECK(std::abs(mean - exact) <= 3.0 * se);
      if (x.size() == 2) CHECK(exact == doctest::Approx(2.0 / 9.0));
      CHECK(mean <= prop1_maps(v, x.size(), 1.0, 0.0, 0.0).arrival + 3.0 * se);
    }
  }
}

TEST_CASE("uniform arrivals have the requested variance") {
  const ArrivalDistribution dist{ArrivalDistribution::Family::uniform, 2.0};
  Rng rng(6);
  double sum = 0.0, sq = 0.0, top = 0.0;
  const int draws = 200000;
  for (int k = 0; k < draws; ++k) {
    const double v = dist.draw(rng);
    sum += v;
    sq += v * v;
    top = std::max(top, std::abs(v));
  }
  CHECK(sum / draws == doctest::Approx(0.0).epsilon(0.01));
  CHECK(sq / draws == doctest::Approx(2.0).epsilon(0.01));
  CHECK(top <= std::sqrt(6.0));
}

TEST_CASE("replacement at consensus") {
  Rng rng(7);
  const ArrivalDistribution none{ArrivalDistribution::Family::gaussian, 0.0};
  CHECK(disagreement(apply_replacement(vec({0.0, 0.0, 0.0}), none, rng)) == 0.0);
  CHECK_THROWS_AS(apply_replacement(vec({1.0}), none, rng), DomainError);

  // V = 0, x̄ = 0: E[V⁺] = (n−1)σ²/n², strictly below the map's (n²−1)σ²/n³.
  const ArrivalDistribution dist{ArrivalDistribution::Family::gaussian, 1.0};
  for (std::size_t n : {2, 5, 10}) {
    const AgentStates x = AgentStates::Zero(static_cast<Eigen::Index>(n));
    const std::size_t draws = 200000;
    double sum = 0.0, sq = 0.0;
    for (std::size_t k = 0; k < draws; ++k) {
      const double v = disagreement(apply_replacement(x, dist, rng));
      sum += v;
      sq += v * v;
    }
    const double mean = sum / draws;
    const double se = std::sqrt((sq / draws - mean * mean) / draws);
    const double nd = static_cast<double>(n);
    CHECK(std::abs(mean - (nd - 1.0) / (nd * nd)) <= 3.0 * se);
    CHECK(mean <= (nd * nd - 1.0) / (nd * nd * nd) + 3.0 * se);
  }
}

TEST_CASE("replacement Monte Carlo respects the one-step replacement map") {
  const ArrivalDistribution dist{ArrivalDistribution::Family::gaussian, 1.0};
  const AgentStates x = vec({2.0, -1.0, 0.5, -1.5});  // mean 0
  Rng rng(8);
  const std::size_t draws = 200000;
  double sum = 0.0, sq = 0.0;
  for (std::size_t k = 0; k < draws; ++k) {
    const double v = disagreement(apply_replacement(x, dist, rng));
    sum += v;
    sq += v * v;
  }
  const double mean = sum / draws;
  const double se = std::sqrt((sq / draws - mean * mean) / draws);
  const double v = disagreement(x);
  // Zero-mean closed form: (n²−n−1)/n² V + (n−1)σ²/n².
  CHECK(std::abs(mean - (11.0 / 16.0 * v + 3.0 / 16.0)) <= 3.0 * se);
  CHECK(mean <= prop1_maps(v, 4, 1.0, 0.0, 0.0).replacement + 3.0 * se);
}

TEST_CASE("next_event at the size limits") {
  const OpenSystemConfig cfg = open_config(10, 20);
  Rng rng(9);
  for (int k = 0; k < 10000; ++k) {
    REQUIRE(next_event(20, cfg, rng) == EventKind::departure);
    REQUIRE(next_event(10, cfg, rng) == EventKind::arrival);
  }
  CHECK_THROWS_AS(next_event(9, cfg, rng), InvariantViolation);
  CHECK_THROWS_AS(next_event(21, cfg, rng), InvariantViolation);
}

TEST_CASE("next_event departure frequency at the midpoint") {
  const OpenSystemConfig cfg = open_config(10, 20);
  Rng rng(10);
  const int draws = 100000;
  int departures = 0;
  for (int k = 0; k < draws; ++k) departures += next_event(15, cfg, rng) == EventKind::departure;
  const double se = std::sqrt(0.25 / draws);
  CHECK(std::abs(departures / double(draws) - 0.5) <= 3.0 * se);
}

TEST_CASE("replacement simulation is deterministic per seed") {
  ReplacementConfig cfg;
  cfg.graphon = Graphon::sbm(SbmGraphon::two_block(0.8, 0.2));
  cfg.n = 12;
  cfg.events = 200;
  cfg.seed = 42;
  const Trajectory a = simulate_replacements(cfg), b = simulate_replacements(cfg);
  std::ostringstream sa, sb;
  write_trajectory_csv(sa, a);
  write_trajectory_csv(sb, b);
  CHECK(sa.str() == sb.str());
  cfg.seed = 43;
  std::ostringstream sc;
  write_trajectory_csv(sc, simulate_replacements(cfg));
  CHECK(sa.str() != sc.str());
}

TEST_CASE("trajectory records satisfy the decay contract") {
  ReplacementConfig cfg;
  cfg.graphon = Graphon::constant(0.4);
  cfg.n = 15;
  cfg.gamma = 0.7;
  cfg.events = 300;
  cfg.seed = 5;
  const Trajectory t = simulate_replacements(cfg);
  double v = t.v0;
  double prev_t = 0.0;
  for (const auto& e : t.events) {
    const double dt = cfg.gamma / cfg.n;
    const double lambda2 = e.mu2 * cfg.n;
    REQUIRE(e.v_before <= v * std::exp(-2.0 * lambda2 * dt) * (1.0 + 1e-8) + 1e-24);
    REQUIRE(e.t == doctest::Approx(prev_t + dt));
    REQUIRE(e.n_before == cfg.n);
    REQUIRE(e.n_after == cfg.n);
    prev_t = e.t;
    v = e.v_after;
  }
}

TEST_CASE("fixed topology keeps the first sampled graph") {
  ReplacementConfig cfg;
  cfg.graphon = Graphon::constant(0.5);
  cfg.n = 10;
  cfg.events = 50;
  cfg.resample_topology = false;
  const Trajectory t = simulate_replacements(cfg);
  for (const auto& e : t.events) REQUIRE(e.mu2 == t.events.front().mu2);
  cfg.resample_topology = true;
  const Trajectory r = simulate_replacements(cfg);
  bool changed = false;
  for (const auto& e : r.events) changed |= e.mu2 != r.events.front().mu2;
  CHECK(changed);
}

TEST_CASE("zero variance from consensus stays at consensus") {
  OpenSystemConfig cfg = open_config(4, 9);
  cfg.n0 = 6;
  cfg.arrivals.variance = 0.0;
  cfg.initial = InitialConstant{0.0};
  cfg.events = 300;
  for (const auto& e : simulate_open(cfg).events) {
    REQUIRE(e.v_before == 0.0);
    REQUIRE(e.v_after == 0.0);
  }
  ReplacementConfig rc;
  rc.arrivals.variance = 0.0;
  rc.initial = InitialConstant{0.0};
  rc.events = 100;
  for (const auto& e : simulate_replacements(rc).events) REQUIRE(e.v_after == 0.0);
}

TEST_CASE("gamma = 0 without injected variance never increases V on average") {
  // No continuous decay: each replacement by 0 must still shrink the mean square.
  ReplacementConfig cfg;
  cfg.gamma = 0.0;
  cfg.arrivals.variance = 0.0;
  cfg.initial = InitialExplicit{{3.0, -1.0, 2.0, 0.0, 5.0}};
  cfg.n = 5;
  cfg.events = 40;
  const Trajectory t = simulate_replacements(cfg);
  for (const auto& e : t.events) CHECK(e.t == 0.0);
  CHECK(t.events.back().v_after <= t.v0);
}

TEST_CASE("open system stays within its size limits") {
  OpenSystemConfig cfg = open_config(3, 8);
  cfg.n0 = 5;
  cfg.graphon = Graphon::sbm(SbmGraphon::two_block(0.9, 0.3));
  cfg.events = 2000;
  cfg.seed = 11;
  const Trajectory t = simulate_open(cfg);
  std::size_t n = cfg.n0;
  for (const auto& e : t.events) {
    REQUIRE(e.n_before == n);
    REQUIRE(e.n_after >= cfg.n_min);
    REQUIRE(e.n_after <= cfg.n_max);
    REQUIRE((e.n_after == n + 1 || e.n_after + 1 == n));
    REQUIRE((e.kind == EventKind::arrival) == (e.n_after == n + 1));
    n = e.n_after;
  }
}

TEST_CASE("open system configuration checks") {
  OpenSystemConfig cfg = open_config(5, 5);
  CHECK_THROWS_AS(simulate_open(cfg), DomainError);
  cfg = open_config(5, 8);
  cfg.n0 = 9;
  CHECK_THROWS_AS(simulate_open(cfg), DomainError);
  cfg.n0 = 6;
  cfg.initial = InitialExplicit{{1.0, 2.0}};
  CHECK_THROWS_AS(simulate_open(cfg), DomainError);
}

TEST_CASE("mean size approaches the midpoint") {
  OpenSystemConfig cfg = open_config(10, 20);
  cfg.n0 = 10;
  cfg.events = 1000;
  double total = 0.0;
  const int trials = 100;
  for (int s = 0; s < trials; ++s) {
    cfg.seed = derive_seed(12, static_cast<std::uint64_t>(s), "trial");
    total += mean_size(simulate_open(cfg), 0.1);
  }
  CHECK(total / trials == doctest::Approx(expected_n_limit(10, 20)).epsilon(0.02));
}

TEST_CASE("steady-state averages and burn-in") {
  Trajectory t;
  for (std::size_t k = 0; k < 10; ++k) t.events.push_back({k, 0.0, EventKind::arrival, 1, 1 + k, 0.0, double(k), 0.0});
  CHECK(steady_state_disagreement(t, 0.0) == doctest::Approx(4.5));
  CHECK(steady_state_disagreement(t, 0.5) == doctest::Approx(7.0));
  CHECK(mean_size(t, 0.5) == doctest::Approx(8.0));
  CHECK_THROWS_AS(steady_state_disagreement(t, 1.0), DomainError);
  CHECK_THROWS_AS(steady_state_disagreement(Trajectory{}, 0.1), DomainError);
}

TEST_CASE("trajectory CSV header") {
  ReplacementConfig cfg;
  cfg.events = 2;
  std::ostringstream os;
  write_trajectory_csv(os, simulate_replacements(cfg));
  std::string header;
  std::getline(std::istringstream(os.str()) >> std::ws, header);
  CHECK(header == "k,t,event,n_before,n_after,V_before,V_after,mu2");
}
