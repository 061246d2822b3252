#include "omas/openmas.hpp"

#include <cmath>
#include <iomanip>
#include <memory>
#include <optional>
#include <random>
#include <sstream>

#include "omas/errors.hpp"

namespace omas {

double ArrivalDistribution::draw(Rng& rng) const {
  if (variance == 0.0) return 0.0;
  switch (family) {
    case Family::gaussian:
      return std::normal_distribution<double>(0.0, std::sqrt(variance))(rng);
    case Family::uniform: {
      const double half_width = std::sqrt(3.0 * variance);
      return -half_width + 2.0 * half_width * uniform01(rng);
    }
  }
  throw InvariantViolation("unknown arrival family");
}

std::string to_string(ArrivalDistribution::Family f) {
  return f == ArrivalDistribution::Family::gaussian ? "gaussian" : "uniform";
}

ArrivalDistribution::Family parse_family(const std::string& s) {
  if (s == "gaussian") return ArrivalDistribution::Family::gaussian;
  if (s == "uniform") return ArrivalDistribution::Family::uniform;
  throw DomainError("unknown arrival distribution \"" + s + "\" (expected gaussian|uniform)");
}

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::arrival: return "arrival";
    case EventKind::departure: return "departure";
    case EventKind::replacement: return "replacement";
  }
  return "?";
}

void OpenSystemConfig::validate() const {
  if (n_max <= n_min) throw DomainError("open system: need n_max > n_min");
  if (n_min < 1) throw DomainError("open system: need n_min >= 1");
  if (n0 < n_min || n0 > n_max) throw DomainError("open system: n0 outside [n_min, n_max]");
  if (!(gamma >= 0.0)) throw DomainError("open system: gamma must be nonnegative");
  if (!(arrivals.variance >= 0.0)) throw DomainError("open system: variance must be nonnegative");
  if (events < 1) throw DomainError("open system: need at least one event");
}

AgentStates apply_departure(const AgentStates& x, Rng& rng) {
  const auto n = static_cast<std::size_t>(x.size());
  if (n < 2) throw DomainError("departure: refused, the system would become empty");
  const auto leaving = static_cast<Eigen::Index>(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
  AgentStates out(x.size() - 1);
  out.head(leaving) = x.head(leaving);
  out.tail(x.size() - leaving - 1) = x.tail(x.size() - leaving - 1);
  return out;
}

AgentStates apply_arrival(const AgentStates& x, const ArrivalDistribution& dist, Rng& rng) {
  AgentStates out(x.size() + 1);
  out.head(x.size()) = x;
  out(x.size()) = dist.draw(rng);
  return out;
}

AgentStates apply_replacement(const AgentStates& x, const ArrivalDistribution& dist, Rng& rng) {
  const auto n = static_cast<std::size_t>(x.size());
  if (n < 2) throw DomainError("replacement: need at least two agents");
  const auto who = static_cast<Eigen::Index>(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
  AgentStates out = x;
  out(who) = dist.draw(rng);
  return out;
}

EventKind next_event(std::size_t n, const OpenSystemConfig& cfg, Rng& rng) {
  if (n < cfg.n_min || n > cfg.n_max) {
    std::ostringstream os;
    os << "next_event: size " << n << " outside [" << cfg.n_min << ", " << cfg.n_max << "]";
    throw InvariantViolation(os.str());
  }
  // p_D is exactly 1 at n_max and 0 at n_min; uniform01 lies in [0,1).
  const double p_departure = static_cast<double>(n - cfg.n_min) / static_cast<double>(cfg.n_max - cfg.n_min);
  return uniform01(rng) < p_departure ? EventKind::departure : EventKind::arrival;
}

AgentStates initial_states(const InitialState& rule, std::size_t n, const ArrivalDistribution& dist, Rng& rng) {
  return std::visit(
      [&](const auto& r) -> AgentStates {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, InitialFromArrivals>) {
          AgentStates x(static_cast<Eigen::Index>(n));
          for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = dist.draw(rng);
          return x;
        } else if constexpr (std::is_same_v<R, InitialConstant>) {
          return AgentStates::Constant(static_cast<Eigen::Index>(n), r.value);
        } else {
          if (r.values.size() != n) throw DomainError("initial state: explicit vector length differs from n");
          return Eigen::Map<const Eigen::VectorXd>(r.values.data(), static_cast<Eigen::Index>(n));
        }
      },
      rule);
}

namespace {

// Reuses the eigendecomposition when a freshly sampled topology coincides with
// the previous one (always the case for W ≡ 1).
class TopologyCache {
 public:
  const Propagator& get(SimpleGraph g) {
    if (!graph_ || !(*graph_ == g)) {
      propagator_ = std::make_unique<Propagator>(g);
      graph_ = std::move(g);
    }
    return *propagator_;
  }

 private:
  std::optional<SimpleGraph> graph_;
  std::unique_ptr<Propagator> propagator_;
};

}  // namespace

Trajectory simulate_replacements(const ReplacementConfig& cfg) {
  if (cfg.n < 2) throw DomainError("replacements: need n >= 2");
  if (cfg.events < 1) throw DomainError("replacements: need at least one event");
  if (!(cfg.gamma >= 0.0)) throw DomainError("replacements: gamma must be nonnegative");
  if (!(cfg.arrivals.variance >= 0.0)) throw DomainError("replacements: variance must be nonnegative");

  Rng init_rng = make_stream(cfg.seed, 0, "init");
  Rng event_rng = make_stream(cfg.seed, 0, "events");
  AgentStates x = initial_states(cfg.initial, cfg.n, cfg.arrivals, init_rng);

  const ExpectedGraph expected = expected_graph(cfg.graphon, cfg.n);
  const double dt = cfg.gamma / static_cast<double>(cfg.n);
  TopologyCache cache;
  const Propagator* topology = nullptr;

  Trajectory traj;
  traj.n0 = cfg.n;
  traj.v0 = disagreement(x);
  traj.events.reserve(cfg.events);
  double t = 0.0;
  for (std::size_t k = 0; k < cfg.events; ++k) {
    if (k == 0 || cfg.resample_topology) {
      Rng topo_rng = make_stream(cfg.seed, k, "topology");
      topology = &cache.get(sample_simple_graph(expected, topo_rng));
    }
    x = topology->propagate(x, dt);
    t += dt;
    EventRecord rec;
    rec.k = k;
    rec.t = t;
    rec.kind = EventKind::replacement;
    rec.n_before = rec.n_after = cfg.n;
    rec.mu2 = topology->lambda2() / static_cast<double>(cfg.n);
    rec.v_before = disagreement(x);
    x = apply_replacement(x, cfg.arrivals, event_rng);
    rec.v_after = disagreement(x);
    traj.events.push_back(rec);
  }
  return traj;
}

Trajectory simulate_open(const OpenSystemConfig& cfg) {
  cfg.validate();
  Rng init_rng = make_stream(cfg.seed, 0, "init");
  Rng event_rng = make_stream(cfg.seed, 0, "events");
  AgentStates x = initial_states(cfg.initial, cfg.n0, cfg.arrivals, init_rng);

  std::vector<std::optional<ExpectedGraph>> expected(cfg.n_max + 1);
  std::vector<TopologyCache> caches(cfg.n_max + 1);

  Trajectory traj;
  traj.n0 = cfg.n0;
  traj.v0 = disagreement(x);
  traj.events.reserve(cfg.events);
  double t = 0.0;
  for (std::size_t k = 0; k < cfg.events; ++k) {
    const auto n = static_cast<std::size_t>(x.size());
    if (n < cfg.n_min || n > cfg.n_max) throw InvariantViolation("simulate_open: size left [n_min, n_max]");
    if (!expected[n]) expected[n] = expected_graph(cfg.graphon, n);
    Rng topo_rng = make_stream(cfg.seed, k, "topology");
    const Propagator& topology = caches[n].get(sample_simple_graph(*expected[n], topo_rng));
    if (topology.size() != n) throw InvariantViolation("simulate_open: topology size mismatch");

    const double dt = cfg.gamma / static_cast<double>(n);
    x = topology.propagate(x, dt);
    t += dt;
    EventRecord rec;
    rec.k = k;
    rec.t = t;
    rec.n_before = n;
    rec.mu2 = topology.lambda2() / static_cast<double>(n);
    rec.v_before = disagreement(x);
    rec.kind = next_event(n, cfg, event_rng);
    x = rec.kind == EventKind::departure ? apply_departure(x, event_rng) : apply_arrival(x, cfg.arrivals, event_rng);
    rec.n_after = static_cast<std::size_t>(x.size());
    rec.v_after = disagreement(x);
    traj.events.push_back(rec);
  }
  return traj;
}

namespace {

std::size_t burn_in_start(const Trajectory& t, double burn_in) {
  if (!(burn_in >= 0.0 && burn_in < 1.0)) throw DomainError("burn-in fraction must lie in [0,1)");
  if (t.events.empty()) throw DomainError("trajectory has no events");
  const auto skip = static_cast<std::size_t>(std::floor(burn_in * static_cast<double>(t.events.size())));
  return std::min(skip, t.events.size() - 1);
}

}  // namespace

double steady_state_disagreement(const Trajectory& t, double burn_in) {
  const std::size_t first = burn_in_start(t, burn_in);
  double sum = 0.0;
  for (std::size_t k = first; k < t.events.size(); ++k) sum += t.events[k].v_after;
  return sum / static_cast<double>(t.events.size() - first);
}

double mean_size(const Trajectory& t, double burn_in) {
  const std::size_t first = burn_in_start(t, burn_in);
  double sum = 0.0;
  for (std::size_t k = first; k < t.events.size(); ++k) sum += static_cast<double>(t.events[k].n_after);
  return sum / static_cast<double>(t.events.size() - first);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& t) {
  out << "k,t,event,n_before,n_after,V_before,V_after,mu2\n" << std::setprecision(17);
  for (const auto& e : t.events) {
    out << e.k << ',' << e.t << ',' << to_string(e.kind) << ',' << e.n_before << ',' << e.n_after << ','
        << e.v_before << ',' << e.v_after << ',' << e.mu2 << '\n';
  }
}

}  // namespace omas
