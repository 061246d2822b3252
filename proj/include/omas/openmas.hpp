#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "omas/consensus.hpp"
#include "omas/graphon.hpp"
#include "omas/rng.hpp"

namespace omas {

/// Distribution of the opinion carried by a newly arriving agent.
/// Mean is always 0; uniform draws live on ±√(3σ²).
struct ArrivalDistribution {
  enum class Family { gaussian, uniform };
  Family family = Family::gaussian;
  double variance = 1.0;

  double draw(Rng& rng) const;
};

std::string to_string(ArrivalDistribution::Family f);
ArrivalDistribution::Family parse_family(const std::string& s);

struct InitialFromArrivals {};
struct InitialConstant {
  double value = 0.0;
};
struct InitialExplicit {
  std::vector<double> values;
};
using InitialState = std::variant<InitialFromArrivals, InitialConstant, InitialExplicit>;

struct ReplacementConfig {
  Graphon graphon = Graphon::constant(1.0);
  std::size_t n = 10;
  double gamma = 1.0;  // Δt = γ/n
  ArrivalDistribution arrivals;
  std::size_t events = 1000;
  InitialState initial;
  std::uint64_t seed = 0;
  bool resample_topology = true;
};

struct OpenSystemConfig {
  Graphon graphon = Graphon::constant(1.0);
  std::size_t n_min = 10;
  std::size_t n_max = 20;
  std::size_t n0 = 15;
  double gamma = 1.0;  // Δt = γ/n(tᵏ)
  ArrivalDistribution arrivals;
  std::size_t events = 1000;
  InitialState initial;
  std::uint64_t seed = 0;

  /// τ = 1/(n_max - n_min).
  double tau() const { return 1.0 / static_cast<double>(n_max - n_min); }
  void validate() const;
};

enum class EventKind { arrival, departure, replacement };
std::string to_string(EventKind k);

struct EventRecord {
  std::size_t k = 0;
  double t = 0.0;  // time at which the event fires
  EventKind kind = EventKind::replacement;
  std::size_t n_before = 0;
  std::size_t n_after = 0;
  double v_before = 0.0;  // V(tᵏ), after propagation, before the event
  double v_after = 0.0;   // V⁺(tᵏ)
  double mu2 = 0.0;       // μ₂ of the topology active during the preceding interval
};

struct Trajectory {
  std::size_t n0 = 0;
  double v0 = 0.0;
  std::vector<EventRecord> events;
};

/// Removes one uniformly chosen agent.
AgentStates apply_departure(const AgentStates& x, Rng& rng);
/// Appends one agent drawn from the arrival distribution.
AgentStates apply_arrival(const AgentStates& x, const ArrivalDistribution& dist, Rng& rng);
/// Overwrites one uniformly chosen agent with a fresh arrival draw.
AgentStates apply_replacement(const AgentStates& x, const ArrivalDistribution& dist, Rng& rng);

/// Departure with probability τ(n - n_min), arrival otherwise.
EventKind next_event(std::size_t n, const OpenSystemConfig& cfg, Rng& rng);

Trajectory simulate_replacements(const ReplacementConfig& cfg);
Trajectory simulate_open(const OpenSystemConfig& cfg);

/// Mean of V⁺ over the events after the first `burn_in` fraction.
double steady_state_disagreement(const Trajectory& t, double burn_in);
/// Mean size over the events after the first `burn_in` fraction (n after each event).
double mean_size(const Trajectory& t, double burn_in);

void write_trajectory_csv(std::ostream& out, const Trajectory& t);

AgentStates initial_states(const InitialState& rule, std::size_t n, const ArrivalDistribution& dist, Rng& rng);

}  // namespace omas
