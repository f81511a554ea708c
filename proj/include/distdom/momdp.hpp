#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "distdom/distribution.hpp"
#include "distdom/rng.hpp"

namespace distdom {

struct Successor {
  std::size_t state = 0;
  double prob = 0.0;
  ReturnDistribution reward;  // R(s, a, s')

  bool operator==(const Successor&) const = default;
};

/// Tabular multi-objective MDP. Episodes start in state 0 and run for exactly
/// `horizon` steps.
class Momdp {
 public:
  Momdp(std::size_t num_states, std::size_t num_actions, std::size_t num_objectives,
        double gamma, std::size_t horizon);

  std::size_t num_states() const noexcept { return num_states_; }
  std::size_t num_actions() const noexcept { return num_actions_; }
  std::size_t num_objectives() const noexcept { return num_objectives_; }
  double gamma() const noexcept { return gamma_; }
  std::size_t horizon() const noexcept { return horizon_; }

  /// Replaces T(s, a) and its rewards. Validates indices, probabilities and
  /// reward dimensions; an empty list is rejected.
  void set_transitions(std::size_t s, std::size_t a, std::vector<Successor> successors);

  const std::vector<Successor>& successors(std::size_t s, std::size_t a) const;

  /// Throws if some (s, a) has no transitions.
  void validate() const;

  friend bool operator==(const Momdp&, const Momdp&) = default;

 private:
  std::size_t num_states_;
  std::size_t num_actions_;
  std::size_t num_objectives_;
  double gamma_;
  std::size_t horizon_;
  std::vector<std::vector<Successor>> table_;  // s * num_actions + a
};

struct IntRange {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

struct GeneratorConfig {
  std::string name = "custom";
  std::size_t num_states = 5;
  std::size_t num_actions = 2;
  IntRange next_states{1, 2};
  std::size_t horizon = 3;
  std::size_t set_limit = 10;
  std::size_t num_objectives = 2;
  IntRange reward_values{0, 9};
  /// Each reward is a categorical over this many distinct integer vectors
  /// instead of a Dirac.
  std::optional<IntRange> categorical_reward_atoms;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Size presets: "small", "medium", "large".
GeneratorConfig preset_config(const std::string& name);

Momdp generate(const GeneratorConfig& config);

/// Copy of `momdp` whose states are (state, timestep) pairs reachable from
/// (0, 0); the new state 0 is (0, 0). States at the final timestep self-loop
/// with zero reward.
Momdp time_indexed(const Momdp& momdp);

struct StepResult {
  std::size_t next_state = 0;
  Vector reward;
  bool terminal = false;
};

/// Episodic view of a Momdp. Holds the current state, elapsed steps and its
/// own generator; single owner.
class Environment {
 public:
  Environment(const Momdp& momdp, Rng rng);

  void reset();
  StepResult step(std::size_t action);

  std::size_t state() const noexcept { return state_; }
  std::size_t elapsed() const noexcept { return elapsed_; }
  bool terminal() const noexcept { return elapsed_ >= momdp_->horizon(); }

  const Rng& rng() const noexcept { return rng_; }
  void set_rng(Rng rng) { rng_ = std::move(rng); }

 private:
  const Momdp* momdp_;
  Rng rng_;
  std::size_t state_ = 0;
  std::size_t elapsed_ = 0;
};

/// Empirical kernel estimate per (s, a).
struct TransitionEstimate {
  struct Entry {
    std::vector<std::size_t> next_states;
    std::vector<double> probs;
    std::uint64_t visits = 0;
  };
  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  std::vector<Entry> entries;  // s * num_actions + a
  std::size_t unvisited = 0;   // pairs that fell back to uniform

  const Entry& at(std::size_t s, std::size_t a) const;
};

/// Random walks with uniform actions from state 0, each `horizon` steps long.
/// Unvisited pairs fall back to the uniform kernel over all states and keep
/// a visit count of 0.
TransitionEstimate estimate_transitions(const Momdp& momdp, std::size_t num_walks,
                                        std::uint64_t seed);

/// The true kernel in estimate form (all visit counts 1).
TransitionEstimate exact_transitions(const Momdp& momdp);

}  // namespace distdom
