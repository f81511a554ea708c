#include "distdom/momdp.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <numeric>
#include <stdexcept>

namespace distdom {

Momdp::Momdp(std::size_t num_states, std::size_t num_actions, std::size_t num_objectives,
             double gamma, std::size_t horizon)
    : num_states_(num_states),
      num_actions_(num_actions),
      num_objectives_(num_objectives),
      gamma_(gamma),
      horizon_(horizon),
      table_(num_states * num_actions) {
  if (num_states == 0 || num_actions == 0 || num_objectives == 0) {
    throw std::invalid_argument("momdp: states, actions and objectives must be positive");
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("momdp: discount must lie in [0, 1]");
  }
  if (horizon == 0) throw std::invalid_argument("momdp: horizon must be positive");
}

void Momdp::set_transitions(std::size_t s, std::size_t a, std::vector<Successor> successors) {
  if (s >= num_states_ || a >= num_actions_) {
    throw std::out_of_range("momdp: state-action (" + std::to_string(s) + ", " +
                            std::to_string(a) + ") out of range");
  }
  if (successors.empty()) throw std::invalid_argument("momdp: empty successor list");
  double total = 0.0;
  std::vector<bool> seen(num_states_, false);
  for (const auto& succ : successors) {
    if (succ.state >= num_states_) {
      throw std::out_of_range("momdp: next state " + std::to_string(succ.state) +
                              " out of range");
    }
    if (seen[succ.state]) throw std::invalid_argument("momdp: duplicate successor state");
    seen[succ.state] = true;
    if (!(succ.prob > 0.0 && succ.prob <= 1.0)) {
      throw std::invalid_argument("momdp: transition probabilities must lie in (0, 1]");
    }
    if (succ.reward.dim() != num_objectives_) {
      throw std::invalid_argument("momdp: reward dimension mismatch");
    }
    total += succ.prob;
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    throw std::invalid_argument("momdp: transition probabilities sum to " +
                                std::to_string(total));
  }
  table_[s * num_actions_ + a] = std::move(successors);
}

const std::vector<Successor>& Momdp::successors(std::size_t s, std::size_t a) const {
  if (s >= num_states_ || a >= num_actions_) {
    throw std::out_of_range("momdp: state-action out of range");
  }
  return table_[s * num_actions_ + a];
}

void Momdp::validate() const {
  for (std::size_t i = 0; i < table_.size(); ++i) {
    if (table_[i].empty()) {
      throw std::invalid_argument("momdp: no transitions for state " +
                                  std::to_string(i / num_actions_) + ", action " +
                                  std::to_string(i % num_actions_));
    }
  }
}

// ---------------------------------------------------------------------------

void GeneratorConfig::validate() const {
  if (num_states == 0 || num_actions == 0 || num_objectives == 0 || horizon == 0 ||
      set_limit == 0) {
    throw std::invalid_argument("generator: all counts must be positive");
  }
  if (next_states.lo < 1 || next_states.lo > next_states.hi) {
    throw std::invalid_argument("generator: invalid next-state count range");
  }
  if (static_cast<std::size_t>(next_states.hi) > num_states) {
    throw std::invalid_argument("generator: next-state count upper bound " +
                                std::to_string(next_states.hi) + " exceeds " +
                                std::to_string(num_states) + " states");
  }
  if (reward_values.lo > reward_values.hi) {
    throw std::invalid_argument("generator: invalid reward value range");
  }
  if (categorical_reward_atoms) {
    const auto& r = *categorical_reward_atoms;
    if (r.lo < 1 || r.lo > r.hi) {
      throw std::invalid_argument("generator: invalid categorical atom count range");
    }
    const double support = std::pow(static_cast<double>(reward_values.hi - reward_values.lo + 1),
                                    static_cast<double>(num_objectives));
    if (static_cast<double>(r.hi) > support) {
      throw std::invalid_argument("generator: more reward atoms than distinct reward vectors");
    }
  }
}

GeneratorConfig preset_config(const std::string& name) {
  GeneratorConfig c;
  c.name = name;
  if (name == "small") {
    c.num_states = 5, c.num_actions = 2, c.horizon = 3, c.set_limit = 10;
  } else if (name == "medium") {
    c.num_states = 10, c.num_actions = 3, c.horizon = 5, c.set_limit = 15;
  } else if (name == "large") {
    c.num_states = 15, c.num_actions = 4, c.horizon = 7, c.set_limit = 20;
  } else {
    throw std::invalid_argument("unknown preset '" + name + "' (small|medium|large)");
  }
  c.next_states = {1, 2};
  return c;
}

namespace {

Vector random_reward_vector(Rng& rng, const GeneratorConfig& c) {
  Vector v(c.num_objectives);
  for (double& x : v) {
    x = static_cast<double>(uniform_int(rng, c.reward_values.lo, c.reward_values.hi));
  }
  return v;
}

ReturnDistribution random_reward(Rng& rng, const GeneratorConfig& c) {
  if (!c.categorical_reward_atoms) return ReturnDistribution::dirac(random_reward_vector(rng, c));
  const auto count = static_cast<std::size_t>(
      uniform_int(rng, c.categorical_reward_atoms->lo, c.categorical_reward_atoms->hi));
  std::vector<Vector> values;
  while (values.size() < count) {
    Vector v = random_reward_vector(rng, c);
    if (std::find(values.begin(), values.end(), v) == values.end()) values.push_back(std::move(v));
  }
  std::vector<double> w(count);
  for (double& x : w) x = uniform01_open_low(rng);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < count; ++i) atoms.push_back({std::move(values[i]), w[i] / total});
  return ReturnDistribution(c.num_objectives, std::move(atoms));
}

}  // namespace

Momdp generate(const GeneratorConfig& config) {
  config.validate();
  Momdp momdp(config.num_states, config.num_actions, config.num_objectives, 1.0,
              config.horizon);
  Rng rng = make_rng(config.seed);
  std::vector<std::size_t> pool(config.num_states);
  for (std::size_t s = 0; s < config.num_states; ++s) {
    for (std::size_t a = 0; a < config.num_actions; ++a) {
      const auto k = static_cast<std::size_t>(
          uniform_int(rng, config.next_states.lo, config.next_states.hi));
      std::iota(pool.begin(), pool.end(), 0);
      for (std::size_t i = 0; i < k; ++i) {  // partial Fisher-Yates
        const std::size_t j = i + uniform_index(rng, pool.size() - i);
        std::swap(pool[i], pool[j]);
      }
      std::vector<std::size_t> next(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
      std::sort(next.begin(), next.end());
      std::vector<double> w(k);
      for (double& x : w) x = uniform01_open_low(rng);
      const double total = std::accumulate(w.begin(), w.end(), 0.0);
      std::vector<Successor> succ;
      for (std::size_t i = 0; i < k; ++i) {
        succ.push_back({next[i], w[i] / total, random_reward(rng, config)});
      }
      momdp.set_transitions(s, a, std::move(succ));
    }
  }
  return momdp;
}

Momdp time_indexed(const Momdp& momdp) {
  momdp.validate();
  const std::size_t horizon = momdp.horizon();
  // index[t][s] of the augmented state, assigned level by level
  std::vector<std::vector<std::size_t>> index(horizon + 1,
                                              std::vector<std::size_t>(momdp.num_states(), 0));
  std::vector<std::vector<bool>> reached(horizon + 1,
                                         std::vector<bool>(momdp.num_states(), false));
  reached[0][0] = true;
  std::size_t count = 0;
  for (std::size_t t = 0; t <= horizon; ++t) {
    for (std::size_t s = 0; s < momdp.num_states(); ++s) {
      if (!reached[t][s]) continue;
      index[t][s] = count++;
      if (t == horizon) continue;
      for (std::size_t a = 0; a < momdp.num_actions(); ++a) {
        for (const auto& succ : momdp.successors(s, a)) reached[t + 1][succ.state] = true;
      }
    }
  }
  Momdp out(count, momdp.num_actions(), momdp.num_objectives(), momdp.gamma(), horizon);
  for (std::size_t t = 0; t <= horizon; ++t) {
    for (std::size_t s = 0; s < momdp.num_states(); ++s) {
      if (!reached[t][s]) continue;
      for (std::size_t a = 0; a < momdp.num_actions(); ++a) {
        std::vector<Successor> succ;
        if (t == horizon) {
          succ.push_back({index[t][s], 1.0, ReturnDistribution::zero(momdp.num_objectives())});
        } else {
          for (const auto& x : momdp.successors(s, a)) {
            succ.push_back({index[t + 1][x.state], x.prob, x.reward});
          }
        }
        out.set_transitions(index[t][s], a, std::move(succ));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

Environment::Environment(const Momdp& momdp, Rng rng) : momdp_(&momdp), rng_(std::move(rng)) {
  momdp.validate();
}

void Environment::reset() {
  state_ = 0;
  elapsed_ = 0;
}

namespace {

template <typename Probs>
std::size_t sample_index(Rng& rng, const Probs& probs, std::size_t n) {
  const double u = uniform01(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    acc += probs(i);
    if (u < acc) return i;
  }
  return n - 1;
}

}  // namespace

StepResult Environment::step(std::size_t action) {
  if (terminal()) throw std::logic_error("environment: episode already terminated");
  if (action >= momdp_->num_actions()) throw std::out_of_range("environment: invalid action");
  const auto& succ = momdp_->successors(state_, action);
  const std::size_t pick =
      sample_index(rng_, [&](std::size_t i) { return succ[i].prob; }, succ.size());
  const ReturnDistribution& reward = succ[pick].reward;
  const std::size_t atom =
      sample_index(rng_, [&](std::size_t i) { return reward.prob(i); }, reward.size());
  auto v = reward.value(atom);
  StepResult out{succ[pick].state, Vector(v.begin(), v.end()), false};
  state_ = out.next_state;
  ++elapsed_;
  out.terminal = terminal();
  return out;
}

// ---------------------------------------------------------------------------

const TransitionEstimate::Entry& TransitionEstimate::at(std::size_t s, std::size_t a) const {
  if (s >= num_states || a >= num_actions) {
    throw std::out_of_range("transition estimate: state-action out of range");
  }
  return entries[s * num_actions + a];
}

TransitionEstimate estimate_transitions(const Momdp& momdp, std::size_t num_walks,
                                        std::uint64_t seed) {
  if (num_walks == 0) throw std::invalid_argument("estimate_transitions: need at least one walk");
  const std::size_t S = momdp.num_states();
  const std::size_t A = momdp.num_actions();
  std::vector<std::map<std::size_t, std::uint64_t>> counts(S * A);
  Environment env(momdp, make_rng(seed, 1));
  Rng policy = make_rng(seed, 2);
  for (std::size_t w = 0; w < num_walks; ++w) {
    env.reset();
    while (!env.terminal()) {
      const std::size_t s = env.state();
      const auto a = static_cast<std::size_t>(uniform_index(policy, A));
      const StepResult r = env.step(a);
      ++counts[s * A + a][r.next_state];
    }
  }
  TransitionEstimate est;
  est.num_states = S;
  est.num_actions = A;
  est.entries.resize(S * A);
  for (std::size_t i = 0; i < S * A; ++i) {
    auto& e = est.entries[i];
    for (const auto& [next, n] : counts[i]) e.visits += n;
    if (e.visits == 0) {
      ++est.unvisited;
      e.next_states.resize(S);
      std::iota(e.next_states.begin(), e.next_states.end(), 0);
      e.probs.assign(S, 1.0 / static_cast<double>(S));
      continue;
    }
    for (const auto& [next, n] : counts[i]) {
      e.next_states.push_back(next);
      e.probs.push_back(static_cast<double>(n) / static_cast<double>(e.visits));
    }
  }
  return est;
}

TransitionEstimate exact_transitions(const Momdp& momdp) {
  momdp.validate();
  TransitionEstimate est;
  est.num_states = momdp.num_states();
  est.num_actions = momdp.num_actions();
  est.entries.resize(est.num_states * est.num_actions);
  for (std::size_t s = 0; s < est.num_states; ++s) {
    for (std::size_t a = 0; a < est.num_actions; ++a) {
      auto& e = est.entries[s * est.num_actions + a];
      e.visits = 1;
      for (const auto& succ : momdp.successors(s, a)) {
        e.next_states.push_back(succ.state);
        e.probs.push_back(succ.prob);
      }
    }
  }
  return est;
}

}  // namespace distdom
