#include "distdom/dimoq.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "distdom/io.hpp"

namespace distdom {

// ---------------------------------------------------------------------------
// EmpiricalReward / QSetTable

void EmpiricalReward::observe(std::span<const double> reward) {
  if (reward.size() != dim_) throw std::invalid_argument("reward: dimension mismatch");
  ++counts_[Vector(reward.begin(), reward.end())];
  ++total_;
}

ReturnDistribution EmpiricalReward::distribution() const {
  if (total_ == 0) return ReturnDistribution::zero(dim_);
  std::vector<Atom> atoms;
  for (const auto& [v, n] : counts_) {
    atoms.push_back({v, static_cast<double>(n) / static_cast<double>(total_)});
  }
  return ReturnDistribution(dim_, std::move(atoms));
}

QSetTable::QSetTable(std::size_t num_states, std::size_t num_actions, std::size_t dim)
    : states_(num_states),
      actions_(num_actions),
      dim_(dim),
      q_(num_states * num_actions),
      nd_(num_states * num_actions * num_states),
      rewards_(num_states * num_actions * num_states, EmpiricalReward(dim)) {}

std::size_t QSetTable::pair(std::size_t s, std::size_t a) const {
  if (s >= states_ || a >= actions_) throw std::out_of_range("q-table: state-action out of range");
  return s * actions_ + a;
}

std::size_t QSetTable::triple(std::size_t s, std::size_t a, std::size_t next) const {
  if (next >= states_) throw std::out_of_range("q-table: next state out of range");
  return pair(s, a) * states_ + next;
}

std::vector<ReturnDistribution>& QSetTable::q(std::size_t s, std::size_t a) { return q_[pair(s, a)]; }
const std::vector<ReturnDistribution>& QSetTable::q(std::size_t s, std::size_t a) const {
  return q_[pair(s, a)];
}
std::vector<ReturnDistribution>& QSetTable::nd(std::size_t s, std::size_t a, std::size_t next) {
  return nd_[triple(s, a, next)];
}
const std::vector<ReturnDistribution>& QSetTable::nd(std::size_t s, std::size_t a,
                                                     std::size_t next) const {
  return nd_[triple(s, a, next)];
}
EmpiricalReward& QSetTable::reward(std::size_t s, std::size_t a, std::size_t next) {
  return rewards_[triple(s, a, next)];
}
const EmpiricalReward& QSetTable::reward(std::size_t s, std::size_t a, std::size_t next) const {
  return rewards_[triple(s, a, next)];
}

std::vector<ReturnDistribution> QSetTable::undominated_union(std::size_t s) const {
  std::vector<ReturnDistribution> all;
  for (std::size_t a = 0; a < actions_; ++a) {
    const auto& set = q(s, a);
    all.insert(all.end(), set.begin(), set.end());
  }
  return d_prune(all);
}

// ---------------------------------------------------------------------------
// Backup, scoring, action selection

std::vector<ReturnDistribution> q_backup(std::size_t s, std::size_t a, const QSetTable& table,
                                         const TransitionEstimate& kernel, double gamma,
                                         int precision) {
  const auto& entry = kernel.at(s, a);
  if (entry.next_states.empty()) {
    throw std::invalid_argument("q_backup: no kernel entry for (" + std::to_string(s) + ", " +
                                std::to_string(a) + ")");
  }
  std::vector<std::vector<ReturnDistribution>> candidates;
  std::vector<double> weights;
  for (std::size_t i = 0; i < entry.next_states.size(); ++i) {
    if (entry.probs[i] <= 0.0) continue;
    const std::size_t next = entry.next_states[i];
    const ReturnDistribution reward = table.reward(s, a, next).distribution();
    const auto& nd = table.nd(s, a, next);
    std::vector<ReturnDistribution> c;
    if (nd.empty()) {
      c.push_back(reward);
    } else {
      for (const auto& z : nd) c.push_back(convolve(reward, z, gamma));
    }
    candidates.push_back(std::move(c));
    weights.push_back(entry.probs[i]);
  }

  std::vector<ReturnDistribution> out;
  std::vector<std::size_t> idx(candidates.size(), 0);
  std::vector<ReturnDistribution> pick;
  pick.reserve(candidates.size());
  while (true) {
    pick.clear();
    for (std::size_t k = 0; k < candidates.size(); ++k) pick.push_back(candidates[k][idx[k]]);
    out.push_back(round_to_precision(mix(pick, weights), precision));
    std::size_t k = candidates.size();
    while (k-- > 0) {
      if (++idx[k] < candidates[k].size()) break;
      idx[k] = 0;
    }
    if (k == static_cast<std::size_t>(-1)) break;
  }
  return d_prune(out);
}

double score_set(std::span<const ReturnDistribution> qset, std::span<const double> weights) {
  if (qset.empty()) return -std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (const auto& z : qset) {
    const Vector mean = expected_value(z);
    if (mean.size() != weights.size()) throw std::invalid_argument("score_set: weight dimension mismatch");
    total += std::inner_product(mean.begin(), mean.end(), weights.begin(), 0.0);
  }
  return total / static_cast<double>(qset.size());
}

std::size_t select_action(std::size_t state, const QSetTable& table, double epsilon,
                          std::span<const double> weights, Rng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("select_action: epsilon outside [0, 1]");
  const std::size_t actions = table.num_actions();
  if (uniform01(rng) < epsilon) return static_cast<std::size_t>(uniform_index(rng, actions));
  std::size_t best = 0;
  double best_score = score_set(table.q(state, 0), weights);
  for (std::size_t a = 1; a < actions; ++a) {
    const double score = score_set(table.q(state, a), weights);
    if (score > best_score) {
      best = a;
      best_score = score;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Set-size limiting

std::vector<std::size_t> average_linkage_clusters(std::span<const ReturnDistribution> qset,
                                                  std::size_t clusters) {
  if (clusters == 0) throw std::invalid_argument("clustering: need at least one cluster");
  const std::size_t n = qset.size();
  std::vector<std::size_t> label(n);
  std::iota(label.begin(), label.end(), 0);
  if (n <= clusters) return label;

  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      dist[i * n + j] = dist[j * n + i] = js_distance(qset[i], qset[j]);
    }
  }
  std::vector<std::size_t> size(n, 1);
  std::vector<bool> active(n, true);
  for (std::size_t remaining = n; remaining > clusters; --remaining) {
    std::size_t bi = n;
    std::size_t bj = n;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (active[j] && dist[i * n + j] < best) {
          best = dist[i * n + j];
          bi = i;
          bj = j;
        }
      }
    }
    // Lance-Williams update for average linkage
    for (std::size_t m = 0; m < n; ++m) {
      if (!active[m] || m == bi || m == bj) continue;
      const double merged = (static_cast<double>(size[bi]) * dist[bi * n + m] +
                             static_cast<double>(size[bj]) * dist[bj * n + m]) /
                            static_cast<double>(size[bi] + size[bj]);
      dist[bi * n + m] = dist[m * n + bi] = merged;
    }
    size[bi] += size[bj];
    active[bj] = false;
    for (auto& l : label) {
      if (l == bj) l = bi;
    }
  }
  // Relabel densely in order of first member.
  std::vector<std::size_t> dense(n, n);
  std::size_t next = 0;
  for (auto& l : label) {
    if (dense[l] == n) dense[l] = next++;
    l = dense[l];
  }
  return label;
}

std::vector<ReturnDistribution> limit_set_size(std::span<const ReturnDistribution> qset,
                                               std::size_t max_size, Representative rep,
                                               int precision) {
  if (max_size == 0) throw std::invalid_argument("limit_set_size: max size must be >= 1");
  if (qset.size() <= max_size) return {qset.begin(), qset.end()};
  const auto label = average_linkage_clusters(qset, max_size);
  std::vector<std::vector<std::size_t>> members(max_size);
  for (std::size_t i = 0; i < label.size(); ++i) members[label[i]].push_back(i);

  std::vector<ReturnDistribution> reps;
  for (const auto& group : members) {
    if (rep == Representative::mixture) {
      std::vector<ReturnDistribution> parts;
      for (std::size_t i : group) parts.push_back(qset[i]);
      const std::vector<double> w(group.size(), 1.0 / static_cast<double>(group.size()));
      reps.push_back(round_to_precision(mix(parts, w), precision));
    } else {
      std::size_t best = group.front();
      double best_sum = std::numeric_limits<double>::infinity();
      for (std::size_t i : group) {
        double sum = 0.0;
        for (std::size_t j : group) sum += js_distance(qset[i], qset[j]);
        if (sum < best_sum) {
          best_sum = sum;
          best = i;
        }
      }
      reps.push_back(qset[best]);
    }
  }
  return d_prune(reps);
}

// ---------------------------------------------------------------------------
// Learner

double EpsilonSchedule::at(std::size_t episode, std::size_t episodes) const {
  const double horizon = decay_fraction * static_cast<double>(episodes);
  if (horizon <= 0.0) return end;
  const double frac = std::min(1.0, static_cast<double>(episode) / horizon);
  return start + (end - start) * frac;
}

void LearnerConfig::validate(std::size_t dim) const {
  if (episodes == 0) throw std::invalid_argument("learner: episodes must be >= 1");
  if (random_walks == 0) throw std::invalid_argument("learner: random walks must be >= 1");
  if (set_limit == 0) throw std::invalid_argument("learner: set limit must be >= 1");
  if (precision < 0) throw std::invalid_argument("learner: precision must be >= 0");
  auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!in_unit(epsilon.start) || !in_unit(epsilon.end) || !in_unit(epsilon.decay_fraction)) {
    throw std::invalid_argument("learner: epsilon schedule values must lie in [0, 1]");
  }
  if (!weights.empty()) {
    if (weights.size() != dim) {
      throw std::invalid_argument("learner: " + std::to_string(weights.size()) +
                                  " scoring weights for " + std::to_string(dim) + " objectives");
    }
    double total = 0.0;
    for (double w : weights) {
      if (w < 0.0) throw std::invalid_argument("learner: negative scoring weight");
      total += w;
    }
    if (std::abs(total - 1.0) > kMassTolerance) {
      throw std::invalid_argument("learner: scoring weights must sum to one");
    }
  }
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void check_kernel(const Momdp& momdp, const TransitionEstimate& kernel) {
  if (kernel.num_states != momdp.num_states() || kernel.num_actions != momdp.num_actions() ||
      kernel.entries.size() != momdp.num_states() * momdp.num_actions()) {
    throw std::invalid_argument("learner: kernel does not match the MOMDP");
  }
}

}  // namespace

Learner::Learner(const Momdp& momdp, LearnerConfig config, std::optional<TransitionEstimate> kernel)
    : momdp_(&momdp),
      config_(std::move(config)),
      table_(momdp.num_states(), momdp.num_actions(), momdp.num_objectives()),
      env_(momdp, make_rng(config_.seed, 11)),
      action_rng_(make_rng(config_.seed, 12)) {
  config_.validate(momdp.num_objectives());
  const std::size_t d = momdp.num_objectives();
  weights_ = config_.weights.empty() ? Vector(d, 1.0 / static_cast<double>(d)) : config_.weights;
  const auto t0 = std::chrono::steady_clock::now();
  if (kernel) {
    kernel_ = std::move(*kernel);
  } else {
    kernel_ = estimate_transitions(momdp, config_.random_walks, mix_seed(config_.seed, 10));
  }
  check_kernel(momdp, kernel_);
  stats_.estimation_seconds = seconds_since(t0);
  stats_.unvisited_pairs = kernel_.unvisited;
}

Learner::Learner(const Momdp& momdp, LearnerConfig config, TransitionEstimate kernel, Restore)
    : momdp_(&momdp),
      config_(std::move(config)),
      kernel_(std::move(kernel)),
      table_(momdp.num_states(), momdp.num_actions(), momdp.num_objectives()),
      env_(momdp, Rng()),
      action_rng_() {
  config_.validate(momdp.num_objectives());
  const std::size_t d = momdp.num_objectives();
  weights_ = config_.weights.empty() ? Vector(d, 1.0 / static_cast<double>(d)) : config_.weights;
  check_kernel(momdp, kernel_);
}

void Learner::run_episode() {
  const double eps = config_.epsilon.at(episode_, config_.episodes);
  env_.reset();
  while (!env_.terminal()) {
    const std::size_t s = env_.state();
    const std::size_t a = select_action(s, table_, eps, weights_, action_rng_);
    const StepResult step = env_.step(a);
    // Nothing follows the horizon, so a terminal transition does not bootstrap.
    if (step.terminal) {
      table_.nd(s, a, step.next_state).clear();
    } else {
      table_.nd(s, a, step.next_state) = table_.undominated_union(step.next_state);
    }
    table_.reward(s, a, step.next_state).observe(step.reward);
    auto backup = q_backup(s, a, table_, kernel_, momdp_->gamma(), config_.precision);
    table_.q(s, a) = limit_set_size(backup, config_.set_limit, config_.representative,
                                    config_.precision);
  }
  ++episode_;
}

void Learner::run(std::size_t max_episodes) {
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < max_episodes && !done(); ++i) run_episode();
  stats_.training_seconds += seconds_since(t0);
  stats_.episodes_run = episode_;
}

SolutionSet Learner::result() const {
  std::vector<ReturnDistribution> all;
  for (std::size_t a = 0; a < momdp_->num_actions(); ++a) {
    const auto& q = table_.q(0, a);
    all.insert(all.end(), q.begin(), q.end());
  }
  return SolutionSet::from_distributions(d_prune(all), config_.precision);
}

namespace {

Json dist_list(const std::vector<ReturnDistribution>& list) {
  Json out = Json::array();
  for (const auto& d : list) out.push_back(to_json(d));
  return out;
}

std::vector<ReturnDistribution> dist_list_from(const Json& j) {
  std::vector<ReturnDistribution> out;
  for (const auto& d : j) out.push_back(distribution_from_json(d));
  return out;
}

}  // namespace

std::string Learner::checkpoint() const {
  const std::size_t S = momdp_->num_states();
  const std::size_t A = momdp_->num_actions();
  Json q = Json::array();
  Json nd = Json::array();
  Json rewards = Json::array();
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      if (!table_.q(s, a).empty()) q.push_back(Json{{"s", s}, {"a", a}, {"set", dist_list(table_.q(s, a))}});
      for (std::size_t n = 0; n < S; ++n) {
        if (!table_.nd(s, a, n).empty()) {
          nd.push_back(Json{{"s", s}, {"a", a}, {"next", n}, {"set", dist_list(table_.nd(s, a, n))}});
        }
        const auto& r = table_.reward(s, a, n);
        if (r.total() == 0) continue;
        Json counts = Json::array();
        for (const auto& [v, c] : r.counts()) counts.push_back(Json{{"v", v}, {"n", c}});
        rewards.push_back(Json{{"s", s}, {"a", a}, {"next", n}, {"counts", std::move(counts)}});
      }
    }
  }
  Json j{{"config", to_json(config_)},
         {"episode", episode_},
         {"env_rng", save_rng(env_.rng())},
         {"action_rng", save_rng(action_rng_)},
         {"estimation_seconds", stats_.estimation_seconds},
         {"training_seconds", stats_.training_seconds},
         {"kernel", to_json(kernel_)},
         {"q", std::move(q)},
         {"nd", std::move(nd)},
         {"rewards", std::move(rewards)}};
  return dump(j);
}

Learner Learner::from_checkpoint(const Momdp& momdp, const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("checkpoint: ") + e.what());
  }
  try {
    Learner l(momdp, learner_config_from_json(j.at("config")),
              transition_estimate_from_json(j.at("kernel")), Restore{});
    l.episode_ = j.at("episode").get<std::size_t>();
    l.env_.set_rng(load_rng(j.at("env_rng").get<std::string>()));
    l.action_rng_ = load_rng(j.at("action_rng").get<std::string>());
    l.stats_.estimation_seconds = j.at("estimation_seconds").get<double>();
    l.stats_.training_seconds = j.at("training_seconds").get<double>();
    l.stats_.unvisited_pairs = l.kernel_.unvisited;
    l.stats_.episodes_run = l.episode_;
    for (const auto& e : j.at("q")) {
      l.table_.q(e.at("s").get<std::size_t>(), e.at("a").get<std::size_t>()) = dist_list_from(e.at("set"));
    }
    for (const auto& e : j.at("nd")) {
      l.table_.nd(e.at("s").get<std::size_t>(), e.at("a").get<std::size_t>(),
                  e.at("next").get<std::size_t>()) = dist_list_from(e.at("set"));
    }
    for (const auto& e : j.at("rewards")) {
      auto& r = l.table_.reward(e.at("s").get<std::size_t>(), e.at("a").get<std::size_t>(),
                                e.at("next").get<std::size_t>());
      for (const auto& c : e.at("counts")) {
        const auto v = c.at("v").get<Vector>();
        for (auto n = c.at("n").get<std::uint64_t>(); n > 0; --n) r.observe(v);
      }
    }
    return l;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("checkpoint: ") + e.what());
  }
}

SolutionSet train(const Momdp& momdp, const LearnerConfig& config,
                  std::optional<TransitionEstimate> kernel, TrainStats* stats) {
  Learner learner(momdp, config, std::move(kernel));
  learner.run();
  if (stats) *stats = learner.stats();
  return learner.result();
}

}  // namespace distdom
