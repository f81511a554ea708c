#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "distdom/distribution.hpp"
#include "distdom/momdp.hpp"
#include "distdom/pruning.hpp"
#include "distdom/rng.hpp"

namespace distdom {

inline constexpr std::size_t kUnlimitedSetSize = std::numeric_limits<std::size_t>::max();

/// Observed immediate rewards for one (s, a, s'). Before any observation the
/// distribution is a Dirac at the zero vector.
class EmpiricalReward {
 public:
  explicit EmpiricalReward(std::size_t dim) : dim_(dim) {}

  void observe(std::span<const double> reward);
  ReturnDistribution distribution() const;

  std::size_t dim() const noexcept { return dim_; }
  std::uint64_t total() const noexcept { return total_; }
  const std::map<Vector, std::uint64_t>& counts() const noexcept { return counts_; }

 private:
  std::size_t dim_;
  std::uint64_t total_ = 0;
  std::map<Vector, std::uint64_t> counts_;
};

/// Q-sets per (s, a) plus the ND(s, a, s') cache and reward model per
/// (s, a, s'). Dense over all index triples.
class QSetTable {
 public:
  QSetTable(std::size_t num_states, std::size_t num_actions, std::size_t dim);

  std::size_t num_states() const noexcept { return states_; }
  std::size_t num_actions() const noexcept { return actions_; }
  std::size_t dim() const noexcept { return dim_; }

  std::vector<ReturnDistribution>& q(std::size_t s, std::size_t a);
  const std::vector<ReturnDistribution>& q(std::size_t s, std::size_t a) const;
  std::vector<ReturnDistribution>& nd(std::size_t s, std::size_t a, std::size_t next);
  const std::vector<ReturnDistribution>& nd(std::size_t s, std::size_t a, std::size_t next) const;
  EmpiricalReward& reward(std::size_t s, std::size_t a, std::size_t next);
  const EmpiricalReward& reward(std::size_t s, std::size_t a, std::size_t next) const;

  /// DPrune of the union of Q(s, a') over all actions.
  std::vector<ReturnDistribution> undominated_union(std::size_t s) const;

 private:
  std::size_t pair(std::size_t s, std::size_t a) const;
  std::size_t triple(std::size_t s, std::size_t a, std::size_t next) const;

  std::size_t states_;
  std::size_t actions_;
  std::size_t dim_;
  std::vector<std::vector<ReturnDistribution>> q_;
  std::vector<std::vector<ReturnDistribution>> nd_;
  std::vector<EmpiricalReward> rewards_;
};

enum class Representative { mixture, medoid };

struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.05;
  double decay_fraction = 0.8;

  /// Linear decay from start to end over the first decay_fraction of
  /// `episodes`, flat afterwards.
  double at(std::size_t episode, std::size_t episodes) const;
};

struct LearnerConfig {
  std::size_t episodes = 2000;
  std::size_t random_walks = 50000;
  std::size_t set_limit = 10;
  int precision = kDefaultPrecision;
  EpsilonSchedule epsilon;
  Vector weights;  // empty: uniform 1/d
  Representative representative = Representative::mixture;
  std::uint64_t seed = 1;

  void validate(std::size_t dim) const;
};

/// Set backup: one mixture per element of the Cartesian product of
/// the per-successor candidate sets R(s,a,s') + gamma * ND(s,a,s'), weighted
/// by the kernel. Rounded to `precision`, then DPruned.
std::vector<ReturnDistribution> q_backup(std::size_t s, std::size_t a, const QSetTable& table,
                                         const TransitionEstimate& kernel, double gamma,
                                         int precision = kDefaultPrecision);

/// Mean of weights . E[Z] over the set; -infinity for an empty set.
double score_set(std::span<const ReturnDistribution> qset, std::span<const double> weights);

std::size_t select_action(std::size_t state, const QSetTable& table, double epsilon,
                          std::span<const double> weights, Rng& rng);

/// Average-linkage agglomerative clustering on the pairwise JS distances.
/// Merges the closest pair until `max_size` clusters remain (ties by lowest
/// cluster indices), replaces each cluster by its representative and DPrunes.
std::vector<ReturnDistribution> limit_set_size(std::span<const ReturnDistribution> qset,
                                               std::size_t max_size,
                                               Representative rep = Representative::mixture,
                                               int precision = kDefaultPrecision);

/// Cluster labels (0..clusters-1, in order of first member) from the same
/// clustering limit_set_size performs.
std::vector<std::size_t> average_linkage_clusters(std::span<const ReturnDistribution> qset,
                                                  std::size_t clusters);

struct TrainStats {
  double estimation_seconds = 0.0;
  double training_seconds = 0.0;
  std::size_t unvisited_pairs = 0;
  std::size_t episodes_run = 0;
};

/// Resumable DIMOQ run. The generator streams for the environment and the
/// action selection are derived from the config seed.
class Learner {
 public:
  /// Estimates the kernel from random walks unless `kernel` is supplied.
  Learner(const Momdp& momdp, LearnerConfig config,
          std::optional<TransitionEstimate> kernel = std::nullopt);

  /// Runs up to `max_episodes` more episodes (all remaining by default).
  void run(std::size_t max_episodes = std::numeric_limits<std::size_t>::max());
  bool done() const noexcept { return episode_ >= config_.episodes; }

  /// DPrune of the union of Q(0, a).
  SolutionSet result() const;

  const QSetTable& table() const noexcept { return table_; }
  const TransitionEstimate& kernel() const noexcept { return kernel_; }
  const LearnerConfig& config() const noexcept { return config_; }
  const TrainStats& stats() const noexcept { return stats_; }
  std::size_t episode() const noexcept { return episode_; }

  /// Everything needed to continue the run bit-exactly, as JSON text.
  std::string checkpoint() const;
  static Learner from_checkpoint(const Momdp& momdp, const std::string& json);

 private:
  struct Restore {};
  Learner(const Momdp& momdp, LearnerConfig config, TransitionEstimate kernel, Restore);

  void run_episode();

  const Momdp* momdp_;
  LearnerConfig config_;
  Vector weights_;
  TransitionEstimate kernel_;
  QSetTable table_;
  Environment env_;
  Rng action_rng_;
  std::size_t episode_ = 0;
  TrainStats stats_;
};

/// Convenience: Learner(...).run(); result().
SolutionSet train(const Momdp& momdp, const LearnerConfig& config,
                  std::optional<TransitionEstimate> kernel = std::nullopt,
                  TrainStats* stats = nullptr);

}  // namespace distdom
