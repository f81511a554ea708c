#include <gtest/gtest.h>

#include <cmath>

#include "distdom/dimoq.hpp"
#include "distdom/dominance.hpp"
#include "distdom/harness.hpp"
#include "distdom/io.hpp"
#include "support/oracles.hpp"

using namespace distdom;

namespace {

ReturnDistribution dist(std::vector<Atom> atoms) {
  const std::size_t dim = atoms.front().value.size();
  return ReturnDistribution(dim, std::move(atoms));
}

TransitionEstimate kernel_of(std::size_t states, std::size_t actions,
                             std::vector<std::pair<std::vector<std::size_t>, std::vector<double>>> rows) {
  TransitionEstimate k;
  k.num_states = states;
  k.num_actions = actions;
  for (auto& [next, p] : rows) k.entries.push_back({next, p, 1});
  return k;
}

// Root with two actions to leaves 1 and 2; each leaf has two self-looping
// actions with distinct rewards. Horizon 2 gives 2 * 2 * 2 = 8 policies.
Momdp three_state_tree() {
  Momdp m(3, 2, 2, 1.0, 2);
  m.set_transitions(0, 0, {{1, 1.0, ReturnDistribution::dirac({1, 0})}});
  m.set_transitions(0, 1, {{2, 1.0, ReturnDistribution::dirac({0, 1})}});
  m.set_transitions(1, 0, {{1, 1.0, ReturnDistribution::dirac({3, 0})}});
  m.set_transitions(1, 1, {{1, 1.0, ReturnDistribution::dirac({0, 2})}});
  m.set_transitions(2, 0, {{2, 1.0, ReturnDistribution::dirac({2, 1})}});
  m.set_transitions(2, 1, {{2, 1.0, ReturnDistribution::dirac({1, 1})}});
  m.validate();
  return m;
}

Momdp one_state(std::vector<Vector> rewards) {
  Momdp m(1, rewards.size(), rewards.front().size(), 1.0, 1);
  for (std::size_t a = 0; a < rewards.size(); ++a) {
    m.set_transitions(0, a, {{0, 1.0, ReturnDistribution::dirac(rewards[a])}});
  }
  return m;
}

void expect_table_invariants(const QSetTable& t, std::size_t limit, int precision) {
  for (std::size_t s = 0; s < t.num_states(); ++s) {
    for (std::size_t a = 0; a < t.num_actions(); ++a) {
      const auto& q = t.q(s, a);
      EXPECT_LE(q.size(), limit);
      for (std::size_t i = 0; i < q.size(); ++i) {
        EXPECT_EQ(round_to_precision(q[i], precision), q[i]);
        for (std::size_t j = 0; j < q.size(); ++j) {
          if (i != j) {
            EXPECT_FALSE(distributionally_dominates(q[i], q[j]));
          }
        }
      }
    }
  }
}

}  // namespace

TEST(EmpiricalRewardModel, StartsAsZeroDirac) {
  EmpiricalReward r(2);
  EXPECT_EQ(r.distribution(), ReturnDistribution::zero(2));
  r.observe(Vector{1, 2});
  r.observe(Vector{1, 2});
  r.observe(Vector{3, 0});
  EXPECT_EQ(r.total(), 3u);
  EXPECT_EQ(r.distribution(), dist({{{1, 2}, 2.0 / 3}, {{3, 0}, 1.0 / 3}}));
  EXPECT_THROW(r.observe(Vector{1}), std::invalid_argument);
}

TEST(QBackup, SingleDeterministicSuccessor) {
  QSetTable t(2, 1, 2);
  t.nd(0, 0, 1) = {ReturnDistribution::dirac({1, 0})};
  t.reward(0, 0, 1).observe(Vector{1, 1});
  const auto k = kernel_of(2, 1, {{{1}, {1.0}}, {{1}, {1.0}}});
  EXPECT_EQ(q_backup(0, 0, t, k, 1.0), (std::vector<ReturnDistribution>{ReturnDistribution::dirac({2, 1})}));
}

TEST(QBackup, TwoSuccessorsMixByKernel) {
  QSetTable t(3, 1, 2);
  t.nd(0, 0, 1) = {ReturnDistribution::dirac({2, 0})};
  t.nd(0, 0, 2) = {ReturnDistribution::dirac({0, 2})};
  const auto k = kernel_of(3, 1, {{{1, 2}, {0.5, 0.5}}, {{1}, {1.0}}, {{2}, {1.0}}});
  EXPECT_EQ(q_backup(0, 0, t, k, 1.0), (std::vector<ReturnDistribution>{dist({{{2, 0}, 0.5}, {{0, 2}, 0.5}})}));
}

TEST(QBackup, CartesianProductCardinality) {
  QSetTable t(3, 1, 2);
  // Incomparable, equal-mean candidates so no mixture is pruned.
  t.nd(0, 0, 1) = {ReturnDistribution::dirac({4, 0}), ReturnDistribution::dirac({0, 4})};
  t.nd(0, 0, 2) = {ReturnDistribution::dirac({10, 0}), ReturnDistribution::dirac({5, 5}), ReturnDistribution::dirac({0, 10})};
  const auto k = kernel_of(3, 1, {{{1, 2}, {0.5, 0.5}}, {{1}, {1.0}}, {{2}, {1.0}}});
  EXPECT_EQ(q_backup(0, 0, t, k, 1.0).size(), 6u);
}

TEST(QBackup, EmptyNdUsesImmediateReward) {
  QSetTable t(2, 1, 2);
  t.reward(0, 0, 1).observe(Vector{3, 4});
  const auto k = kernel_of(2, 1, {{{1}, {1.0}}, {{1}, {1.0}}});
  EXPECT_EQ(q_backup(0, 0, t, k, 0.9), (std::vector<ReturnDistribution>{ReturnDistribution::dirac({3, 4})}));
}

TEST(QBackup, MissingKernelEntryThrows) {
  QSetTable t(2, 1, 2);
  const auto k = kernel_of(2, 1, {{{}, {}}, {{1}, {1.0}}});
  EXPECT_THROW(q_backup(0, 0, t, k, 1.0), std::invalid_argument);
}

TEST(ScoreSet, Examples) {
  const std::vector<ReturnDistribution> two{ReturnDistribution::dirac({2, 0}), ReturnDistribution::dirac({0, 2})};
  EXPECT_DOUBLE_EQ(score_set(two, Vector{0.5, 0.5}), 1.0);
  const std::vector<ReturnDistribution> one{ReturnDistribution::dirac({3, 1})};
  EXPECT_DOUBLE_EQ(score_set(one, Vector{1, 0}), 3.0);
  EXPECT_EQ(score_set({}, Vector{0.5, 0.5}), -INFINITY);
}

TEST(ScoreSet, ShiftIncreasesScoreByShift) {
  oracle::Gen g(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto qs = oracle::random_set(g, 2, 4, 3);
    std::vector<ReturnDistribution> shifted;
    for (const auto& d : qs) shifted.push_back(convolve(d, ReturnDistribution::dirac({1.5, 1.5}), 1.0));
    EXPECT_NEAR(score_set(shifted, Vector{0.5, 0.5}), score_set(qs, Vector{0.5, 0.5}) + 1.5, 1e-9);
  }
}

TEST(SelectAction, GreedyAndTies) {
  QSetTable t(1, 2, 2);
  Rng rng = make_rng(1);
  t.q(0, 0) = {ReturnDistribution::dirac({2, 2})};
  t.q(0, 1) = {ReturnDistribution::dirac({3.5, 3.5})};
  EXPECT_EQ(select_action(0, t, 0.0, Vector{0.5, 0.5}, rng), 1u);
  t.q(0, 1) = {ReturnDistribution::dirac({2, 2})};
  EXPECT_EQ(select_action(0, t, 0.0, Vector{0.5, 0.5}, rng), 0u);
  t.q(0, 0) = {};
  EXPECT_EQ(select_action(0, t, 0.0, Vector{0.5, 0.5}, rng), 1u);
  EXPECT_THROW(select_action(0, t, 1.5, Vector{0.5, 0.5}, rng), std::invalid_argument);
}

TEST(SelectAction, FullExplorationIsUniform) {
  QSetTable t(1, 4, 2);
  t.q(0, 2) = {ReturnDistribution::dirac({9, 9})};
  Rng rng = make_rng(3);
  std::vector<int> counts(4, 0);
  const int n = 40000;
  for (int i = 0; i < n; ++i) ++counts[select_action(0, t, 1.0, Vector{0.5, 0.5}, rng)];
  // Binomial sd is about 87; allow 6 sd.
  for (int c : counts) EXPECT_NEAR(c, n / 4, 520);
}

TEST(Epsilon, LinearDecayThenFlat) {
  const EpsilonSchedule e;
  EXPECT_DOUBLE_EQ(e.at(0, 100), 1.0);
  EXPECT_NEAR(e.at(40, 100), 1.0 - 0.95 * 0.5, 1e-12);
  EXPECT_NEAR(e.at(80, 100), 0.05, 1e-12);
  EXPECT_NEAR(e.at(99, 100), 0.05, 1e-12);
}

TEST(LimitSetSize, IdentityAtLimit) {
  const std::vector<ReturnDistribution> qs{ReturnDistribution::dirac({1, 0}), ReturnDistribution::dirac({0, 1})};
  EXPECT_EQ(limit_set_size(qs, 2), qs);
  EXPECT_THROW(limit_set_size(qs, 0), std::invalid_argument);
}

TEST(LimitSetSize, NearbyDiracsClusterTogether) {
  const std::vector<ReturnDistribution> qs{ReturnDistribution::dirac({0, 0}), ReturnDistribution::dirac({0.01, 0.01}),
                                           ReturnDistribution::dirac({10, 10})};
  // Disjoint supports put every pair at distance 1; the lowest-index pair
  // merges first.
  EXPECT_DOUBLE_EQ(js_distance(qs[0], qs[1]), js_distance(qs[0], qs[2]));
  EXPECT_EQ(average_linkage_clusters(qs, 2), (std::vector<std::size_t>{0, 0, 1}));
  const std::vector<ReturnDistribution> first_two{qs[0], qs[1]};
  const std::vector<double> half{0.5, 0.5};
  EXPECT_EQ(mix(first_two, half), dist({{{0, 0}, 0.5}, {{0.01, 0.01}, 0.5}}));
  // Dirac(10,10) dominates the merged representative, which is then pruned.
  EXPECT_EQ(limit_set_size(qs, 2), (std::vector<ReturnDistribution>{ReturnDistribution::dirac({10, 10})}));
}

TEST(LimitSetSize, ClosestPairMergesFirst) {
  const auto a = dist({{{0, 0}, 0.5}, {{1, 1}, 0.5}});
  const auto b = dist({{{0, 0}, 0.45}, {{1, 1}, 0.55}});
  const auto c = ReturnDistribution::dirac({3, 0});
  const std::vector<ReturnDistribution> qs{c, a, b};
  EXPECT_EQ(average_linkage_clusters(qs, 2), (std::vector<std::size_t>{0, 1, 1}));
}

TEST(LimitSetSize, DuplicatesMergeFirst) {
  const auto a = ReturnDistribution::dirac({1, 0});
  const auto b = ReturnDistribution::dirac({0, 1});
  const std::vector<ReturnDistribution> qs{a, b, a};
  EXPECT_EQ(average_linkage_clusters(qs, 2), (std::vector<std::size_t>{0, 1, 0}));
  EXPECT_EQ(limit_set_size(qs, 2), (std::vector<ReturnDistribution>{a, b}));
}

TEST(LimitSetSize, MedoidKeepsMembers) {
  const auto a = dist({{{0, 2}, 0.5}, {{1, 1}, 0.5}});
  const auto b = dist({{{0, 2}, 0.4}, {{1, 1}, 0.6}});
  const auto c = dist({{{0, 2}, 0.6}, {{1, 1}, 0.4}});
  const auto far = ReturnDistribution::dirac({5, 0});
  const std::vector<ReturnDistribution> qs{a, b, c, far};
  const auto out = limit_set_size(qs, 2, Representative::medoid);
  EXPECT_EQ(out, (std::vector<ReturnDistribution>{a, far}));
}

TEST(LimitSetSize, OutputBoundedAndUndominated) {
  oracle::Gen g(31);
  for (int trial = 0; trial < 60; ++trial) {
    auto qs = d_prune(oracle::random_set(g, 2, 12, 3));
    const std::size_t limit = 1 + trial % 4;
    const auto out = limit_set_size(qs, limit);
    EXPECT_LE(out.size(), limit);
    EXPECT_EQ(d_prune(out), out);
  }
}

TEST(Train, ForcedBackup) {
  LearnerConfig cfg;
  cfg.episodes = 5;
  cfg.random_walks = 10;
  const auto out = train(one_state({{1, 2}}), cfg);
  EXPECT_EQ(out.distributions(), (std::vector<ReturnDistribution>{ReturnDistribution::dirac({1, 2})}));
}

TEST(Train, TwoIncomparableActions) {
  LearnerConfig cfg;
  cfg.episodes = 50;
  cfg.random_walks = 100;
  const auto out = train(one_state({{1, 0}, {0, 1}}), cfg);
  EXPECT_EQ(oracle::canonical(out.distributions()),
            oracle::canonical({ReturnDistribution::dirac({1, 0}), ReturnDistribution::dirac({0, 1})}));
}

TEST(Train, TreeMatchesEnumeration) {
  const auto m = three_state_tree();
  EXPECT_EQ(count_time_indexed_policies(m), 8.0);
  LearnerConfig cfg;
  cfg.episodes = 500;
  cfg.set_limit = kUnlimitedSetSize;
  const auto learned = train(m, cfg, exact_transitions(m));
  const auto exact = exhaustive_dus(m);
  EXPECT_EQ(oracle::canonical(learned.distributions()), oracle::canonical(exact.distributions()));
}

TEST(Train, ConfigErrors) {
  const auto m = one_state({{1, 2}});
  LearnerConfig cfg;
  cfg.weights = {1.0};
  EXPECT_THROW(train(m, cfg), std::invalid_argument);
  cfg.weights = {0.7, 0.7};
  EXPECT_THROW(train(m, cfg), std::invalid_argument);
  cfg = {};
  cfg.episodes = 0;
  EXPECT_THROW(train(m, cfg), std::invalid_argument);
  cfg = {};
  cfg.set_limit = 0;
  EXPECT_THROW(train(m, cfg), std::invalid_argument);
  cfg = {};
  EXPECT_THROW(train(m, cfg, exact_transitions(three_state_tree())), std::invalid_argument);
}

TEST(LearnerProperties, TableInvariantsAfterEveryEpisode) {
  for (bool indexed : {false, true}) {
    auto gen = preset_config("small");
    gen.seed = 3;
    auto m = generate(gen);
    if (indexed) m = time_indexed(m);
    LearnerConfig cfg;
    cfg.episodes = indexed ? 200 : 30;
    cfg.random_walks = 2000;
    cfg.set_limit = 4;
    Learner learner(m, cfg);
    while (!learner.done()) {
      learner.run(1);
      expect_table_invariants(learner.table(), cfg.set_limit, cfg.precision);
    }
  }
}

TEST(LearnerProperties, DeterministicInSeed) {
  auto m = time_indexed(generate(preset_config("small")));
  LearnerConfig cfg;
  cfg.episodes = 300;
  cfg.random_walks = 2000;
  const auto a = dump(to_json(train(m, cfg)));
  EXPECT_EQ(a, dump(to_json(train(m, cfg))));
}

TEST(LearnerProperties, CheckpointResumeIsBitExact) {
  auto gen = preset_config("small");
  gen.categorical_reward_atoms = IntRange{1, 2};
  auto m = time_indexed(generate(gen));
  LearnerConfig cfg;
  cfg.episodes = 200;
  cfg.random_walks = 1000;
  cfg.set_limit = 5;
  Learner straight(m, cfg);
  straight.run();

  Learner first(m, cfg);
  first.run(71);
  const auto text = first.checkpoint();
  Learner resumed = Learner::from_checkpoint(m, text);
  EXPECT_EQ(resumed.checkpoint(), text);
  EXPECT_EQ(resumed.episode(), 71u);
  resumed.run();
  EXPECT_EQ(dump(to_json(resumed.result())), dump(to_json(straight.result())));
  EXPECT_THROW(Learner::from_checkpoint(m, "{}"), std::invalid_argument);
}
