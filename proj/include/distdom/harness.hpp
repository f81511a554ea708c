#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "distdom/dimoq.hpp"
#include "distdom/momdp.hpp"
#include "distdom/pruning.hpp"
#include "distdom/utility.hpp"

namespace distdom {

class OracleCapExceeded : public std::runtime_error {
 public:
  OracleCapExceeded(double count, double cap);
  double count() const noexcept { return count_; }

 private:
  double count_;
};

inline constexpr double kDefaultPolicyCap = 10000;

/// Number of deterministic time-indexed policies, prod_t |A|^{reachable_t}.
double count_time_indexed_policies(const Momdp& momdp);

/// Exact return distribution of every deterministic time-indexed policy (by
/// forward induction over kernel and rewards), then DPrune.
SolutionSet exhaustive_dus(const Momdp& momdp, double policy_cap = kDefaultPolicyCap,
                           int precision = kDefaultPrecision);

struct ExperimentCell {
  GeneratorConfig generator;
  LearnerConfig learner;
  std::vector<std::uint64_t> seeds;
  bool time_indexed_states = false;
};

struct RunRow {
  std::string config;
  std::uint64_t seed = 0;
  std::size_t dus = 0;
  std::size_t cdus = 0;
  std::size_t pf = 0;
  std::size_t ch = 0;
  double estimation_seconds = 0.0;
  double training_seconds = 0.0;
  std::string error;  // empty on success

  double percent(std::size_t n) const;
};

struct RunSets {
  SolutionSet dus;
  SolutionSet cdus;
  SolutionSet pf;
  SolutionSet ch;
};

struct MetricSummary {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n - 1)
  double min = 0.0;
  double max = 0.0;
};

struct ConfigAggregate {
  std::string config;
  std::size_t runs = 0;
  MetricSummary dus;
  MetricSummary cdus_pct;
  MetricSummary pf_pct;
  MetricSummary ch_pct;
  MetricSummary estimation_seconds;
  MetricSummary training_seconds;
};

struct ExperimentReport {
  std::vector<RunRow> rows;                 // matrix order
  std::vector<ConfigAggregate> aggregates;  // one per cell with a successful run
  std::vector<std::optional<RunSets>> sets;  // parallel to rows
};

/// One generate -> train -> prune pass.
RunRow run_single(const GeneratorConfig& generator, const LearnerConfig& learner,
                  std::uint64_t seed, bool time_indexed_states, RunSets* sets = nullptr);

/// Runs every (cell, seed) pair, up to `jobs` at a time. Failures are
/// recorded per row.
ExperimentReport run_experiment(const std::vector<ExperimentCell>& matrix, std::size_t jobs = 1);

MetricSummary summarise(const std::vector<double>& values);

/// Deterministic columns only: config, seed, set sizes, percentages, status.
/// Per-run rows followed by one "mean" row per config.
std::string report_csv(const ExperimentReport& report);
/// Wall-clock columns per run plus mean/sd/min/max per config.
std::string timings_csv(const ExperimentReport& report);
/// Per-config mean/sd/min/max of the deterministic metrics.
std::string summary_csv(const ExperimentReport& report);

struct UtilityScore {
  std::string id;
  double value = 0.0;
  bool in_pf = false;
};

struct UtilityRanking {
  std::string utility;
  std::vector<UtilityScore> scores;  // descending, ties by input order
  std::string best_id;
  std::vector<std::string> tied_best;  // all ids within 1e-9 of the best
  std::string best_pf_id;
  double best_value = 0.0;
  double best_pf_value = 0.0;
};

std::vector<UtilityRanking> evaluate_utilities(const SolutionSet& set,
                                               const std::vector<UtilityFunction>& utilities);

}  // namespace distdom
