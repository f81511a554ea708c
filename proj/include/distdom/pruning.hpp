#pragma once

#include <span>
#include <string>
#include <vector>

#include "distdom/distribution.hpp"
#include "distdom/linprog.hpp"

namespace distdom {

struct PolicyEntry {
  std::string id;
  ReturnDistribution dist;
};

/// Labelled collection of return distributions sharing one dimension.
///
/// Policy ids are unique. Entries whose distributions coincide after rounding
/// to `precision` decimals are collapsed onto the lowest id; the surviving
/// entry keeps the position of the first occurrence.
class SolutionSet {
 public:
  SolutionSet() = default;
  explicit SolutionSet(std::vector<PolicyEntry> entries, int precision = kDefaultPrecision);

  /// Ids "p0", "p1", ... zero-padded to a common width.
  static SolutionSet from_distributions(std::vector<ReturnDistribution> dists,
                                        int precision = kDefaultPrecision);

  const std::vector<PolicyEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t dim() const noexcept { return dim_; }

  std::vector<std::string> ids() const;
  std::vector<ReturnDistribution> distributions() const;

  /// Entries at the given positions, in the given order.
  SolutionSet subset(std::span<const std::size_t> positions) const;

 private:
  std::size_t dim_ = 0;
  std::vector<PolicyEntry> entries_;
};

enum class ConvexMode { joint, marginal_only };

/// Threshold on the LP objective for declaring (convex) dominance.
inline constexpr double kDominanceThreshold = 1e-7;

/// Positions of the entries not distributionally dominated by any other entry.
std::vector<std::size_t> undominated_positions(std::span<const ReturnDistribution> dists);

/// DPrune on a plain list of distributions; survivors keep input order.
std::vector<ReturnDistribution> d_prune(std::span<const ReturnDistribution> dists);

SolutionSet p_prune(const SolutionSet& set);
SolutionSet d_prune(const SolutionSet& set);
SolutionSet ch_prune(const SolutionSet& set);
SolutionSet cd_prune(const SolutionSet& set, ConvexMode mode = ConvexMode::joint);

/// Variable layout of the convex-dominance program: mixture weights first,
/// then one joint slack per grid point, then (joint mode) one marginal slack
/// per grid point and objective.
struct ConvexDominanceProgram {
  LinearProgram lp;
  std::size_t num_weights = 0;
  std::size_t num_grid_points = 0;
};

ConvexDominanceProgram build_convex_dominance_program(
    const ReturnDistribution& candidate, std::span<const ReturnDistribution> others,
    ConvexMode mode);

/// True iff some convex mixture of `others` distributionally dominates
/// `candidate` (joint mode), or strictly dominates it under the
/// independent-marginals approximation (marginal-only mode).
bool is_convex_dist_dominated(const ReturnDistribution& candidate,
                              std::span<const ReturnDistribution> others,
                              ConvexMode mode = ConvexMode::joint);

/// True iff some convex combination of `others` strictly Pareto dominates
/// `candidate`.
bool is_convex_pareto_dominated(std::span<const double> candidate,
                                std::span<const Vector> others);

}  // namespace distdom
