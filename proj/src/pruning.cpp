#include "distdom/pruning.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "distdom/dominance.hpp"

namespace distdom {

// ---------------------------------------------------------------------------
// SolutionSet

SolutionSet::SolutionSet(std::vector<PolicyEntry> entries, int precision) {
  if (entries.empty()) return;
  dim_ = entries.front().dist.dim();
  std::unordered_set<std::string> seen;
  for (const auto& e : entries) {
    if (e.dist.dim() != dim_) {
      throw std::invalid_argument("solution set: entry '" + e.id + "' has dimension " +
                                  std::to_string(e.dist.dim()) + ", expected " +
                                  std::to_string(dim_));
    }
    if (!seen.insert(e.id).second) {
      throw std::invalid_argument("solution set: duplicate policy id '" + e.id + "'");
    }
  }
  std::vector<ReturnDistribution> rounded;
  rounded.reserve(entries.size());
  for (const auto& e : entries) rounded.push_back(round_to_precision(e.dist, precision));

  std::vector<bool> taken(entries.size(), false);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (taken[i]) continue;
    std::size_t keep = i;
    for (std::size_t j = i + 1; j < entries.size(); ++j) {
      if (taken[j] || !(rounded[j] == rounded[i])) continue;
      taken[j] = true;
      if (entries[j].id < entries[keep].id) keep = j;
    }
    entries_.push_back(entries[keep]);
  }
}

SolutionSet SolutionSet::from_distributions(std::vector<ReturnDistribution> dists,
                                            int precision) {
  const std::size_t width = std::to_string(dists.empty() ? 0 : dists.size() - 1).size();
  std::vector<PolicyEntry> entries;
  entries.reserve(dists.size());
  for (std::size_t i = 0; i < dists.size(); ++i) {
    std::string num = std::to_string(i);
    entries.push_back({"p" + std::string(width - num.size(), '0') + num, std::move(dists[i])});
  }
  return SolutionSet(std::move(entries), precision);
}

std::vector<std::string> SolutionSet::ids() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) out.push_back(e.id);
  return out;
}

std::vector<ReturnDistribution> SolutionSet::distributions() const {
  std::vector<ReturnDistribution> out;
  for (const auto& e : entries_) out.push_back(e.dist);
  return out;
}

SolutionSet SolutionSet::subset(std::span<const std::size_t> positions) const {
  SolutionSet out;
  out.dim_ = dim_;
  for (std::size_t p : positions) out.entries_.push_back(entries_.at(p));
  return out;
}

// ---------------------------------------------------------------------------
// Pairwise pruners

namespace {

void require_nonempty(const SolutionSet& set, const char* what) {
  if (set.empty()) throw std::invalid_argument(std::string(what) + ": empty solution set");
}

struct Summary {
  Vector mean;
  Vector lo;
  Vector hi;
};

Summary summarise(const ReturnDistribution& d) {
  Summary s{expected_value(d), Vector(d.dim()), Vector(d.dim())};
  for (std::size_t k = 0; k < d.dim(); ++k) {
    s.lo[k] = d.value(0)[k];
    s.hi[k] = d.value(0)[k];
    for (std::size_t i = 1; i < d.size(); ++i) {
      s.lo[k] = std::min(s.lo[k], d.value(i)[k]);
      s.hi[k] = std::max(s.hi[k], d.value(i)[k]);
    }
  }
  return s;
}

// Weak marginal FSD (within the CDF tolerance) bounds the mean gap by the
// tolerance times the support span, so a larger deficit rules dominance out.
bool mean_allows_dominance(const Summary& dominator, const Summary& dominated) {
  for (std::size_t k = 0; k < dominator.mean.size(); ++k) {
    const double span = std::max(dominator.hi[k], dominated.hi[k]) -
                        std::min(dominator.lo[k], dominated.lo[k]);
    if (dominator.mean[k] < dominated.mean[k] - kCdfTolerance * span - kValueTolerance) {
      return false;
    }
  }
  return true;
}

}  // namespace

std::vector<std::size_t> undominated_positions(std::span<const ReturnDistribution> dists) {
  std::vector<Summary> summaries;
  summaries.reserve(dists.size());
  for (const auto& d : dists) summaries.push_back(summarise(d));
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < dists.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < dists.size() && !dominated; ++j) {
      if (j == i || !mean_allows_dominance(summaries[j], summaries[i])) continue;
      dominated = distributionally_dominates(dists[j], dists[i]);
    }
    if (!dominated) keep.push_back(i);
  }
  return keep;
}

std::vector<ReturnDistribution> d_prune(std::span<const ReturnDistribution> dists) {
  std::vector<ReturnDistribution> out;
  for (std::size_t i : undominated_positions(dists)) out.push_back(dists[i]);
  return out;
}

SolutionSet p_prune(const SolutionSet& set) {
  require_nonempty(set, "p_prune");
  std::vector<Vector> means;
  for (const auto& e : set.entries()) means.push_back(expected_value(e.dist));
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < means.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < means.size() && !dominated; ++j) {
      dominated = j != i && pareto_dominates(means[j], means[i], Strictness::strict);
    }
    if (!dominated) keep.push_back(i);
  }
  return set.subset(keep);
}

SolutionSet d_prune(const SolutionSet& set) {
  require_nonempty(set, "d_prune");
  const auto dists = set.distributions();
  return set.subset(undominated_positions(dists));
}

// ---------------------------------------------------------------------------
// Convex pruners

bool is_convex_pareto_dominated(std::span<const double> candidate,
                                std::span<const Vector> others) {
  if (others.empty()) return false;
  const std::size_t d = candidate.size();
  const std::size_t n = others.size();
  // variables: weights (n), surpluses (d); rows: one per objective + simplex
  LinearProgram lp;
  lp.objective.assign(n + d, 0.0);
  lp.bounds.assign(n + d, VarBound::nonnegative);
  lp.a = Matrix(d + 1, n + d);
  lp.b.assign(d + 1, 0.0);
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (others[i].size() != d) throw std::invalid_argument("ch_prune: dimension mismatch");
      lp.a(k, i) = others[i][k];
    }
    lp.a(k, n + k) = -1.0;
    lp.b[k] = candidate[k];
    lp.objective[n + k] = 1.0;
  }
  for (std::size_t i = 0; i < n; ++i) lp.a(d, i) = 1.0;
  lp.b[d] = 1.0;
  const LPSolution sol = solve(lp);
  return sol.status == LPStatus::optimal && sol.objective > kDominanceThreshold;
}

SolutionSet ch_prune(const SolutionSet& set) {
  require_nonempty(set, "ch_prune");
  std::vector<Vector> means;
  for (const auto& e : set.entries()) means.push_back(expected_value(e.dist));
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < means.size(); ++i) {
    bool dominated = false;
    // A single dominating point is the degenerate mixture; checking it
    // directly keeps CH inside PF regardless of the LP threshold.
    for (std::size_t j = 0; j < means.size() && !dominated; ++j) {
      dominated = j != i && pareto_dominates(means[j], means[i], Strictness::strict);
    }
    if (!dominated) {
      std::vector<Vector> others;
      for (std::size_t j = 0; j < means.size(); ++j) {
        if (j != i) others.push_back(means[j]);
      }
      dominated = is_convex_pareto_dominated(means[i], others);
    }
    if (!dominated) keep.push_back(i);
  }
  return set.subset(keep);
}

ConvexDominanceProgram build_convex_dominance_program(
    const ReturnDistribution& candidate, std::span<const ReturnDistribution> others,
    ConvexMode mode) {
  if (others.empty()) throw std::invalid_argument("convex dominance: no mixture components");
  const std::size_t d = candidate.dim();
  for (const auto& o : others) {
    if (o.dim() != d) throw std::invalid_argument("convex dominance: dimension mismatch");
  }
  std::vector<ReturnDistribution> all(others.begin(), others.end());
  all.push_back(candidate);
  const GridAxes axes = grid_axes(all);
  const std::size_t h = grid_size(axes);
  const std::size_t n = others.size();

  // Marginal CDFs on each axis: marg[i][k][idx], candidate at i == n.
  std::vector<std::vector<std::vector<double>>> marg(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    marg[i].resize(d);
    for (std::size_t k = 0; k < d; ++k) {
      const GridAxes axis{axes[k]};
      marg[i][k] = cdf_on_grid(marginal(all[i], k), axis);
    }
  }
  std::vector<std::vector<double>> joint;
  if (mode == ConvexMode::joint) {
    for (const auto& dist : all) joint.push_back(cdf_on_grid(dist, axes));
  }

  // Axis index of grid point j along dimension k.
  std::vector<std::size_t> strides(d, 1);
  for (std::size_t k = d - 1; k-- > 0;) strides[k] = strides[k + 1] * axes[k + 1].size();
  auto axis_index = [&](std::size_t j, std::size_t k) {
    return (j / strides[k]) % axes[k].size();
  };

  ConvexDominanceProgram out;
  out.num_weights = n;
  out.num_grid_points = h;
  LinearProgram& lp = out.lp;
  const std::size_t marginal_vars = mode == ConvexMode::joint ? h * d : 0;
  const std::size_t vars = n + h + marginal_vars;
  const std::size_t rows = h + marginal_vars + 1;
  lp.objective.assign(vars, 0.0);
  lp.bounds.assign(vars, VarBound::nonnegative);
  lp.a = Matrix(rows, vars);
  lp.b.assign(rows, 0.0);

  for (std::size_t j = 0; j < h; ++j) {
    if (mode == ConvexMode::joint) {
      for (std::size_t i = 0; i < n; ++i) lp.a(j, i) = joint[i][j];
      lp.b[j] = joint[n][j];
    } else {
      for (std::size_t i = 0; i <= n; ++i) {
        double prod = 1.0;
        for (std::size_t k = 0; k < d; ++k) prod *= marg[i][k][axis_index(j, k)];
        if (i < n) {
          lp.a(j, i) = prod;
        } else {
          lp.b[j] = prod;
        }
      }
      lp.objective[n + j] = 1.0;
    }
    lp.a(j, n + j) = 1.0;
  }
  if (mode == ConvexMode::joint) {
    // l_{j,k} are free; their sign follows from the joint slacks.
    for (std::size_t j = 0; j < h; ++j) {
      for (std::size_t k = 0; k < d; ++k) {
        const std::size_t row = h + j * d + k;
        const std::size_t var = n + h + j * d + k;
        const std::size_t idx = axis_index(j, k);
        for (std::size_t i = 0; i < n; ++i) lp.a(row, i) = marg[i][k][idx];
        lp.a(row, var) = 1.0;
        lp.b[row] = marg[n][k][idx];
        lp.bounds[var] = VarBound::free;
        lp.objective[var] = 1.0;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) lp.a(rows - 1, i) = 1.0;
  lp.b[rows - 1] = 1.0;
  return out;
}

bool is_convex_dist_dominated(const ReturnDistribution& candidate,
                              std::span<const ReturnDistribution> others, ConvexMode mode) {
  if (others.empty()) return false;
  const auto program = build_convex_dominance_program(candidate, others, mode);
  const LPSolution sol = solve(program.lp);
  return sol.status == LPStatus::optimal && sol.objective > kDominanceThreshold;
}

SolutionSet cd_prune(const SolutionSet& set, ConvexMode mode) {
  require_nonempty(set, "cd_prune");
  const auto dists = set.distributions();
  const auto undominated = undominated_positions(dists);
  std::vector<bool> pairwise_dominated(dists.size(), true);
  for (std::size_t i : undominated) pairwise_dominated[i] = false;

  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < dists.size(); ++i) {
    // Joint mode: a single dominating distribution is the degenerate mixture.
    if (mode == ConvexMode::joint && pairwise_dominated[i]) continue;
    std::vector<ReturnDistribution> others;
    for (std::size_t j = 0; j < dists.size(); ++j) {
      if (j != i) others.push_back(dists[j]);
    }
    if (!is_convex_dist_dominated(dists[i], others, mode)) keep.push_back(i);
  }
  return set.subset(keep);
}

}  // namespace distdom
