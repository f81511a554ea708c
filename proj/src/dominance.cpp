#include "distdom/dominance.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

namespace distdom {

namespace {

void check_same_dim(const ReturnDistribution& a, const ReturnDistribution& b,
                    const char* what) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
  }
}

struct Comparison {
  bool weak = true;     // F_a <= F_b + tol everywhere
  bool strict = false;  // F_a < F_b - tol somewhere
};

// Signed CDF difference F_a - F_b over the joint grid, one prefix-sum pass.
Comparison compare_cdfs(const ReturnDistribution& a, const ReturnDistribution& b) {
  const GridAxes axes = grid_axes(a, b);
  const auto fa = cdf_on_grid(a, axes);
  const auto fb = cdf_on_grid(b, axes);
  Comparison out;
  for (std::size_t c = 0; c < fa.size(); ++c) {
    const double diff = fa[c] - fb[c];
    if (diff > kCdfTolerance) {
      out.weak = false;
      return out;
    }
    if (diff < -kCdfTolerance) out.strict = true;
  }
  return out;
}

// Univariate marginal comparison straight from the atoms, no distribution
// objects: sort (coordinate, signed mass) and sweep.
Comparison compare_marginals(const ReturnDistribution& a,
                             const ReturnDistribution& b, std::size_t k,
                             std::vector<std::pair<double, double>>& scratch) {
  scratch.clear();
  for (std::size_t i = 0; i < a.size(); ++i) scratch.emplace_back(a.value(i)[k], a.prob(i));
  for (std::size_t i = 0; i < b.size(); ++i) scratch.emplace_back(b.value(i)[k], -b.prob(i));
  std::sort(scratch.begin(), scratch.end());
  Comparison out;
  double diff = 0.0;
  for (std::size_t i = 0; i < scratch.size(); ++i) {
    diff += scratch[i].second;
    if (i + 1 < scratch.size() && scratch[i + 1].first == scratch[i].first) continue;
    if (diff > kCdfTolerance) {
      out.weak = false;
      return out;
    }
    if (diff < -kCdfTolerance) out.strict = true;
  }
  return out;
}

}  // namespace

bool pareto_dominates(std::span<const double> u, std::span<const double> v,
                      Strictness mode) {
  if (u.size() != v.size()) {
    throw std::invalid_argument("pareto_dominates: length mismatch");
  }
  bool better = false;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] < v[i] - kValueTolerance) return false;
    if (u[i] > v[i] + kValueTolerance) better = true;
  }
  return mode == Strictness::weak || better;
}

bool fsd(const ReturnDistribution& a, const ReturnDistribution& b, Strictness mode) {
  check_same_dim(a, b, "fsd");
  const Comparison c = compare_cdfs(a, b);
  return c.weak && (mode == Strictness::weak || c.strict);
}

bool distributionally_dominates(const ReturnDistribution& a,
                                const ReturnDistribution& b) {
  check_same_dim(a, b, "distributionally_dominates");
  // Weak joint FSD implies weak FSD of every marginal, so the marginal sweep
  // rejects most pairs before the grid is built.
  std::vector<std::pair<double, double>> scratch;
  scratch.reserve(a.size() + b.size());
  bool strict_marginal = false;
  for (std::size_t k = 0; k < a.dim(); ++k) {
    const Comparison c = compare_marginals(a, b, k, scratch);
    if (!c.weak) return false;
    strict_marginal = strict_marginal || c.strict;
  }
  if (!strict_marginal) return false;
  return compare_cdfs(a, b).weak;
}

}  // namespace distdom
