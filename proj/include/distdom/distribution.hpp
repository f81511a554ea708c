#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace distdom {

using Vector = std::vector<double>;

/// Default number of decimals used to decide whether two atoms coincide.
inline constexpr int kDefaultPrecision = 3;

/// Tolerance on the total probability mass of a distribution.
inline constexpr double kMassTolerance = 1e-9;

struct Atom {
  Vector value;
  double prob = 0.0;
};

/// Finite multivariate categorical distribution over return vectors.
///
/// Atoms are stored sorted lexicographically by value. Atoms whose values
/// agree after rounding to `merge_decimals` places are merged into one atom
/// (the lexicographically smallest raw value is kept). Zero-probability atoms
/// are dropped. The stored probabilities are renormalised to sum to one.
/// Instances are immutable.
class ReturnDistribution {
 public:
  ReturnDistribution(std::size_t dim, std::vector<Atom> atoms,
                     int merge_decimals = kDefaultPrecision);

  static ReturnDistribution dirac(Vector value);
  static ReturnDistribution zero(std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return probs_.size(); }

  std::span<const double> value(std::size_t i) const noexcept {
    return {values_.data() + i * dim_, dim_};
  }
  double prob(std::size_t i) const noexcept { return probs_[i]; }
  std::span<const double> probs() const noexcept { return probs_; }

  std::vector<Atom> atoms() const;

  friend bool operator==(const ReturnDistribution&,
                         const ReturnDistribution&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> values_;  // row-major, size() x dim_
  std::vector<double> probs_;
};

/// Rounds half-to-even to `decimals` places.
double round_half_even(double x, int decimals);

/// Probability that a draw is component-wise <= point.
double cdf(const ReturnDistribution& dist, std::span<const double> point);

ReturnDistribution marginal(const ReturnDistribution& dist, std::size_t index);

Vector expected_value(const ReturnDistribution& dist);

/// Convex mixture. Weights must be nonnegative and sum to one.
ReturnDistribution mix(std::span<const ReturnDistribution> dists,
                       std::span<const double> weights);

/// Distribution of A + scale * B for independent A and B.
ReturnDistribution convolve(const ReturnDistribution& a,
                            const ReturnDistribution& b, double scale);

ReturnDistribution round_to_precision(const ReturnDistribution& dist,
                                      int decimals);

/// Square root of the base-2 Jensen-Shannon divergence between the two
/// distributions flattened onto the union of their supports.
double js_distance(const ReturnDistribution& a, const ReturnDistribution& b);

/// Sorted unique coordinates per dimension over the supports of `dists`.
using GridAxes = std::vector<std::vector<double>>;

GridAxes grid_axes(std::span<const ReturnDistribution> dists);
GridAxes grid_axes(const ReturnDistribution& a, const ReturnDistribution& b);

std::size_t grid_size(const GridAxes& axes);

/// Cartesian product of the axes, lexicographic order (last axis fastest).
std::vector<Vector> step_grid(std::span<const ReturnDistribution> dists);
std::vector<Vector> grid_points(const GridAxes& axes);

/// CDF evaluated at every grid point of `axes`, in grid_points() order.
/// Runs in O(size() * dim * log + grid_size() * dim) via prefix sums.
std::vector<double> cdf_on_grid(const ReturnDistribution& dist,
                                const GridAxes& axes);

}  // namespace distdom
