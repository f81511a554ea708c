#pragma once

#include <span>

#include "distdom/distribution.hpp"

namespace distdom {

/// Tolerance for CDF comparisons. Strict inequality needs a gap above it.
inline constexpr double kCdfTolerance = 1e-9;

/// Absolute tolerance when comparing expected-value vectors. Absorbs the
/// rounding noise of summing the same mass in a different atom order.
inline constexpr double kValueTolerance = 1e-12;

enum class Strictness { weak, strict };

/// Strict: u >= v everywhere and u > v somewhere. Weak: u >= v everywhere.
bool pareto_dominates(std::span<const double> u, std::span<const double> v,
                      Strictness mode = Strictness::strict);

/// First-order stochastic dominance F_a <= F_b, decided on the step grid of
/// both supports (both CDFs are constant on its cells).
bool fsd(const ReturnDistribution& a, const ReturnDistribution& b,
         Strictness mode = Strictness::weak);

/// Weak joint FSD plus strict FSD of at least one marginal.
bool distributionally_dominates(const ReturnDistribution& a,
                                const ReturnDistribution& b);

}  // namespace distdom
