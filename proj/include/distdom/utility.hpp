#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>

#include "distdom/distribution.hpp"

namespace distdom {

enum class UtilityKind { linear, product, leontief, smooth_log_product, user };

/// Map from return vectors to a scalar utility.
///
/// All built-in kinds are strictly increasing in every coordinate except
/// `leontief` (the coordinate minimum), which is only weakly increasing.
/// `product` is strictly increasing on the positive orthant only.
class UtilityFunction {
 public:
  using Fn = std::function<double(std::span<const double>)>;

  static UtilityFunction linear(Vector weights);
  static UtilityFunction product();
  static UtilityFunction leontief();
  /// prod_i ln(1 + exp(v_i)), a smooth increasing stand-in for
  /// prod_i max(0, v_i).
  static UtilityFunction smooth_log_product();
  static UtilityFunction custom(std::string name, Fn fn);

  /// Accepts "product", "leontief", "smooth-log-product" and
  /// "linear:w1,w2,..." (or bare "linear" for uniform weights over `dim`).
  static UtilityFunction parse(std::string_view text, std::size_t dim);

  double operator()(std::span<const double> v) const { return fn_(v); }

  UtilityKind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }

 private:
  UtilityFunction(UtilityKind kind, std::string name, Fn fn)
      : kind_(kind), name_(std::move(name)), fn_(std::move(fn)) {}

  UtilityKind kind_;
  std::string name_;
  Fn fn_;
};

double expected_utility(const ReturnDistribution& dist,
                        const UtilityFunction& u);

}  // namespace distdom
