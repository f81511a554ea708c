#include "distdom/utility.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace distdom {

UtilityFunction UtilityFunction::linear(Vector weights) {
  if (weights.empty()) throw std::invalid_argument("linear utility: no weights");
  std::ostringstream name;
  name << "linear:";
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (i) name << ',';
    name << weights[i];
  }
  return UtilityFunction(
      UtilityKind::linear, name.str(), [w = std::move(weights)](std::span<const double> v) {
        if (v.size() != w.size()) {
          throw std::invalid_argument("linear utility: dimension mismatch");
        }
        return std::inner_product(v.begin(), v.end(), w.begin(), 0.0);
      });
}

UtilityFunction UtilityFunction::product() {
  return UtilityFunction(UtilityKind::product, "product", [](std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 1.0, std::multiplies<>());
  });
}

UtilityFunction UtilityFunction::leontief() {
  return UtilityFunction(UtilityKind::leontief, "leontief", [](std::span<const double> v) {
    return *std::min_element(v.begin(), v.end());
  });
}

UtilityFunction UtilityFunction::smooth_log_product() {
  return UtilityFunction(UtilityKind::smooth_log_product, "smooth-log-product",
                         [](std::span<const double> v) {
                           double out = 1.0;
                           for (double x : v) out *= std::log1p(std::exp(x));
                           return out;
                         });
}

UtilityFunction UtilityFunction::custom(std::string name, Fn fn) {
  return UtilityFunction(UtilityKind::user, std::move(name), std::move(fn));
}

UtilityFunction UtilityFunction::parse(std::string_view text, std::size_t dim) {
  if (text == "product") return product();
  if (text == "leontief") return leontief();
  if (text == "smooth-log-product") return smooth_log_product();
  if (text == "linear") return linear(Vector(dim, 1.0 / static_cast<double>(dim)));
  if (text.starts_with("linear:")) {
    Vector w;
    std::stringstream ss{std::string(text.substr(7))};
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        w.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw std::invalid_argument("bad linear weight '" + item + "'");
      }
    }
    if (w.size() != dim) {
      throw std::invalid_argument("linear utility needs " + std::to_string(dim) + " weights");
    }
    return linear(std::move(w));
  }
  throw std::invalid_argument("unknown utility '" + std::string(text) + "'");
}

double expected_utility(const ReturnDistribution& dist, const UtilityFunction& u) {
  double total = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) total += dist.prob(i) * u(dist.value(i));
  return total;
}

}  // namespace distdom
