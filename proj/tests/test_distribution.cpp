#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "distdom/distribution.hpp"
#include "distdom/utility.hpp"
#include "support/oracles.hpp"

using namespace distdom;

namespace {

ReturnDistribution dist(std::vector<Atom> atoms) {
  const std::size_t dim = atoms.front().value.size();
  return ReturnDistribution(dim, std::move(atoms));
}

const ReturnDistribution kX = dist({{{2, 4}, 2.0 / 3}, {{4, 2}, 1.0 / 3}});
const ReturnDistribution kY = dist({{{2, 2}, 1.0 / 3}, {{2, 4}, 1.0 / 3}, {{4, 4}, 1.0 / 3}});

void expect_valid(const ReturnDistribution& d) {
  double total = 0.0;
  for (double p : d.probs()) {
    EXPECT_GE(p, 0.0);
    total += p;
  }
  EXPECT_NEAR(total, 1.0, 1e-9);
  for (std::size_t i = 1; i < d.size(); ++i) {
    auto a = d.value(i - 1);
    auto b = d.value(i);
    EXPECT_TRUE(std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end()));
  }
}

}  // namespace

TEST(Construction, MergesCoincidentAtomsAndSorts) {
  const auto d = dist({{{1, 0}, 0.25}, {{0, 1}, 0.25}, {{1, 0}, 0.5}});
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.value(0)[0], 0.0);
  EXPECT_DOUBLE_EQ(d.prob(1), 0.75);
  expect_valid(d);
}

TEST(Construction, MergesAtomsEqualAfterRounding) {
  const auto d = dist({{{1.0001, 2}, 0.5}, {{1.0002, 2}, 0.5}});
  ASSERT_EQ(d.size(), 1u);
  EXPECT_DOUBLE_EQ(d.prob(0), 1.0);
}

TEST(Construction, DropsZeroProbabilityAtoms) {
  const auto d = dist({{{1, 1}, 1.0}, {{2, 2}, 0.0}});
  EXPECT_EQ(d.size(), 1u);
}

TEST(Construction, RejectsInvalidInput) {
  EXPECT_THROW(dist({{{1, 1}, 0.5}}), std::invalid_argument);
  EXPECT_THROW(dist({{{1, 1}, 1.5}, {{0, 0}, -0.5}}), std::invalid_argument);
  EXPECT_THROW(ReturnDistribution(2, {{{1.0}, 1.0}}), std::invalid_argument);
  EXPECT_THROW(ReturnDistribution(0, {}), std::invalid_argument);
  EXPECT_THROW(dist({{{NAN, 1}, 1.0}}), std::invalid_argument);
}

TEST(Cdf, Examples) {
  EXPECT_NEAR(cdf(kX, Vector{2, 4}), 2.0 / 3, 1e-12);
  EXPECT_DOUBLE_EQ(cdf(kX, Vector{5, 5}), 1.0);
  EXPECT_DOUBLE_EQ(cdf(kX, Vector{1, 1}), 0.0);
}

TEST(Cdf, DimensionMismatchThrows) { EXPECT_THROW(cdf(kX, Vector{1}), std::invalid_argument); }

TEST(Marginal, Examples) {
  const auto m = marginal(kX, 0);
  ASSERT_EQ(m.dim(), 1u);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m.value(0)[0], 2.0);
  EXPECT_NEAR(m.prob(0), 2.0 / 3, 1e-12);
  EXPECT_NEAR(cdf(m, Vector{2}), 2.0 / 3, 1e-12);

  EXPECT_EQ(marginal(ReturnDistribution::zero(2), 1), ReturnDistribution::dirac({0}));

  const auto my = marginal(kY, 0);
  ASSERT_EQ(my.size(), 2u);
  EXPECT_NEAR(my.prob(0), 2.0 / 3, 1e-12);
  EXPECT_NEAR(my.prob(1), 1.0 / 3, 1e-12);
}

TEST(Marginal, OutOfRangeThrows) { EXPECT_THROW(marginal(kX, 2), std::out_of_range); }

TEST(ExpectedValue, Examples) {
  const auto a = dist({{{1, 0}, 0.5}, {{0, 1}, 0.5}});
  EXPECT_EQ(expected_value(a), (Vector{0.5, 0.5}));
  EXPECT_EQ(expected_value(ReturnDistribution::dirac({0.45, 0.45})), (Vector{0.45, 0.45}));
  EXPECT_EQ(expected_value(dist({{{1, 3}, 0.5}, {{3, 1}, 0.5}})), (Vector{2, 2}));
}

TEST(ExpectedUtility, Examples) {
  const auto product = UtilityFunction::product();
  EXPECT_NEAR(expected_utility(dist({{{1, 0}, 0.5}, {{0, 1}, 0.5}}), product), 0.0, 1e-12);
  EXPECT_NEAR(expected_utility(ReturnDistribution::dirac({0.45, 0.45}), product), 0.2025, 1e-12);

  // Independent evaluation of ln(1 + e^x) * ln(1 + e^y).
  auto smooth = [](double x, double y) { return std::log(1 + std::exp(x)) * std::log(1 + std::exp(y)); };
  const double ex = 2.0 / 3 * smooth(2, 4) + 1.0 / 3 * smooth(4, 2);
  const double ey = (smooth(2, 2) + smooth(2, 4) + smooth(4, 4)) / 3;
  const auto u = UtilityFunction::smooth_log_product();
  EXPECT_NEAR(expected_utility(kX, u), ex, 1e-12);
  EXPECT_NEAR(expected_utility(kY, u), ey, 1e-12);
  EXPECT_NEAR(expected_utility(kX, u), 8.55, 0.01);
  EXPECT_NEAR(expected_utility(kY, u), 9.74, 0.01);
}

TEST(Utility, BuiltIns) {
  EXPECT_DOUBLE_EQ(UtilityFunction::leontief()(Vector{3, 1}), 1.0);
  EXPECT_DOUBLE_EQ(UtilityFunction::linear({0.25, 0.75})(Vector{4, 8}), 7.0);
  EXPECT_DOUBLE_EQ(UtilityFunction::product()(Vector{2, 3, 4}), 24.0);
}

TEST(Utility, Parse) {
  EXPECT_EQ(UtilityFunction::parse("product", 2).kind(), UtilityKind::product);
  EXPECT_EQ(UtilityFunction::parse("leontief", 2).kind(), UtilityKind::leontief);
  EXPECT_EQ(UtilityFunction::parse("smooth-log-product", 2).kind(), UtilityKind::smooth_log_product);
  EXPECT_DOUBLE_EQ(UtilityFunction::parse("linear", 2)(Vector{2, 4}), 3.0);  // uniform 1/d
  EXPECT_DOUBLE_EQ(UtilityFunction::parse("linear:1,2", 2)(Vector{2, 4}), 10.0);
  EXPECT_THROW(UtilityFunction::parse("linear:1", 2), std::invalid_argument);
  EXPECT_THROW(UtilityFunction::parse("nope", 2), std::invalid_argument);
}

TEST(Mix, Examples) {
  const std::vector<ReturnDistribution> two{ReturnDistribution::dirac({1, 5}), ReturnDistribution::dirac({5, 1})};
  const std::vector<double> half{0.5, 0.5};
  EXPECT_EQ(mix(two, half), dist({{{1, 5}, 0.5}, {{5, 1}, 0.5}}));

  const std::vector<ReturnDistribution> one{kY};
  const std::vector<double> w1{1.0};
  EXPECT_EQ(mix(one, w1), kY);

  const std::vector<ReturnDistribution> same{ReturnDistribution::zero(2), ReturnDistribution::zero(2)};
  const std::vector<double> w2{0.3, 0.7};
  EXPECT_EQ(mix(same, w2), ReturnDistribution::zero(2));
}

TEST(Mix, Errors) {
  const std::vector<ReturnDistribution> mixed{ReturnDistribution::zero(2), ReturnDistribution::zero(3)};
  const std::vector<double> half{0.5, 0.5};
  EXPECT_THROW(mix(mixed, half), std::invalid_argument);
  const std::vector<ReturnDistribution> two{kX, kY};
  const std::vector<double> bad{0.5, 0.6};
  EXPECT_THROW(mix(two, bad), std::invalid_argument);
  const std::vector<double> negative{1.5, -0.5};
  EXPECT_THROW(mix(two, negative), std::invalid_argument);
  const std::vector<double> short_w{1.0};
  EXPECT_THROW(mix(two, short_w), std::invalid_argument);
}

TEST(Convolve, Examples) {
  EXPECT_EQ(convolve(ReturnDistribution::dirac({1, 0}), ReturnDistribution::dirac({0, 1}), 1.0),
            ReturnDistribution::dirac({1, 1}));
  EXPECT_EQ(convolve(dist({{{1, 0}, 0.5}, {{0, 0}, 0.5}}), ReturnDistribution::dirac({2, 2}), 0.5),
            dist({{{2, 1}, 0.5}, {{1, 1}, 0.5}}));
  EXPECT_EQ(convolve(kX, ReturnDistribution::zero(2), 0.7), kX);
}

TEST(Convolve, Errors) {
  EXPECT_THROW(convolve(kX, ReturnDistribution::zero(3), 1.0), std::invalid_argument);
  EXPECT_THROW(convolve(kX, kY, -1.0), std::invalid_argument);
}

TEST(RoundToPrecision, Examples) {
  EXPECT_EQ(round_to_precision(dist({{{1.2345, 0.0004}, 1.0}}), 3), ReturnDistribution::dirac({1.234, 0.0}));
  const auto merged = round_to_precision(dist({{{1.0001, 2}, 0.5}, {{0.9999, 2}, 0.5}}), 2);
  EXPECT_EQ(merged, ReturnDistribution::dirac({1.0, 2}));
  EXPECT_EQ(round_to_precision(kX, 6), kX);
}

TEST(RoundToPrecision, HalfToEven) {
  EXPECT_DOUBLE_EQ(round_half_even(0.5, 0), 0.0);
  EXPECT_DOUBLE_EQ(round_half_even(1.5, 0), 2.0);
  EXPECT_DOUBLE_EQ(round_half_even(2.5, 0), 2.0);
  EXPECT_DOUBLE_EQ(round_half_even(-2.5, 0), -2.0);
  EXPECT_FALSE(std::signbit(round_half_even(-0.0001, 3)));
}

TEST(JsDistance, Examples) {
  EXPECT_DOUBLE_EQ(js_distance(kX, kX), 0.0);
  EXPECT_NEAR(js_distance(ReturnDistribution::zero(2), ReturnDistribution::dirac({1, 1})), 1.0, 1e-12);

  // Direct evaluation on the flattened vectors P = (1, 0), Q = (1/2, 1/2).
  const double p[2] = {1.0, 0.0};
  const double q[2] = {0.5, 0.5};
  double jsd = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0) jsd += 0.5 * p[i] * std::log2(p[i] / m);
    if (q[i] > 0) jsd += 0.5 * q[i] * std::log2(q[i] / m);
  }
  const auto b = dist({{{0, 0}, 0.5}, {{1, 1}, 0.5}});
  EXPECT_NEAR(js_distance(ReturnDistribution::zero(2), b), std::sqrt(jsd), 1e-12);
  EXPECT_NEAR(js_distance(ReturnDistribution::zero(2), b), 0.5579, 1e-4);
}

TEST(JsDistance, DimensionMismatchThrows) {
  EXPECT_THROW(js_distance(kX, ReturnDistribution::zero(3)), std::invalid_argument);
}

TEST(StepGrid, Examples) {
  const std::vector<ReturnDistribution> xy{kX, kY};
  EXPECT_EQ(step_grid(xy), (std::vector<Vector>{{2, 2}, {2, 4}, {4, 2}, {4, 4}}));

  const std::vector<ReturnDistribution> one{ReturnDistribution::dirac({1, 1})};
  EXPECT_EQ(step_grid(one), (std::vector<Vector>{{1, 1}}));

  const std::vector<ReturnDistribution> three{dist({{{1, 3}, 0.5}, {{5, 1}, 0.5}}), ReturnDistribution::dirac({3, 5})};
  EXPECT_EQ(step_grid(three).size(), 9u);
}

TEST(StepGrid, CdfOnGridMatchesPointwiseCdf) {
  oracle::Gen g(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t dim = 1 + trial % 3;
    const std::vector<ReturnDistribution> ds{oracle::random_distribution(g, dim, 6),
                                             oracle::random_distribution(g, dim, 6)};
    const auto axes = grid_axes(ds);
    const auto points = grid_points(axes);
    ASSERT_EQ(points, step_grid(ds));
    const auto values = cdf_on_grid(ds[0], axes);
    ASSERT_EQ(values.size(), points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      EXPECT_NEAR(values[i], oracle::cdf(ds[0], points[i]), 1e-12);
    }
  }
}

// --- properties -------------------------------------------------------------

class DistributionProperties : public ::testing::Test {
 protected:
  oracle::Gen g{2024};
};

TEST_F(DistributionProperties, OperationOutputsAreValid) {
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t dim = 1 + trial % 3;
    const auto a = oracle::random_distribution(g, dim, 5);
    const auto b = oracle::random_distribution(g, dim, 5);
    const std::vector<ReturnDistribution> ab{a, b};
    const std::vector<double> w{0.3, 0.7};
    expect_valid(a);
    expect_valid(mix(ab, w));
    expect_valid(convolve(a, b, 0.9));
    expect_valid(marginal(a, dim - 1));
    expect_valid(round_to_precision(convolve(a, b, 1.0 / 3), 1));
  }
}

TEST_F(DistributionProperties, CdfIsMonotoneAndBounded) {
  std::uniform_real_distribution<double> coord(-1, 5);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t dim = 1 + trial % 3;
    const auto d = oracle::random_distribution(g, dim, 6);
    Vector p(dim), q(dim), hi(dim, 4.0), lo(dim, 5.0);
    for (std::size_t k = 0; k < dim; ++k) {
      p[k] = coord(g);
      q[k] = p[k] + std::abs(coord(g));
    }
    EXPECT_LE(cdf(d, p), cdf(d, q) + 1e-12);
    EXPECT_NEAR(cdf(d, hi), 1.0, 1e-9);
    lo[trial % dim] = -0.5;
    EXPECT_DOUBLE_EQ(cdf(d, lo), 0.0);
  }
}

TEST_F(DistributionProperties, MarginalPreservesMassAndMean) {
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t dim = 1 + trial % 3;
    const auto d = oracle::random_distribution(g, dim, 6);
    const auto mean = expected_value(d);
    for (std::size_t k = 0; k < dim; ++k) {
      const auto m = marginal(d, k);
      const auto probs = m.probs();
      EXPECT_NEAR(std::accumulate(probs.begin(), probs.end(), 0.0), 1.0, 1e-9);
      EXPECT_NEAR(expected_value(m)[0], mean[k], 1e-9);
    }
  }
}

TEST_F(DistributionProperties, MixtureIsLinear) {
  const auto u = UtilityFunction::smooth_log_product();
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t dim = 1 + trial % 3;
    const auto ds = oracle::random_set(g, dim, 4, 4);
    std::vector<double> w(ds.size());
    std::uniform_real_distribution<double> r(0.01, 1.0);
    double total = 0.0;
    for (auto& x : w) total += (x = r(g));
    for (auto& x : w) x /= total;
    const auto m = mix(ds, w);
    Vector expect(dim, 0.0);
    double eu = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const auto e = expected_value(ds[i]);
      for (std::size_t k = 0; k < dim; ++k) expect[k] += w[i] * e[k];
      eu += w[i] * expected_utility(ds[i], u);
    }
    const auto got = expected_value(m);
    for (std::size_t k = 0; k < dim; ++k) EXPECT_NEAR(got[k], expect[k], 1e-9);
    EXPECT_NEAR(expected_utility(m, u), eu, 1e-9);
  }
}

TEST_F(DistributionProperties, ConvolveAddsExpectations) {
  std::uniform_real_distribution<double> gamma(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t dim = 1 + trial % 3;
    const auto a = oracle::random_distribution(g, dim, 5);
    const auto b = oracle::random_distribution(g, dim, 5);
    const double s = gamma(g);
    const auto ea = expected_value(a);
    const auto eb = expected_value(b);
    const auto ec = expected_value(convolve(a, b, s));
    // Merging at three decimals moves atoms by at most 5e-4.
    for (std::size_t k = 0; k < dim; ++k) EXPECT_NEAR(ec[k], ea[k] + s * eb[k], 5e-4);
    const auto exact = expected_value(convolve(a, b, 1.0));
    for (std::size_t k = 0; k < dim; ++k) EXPECT_NEAR(exact[k], ea[k] + eb[k], 1e-9);
  }
}

TEST_F(DistributionProperties, JsDistanceIsAMetric) {
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t dim = 1 + trial % 2;
    const auto a = oracle::random_distribution(g, dim, 4, 0, 2);
    const auto b = oracle::random_distribution(g, dim, 4, 0, 2);
    const auto c = oracle::random_distribution(g, dim, 4, 0, 2);
    const double ab = js_distance(a, b);
    EXPECT_NEAR(ab, js_distance(b, a), 1e-12);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0 + 1e-12);
    EXPECT_EQ(ab <= 1e-9, oracle::canonical({a}) == oracle::canonical({b}));
    EXPECT_LE(ab, js_distance(a, c) + js_distance(c, b) + 1e-9);
  }
}

TEST_F(DistributionProperties, RoundingIsIdempotent) {
  std::uniform_real_distribution<double> coord(-3, 3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t dim = 1 + trial % 3;
    std::vector<Atom> atoms;
    for (int i = 0; i < 4; ++i) {
      Vector v(dim);
      for (auto& x : v) x = coord(g);
      atoms.push_back({v, 0.25});
    }
    const auto d = ReturnDistribution(dim, atoms, 9);
    for (int decimals : {0, 1, 2, 3}) {
      const auto once = round_to_precision(d, decimals);
      EXPECT_EQ(round_to_precision(once, decimals), once);
    }
  }
}
