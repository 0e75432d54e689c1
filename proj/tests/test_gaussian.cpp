#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "odr/errors.hpp"
#include "odr/gaussian.hpp"

namespace odr {
namespace {

const double kLn2Pi = std::log(2.0 * std::numbers::pi);

TEST(Entropy, ClosedFormValues) {
  EXPECT_NEAR(entropy(DiagonalGaussian({0.0}, {1.0})), 1.4189385332046727, 1e-12);
  EXPECT_NEAR(entropy(DiagonalGaussian({0.0, 0.0}, {1.0, 1.0})), 2.8378770664093453, 1e-12);
  EXPECT_NEAR(entropy(DiagonalGaussian({0.0, 0.0}, {1.0, 1.0})), 1.0 + kLn2Pi, 1e-12);
}

TEST(Entropy, ScalingSigmaByEAddsOne) {
  for (double s : {1e-6, 0.01, 0.3, 1.0, 17.0}) {
    const double h1 = entropy(DiagonalGaussian({0.0}, {s}));
    const double h2 = entropy(DiagonalGaussian({0.0}, {std::numbers::e * s}));
    EXPECT_NEAR(h2 - h1, 1.0, 1e-12) << "sigma " << s;
  }
}

TEST(Entropy, DependsOnSigmaOnly) {
  const DiagonalGaussian a({0.0, 0.0, 0.0}, {0.5, 1.5, 2.0});
  const DiagonalGaussian b({10.0, -3.0, 7.5}, {0.5, 1.5, 2.0});
  EXPECT_DOUBLE_EQ(entropy(a), entropy(b));
}

TEST(Entropy, StrictlyIncreasingInEachSigma) {
  const DiagonalGaussian base({0.0, 0.0}, {0.5, 0.5});
  EXPECT_LT(entropy(base), entropy(DiagonalGaussian({0.0, 0.0}, {0.6, 0.5})));
  EXPECT_LT(entropy(base), entropy(DiagonalGaussian({0.0, 0.0}, {0.5, 0.6})));
}

TEST(Entropy, DegenerateThrows) {
  EXPECT_THROW(entropy(DiagonalGaussian({0.0, 1.0}, {1.0, 0.0})), DegenerateDistribution);
}

TEST(Entropy, MatchesMonteCarloWithinThreeStandardErrors) {
  const std::vector<DiagonalGaussian> cases = {
      DiagonalGaussian({0.0}, {1.0}),
      DiagonalGaussian({2.0}, {0.05}),
      DiagonalGaussian({1.0, -1.0}, {0.3, 4.0}),
      DiagonalGaussian({0.0, 5.0, -2.0}, {1e-3, 1.0, 20.0}),
  };
  std::uint64_t seed = 11;
  for (const auto& g : cases) {
    const auto xs = sample(g, 100000, seed++);
    double sum = 0.0, sum_sq = 0.0;
    for (const auto& x : xs) {
      const double v = -log_density(g, x);
      sum += v;
      sum_sq += v * v;
    }
    const double n = static_cast<double>(xs.size());
    const double mean = sum / n;
    const double se = std::sqrt((sum_sq / n - mean * mean) / n);
    EXPECT_LE(std::abs(mean - entropy(g)), 3.0 * se) << "d=" << g.dim();
  }
}

TEST(LogDensity, HandValues) {
  EXPECT_NEAR(log_density(DiagonalGaussian({0.0}, {1.0}), Vector{0.0}), -0.5 * kLn2Pi, 1e-12);
  EXPECT_NEAR(log_density(DiagonalGaussian({0.0, 0.0}, {1.0, 2.0}), Vector{1.0, 2.0}),
              -kLn2Pi - std::log(2.0) - 1.0, 1e-12);
  EXPECT_NEAR(-kLn2Pi - std::log(2.0) - 1.0, -3.5310, 5e-5);
}

TEST(LogDensity, ModeAtMean) {
  const DiagonalGaussian g({0.3, -1.2}, {0.7, 0.2});
  const double at_mean = log_density(g, g.mu());
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  for (int i = 0; i < 200; ++i) {
    const Vector x{0.3 + n(rng), -1.2 + n(rng)};
    EXPECT_LE(log_density(g, x), at_mean);
  }
}

TEST(LogDensity, IntegratesToOneByQuadrature) {
  const DiagonalGaussian g({0.4}, {0.35});
  // Composite Simpson on mu +- 12 sigma.
  const double lo = 0.4 - 12 * 0.35, hi = 0.4 + 12 * 0.35;
  const int n = 4000;
  const double h = (hi - lo) / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * std::exp(log_density(g, Vector{lo + i * h}));
  }
  EXPECT_NEAR(s * h / 3.0, 1.0, 1e-3);
}

TEST(LogDensity, Errors) {
  EXPECT_THROW(log_density(DiagonalGaussian({0.0}, {1.0}), Vector{0.0, 1.0}), DimensionMismatch);
  EXPECT_THROW(log_density(DiagonalGaussian({0.0}, {0.0}), Vector{0.0}), DegenerateDistribution);
}

TEST(Sample, DegenerateRowsEqualMean) {
  const DiagonalGaussian g({1.5, -2.0}, {0.0, 0.0});
  for (const auto& row : sample(g, 50, 3)) EXPECT_EQ(row, g.mu());
}

TEST(Sample, DeterministicInSeed) {
  const DiagonalGaussian g({0.0, 1.0}, {1.0, 2.0});
  EXPECT_EQ(sample(g, 100, 42), sample(g, 100, 42));
  EXPECT_NE(sample(g, 100, 42), sample(g, 100, 43));
}

TEST(Sample, MeanWithinFiveStandardErrors) {
  const DiagonalGaussian g({3.0, -1.0}, {2.0, 0.1});
  const std::size_t n = 1000000;
  const auto xs = sample(g, n, 99);
  for (std::size_t d = 0; d < 2; ++d) {
    double m = 0.0;
    for (const auto& x : xs) m += x[d];
    m /= static_cast<double>(n);
    EXPECT_LE(std::abs(m - g.mu()[d]), 5.0 * g.sigma()[d] / std::sqrt(static_cast<double>(n)));
  }
}

TEST(BallMass, PointMasses) {
  const DiagonalGaussian at({1.0, 2.0}, {0.0, 0.0});
  EXPECT_EQ(ball_mass_mc(at, Vector{1.0, 2.0}, 1e-9, 100, 1), 1.0);
  EXPECT_EQ(ball_mass_mc(at, Vector{1.0, 3.5}, 1.0, 100, 1), 0.0);
}

TEST(BallMass, StandardNormalQuantile) {
  const double expected = std::erf(1.96 / std::sqrt(2.0));  // 0.9500042
  const std::size_t n = 200000;
  const double got = ball_mass_mc(DiagonalGaussian({0.0}, {1.0}), Vector{0.0}, 1.96, n, 7);
  const double se = std::sqrt(expected * (1 - expected) / static_cast<double>(n));
  EXPECT_NEAR(got, expected, 4.0 * se);
}

TEST(BallMass, NondecreasingInRadius) {
  const DiagonalGaussian g({0.1, -0.2}, {0.5, 0.3});
  double prev = 0.0;
  for (double r : {0.05, 0.1, 0.2, 0.4, 0.8, 1.6}) {
    const double m = ball_mass_mc(g, Vector{0.0, 0.0}, r, 20000, 123);
    EXPECT_GE(m, prev);
    prev = m;
  }
}

TEST(Chebyshev, HandValues) {
  EXPECT_EQ(chebyshev_ball_lower_bound(DiagonalGaussian({0.0}, {0.0}), Vector{0.0}, 0.5), 1.0);
  EXPECT_NEAR(chebyshev_ball_lower_bound(DiagonalGaussian({0.0}, {0.1}), Vector{0.0}, 1.0), 0.96, 1e-12);
  EXPECT_EQ(chebyshev_ball_lower_bound(DiagonalGaussian({0.5}, {0.01}), Vector{0.0}, 1.0), 0.0);
  EXPECT_EQ(chebyshev_ball_lower_bound(DiagonalGaussian({0.0}, {10.0}), Vector{0.0}, 1.0), 0.0);
}

TEST(Chebyshev, NeverExceedsMonteCarloMass) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t d = 1 + trial % 3;
    Vector mu(d), sigma(d), center(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      mu[i] = 0.2 * (u(rng) - 0.5);
      sigma[i] = 0.2 * u(rng);
    }
    const double radius = 0.05 + u(rng);
    const DiagonalGaussian g(mu, sigma);
    const std::size_t n = 20000;
    const double mc = ball_mass_mc(g, center, radius, n, 1000 + trial);
    const double se = std::sqrt(std::max(mc * (1 - mc), 1.0 / n) / static_cast<double>(n));
    EXPECT_LE(chebyshev_ball_lower_bound(g, center, radius), mc + 3.0 * se);
  }
}

TEST(ParamBoxTest, Validation) {
  EXPECT_THROW(ParamBox({1.0}, {1.0}, 1e-6, 1.0), InvalidParameter);
  EXPECT_THROW(ParamBox({0.0}, {1.0}, 0.0, 1.0), InvalidParameter);
  EXPECT_THROW(ParamBox({0.0}, {1.0}, 1.0, 0.5), InvalidParameter);
  EXPECT_THROW(ParamBox({0.0, 0.0}, {1.0}, 1e-6, 1.0), DimensionMismatch);
  const ParamBox box({0.0, 2.0}, {1.0, 4.0}, 1e-6, 1.0);
  EXPECT_EQ(box.center(), (Vector{0.5, 3.0}));
  const DiagonalGaussian clamped = box.clamp(DiagonalGaussian({-1.0, 5.0}, {0.0, 9.0}));
  EXPECT_EQ(clamped.mu(), (Vector{0.0, 4.0}));
  EXPECT_EQ(clamped.sigma(), (Vector{1e-6, 1.0}));
  EXPECT_TRUE(box.contains(DiagonalGaussian({0.5, 3.0}, {0.1, 0.1})));
  EXPECT_FALSE(box.contains(DiagonalGaussian({1.5, 3.0}, {0.1, 0.1})));
  EXPECT_FALSE(box.contains(DiagonalGaussian({0.5, 3.0}, {0.0, 0.1})));
}

TEST(DiagonalGaussianTest, RejectsNegativeSigmaAndMismatch) {
  EXPECT_THROW(DiagonalGaussian({0.0}, {-1.0}), InvalidParameter);
  EXPECT_THROW(DiagonalGaussian({0.0, 1.0}, {1.0}), DimensionMismatch);
  EXPECT_THROW(DiagonalGaussian({0.0}, {std::nan("")}), InvalidParameter);
}

}  // namespace
}  // namespace odr
