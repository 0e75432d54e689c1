#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "odr/cmaes.hpp"
#include "odr/errors.hpp"

namespace odr {
namespace {

double neg_sphere(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return -s;
}

CmaConfig box_config(std::size_t d, double lo, double hi, std::size_t iterations, std::uint64_t seed) {
  CmaConfig c;
  c.lower = Vector(d, lo);
  c.upper = Vector(d, hi);
  c.iterations = iterations;
  c.seed = seed;
  return c;
}

double norm(std::span<const double> x) { return std::sqrt(-neg_sphere(x)); }

TEST(Cmaes, SphereFourDimensions) {
  const OptimResult r = cma_maximize(neg_sphere, box_config(4, -5, 5, 200, 1));
  EXPECT_LT(norm(r.best_point), 1e-3);
  EXPECT_EQ(r.history.size(), 200u);
  EXPECT_EQ(r.evaluations, 200u * 10u);
}

TEST(Cmaes, SphereEightDimensions) {
  const OptimResult r = cma_maximize(neg_sphere, box_config(8, -5, 5, 200, 2));
  EXPECT_GT(r.best_value, -1e-6);
}

TEST(Cmaes, OneDimensionalQuadratic) {
  const Objective f = [](std::span<const double> x) { return -(x[0] - 2) * (x[0] - 2); };
  EXPECT_NEAR(cma_maximize(f, box_config(1, 0, 5, 100, 3)).best_point[0], 2.0, 1e-4);
}

TEST(Cmaes, OptimumOutsideBoxLandsOnBoundary) {
  const Objective f = [](std::span<const double> x) { return -(x[0] - 2) * (x[0] - 2); };
  const OptimResult r = cma_maximize(f, box_config(1, 3, 5, 50, 3));
  EXPECT_EQ(r.best_point[0], 3.0);
  EXPECT_EQ(r.best_value, -1.0);
}

TEST(Cmaes, CandidatesStayInsideBox) {
  const Vector lo{-1.0, 0.0, 10.0}, hi{1.0, 0.5, 20.0};
  CmaConfig c;
  c.lower = lo;
  c.upper = hi;
  c.iterations = 40;
  c.seed = 5;
  bool inside = true;
  const Objective f = [&](std::span<const double> x) {
    for (std::size_t i = 0; i < 3; ++i) inside = inside && x[i] >= lo[i] && x[i] <= hi[i];
    return x[0] + x[1] - x[2];
  };
  const OptimResult r = cma_maximize(f, c);
  EXPECT_TRUE(inside);
  EXPECT_EQ(r.best_point, (Vector{1.0, 0.5, 10.0}));
}

TEST(Cmaes, DeterministicInSeed) {
  const CmaConfig c = box_config(3, -2, 2, 30, 9);
  const OptimResult a = cma_maximize(neg_sphere, c);
  const OptimResult b = cma_maximize(neg_sphere, c);
  EXPECT_EQ(a.best_point, b.best_point);
  EXPECT_EQ(a.best_value, b.best_value);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].generation_best, b.history[i].generation_best);
    EXPECT_EQ(a.history[i].step_size, b.history[i].step_size);
  }
  EXPECT_NE(cma_maximize(neg_sphere, box_config(3, -2, 2, 30, 10)).best_point, a.best_point);
}

TEST(Cmaes, BestSoFarIsNondecreasing) {
  const Objective rastrigin = [](std::span<const double> x) {
    double s = 10.0 * x.size();
    for (double v : x) s += v * v - 10 * std::cos(2 * std::numbers::pi * v);
    return -s;
  };
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const OptimResult r = cma_maximize(rastrigin, box_config(5, -5, 5, 80, seed));
    for (std::size_t i = 1; i < r.history.size(); ++i) {
      EXPECT_GE(r.history[i].best_value, r.history[i - 1].best_value);
      EXPECT_GE(r.history[i].best_value, r.history[i].generation_best);
    }
    EXPECT_EQ(r.history.back().best_value, r.best_value);
  }
}

TEST(Cmaes, InvariantUnderMonotoneTransform) {
  const Objective f = [](std::span<const double> x) {
    return -(x[0] - 0.3) * (x[0] - 0.3) - 4 * (x[1] + 1) * (x[1] + 1) - std::abs(x[2]);
  };
  const Objective g = [&](std::span<const double> x) { return std::exp(f(x)); };
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const CmaConfig c = box_config(3, -3, 3, 40, seed);
    EXPECT_EQ(cma_maximize(f, c).best_point, cma_maximize(g, c).best_point) << seed;
  }
}

TEST(Cmaes, NanObjectiveIsAnError) {
  const Objective f = [](std::span<const double>) { return std::numeric_limits<double>::quiet_NaN(); };
  EXPECT_THROW(cma_maximize(f, box_config(2, -1, 1, 5, 1)), ObjectiveNaN);
}

TEST(Cmaes, AllInfeasibleGenerationIsAnError) {
  const Objective f = [](std::span<const double>) { return -std::numeric_limits<double>::infinity(); };
  EXPECT_THROW(cma_maximize(f, box_config(2, -1, 1, 5, 1)), InfeasibleRegion);
}

TEST(Cmaes, PartiallyInfeasibleRegionIsAvoided) {
  const Objective f = [](std::span<const double> x) {
    return x[0] < 0 ? -std::numeric_limits<double>::infinity() : -(x[0] - 0.5) * (x[0] - 0.5) - x[1] * x[1];
  };
  const OptimResult r = cma_maximize(f, box_config(2, -1, 1, 60, 4));
  EXPECT_NEAR(r.best_point[0], 0.5, 1e-4);
}

TEST(Cmaes, RejectsBadConfig) {
  CmaConfig c = box_config(2, -1, 1, 5, 1);
  c.upper[1] = -2;
  EXPECT_THROW(cma_maximize(neg_sphere, c), InvalidParameter);
  c = box_config(2, -1, 1, 5, 1);
  c.population = 1;
  EXPECT_THROW(cma_maximize(neg_sphere, c), InvalidParameter);
  c = box_config(2, -1, 1, 5, 1);
  c.initial_point = Vector{0.0};
  EXPECT_THROW(cma_maximize(neg_sphere, c), DimensionMismatch);
}

}  // namespace
}  // namespace odr
