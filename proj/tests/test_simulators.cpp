#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "odr/errors.hpp"
#include "odr/simulators.hpp"

namespace odr {
namespace {

using Rows = FiniteMdpClass::Rows;

// Two states, two actions; member 0 moves deterministically to state 1, member 1 to 0.
FiniteMdpClass one_hot_class() {
  const Rows to_one = {{{0.0, 1.0}, {0.0, 1.0}}, {{0.0, 1.0}, {0.0, 1.0}}};
  const Rows to_zero = {{{1.0, 0.0}, {1.0, 0.0}}, {{1.0, 0.0}, {1.0, 0.0}}};
  return FiniteMdpClass(2, 2, 2, {{0.0, 1.0}, {0.5, 0.5}}, 0, {to_one, to_zero}, 0);
}

double brute_force_separation(const FiniteMdpClass& c) {
  double best = 1e300;
  for (std::size_t i = 0; i < c.n_members(); ++i) {
    for (std::size_t j = 0; j < c.n_members(); ++j) {
      if (i == j) continue;
      for (std::size_t s = 0; s < c.n_states(); ++s) {
        for (std::size_t a = 0; a < c.n_actions(); ++a) {
          double d = 0.0;
          for (std::size_t k = 0; k < c.n_states(); ++k) d += std::abs(c.row(i, s, a)[k] - c.row(j, s, a)[k]);
          best = std::min(best, d);
        }
      }
    }
  }
  return best;
}

TEST(PointMass, SemiImplicitRegressionValue) {
  const PointMassSim sim = PointMassSim::mass_friction(0.1, {0.0, 0.0});
  const Vector next = sim.step(Vector{1.0, 0.0}, Vector{0.0, 0.0}, Vector{1.0}, 0);
  EXPECT_DOUBLE_EQ(next[1], 0.1);   // v' = v + dt * f / m
  EXPECT_DOUBLE_EQ(next[0], 0.01);  // x' = x + dt * v'
}

TEST(PointMass, NoiselessStepIsAFixedFunction) {
  const PointMassSim sim = PointMassSim::mass_friction(0.05, {0.0, 0.0}, 2.0);
  const Vector xi{1.7, 0.4};
  const Vector s{0.3, -0.2};
  const Vector a{0.9};
  const Vector first = sim.step(xi, s, a, 1);
  for (std::uint64_t seed = 2; seed < 20; ++seed) EXPECT_EQ(sim.step(xi, s, a, seed), first);
  EXPECT_EQ(first, sim.mean_next_state(xi, s, a));
}

TEST(PointMass, FrictionAndMassEnterAsExpected) {
  const PointMassSim sim = PointMassSim::mass_friction(0.1, {0.0, 0.0});
  // v' = 2 + 0.1 * (3 / 2 - 0.5 * 2) = 2.05; x' = 1 + 0.1 * 2.05
  const Vector next = sim.step(Vector{2.0, 0.5}, Vector{1.0, 2.0}, Vector{3.0}, 0);
  EXPECT_NEAR(next[1], 2.05, 1e-15);
  EXPECT_NEAR(next[0], 1.205, 1e-15);
}

TEST(PointMass, MassTaskUsesOneMassPerBody) {
  const PointMassSim sim = PointMassSim::masses(2, 0.1, Vector(4, 0.0), 0.0, 10.0);
  EXPECT_EQ(sim.param_dim(), 2u);
  EXPECT_EQ(sim.state_dim(), 4u);
  const Vector next = sim.step(Vector{2.0, 4.0}, Vector(4, 0.0), Vector{1.0, 1.0}, 0);
  EXPECT_DOUBLE_EQ(next[1], 0.05);
  EXPECT_DOUBLE_EQ(next[3], 0.025);
}

TEST(PointMass, InvalidParameterRejected) {
  const PointMassSim sim = PointMassSim::mass_friction(0.1, {0.1, 0.1});
  EXPECT_THROW(sim.step(Vector{0.0, 0.5}, Vector{0.0, 0.0}, Vector{1.0}, 0), InvalidParameter);
  EXPECT_THROW(sim.step(Vector{-1.0, 0.5}, Vector{0.0, 0.0}, Vector{1.0}, 0), InvalidParameter);
  EXPECT_THROW(sim.step(Vector{1.0, -0.5}, Vector{0.0, 0.0}, Vector{1.0}, 0), InvalidParameter);
  EXPECT_THROW(sim.step(Vector{1.0}, Vector{0.0, 0.0}, Vector{1.0}, 0), DimensionMismatch);
}

TEST(PointMass, DensityAtModeIsGaussianPeak) {
  const Vector noise{0.02, 0.3};
  const PointMassSim sim = PointMassSim::mass_friction(0.1, noise);
  const Vector xi{1.2, 0.3}, s{0.5, -0.1}, a{0.7};
  const Vector mode = sim.mean_next_state(xi, s, a);
  double expected = 1.0;
  for (double n : noise) expected *= 1.0 / std::sqrt(2.0 * std::numbers::pi * n * n);
  EXPECT_NEAR(sim.transition_density(xi, s, a, mode), expected, 1e-9 * expected);
  EXPECT_LE(sim.transition_density(xi, s, a, mode), sim.density_bound() * (1 + 1e-12));
}

TEST(PointMass, DensityIntegratesToOne) {
  const PointMassSim sim = PointMassSim::mass_friction(0.1, {0.1, 0.2});
  const Vector xi{1.0, 0.2}, s{0.0, 0.4}, a{-0.3};
  const Vector mode = sim.mean_next_state(xi, s, a);
  // 2-D midpoint rule over +-8 std.
  const int n = 400;
  const double hx = 16 * 0.1 / n, hv = 16 * 0.2 / n;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Vector x{mode[0] - 8 * 0.1 + (i + 0.5) * hx, mode[1] - 8 * 0.2 + (j + 0.5) * hv};
      total += sim.transition_density(xi, s, a, x) * hx * hv;
    }
  }
  EXPECT_NEAR(total, 1.0, 1e-6);
}

TEST(PointMass, NoiselessHasNoDensity) {
  const PointMassSim sim = PointMassSim::mass_friction(0.1, {0.0, 0.0});
  EXPECT_FALSE(sim.density_available());
  EXPECT_THROW(sim.log_transition_density(Vector{1.0, 0.0}, Vector{0.0, 0.0}, Vector{0.0}, Vector{0.0, 0.0}),
               DensityUnavailable);
}

TEST(FiniteClass, OneHotRowGivesUnitSuccessor) {
  const FiniteMdpClass c = one_hot_class();
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    EXPECT_EQ(c.step(Vector{0.0}, Vector{0.0}, Vector{1.0}, seed), Vector{1.0});
    EXPECT_EQ(c.step(Vector{1.0}, Vector{1.0}, Vector{0.0}, seed), Vector{0.0});
  }
}

TEST(FiniteClass, DensityIsTableLookupAtMembers) {
  const FiniteMdpClass c = generate_finite_class({3, 2, 3, 3, 0.3, 1, 100000}, 17);
  for (std::size_t m = 0; m < 3; ++m) {
    for (std::size_t s = 0; s < 3; ++s) {
      for (std::size_t a = 0; a < 2; ++a) {
        double sum = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
          const double p = c.transition_density(Vector{double(m)}, Vector{double(s)}, Vector{double(a)},
                                                Vector{double(k)});
          EXPECT_DOUBLE_EQ(p, c.row(m, s, a)[k]);
          sum += p;
        }
        EXPECT_NEAR(sum, 1.0, 1e-12);
      }
    }
  }
}

TEST(FiniteClass, EmpiricalFrequenciesMatchRow) {
  const FiniteMdpClass c = generate_finite_class({3, 2, 3, 3, 0.3, 0, 100000}, 5);
  const std::size_t n = 100000;
  const Vector& row = c.row(2, 1, 1);
  std::vector<double> counts(3, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    counts[static_cast<std::size_t>(c.step(Vector{2.0}, Vector{1.0}, Vector{1.0}, derive_seed(77, "t", i))[0])] += 1;
  }
  for (std::size_t k = 0; k < 3; ++k) {
    const double p = row[k];
    const double se = std::sqrt(p * (1 - p) / static_cast<double>(n));
    EXPECT_NEAR(counts[k] / static_cast<double>(n), p, 3 * se) << "next state " << k;
  }
}

TEST(FiniteClass, RejectsBadRowsAndRewards) {
  const Rows bad = {{{0.5, 0.4}, {0.0, 1.0}}, {{0.0, 1.0}, {0.0, 1.0}}};
  EXPECT_THROW(FiniteMdpClass(2, 2, 1, {{0.0, 1.0}, {0.0, 1.0}}, 0, {bad}, 0), InvalidParameter);
  const Rows ok = {{{0.5, 0.5}, {0.0, 1.0}}, {{0.0, 1.0}, {0.0, 1.0}}};
  EXPECT_THROW(FiniteMdpClass(2, 2, 1, {{0.0, 1.5}, {0.0, 1.0}}, 0, {ok}, 0), InvalidParameter);
  EXPECT_THROW(FiniteMdpClass(2, 2, 1, {{0.0, 1.0}, {0.0, 1.0}}, 0, {ok}, 3), OutOfRange);
}

TEST(Separation, IdenticalMembersAreZero) {
  const FiniteMdpClass base = generate_finite_class({3, 2, 2, 2, 0.0, 0, 10}, 3);
  const FiniteMdpClass twin(3, 2, 2, base.reward(), 0, {base.transitions()[0], base.transitions()[0]}, 0);
  EXPECT_EQ(l1_separation(twin), 0.0);
}

TEST(Separation, DisjointOneHotsGiveTwo) {
  EXPECT_DOUBLE_EQ(l1_separation(one_hot_class()), 2.0);
  // Same pair but with one (s, a) row shared: the minimum drops to zero.
  Rows shared = one_hot_class().transitions()[1];
  shared[1][1] = {0.0, 1.0};
  const FiniteMdpClass partial(2, 2, 2, {{0.0, 1.0}, {0.5, 0.5}}, 0, {one_hot_class().transitions()[0], shared}, 0);
  EXPECT_EQ(l1_separation(partial), 0.0);
}

TEST(Separation, MatchesBruteForceAndIsSymmetric) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const FiniteMdpClass c = generate_finite_class({3, 2, 3, 4, 0.0, 0, 10}, seed);
    EXPECT_DOUBLE_EQ(l1_separation(c), brute_force_separation(c));
    auto members = c.transitions();
    std::reverse(members.begin(), members.end());
    const FiniteMdpClass reversed(3, 2, 3, c.reward(), 0, members, 0);
    EXPECT_DOUBLE_EQ(l1_separation(reversed), l1_separation(c));
  }
}

TEST(Separation, InvariantUnderStateRelabeling) {
  const FiniteMdpClass c = generate_finite_class({3, 2, 3, 3, 0.0, 0, 10}, 8);
  const std::vector<std::size_t> perm{2, 0, 1};  // new index of old state
  std::vector<Rows> members;
  for (const Rows& rows : c.transitions()) {
    Rows out(3, std::vector<Vector>(2, Vector(3)));
    for (std::size_t s = 0; s < 3; ++s)
      for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t k = 0; k < 3; ++k) out[perm[s]][a][perm[k]] = rows[s][a][k];
    members.push_back(out);
  }
  std::vector<Vector> reward(3);
  for (std::size_t s = 0; s < 3; ++s) reward[perm[s]] = c.reward()[s];
  const FiniteMdpClass relabeled(3, 2, 3, reward, perm[0], members, 0);
  EXPECT_NEAR(l1_separation(relabeled), l1_separation(c), 1e-15);
}

TEST(Generate, HonoursSpecAndIsDeterministic) {
  const FiniteClassSpec spec{3, 2, 3, 3, 0.3, 2, 100000};
  const FiniteMdpClass a = generate_finite_class(spec, 42);
  const FiniteMdpClass b = generate_finite_class(spec, 42);
  EXPECT_EQ(a.transitions(), b.transitions());
  EXPECT_EQ(a.reward(), b.reward());
  EXPECT_GE(l1_separation(a), 0.3);
  EXPECT_EQ(a.true_index(), 2u);
  for (const auto& r : a.reward())
    for (double v : r) EXPECT_TRUE(v >= 0.0 && v <= 1.0);
}

TEST(Generate, ImpossibleSeparationThrows) {
  EXPECT_THROW(generate_finite_class({2, 1, 1, 3, 2.5, 0, 50}, 1), OutOfRange);
}

TEST(MixtureWeights, PointMassGivesInterpolationWeights) {
  const FiniteMdpClass c = generate_finite_class({3, 2, 3, 4, 0.0, 0, 10}, 1);
  for (double xi : {0.0, 1.0, 2.0, 3.0, 0.25, 2.6, -1.0, 7.0}) {
    const Vector w = c.mixture_weights(DiagonalGaussian({xi}, {0.0}));
    const Vector expected = c.interpolation_weights(xi);
    for (std::size_t m = 0; m < 4; ++m) EXPECT_NEAR(w[m], expected[m], 1e-12) << "xi " << xi;
  }
  EXPECT_EQ(c.interpolation_weights(2.0), (Vector{0.0, 0.0, 1.0, 0.0}));
}

TEST(MixtureWeights, ClosedFormMatchesMonteCarlo) {
  const FiniteMdpClass c = generate_finite_class({3, 2, 3, 4, 0.0, 0, 10}, 1);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> z;
  for (const auto& [mu, sigma] : std::vector<std::pair<double, double>>{{1.0, 0.3}, {0.2, 1.5}, {2.9, 0.7}, {-0.5, 0.4}}) {
    const std::size_t n = 200000;
    Vector mc(4, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const Vector w = c.interpolation_weights(mu + sigma * z(rng));
      for (std::size_t m = 0; m < 4; ++m) mc[m] += w[m] / static_cast<double>(n);
    }
    const Vector w = c.mixture_weights(DiagonalGaussian({mu}, {sigma}));
    double total = 0.0;
    for (std::size_t m = 0; m < 4; ++m) {
      EXPECT_NEAR(w[m], mc[m], 4e-3) << "mu " << mu << " sigma " << sigma << " member " << m;
      total += w[m];
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Positivity, TrueDataTightBoxIsPositive) {
  const PointMassSim sim = PointMassSim::mass_friction(0.1, {0.05, 0.05});
  std::vector<Transition> data;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const Vector s{0.1 * double(i % 5), -0.2};
    const Vector a{0.5};
    data.push_back({s, a, sim.step(Vector{1.0, 0.5}, s, a, i)});
  }
  const ParamBox box = ParamBox::around(Vector{1.0, 0.5}, 0.05, 1e-4, 0.05);
  const PositivityReport r = check_mixture_positivity(sim, data, box, 3, 10, 4);
  EXPECT_GT(r.c_hat, 0.0);
  EXPECT_FALSE(r.warning);
}

TEST(Positivity, ImpossibleTransitionGivesZero) {
  // Both members move 0 -> 1 under action 0, so an observed 0 -> 0 has zero density for
  // every parameter in the box.
  const Rows m0 = {{{0.0, 1.0}, {0.5, 0.5}}, {{1.0, 0.0}, {1.0, 0.0}}};
  const Rows m1 = {{{0.0, 1.0}, {1.0, 0.0}}, {{0.0, 1.0}, {1.0, 0.0}}};
  const FiniteMdpClass c(2, 2, 2, {{0.0, 1.0}, {0.5, 0.5}}, 0, {m0, m1}, 0);
  const std::vector<Transition> data{{{1.0}, {0.0}, {0.0}}, {{0.0}, {0.0}, {0.0}}};
  const PositivityReport r = check_mixture_positivity(c, data, ParamBox({0.0}, {1.0}, 0.01, 1.0), 3, 5, 1);
  EXPECT_EQ(r.c_hat, 0.0);
  EXPECT_TRUE(r.warning);
  EXPECT_EQ(r.argmin_transition, 1u);
}

TEST(Positivity, SinglePointGridReducesToMixtureDensity) {
  const PointMassSim sim = PointMassSim::mass_friction(0.1, {0.05, 0.05});
  const Transition x{{0.2, 0.1}, {0.3}, {0.21, 0.12}};
  const ParamBox box(Vector{0.5, 0.0}, Vector{1.5, 1.0}, 0.01, 0.5);
  const std::uint64_t seed = 31;
  const PositivityReport r = check_mixture_positivity(sim, std::vector<Transition>{x}, box, 1, 10, seed);
  const DiagonalGaussian g(box.center(), Vector(2, box.sigma_floor));
  EXPECT_DOUBLE_EQ(r.c_hat, std::exp(mixture_log_density(sim, g, x, 10, xi_noise_seed(seed, x))));
}

TEST(MixtureDensity, DegenerateGaussianIsPlainDensity) {
  const PointMassSim sim = PointMassSim::mass_friction(0.1, {0.05, 0.05});
  const Transition x{{0.2, 0.1}, {0.3}, {0.21, 0.12}};
  const Vector xi{1.1, 0.4};
  const double direct = sim.log_transition_density(xi, x.s, x.a, x.s_next);
  for (std::size_t k : {1u, 7u, 50u}) {
    EXPECT_NEAR(mixture_log_density(sim, DiagonalGaussian::point_mass(xi), x, k, 3), direct, 1e-12);
  }
}

}  // namespace
}  // namespace odr
