#include "odr/fitting.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "odr/errors.hpp"

namespace odr {

Vector encode(const DiagonalGaussian& g) {
  Vector point(2 * g.dim());
  for (std::size_t i = 0; i < g.dim(); ++i) {
    point[i] = g.mu()[i];
    point[g.dim() + i] = std::log(g.sigma()[i]);
  }
  return point;
}

DiagonalGaussian decode(std::span<const double> point, const ParamBox& box) {
  const std::size_t d = box.dim();
  if (point.size() != 2 * d) throw DimensionMismatch("encoded point must have 2d entries");
  Vector mu(d), sigma(d);
  for (std::size_t i = 0; i < d; ++i) {
    mu[i] = std::clamp(point[i], box.lo[i], box.hi[i]);
    // Compare in log space so points clipped to a bound decode to the bound exactly.
    const double log_sigma = point[d + i];
    if (log_sigma <= std::log(box.sigma_floor)) {
      sigma[i] = box.sigma_floor;
    } else if (log_sigma >= std::log(box.sigma_max)) {
      sigma[i] = box.sigma_max;
    } else {
      sigma[i] = std::clamp(std::exp(log_sigma), box.sigma_floor, box.sigma_max);
    }
  }
  return DiagonalGaussian(std::move(mu), std::move(sigma));
}

double squared_error(std::span<const double> estimate, std::span<const double> truth) {
  if (estimate.size() != truth.size()) throw DimensionMismatch("squared_error");
  double s = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) s += (estimate[i] - truth[i]) * (estimate[i] - truth[i]);
  return s;
}

FitResult fit(const OfflineDataset& dataset, const SimulatorFamily& family, const ParamBox& box,
              const FitConfig& config) {
  if (dataset.empty()) throw InvalidParameter("cannot fit an empty dataset");
  if (box.dim() != family.param_dim()) throw DimensionMismatch("box/family parameter dimension");
  const auto start = std::chrono::steady_clock::now();
  const std::size_t d = box.dim();

  CmaConfig cma = config.cma;
  cma.lower.assign(2 * d, 0.0);
  cma.upper.assign(2 * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    cma.lower[i] = box.lo[i];
    cma.upper[i] = box.hi[i];
    cma.lower[d + i] = std::log(box.sigma_floor);
    cma.upper[d + i] = std::log(box.sigma_max);
  }
  cma.initial_point.reset();

  const auto rows = dataset.view();
  const ObjectiveEvaluator evaluator(config.kind, rows, family, config.objective);
  auto objective = [&](std::span<const double> point) { return evaluator(decode(point, box)); };

  OptimResult optim;
  try {
    optim = cma_maximize(objective, cma);
  } catch (const InfeasibleRegion& e) {
    std::vector<std::size_t> violations;
    if (family.density_available()) {
      DiagonalGaussian center(box.center(), Vector(d, box.sigma_floor));
      violations = exact_mixture_loglik_detail(rows, family, center, config.objective).zero_mixture;
    }
    throw InfeasibleRegion(std::string(e.what()) + "; " + std::to_string(violations.size()) +
                               " transitions have zero mixture density at the box center",
                           std::move(violations));
  }

  FitResult result;
  result.fitted = decode(optim.best_point, box);
  result.objective_value = optim.best_value;
  result.config = config;
  result.dataset_size = dataset.size();
  if (dataset.meta().xi_star && dataset.meta().xi_star->size() == d) {
    result.mse = squared_error(result.fitted.mu(), *dataset.meta().xi_star);
  }
  result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

FitMetrics evaluate_fit(const FitResult& fit, std::span<const double> xi_star,
                        std::span<const double> radii, std::size_t n_mc, std::uint64_t seed) {
  const DiagonalGaussian& g = fit.fitted;
  if (xi_star.size() != g.dim()) throw DimensionMismatch("evaluate_fit truth dimension");
  FitMetrics m;
  m.mse = squared_error(g.mu(), xi_star);
  m.per_dim_error.resize(g.dim());
  for (std::size_t i = 0; i < g.dim(); ++i) m.per_dim_error[i] = g.mu()[i] - xi_star[i];
  for (std::size_t r = 0; r < radii.size(); ++r) {
    BallMass b;
    b.radius = radii[r];
    // One sample set for every radius keeps the estimates monotone in the radius.
    b.monte_carlo = ball_mass_mc(g, xi_star, radii[r], n_mc, derive_seed(seed, "ball-mass"));
    b.chebyshev = chebyshev_ball_lower_bound(g, xi_star, radii[r]);
    m.ball_masses.push_back(b);
  }
  return m;
}

}  // namespace odr
