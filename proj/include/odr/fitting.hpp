#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "odr/cmaes.hpp"
#include "odr/dataset.hpp"
#include "odr/gaussian.hpp"
#include "odr/likelihood.hpp"

namespace odr {

struct FitConfig {
  ObjectiveKind kind = ObjectiveKind::kDropo;
  ObjectiveConfig objective;
  /// Bounds and initial point are derived from the ParamBox; the rest is used as given.
  CmaConfig cma;
};

struct FitResult {
  DiagonalGaussian fitted;
  std::optional<double> mse;  ///< ||mu - xi*||^2, only when the dataset carries xi*
  double objective_value = 0.0;
  FitConfig config;
  std::size_t dataset_size = 0;
  double wall_time = 0.0;  ///< seconds; not part of any serialized output
};

/// Search vector [mu_1..mu_d, log sigma_1..log sigma_d].
Vector encode(const DiagonalGaussian& g);
/// Inverse of encode, clamped into the box.
DiagonalGaussian decode(std::span<const double> point, const ParamBox& box);

/// Maximizes the chosen likelihood plus entropy_weight * entropy over the box with
/// CMA-ES started at the box center. entropy_weight = 0 is plain DROPO.
/// Throws InfeasibleRegion (carrying the offending transitions) when no candidate of a
/// generation has a finite objective.
FitResult fit(const OfflineDataset& dataset, const SimulatorFamily& family, const ParamBox& box,
              const FitConfig& config);

struct BallMass {
  double radius = 0.0;
  double monte_carlo = 0.0;
  double chebyshev = 0.0;
};

struct FitMetrics {
  double mse = 0.0;
  Vector per_dim_error;  ///< mu_hat - xi*
  std::vector<BallMass> ball_masses;
};

FitMetrics evaluate_fit(const FitResult& fit, std::span<const double> xi_star,
                        std::span<const double> radii, std::size_t n_mc = 100000,
                        std::uint64_t seed = 0);

double squared_error(std::span<const double> estimate, std::span<const double> truth);

}  // namespace odr
