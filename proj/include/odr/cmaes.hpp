#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "odr/gaussian.hpp"

namespace odr {

struct CmaConfig {
  std::size_t population = 10;  ///< lambda
  std::size_t iterations = 20;
  /// Initial step size as a fraction of each coordinate's range.
  double initial_step = 0.3;
  Vector lower;
  Vector upper;
  /// Defaults to the box center.
  std::optional<Vector> initial_point;
  std::uint64_t seed = 0;
};

struct CmaIteration {
  double best_value = 0.0;  ///< best so far
  double generation_best = 0.0;
  double step_size = 0.0;  ///< sigma in box-normalized coordinates
};

struct OptimResult {
  Vector best_point;
  double best_value = 0.0;
  std::vector<CmaIteration> history;
  std::size_t evaluations = 0;
};

/// Objective to be maximized; may return -inf for infeasible points.
using Objective = std::function<double(std::span<const double>)>;

/// (mu/mu_w, lambda)-CMA-ES maximizer with rank-one and rank-mu covariance updates and
/// cumulative step-size adaptation. Search happens in box-normalized coordinates; every
/// candidate is clipped to the box and the clipped point is both evaluated and used in
/// the update. Deterministic in config.seed.
///
/// Throws ObjectiveNaN if the objective returns NaN, InfeasibleRegion if a whole
/// generation scores -inf.
OptimResult cma_maximize(const Objective& objective, const CmaConfig& config);

}  // namespace odr
