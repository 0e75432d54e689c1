#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "odr/dataset.hpp"
#include "odr/fitting.hpp"
#include "odr/likelihood.hpp"

namespace odr {

struct SweepConfig {
  std::vector<std::size_t> sizes;  ///< strictly increasing dataset sizes N
  std::size_t trials = 1;
  Vector xi_star;
  ParamBox box;
  std::vector<double> radii;  ///< epsilon list for ball masses
  FitConfig fit;              ///< seeds inside are replaced per cell
  std::size_t n_mc = 100000;
  std::uint64_t seed = 0;
  std::size_t threads = 0;  ///< 0: ODR_THREADS or hardware concurrency
};

struct SweepCell {
  std::size_t n = 0;
  std::size_t trial = 0;
  std::optional<DiagonalGaussian> fitted;
  double mu_error = 0.0;     ///< ||mu_hat - xi*||
  double sigma_norm = 0.0;   ///< ||sigma_hat||
  double phi_error = 0.0;    ///< ||(mu_hat, sigma_hat) - (xi*, 0)||
  std::vector<BallMass> ball_masses;  ///< aligned with SweepConfig::radii
  std::string error;          ///< non-empty when the fit failed
};

struct Quartiles {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

/// Linear-interpolation quartiles of the finite values.
Quartiles quartiles(std::vector<double> values);

struct SweepSummary {
  std::size_t n = 0;
  Quartiles mu_error;
  Quartiles sigma_norm;
  std::vector<double> median_ball_mass;  ///< per radius
  std::vector<double> miss_fraction;     ///< per radius: fraction of trials with mu_error >= radius
  std::size_t failures = 0;
};

struct SweepReport {
  SweepConfig config;
  std::vector<SweepCell> cells;  ///< ordered by (n, trial)
  std::vector<SweepSummary> summaries;
};

/// For each (N, trial): collect N i.i.d. transitions from `data_family` at xi*, fit the
/// exact-mixture objective on `model_family`, record errors and ball masses. Cells run in
/// parallel with seeds derived from (seed, N, trial); fit failures are recorded per cell.
SweepReport consistency_sweep(const SimulatorFamily& data_family, const SimulatorFamily& model_family,
                              const BehaviorPolicy& policy, const SweepConfig& config);
SweepReport consistency_sweep(const SimulatorFamily& family, const BehaviorPolicy& policy,
                              const SweepConfig& config);

std::vector<SweepSummary> summarize(const std::vector<SweepCell>& cells,
                                    std::span<const std::size_t> sizes, std::span<const double> radii);

/// Smallest N whose median ball mass at `radius` is >= alpha; nullopt when never reached.
/// A nondegenerate Gaussian never has mass exactly 1, so its estimate is capped below 1.
/// Throws OutOfRange if `radius` is not one of the sweep's radii.
std::optional<std::size_t> informativeness_curve(const SweepReport& report, double alpha, double radius);

/// ceil(4^d (diameter * L / epsilon)^d); requires 0 < epsilon < 2 * diameter * L.
std::uint64_t covering_bound(std::size_t d, double diameter, double lipschitz, double epsilon);

/// Size of a maximal radius-separated set built greedily over a grid on the cube
/// [0, diameter / sqrt(d)]^d (a set of the given diameter).
std::size_t greedy_net_size(std::size_t d, double diameter, double radius,
                            std::size_t grid_points_per_dim = 200);

/// 2 exp(-N eps^2 / (2 m_tilde^2)).
double hoeffding_deviation_bound(std::size_t n, double epsilon, double m_tilde);

struct DeviationExperiment {
  double population = 0.0;  ///< exact L(phi)
  double m_tilde = 0.0;     ///< max(|log M|, |log c|) with M = 1
  double frequency = 0.0;   ///< fraction of datasets with |L_N - L| >= epsilon
  double bound = 0.0;
};

/// Draws `n_datasets` i.i.d. datasets of size n from the true member (uniform (s, a)) and
/// measures how often the exact empirical log-likelihood deviates from L(phi) by epsilon.
DeviationExperiment hoeffding_experiment(const FiniteMdpClass& mdp_class, const DiagonalGaussian& g,
                                         std::size_t n, double epsilon, std::size_t n_datasets,
                                         std::uint64_t seed);

std::size_t worker_threads(std::size_t requested = 0);

}  // namespace odr
