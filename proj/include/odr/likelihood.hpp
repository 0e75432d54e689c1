#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "odr/gaussian.hpp"
#include "odr/simulators.hpp"
#include "odr/transition.hpp"

namespace odr {

enum class ObjectiveKind {
  kExactMixture,  ///< (1/N) sum_i log[(1/K) sum_k p_{xi_k}(s'_i | s_i, a_i)]
  kDropo,         ///< sum_t log N(s_{t+1} | rollout mean, rollout covariance + eps I)
};

/// How the rollout-based likelihood forms its per-transition covariance.
enum class CovarianceEstimator {
  /// Diagonal sample variance of the K simulated next states (the algorithm's prose).
  kSampleSpread,
  /// K/(K-1) * (mean - observed)^2 per component (the displayed covariance equation).
  kMeanResidual,
};

std::string to_string(ObjectiveKind kind);
ObjectiveKind objective_kind_from_string(const std::string& name);
std::string to_string(CovarianceEstimator estimator);
CovarianceEstimator covariance_estimator_from_string(const std::string& name);

struct ObjectiveConfig {
  std::size_t n_xi_samples = 10;   ///< K
  double cov_regularizer = 1e-5;   ///< eps added to every rollout variance
  double entropy_weight = 0.002;   ///< beta
  std::uint64_t seed = 0;          ///< common-random-number root
  CovarianceEstimator covariance = CovarianceEstimator::kSampleSpread;
};

struct MixtureLoglik {
  double value = 0.0;  ///< -inf when some transition has zero mixture density
  std::vector<std::size_t> zero_mixture;  ///< indices of those transitions
};

/// Monte Carlo estimate of L_N(phi). Parameter samples for a transition come from a
/// stream keyed by (config.seed, transition contents), so the value is a deterministic
/// function of g and does not depend on the row order.
MixtureLoglik exact_mixture_loglik_detail(std::span<const Transition> dataset,
                                          const SimulatorFamily& family, const DiagonalGaussian& g,
                                          const ObjectiveConfig& config);
double exact_mixture_loglik(std::span<const Transition> dataset, const SimulatorFamily& family,
                            const DiagonalGaussian& g, const ObjectiveConfig& config);

/// Rollout likelihood: per transition, K simulator resets to s_t with parameters drawn
/// from g, scored by a diagonal Gaussian fitted to the K next states. Summed, not averaged.
double dropo_loglik(std::span<const Transition> dataset, const SimulatorFamily& family,
                    const DiagonalGaussian& g, const ObjectiveConfig& config);

/// Base objective of the given kind plus beta * entropy(g).
double edropo_objective(ObjectiveKind kind, std::span<const Transition> dataset,
                        const SimulatorFamily& family, const DiagonalGaussian& g,
                        const ObjectiveConfig& config);

/// Precomputes the common random numbers of one objective so repeated evaluations (as
/// in a CMA-ES run) only pay for the densities or rollouts. Results equal the free
/// functions above. Holds references to the dataset and family.
class ObjectiveEvaluator {
 public:
  ObjectiveEvaluator(ObjectiveKind kind, std::span<const Transition> dataset, const SimulatorFamily& family,
                     ObjectiveConfig config);

  MixtureLoglik exact_detail(const DiagonalGaussian& g) const;
  /// Likelihood term only.
  double likelihood(const DiagonalGaussian& g) const;
  /// Likelihood plus entropy_weight * entropy(g).
  double operator()(const DiagonalGaussian& g) const;

 private:
  double dropo(const DiagonalGaussian& g) const;
  std::span<const double> draws(std::size_t t) const;

  ObjectiveKind kind_;
  std::span<const Transition> dataset_;
  const SimulatorFamily& family_;
  ObjectiveConfig config_;
  std::vector<double> draws_;  ///< [transition][sample][dim] standard normals
  std::vector<std::uint64_t> step_seeds_;
};

/// Distribution over (s, a) pairs, indexed [state][action].
using SaDistribution = std::vector<Vector>;

SaDistribution uniform_sa_distribution(const FiniteMdpClass& mdp_class);

/// Exact L(phi) = sum_{s,a} w(s,a) sum_{s'} P_true(s'|s,a) log q_phi(s'|s,a) with
/// q_phi = sum_m weights[m] P_m. Returns -inf when q vanishes on the true support.
double population_loglik_exact(const FiniteMdpClass& mdp_class, const SaDistribution& sa,
                               std::span<const double> member_weights);
double population_loglik_exact(const FiniteMdpClass& mdp_class, const SaDistribution& sa,
                               const DiagonalGaussian& g);

/// L_N(phi) with the exact mixture q_phi (no Monte Carlo), for finite classes.
double empirical_loglik_exact(const FiniteMdpClass& mdp_class, std::span<const Transition> dataset,
                              const DiagonalGaussian& g);

}  // namespace odr
