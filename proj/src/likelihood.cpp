#include "odr/likelihood.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "odr/errors.hpp"

namespace odr {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

std::size_t index_of(double v) { return static_cast<std::size_t>(v); }

double mixture_prob(const FiniteMdpClass& c, std::span<const double> weights, std::size_t s,
                    std::size_t a, std::size_t next) {
  double q = 0.0;
  for (std::size_t m = 0; m < c.n_members(); ++m) {
    if (weights[m] != 0.0) q += weights[m] * c.row(m, s, a)[next];
  }
  return q;
}

}  // namespace

std::string to_string(ObjectiveKind kind) {
  return kind == ObjectiveKind::kExactMixture ? "exact-mixture" : "dropo";
}

ObjectiveKind objective_kind_from_string(const std::string& name) {
  if (name == "exact-mixture" || name == "exact_mixture") return ObjectiveKind::kExactMixture;
  if (name == "dropo") return ObjectiveKind::kDropo;
  throw InvalidParameter("unknown objective kind: " + name);
}

std::string to_string(CovarianceEstimator estimator) {
  return estimator == CovarianceEstimator::kSampleSpread ? "sample-spread" : "mean-residual";
}

CovarianceEstimator covariance_estimator_from_string(const std::string& name) {
  if (name == "sample-spread") return CovarianceEstimator::kSampleSpread;
  if (name == "mean-residual") return CovarianceEstimator::kMeanResidual;
  throw InvalidParameter("unknown covariance estimator: " + name);
}

ObjectiveEvaluator::ObjectiveEvaluator(ObjectiveKind kind, std::span<const Transition> dataset,
                                       const SimulatorFamily& family, ObjectiveConfig config)
    : kind_(kind), dataset_(dataset), family_(family), config_(config) {
  if (dataset.empty()) throw InvalidParameter("empty dataset");
  if (config.n_xi_samples == 0) throw InvalidParameter("need at least one parameter sample");
  if (kind == ObjectiveKind::kExactMixture) {
    if (!family.density_available()) {
      throw DensityUnavailable("exact mixture likelihood needs transition densities");
    }
  } else {
    if (!family.supports_reset()) throw ResetUnsupported(family.id() + " cannot be reset to a state");
    if (config.n_xi_samples < 2) throw InvalidParameter("rollout likelihood needs K >= 2");
    if (!(config.cov_regularizer > 0.0)) throw InvalidParameter("covariance regularizer must be > 0");
  }
  const std::size_t n = dataset.size();
  const std::size_t k = config.n_xi_samples;
  const std::size_t d = family.param_dim();
  draws_.resize(n * k * d);
  for (std::size_t t = 0; t < n; ++t) {
    const std::span<double> row(draws_.data() + t * k * d, k * d);
    xi_standard_normals(xi_noise_seed(config.seed, dataset[t]), row);
  }
  if (kind == ObjectiveKind::kDropo) {
    step_seeds_.resize(n * k);
    for (std::size_t t = 0; t < n; ++t) {
      const std::uint64_t root = derive_seed(config.seed, "rollout-step", transition_key(dataset[t]));
      for (std::size_t j = 0; j < k; ++j) step_seeds_[t * k + j] = derive_seed(root, "k", j);
    }
  }
}

std::span<const double> ObjectiveEvaluator::draws(std::size_t t) const {
  const std::size_t row = config_.n_xi_samples * family_.param_dim();
  return {draws_.data() + t * row, row};
}

MixtureLoglik ObjectiveEvaluator::exact_detail(const DiagonalGaussian& g) const {
  if (!family_.density_available()) {
    throw DensityUnavailable("exact mixture likelihood needs transition densities");
  }
  if (g.dim() != family_.param_dim()) throw DimensionMismatch("gaussian/family parameter dimension");
  MixtureLoglik out;
  double total = 0.0;
  for (std::size_t i = 0; i < dataset_.size(); ++i) {
    const double lq = mixture_log_density(family_, g, dataset_[i], draws(i));
    if (lq == kNegInf) out.zero_mixture.push_back(i);
    total += lq;
  }
  out.value = out.zero_mixture.empty() ? total / static_cast<double>(dataset_.size()) : kNegInf;
  return out;
}

double ObjectiveEvaluator::dropo(const DiagonalGaussian& g) const {
  if (g.dim() != family_.param_dim()) throw DimensionMismatch("gaussian/family parameter dimension");
  const std::size_t k_samples = config_.n_xi_samples;
  const double kd = static_cast<double>(k_samples);
  const std::size_t pd = g.dim();
  double total = 0.0;
  Vector xi(pd);
  std::vector<Vector> rollouts(k_samples);
  for (std::size_t t = 0; t < dataset_.size(); ++t) {
    const Transition& x = dataset_[t];
    const auto z = draws(t);
    for (std::size_t k = 0; k < k_samples; ++k) {
      for (std::size_t i = 0; i < pd; ++i) xi[i] = g.mu()[i] + g.sigma()[i] * z[k * pd + i];
      rollouts[k] = family_.step(family_.project_param(xi), x.s, x.a, step_seeds_[t * k_samples + k]);
    }
    const std::size_t d = x.s_next.size();
    double lp = -0.5 * static_cast<double>(d) * kLog2Pi;
    for (std::size_t j = 0; j < d; ++j) {
      double mean = 0.0;
      for (const Vector& r : rollouts) mean += r[j];
      mean /= kd;
      double spread = 0.0;
      if (config_.covariance == CovarianceEstimator::kSampleSpread) {
        for (const Vector& r : rollouts) spread += (r[j] - mean) * (r[j] - mean);
      } else {
        spread = kd * (mean - x.s_next[j]) * (mean - x.s_next[j]);
      }
      const double var = spread / (kd - 1.0) + config_.cov_regularizer;
      const double resid = x.s_next[j] - mean;
      lp -= 0.5 * std::log(var) + 0.5 * resid * resid / var;
    }
    total += lp;
  }
  return total;
}

double ObjectiveEvaluator::likelihood(const DiagonalGaussian& g) const {
  return kind_ == ObjectiveKind::kExactMixture ? exact_detail(g).value : dropo(g);
}

double ObjectiveEvaluator::operator()(const DiagonalGaussian& g) const {
  const double base = likelihood(g);
  if (config_.entropy_weight == 0.0) return base;
  return base + config_.entropy_weight * entropy(g);
}

MixtureLoglik exact_mixture_loglik_detail(std::span<const Transition> dataset,
                                          const SimulatorFamily& family, const DiagonalGaussian& g,
                                          const ObjectiveConfig& config) {
  return ObjectiveEvaluator(ObjectiveKind::kExactMixture, dataset, family, config).exact_detail(g);
}

double exact_mixture_loglik(std::span<const Transition> dataset, const SimulatorFamily& family,
                            const DiagonalGaussian& g, const ObjectiveConfig& config) {
  return exact_mixture_loglik_detail(dataset, family, g, config).value;
}

double dropo_loglik(std::span<const Transition> dataset, const SimulatorFamily& family,
                    const DiagonalGaussian& g, const ObjectiveConfig& config) {
  return ObjectiveEvaluator(ObjectiveKind::kDropo, dataset, family, config).likelihood(g);
}

double edropo_objective(ObjectiveKind kind, std::span<const Transition> dataset,
                        const SimulatorFamily& family, const DiagonalGaussian& g,
                        const ObjectiveConfig& config) {
  return ObjectiveEvaluator(kind, dataset, family, config)(g);
}

SaDistribution uniform_sa_distribution(const FiniteMdpClass& c) {
  const double w = 1.0 / static_cast<double>(c.n_states() * c.n_actions());
  return SaDistribution(c.n_states(), Vector(c.n_actions(), w));
}

double population_loglik_exact(const FiniteMdpClass& c, const SaDistribution& sa,
                               std::span<const double> weights) {
  if (weights.size() != c.n_members()) throw DimensionMismatch("member weights size");
  if (sa.size() != c.n_states()) throw DimensionMismatch("state-action distribution size");
  double mass = 0.0;
  for (const Vector& row : sa) {
    if (row.size() != c.n_actions()) throw DimensionMismatch("state-action distribution size");
    for (double w : row) mass += w;
  }
  if (std::abs(mass - 1.0) > 1e-9) throw InvalidParameter("state-action distribution must sum to 1");

  const std::size_t truth = c.true_index();
  double total = 0.0;
  for (std::size_t s = 0; s < c.n_states(); ++s) {
    for (std::size_t a = 0; a < c.n_actions(); ++a) {
      if (sa[s][a] == 0.0) continue;
      const Vector& p = c.row(truth, s, a);
      double inner = 0.0;
      for (std::size_t next = 0; next < c.n_states(); ++next) {
        if (p[next] == 0.0) continue;
        const double q = mixture_prob(c, weights, s, a, next);
        if (q <= 0.0) return kNegInf;
        inner += p[next] * std::log(q);
      }
      total += sa[s][a] * inner;
    }
  }
  return total;
}

double population_loglik_exact(const FiniteMdpClass& c, const SaDistribution& sa,
                               const DiagonalGaussian& g) {
  const Vector w = c.mixture_weights(g);
  return population_loglik_exact(c, sa, w);
}

double empirical_loglik_exact(const FiniteMdpClass& c, std::span<const Transition> dataset,
                              const DiagonalGaussian& g) {
  if (dataset.empty()) throw InvalidParameter("empty dataset");
  const Vector w = c.mixture_weights(g);
  double total = 0.0;
  for (const Transition& x : dataset) {
    const double q = mixture_prob(c, w, index_of(x.s[0]), index_of(x.a[0]), index_of(x.s_next[0]));
    if (q <= 0.0) return kNegInf;
    total += std::log(q);
  }
  return total / static_cast<double>(dataset.size());
}

}  // namespace odr
