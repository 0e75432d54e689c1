#include "odr/cmaes.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "odr/errors.hpp"
#include "odr/rng.hpp"

namespace odr {

OptimResult cma_maximize(const Objective& objective, const CmaConfig& config) {
  const std::size_t n = config.lower.size();
  if (n == 0 || config.upper.size() != n) throw DimensionMismatch("CMA-ES bounds");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(config.lower[i] < config.upper[i])) throw InvalidParameter("CMA-ES bounds need lower < upper");
  }
  if (config.population < 2) throw InvalidParameter("CMA-ES population must be >= 2");
  if (config.iterations < 1) throw InvalidParameter("CMA-ES needs at least one iteration");
  if (!(config.initial_step > 0.0)) throw InvalidParameter("CMA-ES initial step must be > 0");

  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  const auto dn = static_cast<double>(n);
  const std::size_t lambda = config.population;
  const std::size_t mu = lambda / 2;

  VectorXd weights(mu);
  for (std::size_t i = 0; i < mu; ++i) {
    weights[i] = std::log((static_cast<double>(lambda) + 1.0) / 2.0) - std::log(static_cast<double>(i + 1));
  }
  weights /= weights.sum();
  const double mu_eff = 1.0 / weights.squaredNorm();

  const double c_sigma = (mu_eff + 2.0) / (dn + mu_eff + 5.0);
  const double d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff - 1.0) / (dn + 1.0)) - 1.0) + c_sigma;
  const double c_c = (4.0 + mu_eff / dn) / (dn + 4.0 + 2.0 * mu_eff / dn);
  const double c_1 = 2.0 / ((dn + 1.3) * (dn + 1.3) + mu_eff);
  const double c_mu = std::min(1.0 - c_1, 2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((dn + 2.0) * (dn + 2.0) + mu_eff));
  const double chi_n = std::sqrt(dn) * (1.0 - 1.0 / (4.0 * dn) + 1.0 / (21.0 * dn * dn));

  auto to_real = [&](const VectorXd& u) {
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double ui = u[static_cast<Eigen::Index>(i)];
      // The upper end is exact, not lower + range * 1 with its rounding.
      x[i] = ui >= 1.0 ? config.upper[i] : config.lower[i] + (config.upper[i] - config.lower[i]) * ui;
    }
    return x;
  };

  VectorXd mean(n);
  for (std::size_t i = 0; i < n; ++i) {
    double start = 0.5;
    if (config.initial_point) {
      if (config.initial_point->size() != n) throw DimensionMismatch("CMA-ES initial point");
      start = ((*config.initial_point)[i] - config.lower[i]) / (config.upper[i] - config.lower[i]);
    }
    mean[static_cast<Eigen::Index>(i)] = std::clamp(start, 0.0, 1.0);
  }
  double sigma = config.initial_step;
  MatrixXd cov = MatrixXd::Identity(n, n);
  MatrixXd basis = MatrixXd::Identity(n, n);
  VectorXd scales = VectorXd::Ones(n);
  VectorXd p_sigma = VectorXd::Zero(n);
  VectorXd p_c = VectorXd::Zero(n);

  Rng rng(derive_seed(config.seed, "cma-es"));
  std::normal_distribution<double> normal;

  OptimResult result;
  result.best_value = -std::numeric_limits<double>::infinity();
  result.history.reserve(config.iterations);

  std::vector<VectorXd> candidates(lambda, VectorXd(n));
  std::vector<double> values(lambda);
  std::vector<std::size_t> order(lambda);

  for (std::size_t gen = 0; gen < config.iterations; ++gen) {
    bool any_finite = false;
    for (std::size_t k = 0; k < lambda; ++k) {
      VectorXd z(n);
      for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
      VectorXd u = mean + sigma * (basis * scales.cwiseProduct(z));
      u = u.cwiseMax(0.0).cwiseMin(1.0);
      candidates[k] = u;
      const Vector x = to_real(u);
      const double f = objective(x);
      ++result.evaluations;
      if (std::isnan(f)) {
        throw ObjectiveNaN("objective returned NaN at generation " + std::to_string(gen));
      }
      values[k] = f;
      if (f > -std::numeric_limits<double>::infinity()) any_finite = true;
      if (result.best_point.empty() || f > result.best_value) {
        result.best_value = f;
        result.best_point = x;
      }
    }
    if (!any_finite) {
      throw InfeasibleRegion("every candidate of generation " + std::to_string(gen) + " scored -inf");
    }

    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });

    const VectorXd old_mean = mean;
    mean.setZero();
    for (std::size_t i = 0; i < mu; ++i) mean += weights[static_cast<Eigen::Index>(i)] * candidates[order[i]];

    const VectorXd step = (mean - old_mean) / sigma;
    // C^{-1/2} * step
    const VectorXd whitened = basis * (basis.transpose() * step).cwiseQuotient(scales);
    p_sigma = (1.0 - c_sigma) * p_sigma + std::sqrt(c_sigma * (2.0 - c_sigma) * mu_eff) * whitened;
    const double gen_factor = 1.0 - std::pow(1.0 - c_sigma, 2.0 * static_cast<double>(gen + 1));
    const bool h_sigma = p_sigma.norm() / std::sqrt(gen_factor) < (1.4 + 2.0 / (dn + 1.0)) * chi_n;
    p_c = (1.0 - c_c) * p_c + (h_sigma ? std::sqrt(c_c * (2.0 - c_c) * mu_eff) : 0.0) * step;

    MatrixXd rank_mu = MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < mu; ++i) {
      const VectorXd y = (candidates[order[i]] - old_mean) / sigma;
      rank_mu += weights[static_cast<Eigen::Index>(i)] * y * y.transpose();
    }
    const double h_correction = h_sigma ? 0.0 : c_c * (2.0 - c_c);
    cov = (1.0 - c_1 - c_mu + c_1 * h_correction) * cov + c_1 * p_c * p_c.transpose() + c_mu * rank_mu;

    sigma *= std::exp((c_sigma / d_sigma) * (p_sigma.norm() / chi_n - 1.0));
    sigma = std::clamp(sigma, 1e-200, 1e3);

    cov = 0.5 * (cov + cov.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov);
    basis = eig.eigenvectors();
    scales = eig.eigenvalues().cwiseMax(1e-300).cwiseSqrt();

    result.history.push_back(CmaIteration{result.best_value, values[order[0]], sigma});
  }
  return result;
}

}  // namespace odr
