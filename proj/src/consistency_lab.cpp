#include "odr/consistency_lab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

#include "odr/errors.hpp"

namespace odr {

std::size_t worker_threads(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ODR_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

Quartiles quartiles(std::vector<double> values) {
  std::erase_if(values, [](double v) { return !std::isfinite(v); });
  Quartiles q;
  if (values.empty()) {
    q.q1 = q.median = q.q3 = std::numeric_limits<double>::quiet_NaN();
    return q;
  }
  std::sort(values.begin(), values.end());
  auto at = [&](double p) {
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double t = pos - static_cast<double>(lo);
    return values[lo] + t * (values[hi] - values[lo]);
  };
  q.q1 = at(0.25);
  q.median = at(0.5);
  q.q3 = at(0.75);
  return q;
}

namespace {

SweepCell run_cell(const SimulatorFamily& data_family, const SimulatorFamily& model_family,
                   const BehaviorPolicy& policy, const SweepConfig& config, std::size_t n,
                   std::size_t trial) {
  SweepCell cell;
  cell.n = n;
  cell.trial = trial;
  const std::uint64_t cell_seed = derive_seed(derive_seed(config.seed, "sweep-cell", n), "trial", trial);
  try {
    const OfflineDataset data =
        collect_iid(data_family, config.xi_star, policy, n, derive_seed(cell_seed, "data"));
    FitConfig fc = config.fit;
    fc.objective.seed = derive_seed(cell_seed, "objective");
    fc.cma.seed = derive_seed(cell_seed, "cma");
    const FitResult result = fit(data, model_family, config.box, fc);
    const DiagonalGaussian& g = result.fitted;
    cell.fitted = g;
    cell.mu_error = euclidean_distance(g.mu(), config.xi_star);
    double s2 = 0.0;
    for (double s : g.sigma()) s2 += s * s;
    cell.sigma_norm = std::sqrt(s2);
    cell.phi_error = std::sqrt(cell.mu_error * cell.mu_error + s2);
    const FitMetrics metrics =
        evaluate_fit(result, config.xi_star, config.radii, config.n_mc, derive_seed(cell_seed, "ball"));
    cell.ball_masses = metrics.ball_masses;
  } catch (const std::exception& e) {
    cell.error = e.what();
    cell.fitted.reset();
  }
  return cell;
}

}  // namespace

std::vector<SweepSummary> summarize(const std::vector<SweepCell>& cells,
                                    std::span<const std::size_t> sizes, std::span<const double> radii) {
  std::vector<SweepSummary> out;
  for (std::size_t n : sizes) {
    SweepSummary s;
    s.n = n;
    std::vector<double> mu_err, sig;
    std::vector<std::vector<double>> masses(radii.size());
    std::vector<std::size_t> misses(radii.size(), 0);
    std::size_t ok = 0;
    for (const SweepCell& c : cells) {
      if (c.n != n) continue;
      if (!c.error.empty()) {
        ++s.failures;
        continue;
      }
      ++ok;
      mu_err.push_back(c.mu_error);
      sig.push_back(c.sigma_norm);
      for (std::size_t r = 0; r < radii.size() && r < c.ball_masses.size(); ++r) {
        masses[r].push_back(c.ball_masses[r].monte_carlo);
        if (c.mu_error >= radii[r]) ++misses[r];
      }
    }
    s.mu_error = quartiles(mu_err);
    s.sigma_norm = quartiles(sig);
    for (std::size_t r = 0; r < radii.size(); ++r) {
      s.median_ball_mass.push_back(quartiles(masses[r]).median);
      s.miss_fraction.push_back(ok > 0 ? static_cast<double>(misses[r]) / static_cast<double>(ok)
                                       : std::numeric_limits<double>::quiet_NaN());
    }
    out.push_back(std::move(s));
  }
  return out;
}

SweepReport consistency_sweep(const SimulatorFamily& data_family, const SimulatorFamily& model_family,
                              const BehaviorPolicy& policy, const SweepConfig& config) {
  if (config.sizes.empty()) throw InvalidParameter("sweep needs at least one dataset size");
  for (std::size_t i = 1; i < config.sizes.size(); ++i) {
    if (config.sizes[i] <= config.sizes[i - 1]) throw InvalidParameter("sweep sizes must be strictly increasing");
  }
  if (config.trials == 0) throw InvalidParameter("sweep needs at least one trial");
  if (config.xi_star.size() != model_family.param_dim()) throw DimensionMismatch("sweep xi* dimension");

  SweepReport report;
  report.config = config;
  const std::size_t total = config.sizes.size() * config.trials;
  report.cells.resize(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < total; k = next++) {
      const std::size_t n = config.sizes[k / config.trials];
      const std::size_t trial = k % config.trials;
      report.cells[k] = run_cell(data_family, model_family, policy, config, n, trial);
    }
  };
  const std::size_t n_threads = std::min(worker_threads(config.threads), total);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  report.summaries = summarize(report.cells, config.sizes, config.radii);
  return report;
}

SweepReport consistency_sweep(const SimulatorFamily& family, const BehaviorPolicy& policy,
                              const SweepConfig& config) {
  return consistency_sweep(family, family, policy, config);
}

std::optional<std::size_t> informativeness_curve(const SweepReport& report, double alpha, double radius) {
  const auto& radii = report.config.radii;
  const auto it = std::find(radii.begin(), radii.end(), radius);
  if (it == radii.end()) throw OutOfRange("radius not present in the sweep");
  const auto r = static_cast<std::size_t>(it - radii.begin());
  const double below_one = std::nextafter(1.0, 0.0);
  for (std::size_t n : report.config.sizes) {
    std::vector<double> masses;
    for (const SweepCell& c : report.cells) {
      if (c.n != n || !c.error.empty() || r >= c.ball_masses.size()) continue;
      double mass = c.ball_masses[r].monte_carlo;
      if (c.fitted && !c.fitted->degenerate()) mass = std::min(mass, below_one);
      masses.push_back(mass);
    }
    if (!masses.empty() && quartiles(masses).median >= alpha) return n;
  }
  return std::nullopt;
}

std::uint64_t covering_bound(std::size_t d, double diameter, double lipschitz, double epsilon) {
  if (d == 0) throw InvalidParameter("dimension must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 2.0 * diameter * lipschitz)) {
    throw OutOfRange("covering bound needs 0 < epsilon < 2 * diameter * L");
  }
  const double value = std::pow(4.0 * diameter * lipschitz / epsilon, static_cast<double>(d));
  if (value >= 1.8e19) throw OutOfRange("covering bound overflows");
  // Guard against pow rounding an exact integer up by one ulp.
  const double rounded = std::round(value);
  if (std::abs(value - rounded) <= 1e-9 * std::max(1.0, rounded)) return static_cast<std::uint64_t>(rounded);
  return static_cast<std::uint64_t>(std::ceil(value));
}

std::size_t greedy_net_size(std::size_t d, double diameter, double radius, std::size_t grid_points_per_dim) {
  if (d == 0 || grid_points_per_dim < 2) throw InvalidParameter("greedy net needs d >= 1 and a 2+ point grid");
  const double side = diameter / std::sqrt(static_cast<double>(d));
  std::vector<Vector> centers;
  std::vector<std::size_t> idx(d, 0);
  Vector p(d);
  while (true) {
    for (std::size_t i = 0; i < d; ++i) {
      p[i] = side * static_cast<double>(idx[i]) / static_cast<double>(grid_points_per_dim - 1);
    }
    const bool covered = std::any_of(centers.begin(), centers.end(),
                                     [&](const Vector& c) { return euclidean_distance(c, p) <= radius; });
    if (!covered) centers.push_back(p);
    std::size_t pos = 0;
    while (pos < d && ++idx[pos] == grid_points_per_dim) idx[pos++] = 0;
    if (pos == d) break;
  }
  return centers.size();
}

double hoeffding_deviation_bound(std::size_t n, double epsilon, double m_tilde) {
  if (n == 0 || !(epsilon > 0.0) || !(m_tilde > 0.0)) {
    throw InvalidParameter("hoeffding bound needs N >= 1, epsilon > 0, m_tilde > 0");
  }
  return 2.0 * std::exp(-static_cast<double>(n) * epsilon * epsilon / (2.0 * m_tilde * m_tilde));
}

DeviationExperiment hoeffding_experiment(const FiniteMdpClass& c, const DiagonalGaussian& g,
                                         std::size_t n, double epsilon, std::size_t n_datasets,
                                         std::uint64_t seed) {
  if (n_datasets == 0) throw InvalidParameter("need at least one dataset");
  DeviationExperiment out;
  out.population = population_loglik_exact(c, uniform_sa_distribution(c), g);

  const Vector w = c.mixture_weights(g);
  double min_q = 1.0;
  for (std::size_t s = 0; s < c.n_states(); ++s) {
    for (std::size_t a = 0; a < c.n_actions(); ++a) {
      for (std::size_t next = 0; next < c.n_states(); ++next) {
        if (c.row(c.true_index(), s, a)[next] == 0.0) continue;
        double q = 0.0;
        for (std::size_t m = 0; m < c.n_members(); ++m) q += w[m] * c.row(m, s, a)[next];
        min_q = std::min(min_q, q);
      }
    }
  }
  if (!(min_q > 0.0)) throw InvalidParameter("mixture positivity fails; the deviation bound does not apply");
  // Density bound M = 1 for a finite state space, so |log M| = 0.
  out.m_tilde = std::abs(std::log(min_q));
  out.bound = hoeffding_deviation_bound(n, epsilon, out.m_tilde);

  const UniformRandomPolicy policy;
  const Vector truth{static_cast<double>(c.true_index())};
  std::size_t exceed = 0;
  for (std::size_t k = 0; k < n_datasets; ++k) {
    const OfflineDataset data = collect_iid(c, truth, policy, n, derive_seed(seed, "hoeffding-dataset", k));
    if (std::abs(empirical_loglik_exact(c, data.view(), g) - out.population) >= epsilon) ++exceed;
  }
  out.frequency = static_cast<double>(exceed) / static_cast<double>(n_datasets);
  return out;
}

}  // namespace odr
