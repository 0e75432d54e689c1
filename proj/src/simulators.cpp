#include "odr/simulators.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "odr/errors.hpp"

namespace odr {
namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

void check_size(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) {
    throw DimensionMismatch(std::string(what) + ": expected size " + std::to_string(expected) +
                            ", got " + std::to_string(got));
  }
}

std::size_t as_index(double v, std::size_t bound, const char* what) {
  if (!(v >= 0.0) || v != std::floor(v) || v >= static_cast<double>(bound)) {
    throw OutOfRange(std::string(what) + " index out of range: " + std::to_string(v));
  }
  return static_cast<std::size_t>(v);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

// E[(X - t)_+] for X ~ N(mu, sigma^2).
double expected_excess(double mu, double sigma, double t) {
  if (sigma == 0.0) return std::max(mu - t, 0.0);
  const double z = (mu - t) / sigma;
  return (mu - t) * normal_cdf(z) + sigma * normal_pdf(z);
}

}  // namespace

double SimulatorFamily::transition_density(std::span<const double> xi, std::span<const double> s,
                                           std::span<const double> a,
                                           std::span<const double> s_next) const {
  return std::exp(log_transition_density(xi, s, a, s_next));
}

// ---------------------------------------------------------------------------------------
// PointMassSim

PointMassSim::PointMassSim(Config config) : config_(std::move(config)) {
  if (config_.n_bodies == 0) throw InvalidParameter("point mass needs at least one body");
  if (!(config_.dt > 0.0)) throw InvalidParameter("dt must be positive");
  if (config_.noise_std.empty()) config_.noise_std.assign(state_dim(), 0.0);
  check_size(state_dim(), config_.noise_std.size(), "noise_std");
  for (double n : config_.noise_std) {
    if (!(n >= 0.0)) throw InvalidParameter("noise_std must be >= 0");
  }
  if (config_.known_friction < 0.0) throw InvalidParameter("friction must be >= 0");
  for (double n : config_.noise_std) log_norm_ += 0.5 * kLog2Pi + std::log(n);
}

PointMassSim PointMassSim::mass_friction(double dt, Vector noise_std, double action_limit) {
  Config c;
  c.params = Parameterization::kMassFriction;
  c.n_bodies = 1;
  c.dt = dt;
  c.noise_std = std::move(noise_std);
  c.action_limit = action_limit;
  return PointMassSim(std::move(c));
}

PointMassSim PointMassSim::masses(std::size_t n_bodies, double dt, Vector noise_std,
                                  double known_friction, double action_limit) {
  Config c;
  c.params = Parameterization::kMasses;
  c.n_bodies = n_bodies;
  c.dt = dt;
  c.noise_std = std::move(noise_std);
  c.known_friction = known_friction;
  c.action_limit = action_limit;
  return PointMassSim(std::move(c));
}

PointMassSim PointMassSim::with_noise(Vector noise_std) const {
  Config c = config_;
  c.noise_std = std::move(noise_std);
  return PointMassSim(std::move(c));
}

std::string PointMassSim::id() const {
  return config_.params == Parameterization::kMassFriction ? "point-mass" : "mass-task";
}

std::size_t PointMassSim::param_dim() const {
  return config_.params == Parameterization::kMassFriction ? 2 : config_.n_bodies;
}

bool PointMassSim::density_available() const {
  return std::all_of(config_.noise_std.begin(), config_.noise_std.end(),
                     [](double n) { return n > 0.0; });
}

double PointMassSim::density_bound() const {
  if (!density_available()) return std::numeric_limits<double>::infinity();
  double bound = 1.0;
  for (double n : config_.noise_std) bound /= std::sqrt(2.0 * std::numbers::pi) * n;
  return bound;
}

void PointMassSim::validate_param(std::span<const double> xi) const {
  check_size(param_dim(), xi.size(), "point mass parameter");
  for (double v : xi) {
    if (!std::isfinite(v)) throw InvalidParameter("point mass parameter must be finite");
  }
  if (config_.params == Parameterization::kMassFriction) {
    if (!(xi[0] > 0.0)) throw InvalidParameter("mass must be > 0");
    if (xi[1] < 0.0) throw InvalidParameter("friction must be >= 0");
  } else {
    for (double m : xi) {
      if (!(m > 0.0)) throw InvalidParameter("mass must be > 0");
    }
  }
}

Vector PointMassSim::project_param(std::span<const double> xi) const {
  Vector out(xi.begin(), xi.end());
  project_param_in_place(out);
  return out;
}

void PointMassSim::project_param_in_place(std::span<double> xi) const {
  check_size(param_dim(), xi.size(), "point mass parameter");
  constexpr double kMinMass = 1e-9;
  if (config_.params == Parameterization::kMassFriction) {
    xi[0] = std::max(xi[0], kMinMass);
    xi[1] = std::max(xi[1], 0.0);
  } else {
    for (double& m : xi) m = std::max(m, kMinMass);
  }
}

double PointMassSim::mass_of(std::span<const double> xi, std::size_t body) const {
  return config_.params == Parameterization::kMassFriction ? xi[0] : xi[body];
}

double PointMassSim::friction_of(std::span<const double> xi) const {
  return config_.params == Parameterization::kMassFriction ? xi[1] : config_.known_friction;
}

Vector PointMassSim::mean_next_state(std::span<const double> xi, std::span<const double> s,
                                     std::span<const double> a) const {
  validate_param(xi);
  check_size(state_dim(), s.size(), "point mass state");
  check_size(action_dim(), a.size(), "point mass action");
  const double dt = config_.dt;
  const double friction = friction_of(xi);
  Vector next(state_dim());
  for (std::size_t b = 0; b < config_.n_bodies; ++b) {
    const double x = s[2 * b];
    const double v = s[2 * b + 1];
    const double v_next = v + dt * (a[b] / mass_of(xi, b) - friction * v);
    next[2 * b] = x + dt * v_next;
    next[2 * b + 1] = v_next;
  }
  return next;
}

Vector PointMassSim::step(std::span<const double> xi, std::span<const double> s,
                          std::span<const double> a, std::uint64_t seed) const {
  Vector next = mean_next_state(xi, s, a);
  Rng rng(seed);
  std::normal_distribution<double> normal;
  for (std::size_t i = 0; i < next.size(); ++i) {
    const double z = normal(rng);
    next[i] += config_.noise_std[i] * z;
  }
  return next;
}

double PointMassSim::log_transition_density(std::span<const double> xi, std::span<const double> s,
                                            std::span<const double> a,
                                            std::span<const double> s_next) const {
  if (!density_available()) {
    throw DensityUnavailable("point mass with zero noise has no transition density");
  }
  validate_param(xi);
  check_size(state_dim(), s.size(), "point mass state");
  check_size(action_dim(), a.size(), "point mass action");
  check_size(state_dim(), s_next.size(), "point mass next state");
  // Same arithmetic as mean_next_state, without allocating.
  const double dt = config_.dt;
  const double friction = friction_of(xi);
  double sq = 0.0;
  for (std::size_t b = 0; b < config_.n_bodies; ++b) {
    const double v_next = s[2 * b + 1] + dt * (a[b] / mass_of(xi, b) - friction * s[2 * b + 1]);
    const double zx = (s_next[2 * b] - (s[2 * b] + dt * v_next)) / config_.noise_std[2 * b];
    const double zv = (s_next[2 * b + 1] - v_next) / config_.noise_std[2 * b + 1];
    sq += zx * zx + zv * zv;
  }
  return -log_norm_ - 0.5 * sq;
}

Vector PointMassSim::start_state() const { return Vector(state_dim(), 0.0); }

Vector PointMassSim::sample_reset_state(Rng& rng) const {
  std::uniform_real_distribution<double> u(-config_.reset_range, config_.reset_range);
  Vector s(state_dim());
  for (double& v : s) v = u(rng);
  return s;
}

// ---------------------------------------------------------------------------------------
// FiniteMdpClass

FiniteMdpClass::FiniteMdpClass(std::size_t n_states, std::size_t n_actions, std::size_t horizon,
                               std::vector<Vector> reward, std::size_t start_state,
                               std::vector<Rows> transitions, std::size_t true_index)
    : n_states_(n_states),
      n_actions_(n_actions),
      horizon_(horizon),
      reward_(std::move(reward)),
      start_state_(start_state),
      transitions_(std::move(transitions)),
      true_index_(true_index) {
  if (n_states_ == 0 || n_actions_ == 0 || horizon_ == 0) {
    throw InvalidParameter("finite class needs S, A, H >= 1");
  }
  if (transitions_.empty()) throw InvalidParameter("finite class needs at least one member");
  if (start_state_ >= n_states_) throw OutOfRange("start state out of range");
  if (true_index_ >= transitions_.size()) throw OutOfRange("true index out of range");
  check_size(n_states_, reward_.size(), "reward states");
  for (const auto& r : reward_) {
    check_size(n_actions_, r.size(), "reward actions");
    for (double v : r) {
      if (!(v >= 0.0 && v <= 1.0)) throw InvalidParameter("rewards must lie in [0, 1]");
    }
  }
  for (const auto& member : transitions_) {
    check_size(n_states_, member.size(), "transition states");
    for (const auto& per_action : member) {
      check_size(n_actions_, per_action.size(), "transition actions");
      for (const auto& row : per_action) {
        check_size(n_states_, row.size(), "transition row");
        double sum = 0.0;
        for (double p : row) {
          if (!(p >= 0.0)) throw InvalidParameter("transition probabilities must be >= 0");
          sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12) throw InvalidParameter("transition row must sum to 1");
      }
    }
  }
}

FiniteMdpClass FiniteMdpClass::with_true_index(std::size_t index) const {
  return FiniteMdpClass(n_states_, n_actions_, horizon_, reward_, start_state_, transitions_, index);
}

Vector FiniteMdpClass::interpolation_weights(double xi) const {
  const std::size_t m = n_members();
  Vector w(m, 0.0);
  const double x = std::clamp(xi, 0.0, static_cast<double>(m - 1));
  const auto lo = static_cast<std::size_t>(std::floor(x));
  const double t = x - static_cast<double>(lo);
  w[lo] = 1.0 - t;
  if (lo + 1 < m) w[lo + 1] = t;
  return w;
}

Vector FiniteMdpClass::mixture_weights(const DiagonalGaussian& g) const {
  check_size(1, g.dim(), "finite class parameter");
  const std::size_t m = n_members();
  if (m == 1) return Vector{1.0};
  const double mu = g.mu()[0];
  const double sigma = g.sigma()[0];
  auto excess = [&](std::size_t t) { return expected_excess(mu, sigma, static_cast<double>(t)); };
  Vector w(m);
  w[0] = 1.0 - excess(0) + excess(1);
  for (std::size_t k = 1; k + 1 < m; ++k) w[k] = excess(k - 1) - 2.0 * excess(k) + excess(k + 1);
  w[m - 1] = excess(m - 2) - excess(m - 1);
  for (double& v : w) v = std::clamp(v, 0.0, 1.0);
  return w;
}

void FiniteMdpClass::validate_param(std::span<const double> xi) const {
  check_size(1, xi.size(), "finite class parameter");
  if (!std::isfinite(xi[0])) throw InvalidParameter("finite class parameter must be finite");
}

Vector FiniteMdpClass::project_param(std::span<const double> xi) const {
  validate_param(xi);
  return Vector{std::clamp(xi[0], 0.0, static_cast<double>(n_members() - 1))};
}

Vector FiniteMdpClass::step(std::span<const double> xi, std::span<const double> s,
                            std::span<const double> a, std::uint64_t seed) const {
  validate_param(xi);
  check_size(1, s.size(), "finite state");
  check_size(1, a.size(), "finite action");
  const std::size_t si = as_index(s[0], n_states_, "state");
  const std::size_t ai = as_index(a[0], n_actions_, "action");
  const Vector w = interpolation_weights(xi[0]);
  Vector probs(n_states_, 0.0);
  for (std::size_t m = 0; m < n_members(); ++m) {
    if (w[m] == 0.0) continue;
    for (std::size_t k = 0; k < n_states_; ++k) probs[k] += w[m] * transitions_[m][si][ai][k];
  }
  Rng rng(seed);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < n_states_; ++k) {
    if (probs[k] <= 0.0) continue;
    last_positive = k;
    acc += probs[k];
    if (u < acc) return Vector{static_cast<double>(k)};
  }
  return Vector{static_cast<double>(last_positive)};
}

double FiniteMdpClass::log_transition_density(std::span<const double> xi, std::span<const double> s,
                                              std::span<const double> a,
                                              std::span<const double> s_next) const {
  validate_param(xi);
  check_size(1, s.size(), "finite state");
  check_size(1, a.size(), "finite action");
  check_size(1, s_next.size(), "finite next state");
  const std::size_t si = as_index(s[0], n_states_, "state");
  const std::size_t ai = as_index(a[0], n_actions_, "action");
  const std::size_t ni = as_index(s_next[0], n_states_, "next state");
  const Vector w = interpolation_weights(xi[0]);
  double p = 0.0;
  for (std::size_t m = 0; m < n_members(); ++m) {
    if (w[m] != 0.0) p += w[m] * transitions_[m][si][ai][ni];
  }
  return std::log(p);
}

Vector FiniteMdpClass::start_state() const { return Vector{static_cast<double>(start_state_)}; }

Vector FiniteMdpClass::sample_reset_state(Rng& rng) const {
  std::uniform_int_distribution<std::size_t> u(0, n_states_ - 1);
  return Vector{static_cast<double>(u(rng))};
}

double l1_separation(const FiniteMdpClass& c) {
  if (c.n_members() < 2) throw InvalidParameter("l1_separation needs at least two members");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < c.n_members(); ++i) {
    for (std::size_t j = i + 1; j < c.n_members(); ++j) {
      for (std::size_t s = 0; s < c.n_states(); ++s) {
        for (std::size_t a = 0; a < c.n_actions(); ++a) {
          const Vector& p = c.row(i, s, a);
          const Vector& q = c.row(j, s, a);
          double d = 0.0;
          for (std::size_t k = 0; k < p.size(); ++k) d += std::abs(p[k] - q[k]);
          best = std::min(best, d);
        }
      }
    }
  }
  return best;
}

FiniteMdpClass generate_finite_class(const FiniteClassSpec& spec, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "finite-class"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  for (std::size_t attempt = 0; attempt < spec.max_tries; ++attempt) {
    std::vector<Vector> reward(spec.n_states, Vector(spec.n_actions));
    for (auto& r : reward) {
      for (double& v : r) v = unit(rng);
    }
    std::vector<FiniteMdpClass::Rows> members(spec.n_members);
    for (auto& member : members) {
      member.assign(spec.n_states, std::vector<Vector>(spec.n_actions, Vector(spec.n_states)));
      for (auto& per_action : member) {
        for (auto& row : per_action) {
          double sum = 0.0;
          for (double& p : row) sum += (p = expo(rng));
          for (double& p : row) p /= sum;
        }
      }
    }
    FiniteMdpClass candidate(spec.n_states, spec.n_actions, spec.horizon, std::move(reward), 0,
                             std::move(members), spec.true_index);
    if (spec.n_members < 2 || l1_separation(candidate) >= spec.min_separation) return candidate;
  }
  throw OutOfRange("could not generate a class with the requested separation");
}

std::uint64_t transition_key(const Transition& x) {
  std::uint64_t h = derive_seed(0, "transition");
  for (const Vector* part : {&x.s, &x.a, &x.s_next}) {
    h = derive_seed(h, "size", part->size());
    for (double v : *part) h = derive_seed(h, "value", std::bit_cast<std::uint64_t>(v == 0.0 ? 0.0 : v));
  }
  return h;
}

std::uint64_t xi_noise_seed(std::uint64_t root, const Transition& x) {
  return derive_seed(root, "xi-samples", transition_key(x));
}

void xi_standard_normals(std::uint64_t noise_seed, std::span<double> out) {
  Rng rng(noise_seed);
  std::normal_distribution<double> normal;
  for (double& z : out) z = normal(rng);
}

void SimulatorFamily::project_param_in_place(std::span<double> xi) const {
  const Vector p = project_param(xi);
  std::copy(p.begin(), p.end(), xi.begin());
}

double mixture_log_density(const SimulatorFamily& family, const DiagonalGaussian& g, const Transition& x,
                           std::span<const double> draws) {
  check_size(family.param_dim(), g.dim(), "mixture parameter");
  const std::size_t d = g.dim();
  if (draws.empty() || draws.size() % d != 0) throw InvalidParameter("mixture needs K * d normal draws");
  const std::size_t n_samples = draws.size() / d;
  Vector xi(d);
  // Streaming log-sum-exp.
  double max_lp = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t k = 0; k < n_samples; ++k) {
    for (std::size_t i = 0; i < d; ++i) xi[i] = g.mu()[i] + g.sigma()[i] * draws[k * d + i];
    family.project_param_in_place(xi);
    const double lp = family.log_transition_density(xi, x.s, x.a, x.s_next);
    if (lp == -std::numeric_limits<double>::infinity()) continue;
    if (lp <= max_lp) {
      sum += std::exp(lp - max_lp);
    } else {
      sum = sum * std::exp(max_lp - lp) + 1.0;
      max_lp = lp;
    }
  }
  if (max_lp == -std::numeric_limits<double>::infinity()) return max_lp;
  return max_lp + std::log(sum / static_cast<double>(n_samples));
}

double mixture_log_density(const SimulatorFamily& family, const DiagonalGaussian& g,
                           const Transition& x, std::size_t n_samples, std::uint64_t noise_seed) {
  check_size(family.param_dim(), g.dim(), "mixture parameter");
  if (n_samples == 0) throw InvalidParameter("mixture needs at least one parameter sample");
  std::vector<double> draws(n_samples * g.dim());
  xi_standard_normals(noise_seed, draws);
  return mixture_log_density(family, g, x, draws);
}

PositivityReport check_mixture_positivity(const SimulatorFamily& family,
                                          std::span<const Transition> dataset, const ParamBox& box,
                                          std::size_t grid_resolution, std::size_t n_xi_samples,
                                          std::uint64_t seed) {
  if (!family.density_available()) throw DensityUnavailable("positivity check needs densities");
  if (dataset.empty()) throw InvalidParameter("positivity check needs a nonempty dataset");
  if (grid_resolution == 0) throw InvalidParameter("grid resolution must be >= 1");
  check_size(family.param_dim(), box.dim(), "positivity box");
  const std::size_t d = box.dim();
  const std::size_t r = grid_resolution;

  auto mu_at = [&](std::size_t dim, std::size_t k) {
    if (r == 1) return box.center()[dim];
    return box.lo[dim] + (box.hi[dim] - box.lo[dim]) * static_cast<double>(k) / static_cast<double>(r - 1);
  };
  auto sigma_at = [&](std::size_t k) {
    if (r == 1) return box.sigma_floor;
    const double t = static_cast<double>(k) / static_cast<double>(r - 1);
    return std::exp(std::log(box.sigma_floor) + t * (std::log(box.sigma_max) - std::log(box.sigma_floor)));
  };

  PositivityReport report;
  report.c_hat = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> counter(2 * d, 0);
  bool done = false;
  while (!done) {
    Vector mu(d), sigma(d);
    for (std::size_t i = 0; i < d; ++i) {
      mu[i] = mu_at(i, counter[i]);
      sigma[i] = sigma_at(counter[d + i]);
    }
    DiagonalGaussian g(mu, sigma);
    for (std::size_t t = 0; t < dataset.size(); ++t) {
      const double q = std::exp(mixture_log_density(family, g, dataset[t], n_xi_samples, xi_noise_seed(seed, dataset[t])));
      if (q < report.c_hat) {
        report.c_hat = q;
        report.argmin_transition = t;
        report.argmin_phi = g;
      }
    }
    std::size_t pos = 0;
    while (pos < counter.size() && ++counter[pos] == r) counter[pos++] = 0;
    done = pos == counter.size();
  }
  report.warning = report.c_hat < 1e-12;
  return report;
}

}  // namespace odr
