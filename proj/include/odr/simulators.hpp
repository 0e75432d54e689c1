#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "odr/gaussian.hpp"
#include "odr/rng.hpp"
#include "odr/transition.hpp"

namespace odr {

/// A parametric simulator family M_xi sharing state/action spaces. Implementations are
/// immutable; every call is pure given its seed.
class SimulatorFamily {
 public:
  virtual ~SimulatorFamily() = default;

  virtual std::string id() const = 0;
  virtual std::size_t param_dim() const = 0;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t action_dim() const = 0;

  /// Number of discrete actions, or 0 for continuous actions.
  virtual std::size_t n_actions() const { return 0; }
  /// Symmetric bound on each continuous action component.
  virtual double action_limit() const { return 1.0; }

  virtual bool density_available() const = 0;
  /// Upper bound on p_xi(s'|s,a); +inf when unknown.
  virtual double density_bound() const { return std::numeric_limits<double>::infinity(); }
  virtual bool supports_reset() const { return true; }

  /// Throws InvalidParameter when xi is outside the physical range.
  virtual void validate_param(std::span<const double> xi) const = 0;
  /// Nearest physically valid parameter; used when Gaussian samples leave the valid range.
  virtual Vector project_param(std::span<const double> xi) const = 0;
  /// project_param without the allocation; hot path of the mixture densities.
  virtual void project_param_in_place(std::span<double> xi) const;

  virtual Vector step(std::span<const double> xi, std::span<const double> s,
                      std::span<const double> a, std::uint64_t seed) const = 0;

  /// log p_xi(s'|s,a); -inf where the density vanishes. Throws DensityUnavailable.
  virtual double log_transition_density(std::span<const double> xi, std::span<const double> s,
                                        std::span<const double> a,
                                        std::span<const double> s_next) const = 0;

  double transition_density(std::span<const double> xi, std::span<const double> s,
                            std::span<const double> a, std::span<const double> s_next) const;

  virtual Vector start_state() const = 0;
  virtual Vector sample_reset_state(Rng& rng) const = 0;
};

/// Point masses driven by forces, integrated with semi-implicit Euler:
///   v' = v + dt * (f / m - c * v),   x' = x + dt * v'
/// plus additive Gaussian noise with per-component std `noise_std`.
/// State layout is [x_0, v_0, x_1, v_1, ...].
class PointMassSim final : public SimulatorFamily {
 public:
  enum class Parameterization {
    kMassFriction,  ///< xi = (mass, friction), shared by all bodies
    kMasses,        ///< xi = one mass per body, friction fixed and known
  };

  struct Config {
    Parameterization params = Parameterization::kMassFriction;
    std::size_t n_bodies = 1;
    double dt = 0.1;
    Vector noise_std;  ///< size 2 * n_bodies; all zero means deterministic
    double known_friction = 0.0;
    double action_limit = 1.0;
    double reset_range = 1.0;
  };

  explicit PointMassSim(Config config);

  /// One body, xi = (mass, friction).
  static PointMassSim mass_friction(double dt, Vector noise_std, double action_limit = 1.0);
  /// `n_bodies` bodies with unknown masses and known friction.
  static PointMassSim masses(std::size_t n_bodies, double dt, Vector noise_std, double known_friction,
                             double action_limit);

  const Config& config() const noexcept { return config_; }
  PointMassSim with_noise(Vector noise_std) const;

  std::string id() const override;
  std::size_t param_dim() const override;
  std::size_t state_dim() const override { return 2 * config_.n_bodies; }
  std::size_t action_dim() const override { return config_.n_bodies; }
  double action_limit() const override { return config_.action_limit; }
  bool density_available() const override;
  double density_bound() const override;

  void validate_param(std::span<const double> xi) const override;
  Vector project_param(std::span<const double> xi) const override;
  void project_param_in_place(std::span<double> xi) const override;

  /// Noise-free next state f_xi(s, a).
  Vector mean_next_state(std::span<const double> xi, std::span<const double> s,
                         std::span<const double> a) const;

  Vector step(std::span<const double> xi, std::span<const double> s, std::span<const double> a,
              std::uint64_t seed) const override;
  double log_transition_density(std::span<const double> xi, std::span<const double> s,
                                std::span<const double> a,
                                std::span<const double> s_next) const override;

  Vector start_state() const override;
  Vector sample_reset_state(Rng& rng) const override;

 private:
  double mass_of(std::span<const double> xi, std::size_t body) const;
  double friction_of(std::span<const double> xi) const;

  Config config_;
  double log_norm_ = 0.0;  ///< sum of log(sqrt(2 pi) * noise_std)
};

/// M tabular episodic MDPs sharing (S, A, R, H, s1) and differing in their transition
/// tensors. As a simulator family the parameter is one-dimensional: member m sits at
/// xi = m, and a non-integer xi linearly interpolates the two neighbouring members'
/// kernels (xi is clamped to [0, M-1]). A Gaussian over xi therefore induces a discrete
/// mixture over members; see mixture_weights().
class FiniteMdpClass final : public SimulatorFamily {
 public:
  using Rows = std::vector<std::vector<Vector>>;  // [state][action][next_state]

  FiniteMdpClass(std::size_t n_states, std::size_t n_actions, std::size_t horizon,
                 std::vector<Vector> reward, std::size_t start_state, std::vector<Rows> transitions,
                 std::size_t true_index);

  std::size_t n_states() const noexcept { return n_states_; }
  std::size_t n_actions() const override { return n_actions_; }
  std::size_t horizon() const noexcept { return horizon_; }
  std::size_t n_members() const noexcept { return transitions_.size(); }
  std::size_t start_index() const noexcept { return start_state_; }
  std::size_t true_index() const noexcept { return true_index_; }
  const std::vector<Vector>& reward() const noexcept { return reward_; }
  const std::vector<Rows>& transitions() const noexcept { return transitions_; }
  const Vector& row(std::size_t member, std::size_t s, std::size_t a) const {
    return transitions_[member][s][a];
  }
  double reward(std::size_t s, std::size_t a) const { return reward_[s][a]; }

  /// Same class with a different designated true member.
  FiniteMdpClass with_true_index(std::size_t index) const;

  /// Weights w_m = E_{xi ~ g}[lambda_m(clamp(xi))] where lambda_m is the linear
  /// interpolation (hat) weight of member m. Closed form in the normal CDF; sigma = 0
  /// gives the exact interpolation weights.
  Vector mixture_weights(const DiagonalGaussian& g) const;
  /// Interpolation weights for a single parameter value.
  Vector interpolation_weights(double xi) const;

  std::string id() const override { return "finite-mdp"; }
  std::size_t param_dim() const override { return 1; }
  std::size_t state_dim() const override { return 1; }
  std::size_t action_dim() const override { return 1; }
  bool density_available() const override { return true; }
  double density_bound() const override { return 1.0; }

  void validate_param(std::span<const double> xi) const override;
  Vector project_param(std::span<const double> xi) const override;
  Vector step(std::span<const double> xi, std::span<const double> s, std::span<const double> a,
              std::uint64_t seed) const override;
  double log_transition_density(std::span<const double> xi, std::span<const double> s,
                                std::span<const double> a,
                                std::span<const double> s_next) const override;
  Vector start_state() const override;
  Vector sample_reset_state(Rng& rng) const override;

 private:
  std::size_t n_states_;
  std::size_t n_actions_;
  std::size_t horizon_;
  std::vector<Vector> reward_;
  std::size_t start_state_;
  std::vector<Rows> transitions_;
  std::size_t true_index_;
};

/// min over member pairs and (s, a) of the L1 distance between transition rows.
double l1_separation(const FiniteMdpClass& mdp_class);

struct FiniteClassSpec {
  std::size_t n_states = 3;
  std::size_t n_actions = 2;
  std::size_t horizon = 3;
  std::size_t n_members = 3;
  double min_separation = 0.0;  ///< rejection threshold on l1_separation
  std::size_t true_index = 0;
  std::size_t max_tries = 100000;
};

/// Random class with uniform rewards in [0, 1] and Dirichlet(1) rows, regenerated until
/// l1_separation >= min_separation. Throws OutOfRange when max_tries is exhausted.
FiniteMdpClass generate_finite_class(const FiniteClassSpec& spec, std::uint64_t seed);

/// Fills `out` with the standard normals of the stream `noise_seed`, sample-major
/// ([k][dim]); these are the z_k of mixture_log_density.
void xi_standard_normals(std::uint64_t noise_seed, std::span<double> out);
/// Same mixture with explicit draws (K * d values, sample-major).
double mixture_log_density(const SimulatorFamily& family, const DiagonalGaussian& g, const Transition& x,
                           std::span<const double> draws);

/// Monte Carlo mixture log-density log[(1/K) sum_k p_{xi_k}(s'|s,a)] with
/// xi_k = project(mu + sigma * z_k) and z_k drawn from `noise_seed`. Reusing the seed
/// across different g gives common random numbers.
double mixture_log_density(const SimulatorFamily& family, const DiagonalGaussian& g,
                           const Transition& x, std::size_t n_samples, std::uint64_t noise_seed);

struct PositivityReport {
  double c_hat = 0.0;  ///< estimated minimum mixture density
  bool warning = false;  ///< c_hat < 1e-12
  std::size_t argmin_transition = 0;
  DiagonalGaussian argmin_phi;
};

/// Minimum over dataset transitions and a phi-grid over the box of the Monte Carlo mixture
/// density. The grid has `grid_resolution` mu values per dimension and as many
/// log-spaced sigma values in [sigma_floor, sigma_max]; a resolution of 1 means the
/// single point (box center, sigma_floor).
PositivityReport check_mixture_positivity(const SimulatorFamily& family,
                                          std::span<const Transition> dataset, const ParamBox& box,
                                          std::size_t grid_resolution, std::size_t n_xi_samples,
                                          std::uint64_t seed);

/// Hash of the bit patterns of (s, a, s'). Keys the common random numbers by content, so
/// objectives do not depend on the order of the dataset rows.
std::uint64_t transition_key(const Transition& x);
/// Seed of the common-random-number stream for the parameter samples of transition x.
std::uint64_t xi_noise_seed(std::uint64_t root, const Transition& x);

}  // namespace odr
