#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "odr/gaussian.hpp"
#include "odr/simulators.hpp"

namespace odr {

/// Optimal finite-horizon values and a greedy deterministic policy for one member.
/// Steps are 0-based: values[0][s] is V*_1(s) and values[H][s] = 0.
struct ValueTable {
  std::vector<Vector> values;                     // [h][s], h = 0..H
  std::vector<std::vector<std::size_t>> policy;   // [h][s], h = 0..H-1
};

ValueTable value_iteration(const FiniteMdpClass& mdp_class, std::size_t member, std::size_t horizon);
ValueTable value_iteration(const FiniteMdpClass& mdp_class, std::size_t member);

/// Interleaved s_1, a_1, s_2, ..., s_h (always odd length).
using History = std::vector<std::size_t>;

/// Markov or history-dependent policy with (possibly stochastic) action distributions.
class Policy {
 public:
  using MarkovTable = std::vector<std::vector<Vector>>;  // [h][s] -> distribution over actions
  using HistoryTable = std::map<History, Vector>;

  static Policy markov(const std::vector<std::vector<std::size_t>>& actions, std::size_t n_actions);
  static Policy markov(MarkovTable table);
  static Policy history_dependent(HistoryTable table);
  static Policy history_dependent(const std::map<History, std::size_t>& actions, std::size_t n_actions);

  /// Throws PolicyUndefined naming the history when the policy has no entry for it.
  const Vector& action_distribution(const History& history) const;
  bool is_markov() const noexcept { return std::holds_alternative<MarkovTable>(table_); }
  std::size_t size() const;

 private:
  explicit Policy(std::variant<MarkovTable, HistoryTable> table) : table_(std::move(table)) {}
  std::variant<MarkovTable, HistoryTable> table_;
};

/// Exact V^pi_1(s_1) on `member` by forward recursion over reachable histories.
double policy_value(const FiniteMdpClass& mdp_class, std::size_t member, const Policy& policy,
                    std::size_t horizon);
double policy_value(const FiniteMdpClass& mdp_class, std::size_t member, const Policy& policy);

/// Distribution over the members of a finite class.
class DiscretePrior {
 public:
  explicit DiscretePrior(Vector weights);

  static DiscretePrior uniform(std::size_t n_members);
  static DiscretePrior point_mass(std::size_t n_members, std::size_t index);
  /// Mass alpha on `index`, the rest spread uniformly over the other members.
  static DiscretePrior informative(std::size_t n_members, std::size_t index, double alpha);
  /// Mass a Gaussian over xi places on each member (see FiniteMdpClass::mixture_weights).
  static DiscretePrior from_gaussian(const FiniteMdpClass& mdp_class, const DiagonalGaussian& g);

  const Vector& weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }

 private:
  Vector weights_;
};

struct BayesPolicy {
  Policy policy;
  double prior_value = 0.0;  ///< sum_m prior_m V^pi_{m,1}(s_1)
  std::size_t nodes = 0;     ///< history nodes visited
};

/// Bayes-optimal history-dependent policy of the latent MDP induced by `prior`, by
/// exhaustive dynamic programming over the history tree with posterior beliefs. Ties go
/// to the lowest action index. Histories impossible under the current belief keep the
/// parent's belief, so the policy is defined on every history.
/// Throws InstanceTooLarge when the tree exceeds `node_limit`.
BayesPolicy bayes_optimal_policy(const FiniteMdpClass& mdp_class, const DiscretePrior& prior,
                                 std::size_t node_limit = 1'000'000);

/// Number of history nodes bayes_optimal_policy visits.
std::size_t history_tree_size(const FiniteMdpClass& mdp_class);

/// V*_{M*,1}(s_1) - V^pi_{M*,1}(s_1) for M* = member `true_index`.
double gap(const Policy& policy, const FiniteMdpClass& mdp_class, std::size_t true_index);

struct EpsilonBound {
  double epsilon = 0.0;
  double ball_mass = 0.0;
  std::optional<double> lemma5;  ///< empty when the ball mass is zero (bound vacuous)
};

struct GapReport {
  double gap_udr = 0.0;
  double gap_odr = 0.0;
  double alpha = 0.0;  ///< fitted mass on the true member
  double c = 0.0;      ///< max over members of the fitted-prior policy's gap
  double lemma4_rhs = 0.0;
  bool lemma4_holds = false;
  /// Smallest worst-case member gap among {fitted policy, uniform policy, each member's
  /// optimal policy}; the same inequality must hold with it.
  double c_tight = 0.0;
  bool lemma4_tight_holds = false;
  Vector member_gaps_odr;
  Vector member_gaps_udr;
  std::vector<EpsilonBound> epsilon_bounds;
};

GapReport udr_vs_odr_report(const FiniteMdpClass& mdp_class, const DiscretePrior& fitted_prior,
                            std::span<const double> epsilon_list = {}, double lipschitz = 0.0);

/// C / ball_mass + L * epsilon. Throws BoundVacuous when ball_mass is zero.
double lemma5_bound(double c, double ball_mass, double lipschitz, double epsilon);

}  // namespace odr
