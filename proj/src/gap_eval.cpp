#include "odr/gap_eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "odr/errors.hpp"

namespace odr {
namespace {

// Q-values closer than this count as tied; the lower action index wins.
constexpr double kTieTolerance = 1e-12;

std::string describe(const History& history) {
  std::string out = "(";
  for (std::size_t i = 0; i < history.size(); ++i) {
    if (i > 0) out += ",";
    out += (i % 2 == 0 ? "s" : "a") + std::to_string(history[i]);
  }
  return out + ")";
}

void check_member(const FiniteMdpClass& c, std::size_t member) {
  if (member >= c.n_members()) throw OutOfRange("member index " + std::to_string(member) + " out of range");
}

double rollout_value(const FiniteMdpClass& c, std::size_t member, const Policy& policy,
                     History& history, std::size_t h, std::size_t horizon) {
  const std::size_t s = history.back();
  const Vector& pi = policy.action_distribution(history);
  if (pi.size() != c.n_actions()) {
    throw PolicyUndefined("action distribution of wrong size at history " + describe(history));
  }
  double total = 0.0;
  for (std::size_t a = 0; a < c.n_actions(); ++a) {
    if (pi[a] == 0.0) continue;
    double q = c.reward(s, a);
    if (h + 1 < horizon) {
      const Vector& row = c.row(member, s, a);
      for (std::size_t next = 0; next < c.n_states(); ++next) {
        if (row[next] == 0.0) continue;
        history.push_back(a);
        history.push_back(next);
        q += row[next] * rollout_value(c, member, policy, history, h + 1, horizon);
        history.resize(history.size() - 2);
      }
    }
    total += pi[a] * q;
  }
  return total;
}

struct BayesSolver {
  const FiniteMdpClass& c;
  std::map<History, std::size_t> actions;
  std::size_t nodes = 0;

  double solve(History& history, const Vector& belief, std::size_t h) {
    ++nodes;
    const std::size_t s = history.back();
    const std::size_t n_members = c.n_members();
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_action = 0;
    Vector child(n_members);
    for (std::size_t a = 0; a < c.n_actions(); ++a) {
      double q = c.reward(s, a);
      if (h + 1 < c.horizon()) {
        for (std::size_t next = 0; next < c.n_states(); ++next) {
          double predictive = 0.0;
          for (std::size_t m = 0; m < n_members; ++m) predictive += belief[m] * c.row(m, s, a)[next];
          if (predictive > 0.0) {
            for (std::size_t m = 0; m < n_members; ++m) child[m] = belief[m] * c.row(m, s, a)[next] / predictive;
          } else {
            child = belief;
          }
          history.push_back(a);
          history.push_back(next);
          const Vector child_belief = child;
          const double v = solve(history, child_belief, h + 1);
          history.resize(history.size() - 2);
          q += predictive * v;
        }
      }
      if (a == 0 || q > best + kTieTolerance) {
        best = q;
        best_action = a;
      }
    }
    actions[history] = best_action;
    return best;
  }
};

}  // namespace

ValueTable value_iteration(const FiniteMdpClass& c, std::size_t member, std::size_t horizon) {
  check_member(c, member);
  ValueTable table;
  table.values.assign(horizon + 1, Vector(c.n_states(), 0.0));
  table.policy.assign(horizon, std::vector<std::size_t>(c.n_states(), 0));
  for (std::size_t h = horizon; h-- > 0;) {
    for (std::size_t s = 0; s < c.n_states(); ++s) {
      double best = -std::numeric_limits<double>::infinity();
      std::size_t best_action = 0;
      for (std::size_t a = 0; a < c.n_actions(); ++a) {
        double q = c.reward(s, a);
        if (h + 1 < horizon) {
          const Vector& row = c.row(member, s, a);
          for (std::size_t next = 0; next < c.n_states(); ++next) q += row[next] * table.values[h + 1][next];
        }
        if (a == 0 || q > best + kTieTolerance) {
          best = q;
          best_action = a;
        }
      }
      table.values[h][s] = best;
      table.policy[h][s] = best_action;
    }
  }
  return table;
}

ValueTable value_iteration(const FiniteMdpClass& c, std::size_t member) {
  return value_iteration(c, member, c.horizon());
}

Policy Policy::markov(const std::vector<std::vector<std::size_t>>& actions, std::size_t n_actions) {
  MarkovTable table(actions.size());
  for (std::size_t h = 0; h < actions.size(); ++h) {
    for (std::size_t a : actions[h]) {
      if (a >= n_actions) throw OutOfRange("policy action out of range");
      Vector dist(n_actions, 0.0);
      dist[a] = 1.0;
      table[h].push_back(std::move(dist));
    }
  }
  return Policy(std::move(table));
}

Policy Policy::markov(MarkovTable table) { return Policy(std::move(table)); }

Policy Policy::history_dependent(HistoryTable table) { return Policy(std::move(table)); }

Policy Policy::history_dependent(const std::map<History, std::size_t>& actions, std::size_t n_actions) {
  HistoryTable table;
  for (const auto& [history, a] : actions) {
    if (a >= n_actions) throw OutOfRange("policy action out of range");
    Vector dist(n_actions, 0.0);
    dist[a] = 1.0;
    table.emplace(history, std::move(dist));
  }
  return Policy(std::move(table));
}

const Vector& Policy::action_distribution(const History& history) const {
  if (history.empty() || history.size() % 2 == 0) {
    throw PolicyUndefined("malformed history " + describe(history));
  }
  if (const auto* markov_table = std::get_if<MarkovTable>(&table_)) {
    const std::size_t h = history.size() / 2;
    const std::size_t s = history.back();
    if (h >= markov_table->size() || s >= (*markov_table)[h].size()) {
      throw PolicyUndefined("policy undefined at history " + describe(history));
    }
    return (*markov_table)[h][s];
  }
  const auto& table = std::get<HistoryTable>(table_);
  const auto it = table.find(history);
  if (it == table.end()) throw PolicyUndefined("policy undefined at history " + describe(history));
  return it->second;
}

std::size_t Policy::size() const {
  if (const auto* markov_table = std::get_if<MarkovTable>(&table_)) return markov_table->size();
  return std::get<HistoryTable>(table_).size();
}

double policy_value(const FiniteMdpClass& c, std::size_t member, const Policy& policy,
                    std::size_t horizon) {
  check_member(c, member);
  if (horizon == 0) return 0.0;
  History history{c.start_index()};
  return rollout_value(c, member, policy, history, 0, horizon);
}

double policy_value(const FiniteMdpClass& c, std::size_t member, const Policy& policy) {
  return policy_value(c, member, policy, c.horizon());
}

DiscretePrior::DiscretePrior(Vector weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw InvalidParameter("prior needs at least one member");
  double sum = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw InvalidParameter("prior weights must be >= 0");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw InvalidParameter("prior weights must sum to 1");
}

DiscretePrior DiscretePrior::uniform(std::size_t n) {
  return DiscretePrior(Vector(n, 1.0 / static_cast<double>(n)));
}

DiscretePrior DiscretePrior::point_mass(std::size_t n, std::size_t index) {
  if (index >= n) throw OutOfRange("point mass index out of range");
  Vector w(n, 0.0);
  w[index] = 1.0;
  return DiscretePrior(std::move(w));
}

DiscretePrior DiscretePrior::informative(std::size_t n, std::size_t index, double alpha) {
  if (index >= n) throw OutOfRange("informative prior index out of range");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidParameter("alpha must lie in [0, 1]");
  if (n == 1) return point_mass(1, 0);
  Vector w(n, (1.0 - alpha) / static_cast<double>(n - 1));
  w[index] = alpha;
  return DiscretePrior(std::move(w));
}

DiscretePrior DiscretePrior::from_gaussian(const FiniteMdpClass& c, const DiagonalGaussian& g) {
  Vector w = c.mixture_weights(g);
  double sum = 0.0;
  for (double v : w) sum += v;
  for (double& v : w) v /= sum;
  return DiscretePrior(std::move(w));
}

std::size_t history_tree_size(const FiniteMdpClass& c) {
  const double branching = static_cast<double>(c.n_actions() * c.n_states());
  double total = 0.0;
  double level = 1.0;
  for (std::size_t h = 0; h < c.horizon(); ++h) {
    total += level;
    level *= branching;
    if (total > 1e18) return std::numeric_limits<std::size_t>::max();
  }
  return static_cast<std::size_t>(total);
}

BayesPolicy bayes_optimal_policy(const FiniteMdpClass& c, const DiscretePrior& prior,
                                 std::size_t node_limit) {
  if (prior.size() != c.n_members()) throw DimensionMismatch("prior size differs from class size");
  const std::size_t nodes = history_tree_size(c);
  if (nodes > node_limit) {
    throw InstanceTooLarge("history tree has " + std::to_string(nodes) + " nodes, limit is " +
                           std::to_string(node_limit));
  }
  BayesSolver solver{c, {}, 0};
  History history{c.start_index()};
  const double value = solver.solve(history, prior.weights(), 0);
  return BayesPolicy{Policy::history_dependent(solver.actions, c.n_actions()), value, solver.nodes};
}

double gap(const Policy& policy, const FiniteMdpClass& c, std::size_t true_index) {
  check_member(c, true_index);
  const double optimal = value_iteration(c, true_index).values[0][c.start_index()];
  return std::max(0.0, optimal - policy_value(c, true_index, policy));
}

double lemma5_bound(double c, double ball_mass, double lipschitz, double epsilon) {
  if (ball_mass == 0.0) throw BoundVacuous("ball mass is zero; the bound is vacuous");
  if (!(ball_mass > 0.0 && ball_mass <= 1.0)) throw InvalidParameter("ball mass must lie in (0, 1]");
  if (lipschitz < 0.0 || epsilon < 0.0) throw InvalidParameter("L and epsilon must be >= 0");
  return c / ball_mass + lipschitz * epsilon;
}

GapReport udr_vs_odr_report(const FiniteMdpClass& c, const DiscretePrior& fitted_prior,
                            std::span<const double> epsilon_list, double lipschitz) {
  const std::size_t truth = c.true_index();
  const std::size_t m = c.n_members();
  const Policy udr = bayes_optimal_policy(c, DiscretePrior::uniform(m)).policy;
  const Policy odr = bayes_optimal_policy(c, fitted_prior).policy;

  Vector optimal(m);
  for (std::size_t k = 0; k < m; ++k) optimal[k] = value_iteration(c, k).values[0][c.start_index()];
  auto member_gaps = [&](const Policy& p) {
    Vector gaps(m);
    for (std::size_t k = 0; k < m; ++k) gaps[k] = std::max(0.0, optimal[k] - policy_value(c, k, p));
    return gaps;
  };

  GapReport r;
  r.member_gaps_odr = member_gaps(odr);
  r.member_gaps_udr = member_gaps(udr);
  r.gap_odr = r.member_gaps_odr[truth];
  r.gap_udr = r.member_gaps_udr[truth];
  r.alpha = fitted_prior[truth];
  r.c = *std::max_element(r.member_gaps_odr.begin(), r.member_gaps_odr.end());
  r.lemma4_rhs = r.alpha > 0.0 ? r.c / r.alpha : std::numeric_limits<double>::infinity();
  r.lemma4_holds = r.gap_odr <= r.lemma4_rhs;

  r.c_tight = std::min(r.c, *std::max_element(r.member_gaps_udr.begin(), r.member_gaps_udr.end()));
  for (std::size_t k = 0; k < m; ++k) {
    const Policy own = Policy::markov(value_iteration(c, k).policy, c.n_actions());
    const Vector gaps = member_gaps(own);
    r.c_tight = std::min(r.c_tight, *std::max_element(gaps.begin(), gaps.end()));
  }
  // The tight check compares two exact DP results; allow for summation rounding only.
  r.lemma4_tight_holds = r.alpha > 0.0 && r.gap_odr <= r.c_tight / r.alpha + 1e-12;

  for (double eps : epsilon_list) {
    EpsilonBound b;
    b.epsilon = eps;
    for (std::size_t k = 0; k < m; ++k) {
      if (std::abs(static_cast<double>(k) - static_cast<double>(truth)) < eps) b.ball_mass += fitted_prior[k];
    }
    b.ball_mass = std::min(b.ball_mass, 1.0);
    if (b.ball_mass > 0.0) b.lemma5 = lemma5_bound(r.c, b.ball_mass, lipschitz, eps);
    r.epsilon_bounds.push_back(b);
  }
  return r;
}

}  // namespace odr
