#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "odr/simulators.hpp"
#include "odr/transition.hpp"

namespace odr {

enum class CollectionMode { kIid, kTrajectory };

std::string to_string(CollectionMode mode);
CollectionMode collection_mode_from_string(const std::string& name);

struct DatasetMeta {
  std::string family;
  CollectionMode mode = CollectionMode::kIid;
  std::uint64_t seed = 0;
  std::string behavior_policy;
  std::optional<Vector> xi_star;  ///< evaluation only; never read by the fitting code

  friend bool operator==(const DatasetMeta&, const DatasetMeta&) = default;
};

/// Immutable collection of real-system transitions.
class OfflineDataset {
 public:
  OfflineDataset(DatasetMeta meta, std::vector<Transition> transitions);

  const DatasetMeta& meta() const noexcept { return meta_; }
  const std::vector<Transition>& transitions() const noexcept { return transitions_; }
  std::span<const Transition> view() const noexcept { return transitions_; }
  std::size_t size() const noexcept { return transitions_.size(); }
  bool empty() const noexcept { return transitions_.empty(); }
  const Transition& operator[](std::size_t i) const { return transitions_[i]; }

  /// Same meta, rows reordered by `order` (a permutation of 0..size-1).
  OfflineDataset permuted(std::span<const std::size_t> order) const;

  friend bool operator==(const OfflineDataset&, const OfflineDataset&) = default;

 private:
  DatasetMeta meta_;
  std::vector<Transition> transitions_;
};

class BehaviorPolicy {
 public:
  virtual ~BehaviorPolicy() = default;
  virtual std::string id() const = 0;
  /// Action at time step `t` of an episode (or sample index in i.i.d. mode).
  virtual Vector action(const SimulatorFamily& family, std::span<const double> state, std::size_t t,
                        Rng& rng) const = 0;
};

/// Uniform over discrete actions, or uniform in [-limit, limit] per continuous component.
class UniformRandomPolicy final : public BehaviorPolicy {
 public:
  std::string id() const override { return "uniform"; }
  Vector action(const SimulatorFamily& family, std::span<const double> state, std::size_t t,
                Rng& rng) const override;
};

/// a_j(t) = limit * sin(omega * (j + 1) * t + j * pi / 2); continuous actions only.
class SinusoidalExcitation final : public BehaviorPolicy {
 public:
  explicit SinusoidalExcitation(double omega = 0.35) : omega_(omega) {}
  std::string id() const override { return "sinusoid"; }
  Vector action(const SimulatorFamily& family, std::span<const double> state, std::size_t t,
                Rng& rng) const override;

 private:
  double omega_;
};

using StateSampler = std::function<Vector(Rng&)>;

/// Always resets to `state`.
StateSampler point_reset(Vector state);

/// n i.i.d. transitions: s from `reset`, a from the policy, s' from family.step at xi_star.
OfflineDataset collect_iid(const SimulatorFamily& family, std::span<const double> xi_star,
                           const BehaviorPolicy& policy, std::size_t n, const StateSampler& reset,
                           std::uint64_t seed);
/// Same, resetting with the family's own reset distribution.
OfflineDataset collect_iid(const SimulatorFamily& family, std::span<const double> xi_star,
                           const BehaviorPolicy& policy, std::size_t n, std::uint64_t seed);

/// n_traj episodes of `horizon` steps from the family's start state.
OfflineDataset collect_trajectories(const SimulatorFamily& family, std::span<const double> xi_star,
                                    const BehaviorPolicy& policy, std::size_t n_traj,
                                    std::size_t horizon, std::uint64_t seed);

/// JSON-lines text: one meta header line, then one {"s","a","s_next"} object per line.
std::string to_jsonl(const OfflineDataset& dataset);
OfflineDataset from_jsonl(const std::string& text);

void save(const OfflineDataset& dataset, const std::filesystem::path& path);
OfflineDataset load(const std::filesystem::path& path);

}  // namespace odr
