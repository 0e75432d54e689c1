#include "odr/dataset.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include "odr/errors.hpp"

namespace odr {

using nlohmann::json;

std::string to_string(CollectionMode mode) {
  return mode == CollectionMode::kIid ? "iid" : "trajectory";
}

CollectionMode collection_mode_from_string(const std::string& name) {
  if (name == "iid") return CollectionMode::kIid;
  if (name == "trajectory") return CollectionMode::kTrajectory;
  throw InvalidParameter("unknown collection mode: " + name);
}

OfflineDataset::OfflineDataset(DatasetMeta meta, std::vector<Transition> transitions)
    : meta_(std::move(meta)), transitions_(std::move(transitions)) {}

OfflineDataset OfflineDataset::permuted(std::span<const std::size_t> order) const {
  if (order.size() != size()) throw DimensionMismatch("permutation size differs from dataset size");
  std::vector<Transition> rows;
  rows.reserve(size());
  for (std::size_t i : order) rows.push_back(transitions_.at(i));
  return OfflineDataset(meta_, std::move(rows));
}

Vector UniformRandomPolicy::action(const SimulatorFamily& family, std::span<const double>,
                                   std::size_t, Rng& rng) const {
  if (family.n_actions() > 0) {
    std::uniform_int_distribution<std::size_t> u(0, family.n_actions() - 1);
    return Vector{static_cast<double>(u(rng))};
  }
  std::uniform_real_distribution<double> u(-family.action_limit(), family.action_limit());
  Vector a(family.action_dim());
  for (double& v : a) v = u(rng);
  return a;
}

Vector SinusoidalExcitation::action(const SimulatorFamily& family, std::span<const double>,
                                    std::size_t t, Rng&) const {
  if (family.n_actions() > 0) throw InvalidParameter("sinusoidal excitation needs continuous actions");
  Vector a(family.action_dim());
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double phase = omega_ * static_cast<double>(j + 1) * static_cast<double>(t) +
                         static_cast<double>(j) * std::numbers::pi / 2.0;
    a[j] = family.action_limit() * std::sin(phase);
  }
  return a;
}

StateSampler point_reset(Vector state) {
  return [state = std::move(state)](Rng&) { return state; };
}

namespace {

DatasetMeta make_meta(const SimulatorFamily& family, std::span<const double> xi_star,
                      const BehaviorPolicy& policy, CollectionMode mode, std::uint64_t seed) {
  DatasetMeta meta;
  meta.family = family.id();
  meta.mode = mode;
  meta.seed = seed;
  meta.behavior_policy = policy.id();
  meta.xi_star = Vector(xi_star.begin(), xi_star.end());
  return meta;
}

// Record k draws its action and next state from streams keyed by k alone, so an
// i.i.d. record and the first step of an episode coincide when they share a state.
Transition draw_transition(const SimulatorFamily& family, std::span<const double> xi_star,
                           const BehaviorPolicy& policy, Vector s, std::size_t t, std::size_t k,
                           std::uint64_t seed) {
  Rng action_rng = make_rng(seed, "behavior-action", k);
  Vector a = policy.action(family, s, t, action_rng);
  Vector s_next = family.step(xi_star, s, a, derive_seed(seed, "real-step", k));
  return Transition{std::move(s), std::move(a), std::move(s_next)};
}

}  // namespace

OfflineDataset collect_iid(const SimulatorFamily& family, std::span<const double> xi_star,
                           const BehaviorPolicy& policy, std::size_t n, const StateSampler& reset,
                           std::uint64_t seed) {
  if (n == 0) throw InvalidParameter("collect_iid needs n >= 1");
  family.validate_param(xi_star);
  std::vector<Transition> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng reset_rng = make_rng(seed, "reset", i);
    rows.push_back(draw_transition(family, xi_star, policy, reset(reset_rng), i, i, seed));
  }
  return OfflineDataset(make_meta(family, xi_star, policy, CollectionMode::kIid, seed), std::move(rows));
}

OfflineDataset collect_iid(const SimulatorFamily& family, std::span<const double> xi_star,
                           const BehaviorPolicy& policy, std::size_t n, std::uint64_t seed) {
  return collect_iid(family, xi_star, policy, n,
                     [&family](Rng& rng) { return family.sample_reset_state(rng); }, seed);
}

OfflineDataset collect_trajectories(const SimulatorFamily& family, std::span<const double> xi_star,
                                    const BehaviorPolicy& policy, std::size_t n_traj,
                                    std::size_t horizon, std::uint64_t seed) {
  if (n_traj == 0 || horizon == 0) throw InvalidParameter("collect_trajectories needs n_traj, horizon >= 1");
  family.validate_param(xi_star);
  std::vector<Transition> rows;
  rows.reserve(n_traj * horizon);
  for (std::size_t e = 0; e < n_traj; ++e) {
    Vector s = family.start_state();
    for (std::size_t t = 0; t < horizon; ++t) {
      Transition x = draw_transition(family, xi_star, policy, std::move(s), t, e * horizon + t, seed);
      s = x.s_next;
      rows.push_back(std::move(x));
    }
  }
  return OfflineDataset(make_meta(family, xi_star, policy, CollectionMode::kTrajectory, seed),
                        std::move(rows));
}

std::string to_jsonl(const OfflineDataset& dataset) {
  const DatasetMeta& m = dataset.meta();
  json header = {{"family", m.family},
                 {"mode", to_string(m.mode)},
                 {"seed", m.seed},
                 {"behavior_policy", m.behavior_policy},
                 {"n", dataset.size()}};
  if (m.xi_star) header["xi_star"] = *m.xi_star;
  std::string out = header.dump() + "\n";
  for (const Transition& x : dataset.transitions()) {
    out += json{{"s", x.s}, {"a", x.a}, {"s_next", x.s_next}}.dump();
    out += "\n";
  }
  return out;
}

OfflineDataset from_jsonl(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  DatasetMeta meta;
  bool have_header = false;
  std::vector<Transition> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      const long record = have_header ? static_cast<long>(rows.size()) : -1;
      throw DatasetError("line " + std::to_string(line_no) + ": malformed JSON (" + e.what() + ")", record);
    }
    if (!have_header) {
      try {
        meta.family = j.at("family").get<std::string>();
        meta.mode = collection_mode_from_string(j.at("mode").get<std::string>());
        meta.seed = j.at("seed").get<std::uint64_t>();
        meta.behavior_policy = j.value("behavior_policy", std::string{});
        if (j.contains("xi_star")) meta.xi_star = j.at("xi_star").get<Vector>();
      } catch (const std::exception& e) {
        throw DatasetError("line " + std::to_string(line_no) + ": bad header (" + e.what() + ")");
      }
      have_header = true;
      continue;
    }
    const long record = static_cast<long>(rows.size());
    Transition x;
    try {
      x.s = j.at("s").get<Vector>();
      x.a = j.at("a").get<Vector>();
      x.s_next = j.at("s_next").get<Vector>();
    } catch (const std::exception& e) {
      throw DatasetError("record " + std::to_string(record) + " (line " + std::to_string(line_no) +
                             "): " + e.what(),
                         record);
    }
    const bool inconsistent = x.s.size() != x.s_next.size() ||
                              (!rows.empty() && (x.s.size() != rows.front().s.size() ||
                                                 x.a.size() != rows.front().a.size()));
    if (inconsistent) {
      throw DatasetError("record " + std::to_string(record) + " (line " + std::to_string(line_no) +
                             "): dimension inconsistent with the dataset",
                         record);
    }
    rows.push_back(std::move(x));
  }
  if (rows.empty()) throw DatasetError("empty dataset");
  return OfflineDataset(std::move(meta), std::move(rows));
}

void save(const OfflineDataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DatasetError("cannot open " + path.string() + " for writing");
  out << to_jsonl(dataset);
  if (!out) throw DatasetError("write failed for " + path.string());
}

OfflineDataset load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_jsonl(buf.str());
}

}  // namespace odr
