// odr: data collection, fitting, consistency sweeps and gap evaluation.
//
// Every subcommand takes a mandatory --seed and an optional --config JSON file whose keys
// are the long flag names without dashes. Flags given on the command line win over the
// config file, which wins over built-in defaults.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "odr/consistency_lab.hpp"
#include "odr/dataset.hpp"
#include "odr/errors.hpp"
#include "odr/fitting.hpp"
#include "odr/gap_eval.hpp"
#include "odr/json_io.hpp"
#include "odr/presets.hpp"

namespace {

using odr::Json;
using odr::Vector;

constexpr int kAssertionFailed = 2;
constexpr int kRuntimeError = 3;

void write_file(const std::string& path, const std::string& content) {
  if (path.empty()) return;
  if (path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw odr::Error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw odr::Error("failed writing '" + path + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw odr::Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Turns config keys into "--key value" arguments for options not given on the command
// line; they are parsed as if typed, so validators apply to them too.
std::vector<std::string> config_arguments(const std::string& path, const std::vector<std::string>& given) {
  Json cfg;
  try {
    cfg = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw odr::Error("config '" + path + "' is not valid JSON: " + e.what());
  }
  if (!cfg.is_object()) throw odr::Error("config '" + path + "' must be a JSON object");
  std::vector<std::string> out;
  for (const auto& [key, value] : cfg.items()) {
    const std::string flag = "--" + key;
    bool on_command_line = false;
    for (const std::string& arg : given) {
      if (arg == flag || arg.rfind(flag + "=", 0) == 0) on_command_line = true;
    }
    if (on_command_line || key == "config") continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) out.push_back(flag);
      continue;
    }
    out.push_back(flag);
    auto scalar = [](const Json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
    if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) joined += (joined.empty() ? "" : ",") + scalar(v);
      out.push_back(joined);
    } else {
      out.push_back(scalar(value));
    }
  }
  return out;
}

// Rewrites argv so that config-file values sit right after the subcommand name.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::string config_path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
  }
  if (config_path.empty() || args.size() < 2) return args;
  std::vector<std::string> extra = config_arguments(config_path, args);
  args.insert(args.begin() + 2, extra.begin(), extra.end());
  return args;
}

struct FamilyOptions {
  std::string family = "point-mass";
  std::optional<double> noise;
  std::string class_file;
};

void add_family_options(CLI::App* cmd, FamilyOptions& f) {
  cmd->add_option("--family", f.family, "point-mass, mass-task or finite")
      ->check(CLI::IsMember({"point-mass", "mass-task", "finite"}));
  cmd->add_option("--noise", f.noise, "transition noise std of the simulator")->check(CLI::NonNegativeNumber);
  cmd->add_option("--class", f.class_file, "finite MDP class JSON (family finite)");
}

odr::FiniteMdpClass load_class(const std::string& path) {
  if (path.empty()) throw odr::InvalidParameter("family finite needs --class");
  return odr::finite_class_from_json(Json::parse(read_file(path)));
}

// ---------------------------------------------------------------------------------------

struct GenDataOptions {
  FamilyOptions family;
  std::string mode = "iid";
  std::size_t n = 1000;
  std::size_t n_traj = 20;
  std::size_t horizon = 50;
  std::string policy = "uniform";
  Vector xi;
  std::string out = "-";
  std::uint64_t seed = 0;
};

int run_gen_data(const GenDataOptions& o) {
  std::unique_ptr<odr::SimulatorFamily> family;
  Vector truth = o.xi;
  if (o.family.family == "finite") {
    auto c = std::make_unique<odr::FiniteMdpClass>(load_class(o.family.class_file));
    if (truth.empty()) truth = Vector{static_cast<double>(c->true_index())};
    family = std::move(c);
  } else {
    odr::Task task = odr::task_by_name(o.family.family, o.family.noise.value_or(odr::default_noise(o.family.family)));
    if (truth.empty()) truth = task.xi_star;
    family = std::make_unique<odr::PointMassSim>(task.family);
  }
  std::unique_ptr<odr::BehaviorPolicy> policy;
  if (o.policy == "sinusoid") {
    policy = std::make_unique<odr::SinusoidalExcitation>();
  } else {
    policy = std::make_unique<odr::UniformRandomPolicy>();
  }
  const odr::OfflineDataset data = o.mode == "trajectory"
                                       ? odr::collect_trajectories(*family, truth, *policy, o.n_traj, o.horizon, o.seed)
                                       : odr::collect_iid(*family, truth, *policy, o.n, o.seed);
  write_file(o.out, odr::to_jsonl(data));
  std::cerr << "wrote " << data.size() << " transitions\n";
  return 0;
}

// ---------------------------------------------------------------------------------------

struct FitOptions {
  FamilyOptions family;
  std::string data;
  std::string method = "edropo";
  std::string objective = "dropo";
  std::optional<double> beta;
  double epsilon = 1e-5;
  std::size_t k = 10;
  std::size_t iterations = 20;
  std::size_t population = 10;
  Vector box_lo;
  Vector box_hi;
  std::optional<double> sigma_floor;
  std::optional<double> sigma_max;
  std::string out = "-";
  std::string csv;
  std::uint64_t seed = 0;
};

odr::ParamBox resolve_box(const odr::ParamBox& preset, const Vector& lo, const Vector& hi,
                          std::optional<double> floor, std::optional<double> max) {
  return odr::ParamBox(lo.empty() ? preset.lo : lo, hi.empty() ? preset.hi : hi, floor.value_or(preset.sigma_floor),
                       max.value_or(preset.sigma_max));
}

int run_fit(const FitOptions& o) {
  const odr::OfflineDataset data = odr::load(o.data);
  const std::string family_name = o.family.family;
  std::unique_ptr<odr::SimulatorFamily> family;
  odr::ParamBox box;
  if (family_name == "finite") {
    auto c = std::make_unique<odr::FiniteMdpClass>(load_class(o.family.class_file));
    const double top = static_cast<double>(c->n_members() - 1);
    box = resolve_box(odr::ParamBox(Vector{0.0}, Vector{top}, 1e-3, std::max(1.0, top)), o.box_lo, o.box_hi,
                      o.sigma_floor, o.sigma_max);
    family = std::move(c);
  } else {
    odr::Task task = odr::task_by_name(family_name, o.family.noise.value_or(odr::default_noise(family_name)));
    box = resolve_box(task.box, o.box_lo, o.box_hi, o.sigma_floor, o.sigma_max);
    family = std::make_unique<odr::PointMassSim>(task.family);
  }
  if (data.meta().family != family->id()) {
    throw odr::InvalidParameter("dataset was collected on '" + data.meta().family + "' but --family gives '" +
                                family->id() + "'");
  }

  odr::FitConfig config;
  config.kind = odr::objective_kind_from_string(o.objective);
  config.objective.n_xi_samples = o.k;
  config.objective.cov_regularizer = o.epsilon;
  config.objective.entropy_weight = o.method == "dropo" ? 0.0 : o.beta.value_or(0.002);
  config.objective.seed = odr::derive_seed(o.seed, "objective");
  config.cma.iterations = o.iterations;
  config.cma.population = o.population;
  config.cma.seed = odr::derive_seed(o.seed, "cma");

  const odr::FitResult result = odr::fit(data, *family, box, config);
  write_file(o.out, odr::to_json(result).dump(2) + "\n");
  if (!o.csv.empty()) write_file(o.csv, odr::fit_csv_header() + odr::fit_csv_row(result));

  std::fprintf(stderr, "%-6s %14s %14s\n", "dim", "mu", "sigma");
  for (std::size_t i = 0; i < result.fitted.dim(); ++i) {
    std::fprintf(stderr, "%-6zu %14.6g %14.6g\n", i, result.fitted.mu()[i], result.fitted.sigma()[i]);
  }
  if (result.mse) std::fprintf(stderr, "mse %.6g\n", *result.mse);
  return 0;
}

// ---------------------------------------------------------------------------------------

struct SweepOptions {
  FamilyOptions family;
  std::vector<std::size_t> sizes{100, 1000, 10000};
  std::size_t trials = 10;
  Vector xi;
  Vector radii;
  // Defaults reproduce the acceptance sweep.
  std::size_t k = 30;
  std::size_t iterations = 100;
  std::size_t population = 8;
  std::size_t n_mc = 100000;
  std::string csv = "-";
  std::string json;
  std::uint64_t seed = 0;
};

int run_sweep(const SweepOptions& o) {
  if (o.family.family == "finite") throw odr::InvalidParameter("sweeps run on point-mass families");
  const odr::Task task =
      odr::task_by_name(o.family.family, o.family.noise.value_or(odr::default_noise(o.family.family)));
  odr::SweepConfig config;
  config.sizes = o.sizes;
  config.trials = o.trials;
  config.xi_star = o.xi.empty() ? task.xi_star : o.xi;
  config.box = task.box;
  config.radii = o.radii;
  if (config.radii.empty()) {
    const Vector w = task.box.width();
    config.radii = {0.1 * *std::min_element(w.begin(), w.end())};
  }
  config.fit.kind = odr::ObjectiveKind::kExactMixture;
  config.fit.objective.entropy_weight = 0.0;
  config.fit.objective.n_xi_samples = o.k;
  config.fit.cma.iterations = o.iterations;
  config.fit.cma.population = o.population;
  config.n_mc = o.n_mc;
  config.seed = o.seed;

  const odr::UniformRandomPolicy policy;
  const odr::SweepReport report = odr::consistency_sweep(task.family, policy, config);
  write_file(o.csv, odr::sweep_csv(report));
  if (!o.json.empty()) write_file(o.json, odr::to_json(report).dump(2) + "\n");

  std::fprintf(stderr, "%8s %12s %12s %12s %12s %12s %6s\n", "N", "err_q1", "err_median", "err_q3", "sigma_med",
               "ball_mass", "fail");
  for (const odr::SweepSummary& s : report.summaries) {
    std::fprintf(stderr, "%8zu %12.4g %12.4g %12.4g %12.4g %12.4g %6zu\n", s.n, s.mu_error.q1, s.mu_error.median,
                 s.mu_error.q3, s.sigma_norm.median, s.median_ball_mass.front(), s.failures);
  }
  return 0;
}

// ---------------------------------------------------------------------------------------

struct GapOptions {
  std::size_t m = 3;
  std::size_t states = 3;
  std::size_t actions = 2;
  std::size_t horizon = 3;
  double delta = 0.3;
  std::size_t true_index = 0;
  std::optional<double> alpha;
  std::size_t fit_n = 0;
  Vector eps;
  double lipschitz = 0.0;
  std::string class_file;
  std::string out = "-";
  std::string csv;
  std::string class_out;
  std::uint64_t seed = 0;
};

int run_gap(const GapOptions& o) {
  odr::FiniteMdpClass mdp_class = [&] {
    if (!o.class_file.empty()) return load_class(o.class_file);
    odr::FiniteClassSpec spec;
    spec.n_states = o.states;
    spec.n_actions = o.actions;
    spec.horizon = o.horizon;
    spec.n_members = o.m;
    spec.min_separation = o.delta;
    spec.true_index = o.true_index;
    return odr::generate_finite_class(spec, odr::derive_seed(o.seed, "instance"));
  }();
  if (o.true_index != mdp_class.true_index()) mdp_class = mdp_class.with_true_index(o.true_index);

  odr::DiscretePrior prior = odr::DiscretePrior::uniform(mdp_class.n_members());
  Json prior_json;
  if (o.fit_n > 0) {
    // Fitted prior: exact-mixture fit on logged data, Gaussian mass binned onto members.
    const Vector truth{static_cast<double>(mdp_class.true_index())};
    const odr::UniformRandomPolicy policy;
    const odr::OfflineDataset data =
        odr::collect_iid(mdp_class, truth, policy, o.fit_n, odr::derive_seed(o.seed, "gap-data"));
    odr::FitConfig config;
    config.kind = odr::ObjectiveKind::kExactMixture;
    config.objective.entropy_weight = 0.0;
    config.objective.seed = odr::derive_seed(o.seed, "objective");
    config.cma.seed = odr::derive_seed(o.seed, "cma");
    const double top = static_cast<double>(mdp_class.n_members() - 1);
    const odr::FitResult fitted =
        odr::fit(data, mdp_class, odr::ParamBox(Vector{0.0}, Vector{top}, 1e-3, std::max(1.0, top)), config);
    prior = odr::DiscretePrior::from_gaussian(mdp_class, fitted.fitted);
    prior_json = Json{{"source", "fit"}, {"fitted", odr::to_json(fitted.fitted)}};
  } else {
    const double alpha = o.alpha.value_or(0.9);
    prior = odr::DiscretePrior::informative(mdp_class.n_members(), mdp_class.true_index(), alpha);
    prior_json = Json{{"source", "synthetic"}, {"alpha", alpha}};
  }

  const odr::GapReport report = odr::udr_vs_odr_report(mdp_class, prior, o.eps, o.lipschitz);
  Json out = odr::to_json(report);
  out["prior"] = prior_json;
  out["prior"]["weights"] = prior.weights();
  write_file(o.out, out.dump(2) + "\n");
  if (!o.csv.empty()) write_file(o.csv, odr::gap_csv(report));
  if (!o.class_out.empty()) write_file(o.class_out, odr::to_json(mdp_class).dump(2) + "\n");

  if (!report.lemma4_holds || !report.lemma4_tight_holds) {
    const Json failure{{"failure", "lemma4"},
                       {"gap_odr", report.gap_odr},
                       {"alpha", report.alpha},
                       {"C", report.c},
                       {"C_tight", report.c_tight},
                       {"holds", report.lemma4_holds},
                       {"holds_tight", report.lemma4_tight_holds}};
    std::cerr << failure.dump() << "\n";
    return kAssertionFailed;
  }
  return 0;
}

// ---------------------------------------------------------------------------------------

struct EntropyOptions {
  Vector mu{0.0};
  Vector sigma{1.0};
  std::size_t n_mc = 100000;
  Vector radii;
  std::string out = "-";
  std::uint64_t seed = 0;
};

int run_entropy(const EntropyOptions& o) {
  const odr::DiagonalGaussian g(o.mu, o.sigma);
  const double closed = odr::entropy(g);
  const auto samples = odr::sample(g, o.n_mc, odr::derive_seed(o.seed, "entropy-mc"));
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const Vector& x : samples) {
    const double v = -odr::log_density(g, x);
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(samples.size());
  const double mean = sum / n;
  const double stderr_mc = std::sqrt(std::max(0.0, sum_sq / n - mean * mean) / n);

  Json out{{"gaussian", odr::to_json(g)},
           {"entropy", closed},
           {"monte_carlo", mean},
           {"standard_error", stderr_mc},
           {"n_mc", o.n_mc}};
  Json balls = Json::array();
  for (double r : o.radii) {
    balls.push_back(Json{{"radius", r},
                         {"monte_carlo", odr::ball_mass_mc(g, g.mu(), r, o.n_mc, odr::derive_seed(o.seed, "ball"))},
                         {"chebyshev", odr::chebyshev_ball_lower_bound(g, g.mu(), r)}});
  }
  out["ball_masses"] = balls;
  write_file(o.out, out.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Offline domain randomization: fit parameter distributions from logged transitions"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  std::string config_path;

  GenDataOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "collect an offline dataset from a simulator");
  add_family_options(gen_cmd, gen.family);
  gen_cmd->add_option("--mode", gen.mode, "iid or trajectory")->check(CLI::IsMember({"iid", "trajectory"}));
  gen_cmd->add_option("--n", gen.n, "number of i.i.d. transitions")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--n-traj", gen.n_traj, "number of trajectories")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--horizon", gen.horizon, "trajectory length")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--policy", gen.policy, "behavior policy")->check(CLI::IsMember({"uniform", "sinusoid"}));
  gen_cmd->add_option("--xi", gen.xi, "true parameter (defaults to the task's)")->delimiter(',');
  gen_cmd->add_option("--out", gen.out, "output JSON-lines path, - for stdout");
  gen_cmd->add_option("--seed", gen.seed, "root seed")->required();
  gen_cmd->add_option("--config", config_path, "JSON config file");

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "fit a Gaussian parameter distribution to a dataset");
  add_family_options(fit_cmd, fit.family);
  fit_cmd->add_option("--data", fit.data, "dataset JSON-lines file")->required();
  fit_cmd->add_option("--method", fit.method, "edropo or dropo (beta = 0)")->check(CLI::IsMember({"edropo", "dropo"}));
  fit_cmd->add_option("--objective", fit.objective, "dropo or exact-mixture")
      ->check(CLI::IsMember({"dropo", "exact-mixture"}));
  fit_cmd->add_option("--beta", fit.beta, "entropy weight")->check(CLI::NonNegativeNumber);
  fit_cmd->add_option("--epsilon", fit.epsilon, "variance regularizer")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--K", fit.k, "parameter samples per transition")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--iterations", fit.iterations, "CMA-ES generations")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--population", fit.population, "CMA-ES population")->check(CLI::Range(2, 10000));
  fit_cmd->add_option("--box-lo", fit.box_lo, "lower parameter bounds")->delimiter(',');
  fit_cmd->add_option("--box-hi", fit.box_hi, "upper parameter bounds")->delimiter(',');
  fit_cmd->add_option("--sigma-floor", fit.sigma_floor, "smallest sigma")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--sigma-max", fit.sigma_max, "largest sigma")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--out", fit.out, "result JSON path, - for stdout");
  fit_cmd->add_option("--csv", fit.csv, "result CSV path");
  fit_cmd->add_option("--seed", fit.seed, "root seed")->required();
  fit_cmd->add_option("--config", config_path, "JSON config file");

  SweepOptions sweep;
  auto* sweep_cmd = app.add_subcommand("sweep-consistency", "consistency sweep over dataset sizes");
  sweep_cmd->alias("sweep");
  add_family_options(sweep_cmd, sweep.family);
  sweep_cmd->add_option("--sizes", sweep.sizes, "increasing dataset sizes")->delimiter(',');
  sweep_cmd->add_option("--trials", sweep.trials, "trials per size")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--xi", sweep.xi, "true parameter")->delimiter(',');
  sweep_cmd->add_option("--radii", sweep.radii, "ball radii (default 10% of the narrowest box side)")
      ->delimiter(',');
  sweep_cmd->add_option("--K", sweep.k, "parameter samples per transition")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--iterations", sweep.iterations, "CMA-ES generations")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--population", sweep.population, "CMA-ES population")->check(CLI::Range(2, 10000));
  sweep_cmd->add_option("--n-mc", sweep.n_mc, "Monte Carlo samples for ball masses")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--csv", sweep.csv, "per-cell CSV path, - for stdout");
  sweep_cmd->add_option("--json", sweep.json, "summary JSON path");
  sweep_cmd->add_option("--seed", sweep.seed, "root seed")->required();
  sweep_cmd->add_option("--config", config_path, "JSON config file");

  GapOptions gap;
  auto* gap_cmd = app.add_subcommand("eval-gap", "UDR vs ODR sim-to-real gap on a finite MDP class");
  gap_cmd->alias("gap");
  gap_cmd->add_option("--m", gap.m, "number of member MDPs")->check(CLI::Range(2, 64));
  gap_cmd->add_option("--states", gap.states, "states per MDP")->check(CLI::PositiveNumber);
  gap_cmd->add_option("--actions", gap.actions, "actions per state")->check(CLI::PositiveNumber);
  gap_cmd->add_option("--horizon", gap.horizon, "episode length")->check(CLI::PositiveNumber);
  gap_cmd->add_option("--delta", gap.delta, "minimum L1 separation of members")->check(CLI::Range(0.0, 2.0));
  gap_cmd->add_option("--true-index", gap.true_index, "index of the real MDP");
  auto* alpha_opt = gap_cmd->add_option("--alpha", gap.alpha, "synthetic prior mass on the true member")
                        ->check(CLI::Range(0.0, 1.0));
  gap_cmd->add_option("--fit-n", gap.fit_n, "fit the prior on this many logged transitions instead")
      ->excludes(alpha_opt);
  gap_cmd->add_option("--eps", gap.eps, "ball radii for the epsilon bound")->delimiter(',');
  gap_cmd->add_option("--lipschitz", gap.lipschitz, "Lipschitz constant of the value in xi")
      ->check(CLI::NonNegativeNumber);
  gap_cmd->add_option("--class", gap.class_file, "finite MDP class JSON instead of a generated one");
  gap_cmd->add_option("--class-out", gap.class_out, "write the instance JSON here");
  gap_cmd->add_option("--out", gap.out, "report JSON path, - for stdout");
  gap_cmd->add_option("--csv", gap.csv, "report CSV path");
  gap_cmd->add_option("--seed", gap.seed, "root seed")->required();
  gap_cmd->add_option("--config", config_path, "JSON config file");

  EntropyOptions ent;
  auto* ent_cmd = app.add_subcommand("entropy-demo", "closed-form vs Monte Carlo Gaussian entropy");
  ent_cmd->add_option("--mu", ent.mu, "mean")->delimiter(',');
  ent_cmd->add_option("--sigma", ent.sigma, "standard deviations")->delimiter(',');
  ent_cmd->add_option("--n-mc", ent.n_mc, "Monte Carlo samples")->check(CLI::PositiveNumber);
  ent_cmd->add_option("--radii", ent.radii, "ball radii around the mean")->delimiter(',');
  ent_cmd->add_option("--out", ent.out, "output JSON path, - for stdout");
  ent_cmd->add_option("--seed", ent.seed, "root seed")->required();
  ent_cmd->add_option("--config", config_path, "JSON config file");

  std::vector<std::string> args;
  try {
    args = expand_config(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  std::vector<char*> cargs;
  for (std::string& a : args) cargs.push_back(a.data());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*gen_cmd) return run_gen_data(gen);
    if (*fit_cmd) return run_fit(fit);
    if (*sweep_cmd) return run_sweep(sweep);
    if (*gap_cmd) return run_gap(gap);
    if (*ent_cmd) return run_entropy(ent);
  } catch (const std::exception& e) {
    std::cerr << Json{{"error", e.what()}}.dump() << "\n";
    return kRuntimeError;
  }
  return 0;
}
