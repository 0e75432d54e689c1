#include "odr/json_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "odr/errors.hpp"

namespace odr {

namespace {

// JSON has no non-finite numbers; they are written as strings.
Json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

double read_number(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return HUGE_VAL;
    if (s == "-inf") return -HUGE_VAL;
    if (s == "nan") return std::nan("");
  }
  throw InvalidParameter("expected a number, got " + j.dump());
}

Json numbers(const Vector& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(number(x));
  return out;
}

Vector read_numbers(const Json& j) {
  if (!j.is_array()) throw InvalidParameter("expected an array of numbers");
  Vector out;
  for (const auto& x : j) out.push_back(read_number(x));
  return out;
}

std::string join(const Vector& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += format_double(v[i]);
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json to_json(const DiagonalGaussian& g) { return Json{{"mu", numbers(g.mu())}, {"sigma", numbers(g.sigma())}}; }

DiagonalGaussian gaussian_from_json(const Json& j) {
  return DiagonalGaussian(read_numbers(j.at("mu")), read_numbers(j.at("sigma")));
}

Json to_json(const ParamBox& box) {
  return Json{{"lo", numbers(box.lo)},
              {"hi", numbers(box.hi)},
              {"sigma_floor", box.sigma_floor},
              {"sigma_max", box.sigma_max}};
}

ParamBox param_box_from_json(const Json& j) {
  const ParamBox defaults;
  return ParamBox(read_numbers(j.at("lo")), read_numbers(j.at("hi")),
                  j.value("sigma_floor", defaults.sigma_floor), j.value("sigma_max", defaults.sigma_max));
}

Json to_json(const FiniteMdpClass& c) {
  Json members = Json::array();
  for (const auto& rows : c.transitions()) {
    Json m = Json::array();
    for (const auto& per_action : rows) {
      Json s = Json::array();
      for (const auto& row : per_action) s.push_back(numbers(row));
      m.push_back(std::move(s));
    }
    members.push_back(std::move(m));
  }
  Json reward = Json::array();
  for (const auto& r : c.reward()) reward.push_back(numbers(r));
  return Json{{"n_states", c.n_states()},   {"n_actions", c.n_actions()},     {"horizon", c.horizon()},
              {"start_state", c.start_index()}, {"true_index", c.true_index()}, {"reward", reward},
              {"transitions", members}};
}

FiniteMdpClass finite_class_from_json(const Json& j) {
  std::vector<Vector> reward;
  for (const auto& r : j.at("reward")) reward.push_back(read_numbers(r));
  std::vector<FiniteMdpClass::Rows> transitions;
  for (const auto& m : j.at("transitions")) {
    FiniteMdpClass::Rows rows;
    for (const auto& s : m) {
      std::vector<Vector> per_action;
      for (const auto& row : s) per_action.push_back(read_numbers(row));
      rows.push_back(std::move(per_action));
    }
    transitions.push_back(std::move(rows));
  }
  return FiniteMdpClass(j.at("n_states").get<std::size_t>(), j.at("n_actions").get<std::size_t>(),
                        j.at("horizon").get<std::size_t>(), std::move(reward),
                        j.value("start_state", std::size_t{0}), std::move(transitions),
                        j.value("true_index", std::size_t{0}));
}

Json to_json(const FitConfig& config) {
  return Json{{"objective", to_string(config.kind)},
              {"K", config.objective.n_xi_samples},
              {"epsilon", config.objective.cov_regularizer},
              {"beta", config.objective.entropy_weight},
              {"covariance", to_string(config.objective.covariance)},
              {"objective_seed", config.objective.seed},
              {"population", config.cma.population},
              {"iterations", config.cma.iterations},
              {"initial_step", config.cma.initial_step},
              {"cma_seed", config.cma.seed}};
}

FitConfig fit_config_from_json(const Json& j, FitConfig c) {
  if (j.contains("objective")) c.kind = objective_kind_from_string(j.at("objective").get<std::string>());
  c.objective.n_xi_samples = j.value("K", c.objective.n_xi_samples);
  c.objective.cov_regularizer = j.value("epsilon", c.objective.cov_regularizer);
  c.objective.entropy_weight = j.value("beta", c.objective.entropy_weight);
  if (j.contains("covariance")) {
    c.objective.covariance = covariance_estimator_from_string(j.at("covariance").get<std::string>());
  }
  c.objective.seed = j.value("objective_seed", c.objective.seed);
  c.cma.population = j.value("population", c.cma.population);
  c.cma.iterations = j.value("iterations", c.cma.iterations);
  c.cma.initial_step = j.value("initial_step", c.cma.initial_step);
  c.cma.seed = j.value("cma_seed", c.cma.seed);
  return c;
}

Json to_json(const FitResult& r) {
  Json j{{"fitted", to_json(r.fitted)},
         {"objective_value", number(r.objective_value)},
         {"dataset_size", r.dataset_size},
         {"config", to_json(r.config)}};
  j["mse"] = r.mse ? number(*r.mse) : Json(nullptr);
  return j;
}

std::string fit_csv_header() { return "objective,beta,K,dataset_size,mu,sigma,objective_value,mse\n"; }

std::string fit_csv_row(const FitResult& r) {
  std::ostringstream out;
  out << to_string(r.config.kind) << ',' << format_double(r.config.objective.entropy_weight) << ','
      << r.config.objective.n_xi_samples << ',' << r.dataset_size << ',' << join(r.fitted.mu()) << ','
      << join(r.fitted.sigma()) << ',' << format_double(r.objective_value) << ','
      << (r.mse ? format_double(*r.mse) : std::string()) << '\n';
  return out.str();
}

Json to_json(const GapReport& r) {
  Json bounds = Json::array();
  for (const EpsilonBound& b : r.epsilon_bounds) {
    bounds.push_back(Json{{"epsilon", b.epsilon},
                          {"ball_mass", number(b.ball_mass)},
                          {"bound", b.lemma5 ? number(*b.lemma5) : Json(nullptr)}});
  }
  return Json{{"gap_udr", number(r.gap_udr)},
              {"gap_odr", number(r.gap_odr)},
              {"alpha", number(r.alpha)},
              {"C", number(r.c)},
              {"rhs", number(r.lemma4_rhs)},
              {"holds", r.lemma4_holds},
              {"C_tight", number(r.c_tight)},
              {"holds_tight", r.lemma4_tight_holds},
              {"member_gaps_odr", numbers(r.member_gaps_odr)},
              {"member_gaps_udr", numbers(r.member_gaps_udr)},
              {"epsilon_bounds", bounds}};
}

std::string gap_csv(const GapReport& r) {
  std::ostringstream out;
  out << "gap_udr,gap_odr,alpha,C,rhs,holds,C_tight,holds_tight\n"
      << format_double(r.gap_udr) << ',' << format_double(r.gap_odr) << ',' << format_double(r.alpha) << ','
      << format_double(r.c) << ',' << format_double(r.lemma4_rhs) << ',' << (r.lemma4_holds ? 1 : 0) << ','
      << format_double(r.c_tight) << ',' << (r.lemma4_tight_holds ? 1 : 0) << '\n';
  return out.str();
}

Json to_json(const SweepReport& r) {
  Json summaries = Json::array();
  for (const SweepSummary& s : r.summaries) {
    summaries.push_back(Json{{"N", s.n},
                             {"mu_error_q1", number(s.mu_error.q1)},
                             {"mu_error_median", number(s.mu_error.median)},
                             {"mu_error_q3", number(s.mu_error.q3)},
                             {"sigma_median", number(s.sigma_norm.median)},
                             {"median_ball_mass", numbers(s.median_ball_mass)},
                             {"miss_fraction", numbers(s.miss_fraction)},
                             {"failures", s.failures}});
  }
  return Json{{"xi_star", numbers(r.config.xi_star)},
              {"radii", numbers(r.config.radii)},
              {"trials", r.config.trials},
              {"seed", r.config.seed},
              {"fit", to_json(r.config.fit)},
              {"summaries", summaries}};
}

namespace {

// Shortest round-trip form, for column names.
std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string sweep_csv(const SweepReport& r) {
  std::ostringstream out;
  out << "N,trial,mu,sigma,mu_error,sigma_norm,phi_error";
  for (double radius : r.config.radii) out << ",ball_mass_" << shortest(radius);
  out << ",error\n";
  for (const SweepCell& c : r.cells) {
    out << c.n << ',' << c.trial << ',';
    if (c.fitted) {
      out << join(c.fitted->mu()) << ',' << join(c.fitted->sigma()) << ',' << format_double(c.mu_error) << ','
          << format_double(c.sigma_norm) << ',' << format_double(c.phi_error);
    } else {
      out << ",,,,";
    }
    for (std::size_t i = 0; i < r.config.radii.size(); ++i) {
      out << ',';
      if (i < c.ball_masses.size()) out << format_double(c.ball_masses[i].monte_carlo);
    }
    std::string err = c.error;
    for (char& ch : err) {
      if (ch == ',' || ch == '\n') ch = ' ';
    }
    out << ',' << err << '\n';
  }
  return out.str();
}

}  // namespace odr
