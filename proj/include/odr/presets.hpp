#pragma once

#include <string>

#include "odr/gaussian.hpp"
#include "odr/simulators.hpp"

namespace odr {

/// A point-mass simulator together with its true parameter and a search box.
struct Task {
  PointMassSim family;
  Vector xi_star;
  ParamBox box;
};

/// One body, xi = (mass, friction).
Task point_mass_task(double noise_std);
/// Two bodies with unknown masses and known friction.
Task mass_task(double noise_std);
/// "point-mass" or "mass-task"; throws InvalidParameter otherwise.
Task task_by_name(const std::string& name, double noise_std);
double default_noise(const std::string& name);

}  // namespace odr
