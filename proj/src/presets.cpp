#include "odr/presets.hpp"

#include "odr/errors.hpp"

namespace odr {

Task point_mass_task(double noise_std) {
  PointMassSim sim = PointMassSim::mass_friction(0.1, Vector(2, noise_std), 1.0);
  // The sigma floor is 0.1% of the box width; below it the likelihood is flat in log sigma.
  return Task{std::move(sim), Vector{1.0, 0.5}, ParamBox(Vector{0.5, 0.0}, Vector{1.5, 1.0}, 1e-3, 0.5)};
}

Task mass_task(double noise_std) {
  PointMassSim sim = PointMassSim::masses(2, 0.1, Vector(4, noise_std), 0.1, 10.0);
  // +-20% around the true masses.
  return Task{std::move(sim), Vector{32.0, 4.0}, ParamBox(Vector{25.6, 3.2}, Vector{38.4, 4.8}, 1e-6, 4.0)};
}

Task task_by_name(const std::string& name, double noise_std) {
  if (name == "point-mass") return point_mass_task(noise_std);
  if (name == "mass-task") return mass_task(noise_std);
  throw InvalidParameter("unknown task '" + name + "'");
}

double default_noise(const std::string& name) {
  if (name == "point-mass") return 0.02;
  if (name == "mass-task") return 0.01;
  throw InvalidParameter("unknown task '" + name + "'");
}

}  // namespace odr
