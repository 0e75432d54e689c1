#include "odr/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "odr/errors.hpp"
#include "odr/rng.hpp"

namespace odr {
namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

void check_dims(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) {
    throw DimensionMismatch(std::string(what) + ": expected dimension " + std::to_string(expected) +
                            ", got " + std::to_string(got));
  }
}

void require_nondegenerate(const DiagonalGaussian& g) {
  if (g.degenerate()) throw DegenerateDistribution("gaussian has a zero standard deviation");
}

}  // namespace

DiagonalGaussian::DiagonalGaussian(Vector mu, Vector sigma) : mu_(std::move(mu)), sigma_(std::move(sigma)) {
  check_dims(mu_.size(), sigma_.size(), "DiagonalGaussian sigma");
  for (double s : sigma_) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw InvalidParameter("sigma must be finite and >= 0");
  }
}

DiagonalGaussian DiagonalGaussian::point_mass(Vector mu) {
  Vector zeros(mu.size(), 0.0);
  return DiagonalGaussian(std::move(mu), std::move(zeros));
}

bool DiagonalGaussian::degenerate() const noexcept {
  return std::any_of(sigma_.begin(), sigma_.end(), [](double s) { return s == 0.0; });
}

ParamBox::ParamBox(Vector lo_, Vector hi_, double floor, double max)
    : lo(std::move(lo_)), hi(std::move(hi_)), sigma_floor(floor), sigma_max(max) {
  check_dims(lo.size(), hi.size(), "ParamBox hi");
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!(lo[i] < hi[i])) throw InvalidParameter("ParamBox requires lo < hi in every dimension");
  }
  if (!(sigma_floor > 0.0 && sigma_floor < sigma_max)) {
    throw InvalidParameter("ParamBox requires 0 < sigma_floor < sigma_max");
  }
}

ParamBox ParamBox::around(const Vector& center, double fraction, double floor, double max) {
  Vector lo(center.size()), hi(center.size());
  for (std::size_t i = 0; i < center.size(); ++i) {
    const double half = std::abs(center[i]) * fraction;
    lo[i] = center[i] - half;
    hi[i] = center[i] + half;
  }
  return ParamBox(std::move(lo), std::move(hi), floor, max);
}

Vector ParamBox::center() const {
  Vector c(dim());
  for (std::size_t i = 0; i < dim(); ++i) c[i] = 0.5 * (lo[i] + hi[i]);
  return c;
}

Vector ParamBox::width() const {
  Vector w(dim());
  for (std::size_t i = 0; i < dim(); ++i) w[i] = hi[i] - lo[i];
  return w;
}

bool ParamBox::contains(const DiagonalGaussian& g) const {
  if (g.dim() != dim()) return false;
  for (std::size_t i = 0; i < dim(); ++i) {
    if (g.mu()[i] < lo[i] || g.mu()[i] > hi[i]) return false;
    if (g.sigma()[i] < sigma_floor || g.sigma()[i] > sigma_max) return false;
  }
  return true;
}

DiagonalGaussian ParamBox::clamp(const DiagonalGaussian& g) const {
  check_dims(dim(), g.dim(), "ParamBox::clamp");
  Vector mu(dim()), sigma(dim());
  for (std::size_t i = 0; i < dim(); ++i) {
    mu[i] = std::clamp(g.mu()[i], lo[i], hi[i]);
    sigma[i] = std::clamp(g.sigma()[i], sigma_floor, sigma_max);
  }
  return DiagonalGaussian(std::move(mu), std::move(sigma));
}

double entropy(const DiagonalGaussian& g) {
  require_nondegenerate(g);
  double h = 0.5 * static_cast<double>(g.dim()) * (1.0 + kLog2Pi);
  for (double s : g.sigma()) h += std::log(s);
  return h;
}

double log_density(const DiagonalGaussian& g, std::span<const double> x) {
  check_dims(g.dim(), x.size(), "log_density point");
  require_nondegenerate(g);
  double lp = -0.5 * static_cast<double>(g.dim()) * kLog2Pi;
  for (std::size_t i = 0; i < g.dim(); ++i) {
    const double z = (x[i] - g.mu()[i]) / g.sigma()[i];
    lp -= std::log(g.sigma()[i]) + 0.5 * z * z;
  }
  return lp;
}

std::vector<Vector> sample(const DiagonalGaussian& g, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal;
  std::vector<Vector> rows(count, Vector(g.dim()));
  for (auto& row : rows) {
    for (std::size_t i = 0; i < g.dim(); ++i) row[i] = g.mu()[i] + g.sigma()[i] * normal(rng);
  }
  return rows;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  check_dims(a.size(), b.size(), "euclidean_distance");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

double ball_mass_mc(const DiagonalGaussian& g, std::span<const double> center, double radius,
                    std::size_t n_mc, std::uint64_t seed) {
  check_dims(g.dim(), center.size(), "ball_mass_mc center");
  if (!(radius > 0.0)) throw InvalidParameter("ball radius must be positive");
  if (n_mc == 0) throw InvalidParameter("n_mc must be >= 1");
  Rng rng(seed);
  std::normal_distribution<double> normal;
  const double r2 = radius * radius;
  std::size_t inside = 0;
  for (std::size_t k = 0; k < n_mc; ++k) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < g.dim(); ++i) {
      const double diff = g.mu()[i] + g.sigma()[i] * normal(rng) - center[i];
      d2 += diff * diff;
    }
    if (d2 < r2) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(n_mc);
}

double chebyshev_ball_lower_bound(const DiagonalGaussian& g, std::span<const double> center,
                                  double radius) {
  check_dims(g.dim(), center.size(), "chebyshev_ball_lower_bound center");
  if (!(radius > 0.0)) throw InvalidParameter("ball radius must be positive");
  if (!(euclidean_distance(g.mu(), center) < 0.5 * radius)) return 0.0;
  double trace = 0.0;
  for (double s : g.sigma()) trace += s * s;
  return std::max(0.0, 1.0 - 4.0 * trace / (radius * radius));
}

}  // namespace odr
