#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace odr {

using Vector = std::vector<double>;

/// N(mu, diag(sigma^2)) over simulator parameters. sigma may be zero (point mass).
class DiagonalGaussian {
 public:
  DiagonalGaussian() = default;
  DiagonalGaussian(Vector mu, Vector sigma);

  static DiagonalGaussian point_mass(Vector mu);

  const Vector& mu() const noexcept { return mu_; }
  const Vector& sigma() const noexcept { return sigma_; }
  std::size_t dim() const noexcept { return mu_.size(); }
  bool degenerate() const noexcept;

  friend bool operator==(const DiagonalGaussian&, const DiagonalGaussian&) = default;

 private:
  Vector mu_;
  Vector sigma_;
};

/// Compact search region for (mu, sigma): mu in [lo, hi] per dimension and every sigma
/// in [sigma_floor, sigma_max].
struct ParamBox {
  Vector lo;
  Vector hi;
  double sigma_floor = 1e-6;
  double sigma_max = 1.0;

  ParamBox() = default;
  ParamBox(Vector lo, Vector hi, double sigma_floor, double sigma_max);

  /// Box of +/- `fraction` around `center` (relative, per dimension).
  static ParamBox around(const Vector& center, double fraction, double sigma_floor, double sigma_max);

  std::size_t dim() const noexcept { return lo.size(); }
  Vector center() const;
  Vector width() const;
  bool contains(const DiagonalGaussian& g) const;
  DiagonalGaussian clamp(const DiagonalGaussian& g) const;
};

/// Differential entropy (d/2)(1 + ln 2pi) + sum_i ln sigma_i.
/// Throws DegenerateDistribution when any sigma_i is zero.
double entropy(const DiagonalGaussian& g);

double log_density(const DiagonalGaussian& g, std::span<const double> x);

/// `count` i.i.d. rows from g, deterministic in `seed`.
std::vector<Vector> sample(const DiagonalGaussian& g, std::size_t count, std::uint64_t seed);

/// Monte Carlo estimate of P_g(||X - center||_2 < radius).
double ball_mass_mc(const DiagonalGaussian& g, std::span<const double> center, double radius,
                    std::size_t n_mc, std::uint64_t seed);

/// Chebyshev lower bound on the same ball mass: 1 - 4 tr(Sigma) / radius^2 when the mean
/// lies within radius/2 of the center, 0 otherwise; clipped to [0, 1].
double chebyshev_ball_lower_bound(const DiagonalGaussian& g, std::span<const double> center,
                                  double radius);

double euclidean_distance(std::span<const double> a, std::span<const double> b);

}  // namespace odr
