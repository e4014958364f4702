#include "magshape/winding.hpp"

#include <cmath>
#include <stdexcept>

namespace magshape {

double winding_factor(int nu, int slots_per_pole_per_phase, double slot_angle, double pitch_ratio,
                      double skew_angle) {
  if (nu < 1) throw std::invalid_argument("winding_factor: harmonic must be >= 1");
  const int q = slots_per_pole_per_phase;
  if (q < 1) throw std::invalid_argument("winding_factor: slots per pole per phase must be >= 1");

  const double half = 0.5 * nu * slot_angle;
  const double denom = q * std::sin(half);
  const double distribution = std::abs(denom) < 1e-300 ? 1.0 : std::sin(q * half) / denom;

  const double pitch = std::sin(0.5 * nu * 3.14159265358979323846 * pitch_ratio);

  const double xs = 0.5 * nu * skew_angle;
  const double skew = xs == 0.0 ? 1.0 : std::sin(xs) / xs;

  return distribution * pitch * skew;
}

EmfResult emf_loading(const Vector& potentials, const Vector& angles, int pole_pairs, double omega,
                      double turns, double winding_factor_fundamental) {
  const int n = static_cast<int>(potentials.size());
  if (angles.size() != n) throw std::invalid_argument("emf_loading: sample count mismatch");
  if (pole_pairs < 1) throw std::invalid_argument("emf_loading: pole pairs must be >= 1");
  if (n < 2 * pole_pairs + 1)
    throw std::invalid_argument("emf_loading: need at least 2*pole_pairs+1 samples");

  // Uniform full-circle spacing makes the projection an exact DFT bin.
  const double two_pi = 2.0 * 3.14159265358979323846;
  const double step = two_pi / n;
  for (int k = 0; k < n; ++k) {
    const double expected = angles[0] + k * step;
    if (std::abs(angles[k] - expected) > 1e-9 * two_pi)
      throw std::invalid_argument("emf_loading: samples must be uniformly spaced over a full turn");
  }

  EmfResult result;
  for (int k = 0; k < n; ++k) {
    result.sine += potentials[k] * std::sin(pole_pairs * angles[k]);
    result.cosine += potentials[k] * std::cos(pole_pairs * angles[k]);
  }
  result.sine *= 2.0 / n;
  result.cosine *= 2.0 / n;
  result.amplitude = std::hypot(result.sine, result.cosine);
  result.emf = 2.0 * (result.amplitude / std::sqrt(2.0)) * omega * turns * winding_factor_fundamental;
  return result;
}

}  // namespace magshape
