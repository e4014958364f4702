#pragma once

#include "magshape/types.hpp"

namespace magshape {

/// Winding factor of harmonic `nu` as distribution x pitch x skew:
///   k_d = sin(q nu alpha/2) / (q sin(nu alpha/2))
///   k_p = sin(nu pi tau_ratio / 2)
///   k_s = sin(nu eps/2) / (nu eps/2)   (exactly 1 at eps = 0)
/// with q slots per pole per phase, slot angle alpha (electrical radians),
/// coil pitch ratio tau_ratio = tau_c / tau_p, skew angle eps (electrical).
[[nodiscard]] double winding_factor(int nu, int slots_per_pole_per_phase, double slot_angle,
                                    double pitch_ratio, double skew_angle);

/// Fundamental flux-linkage harmonic and no-load EMF from potential samples
/// on a circle through the air gap. `potentials` holds A_z values (T*m) at
/// the uniformly spaced `angles` (radians, full turn, at least 2*pole_pairs+1
/// samples). The EMF uses the effective (rms) harmonic amplitude:
///   E_0 = 2 * (amplitude/sqrt(2)) * omega * turns * winding_factor.
struct EmfResult {
  double sine = 0.0;       // sine projection of the pole-pair harmonic
  double cosine = 0.0;     // cosine projection
  double amplitude = 0.0;  // hypot(sine, cosine)
  double emf = 0.0;        // no-load EMF (V)
};

[[nodiscard]] EmfResult emf_loading(const Vector& potentials, const Vector& angles, int pole_pairs,
                                    double omega, double turns, double winding_factor_fundamental);

}  // namespace magshape
