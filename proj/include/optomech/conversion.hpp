#pragma once

#include "optomech/gaussian.hpp"

namespace optomech {

struct ConversionResult {
  SingleModeGaussian initial;  // state of a1 at t = 0
  SingleModeGaussian final;    // state of a2 at t = T
  double fidelity = 0.0;
  Trajectory trajectory;
};

/// Numeric state conversion a1 -> a2 over the whole schedule: integrates the
/// moment equations from `initial` in a1 (mechanics thermal at
/// `mech_occupation`, a2 vacuum) and compares a2(T) with the initial state.
inline ConversionResult numeric_conversion(const SingleModeGaussian& initial, double mech_occupation,
                                           const SystemParams& p, const CouplingSchedule& s,
                                           const StepControl& ctl = {}) {
  ConversionResult r;
  r.initial = initial;
  r.trajectory = integrate(embed_initial(initial, mech_occupation), p, s, s.duration(), ctl);
  r.final = reduce_to_mode(r.trajectory.back().state, 3);
  r.fidelity = gaussian_fidelity(r.initial, r.final);
  return r;
}

}  // namespace optomech
