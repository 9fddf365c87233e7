#pragma once

#include <cmath>

#include "varkg/ground_state.hpp"

namespace fixtures {

inline double sech(double x) { return 1.0 / std::cosh(x); }

// Planar cubic ground state, shot once per test binary.
inline const varkg::GroundState& townes() {
  static const varkg::GroundState gs = varkg::shoot_radial(3.0, 0.0, varkg::RadialGrid::make(2, 30.0, 3000));
  return gs;
}

inline const varkg::GroundState& sech_1d() {
  static const varkg::GroundState gs = varkg::closed_form_1d(3.0, 0.0, varkg::RadialGrid::make(1, 20.0, 4000));
  return gs;
}

}  // namespace fixtures
