#pragma once

namespace pathsens {
namespace units {

// LJ fluid: reduced units, epsilon = sigma = m = kB = 1. Time unit
// tau = sigma sqrt(m/epsilon); temperatures, densities and pressures are the
// usual starred quantities.
//
// Methane: kcal/mol, Angstrom, amu, radians. The derived (AKMA) time unit is
// sqrt(amu A^2 mol / kcal) = 48.8882 fs; friction given in 1/ps is converted
// with akma_per_ps below. kB converts Kelvin to kcal/mol; pressure in
// kcal/mol/A^3 converts to atmospheres with atm_per_kcal_mol_A3.

inline constexpr double kB_kcal_mol_K = 0.0019872041;   // kcal/mol/K
inline constexpr double akma_time_fs = 48.88821;        // fs per internal time unit
inline constexpr double akma_per_ps = 1000.0 / akma_time_fs;  // internal units per ps
inline constexpr double atm_per_kcal_mol_A3 = 68568.415;      // 1 kcal/mol/A^3 in atm

} // namespace units
} // namespace pathsens
