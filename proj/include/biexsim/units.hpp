// units.hpp: physical constants in the simulator's unit system
//
// Energies are in meV, times in ps, angular frequencies in 1/ps.

#pragma once

#include <numbers>

namespace biexsim::units {

inline constexpr double pi = std::numbers::pi;

/// Reduced Planck constant in meV·ps.
inline constexpr double hbar = 0.6582119569;

/// Boltzmann constant in meV/K.
inline constexpr double k_boltzmann = 0.08617333262;

// SI values, used only by the material parametrization of the bath.
inline constexpr double hbar_si = 1.054571817e-34;     // J·s
inline constexpr double electron_volt_si = 1.602176634e-19;  // J

inline constexpr double energy_to_frequency(double energy_meV) { return energy_meV / hbar; }
inline constexpr double frequency_to_energy(double omega) { return omega * hbar; }

}  // namespace biexsim::units
