#pragma once

#include <numbers>

namespace circuitq {

/// CODATA 2019 exact SI values. Reduced flux quantum phi0 = hbar / 2e.
struct PhysicalConstants {
  static constexpr double e = 1.602176634e-19;
  static constexpr double h = 6.62607015e-34;
  static constexpr double hbar = h / (2.0 * std::numbers::pi);
  static constexpr double phi0 = hbar / (2.0 * e);
};

/// Josephson energy in Hz to Josephson inductance in H.
constexpr double josephson_inductance_from_energy(double ej_hz) {
  return PhysicalConstants::phi0 * PhysicalConstants::phi0 / (ej_hz * PhysicalConstants::h);
}

/// Josephson inductance in H to Josephson energy in Hz.
constexpr double josephson_energy_from_inductance(double lj) {
  return PhysicalConstants::phi0 * PhysicalConstants::phi0 / (lj * PhysicalConstants::h);
}

}  // namespace circuitq
