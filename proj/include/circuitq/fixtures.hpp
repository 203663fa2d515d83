#pragma once

// Generators for reference circuits used by tests, benchmarks and examples.

#include <cmath>
#include <numbers>
#include <string>

#include "circuitq/netlist.hpp"

namespace circuitq::fixtures {

/// Transmon capacitively coupled to an N-mode lumped model of a quarter-wave
/// resonator. Nodes 1 .. N+2; node N+2 is the ground. With resistors, every
/// capacitor gets a parallel resistor of `r` ohms.
inline std::string mmusc_netlist(int n_modes, bool with_resistors = false, double r = 1e6) {
  const double f0 = 4.603e9, z0 = 50.0, ej = 18.15e9, cc = 40.3e-15, cj = 5.13e-15;
  const double w0 = 2.0 * std::numbers::pi * f0;
  const double c0 = std::numbers::pi / 4.0 / w0 / z0;
  const double l0 = 4.0 * z0 / std::numbers::pi / w0;
  const std::string ground = std::to_string(2 + n_modes);
  auto num = [](double v) { return detail::format_double(v); };
  std::string out = "J " + ground + " 1 " + num(ej) + " E\n";
  out += "C " + ground + " 1 " + num(cj) + "\n";
  if (with_resistors) out += "R " + ground + " 1 " + num(r) + "\n";
  out += "C 1 2 " + num(cc) + "\n";
  for (int m = 0; m < n_modes; ++m) {
    const std::string a = std::to_string(2 + m), b = std::to_string(3 + m);
    const double lm = l0 / ((2.0 * m + 1) * (2.0 * m + 1));
    out += "L " + a + " " + b + " " + num(lm) + "\n";
    out += "C " + a + " " + b + " " + num(c0) + "\n";
    if (with_resistors) out += "R " + a + " " + b + " " + num(r) + "\n";
  }
  return out;
}

/// Transmon coupled to a lossy resonator, junction inductance symbol "Lj".
inline std::string fig1_netlist() {
  return "C 0 1 100e-15\nJ 0 1 Lj\nC 0 2 100e-15\nL 0 2 10e-9\nC 1 2 1e-15\nC 2 3 0.5e-15\nR 3 0 50\n";
}

}  // namespace circuitq::fixtures
