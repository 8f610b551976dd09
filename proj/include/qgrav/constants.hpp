#pragma once

// Physical constants (SI, CODATA 2018 exact where defined).
namespace qgrav::constants {

inline constexpr double hbar   = 1.054571817e-34;   // J s
inline constexpr double mu0    = 1.25663706212e-6;  // T m / A
inline constexpr double k_B    = 1.380649e-23;      // J / K
inline constexpr double c_light = 2.99792458e8;     // m / s
inline constexpr double z_vacuum = 376.730313668;   // Ohm, impedance of free space
inline constexpr double flux_quantum = 2.067833848e-15; // Wb
inline constexpr double g_default = 9.81;           // m / s^2, local gravity (measurand)
inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

} // namespace qgrav::constants
