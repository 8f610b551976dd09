#pragma once

// Complete elliptic integrals by the arithmetic-geometric mean.
//
// Convention: the argument m is the *parameter* (square of the modulus k),
//   K(m) = int_0^{pi/2} dt / sqrt(1 - m sin^2 t),
//   E(m) = int_0^{pi/2} sqrt(1 - m sin^2 t) dt.
// The AGM runs on the complementary modulus and converges quadratically;
// both functions are accurate to ~1e-15 for m in [0, 1 - 1e-12].
namespace qgrav::elliptic {

struct KE {
    double K = 0.0;
    double E = 0.0;
};

KE complete_KE_parameter(double m);

inline double K_parameter(double m) { return complete_KE_parameter(m).K; }
inline double E_parameter(double m) { return complete_KE_parameter(m).E; }

} // namespace qgrav::elliptic
