#pragma once

#include <cstdint>
#include <vector>

#include "qgrav/config.hpp"

// Self- and mutual-inductance computation and the qubit-resonator coupling
// strength, including the design sweeps and the coupling-doubling schedule.
namespace qgrav::inductance {

// Thin circular filament loop: mu0 R (ln(8R/a) - 2), surface current limit.
double self_inductance_circular(double loop_radius, double wire_radius);

// Square loop of half-width w: 2 mu0 w (ln(w/a) - 0.774) / pi.
double self_inductance_square(double half_width, double wire_radius);

// Mutual inductance of two coaxial parallel filament loops separated by d.
// Equivalent to Maxwell's formula; the elliptic integrals take the parameter
// eta = 2 beta / (1 + beta), beta = 2 R1 R2 / (R1^2 + R2^2 + d^2), which the
// Neumann double-integral oracle in the tests pins down.
double mutual_inductance(double r1, double r2, double d);

struct CouplingResult {
    double mutual = 0.0;    // H
    double lambda = 0.0;    // rad/s
    double dI_dz = 0.0;     // A/m
    double qubit_current = 0.0; // A
    double z0 = 0.0;        // m
    double mass = 0.0;      // kg
};

// lambda = sqrt(2 / (m hbar omega)) * M_rq * dI_r/dz * I_q, with omega taken
// from the config mode (pinned or geometric).
CouplingResult coupling_strength(const SystemConfig& cfg, double qubit_current);

// Closed geometric form of the same coupling (no trap frequency input); equal
// to coupling_strength when omega is in geometric mode.
double coupling_strength_closed_form(const SystemConfig& cfg, double qubit_current);

struct LambdaSchedule {
    double lambda0 = 0.0;            // rad/s
    std::vector<double> couplings;   // lambda_k = 2^k lambda0, k = 0..K
    std::vector<double> qubit_currents; // A per stage
};

// Doubling schedule reaching lambda_max = 2^K lambda0.  Currents are mapped
// linearly onto the coupling with I_qmax delivering lambda_max; if that
// demands more than the qubit critical current the generator throws instead
// of clamping, since a clamped stage would break the exact 2^k structure.
LambdaSchedule make_lambda_schedule(const SystemConfig& cfg, const DerivedQuantities& d);

enum class SweepVariable : std::uint8_t { QubitRadius, SphereRadius, SystemScale };

struct SweepPoint {
    double value = 0.0;   // swept variable (m, or dimensionless scale)
    double lambda = 0.0;  // rad/s
};

struct SweepResult {
    SweepVariable variable;
    std::vector<SweepPoint> points;
    std::size_t argmax = 0;

    const SweepPoint& best() const { return points[argmax]; }
};

// Design sweeps.  QubitRadius and SphereRadius vary one length at the qubit
// critical current; SystemScale scales (R_r, R_q, R_s, a) together while the
// achievable qubit current follows I_q = Phi_0 / (2 L_q(scale)).
SweepResult sweep(const SystemConfig& cfg, SweepVariable variable, double lo, double hi,
                  int points);

} // namespace qgrav::inductance
