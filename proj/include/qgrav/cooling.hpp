#pragma once

#include <array>
#include <vector>

#include "qgrav/config.hpp"

// Qubit-mediated sideband cooling of the resonator: driven-qubit fluctuation
// spectrum via the quantum regression theorem, Lamb-Dicke steady state, and
// the large-amplitude cooling solution.
namespace qgrav::cooling {

struct CoolingParams {
    double rabi = 0.0;          // rad/s drive Rabi frequency
    double detuning = 0.0;      // rad/s drive detuning from the qubit splitting
    double lambda = 0.0;        // rad/s qubit-resonator coupling
    double omega = 0.0;         // rad/s trap frequency
    double gamma_perp = 0.0;    // 1/s qubit amplitude damping scale
    double gamma_parallel = 0.0; // 1/s qubit pure dephasing
    double n_q = 0.0;           // qubit bath occupation
    double gamma_resonator = 0.0; // 1/s resonator amplitude damping

    // Conventional operating point: Omega = omega/2, delta = -sqrt(omega^2 -
    // Omega^2), rates from (T1, T2, N_q), resonator damping from the budget.
    static CoolingParams operating_point(const SystemConfig& cfg, double lambda);
};

// Homogeneous Bloch generator and drive vector: ds/dt = A s + b.
std::array<double, 9> bloch_matrix(const CoolingParams& p);
std::array<double, 3> bloch_drive(const CoolingParams& p);
std::array<double, 3> bloch_steady_state(const CoolingParams& p);

// Driven-qubit fluctuation spectrum
//   S(nu) = (lambda^2/2) Re Int_0^inf e^{i nu t} <d sigma_z(t) d sigma_z(0)> dt
// evaluated in matrix-resolvent form through the regression theorem.
double qubit_spectrum(double nu, const CoolingParams& p);

struct CoolingResult {
    double gamma_c = 0.0;   // 1/s, S(omega) - S(-omega)
    double n0 = 0.0;        // quantum backaction floor S(-omega) / gamma_c
    double zeta = 0.0;      // gamma_resonator / gamma_c
    double I1 = 0.0;        // amplitude integral of the normalized rate
    double gamma_cool = 0.0; // gamma_c + gamma_resonator
    double n_lamb_dicke = 0.0;
    double n_full = 0.0;
};

// Normalized large-amplitude cooling rate Gamma_c(amp)/Gamma_c(0) from the
// single-harmonic balance of the driven Bloch equations; amp is the coherent
// amplitude of the resonator.
double normalized_rate(double amplitude, const CoolingParams& p);

// Steady-state occupations starting from thermal occupation n_th.
CoolingResult steady_state_occupation(const CoolingParams& p, double n_th);

struct CoolingCurveRow {
    double n_th = 0.0;
    double n_lamb_dicke = 0.0;
    double n_full = 0.0;
};

std::vector<CoolingCurveRow> cooling_curve(const CoolingParams& p,
                                           const std::vector<double>& n_th_values);

} // namespace qgrav::cooling
