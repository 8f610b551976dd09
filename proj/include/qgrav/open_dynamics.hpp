#pragma once

#include <complex>
#include <vector>

#include "qgrav/config.hpp"

// Joint qubit-resonator evolution over interferometric sloshes: the analytic
// open-system map, a brute-force Lindblad integrator used as its oracle,
// phase accrual, and the per-round fidelity model.
namespace qgrav::dynamics {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// Analytic map
// ---------------------------------------------------------------------------

struct DampingRates {
    double gamma_resonator = 0.0; // 1/s amplitude damping of the ring
    double T1 = 0.0;              // s
    double T2 = 0.0;              // s
};

struct RoundOutcome {
    double phase = 0.0;              // rad accrued over one slosh
    double off_diagonal_factor = 0.0; // |qubit coherence| / initial
    double dephasing_exponent = 0.0; // gamma * tau with gamma = 2 Gamma l^2 / z0^2
    double sigma_x = 0.0;            // off_diagonal_factor * cos(phase)
    cplx rho01 = 0.0;                // qubit off-diagonal element
    bool slow_damping_ok = true;     // Gamma tau < 0.1
};

// One full slosh with the qubit-conditioned displacement l.  Bookkeeping
// convention of the sensitivity chain: coherence shrinks by
// exp(-2 Gamma l^2 tau / z0^2) exp(-tau/T2).  Refuses when Gamma tau >= 1.
RoundOutcome analytic_round(double l, const SystemConfig& cfg, const DampingRates& rates);

// Exact coherence of the conditionally displaced, damped, dephased
// oscillator-qubit pair:  2 rho01(t) starting from |+x> (x) |0>.
//
// The qubit coherence obeys  d ln C / dt = -i lambda (u + v*) with u, v the
// coherent labels of the two branches,
//   u'  = -(i omega + Gamma/2) u  - i lambda / 2,
//   v*' = ( i omega - Gamma/2) v* - i lambda / 2,
// which integrates to
//   ln C = -(lambda^2/2) [ J(p) - J(q) ],  p = Gamma/2 + i omega,
//   q = -Gamma/2 + i omega,  J(p) = t/p - (1 - e^{-p t})/p^2 ,
// times the qubit phase e^{-i (omega_q - chi) t} and dephasing e^{-Gamma_par t}.
// Reduces to exp[-lambda^2 (1 - cos omega t)/omega^2] when Gamma = 0.
cplx splitting_coherence(double omega, double lambda, double gamma, double gamma_parallel,
                         double omega_q, double sigma_z_energy, double t);

// Branch coherent labels (+1 branch; the -1 branch is the negative).
cplx branch_label(double omega, double lambda, double gamma, double t);

// ---------------------------------------------------------------------------
// Numeric Lindblad oracle on qubit (x) Fock(n_cut)
// ---------------------------------------------------------------------------

struct LindbladParams {
    double omega = 1.0;      // oscillator frequency (scaled units)
    double lambda = 0.0;     // conditional displacement coupling
    double gamma = 0.0;      // resonator amplitude damping
    double gamma_perp = 0.0; // qubit amplitude damping scale
    double gamma_parallel = 0.0; // qubit pure dephasing (sigma_z channel)
    double n_q = 0.0;        // qubit bath occupation
    double omega_q = 0.0;    // qubit splitting
    double sigma_z_energy = 0.0; // extra sigma_z c-number (gravity term)
};

class QubitOscillatorState {
public:
    QubitOscillatorState(int n_cut, bool start_plus_x_ground = true);

    int n_cut() const { return n_;  }
    cplx& block(int qi, int qj, int n, int m);
    const cplx& block(int qi, int qj, int n, int m) const;

    double trace() const;
    double hermiticity_defect() const;   // max |rho - rho^dag| element
    double min_eigenvalue() const;       // power-iteration estimate
    cplx qubit_coherence() const;        // tr_osc rho_{+-}; 1/2 at t = 0
    double ground_state_population() const; // <0| tr_q rho |0>
    double top_level_population(int levels = 3) const;
    std::vector<cplx>& raw() { return data_; }
    const std::vector<cplx>& raw() const { return data_; }

private:
    int n_;
    std::vector<cplx> data_; // four n x n blocks, qubit-major
};

struct LindbladOptions {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double leakage_limit = 1e-8; // population allowed in the top 3 Fock levels
    bool auto_expand = true;     // double n_cut on truncation leakage
    int max_n_cut = 512;
};

// Integrates the full master equation (conditional-displacement Hamiltonian,
// resonator amplitude damping, qubit amplitude and phase damping) with an
// adaptive embedded Runge-Kutta pair and a trace-preservation monitor.
QubitOscillatorState lindblad_oracle(const LindbladParams& p, int n_cut, double t,
                                     const LindbladOptions& opts = {});

// ---------------------------------------------------------------------------
// Fidelity and naive Ramsey sensitivity
// ---------------------------------------------------------------------------

struct RoundFidelity {
    double fidelity = 0.0;               // slosh-period T2 form
    double fidelity_gate_adjusted = 0.0; // tau_exp / T2 form
    bool gate_times_significant = false;
    double gas_exponent = 0.0;           // 4 pi Gamma l^2 / z0^2 omega
};

// Cumulative per-round fidelity
//   f = e^{-4 pi / omega T2} e^{-4 pi Gamma l^2 / z0^2 omega}
//       (1 - 2 p_init)(1 - p_rot)^3 (1 - 2 p_meas).
// gamma_total is the summed resonator damping rate in 1/s.
RoundFidelity round_fidelity(const SystemConfig& cfg, double l, double gamma_total);

struct RamseySensitivity {
    double delta_phi = 0.0;        // 1 / 2n
    double delta_g = 0.0;          // hbar omega delta_phi / 4 pi m l
    double coherence_bound = 0.0;  // dg/g >= hbar / (2 tau_c l m g)
    double coherence_bound_alt = 0.0; // same bound through the coupling form
};

RamseySensitivity ramsey_sensitivity(int n, const SystemConfig& cfg, double l);

} // namespace qgrav::dynamics
