#pragma once

#include <array>
#include <cstdint>
#include <vector>

// Offline determination of (omega_q, omega, lambda) from undriven joint
// evolution by fitting synthetic qubit measurements.
namespace qgrav::calibration {

struct FreeEvolutionParams {
    double omega_q = 0.0; // rad/s qubit splitting
    double omega = 0.0;   // rad/s trap frequency
    double lambda = 0.0;  // rad/s coupling
};

struct BlochVector {
    double x = 0.0, y = 0.0, z = 0.0;
    double norm() const;
};

// Undriven mean-field evolution (origin at the gravity-shifted equilibrium,
// resonator starting in the ground state):
//   sx(t) = sx0 cos xi + sy0 sin xi,  sy(t) = sy0 cos xi - sx0 sin xi,
//   sz(t) = sz0,
//   xi(t) = 2 omega_q t + sz0 lambda^2 (t / omega - sin(omega t) / omega^2).
BlochVector free_evolution(double t, const BlochVector& initial,
                           const FreeEvolutionParams& p);

// Mean resonator displacement <a + a^dag>(t) for a definite sz0 branch.
double displacement_mean(double t, double sz0, const FreeEvolutionParams& p);

// <sigma_x>(t) for a qubit prepared in |+x>, averaging the two sz = +-1
// branches: cos(2 omega_q t) cos(lambda^2 (t/omega - sin(omega t)/omega^2)).
double qubit_signal(double t, const FreeEvolutionParams& p);

struct CalibrationRecord {
    std::vector<double> times;     // s
    std::vector<double> sigma_x;   // shot-noise averaged estimates
    std::vector<int> shots;        // per-time repetition count
};

// Synthetic record with binomial shot noise, |+x> preparation.
CalibrationRecord synthesize_record(const FreeEvolutionParams& truth,
                                    const std::vector<double>& times, int shots,
                                    std::uint64_t seed);

struct FitResult {
    FreeEvolutionParams params;
    // 1-sigma confidence intervals on (omega_q, omega, lambda^2/omega).
    std::array<double, 3> sigma{};
    double lambda_sq_over_omega = 0.0;
    double residual_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Weighted Levenberg-Marquardt in the decorrelated parameterization
// (omega_q, omega, lambda^2/omega), seeded by a periodogram for the qubit
// frequency and a coarse grid for the rest.
FitResult fit_parameters(const CalibrationRecord& record);

} // namespace qgrav::calibration
