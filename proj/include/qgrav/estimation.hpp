#pragma once

#include <cstdint>
#include <vector>

#include "qgrav/config.hpp"
#include "qgrav/noise_budget.hpp"

// Non-adaptive binary-doubling phase estimation: scheduling, Monte-Carlo
// measurement simulation with the noisy-coin model, hedged maximum-likelihood
// stage estimation, Holevo-variance scoring, and the closed-form sensitivity
// ladder.
namespace qgrav::estimation {

struct StagePlan {
    int k = 0;                 // doubling index; phase measured is 2^k phi0
    int measurements = 0;      // M(K, k)
    int primary_basis = 0;     // ceil(M/2) measurements along +-x
    int offset_basis = 0;      // floor(M/2) at the pi/M offset
};

struct ProtocolSchedule {
    int K = 0;
    int M_K = 2;
    int mu = 3;
    std::vector<StagePlan> stages;      // k = 0 .. K
    std::int64_t total_resource = 0;    // N = sum M(K,k) 2^k
    std::int64_t total_measurements = 0; // sum M(K,k)

    static std::int64_t resource_closed_form(int K) {
        return 5 * (std::int64_t(1) << (K + 1)) - 3 * std::int64_t(K) - 8;
    }
};

// M(K,k) = M_K + mu (K - k), exact integer arithmetic.
ProtocolSchedule schedule(int K, int M_K = 2, int mu = 3);

struct StageRecord {
    int k = 0;
    int heads_primary = 0;   // +1 outcomes along +-x
    int n_primary = 0;
    int heads_offset = 0;    // +1 outcomes in the offset basis
    int n_offset = 0;
    double phase_estimate = 0.0; // stage phase in [0, 2 pi)
    double arc_center = 0.0;     // running phi0 arc after this stage
    double arc_width = 0.0;
};

struct PhaseEstimate {
    std::vector<StageRecord> stages; // processed k = K .. 0
    double estimate = 0.0;           // phi0 hat in [0, 2 pi)
    double final_arc_width = 0.0;    // 2 pi / (3 2^K)
};

struct SimulateOptions {
    // Inflate per-stage counts by ceil(1/f^2) to compensate reduced
    // visibility.
    bool inflate_counts = false;
};

// One full estimation cycle.  Outcome probabilities follow the noisy-coin
// model p(+1) = (1 + f cos(2^k phi - theta)) / 2 with theta in {0, pi/M}.
// Deterministic for a fixed (seed, trial) pair.
PhaseEstimate simulate_cycle(double phi_true, double fidelity, const ProtocolSchedule& sched,
                             std::uint64_t seed, std::uint64_t trial = 0,
                             const SimulateOptions& opts = {});

// Square root of the Holevo variance |<e^{i(phi - phi_hat)}>|^{-2} - 1.
double holevo_deviation(const std::vector<double>& phi_true,
                        const std::vector<double>& phi_hat);

struct SensitivityReport {
    int K = 0;
    std::int64_t N = 0;
    double delta_phi0 = 0.0;        // 2 pi / N
    double dg_over_g_cycle = 0.0;   // hbar omega / (2 m g l0 N)
    double dg_over_g_cycle_lmax_form = 0.0; // hbar omega / (20 m g l_max)
    double tau_exp = 0.0;
    double tau_phi = 0.0;           // (tau_exp / 2)(3K^2 + 7K + 4)
    double ideal_prhz = 0.0;        // no-decoherence per-root-hertz value
    double corrected_prhz = 0.0;    // finite-fidelity value (10 f denominator)
    double asymptotic_prhz = 0.0;   // sqrt(3 tau_exp / 2) log2(alpha) / (10 alpha)
    double fidelity = 0.0;
    double l0 = 0.0;
    double lambda0 = 0.0;
};

SensitivityReport sensitivity(const SystemConfig& cfg, const noise::NoiseBudget& budget);

struct WireSweepRow {
    double wire_radius = 0.0; // m
    double omega = 0.0;       // rad/s
    double mass = 0.0;        // kg
    int K = 0;
    double fidelity = 0.0;
    double ideal_prhz = 0.0;
    double corrected_prhz = 0.0;
    double tau_phi = 0.0;
};

// Re-derives mass, trap frequency, budget, fidelity and both sensitivities as
// the resonator wire radius varies.  In pinned-frequency mode the trap
// frequency follows the force-balance scaling anchored at the configured
// wire radius.
std::vector<WireSweepRow> wire_radius_sweep(const SystemConfig& cfg, double a_lo, double a_hi,
                                            int points);

} // namespace qgrav::estimation
