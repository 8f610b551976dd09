#pragma once

#include <string>
#include <vector>

#include "qgrav/config.hpp"

// Damping and decoherence channels of the levitated ring: eddy currents in
// the magnet, dipole radiation, and background gas collisions, plus the
// resulting quality factors, rates, and per-slosh decoherence exponents.
namespace qgrav::noise {

struct ChannelBudget {
    std::string name;
    double power = 0.0;          // W dissipated (0 for the gas channel)
    // Q referenced to the displaced-state energy hbar lambda^2 / 4 omega
    // (eddy, dipole) or to the rate directly (gas).
    double quality = 0.0;
    double damping_rate = 0.0;   // 1/s, table-rate convention: (omega/2pi)/Q
    double damping_rate_pinned = 0.0; // 1/s, 0 when the config pins nothing
    // Rate actually fed into the decoherence chain (pinned when available).
    double damping_rate_used = 0.0;
    double decoherence_exponent = 0.0; // 4 pi l_max^2 Gamma / z0^2 omega
};

ChannelBudget eddy_budget(const SystemConfig& cfg);
ChannelBudget dipole_budget(const SystemConfig& cfg);

struct GasBudget : ChannelBudget {
    double knudsen = 0.0;
    double mean_free_path = 0.0; // m
};

// Free-molecular damping; requires Knudsen > 10 and uses the resonator mass
// in the denominator (the only reading consistent with the reference rate
// and quality factor).
GasBudget gas_budget(const SystemConfig& cfg);

double knudsen_number(const SystemConfig& cfg);

struct NoiseBudget {
    std::vector<ChannelBudget> channels; // rad, eddy, gas order
    double knudsen = 0.0;
    double gamma_total = 0.0;        // 1/s, sum of used channel rates
    double fidelity = 0.0;           // per-round fidelity, slosh-period T2 form
    double fidelity_gate_adjusted = 0.0; // tau_exp / T2 form
    bool gate_times_significant = false; // tau_rot + tau_meas > 0.05 tau

    std::string to_json() const;
    std::string to_csv() const;
};

NoiseBudget full_budget(const SystemConfig& cfg);

} // namespace qgrav::noise
