#include "qgrav/noise_budget.hpp"

#include <cmath>
#include <sstream>

#include "qgrav/constants.hpp"
#include "qgrav/errors.hpp"
#include "qgrav/magnetostatics.hpp"
#include "qgrav/open_dynamics.hpp"

namespace qgrav::noise {

namespace k = constants;

namespace {

// Q referenced to the energy of the displaced state at full coupling,
// V = hbar lambda_max^2 / 4 omega times omega.
double displaced_state_quality(double power, const DerivedQuantities& d) {
    return k::hbar * d.lambda_max * d.lambda_max / (4.0 * power);
}

void finish(ChannelBudget& b, const SystemConfig& cfg, const DerivedQuantities& d,
            const std::optional<double>& pinned_rate) {
    b.damping_rate_pinned = pinned_rate.value_or(0.0);
    b.damping_rate_used = pinned_rate.value_or(b.damping_rate);
    b.decoherence_exponent = 4.0 * k::pi * cfg.l_max * cfg.l_max * b.damping_rate_used /
                             (d.z0 * d.z0 * d.omega);
}

} // namespace

ChannelBudget eddy_budget(const SystemConfig& cfg) {
    if (!(cfg.sphere.resistivity > 0.0))
        throw DomainError("eddy budget needs a positive sphere resistivity");
    const DerivedQuantities d = derive(cfg);
    const double z_eq = cfg.equilibrium_height();
    const double I_r = magnetostatics::current_gradient(z_eq, cfg).max_current(cfg.l_max);
    const double r0 = cfg.geometry.sphere_ring_gap;
    const double Rs = cfg.sphere.radius;
    const double pref = std::pow(k::mu0 / (4.0 * k::pi), 2) * 2.0 * std::pow(k::pi, 3) *
                        std::pow(cfg.ring.radius, 4) * I_r * I_r * d.omega * d.omega /
                        cfg.sphere.resistivity;
    const double geom = 4.0 * std::pow(Rs, 5) /
                        (15.0 * std::pow(r0, 3) * std::pow(r0 + 2.0 * Rs, 3));
    ChannelBudget b;
    b.name = "eddy";
    b.power = pref * geom;
    b.quality = displaced_state_quality(b.power, d);
    b.damping_rate = d.omega / k::two_pi / b.quality;
    finish(b, cfg, d, cfg.pinned.gamma_eddy);
    return b;
}

ChannelBudget dipole_budget(const SystemConfig& cfg) {
    const DerivedQuantities d = derive(cfg);
    const double I_r = magnetostatics::current_gradient(cfg.equilibrium_height(), cfg)
                           .max_current(cfg.l_max);
    const double r_rad = k::pi / 6.0 *
                         std::pow(cfg.ring.radius * d.omega / k::c_light, 4) * k::z_vacuum;
    ChannelBudget b;
    b.name = "rad";
    b.power = 0.5 * r_rad * I_r * I_r;
    b.quality = displaced_state_quality(b.power, d);
    b.damping_rate = d.omega / k::two_pi / b.quality;
    finish(b, cfg, d, cfg.pinned.gamma_rad);
    return b;
}

double knudsen_number(const SystemConfig& cfg) {
    const auto& env = cfg.environment;
    const double mfp = k::k_B * env.gas_temperature /
                       (std::sqrt(2.0) * k::pi * env.gas_molecule_diameter *
                        env.gas_molecule_diameter * env.gas_pressure);
    return mfp / (2.0 * cfg.ring.wire_radius);
}

GasBudget gas_budget(const SystemConfig& cfg) {
    GasBudget b;
    b.name = "gas";
    b.knudsen = knudsen_number(cfg);
    if (!(b.knudsen > 10.0))
        throw DomainError("free-molecular gas damping invalid: Knudsen <= 10");
    const auto& env = cfg.environment;
    b.mean_free_path = b.knudsen * 2.0 * cfg.ring.wire_radius;
    const double rho_gas = env.gas_pressure * env.gas_molecule_mass /
                           (k::k_B * env.gas_temperature);
    const double area = k::two_pi * cfg.ring.radius * 2.0 * cfg.ring.wire_radius;
    const double u_av = std::sqrt(2.0 * k::k_B * env.gas_temperature / env.gas_molecule_mass);
    const DerivedQuantities d = derive(cfg);
    b.damping_rate = 2.0 * rho_gas * area * u_av / d.mass;
    b.quality = d.omega / k::two_pi / b.damping_rate;
    finish(b, cfg, d, cfg.pinned.gamma_gas);
    return b;
}

NoiseBudget full_budget(const SystemConfig& cfg) {
    NoiseBudget nb;
    nb.channels.push_back(dipole_budget(cfg));
    nb.channels.push_back(eddy_budget(cfg));
    const GasBudget gas = gas_budget(cfg);
    nb.channels.push_back(gas);
    nb.knudsen = gas.knudsen;
    for (const auto& ch : nb.channels) nb.gamma_total += ch.damping_rate_used;

    const auto f = dynamics::round_fidelity(cfg, cfg.l_max, nb.gamma_total);
    nb.fidelity = f.fidelity;
    nb.fidelity_gate_adjusted = f.fidelity_gate_adjusted;
    nb.gate_times_significant = f.gate_times_significant;
    return nb;
}

std::string NoiseBudget::to_csv() const {
    std::ostringstream out;
    out << "channel,power_w,quality,gamma_derived,gamma_pinned,gamma_used,exponent\n";
    char buf[240];
    for (const auto& ch : channels) {
        std::snprintf(buf, sizeof buf, "%s,%.8e,%.8e,%.8e,%.8e,%.8e,%.8e\n", ch.name.c_str(),
                      ch.power, ch.quality, ch.damping_rate, ch.damping_rate_pinned,
                      ch.damping_rate_used, ch.decoherence_exponent);
        out << buf;
    }
    return out.str();
}

std::string NoiseBudget::to_json() const {
    std::ostringstream out;
    out.setf(std::ios::scientific);
    out.precision(8);
    out << "{\n  \"channels\": [\n";
    for (std::size_t i = 0; i < channels.size(); ++i) {
        const auto& ch = channels[i];
        out << "    {\"name\": \"" << ch.name << "\", \"power_w\": " << ch.power
            << ", \"quality\": " << ch.quality << ", \"gamma_derived\": " << ch.damping_rate
            << ", \"gamma_used\": " << ch.damping_rate_used
            << ", \"decoherence_exponent\": " << ch.decoherence_exponent << "}"
            << (i + 1 < channels.size() ? ",\n" : "\n");
    }
    out << "  ],\n";
    out << "  \"knudsen\": " << knudsen << ",\n";
    out << "  \"gamma_total\": " << gamma_total << ",\n";
    out << "  \"fidelity\": " << fidelity << ",\n";
    out << "  \"fidelity_gate_adjusted\": " << fidelity_gate_adjusted << ",\n";
    out << "  \"gate_times_significant\": " << (gate_times_significant ? "true" : "false")
        << "\n}\n";
    return out.str();
}

} // namespace qgrav::noise
