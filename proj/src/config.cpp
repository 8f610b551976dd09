#include "qgrav/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "qgrav/constants.hpp"
#include "qgrav/errors.hpp"
#include "qgrav/inductance.hpp"
#include "qgrav/magnetostatics.hpp"
#include "qgrav/noise_budget.hpp"

namespace qgrav {

namespace k = constants;

double MagnetSphere::magnetization() const { return mu0_magnetization / k::mu0; }

double MagnetSphere::volume() const {
    return 4.0 / 3.0 * k::pi * radius * radius * radius;
}

double MagnetSphere::moment_factor() const { return mu0_magnetization * volume(); }

double ResonatorRing::mass() const {
    return density * k::two_pi * radius * k::pi * wire_radius * wire_radius;
}

double ResonatorRing::self_inductance_formula() const {
    return k::mu0 * radius * (std::log(8.0 * radius / wire_radius) - 2.0);
}

double QubitParams::bath_occupation() const {
    const double x = k::hbar * frequency / (k::k_B * bath_temperature);
    return 1.0 / std::expm1(x);
}

double SystemConfig::ring_inductance() const {
    return pinned.ring_inductance.value_or(ring.self_inductance_formula());
}

double DerivedQuantities::coupling_for(double l) const { return l * omega / z0; }

// ---------------------------------------------------------------------------
// Config file format: UTF-8 "key = value" lines, '#' starts a comment.
// ---------------------------------------------------------------------------

namespace {

struct KeyTable {
    std::map<std::string, double> values;
    std::vector<std::string> unknown;

    bool has(const std::string& key) const { return values.count(key) != 0; }

    double required(const std::string& key) const {
        auto it = values.find(key);
        if (it == values.end())
            throw ConfigError(key, "missing field: " + key);
        return it->second;
    }

    std::optional<double> optional(const std::string& key) const {
        auto it = values.find(key);
        if (it == values.end()) return std::nullopt;
        return it->second;
    }
};

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = {
        "sphere_radius", "mu0_magnetization", "sphere_resistivity",
        "ring_radius", "wire_radius", "ring_density", "young_modulus",
        "qubit_radius", "qubit_inductance", "qubit_frequency",
        "qubit_current_max", "qubit_current_min", "qubit_T1", "qubit_T2",
        "qubit_temperature", "tau_reset", "tau_rot", "tau_meas",
        "p_init", "p_rot", "p_meas",
        "sphere_ring_gap", "ring_qubit_distance",
        "gas_pressure", "gas_temperature", "gas_molecule_mass",
        "gas_molecule_diameter",
        "l_max", "gravity",
        "trap_frequency", "ring_inductance", "lambda_max", "lambda0",
        "pinned_mass", "pinned_z0", "pinned_flux", "pinned_mutual_inductance",
        "pinned_resonator_current_max", "pinned_tau_exp",
        "gamma_gas", "gamma_eddy", "gamma_rad",
    };
    return keys;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

KeyTable tokenize(const std::string& text, const std::string& origin) {
    KeyTable table;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("", origin + ":" + std::to_string(lineno) +
                                      ": expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value_str = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("", origin + ":" + std::to_string(lineno) + ": empty key");
        char* end = nullptr;
        const double value = std::strtod(value_str.c_str(), &end);
        if (end == value_str.c_str() || *end != '\0')
            throw ConfigError(key, "unparseable value for " + key + ": '" + value_str + "'");
        if (std::isnan(value))
            throw ConfigError(key, "NaN value for field: " + key);
        const auto& known = known_keys();
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            table.unknown.push_back(key);
            continue;
        }
        if (table.has(key))
            throw ConfigError(key, "duplicate field: " + key);
        table.values[key] = value;
    }
    return table;
}

void require_positive(double v, const std::string& key) {
    if (!(v > 0.0))
        throw ConfigError(key, "field must be positive: " + key + " = " + std::to_string(v));
}

void require_probability(double v, const std::string& key) {
    if (!(v >= 0.0 && v <= 1.0))
        throw ConfigError(key, "field must lie in [0,1]: " + key);
}

} // namespace

SystemConfig parse_config(const std::string& text, const std::string& origin) {
    const KeyTable t = tokenize(text, origin);
    SystemConfig cfg;

    cfg.sphere.radius = t.required("sphere_radius");
    cfg.sphere.mu0_magnetization = t.required("mu0_magnetization");
    cfg.sphere.resistivity = t.required("sphere_resistivity");
    cfg.ring.radius = t.required("ring_radius");
    cfg.ring.wire_radius = t.required("wire_radius");
    cfg.ring.density = t.required("ring_density");
    cfg.ring.young_modulus = t.optional("young_modulus").value_or(16e9);
    cfg.qubit.loop_radius = t.required("qubit_radius");
    cfg.qubit.self_inductance = t.required("qubit_inductance");
    cfg.qubit.frequency = k::two_pi * t.required("qubit_frequency");
    cfg.qubit.current_max = t.required("qubit_current_max");
    cfg.qubit.current_min = t.required("qubit_current_min");
    cfg.qubit.T1 = t.required("qubit_T1");
    cfg.qubit.T2 = t.required("qubit_T2");
    cfg.qubit.bath_temperature = t.required("qubit_temperature");
    cfg.qubit.tau_reset = t.required("tau_reset");
    cfg.qubit.tau_rot = t.required("tau_rot");
    cfg.qubit.tau_meas = t.required("tau_meas");
    cfg.qubit.p_init = t.required("p_init");
    cfg.qubit.p_rot = t.required("p_rot");
    cfg.qubit.p_meas = t.required("p_meas");
    cfg.geometry.sphere_ring_gap = t.required("sphere_ring_gap");
    cfg.geometry.ring_qubit_distance = t.required("ring_qubit_distance");
    cfg.environment.gas_pressure = t.required("gas_pressure");
    cfg.environment.gas_temperature = t.required("gas_temperature");
    cfg.environment.gas_molecule_mass = t.required("gas_molecule_mass");
    cfg.environment.gas_molecule_diameter =
        t.optional("gas_molecule_diameter").value_or(3.7e-10);
    cfg.l_max = t.required("l_max");
    cfg.gravity = t.optional("gravity").value_or(k::g_default);

    auto cyc = [](std::optional<double> v) -> std::optional<double> {
        if (!v) return std::nullopt;
        return k::two_pi * *v;
    };
    cfg.pinned.trap_frequency = cyc(t.optional("trap_frequency"));
    cfg.pinned.ring_inductance = t.optional("ring_inductance");
    cfg.pinned.lambda_max = cyc(t.optional("lambda_max"));
    cfg.pinned.lambda0 = cyc(t.optional("lambda0"));
    cfg.pinned.mass = t.optional("pinned_mass");
    cfg.pinned.z0 = t.optional("pinned_z0");
    cfg.pinned.flux = t.optional("pinned_flux");
    cfg.pinned.mutual_inductance = t.optional("pinned_mutual_inductance");
    cfg.pinned.resonator_current_max = t.optional("pinned_resonator_current_max");
    cfg.pinned.tau_exp = t.optional("pinned_tau_exp");
    // Table damping rates enter exponent formulas directly as 1/s.
    cfg.pinned.gamma_gas = t.optional("gamma_gas");
    cfg.pinned.gamma_eddy = t.optional("gamma_eddy");
    cfg.pinned.gamma_rad = t.optional("gamma_rad");

    cfg.unknown_keys = t.unknown;

    // Structural invariants.
    require_positive(cfg.sphere.radius, "sphere_radius");
    require_positive(cfg.sphere.mu0_magnetization, "mu0_magnetization");
    require_positive(cfg.sphere.resistivity, "sphere_resistivity");
    require_positive(cfg.ring.radius, "ring_radius");
    require_positive(cfg.ring.wire_radius, "wire_radius");
    require_positive(cfg.ring.density, "ring_density");
    if (!(cfg.ring.wire_radius < cfg.ring.radius))
        throw ConfigError("wire_radius", "wire_radius must be smaller than ring_radius");
    require_positive(cfg.qubit.loop_radius, "qubit_radius");
    require_positive(cfg.qubit.frequency, "qubit_frequency");
    require_positive(cfg.qubit.T1, "qubit_T1");
    require_positive(cfg.qubit.T2, "qubit_T2");
    if (!(cfg.qubit.T2 <= 2.0 * cfg.qubit.T1 * (1.0 + 1e-12)))
        throw ConfigError("qubit_T2", "qubit_T2 must not exceed 2 * qubit_T1");
    require_positive(cfg.qubit.bath_temperature, "qubit_temperature");
    require_positive(cfg.qubit.tau_reset, "tau_reset");
    require_positive(cfg.qubit.tau_rot, "tau_rot");
    require_positive(cfg.qubit.tau_meas, "tau_meas");
    require_probability(cfg.qubit.p_init, "p_init");
    require_probability(cfg.qubit.p_rot, "p_rot");
    require_probability(cfg.qubit.p_meas, "p_meas");
    require_positive(cfg.geometry.sphere_ring_gap, "sphere_ring_gap");
    require_positive(cfg.geometry.ring_qubit_distance, "ring_qubit_distance");
    require_positive(cfg.environment.gas_pressure, "gas_pressure");
    require_positive(cfg.environment.gas_temperature, "gas_temperature");
    require_positive(cfg.environment.gas_molecule_mass, "gas_molecule_mass");
    require_positive(cfg.l_max, "l_max");
    require_positive(cfg.gravity, "gravity");

    return cfg;
}

SystemConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("", "cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

std::string save_config(const SystemConfig& cfg) {
    std::ostringstream out;
    out.setf(std::ios::scientific);
    out.precision(17);
    auto emit = [&out](const std::string& key, double v) { out << key << " = " << v << "\n"; };
    auto emit_opt = [&emit](const std::string& key, const std::optional<double>& v,
                            double scale = 1.0) {
        if (v) emit(key, *v / scale);
    };
    out << "# magnetomechanical gravimeter system description\n";
    emit("sphere_radius", cfg.sphere.radius);
    emit("mu0_magnetization", cfg.sphere.mu0_magnetization);
    emit("sphere_resistivity", cfg.sphere.resistivity);
    emit("ring_radius", cfg.ring.radius);
    emit("wire_radius", cfg.ring.wire_radius);
    emit("ring_density", cfg.ring.density);
    emit("young_modulus", cfg.ring.young_modulus);
    emit("qubit_radius", cfg.qubit.loop_radius);
    emit("qubit_inductance", cfg.qubit.self_inductance);
    emit("qubit_frequency", cfg.qubit.frequency / k::two_pi);
    emit("qubit_current_max", cfg.qubit.current_max);
    emit("qubit_current_min", cfg.qubit.current_min);
    emit("qubit_T1", cfg.qubit.T1);
    emit("qubit_T2", cfg.qubit.T2);
    emit("qubit_temperature", cfg.qubit.bath_temperature);
    emit("tau_reset", cfg.qubit.tau_reset);
    emit("tau_rot", cfg.qubit.tau_rot);
    emit("tau_meas", cfg.qubit.tau_meas);
    emit("p_init", cfg.qubit.p_init);
    emit("p_rot", cfg.qubit.p_rot);
    emit("p_meas", cfg.qubit.p_meas);
    emit("sphere_ring_gap", cfg.geometry.sphere_ring_gap);
    emit("ring_qubit_distance", cfg.geometry.ring_qubit_distance);
    emit("gas_pressure", cfg.environment.gas_pressure);
    emit("gas_temperature", cfg.environment.gas_temperature);
    emit("gas_molecule_mass", cfg.environment.gas_molecule_mass);
    emit("gas_molecule_diameter", cfg.environment.gas_molecule_diameter);
    emit("l_max", cfg.l_max);
    emit("gravity", cfg.gravity);
    emit_opt("trap_frequency", cfg.pinned.trap_frequency, k::two_pi);
    emit_opt("ring_inductance", cfg.pinned.ring_inductance);
    emit_opt("lambda_max", cfg.pinned.lambda_max, k::two_pi);
    emit_opt("lambda0", cfg.pinned.lambda0, k::two_pi);
    emit_opt("pinned_mass", cfg.pinned.mass);
    emit_opt("pinned_z0", cfg.pinned.z0);
    emit_opt("pinned_flux", cfg.pinned.flux);
    emit_opt("pinned_mutual_inductance", cfg.pinned.mutual_inductance);
    emit_opt("pinned_resonator_current_max", cfg.pinned.resonator_current_max);
    emit_opt("pinned_tau_exp", cfg.pinned.tau_exp);
    emit_opt("gamma_gas", cfg.pinned.gamma_gas);
    emit_opt("gamma_eddy", cfg.pinned.gamma_eddy);
    emit_opt("gamma_rad", cfg.pinned.gamma_rad);
    return out.str();
}

// ---------------------------------------------------------------------------
// Derived quantities
// ---------------------------------------------------------------------------

DerivedQuantities derive(const SystemConfig& cfg) {
    DerivedQuantities d;
    d.mass = cfg.ring.mass();
    d.omega_geometric = magnetostatics::trap_angular_frequency(cfg);
    d.omega = cfg.pinned.trap_frequency.value_or(d.omega_geometric);
    if (!(d.omega > 0.0))
        throw DomainError("trap frequency must be positive");

    d.z0 = std::sqrt(k::hbar / (2.0 * d.mass * d.omega));
    d.tau = k::two_pi / d.omega;
    d.l0_bound = k::hbar * d.omega / (2.0 * d.mass * cfg.gravity);
    d.alpha = 2.0 * d.mass * cfg.gravity * cfg.l_max / (k::hbar * d.omega);
    d.doublings_raw = std::log2(d.alpha);

    // Smallest K with 2^K >= alpha (equivalently l_max / 2^K within the
    // single-period phase bound).
    int K = static_cast<int>(std::ceil(d.doublings_raw));
    while (std::exp2(K) < d.alpha) ++K;
    while (K > 0 && std::exp2(K - 1) >= d.alpha) --K;
    d.doublings = K;

    d.l0 = cfg.l_max / std::exp2(K);
    d.lambda0_formula =
        std::sqrt(std::pow(d.omega, 5) * k::hbar / (2.0 * d.mass * cfg.gravity * cfg.gravity));
    d.lambda_max = cfg.l_max * std::sqrt(2.0 * d.mass * std::pow(d.omega, 3) / k::hbar);
    d.tau_exp = cfg.qubit.tau_reset + 3.0 * cfg.qubit.tau_rot + 2.0 * d.tau + cfg.qubit.tau_meas;
    return d;
}

// ---------------------------------------------------------------------------
// Consistency report
// ---------------------------------------------------------------------------

namespace {

double rel_dev(double pinned, double recomputed) {
    const double scale = std::max(std::abs(pinned), std::abs(recomputed));
    return scale > 0.0 ? std::abs(pinned - recomputed) / scale : 0.0;
}

} // namespace

std::vector<ConsistencyRow> ConsistencyReport::deviations(double threshold) const {
    std::vector<ConsistencyRow> out;
    for (const auto& row : rows)
        if (row.rel_dev > threshold) out.push_back(row);
    return out;
}

std::string ConsistencyReport::to_csv() const {
    std::ostringstream out;
    out << "name,pinned,recomputed,rel_dev\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%.8e,%.8e,%.8e\n", r.name.c_str(), r.pinned,
                      r.recomputed, r.rel_dev);
        out << buf;
    }
    return out.str();
}

std::string ConsistencyReport::to_json() const {
    std::ostringstream out;
    out.setf(std::ios::scientific);
    out.precision(8);
    out << "[\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        out << "  {\"name\": \"" << r.name << "\", \"pinned\": " << r.pinned
            << ", \"recomputed\": " << r.recomputed << ", \"rel_dev\": " << r.rel_dev << "}"
            << (i + 1 < rows.size() ? ",\n" : "\n");
    }
    out << "]\n";
    return out.str();
}

ConsistencyReport validate(const SystemConfig& cfg) {
    ConsistencyReport report;
    auto add = [&report](const std::string& name, double pinned, double recomputed) {
        report.rows.push_back({name, pinned, recomputed, rel_dev(pinned, recomputed)});
    };
    const DerivedQuantities d = derive(cfg);
    const double z_eq = cfg.equilibrium_height();

    if (cfg.pinned.mass) add("mass", *cfg.pinned.mass, d.mass);
    if (cfg.pinned.ring_inductance)
        add("ring_inductance", *cfg.pinned.ring_inductance, cfg.ring.self_inductance_formula());
    if (cfg.pinned.trap_frequency)
        add("trap_frequency", *cfg.pinned.trap_frequency, d.omega_geometric);
    if (cfg.pinned.z0) add("z0", *cfg.pinned.z0, d.z0);
    if (cfg.pinned.flux)
        add("flux", *cfg.pinned.flux, magnetostatics::ring_flux(z_eq, cfg));
    if (cfg.pinned.mutual_inductance)
        add("mutual_inductance", *cfg.pinned.mutual_inductance,
            inductance::mutual_inductance(cfg.ring.radius, cfg.qubit.loop_radius,
                                          cfg.geometry.ring_qubit_distance));
    if (cfg.pinned.resonator_current_max) {
        const auto grad = magnetostatics::current_gradient(z_eq, cfg);
        add("resonator_current_max", *cfg.pinned.resonator_current_max,
            grad.max_current(cfg.l_max));
    }
    if (cfg.pinned.lambda_max) add("lambda_max", *cfg.pinned.lambda_max, d.lambda_max);
    if (cfg.pinned.lambda0) add("lambda0", *cfg.pinned.lambda0, d.lambda0_formula);
    if (cfg.pinned.tau_exp) add("tau_exp", *cfg.pinned.tau_exp, d.tau_exp);
    if (cfg.pinned.gamma_gas)
        add("gamma_gas", *cfg.pinned.gamma_gas, noise::gas_budget(cfg).damping_rate);
    if (cfg.pinned.gamma_eddy)
        add("gamma_eddy", *cfg.pinned.gamma_eddy, noise::eddy_budget(cfg).damping_rate);
    if (cfg.pinned.gamma_rad)
        add("gamma_rad", *cfg.pinned.gamma_rad, noise::dipole_budget(cfg).damping_rate);
    // Type-I critical field cap; the reference magnetization sits slightly
    // above it, which the report surfaces rather than load rejecting.
    add("mu0_magnetization_cap", 0.08, cfg.sphere.mu0_magnetization);
    return report;
}

} // namespace qgrav
