#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qgrav {

// Uniformly magnetized sphere providing the trapping field.
struct MagnetSphere {
    double radius = 0.0;             // m
    double mu0_magnetization = 0.0;  // T, mu0 * M
    double resistivity = 0.0;        // Ohm m

    double magnetization() const;    // A/m
    double volume() const;           // m^3, 4 pi R^3 / 3
    // mu0 * M * V, the combination every field formula uses (T m^3).
    double moment_factor() const;
};

// Superconducting ring levitated below the sphere.
struct ResonatorRing {
    double radius = 0.0;        // m
    double wire_radius = 0.0;   // m
    double density = 0.0;       // kg/m^3
    double young_modulus = 16e9; // Pa, torsional mode stiffness

    double mass() const;                      // kg, density * 2 pi R * pi a^2
    double self_inductance_formula() const;   // H, mu0 R (ln(8R/a) - 2)
};

struct QubitParams {
    double loop_radius = 0.0;      // m
    double self_inductance = 0.0;  // H
    double frequency = 0.0;        // rad/s level splitting
    double current_max = 0.0;      // A
    double current_min = 0.0;      // A
    double T1 = 0.0;               // s
    double T2 = 0.0;               // s
    double bath_temperature = 0.0; // K
    double tau_reset = 0.0;        // s
    double tau_rot = 0.0;          // s
    double tau_meas = 0.0;         // s
    double p_init = 0.0;
    double p_rot = 0.0;
    double p_meas = 0.0;

    // Bose occupation of the qubit bath at the qubit splitting.
    double bath_occupation() const;
};

struct Geometry {
    double sphere_ring_gap = 0.0;    // m, r0: sphere surface to ring plane
    double ring_qubit_distance = 0.0; // m, d

    double equilibrium_height(double sphere_radius) const {
        return sphere_radius + sphere_ring_gap;
    }
};

struct Environment {
    double gas_pressure = 0.0;          // Pa
    double gas_temperature = 0.0;       // K
    double gas_molecule_mass = 0.0;     // kg
    double gas_molecule_diameter = 3.7e-10; // m, for the mean free path
};

// Optional reference entries carried by a config for cross-checking and for
// pinned-mode operation.  Frequencies are stored angular internally; the file
// format takes cyclic values for keys documented as such.
struct PinnedValues {
    std::optional<double> trap_frequency;   // rad/s
    std::optional<double> ring_inductance;  // H
    std::optional<double> lambda_max;       // rad/s
    std::optional<double> lambda0;          // rad/s
    std::optional<double> mass;             // kg
    std::optional<double> z0;               // m
    std::optional<double> flux;             // Wb
    std::optional<double> mutual_inductance; // H
    std::optional<double> resonator_current_max; // A
    std::optional<double> tau_exp;          // s
    std::optional<double> gamma_gas;        // 1/s (table rate, used directly)
    std::optional<double> gamma_eddy;       // 1/s
    std::optional<double> gamma_rad;        // 1/s
};

struct SystemConfig {
    MagnetSphere sphere;
    ResonatorRing ring;
    QubitParams qubit;
    Geometry geometry;
    Environment environment;
    PinnedValues pinned;

    double gravity = 9.81;      // m/s^2, the measurand; overridable
    double l_max = 0.0;         // m, largest cat half-separation

    std::vector<std::string> unknown_keys; // load-time warnings

    double equilibrium_height() const { return geometry.equilibrium_height(sphere.radius); }
    // Pinned ring inductance when present, else the wire formula.
    double ring_inductance() const;
    bool omega_is_pinned() const { return pinned.trap_frequency.has_value(); }
};

// Everything computable from a SystemConfig.  Immutable after construction.
struct DerivedQuantities {
    double omega = 0.0;      // rad/s trap frequency (pinned or geometric)
    double omega_geometric = 0.0; // rad/s from the force-balance formula
    double z0 = 0.0;         // m, sqrt(hbar / 2 m omega)
    double tau = 0.0;        // s, 2 pi / omega
    double mass = 0.0;       // kg
    double l0_bound = 0.0;   // m, hbar omega / 2 m g
    double alpha = 0.0;      // 2 m g l_max / hbar omega
    double doublings_raw = 0.0; // log2(alpha)
    int doublings = 0;       // K, ceil(log2 alpha)
    double l0 = 0.0;         // m, l_max / 2^K
    double lambda0_formula = 0.0; // rad/s, sqrt(omega^5 hbar / 2 m g^2)
    double lambda_max = 0.0; // rad/s, coupling that produces l_max
    double tau_exp = 0.0;    // s, reset + 3 rot + 2 tau + meas

    double displacement(double lambda) const { return lambda * z0 / omega; }
    double coupling_for(double l) const;     // inverse of displacement()
};

struct ConsistencyRow {
    std::string name;
    double pinned = 0.0;
    double recomputed = 0.0;
    double rel_dev = 0.0;
};

struct ConsistencyReport {
    std::vector<ConsistencyRow> rows;
    // Rows whose relative deviation exceeds the flag threshold.
    std::vector<ConsistencyRow> deviations(double threshold = 0.02) const;
    std::string to_csv() const;
    std::string to_json() const;
};

SystemConfig load_config(const std::string& path);
SystemConfig parse_config(const std::string& text, const std::string& origin = "<string>");
std::string save_config(const SystemConfig& cfg);

DerivedQuantities derive(const SystemConfig& cfg);
ConsistencyReport validate(const SystemConfig& cfg);

} // namespace qgrav
