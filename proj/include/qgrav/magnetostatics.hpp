#pragma once

#include <array>

#include "qgrav/config.hpp"

// Closed-form magnetostatics of the uniformly magnetized sphere and the
// resulting three-dimensional trapping of the superconducting ring.
// All functions are pure; coordinates have their origin at the sphere centre
// with z pointing along the magnetization.
namespace qgrav::magnetostatics {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

struct FieldPoint {
    double rho = 0.0; // cylindrical radius, m
    double z = 0.0;   // m

    static FieldPoint from_cartesian(const Vec3& r);
};

struct FieldValue {
    double A_phi = 0.0;  // T m, azimuthal vector potential
    double B_rho = 0.0;  // T
    double B_z = 0.0;    // T
};

// Vector potential and field outside the sphere.  Throws DomainError for
// points inside the sphere or at the centre.
FieldValue sphere_field(const FieldPoint& p, const SystemConfig& cfg);

// Cartesian forms used by the transverse analysis and the curl/divergence
// oracles in the tests.
Vec3 vector_potential_cartesian(const Vec3& r, const SystemConfig& cfg);
Vec3 field_cartesian(const Vec3& r, const SystemConfig& cfg);

// Flux through a horizontal ring of the configured radius centred on the
// axis at height z (sign convention: z measured from the sphere centre,
// the ring sits at negative z but the flux is even in z).
double ring_flux(double z, const SystemConfig& cfg);

struct CurrentGradient {
    double dI_dz = 0.0;   // A/m at the equilibrium point
    // Largest current reached over a slosh of half-separation l: the packet
    // swings a full 2 l from its start.
    double max_current(double l_half_separation) const {
        return dI_dz * 2.0 * l_half_separation;
    }
};

CurrentGradient current_gradient(double z_eq, const SystemConfig& cfg);

// Vertical restoring force on the ring displaced to height z (force-balance
// form, linear in z - z_eq).
double vertical_force(double z, const SystemConfig& cfg);

// Trap frequency from the force balance (independent of any pinned value).
double trap_angular_frequency(const SystemConfig& cfg);

struct TrapProfile {
    double omega = 0.0;          // rad/s vertical trap frequency (geometric)
    double dI_dz = 0.0;          // A/m
    double I_r_max = 0.0;        // A at full displacement 2 l_max
    double vertical_stiffness = 0.0; // J/m^2, m omega^2 / 2
    double gamma_cross = 0.0;    // cross-mode coupling coefficient
    double beta_quartic = 0.0;   // transverse quartic confinement coefficient
    std::array<double, 3> torsional_modes{}; // rad/s, n = 1..3
};

TrapProfile trap_profile(const SystemConfig& cfg);

// Torsional mode angular frequency for integer mode number n >= 1.
double torsional_mode(int n, const SystemConfig& cfg);

} // namespace qgrav::magnetostatics
