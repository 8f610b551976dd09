#include "qgrav/inductance.hpp"

#include <cmath>

#include "qgrav/constants.hpp"
#include "qgrav/elliptic.hpp"
#include "qgrav/errors.hpp"
#include "qgrav/magnetostatics.hpp"

namespace qgrav::inductance {

namespace k = constants;

double self_inductance_circular(double loop_radius, double wire_radius) {
    if (!(wire_radius > 0.0 && wire_radius < loop_radius))
        throw DomainError("wire radius must satisfy 0 < a < R");
    return k::mu0 * loop_radius * (std::log(8.0 * loop_radius / wire_radius) - 2.0);
}

double self_inductance_square(double half_width, double wire_radius) {
    if (!(wire_radius > 0.0 && wire_radius < half_width))
        throw DomainError("wire radius must satisfy 0 < a < w");
    return 2.0 * k::mu0 * half_width * (std::log(half_width / wire_radius) - 0.774) / k::pi;
}

double mutual_inductance(double r1, double r2, double d) {
    if (!(r1 > 0.0 && r2 > 0.0) || d < 0.0)
        throw DomainError("mutual inductance needs positive radii and d >= 0");
    const double beta = 2.0 * r1 * r2 / (r1 * r1 + r2 * r2 + d * d);
    const double eta = 2.0 * beta / (1.0 + beta);
    if (eta >= 1.0 - 1e-14)
        throw DomainError("coincident filaments: mutual inductance diverges");
    const auto ke = elliptic::complete_KE_parameter(eta);
    return k::mu0 * std::sqrt(4.0 * r1 * r2 / eta) * (ke.K / (1.0 + beta) - ke.E);
}

namespace {

// Coupling per ampere of qubit current; lambda is linear in I_q.
CouplingResult coupling_per_amp(const SystemConfig& cfg) {
    CouplingResult out;
    out.qubit_current = 1.0;
    out.mass = cfg.ring.mass();
    const DerivedQuantities d = derive(cfg);
    out.z0 = d.z0;
    out.mutual = mutual_inductance(cfg.ring.radius, cfg.qubit.loop_radius,
                                   cfg.geometry.ring_qubit_distance);
    out.dI_dz = magnetostatics::current_gradient(cfg.equilibrium_height(), cfg).dI_dz;
    out.lambda = std::sqrt(2.0 / (out.mass * k::hbar * d.omega)) * out.mutual * out.dI_dz;
    return out;
}

} // namespace

CouplingResult coupling_strength(const SystemConfig& cfg, double qubit_current) {
    if (qubit_current > cfg.qubit.current_max * (1.0 + 1e-12))
        throw DomainError("qubit current exceeds the critical-current cap I_qmax");
    CouplingResult out = coupling_per_amp(cfg);
    out.qubit_current = qubit_current;
    out.lambda *= qubit_current;
    return out;
}

double coupling_strength_closed_form(const SystemConfig& cfg, double qubit_current) {
    const double z_eq = cfg.equilibrium_height();
    const double R = cfg.ring.radius;
    const double s = R * R + z_eq * z_eq;
    const double m = cfg.ring.mass();
    const double L = cfg.ring_inductance();
    const double mutual = mutual_inductance(R, cfg.qubit.loop_radius,
                                            cfg.geometry.ring_qubit_distance);
    return std::sqrt(3.0 * cfg.sphere.moment_factor() / k::hbar) *
           std::pow(std::pow(R, 4) * z_eq * z_eq / (m * L * L * L * std::pow(s, 5)), 0.25) *
           mutual * qubit_current;
}

LambdaSchedule make_lambda_schedule(const SystemConfig& cfg, const DerivedQuantities& d) {
    LambdaSchedule s;
    const int K = d.doublings;
    // A pinned coupling cap is the value the device delivers at I_qmax; the
    // purely geometric route goes through the per-ampere coupling instead.
    const bool pinned = cfg.pinned.lambda_max.has_value();
    const double lambda_top = pinned ? *cfg.pinned.lambda_max : d.lambda_max;
    if (!pinned) {
        const double available = coupling_per_amp(cfg).lambda * cfg.qubit.current_max;
        if (lambda_top > available * (1.0 + 1e-9))
            throw DomainError("coupling schedule infeasible: required top coupling exceeds "
                              "what I_qmax delivers");
    }
    s.lambda0 = std::ldexp(lambda_top, -K);
    s.couplings.resize(static_cast<std::size_t>(K) + 1);
    s.qubit_currents.resize(static_cast<std::size_t>(K) + 1);
    const double per_lambda_current =
        pinned ? cfg.qubit.current_max / lambda_top : 1.0 / coupling_per_amp(cfg).lambda;
    for (int i = 0; i <= K; ++i) {
        const double lam = std::ldexp(s.lambda0, i);
        s.couplings[static_cast<std::size_t>(i)] = lam;
        s.qubit_currents[static_cast<std::size_t>(i)] = lam * per_lambda_current;
    }
    return s;
}

namespace {

// Wire radius of the qubit loop consistent with its configured inductance.
double qubit_wire_radius(const SystemConfig& cfg) {
    const double R = cfg.qubit.loop_radius;
    return 8.0 * R * std::exp(-(cfg.qubit.self_inductance / (k::mu0 * R) + 2.0));
}

double flux_qubit_current(double loop_radius, double wire_radius) {
    const double L = self_inductance_circular(loop_radius, wire_radius);
    return k::flux_quantum / (2.0 * L);
}

} // namespace

SweepResult sweep(const SystemConfig& cfg, SweepVariable variable, double lo, double hi,
                  int points) {
    if (points < 2 || !(hi > lo) || !(lo > 0.0))
        throw DomainError("sweep needs lo < hi, both positive, and >= 2 points");
    SweepResult result;
    result.variable = variable;
    result.points.reserve(static_cast<std::size_t>(points));
    const double a_q = qubit_wire_radius(cfg);

    for (int i = 0; i < points; ++i) {
        const double v = lo + (hi - lo) * double(i) / double(points - 1);
        SystemConfig c = cfg;
        c.pinned.trap_frequency.reset();   // sweeps follow the geometry
        c.pinned.ring_inductance.reset();
        double current = 0.0;
        switch (variable) {
        case SweepVariable::QubitRadius:
            c.qubit.loop_radius = v;
            current = cfg.qubit.current_max;
            break;
        case SweepVariable::SphereRadius:
            c.sphere.radius = v;
            current = cfg.qubit.current_max;
            break;
        case SweepVariable::SystemScale:
            c.ring.radius = cfg.ring.radius * v;
            c.ring.wire_radius = cfg.ring.wire_radius * v;
            c.qubit.loop_radius = cfg.qubit.loop_radius * v;
            c.sphere.radius = cfg.sphere.radius * v;
            current = flux_qubit_current(c.qubit.loop_radius, a_q * v);
            break;
        }
        const double lambda = coupling_per_amp(c).lambda * current;
        result.points.push_back({v, lambda});
    }
    for (std::size_t i = 1; i < result.points.size(); ++i)
        if (result.points[i].lambda > result.points[result.argmax].lambda) result.argmax = i;
    return result;
}

} // namespace qgrav::inductance
