#include "qgrav/open_dynamics.hpp"

#include <cmath>

#include "qgrav/constants.hpp"
#include "qgrav/errors.hpp"

namespace qgrav::dynamics {

namespace k = constants;

// ---------------------------------------------------------------------------
// Analytic pieces
// ---------------------------------------------------------------------------

RoundOutcome analytic_round(double l, const SystemConfig& cfg, const DampingRates& rates) {
    const DerivedQuantities d = derive(cfg);
    RoundOutcome out;
    const double gamma_tau = rates.gamma_resonator * d.tau;
    if (gamma_tau >= 1.0)
        throw DomainError("analytic slosh map invalid: Gamma tau >= 1");
    out.slow_damping_ok = gamma_tau < 0.1;

    out.phase = d.tau * (2.0 * d.mass * cfg.gravity * l / k::hbar - cfg.qubit.frequency);
    out.dephasing_exponent = 2.0 * rates.gamma_resonator * l * l / (d.z0 * d.z0) * d.tau;
    out.off_diagonal_factor = std::exp(-out.dephasing_exponent) * std::exp(-d.tau / rates.T2);
    out.sigma_x = out.off_diagonal_factor * std::cos(out.phase);
    out.rho01 = 0.5 * out.off_diagonal_factor *
                cplx(std::cos(out.phase), std::sin(out.phase));
    return out;
}

cplx branch_label(double omega, double lambda, double gamma, double t) {
    const cplx p(0.5 * gamma, omega);
    return cplx(0.0, -0.5 * lambda) * (1.0 - std::exp(-p * t)) / p;
}

cplx splitting_coherence(double omega, double lambda, double gamma, double gamma_parallel,
                         double omega_q, double sigma_z_energy, double t) {
    const cplx i(0.0, 1.0);
    const cplx p = cplx(0.5 * gamma, omega);
    const cplx q = cplx(-0.5 * gamma, omega);
    const cplx Jp = t / p - (1.0 - std::exp(-p * t)) / (p * p);
    const cplx Jq = t / q - (std::exp(q * t) - 1.0) / (q * q);
    const cplx log_c = -0.5 * lambda * lambda * (Jp - Jq);
    return std::exp(log_c) * std::exp(-gamma_parallel * t) *
           std::exp(-i * (omega_q - sigma_z_energy) * t);
}

// ---------------------------------------------------------------------------
// Lindblad integrator
// ---------------------------------------------------------------------------

QubitOscillatorState::QubitOscillatorState(int n_cut, bool start_plus_x_ground)
    : n_(n_cut), data_(static_cast<std::size_t>(4) * n_cut * n_cut, cplx(0.0, 0.0)) {
    if (start_plus_x_ground) {
        // (|+x><+x|)_q (x) |0><0|_r
        for (int qi = 0; qi < 2; ++qi)
            for (int qj = 0; qj < 2; ++qj) block(qi, qj, 0, 0) = 0.5;
    }
}

cplx& QubitOscillatorState::block(int qi, int qj, int n, int m) {
    return data_[(static_cast<std::size_t>(qi) * 2 + qj) * n_ * n_ +
                 static_cast<std::size_t>(n) * n_ + m];
}

const cplx& QubitOscillatorState::block(int qi, int qj, int n, int m) const {
    return data_[(static_cast<std::size_t>(qi) * 2 + qj) * n_ * n_ +
                 static_cast<std::size_t>(n) * n_ + m];
}

double QubitOscillatorState::trace() const {
    double tr = 0.0;
    for (int q = 0; q < 2; ++q)
        for (int n = 0; n < n_; ++n) tr += block(q, q, n, n).real();
    return tr;
}

double QubitOscillatorState::hermiticity_defect() const {
    double worst = 0.0;
    for (int qi = 0; qi < 2; ++qi)
        for (int qj = 0; qj < 2; ++qj)
            for (int n = 0; n < n_; ++n)
                for (int m = 0; m < n_; ++m) {
                    const cplx d = block(qi, qj, n, m) - std::conj(block(qj, qi, m, n));
                    worst = std::max(worst, std::abs(d));
                }
    return worst;
}

cplx QubitOscillatorState::qubit_coherence() const {
    cplx tr = 0.0;
    for (int n = 0; n < n_; ++n) tr += block(0, 1, n, n);
    return tr;
}

double QubitOscillatorState::ground_state_population() const {
    return (block(0, 0, 0, 0) + block(1, 1, 0, 0)).real();
}

double QubitOscillatorState::top_level_population(int levels) const {
    double p = 0.0;
    for (int n = std::max(0, n_ - levels); n < n_; ++n)
        p += (block(0, 0, n, n) + block(1, 1, n, n)).real();
    return p;
}

double QubitOscillatorState::min_eigenvalue() const {
    // Power iteration on (c I - rho); rho has spectrum within [-eps, 1].
    const int dim = 2 * n_;
    const double shift = 1.5;
    std::vector<cplx> x(static_cast<std::size_t>(dim), cplx(1.0, 0.3));
    std::vector<cplx> y(static_cast<std::size_t>(dim));
    auto matvec = [&](const std::vector<cplx>& in, std::vector<cplx>& out) {
        for (int qi = 0; qi < 2; ++qi)
            for (int n = 0; n < n_; ++n) {
                cplx acc = shift * in[static_cast<std::size_t>(qi) * n_ + n];
                for (int qj = 0; qj < 2; ++qj)
                    for (int m = 0; m < n_; ++m)
                        acc -= block(qi, qj, n, m) * in[static_cast<std::size_t>(qj) * n_ + m];
                out[static_cast<std::size_t>(qi) * n_ + n] = acc;
            }
    };
    double mu = 0.0;
    for (int it = 0; it < 200; ++it) {
        matvec(x, y);
        double norm = 0.0;
        for (const auto& v : y) norm += std::norm(v);
        norm = std::sqrt(norm);
        if (norm == 0.0) return shift;
        for (auto& v : y) v /= norm;
        mu = norm;
        std::swap(x, y);
    }
    // One Rayleigh quotient for the converged vector.
    matvec(x, y);
    cplx num = 0.0;
    for (int i = 0; i < dim; ++i) num += std::conj(x[static_cast<std::size_t>(i)]) *
                                         y[static_cast<std::size_t>(i)];
    mu = num.real();
    return shift - mu;
}

namespace {

struct Liouvillian {
    LindbladParams p;
    int n;

    // dB_ij = -i (H_i B_ij - B_ij H_j) + resonator damping + qubit channels,
    // H_s = omega a^dag a + s (lambda/2)(a + a^dag) + s (omega_q - chi)/2.
    void apply(const std::vector<cplx>& state, std::vector<cplx>& deriv) const {
        const double sgn[2] = {+1.0, -1.0};
        const double gm = p.gamma_perp * (p.n_q + 1.0); // sigma_- rate
        const double gp = p.gamma_perp * p.n_q;         // sigma_+ rate
        const double eq = p.omega_q - p.sigma_z_energy;
        const std::size_t bs = static_cast<std::size_t>(n) * n;
        const cplx I(0.0, 1.0);

        for (int qi = 0; qi < 2; ++qi)
            for (int qj = 0; qj < 2; ++qj) {
                const cplx* B = state.data() + (static_cast<std::size_t>(qi) * 2 + qj) * bs;
                cplx* D = deriv.data() + (static_cast<std::size_t>(qi) * 2 + qj) * bs;
                const double si = sgn[qi], sj = sgn[qj];
                const double hl_i = 0.5 * p.lambda * si;
                const double hl_j = 0.5 * p.lambda * sj;
                const double c_phase = 0.5 * eq * (si - sj);
                const bool offdiag = qi != qj;

                for (int r = 0; r < n; ++r) {
                    const double sr = std::sqrt(double(r));
                    const double sr1 = std::sqrt(double(r + 1));
                    for (int c = 0; c < n; ++c) {
                        const std::size_t idx = static_cast<std::size_t>(r) * n + c;
                        const double sc = std::sqrt(double(c));
                        const double sc1 = std::sqrt(double(c + 1));
                        const cplx b = B[idx];

                        // -i [omega (n_r - n_c) + c_phase] B
                        cplx acc = -I * (p.omega * double(r - c) + c_phase) * b;
                        // -i (lambda_i/2)(a + a^dag) B
                        if (r + 1 < n) acc -= I * hl_i * sr1 * B[idx + static_cast<std::size_t>(n)];
                        if (r > 0) acc -= I * hl_i * sr * B[idx - static_cast<std::size_t>(n)];
                        // +i B (lambda_j/2)(a + a^dag)
                        if (c + 1 < n) acc += I * hl_j * sc1 * B[idx + 1];
                        if (c > 0) acc += I * hl_j * sc * B[idx - 1];
                        // Gamma (a B a^dag - (n_r + n_c)/2 B)
                        if (r + 1 < n && c + 1 < n)
                            acc += p.gamma * sr1 * sc1 *
                                   B[idx + static_cast<std::size_t>(n) + 1];
                        acc -= 0.5 * p.gamma * double(r + c) * b;
                        // qubit channels, diagonal part
                        if (offdiag)
                            acc -= (p.gamma_parallel + 0.5 * (gm + gp)) * b;
                        else
                            acc -= (qi == 0 ? gm : gp) * b;
                        D[idx] = acc;
                    }
                }
            }
        // qubit amplitude-channel feeding between diagonal blocks
        if (gm != 0.0 || gp != 0.0) {
            const cplx* B00 = state.data();
            const cplx* B11 = state.data() + 3 * bs;
            cplx* D00 = deriv.data();
            cplx* D11 = deriv.data() + 3 * bs;
            for (std::size_t i = 0; i < bs; ++i) {
                D11[i] += gm * B00[i];
                D00[i] += gp * B11[i];
            }
        }
    }
};

// Cash-Karp embedded Runge-Kutta 4(5).
struct CashKarp {
    static constexpr double a2 = 1.0 / 5.0;
    static constexpr double b31 = 3.0 / 40.0, b32 = 9.0 / 40.0;
    static constexpr double b41 = 3.0 / 10.0, b42 = -9.0 / 10.0, b43 = 6.0 / 5.0;
    static constexpr double b51 = -11.0 / 54.0, b52 = 5.0 / 2.0, b53 = -70.0 / 27.0,
                            b54 = 35.0 / 27.0;
    static constexpr double b61 = 1631.0 / 55296.0, b62 = 175.0 / 512.0,
                            b63 = 575.0 / 13824.0, b64 = 44275.0 / 110592.0,
                            b65 = 253.0 / 4096.0;
    static constexpr double c1 = 37.0 / 378.0, c3 = 250.0 / 621.0, c4 = 125.0 / 594.0,
                            c6 = 512.0 / 1771.0;
    static constexpr double d1 = 2825.0 / 27648.0, d3 = 18575.0 / 48384.0,
                            d4 = 13525.0 / 55296.0, d5 = 277.0 / 14336.0, d6 = 0.25;
};

} // namespace

QubitOscillatorState lindblad_oracle(const LindbladParams& p, int n_cut, double t,
                                     const LindbladOptions& opts) {
    if (p.omega <= 0.0) throw DomainError("oscillator frequency must be positive");
    if (p.lambda / p.omega > n_cut / 10.0)
        throw DomainError("Fock truncation inadequate: require lambda/omega <= n_cut/10");

    const Liouvillian L{p, n_cut};
    QubitOscillatorState st(n_cut);
    auto& y = st.raw();
    const std::size_t dim = y.size();
    std::vector<cplx> k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), tmp(dim),
        y5(dim);

    // step scale: fastest Hamiltonian frequency in the truncated space
    const double speed = p.omega * n_cut + std::abs(p.lambda) * std::sqrt(double(n_cut)) +
                         std::abs(p.omega_q) + 1.0;
    double h = 0.1 / speed;
    double time = 0.0;
    const double initial_trace = st.trace();

    while (time < t) {
        if (time + h > t) h = t - time;
        using CK = CashKarp;
        L.apply(y, k1);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + h * CK::a2 * k1[i];
        L.apply(tmp, k2);
        for (std::size_t i = 0; i < dim; ++i)
            tmp[i] = y[i] + h * (CK::b31 * k1[i] + CK::b32 * k2[i]);
        L.apply(tmp, k3);
        for (std::size_t i = 0; i < dim; ++i)
            tmp[i] = y[i] + h * (CK::b41 * k1[i] + CK::b42 * k2[i] + CK::b43 * k3[i]);
        L.apply(tmp, k4);
        for (std::size_t i = 0; i < dim; ++i)
            tmp[i] = y[i] + h * (CK::b51 * k1[i] + CK::b52 * k2[i] + CK::b53 * k3[i] +
                                 CK::b54 * k4[i]);
        L.apply(tmp, k5);
        for (std::size_t i = 0; i < dim; ++i)
            tmp[i] = y[i] + h * (CK::b61 * k1[i] + CK::b62 * k2[i] + CK::b63 * k3[i] +
                                 CK::b64 * k4[i] + CK::b65 * k5[i]);
        L.apply(tmp, k6);

        double err = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            const cplx high = y[i] + h * (CK::c1 * k1[i] + CK::c3 * k3[i] + CK::c4 * k4[i] +
                                          CK::c6 * k6[i]);
            const cplx low = y[i] + h * (CK::d1 * k1[i] + CK::d3 * k3[i] + CK::d4 * k4[i] +
                                         CK::d5 * k5[i] + CK::d6 * k6[i]);
            y5[i] = high;
            const double sc = opts.abs_tol + opts.rel_tol * std::abs(high);
            err = std::max(err, std::abs(high - low) / sc);
        }
        if (err <= 1.0) {
            y.swap(y5);
            time += h;
        }
        const double grow = (err > 0.0) ? 0.9 * std::pow(err, -0.2) : 5.0;
        h *= std::min(5.0, std::max(0.2, grow));
        if (h < 1e-14 * t) throw NumericsError("Lindblad integrator step collapse");
    }

    if (std::abs(st.trace() - initial_trace) > 1e-9)
        throw NumericsError("Lindblad integrator lost trace preservation");
    if (st.top_level_population(3) > opts.leakage_limit) {
        if (opts.auto_expand && 2 * n_cut <= opts.max_n_cut)
            return lindblad_oracle(p, 2 * n_cut, t, opts);
        throw NumericsError("Fock truncation leakage: increase n_cut");
    }
    return st;
}

// ---------------------------------------------------------------------------
// Fidelity model and naive Ramsey estimate
// ---------------------------------------------------------------------------

RoundFidelity round_fidelity(const SystemConfig& cfg, double l, double gamma_total) {
    const DerivedQuantities d = derive(cfg);
    RoundFidelity out;
    out.gas_exponent =
        4.0 * k::pi * gamma_total * l * l / (d.z0 * d.z0 * d.omega);
    const double gate_product = (1.0 - 2.0 * cfg.qubit.p_init) *
                                std::pow(1.0 - cfg.qubit.p_rot, 3) *
                                (1.0 - 2.0 * cfg.qubit.p_meas);
    const double damping = std::exp(-out.gas_exponent);
    out.fidelity = std::exp(-4.0 * k::pi / (d.omega * cfg.qubit.T2)) * damping * gate_product;
    out.fidelity_gate_adjusted = std::exp(-d.tau_exp / cfg.qubit.T2) * damping * gate_product;
    out.gate_times_significant = cfg.qubit.tau_rot + cfg.qubit.tau_meas > 0.05 * d.tau;
    return out;
}

RamseySensitivity ramsey_sensitivity(int n, const SystemConfig& cfg, double l) {
    if (n < 1) throw DomainError("Ramsey sensitivity needs n >= 1");
    const DerivedQuantities d = derive(cfg);
    RamseySensitivity out;
    out.delta_phi = 1.0 / (2.0 * n);
    out.delta_g = k::hbar * d.omega * out.delta_phi / (4.0 * k::pi * d.mass * l);
    const double tau_c = cfg.qubit.T2;
    out.coherence_bound = k::hbar / (2.0 * tau_c * l * d.mass * cfg.gravity);
    // same bound written through lambda z0 = l omega
    const double lambda = d.coupling_for(l);
    out.coherence_bound_alt =
        k::hbar * d.omega / (2.0 * tau_c * d.mass * cfg.gravity * lambda * d.z0);
    return out;
}

} // namespace qgrav::dynamics
