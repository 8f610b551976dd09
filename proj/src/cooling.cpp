#include "qgrav/cooling.hpp"

#include <cmath>

#include "qgrav/constants.hpp"
#include "qgrav/errors.hpp"
#include "qgrav/linalg.hpp"
#include "qgrav/noise_budget.hpp"

namespace qgrav::cooling {

namespace k = constants;
using linalg::cplx;

CoolingParams CoolingParams::operating_point(const SystemConfig& cfg, double lambda) {
    CoolingParams p;
    const DerivedQuantities d = derive(cfg);
    p.omega = d.omega;
    p.rabi = 0.5 * d.omega;
    p.detuning = -std::sqrt(d.omega * d.omega - p.rabi * p.rabi);
    p.lambda = lambda;
    p.n_q = cfg.qubit.bath_occupation();
    // T1^-1 = Gamma_perp (2 N_q + 1), T2^-1 = T1^-1 / 2 + Gamma_parallel
    p.gamma_perp = 1.0 / (cfg.qubit.T1 * (2.0 * p.n_q + 1.0));
    p.gamma_parallel = 1.0 / cfg.qubit.T2 - 0.5 / cfg.qubit.T1;
    p.gamma_resonator = noise::gas_budget(cfg).damping_rate_used;
    return p;
}

// Bloch equations for s = (<sx>, <sy>, <sz>) of the driven damped qubit with
// H = -(delta/2) sz + (Omega/2) sx:
//   sx' =  delta sy            - sx / T2
//   sy' = -delta sx - Omega sz - sy / T2
//   sz' =  Omega sy            - (sz / T1 + Gamma_perp)
std::array<double, 9> bloch_matrix(const CoolingParams& p) {
    const double inv_T1 = p.gamma_perp * (2.0 * p.n_q + 1.0);
    const double inv_T2 = 0.5 * inv_T1 + p.gamma_parallel;
    return {-inv_T2, p.detuning, 0.0,
            -p.detuning, -inv_T2, -p.rabi,
            0.0, p.rabi, -inv_T1};
}

std::array<double, 3> bloch_drive(const CoolingParams& p) {
    return {0.0, 0.0, -p.gamma_perp};
}

std::array<double, 3> bloch_steady_state(const CoolingParams& p) {
    const auto A = bloch_matrix(p);
    const auto b = bloch_drive(p);
    std::vector<double> Av(A.begin(), A.end());
    std::vector<double> bv = {-b[0], -b[1], -b[2]};
    const auto s = linalg::solve(std::move(Av), std::move(bv), 3);
    return {s[0], s[1], s[2]};
}

double qubit_spectrum(double nu, const CoolingParams& p) {
    if (!(p.gamma_perp > 0.0))
        throw DomainError("qubit spectrum needs a decaying Bloch system (Gamma_perp > 0)");
    if (p.lambda == 0.0) return 0.0;
    const auto A = bloch_matrix(p);
    const auto s = bloch_steady_state(p);

    // Regression: v(t) = e^{A t} v(0) with
    //   v(0) = (<sx sz> - sx sz, <sy sz> - sy sz, 1 - sz^2),
    //   sx sz = -i sy,  sy sz = i sx.
    const std::array<cplx, 3> v0 = {cplx(-s[1] * 0.0 - s[0] * s[2], -s[1]),
                                    cplx(-s[1] * s[2], s[0]),
                                    cplx(1.0 - s[2] * s[2], 0.0)};
    // Int_0^inf e^{i nu t} e^{A t} dt = -(A + i nu)^{-1}
    std::array<cplx, 9> M;
    for (int i = 0; i < 9; ++i) M[static_cast<std::size_t>(i)] = -A[static_cast<std::size_t>(i)];
    M[0] -= cplx(0.0, nu);
    M[4] -= cplx(0.0, nu);
    M[8] -= cplx(0.0, nu);
    const auto x = linalg::solve3(M, v0);
    return 0.5 * p.lambda * p.lambda * x[2].real();
}

namespace {

// First-harmonic balance of the Bloch equations under the modulated detuning
// delta(t) -> delta - 2 lambda amp cos(omega t).  Returns S0 (dc) and S1
// (e^{-i omega t} component).
struct Harmonics {
    std::array<double, 3> s0;
    std::array<cplx, 3> s1;
};

Harmonics harmonic_balance(double amplitude, const CoolingParams& p) {
    const auto A0d = bloch_matrix(p);
    std::array<cplx, 9> A0;
    for (int i = 0; i < 9; ++i)
        A0[static_cast<std::size_t>(i)] = A0d[static_cast<std::size_t>(i)];
    // modulation generator: detuning enters A at (0,1) and (1,0)
    auto apply_A1 = [](const std::array<cplx, 3>& v) {
        return std::array<cplx, 3>{-v[1], v[0], 0.0};
    };
    const double drive = p.lambda * amplitude; // lambda * alpha

    // R_pm = (A0 -+ i omega)^{-1} applied to A1 columns
    auto shifted_inverse_apply = [&](double sign, const std::array<cplx, 3>& rhs) {
        std::array<cplx, 9> M = A0;
        M[0] += cplx(0.0, sign * p.omega);
        M[4] += cplx(0.0, sign * p.omega);
        M[8] += cplx(0.0, sign * p.omega);
        return linalg::solve3(M, rhs);
    };

    // Self-consistent dc component:
    // [A0 - drive^2 A1 ((A0 - i w)^{-1} + (A0 + i w)^{-1}) A1] S0 = -b
    std::array<cplx, 9> Meff = A0;
    for (int col = 0; col < 3; ++col) {
        std::array<cplx, 3> e{};
        e[static_cast<std::size_t>(col)] = 1.0;
        const auto a1e = apply_A1(e);
        const auto rm = shifted_inverse_apply(-1.0, a1e);
        const auto rp = shifted_inverse_apply(+1.0, a1e);
        const auto km = apply_A1(rm);
        const auto kp = apply_A1(rp);
        for (int row = 0; row < 3; ++row)
            Meff[static_cast<std::size_t>(row * 3 + col)] -=
                drive * drive * (km[static_cast<std::size_t>(row)] +
                                 kp[static_cast<std::size_t>(row)]);
    }
    const auto b = bloch_drive(p);
    const std::array<cplx, 3> rhs = {-b[0], -b[1], -b[2]};
    std::array<cplx, 9> Mcopy = Meff;
    const auto s0c = linalg::solve3(Mcopy, rhs);

    Harmonics h;
    for (int i = 0; i < 3; ++i)
        h.s0[static_cast<std::size_t>(i)] = s0c[static_cast<std::size_t>(i)].real();
    // S1 = -(A0 + i omega)^{-1} drive A1 S0
    const auto a1s0 = apply_A1(s0c);
    std::array<cplx, 3> rhs1 = {-drive * a1s0[0], -drive * a1s0[1], -drive * a1s0[2]};
    h.s1 = shifted_inverse_apply(+1.0, rhs1);
    return h;
}

// Unnormalized cooling rate at coherent amplitude amp; the alpha -> 0 limit
// is finite and anchors the normalization.
double raw_rate(double amplitude, const CoolingParams& p) {
    const auto h = harmonic_balance(amplitude, p);
    // i lambda (S1/alpha - S-1/alpha*) for real alpha, S-1 = conj(S1):
    // -2 lambda Im(S1^z) / alpha, computed without the 1/alpha division.
    std::array<cplx, 9> M;
    const auto A0d = bloch_matrix(p);
    for (int i = 0; i < 9; ++i)
        M[static_cast<std::size_t>(i)] = A0d[static_cast<std::size_t>(i)];
    M[0] += cplx(0.0, p.omega);
    M[4] += cplx(0.0, p.omega);
    M[8] += cplx(0.0, p.omega);
    std::array<cplx, 3> s0c = {h.s0[0], h.s0[1], h.s0[2]};
    const std::array<cplx, 3> a1s0 = {-s0c[1], s0c[0], 0.0};
    const std::array<cplx, 3> rhs = {-p.lambda * a1s0[0], -p.lambda * a1s0[1],
                                     -p.lambda * a1s0[2]};
    const auto s1_per_amp = linalg::solve3(M, rhs);
    return -2.0 * p.lambda * s1_per_amp[2].imag();
}

} // namespace

double normalized_rate(double amplitude, const CoolingParams& p) {
    const double r0 = raw_rate(0.0, p);
    if (r0 == 0.0) throw NumericsError("harmonic balance degenerate at zero amplitude");
    return raw_rate(amplitude, p) / r0;
}

CoolingResult steady_state_occupation(const CoolingParams& p, double n_th) {
    CoolingResult r;
    const double s_plus = qubit_spectrum(p.omega, p);
    const double s_minus = qubit_spectrum(-p.omega, p);
    r.gamma_c = s_plus - s_minus;
    if (!(r.gamma_c > 0.0))
        throw DomainError("not a cooling configuration: S(omega) <= S(-omega)");
    r.n0 = s_minus / r.gamma_c;
    r.zeta = p.gamma_resonator / r.gamma_c;
    r.gamma_cool = r.gamma_c + p.gamma_resonator;
    r.n_lamb_dicke = p.gamma_resonator * n_th / r.gamma_c + r.n0;

    // Amplitude integral I1 = 2 Int_0^inf a G~(a omega / lambda) da, taken in
    // the physical amplitude variable x = a omega / lambda.  Simpson panels
    // with a doubling cutoff on the normalized rate.
    const double scale = p.lambda / p.omega;
    double x_cut = 4.0;
    while (std::abs(normalized_rate(x_cut, p)) > 1e-6 && x_cut < 4096.0) x_cut *= 2.0;
    const int panels = 256;
    double integral = 0.0;
    const double hx = x_cut / panels;
    for (int i = 0; i < panels; ++i) {
        const double x0 = i * hx, x1 = x0 + hx, xm = x0 + 0.5 * hx;
        const double f0 = x0 * normalized_rate(x0, p);
        const double fm = xm * normalized_rate(xm, p);
        const double f1 = x1 * normalized_rate(x1, p);
        integral += hx / 6.0 * (f0 + 4.0 * fm + f1);
    }
    r.I1 = 2.0 * scale * scale * integral;

    // Large-amplitude occupancy with the quantum backaction floor added; the
    // logistic is evaluated in log space to survive extreme exponents.
    const double lam_ratio2 = scale * scale;
    if (n_th > 0.0) {
        const double X = r.I1 / (n_th * r.zeta * lam_ratio2);
        const double log_arg = std::log(r.zeta) + X;
        double mix;
        if (log_arg > 700.0)
            mix = 0.0;
        else
            mix = (1.0 - r.zeta) / (1.0 + std::exp(log_arg));
        r.n_full = n_th * (r.zeta + mix) + r.n0;
    } else {
        r.n_full = r.n0;
    }
    return r;
}

std::vector<CoolingCurveRow> cooling_curve(const CoolingParams& p,
                                           const std::vector<double>& n_th_values) {
    std::vector<CoolingCurveRow> rows;
    rows.reserve(n_th_values.size());
    for (double n_th : n_th_values) {
        const auto r = steady_state_occupation(p, n_th);
        rows.push_back({n_th, r.n_lamb_dicke, r.n_full});
    }
    return rows;
}

} // namespace qgrav::cooling
