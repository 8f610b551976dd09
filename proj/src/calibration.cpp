#include "qgrav/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "qgrav/constants.hpp"
#include "qgrav/errors.hpp"
#include "qgrav/linalg.hpp"
#include "qgrav/rng.hpp"

namespace qgrav::calibration {

namespace k = constants;

double BlochVector::norm() const { return std::sqrt(x * x + y * y + z * z); }

namespace {

double precession_angle(double t, double sz0, double omega_q, double omega, double u) {
    // u = lambda^2 / omega
    return 2.0 * omega_q * t + sz0 * u * (t - std::sin(omega * t) / omega);
}

} // namespace

BlochVector free_evolution(double t, const BlochVector& s0, const FreeEvolutionParams& p) {
    const double u = p.lambda * p.lambda / p.omega;
    const double xi = precession_angle(t, s0.z, p.omega_q, p.omega, u);
    BlochVector s;
    s.x = s0.x * std::cos(xi) + s0.y * std::sin(xi);
    s.y = s0.y * std::cos(xi) - s0.x * std::sin(xi);
    s.z = s0.z;
    return s;
}

double displacement_mean(double t, double sz0, const FreeEvolutionParams& p) {
    return p.lambda * sz0 / p.omega * (std::cos(p.omega * t) - 1.0);
}

double qubit_signal(double t, const FreeEvolutionParams& p) {
    const double u = p.lambda * p.lambda / p.omega;
    const double beat = u * (t - std::sin(p.omega * t) / p.omega);
    return std::cos(2.0 * p.omega_q * t) * std::cos(beat);
}

CalibrationRecord synthesize_record(const FreeEvolutionParams& truth,
                                    const std::vector<double>& times, int shots,
                                    std::uint64_t seed) {
    CalibrationRecord rec;
    rec.times = times;
    rec.sigma_x.reserve(times.size());
    rec.shots.assign(times.size(), shots);
    Rng rng(seed);
    for (double t : times) {
        const double p_up = 0.5 * (1.0 + qubit_signal(t, truth));
        int ups = 0;
        for (int i = 0; i < shots; ++i) ups += rng.bernoulli(p_up);
        rec.sigma_x.push_back(2.0 * double(ups) / shots - 1.0);
    }
    return rec;
}

namespace {

double model(double t, double omega_q, double omega, double u) {
    return std::cos(2.0 * omega_q * t) * std::cos(u * (t - std::sin(omega * t) / omega));
}

// Binomial variance of the sigma_x estimator, floored away from zero so
// points near |m| = 1 keep a finite weight.
double point_variance(double m, int shots) {
    return std::max(1e-3, 1.0 - m * m) / shots;
}

double chi_square(const CalibrationRecord& rec, double omega_q, double omega, double u) {
    double chi2 = 0.0;
    for (std::size_t i = 0; i < rec.times.size(); ++i) {
        const double m = model(rec.times[i], omega_q, omega, u);
        const double r = rec.sigma_x[i] - m;
        chi2 += r * r / point_variance(m, rec.shots[i]);
    }
    return chi2;
}

// Dominant frequency of the series by a brute-force periodogram; the signal
// oscillates at 2 omega_q under the slow coupling envelope.  Non-uniform
// sample times carry information beyond the mean-rate Nyquist frequency, so
// the scan extends several times past it.
std::vector<double> periodogram_peaks(const CalibrationRecord& rec, std::size_t count) {
    const double t_span = rec.times.back() - rec.times.front();
    const double mean_nyquist = 0.5 * double(rec.times.size()) / t_span;
    const double f_lo = 0.5 / t_span;
    const double f_hi = 96.0 * mean_nyquist;
    const int n_freq = std::min(100000, static_cast<int>((f_hi - f_lo) * t_span * 8.0) + 1);
    std::vector<double> power(static_cast<std::size_t>(n_freq) + 1);
    for (int j = 1; j <= n_freq; ++j) {
        const double f = f_lo + (f_hi - f_lo) * double(j) / n_freq;
        std::complex<double> acc(0.0, 0.0);
        for (std::size_t i = 0; i < rec.times.size(); ++i) {
            const double ph = k::two_pi * f * rec.times[i];
            acc += rec.sigma_x[i] * std::complex<double>(std::cos(ph), -std::sin(ph));
        }
        power[static_cast<std::size_t>(j)] = std::norm(acc);
    }
    // Local maxima, highest first, separated by several resolution widths so
    // side-lobes of one strong peak do not crowd out genuine alternatives;
    // the final ranking among candidates is left to the fit itself.
    std::vector<int> maxima;
    for (int j = 2; j < n_freq; ++j)
        if (power[static_cast<std::size_t>(j)] > power[static_cast<std::size_t>(j - 1)] &&
            power[static_cast<std::size_t>(j)] >= power[static_cast<std::size_t>(j + 1)])
            maxima.push_back(j);
    std::sort(maxima.begin(), maxima.end(),
              [&power](int a, int b) {
                  return power[static_cast<std::size_t>(a)] > power[static_cast<std::size_t>(b)];
              });
    const int min_sep = std::max(1, static_cast<int>(4.0 / t_span / ((f_hi - f_lo) / n_freq)));
    std::vector<int> order;
    for (int j : maxima) {
        bool crowded = false;
        for (int kept : order)
            if (std::abs(kept - j) < min_sep) { crowded = true; break; }
        if (!crowded) order.push_back(j);
        if (order.size() == count) break;
    }
    std::vector<double> peaks;
    const double df = (f_hi - f_lo) / n_freq;
    for (int j : order) {
        double f_best = f_lo + df * j;
        const double lm = power[static_cast<std::size_t>(j - 1)];
        const double l0 = power[static_cast<std::size_t>(j)];
        const double lp = power[static_cast<std::size_t>(j + 1)];
        const double denom = lm - 2.0 * l0 + lp;
        if (denom < 0.0) f_best += 0.5 * (lm - lp) / denom * df;
        peaks.push_back(k::two_pi * f_best);
    }
    if (peaks.empty()) peaks.push_back(k::two_pi * f_lo);
    return peaks;
}

} // namespace

namespace {

struct Theta {
    double omega_q = 0.0;
    double omega = 0.0;
    double u = 0.0; // lambda^2 / omega
};

CalibrationRecord prefix_record(const CalibrationRecord& rec, double fraction) {
    CalibrationRecord out;
    const std::size_t n = std::max<std::size_t>(
        2, static_cast<std::size_t>(fraction * double(rec.times.size())));
    out.times.assign(rec.times.begin(), rec.times.begin() + static_cast<long>(n));
    out.sigma_x.assign(rec.sigma_x.begin(), rec.sigma_x.begin() + static_cast<long>(n));
    out.shots.assign(rec.shots.begin(), rec.shots.begin() + static_cast<long>(n));
    return out;
}

// Zooming coordinate scans.  Both frequencies are scanned at steps below
// their coherence scales: the carrier valley is ~ pi / (4 t_span) wide in
// omega_q, and the trap-frequency direction has wiggle-phase local minima
// spaced 2 pi / t_span apart that a relative grid would step over.
void zoom_polish(const CalibrationRecord& rec, Theta& th, double& chi2) {
    const double t_span = rec.times.back() - rec.times.front();
    for (int round = 0; round < 4; ++round) {
        const double half = std::max(4.0 / t_span, 2.5e-3 * th.omega_q) / std::pow(8.0, round);
        const int steps = 320;
        double wq_best = th.omega_q;
        for (int j = -steps; j <= steps; ++j) {
            const double wq = th.omega_q + half * j / steps;
            const double c = chi_square(rec, wq, th.omega, th.u);
            if (c < chi2) { chi2 = c; wq_best = wq; }
        }
        th.omega_q = wq_best;

        const double om_half =
            std::max(0.3 * th.omega, 2.0 * k::two_pi / t_span) / std::pow(4.0, round);
        const double om_step = std::min(om_half / 40.0, k::two_pi / t_span / 10.0);
        const int om_steps = static_cast<int>(om_half / om_step);
        const double u_half =
            (th.u > 0.0 ? 0.25 * th.u : 0.3 / t_span) / std::pow(4.0, round);
        const double om_c = th.omega, u_c = th.u;
        for (int a = -om_steps; a <= om_steps; ++a) {
            const double om = om_c + om_step * a;
            if (om <= 0.0) continue;
            for (int b = -12; b <= 12; ++b) {
                const double uu = std::max(0.0, u_c + u_half * b / 12.0);
                const double c = chi_square(rec, th.omega_q, om, uu);
                if (c < chi2) { chi2 = c; th.omega = om; th.u = uu; }
            }
        }
    }
}

// Weighted Levenberg-Marquardt with numeric Jacobian.  Returns the final
// chi-square; throws only on a genuinely wedged solve.
double levenberg_marquardt(const CalibrationRecord& rec, Theta& th, int& iterations,
                           bool& settled) {
    const double t_span = rec.times.back() - rec.times.front();
    std::array<double, 3> theta = {th.omega_q, th.omega, th.u};
    double lm_lambda = 1e-3;
    double chi2 = chi_square(rec, theta[0], theta[1], theta[2]);
    settled = false;
    int stall_count = 0;
    double window_ref = chi2;
    const int max_iter = 500;
    int it = 0;
    for (; it < max_iter && !settled; ++it) {
        const std::size_t n = rec.times.size();
        std::vector<std::array<double, 3>> J(n);
        std::vector<double> r(n), w(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = rec.times[i];
            const double m0 = model(t, theta[0], theta[1], theta[2]);
            r[i] = rec.sigma_x[i] - m0;
            w[i] = 1.0 / point_variance(m0, rec.shots[i]);
            for (int pidx = 0; pidx < 3; ++pidx) {
                const double scale = std::max(std::abs(theta[static_cast<std::size_t>(pidx)]),
                                              1.0 / t_span);
                const double h = 1e-7 * scale;
                std::array<double, 3> tp = theta, tm = theta;
                tp[static_cast<std::size_t>(pidx)] += h;
                tm[static_cast<std::size_t>(pidx)] -= h;
                J[i][static_cast<std::size_t>(pidx)] =
                    (model(t, tp[0], tp[1], tp[2]) - model(t, tm[0], tm[1], tm[2])) / (2.0 * h);
            }
        }
        std::vector<double> JTJ(9, 0.0), JTr(3, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (int a = 0; a < 3; ++a) {
                JTr[static_cast<std::size_t>(a)] +=
                    w[i] * J[i][static_cast<std::size_t>(a)] * r[i];
                for (int b = 0; b < 3; ++b)
                    JTJ[static_cast<std::size_t>(a * 3 + b)] +=
                        w[i] * J[i][static_cast<std::size_t>(a)] *
                        J[i][static_cast<std::size_t>(b)];
            }
        std::vector<double> A = JTJ;
        for (int d = 0; d < 3; ++d) A[static_cast<std::size_t>(d * 4)] *= 1.0 + lm_lambda;
        std::vector<double> step;
        try {
            step = linalg::solve(std::move(A), std::vector<double>(JTr), 3);
        } catch (const NumericsError&) {
            lm_lambda *= 10.0;
            if (lm_lambda > 1e12) settled = true;
            continue;
        }
        std::array<double, 3> trial = {theta[0] + step[0], theta[1] + step[1],
                                       theta[2] + step[2]};
        trial[1] = std::max(trial[1], 1e-3 / t_span);
        trial[2] = std::max(trial[2], 0.0);
        const double chi2_trial = chi_square(rec, trial[0], trial[1], trial[2]);
        if (chi2_trial < chi2) {
            const double rel = std::abs(chi2 - chi2_trial) / std::max(chi2, 1e-300);
            theta = trial;
            chi2 = chi2_trial;
            lm_lambda = std::max(lm_lambda * 0.3, 1e-12);
            stall_count = (rel < 1e-9) ? stall_count + 1 : 0;
            if (stall_count >= 5) settled = true;
        } else {
            lm_lambda *= 10.0;
            if (lm_lambda > 1e12) settled = true;
        }
        if (it % 25 == 24) { // zig-zag guard
            if (window_ref - chi2 < 1e-7 * std::max(chi2, 1e-300)) settled = true;
            window_ref = chi2;
        }
    }
    iterations += it;
    th.omega_q = theta[0];
    th.omega = theta[1];
    th.u = theta[2];
    return chi2;
}

} // namespace

FitResult fit_parameters(const CalibrationRecord& rec) {
    if (rec.times.size() < 100)
        throw DomainError("calibration fit needs at least 100 sample times");
    for (int s : rec.shots)
        if (s < 100) throw DomainError("calibration fit needs >= 100 shots per time");

    // Seed on a short prefix of the record, where the basins of attraction
    // are widest, then polish on growing prefixes.  The carrier chi-square
    // valley narrows as one part in ~1e5 of omega_q per full record span (a
    // single phase slip) while the envelope sidebands bias the periodogram
    // peak by many valley widths, so the carrier and envelope grids are swept
    // jointly at the seeding stage.
    const CalibrationRecord seed_rec = prefix_record(rec, 0.2);
    const double seed_span = seed_rec.times.back() - seed_rec.times.front();
    // candidate carriers from a longer prefix: more points sharpen the peak
    // against alias images, while the joint scans stay on the short prefix
    // where the basins are widest
    const auto carriers = periodogram_peaks(prefix_record(rec, 0.5), 10);
    Theta th{0.5 * carriers.front(), k::two_pi / seed_span, 0.0};
    double best_chi2 = chi_square(seed_rec, th.omega_q, th.omega, th.u);
    const double chi2_floor = 2.0 * double(seed_rec.times.size());
    for (const double carrier : carriers) {
        if (best_chi2 < chi2_floor) break; // already fitting at noise level
        const double wq_c = 0.5 * carrier;
        const double half = std::max(1.5e-3 * wq_c, 3.0 / seed_span);
        const int n_wq = 800;
        for (int iw = 0; iw < 12; ++iw) {
            const double omega = k::two_pi / seed_span * std::pow(100.0, iw / 11.0);
            for (int iu = 0; iu <= 12; ++iu) {
                const double u = (iu == 0) ? 0.0
                                           : 0.5 * k::pi / seed_span *
                                                 std::pow(150.0, (iu - 1) / 11.0);
                for (int j = -n_wq; j <= n_wq; ++j) {
                    const double wq = wq_c + half * j / n_wq;
                    const double c = chi_square(seed_rec, wq, omega, u);
                    if (c < best_chi2) {
                        best_chi2 = c;
                        th = Theta{wq, omega, u};
                    }
                }
            }
        }
    }

    // Global envelope scan at the seeded carrier: the trap-frequency
    // direction has wiggle-phase minima spaced 2 pi / span apart, so it is
    // swept densely across the whole plausible band.
    {
        const double om_step = k::two_pi / seed_span / 12.0;
        for (int a = 4; a <= 720; ++a) {
            const double om = om_step * a;
            for (int iu = 0; iu <= 150; ++iu) {
                const double u = (iu == 0) ? 0.0
                                           : 0.05 * k::pi / seed_span *
                                                 std::pow(1500.0, iu / 150.0);
                const double c = chi_square(seed_rec, th.omega_q, om, u);
                if (c < best_chi2) {
                    best_chi2 = c;
                    th.omega = om;
                    th.u = u;
                }
            }
        }
    }

    FitResult out;
    out.iterations = 0;
    double chi2 = best_chi2;
    bool settled = false;
    for (const double fraction : {0.2, 0.4, 0.7, 1.0}) {
        const CalibrationRecord stage = prefix_record(rec, fraction);
        chi2 = chi_square(stage, th.omega_q, th.omega, th.u);
        zoom_polish(stage, th, chi2);
        chi2 = levenberg_marquardt(stage, th, out.iterations, settled);
        // A basin picked on a shorter prefix occasionally fails to carry to
        // the longer one; rescan globally in the trap frequency (the
        // direction with quasi-periodic false minima) around the carried
        // envelope rate before accepting the rung.
        if (chi2 > 3.0 * double(stage.times.size()) && th.u > 0.0) {
            const double t_stage = stage.times.back() - stage.times.front();
            const double om_step = k::two_pi / t_stage / 12.0;
            const double u_c = th.u;
            bool improved = false;
            for (int a = 4; a <= 1440; ++a) {
                const double om = om_step * a;
                for (int b = -35; b <= 35; ++b) {
                    const double u = u_c * (1.0 + 0.01 * b);
                    const double c = chi_square(stage, th.omega_q, om, u);
                    if (c < chi2) {
                        chi2 = c;
                        th.omega = om;
                        th.u = u;
                        improved = true;
                    }
                }
            }
            if (improved) {
                zoom_polish(stage, th, chi2);
                chi2 = levenberg_marquardt(stage, th, out.iterations, settled);
            }
        }
    }
    out.converged = settled;
    if (!settled)
        throw NumericsError("calibration fit did not converge; best chi^2 " +
                            std::to_string(chi2) + " after " + std::to_string(out.iterations) +
                            " iterations");

    // Covariance from the undamped normal matrix at the optimum.
    {
        const double t_span = rec.times.back() - rec.times.front();
        const std::size_t n = rec.times.size();
        std::array<double, 3> theta = {th.omega_q, th.omega, th.u};
        std::vector<double> JTJ(9, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = rec.times[i];
            const double m0 = model(t, theta[0], theta[1], theta[2]);
            const double w = 1.0 / point_variance(m0, rec.shots[i]);
            std::array<double, 3> g{};
            for (int pidx = 0; pidx < 3; ++pidx) {
                const double scale = std::max(std::abs(theta[static_cast<std::size_t>(pidx)]),
                                              1.0 / t_span);
                const double h = 1e-7 * scale;
                std::array<double, 3> tp = theta, tm = theta;
                tp[static_cast<std::size_t>(pidx)] += h;
                tm[static_cast<std::size_t>(pidx)] -= h;
                g[static_cast<std::size_t>(pidx)] =
                    (model(t, tp[0], tp[1], tp[2]) - model(t, tm[0], tm[1], tm[2])) / (2.0 * h);
            }
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b)
                    JTJ[static_cast<std::size_t>(a * 3 + b)] +=
                        w * g[static_cast<std::size_t>(a)] * g[static_cast<std::size_t>(b)];
        }
        for (int d = 0; d < 3; ++d) {
            std::vector<double> e(3, 0.0);
            e[static_cast<std::size_t>(d)] = 1.0;
            try {
                auto col = linalg::solve(std::vector<double>(JTJ), std::move(e), 3);
                out.sigma[static_cast<std::size_t>(d)] =
                    std::sqrt(std::max(0.0, col[static_cast<std::size_t>(d)]));
            } catch (const NumericsError&) {
                out.sigma[static_cast<std::size_t>(d)] = 0.0;
            }
        }
    }

    out.params.omega_q = th.omega_q;
    out.params.omega = th.omega;
    out.lambda_sq_over_omega = th.u;
    out.params.lambda = std::sqrt(th.u * th.omega);
    out.residual_norm = std::sqrt(chi2 / double(rec.times.size()));
    return out;
}

} // namespace qgrav::calibration
