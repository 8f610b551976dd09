#include "qgrav/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "qgrav/constants.hpp"
#include "qgrav/errors.hpp"
#include "qgrav/open_dynamics.hpp"
#include "qgrav/rng.hpp"

namespace qgrav::estimation {

namespace k = constants;

ProtocolSchedule schedule(int K, int M_K, int mu) {
    if (K < 0) throw DomainError("schedule needs K >= 0");
    if (M_K < 1 || mu < 0) throw DomainError("schedule needs M_K >= 1, mu >= 0");
    ProtocolSchedule s;
    s.K = K;
    s.M_K = M_K;
    s.mu = mu;
    s.stages.reserve(static_cast<std::size_t>(K) + 1);
    for (int stage_k = 0; stage_k <= K; ++stage_k) {
        StagePlan plan;
        plan.k = stage_k;
        plan.measurements = M_K + mu * (K - stage_k);
        plan.primary_basis = (plan.measurements + 1) / 2;
        plan.offset_basis = plan.measurements / 2;
        s.stages.push_back(plan);
        s.total_measurements += plan.measurements;
        s.total_resource += std::int64_t(plan.measurements) << stage_k;
    }
    return s;
}

namespace {

double wrap_2pi(double phi) {
    phi = std::fmod(phi, k::two_pi);
    return phi < 0.0 ? phi + k::two_pi : phi;
}

// Second measurement basis offset for a stage.  Quadrature is required to
// break the phi -> -phi reflection degeneracy of the cosine basis; a
// pi/M(K,k) offset coincides with quadrature at the deepest stage (M = 2)
// but carries vanishing reflection information at the shallow stages and
// cannot reach the target precision.
double offset_basis_angle(const StagePlan& plan) {
    (void)plan;
    return 0.5 * k::pi;
}

// Hedged log-likelihood of the stage phase given binary counts in the two
// measurement bases: outcome probabilities p_b = (1 + f cos(phi - theta_b))/2
// with beta = 1/2 pseudo-counts regularizing empty bins.
double stage_log_likelihood(double phi, double fidelity, int h0, int n0, double theta0,
                            int h1, int n1, double theta1) {
    constexpr double beta = 0.5;
    double logl = 0.0;
    const double p0 = 0.5 * (1.0 + fidelity * std::cos(phi - theta0));
    logl += (h0 + beta) * std::log(std::max(p0, 1e-300)) +
            (n0 - h0 + beta) * std::log(std::max(1.0 - p0, 1e-300));
    if (n1 > 0) {
        const double p1 = 0.5 * (1.0 + fidelity * std::cos(phi - theta1));
        logl += (h1 + beta) * std::log(std::max(p1, 1e-300)) +
                (n1 - h1 + beta) * std::log(std::max(1.0 - p1, 1e-300));
    }
    return logl;
}

// Maximizer of the hedged stage likelihood over [0, 2 pi): dense scan plus a
// parabolic refinement of the best node.
double stage_ml_phase(double fidelity, int h0, int n0, double theta0, int h1, int n1,
                      double theta1) {
    const int grid = 720;
    double best_phi = 0.0, best_l = -1e300;
    for (int i = 0; i < grid; ++i) {
        const double phi = k::two_pi * i / grid;
        const double l = stage_log_likelihood(phi, fidelity, h0, n0, theta0, h1, n1, theta1);
        if (l > best_l) { best_l = l; best_phi = phi; }
    }
    const double h = k::two_pi / grid;
    const double lm = stage_log_likelihood(best_phi - h, fidelity, h0, n0, theta0, h1, n1, theta1);
    const double lp = stage_log_likelihood(best_phi + h, fidelity, h0, n0, theta0, h1, n1, theta1);
    const double denom = lm - 2.0 * best_l + lp;
    if (denom < 0.0) best_phi += 0.5 * h * (lm - lp) / denom;
    return wrap_2pi(best_phi);
}

struct ArcBranch {
    double x = 0.0;    // fraction of a turn of 2^k phi0 at the current level
    double logl = 0.0; // accumulated hedged log-likelihood
};

} // namespace

PhaseEstimate simulate_cycle(double phi_true, double fidelity, const ProtocolSchedule& sched,
                             std::uint64_t seed, std::uint64_t trial,
                             const SimulateOptions& opts) {
    if (!(fidelity > 0.0) || fidelity > 1.0)
        throw DomainError("estimation impossible: fidelity must lie in (0, 1]");
    if (!(phi_true >= 0.0 && phi_true < k::two_pi))
        throw DomainError("phi_true must lie in [0, 2 pi)");

    const int inflate =
        opts.inflate_counts ? static_cast<int>(std::ceil(1.0 / (fidelity * fidelity))) : 1;

    PhaseEstimate result;
    result.stages.reserve(sched.stages.size());
    Rng rng(seed, trial);

    // Draw the measurement record and form the per-stage ML phase estimates,
    // deepest stage first.
    for (auto it = sched.stages.rbegin(); it != sched.stages.rend(); ++it) {
        const StagePlan& plan = *it;
        StageRecord rec;
        rec.k = plan.k;
        const double phi_k = wrap_2pi(std::ldexp(phi_true, plan.k));
        const double theta = offset_basis_angle(plan);

        rec.n_primary = plan.primary_basis * inflate;
        rec.n_offset = plan.offset_basis * inflate;
        for (int i = 0; i < rec.n_primary; ++i)
            rec.heads_primary += rng.bernoulli(0.5 * (1.0 + fidelity * std::cos(phi_k)));
        for (int i = 0; i < rec.n_offset; ++i)
            rec.heads_offset += rng.bernoulli(0.5 * (1.0 + fidelity * std::cos(phi_k - theta)));

        rec.phase_estimate = stage_ml_phase(fidelity, rec.heads_primary, rec.n_primary, 0.0,
                                            rec.heads_offset, rec.n_offset, theta);
        result.stages.push_back(rec);
    }

    auto stage_logl_at = [&](const StageRecord& rec, double phase) {
        const StagePlan& plan = sched.stages[static_cast<std::size_t>(rec.k)];
        return stage_log_likelihood(phase, fidelity, rec.heads_primary, rec.n_primary, 0.0,
                                    rec.heads_offset, rec.n_offset,
                                    offset_basis_angle(plan));
    };

    // Coarse-to-fine arc search (k = K down to 0).  Each arc candidate halves
    // when moving down one stage and both half-turn placements are scored
    // against the stage's own record; a beam of the most likely distinct arcs
    // is kept so that a single ambiguous stage cannot derail the estimate.
    // The first stage has only M_K measurements, so its record cannot rule
    // out any region of the circle; start from full angular coverage and let
    // pruning begin once several stages have accumulated.
    constexpr std::size_t beam_width = 24;
    std::vector<ArcBranch> beam;
    {
        const StageRecord& deepest = result.stages.front();
        const int grid = 12;
        for (int i = 0; i < grid; ++i) {
            const double x = (i + 0.5) / grid;
            beam.push_back({x, stage_logl_at(deepest, x * k::two_pi)});
        }
        std::sort(beam.begin(), beam.end(),
                  [](const ArcBranch& a, const ArcBranch& b) { return a.logl > b.logl; });
        result.stages.front().arc_center = beam.front().x;
        result.stages.front().arc_width = k::two_pi / 3.0;
    }
    for (std::size_t i = 1; i < result.stages.size(); ++i) {
        const StageRecord& rec = result.stages[i];
        std::vector<ArcBranch> next;
        next.reserve(2 * beam.size());
        for (const ArcBranch& br : beam)
            for (double half : {0.0, 0.5}) {
                double x = 0.5 * br.x + half;
                x -= std::floor(x);
                next.push_back({x, br.logl + stage_logl_at(rec, x * k::two_pi)});
            }
        std::sort(next.begin(), next.end(),
                  [](const ArcBranch& a, const ArcBranch& b) { return a.logl > b.logl; });
        // Keep the best representative per arc: lineages that have converged
        // to the same place are duplicates and would starve the beam.
        std::vector<ArcBranch> kept;
        const double tol = 0.25 / std::ldexp(1.0, static_cast<int>(std::min<std::size_t>(i, 40)));
        for (const ArcBranch& cand : next) {
            bool duplicate = false;
            for (const ArcBranch& kb : kept) {
                double dd = std::abs(cand.x - kb.x);
                dd = std::min(dd, 1.0 - dd);
                if (dd < tol) { duplicate = true; break; }
            }
            if (!duplicate) kept.push_back(cand);
            if (kept.size() == beam_width) break;
        }
        beam = std::move(kept);
        result.stages[i].arc_center = beam.front().x;
        result.stages[i].arc_width = k::two_pi / 3.0 / std::ldexp(1.0, rec.k);
    }

    // Final estimate: circular mean of the record posterior (uniform prior)
    // sampled around the surviving arcs.  The circular mean is the minimizer
    // of the Holevo cost, which is what the protocol is scored on.
    auto total_logl = [&](double phi0) {
        double ll = 0.0;
        for (const StageRecord& rec : result.stages)
            ll += stage_logl_at(rec, wrap_2pi(std::ldexp(phi0, rec.k)));
        return ll;
    };
    const double arc = k::two_pi / 3.0 / std::ldexp(1.0, sched.K);
    const double step = arc / 10.0;
    std::vector<std::int64_t> keys;
    for (std::size_t b = 0; b < std::min<std::size_t>(10, beam.size()); ++b) {
        const std::int64_t center =
            static_cast<std::int64_t>(std::floor(beam[b].x * k::two_pi / step + 0.5));
        for (int j = -150; j <= 150; ++j) keys.push_back(center + j);
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    std::vector<std::pair<double, double>> samples; // (phi, logl)
    samples.reserve(keys.size());
    double ll_max = -1e300;
    for (const std::int64_t key : keys) {
        const double phi = wrap_2pi(key * step);
        const double ll = total_logl(phi);
        ll_max = std::max(ll_max, ll);
        samples.emplace_back(phi, ll);
    }
    std::complex<double> mean(0.0, 0.0);
    for (const auto& [phi, ll] : samples)
        mean += std::exp(ll - ll_max) * std::complex<double>(std::cos(phi), std::sin(phi));
    result.estimate = wrap_2pi(std::arg(mean));
    result.final_arc_width = arc;
    return result;
}

double holevo_deviation(const std::vector<double>& phi_true,
                        const std::vector<double>& phi_hat) {
    if (phi_true.size() != phi_hat.size() || phi_true.empty())
        throw DomainError("Holevo deviation needs matching non-empty samples");
    std::complex<double> mean(0.0, 0.0);
    for (std::size_t i = 0; i < phi_true.size(); ++i) {
        const double d = phi_true[i] - phi_hat[i];
        mean += std::complex<double>(std::cos(d), std::sin(d));
    }
    mean /= double(phi_true.size());
    const double s = std::abs(mean);
    if (s == 0.0) throw NumericsError("Holevo variance diverged");
    return std::sqrt(1.0 / (s * s) - 1.0);
}

SensitivityReport sensitivity(const SystemConfig& cfg, const noise::NoiseBudget& budget) {
    const DerivedQuantities d = derive(cfg);
    SensitivityReport r;
    r.K = d.doublings;
    r.N = ProtocolSchedule::resource_closed_form(r.K);
    r.delta_phi0 = k::two_pi / double(r.N);
    const double mg = d.mass * cfg.gravity;
    r.l0 = d.l0;
    r.lambda0 = d.coupling_for(d.l0);
    r.dg_over_g_cycle = k::hbar * d.omega / (2.0 * mg * d.l0 * double(r.N));
    r.dg_over_g_cycle_lmax_form = k::hbar * d.omega / (20.0 * mg * cfg.l_max);
    r.tau_exp = d.tau_exp;
    r.tau_phi = 0.5 * d.tau_exp * (3.0 * r.K * r.K + 7.0 * r.K + 4.0);
    const double root_time = std::sqrt(r.tau_phi);
    r.ideal_prhz = r.dg_over_g_cycle_lmax_form * root_time;
    r.fidelity = budget.fidelity;
    r.corrected_prhz = k::hbar * d.omega / (10.0 * r.fidelity * mg * cfg.l_max) * root_time;
    r.asymptotic_prhz =
        std::sqrt(1.5 * d.tau_exp) * std::log2(d.alpha) / (10.0 * d.alpha);
    return r;
}

std::vector<WireSweepRow> wire_radius_sweep(const SystemConfig& cfg, double a_lo, double a_hi,
                                            int points) {
    if (points < 2 || !(a_lo > 0.0) || !(a_hi > a_lo) || a_hi >= cfg.ring.radius)
        throw DomainError("wire sweep needs 0 < a_lo < a_hi < ring radius");
    std::vector<WireSweepRow> rows;
    rows.reserve(static_cast<std::size_t>(points));

    const double m_ref = cfg.ring.mass();
    const double L_ref = cfg.ring_inductance();
    const double L_formula_ref = cfg.ring.self_inductance_formula();

    for (int i = 0; i < points; ++i) {
        const double a = a_lo + (a_hi - a_lo) * double(i) / double(points - 1);
        SystemConfig c = cfg;
        c.ring.wire_radius = a;
        // Scale the pinned inductance and frequency with the force-balance
        // laws so the sweep stays anchored to the reference operating point.
        if (cfg.pinned.ring_inductance) {
            const double L_scale = c.ring.self_inductance_formula() / L_formula_ref;
            c.pinned.ring_inductance = *cfg.pinned.ring_inductance * L_scale;
        }
        if (cfg.pinned.trap_frequency) {
            const double scale =
                std::sqrt(m_ref * L_ref / (c.ring.mass() * c.ring_inductance()));
            c.pinned.trap_frequency = *cfg.pinned.trap_frequency * scale;
        }
        // Per-point damping follows the formulas, not the reference pins.
        c.pinned.gamma_gas.reset();
        c.pinned.gamma_eddy.reset();
        c.pinned.gamma_rad.reset();

        const DerivedQuantities d = derive(c);
        const auto budget = noise::full_budget(c);
        const auto rep = sensitivity(c, budget);
        WireSweepRow row;
        row.wire_radius = a;
        row.omega = d.omega;
        row.mass = d.mass;
        row.K = d.doublings;
        row.fidelity = budget.fidelity;
        row.ideal_prhz = rep.ideal_prhz;
        row.corrected_prhz = rep.corrected_prhz;
        row.tau_phi = rep.tau_phi;
        rows.push_back(row);
    }
    return rows;
}

} // namespace qgrav::estimation
