#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "qgrav/calibration.hpp"
#include "qgrav/constants.hpp"
#include "qgrav/errors.hpp"
#include "qgrav/rng.hpp"
#include "test_support.hpp"

using namespace qgrav;
using namespace qgrav::calibration;
namespace k = constants;
using test::rel_err;

namespace {

const FreeEvolutionParams scaled_truth{50.0, 1.0, 0.3};

// Random sample times over many trap periods.  A uniform comb at 20 samples
// per trap period aliases the 50x faster qubit carrier exactly onto DC.
std::vector<double> sample_times(std::uint64_t seed, int count = 200,
                                 double span = 80.0 * k::two_pi) {
    std::vector<double> t;
    Rng rng(seed);
    for (int i = 0; i < count; ++i) t.push_back(span * rng.uniform());
    std::sort(t.begin(), t.end());
    return t;
}

// Mean-field equations of motion for the undriven joint system with the
// origin at the gravity-shifted equilibrium:
//   a' = -i w a - i (lambda/2) sz,   sx' = (2 wq - lambda (a + a*)) sy,
//   sy' = -(2 wq - lambda (a + a*)) sx,   sz' = 0.
struct MeanFieldState {
    std::complex<double> a;
    double sx, sy, sz;
};

MeanFieldState mean_field_rk4(double t_end, const BlochVector& s0,
                              const FreeEvolutionParams& p, int steps) {
    MeanFieldState st{{0.0, 0.0}, s0.x, s0.y, s0.z};
    const double h = t_end / steps;
    auto deriv = [&p](const MeanFieldState& s) {
        MeanFieldState d;
        const std::complex<double> i1(0.0, 1.0);
        d.a = -i1 * p.omega * s.a - i1 * 0.5 * p.lambda * s.sz;
        const double rate = 2.0 * p.omega_q - p.lambda * 2.0 * s.a.real();
        d.sx = rate * s.sy;
        d.sy = -rate * s.sx;
        d.sz = 0.0;
        return d;
    };
    auto advance = [](const MeanFieldState& s, const MeanFieldState& d, double f) {
        return MeanFieldState{s.a + f * d.a, s.sx + f * d.sx, s.sy + f * d.sy,
                              s.sz + f * d.sz};
    };
    for (int i = 0; i < steps; ++i) {
        const auto k1 = deriv(st);
        const auto k2 = deriv(advance(st, k1, 0.5 * h));
        const auto k3 = deriv(advance(st, k2, 0.5 * h));
        const auto k4 = deriv(advance(st, k3, h));
        st.a += h / 6.0 * (k1.a + 2.0 * k2.a + 2.0 * k3.a + k4.a);
        st.sx += h / 6.0 * (k1.sx + 2.0 * k2.sx + 2.0 * k3.sx + k4.sx);
        st.sy += h / 6.0 * (k1.sy + 2.0 * k2.sy + 2.0 * k3.sy + k4.sy);
        st.sz += h / 6.0 * (k1.sz + 2.0 * k2.sz + 2.0 * k3.sz + k4.sz);
    }
    return st;
}

} // namespace

TEST_CASE("decoupled evolution is pure precession at twice the splitting") {
    FreeEvolutionParams p{3.0, 1.0, 0.0};
    const BlochVector s0{0.8, -0.3, 0.5};
    for (double t : {0.1, 1.0, 7.0}) {
        const auto s = free_evolution(t, s0, p);
        CHECK(s.x == doctest::Approx(s0.x * std::cos(2.0 * p.omega_q * t) +
                                     s0.y * std::sin(2.0 * p.omega_q * t)));
        CHECK(s.y == doctest::Approx(s0.y * std::cos(2.0 * p.omega_q * t) -
                                     s0.x * std::sin(2.0 * p.omega_q * t)));
        CHECK(s.z == s0.z);
    }
}

TEST_CASE("the coupling wiggle vanishes at full trap periods") {
    const BlochVector s0{1.0, 0.0, 1.0};
    const double tau = k::two_pi / scaled_truth.omega;
    const auto s = free_evolution(tau, s0, scaled_truth);
    const double u = scaled_truth.lambda * scaled_truth.lambda / scaled_truth.omega;
    const double xi = 2.0 * scaled_truth.omega_q * tau + u * tau; // sin term gone
    CHECK(s.x == doctest::Approx(std::cos(xi)).epsilon(1e-12));
}

TEST_CASE("closed form matches the mean-field equations of motion") {
    const BlochVector s0{0.6, 0.4, 1.0};
    for (double t : {0.7, 3.0, 10.0 * k::two_pi}) {
        // step small against the fast precession scale 2 omega_q
        const int steps =
            std::max(100000, static_cast<int>(t * 2.0 * scaled_truth.omega_q * 250.0));
        const auto numeric = mean_field_rk4(t, s0, scaled_truth, steps);
        const auto closed = free_evolution(t, s0, scaled_truth);
        CHECK(std::abs(numeric.sx - closed.x) < 1e-8);
        CHECK(std::abs(numeric.sy - closed.y) < 1e-8);
        const double disp = displacement_mean(t, s0.z, scaled_truth);
        CHECK(std::abs(2.0 * numeric.a.real() - disp) < 1e-8);
    }
}

TEST_CASE("Bloch norm and sigma_z are conserved") {
    const BlochVector s0{0.36, 0.48, 0.8};
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const double t = 20.0 * k::two_pi * rng.uniform();
        const auto s = free_evolution(t, s0, scaled_truth);
        CHECK(rel_err(s.norm(), s0.norm()) < 1e-12);
        CHECK(s.z == s0.z);
    }
}

TEST_CASE("qubit signal averages the two current branches") {
    for (double t : {0.5, 2.7, 40.0}) {
        const BlochVector plus{1.0, 0.0, 1.0};
        const BlochVector minus{1.0, 0.0, -1.0};
        const double avg = 0.5 * (free_evolution(t, plus, scaled_truth).x +
                                  free_evolution(t, minus, scaled_truth).x);
        CHECK(qubit_signal(t, scaled_truth) == doctest::Approx(avg).epsilon(1e-12));
    }
}

TEST_CASE("noiseless synthetic data is recovered exactly") {
    CalibrationRecord rec;
    rec.times = sample_times(31415);
    rec.shots.assign(rec.times.size(), 1000000);
    for (double t : rec.times) rec.sigma_x.push_back(qubit_signal(t, scaled_truth));
    const auto fit = fit_parameters(rec);
    CHECK(rel_err(fit.params.omega_q, scaled_truth.omega_q) < 1e-10);
    CHECK(rel_err(fit.params.omega, scaled_truth.omega) < 1e-10);
    CHECK(rel_err(fit.params.lambda, scaled_truth.lambda) < 1e-10);
}

TEST_CASE("shot-noise recovery reaches one part in ten thousand") {
    const auto rec = synthesize_record(scaled_truth, sample_times(31415 + 101), 10000, 101);
    const auto fit = fit_parameters(rec);
    CHECK(fit.converged);
    CHECK(rel_err(fit.params.omega_q, scaled_truth.omega_q) < 1e-4);
    CHECK(rel_err(fit.params.omega, scaled_truth.omega) < 1e-4);
    CHECK(rel_err(fit.params.lambda, scaled_truth.lambda) < 1e-4);
    CHECK(fit.residual_norm < 1.3); // chi^2 per point near one
}

TEST_CASE("null coupling is recovered as consistent with zero") {
    FreeEvolutionParams null_truth = scaled_truth;
    null_truth.lambda = 0.0;
    const auto rec = synthesize_record(null_truth, sample_times(31415 + 5), 10000, 5);
    const auto fit = fit_parameters(rec);
    CHECK(fit.lambda_sq_over_omega <= 2.0 * fit.sigma[2] + 1e-9);
}

TEST_CASE("fit is equivariant under time rescaling") {
    const double s = 3.7;
    const auto times = sample_times(99);
    const auto rec = synthesize_record(scaled_truth, times, 10000, 7);
    CalibrationRecord scaled = rec;
    for (auto& t : scaled.times) t *= s;
    const auto fit = fit_parameters(rec);
    const auto fit_scaled = fit_parameters(scaled);
    CHECK(rel_err(fit_scaled.params.omega_q * s, fit.params.omega_q) < 1e-6);
    CHECK(rel_err(fit_scaled.params.omega * s, fit.params.omega) < 1e-6);
    CHECK(rel_err(fit_scaled.params.lambda * s, fit.params.lambda) < 1e-6);
    CHECK(rel_err(fit_scaled.residual_norm, fit.residual_norm) < 1e-6);
}

TEST_CASE("undersized records are rejected") {
    CalibrationRecord rec;
    rec.times = sample_times(1, 50);
    rec.shots.assign(rec.times.size(), 1000);
    rec.sigma_x.assign(rec.times.size(), 0.0);
    CHECK_THROWS_AS(fit_parameters(rec), DomainError);
    rec.times = sample_times(1, 150);
    rec.shots.assign(rec.times.size(), 50);
    rec.sigma_x.assign(rec.times.size(), 0.0);
    CHECK_THROWS_AS(fit_parameters(rec), DomainError);
}
