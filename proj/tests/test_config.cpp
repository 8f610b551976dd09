#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qgrav/config.hpp"
#include "qgrav/constants.hpp"
#include "qgrav/errors.hpp"
#include "test_support.hpp"

using namespace qgrav;
namespace k = constants;
using test::rel_err;
using test::table1;

TEST_CASE("reference config loads with the catalog geometry") {
    const auto& cfg = table1();
    CHECK(cfg.ring.radius == doctest::Approx(5e-6));
    CHECK(cfg.ring.wire_radius == doctest::Approx(1e-6));
    CHECK(cfg.sphere.radius == doctest::Approx(10e-6));
    CHECK(cfg.geometry.ring_qubit_distance == doctest::Approx(2e-6));
    CHECK(cfg.geometry.sphere_ring_gap == doctest::Approx(1e-6));
    CHECK(cfg.equilibrium_height() == doctest::Approx(11e-6));
    CHECK(cfg.unknown_keys.empty());
}

TEST_CASE("derived fields are computed, not read") {
    const auto& cfg = table1();
    CHECK(rel_err(cfg.sphere.volume(), 4.19e-15) < 0.01);
    CHECK(rel_err(cfg.ring.mass(), 1.12e-12) < 0.01); // lead density chain
}

TEST_CASE("missing field errors name the field") {
    std::string text = save_config(table1());
    const auto pos = text.find("wire_radius");
    REQUIRE(pos != std::string::npos);
    text.erase(pos, text.find('\n', pos) - pos);
    try {
        parse_config(text);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "wire_radius");
        CHECK(std::string(e.what()) == "missing field: wire_radius");
    }
}

TEST_CASE("malformed values are rejected with the key name") {
    CHECK_THROWS_AS(parse_config("sphere_radius = banana\n"), ConfigError);
    SystemConfig cfg = table1();
    cfg.ring.density = -5.0;
    CHECK_THROWS_AS(parse_config(save_config(cfg)), ConfigError);
    std::string dup = save_config(table1());
    dup += "ring_density = 11340\n";
    CHECK_THROWS_AS(parse_config(dup), ConfigError);
}

TEST_CASE("unknown keys are collected as warnings") {
    std::string text = save_config(table1());
    text += "mystery_knob = 3\n";
    const auto cfg = parse_config(text);
    REQUIRE(cfg.unknown_keys.size() == 1);
    CHECK(cfg.unknown_keys[0] == "mystery_knob");
}

TEST_CASE("save/load round trip is the identity") {
    const auto& cfg = table1();
    const auto twice = parse_config(save_config(parse_config(save_config(cfg))));
    CHECK(twice.ring.radius == cfg.ring.radius);
    CHECK(twice.sphere.mu0_magnetization == cfg.sphere.mu0_magnetization);
    CHECK(twice.qubit.frequency == cfg.qubit.frequency);
    CHECK(twice.pinned.trap_frequency.value() == cfg.pinned.trap_frequency.value());
    CHECK(twice.pinned.gamma_rad.value() == cfg.pinned.gamma_rad.value());
    CHECK(save_config(twice) == save_config(cfg));
}

TEST_CASE("derived chain reproduces the pinned operating point") {
    const auto d = derive(table1());
    CHECK(rel_err(d.z0, 1.74e-14) < 0.01);
    CHECK(rel_err(d.tau, 40.3e-6) < 0.005);
    CHECK(rel_err(d.l0_bound, 7.5e-19) < 0.02);
    CHECK(d.doublings_raw == doctest::Approx(30.2).epsilon(0.01));
    CHECK(d.doublings == 31);
    CHECK(rel_err(d.lambda_max / k::two_pi, 1.35e9) < 0.02);
    CHECK(rel_err(d.lambda0_formula / k::two_pi, 1.07) < 0.02);
    CHECK(d.tau_exp ==
          doctest::Approx(3e-6 + 3 * 40e-9 + 2 * d.tau + 4e-6).epsilon(1e-12));
}

TEST_CASE("ground state width identity") {
    const auto& cfg = table1();
    const auto d = derive(cfg);
    CHECK(rel_err(d.z0 * d.z0 * 2.0 * d.mass * d.omega, k::hbar) < 1e-12);
}

TEST_CASE("displacement is linear in the coupling") {
    const auto d = derive(table1());
    for (double lam : {1.0, 10.0, 6.3e9}) {
        CHECK(d.displacement(2.0 * lam) == doctest::Approx(2.0 * d.displacement(lam)));
        CHECK(d.coupling_for(d.displacement(lam)) == doctest::Approx(lam).epsilon(1e-12));
    }
}

TEST_CASE("doubling count brackets the displacement ratio") {
    auto check_bracket = [](const SystemConfig& cfg) {
        const auto d = derive(cfg);
        const double ratio = cfg.l_max / d.l0_bound;
        CHECK(std::exp2(d.doublings) >= ratio);
        CHECK(std::exp2(d.doublings - 1) < ratio);
        CHECK(d.l0 < d.l0_bound);
    };
    check_bracket(table1());
    SystemConfig heavier = table1();
    heavier.l_max = 3.3e-9;
    check_bracket(heavier);
    SystemConfig lighter = table1();
    lighter.l_max = 2.0e-18;
    check_bracket(lighter);
}

TEST_CASE("frequency scaling: four times the mass halves the trap frequency") {
    SystemConfig cfg = table1();
    cfg.pinned.trap_frequency.reset(); // geometric mode
    const double w1 = derive(cfg).omega;
    cfg.ring.density *= 4.0;
    const double w2 = derive(cfg).omega;
    CHECK(rel_err(w2, 0.5 * w1) < 1e-12);
}

TEST_CASE("validate flags the inductance and coupling table entries") {
    const auto report = validate(table1());
    REQUIRE(!report.rows.empty());
    auto find = [&report](const std::string& name) -> const ConsistencyRow& {
        for (const auto& r : report.rows)
            if (r.name == name) return r;
        REQUIRE_MESSAGE(false, "missing row " << name);
        static ConsistencyRow dummy;
        return dummy;
    };
    const auto& lr = find("ring_inductance");
    CHECK(rel_err(lr.recomputed, 1.06e-11) < 0.01); // wire formula value
    CHECK(lr.rel_dev > 0.3);                        // vs pinned 2.25e-11
    const auto& lmax = find("lambda_max");
    CHECK(rel_err(lmax.recomputed / k::two_pi, 1.35e9) < 0.02);
    CHECK(lmax.rel_dev < 0.02);
    const auto& l0 = find("lambda0");
    CHECK(rel_err(l0.recomputed / k::two_pi, 1.07) < 0.02); // vs pinned 0.63 Hz
    CHECK(l0.rel_dev > 0.3);
    const auto& flux = find("flux");
    CHECK(rel_err(flux.recomputed, 2.37e-12) < 0.15);
}

TEST_CASE("validate is pure and idempotent") {
    const auto& cfg = table1();
    const auto first = validate(cfg);
    const auto second = validate(cfg);
    CHECK(first.to_csv() == second.to_csv());
    CHECK(save_config(cfg) == save_config(table1()));
}

TEST_CASE("self-consistent config yields an empty deviation list") {
    SystemConfig cfg = table1();
    cfg.pinned = PinnedValues{}; // nothing pinned, nothing to deviate from
    cfg.sphere.mu0_magnetization = 0.079; // also under the critical-field cap
    const auto report = validate(cfg);
    CHECK(report.deviations(0.02).empty());
}

TEST_CASE("consistency report serializes to CSV and JSON") {
    const auto report = validate(table1());
    const auto csv = report.to_csv();
    CHECK(csv.rfind("name,pinned,recomputed,rel_dev\n", 0) == 0);
    CHECK(csv.find("ring_inductance") != std::string::npos);
    const auto json = report.to_json();
    CHECK(json.find("\"name\": \"lambda_max\"") != std::string::npos);
}

TEST_CASE("probability and time invariants are enforced on load") {
    SystemConfig bad_p = table1();
    bad_p.qubit.p_meas = 1.5;
    CHECK_THROWS_AS(parse_config(save_config(bad_p)), ConfigError);

    SystemConfig cfg = table1();
    cfg.qubit.T2 = 3.0 * cfg.qubit.T1;
    CHECK_THROWS_AS(parse_config(save_config(cfg)), ConfigError);
}
