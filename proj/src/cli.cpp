#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "qgrav/calibration.hpp"
#include "qgrav/config.hpp"
#include "qgrav/constants.hpp"
#include "qgrav/cooling.hpp"
#include "qgrav/errors.hpp"
#include "qgrav/estimation.hpp"
#include "qgrav/inductance.hpp"
#include "qgrav/magnetostatics.hpp"
#include "qgrav/noise_budget.hpp"
#include "qgrav/report.hpp"

namespace qgrav::cli {

namespace k = constants;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool json_stdout = false;
};

void add_common(CLI::App* cmd, CommonArgs& c) {
    cmd->add_option("config", c.config_path, "system configuration file")->required();
    cmd->add_option("--out-dir", c.out_dir, "directory for output artifacts");
    cmd->add_option("--seed", c.seed, "base seed for randomized runs");
    cmd->add_flag("--json", c.json_stdout, "print the summary JSON to stdout");
}

std::string out_path(const CommonArgs& c, const std::string& name) {
    fs::create_directories(c.out_dir);
    return (fs::path(c.out_dir) / name).string();
}

json manifest_json(const report::RunManifest& m) {
    return json::parse(m.as_json_object());
}

// ---- per-figure CSV builders (shared between subcommands and `report`) ----

std::string fz_profile_csv(const SystemConfig& cfg, double z_lo, double z_hi, int points,
                           const report::RunManifest& m) {
    report::CsvWriter csv({"z", "f_z"});
    for (int i = 0; i < points; ++i) {
        const double z = z_lo + (z_hi - z_lo) * double(i) / double(points - 1);
        csv.add_row({z, magnetostatics::vertical_force(z, cfg)});
    }
    return csv.str(m);
}

std::string sweep_csv(const inductance::SweepResult& r, const report::RunManifest& m) {
    report::CsvWriter csv({"value", "lambda"});
    for (const auto& p : r.points) csv.add_row({p.value, p.lambda});
    return csv.str(m);
}

std::string cooling_csv(const std::vector<cooling::CoolingCurveRow>& rows,
                        const report::RunManifest& m) {
    report::CsvWriter csv({"N_th", "n_LD", "n_f"});
    for (const auto& r : rows) csv.add_row({r.n_th, r.n_lamb_dicke, r.n_full});
    return csv.str(m);
}

std::string wire_sweep_ideal_csv(const std::vector<estimation::WireSweepRow>& rows,
                                const report::RunManifest& m) {
    // column contract: a, omega_hz, ideal_prhz
    report::CsvWriter csv({"a", "omega_hz", "ideal_prhz"});
    for (const auto& r : rows) csv.add_row({r.wire_radius, r.omega / k::two_pi, r.ideal_prhz});
    return csv.str(m);
}

std::string wire_sweep_full_csv(const std::vector<estimation::WireSweepRow>& rows,
                                const report::RunManifest& m) {
    report::CsvWriter csv({"a", "omega_hz", "ideal_prhz", "corrected_prhz", "tau_phi"});
    for (const auto& r : rows)
        csv.add_row({r.wire_radius, r.omega / k::two_pi, r.ideal_prhz, r.corrected_prhz,
                     r.tau_phi});
    return csv.str(m);
}

json trap_profile_json(const SystemConfig& cfg) {
    const auto tp = magnetostatics::trap_profile(cfg);
    const auto d = derive(cfg);
    json j;
    j["omega_geometric"] = tp.omega;
    j["omega_used"] = d.omega;
    j["dI_dz"] = tp.dI_dz;
    j["I_r_max"] = tp.I_r_max;
    j["vertical_stiffness"] = tp.vertical_stiffness;
    j["gamma_cross"] = tp.gamma_cross;
    j["beta_quartic"] = tp.beta_quartic;
    j["torsional_modes"] = tp.torsional_modes;
    j["z0"] = d.z0;
    j["tau"] = d.tau;
    j["l0_bound"] = d.l0_bound;
    j["doublings"] = d.doublings;
    j["lambda_max"] = d.lambda_max;
    j["tau_exp"] = d.tau_exp;
    return j;
}

struct ProtocolSummary {
    json summary;
    std::string trials_csv;
};

ProtocolSummary run_protocol(const SystemConfig& cfg, int K, double fidelity, int trials,
                             std::uint64_t seed, double g_true,
                             const report::RunManifest& m) {
    const auto d = derive(cfg);
    const auto sched = estimation::schedule(K);
    // Gravitational stage phase for the smallest displacement of this run.
    const double l0 = cfg.l_max / std::ldexp(1.0, d.doublings);
    const double phi_full = 2.0 * d.mass * g_true * l0 * d.tau / k::hbar;
    const double phi_true = phi_full - k::two_pi * std::floor(phi_full / k::two_pi);

    // reduced visibility is compensated the standard way: counts per stage
    // inflated by 1/f^2
    estimation::SimulateOptions opts;
    opts.inflate_counts = fidelity < 1.0;

    const auto t0 = std::chrono::steady_clock::now();
    std::vector<double> truths(static_cast<std::size_t>(trials)),
        estimates(static_cast<std::size_t>(trials));
    const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::future<void>> futs;
    std::atomic<int> next{0};
    for (unsigned w = 0; w < workers; ++w)
        futs.push_back(std::async(std::launch::async, [&] {
            for (int i = next.fetch_add(1); i < trials; i = next.fetch_add(1)) {
                const auto est = estimation::simulate_cycle(phi_true, fidelity, sched, seed,
                                                            static_cast<std::uint64_t>(i), opts);
                truths[static_cast<std::size_t>(i)] = phi_true;
                estimates[static_cast<std::size_t>(i)] = est.estimate;
            }
        }));
    for (auto& f : futs) f.get();
    const auto t1 = std::chrono::steady_clock::now();

    const double holevo = estimation::holevo_deviation(truths, estimates);
    report::CsvWriter csv({"trial", "phi_true", "phi_hat"});
    for (int i = 0; i < trials; ++i)
        csv.add_row({double(i), truths[static_cast<std::size_t>(i)],
                     estimates[static_cast<std::size_t>(i)]});

    ProtocolSummary out;
    out.trials_csv = csv.str(m);
    out.summary["manifest"] = manifest_json(m);
    out.summary["K"] = K;
    out.summary["N"] = sched.total_resource;
    out.summary["trials"] = trials;
    out.summary["fidelity"] = fidelity;
    out.summary["g_true"] = g_true;
    out.summary["phi_true"] = phi_true;
    out.summary["counts_inflated"] = opts.inflate_counts;
    out.summary["holevo_deviation"] = holevo;
    out.summary["heisenberg_bound_2pi_over_N"] = k::two_pi / double(sched.total_resource);
    out.summary["wall_seconds"] =
        std::chrono::duration_cast<std::chrono::duration<double>>(t1 - t0).count();
    return out;
}

json sensitivity_json(const estimation::SensitivityReport& r) {
    json j;
    j["K"] = r.K;
    j["N"] = r.N;
    j["delta_phi0"] = r.delta_phi0;
    j["dg_over_g_cycle"] = r.dg_over_g_cycle;
    j["dg_over_g_cycle_lmax_form"] = r.dg_over_g_cycle_lmax_form;
    j["tau_exp"] = r.tau_exp;
    j["tau_phi"] = r.tau_phi;
    j["ideal_prhz"] = r.ideal_prhz;
    j["corrected_prhz"] = r.corrected_prhz;
    j["asymptotic_prhz"] = r.asymptotic_prhz;
    j["fidelity"] = r.fidelity;
    j["l0"] = r.l0;
    j["lambda0"] = r.lambda0;
    return j;
}

json budget_json(const noise::NoiseBudget& nb) {
    json j;
    j["knudsen"] = nb.knudsen;
    j["gamma_total"] = nb.gamma_total;
    j["fidelity"] = nb.fidelity;
    j["fidelity_gate_adjusted"] = nb.fidelity_gate_adjusted;
    j["gate_times_significant"] = nb.gate_times_significant;
    j["channels"] = json::array();
    for (const auto& ch : nb.channels) {
        json cj;
        cj["name"] = ch.name;
        cj["power_w"] = ch.power;
        cj["quality"] = ch.quality;
        cj["gamma_derived"] = ch.damping_rate;
        cj["gamma_pinned"] = ch.damping_rate_pinned;
        cj["gamma_used"] = ch.damping_rate_used;
        cj["decoherence_exponent"] = ch.decoherence_exponent;
        j["channels"].push_back(cj);
    }
    return j;
}

} // namespace


void emit_report(const ReportBundle& bundle, const std::string& out_dir,
                 const report::RunManifest& m) {
    std::vector<std::string> missing;
    if (!bundle.consistency_csv) missing.push_back("consistency");
    if (!bundle.design) missing.push_back("design");
    if (!bundle.qubit_radius_sweep_csv) missing.push_back("qubit_radius_sweep");
    if (!bundle.scale_sweep_csv) missing.push_back("scale_sweep");
    if (!bundle.cooling_csv) missing.push_back("cooling");
    if (!bundle.budget) missing.push_back("budget");
    if (!bundle.wire_sweep_ideal_csv) missing.push_back("wire_sweep_ideal");
    if (!bundle.wire_sweep_full_csv) missing.push_back("wire_sweep_corrected");
    if (!bundle.sensitivity) missing.push_back("sensitivity");
    if (!missing.empty()) {
        std::string list;
        for (const auto& s : missing) list += (list.empty() ? "" : ", ") + s;
        throw DomainError("report bundle incomplete; missing stages: " + list);
    }
    fs::create_directories(out_dir);
    auto path = [&out_dir](const char* name) { return (fs::path(out_dir) / name).string(); };
    report::write_file(path("consistency.csv"), *bundle.consistency_csv);
    report::write_file(path("design.json"), bundle.design->dump(2) + "\n");
    report::write_file(path("coupling_vs_qubit_radius.csv"), *bundle.qubit_radius_sweep_csv);
    report::write_file(path("coupling_vs_scale.csv"), *bundle.scale_sweep_csv);
    report::write_file(path("cooling_curve.csv"), *bundle.cooling_csv);
    report::write_file(path("budget.json"), bundle.budget->dump(2) + "\n");
    report::write_file(path("sensitivity_vs_wire_radius.csv"), *bundle.wire_sweep_ideal_csv);
    report::write_file(path("sensitivity_vs_wire_radius_full.csv"), *bundle.wire_sweep_full_csv);
    json top;
    top["manifest"] = manifest_json(m);
    top["sensitivity"] = *bundle.sensitivity;
    report::write_file(path("summary.json"), top.dump(2) + "\n");
}

int run(const std::vector<std::string>& args) {
    CLI::App app{"design and protocol simulator for a magnetomechanical quantum gravimeter"};
    app.require_subcommand(1);

    CommonArgs validate_args, design_args, sweep_args_c, cool_args, budget_args,
        protocol_args, calibrate_args, report_args;

    auto* cmd_validate =
        app.add_subcommand("validate", "cross-check derived quantities against pinned values");
    add_common(cmd_validate, validate_args);

    auto* cmd_design = app.add_subcommand("design", "trap profile and derived design numbers");
    add_common(cmd_design, design_args);
    double z_lo = 0.0, z_hi = 0.0;
    int design_points = 101;
    cmd_design->add_option("--z-min", z_lo, "force profile lower bound (m)");
    cmd_design->add_option("--z-max", z_hi, "force profile upper bound (m)");
    cmd_design->add_option("--points", design_points, "force profile sample count");

    auto* cmd_sweep = app.add_subcommand("sweep", "coupling strength design sweeps");
    add_common(cmd_sweep, sweep_args_c);
    std::string sweep_variable = "qubit_radius";
    double sweep_min = 0.0, sweep_max = 0.0;
    int sweep_points = 101;
    std::string sweep_out;
    cmd_sweep->add_option("--variable", sweep_variable,
                          "qubit_radius | sphere_radius | system_scale");
    cmd_sweep->add_option("--min", sweep_min, "sweep lower bound")->required();
    cmd_sweep->add_option("--max", sweep_max, "sweep upper bound")->required();
    cmd_sweep->add_option("--points", sweep_points, "sample count");
    cmd_sweep->add_option("--out", sweep_out, "CSV path (stdout when omitted)");

    auto* cmd_cool = app.add_subcommand("cool", "sideband cooling performance curve");
    add_common(cmd_cool, cool_args);
    double cool_lambda_hz = 1e4, nth_min = 1.0, nth_max = 1e9;
    int cool_points = 46;
    cmd_cool->add_option("--lambda", cool_lambda_hz, "drive coupling (Hz)");
    cmd_cool->add_option("--nth-min", nth_min, "initial occupation grid start");
    cmd_cool->add_option("--nth-max", nth_max, "initial occupation grid end");
    cmd_cool->add_option("--points", cool_points, "grid points (log spaced)");

    auto* cmd_budget = app.add_subcommand("budget", "noise and decoherence budget");
    add_common(cmd_budget, budget_args);

    auto* cmd_protocol = app.add_subcommand("protocol", "Monte-Carlo phase estimation");
    add_common(cmd_protocol, protocol_args);
    int proto_K = 10, proto_trials = 500;
    double proto_fidelity = -1.0, proto_g_true = -1.0;
    cmd_protocol->add_option("--K", proto_K, "number of doublings");
    cmd_protocol->add_option("--fidelity", proto_fidelity,
                             "per-round fidelity (budget value when omitted)");
    cmd_protocol->add_option("--trials", proto_trials, "Monte-Carlo trials");
    cmd_protocol->add_option("--g-true", proto_g_true, "true local gravity (m/s^2)");

    auto* cmd_calibrate =
        app.add_subcommand("calibrate", "fit (omega_q, omega, lambda) from a measurement CSV");
    add_common(cmd_calibrate, calibrate_args);
    std::string calib_data;
    cmd_calibrate->add_option("--data", calib_data, "CSV with columns t,sigma_x,shots")
        ->required();

    auto* cmd_report = app.add_subcommand("report", "all figure data plus the headline numbers");
    add_common(cmd_report, report_args);

    std::vector<std::string> argv_mut(args);
    try {
        std::vector<const char*> argv;
        argv.push_back("qgrav");
        for (const auto& a : argv_mut) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n" << app.help();
        return 64;
    }

    try {
        if (cmd_validate->parsed()) {
            const auto& c = validate_args;
            const auto m = report::RunManifest::make("validate", c.config_path, c.seed, c.out_dir);
            const auto cfg = load_config(c.config_path);
            for (const auto& key : cfg.unknown_keys)
                std::cerr << "warning: unknown config key: " << key << "\n";
            const auto rep = validate(cfg);
            report::write_file(out_path(c, "consistency.csv"),
                               m.as_comment_block() + rep.to_csv());
            report::write_file(out_path(c, "consistency.json"), rep.to_json());
            if (c.json_stdout)
                std::cout << rep.to_json();
            else
                std::cout << rep.to_csv();
            return 0;
        }
        if (cmd_design->parsed()) {
            const auto& c = design_args;
            const auto m = report::RunManifest::make("design", c.config_path, c.seed, c.out_dir);
            const auto cfg = load_config(c.config_path);
            const double z_eq = cfg.equilibrium_height();
            if (z_lo == 0.0) z_lo = z_eq * 0.999;
            if (z_hi == 0.0) z_hi = z_eq * 1.001;
            json j = trap_profile_json(cfg);
            j["manifest"] = manifest_json(m);
            report::write_file(out_path(c, "design.json"), j.dump(2) + "\n");
            report::write_file(out_path(c, "force_profile.csv"),
                               fz_profile_csv(cfg, z_lo, z_hi, design_points, m));
            if (c.json_stdout) std::cout << j.dump(2) << "\n";
            return 0;
        }
        if (cmd_sweep->parsed()) {
            const auto& c = sweep_args_c;
            const auto m = report::RunManifest::make("sweep", c.config_path, c.seed, c.out_dir);
            const auto cfg = load_config(c.config_path);
            inductance::SweepVariable var;
            if (sweep_variable == "qubit_radius")
                var = inductance::SweepVariable::QubitRadius;
            else if (sweep_variable == "sphere_radius")
                var = inductance::SweepVariable::SphereRadius;
            else if (sweep_variable == "system_scale")
                var = inductance::SweepVariable::SystemScale;
            else
                throw DomainError("unknown sweep variable: " + sweep_variable);
            const auto result = inductance::sweep(cfg, var, sweep_min, sweep_max, sweep_points);
            const std::string csv = sweep_csv(result, m);
            if (sweep_out.empty())
                std::cout << csv;
            else
                report::write_file(sweep_out, csv);
            std::cerr << "argmax " << sweep_variable << " = " << result.best().value << "\n";
            return 0;
        }
        if (cmd_cool->parsed()) {
            const auto& c = cool_args;
            const auto m = report::RunManifest::make("cool", c.config_path, c.seed, c.out_dir);
            const auto cfg = load_config(c.config_path);
            const auto p =
                cooling::CoolingParams::operating_point(cfg, k::two_pi * cool_lambda_hz);
            std::vector<double> grid;
            for (int i = 0; i < cool_points; ++i)
                grid.push_back(nth_min * std::pow(nth_max / nth_min,
                                                  double(i) / double(cool_points - 1)));
            const auto rows = cooling::cooling_curve(p, grid);
            report::write_file(out_path(c, "cooling_curve.csv"), cooling_csv(rows, m));
            const auto ss = cooling::steady_state_occupation(p, nth_max);
            json j;
            j["manifest"] = manifest_json(m);
            j["gamma_c"] = ss.gamma_c;
            j["gamma_cool"] = ss.gamma_cool;
            j["n0"] = ss.n0;
            j["n_full_at_nth_max"] = ss.n_full;
            report::write_file(out_path(c, "cooling.json"), j.dump(2) + "\n");
            if (c.json_stdout) std::cout << j.dump(2) << "\n";
            return 0;
        }
        if (cmd_budget->parsed()) {
            const auto& c = budget_args;
            const auto m = report::RunManifest::make("budget", c.config_path, c.seed, c.out_dir);
            const auto cfg = load_config(c.config_path);
            const auto nb = noise::full_budget(cfg);
            json j = budget_json(nb);
            j["manifest"] = manifest_json(m);
            report::write_file(out_path(c, "budget.json"), j.dump(2) + "\n");
            report::write_file(out_path(c, "budget.csv"), m.as_comment_block() + nb.to_csv());
            if (c.json_stdout) std::cout << j.dump(2) << "\n";
            return 0;
        }
        if (cmd_protocol->parsed()) {
            const auto& c = protocol_args;
            const auto m = report::RunManifest::make("protocol", c.config_path, c.seed, c.out_dir);
            const auto cfg = load_config(c.config_path);
            double fidelity = proto_fidelity;
            if (fidelity < 0.0) fidelity = noise::full_budget(cfg).fidelity;
            double g_true = proto_g_true < 0.0 ? cfg.gravity : proto_g_true;
            const auto result =
                run_protocol(cfg, proto_K, fidelity, proto_trials, c.seed, g_true, m);
            report::write_file(out_path(c, "protocol_trials.csv"), result.trials_csv);
            report::write_file(out_path(c, "protocol_summary.json"),
                               result.summary.dump(2) + "\n");
            if (c.json_stdout) std::cout << result.summary.dump(2) << "\n";
            return 0;
        }
        if (cmd_calibrate->parsed()) {
            const auto& c = calibrate_args;
            const auto m =
                report::RunManifest::make("calibrate", c.config_path, c.seed, c.out_dir);
            calibration::CalibrationRecord rec;
            std::ifstream in(calib_data);
            if (!in) throw DomainError("cannot open calibration data: " + calib_data);
            std::string line;
            while (std::getline(in, line)) {
                if (line.empty() || line[0] == '#' || line[0] == 't') continue;
                std::istringstream row(line);
                std::string cell;
                std::getline(row, cell, ',');
                rec.times.push_back(std::stod(cell));
                std::getline(row, cell, ',');
                rec.sigma_x.push_back(std::stod(cell));
                std::getline(row, cell, ',');
                rec.shots.push_back(std::stoi(cell));
            }
            const auto fit = calibration::fit_parameters(rec);
            json j;
            j["manifest"] = manifest_json(m);
            j["omega_q"] = fit.params.omega_q;
            j["omega"] = fit.params.omega;
            j["lambda"] = fit.params.lambda;
            j["lambda_sq_over_omega"] = fit.lambda_sq_over_omega;
            j["sigma"] = fit.sigma;
            j["residual_norm"] = fit.residual_norm;
            j["iterations"] = fit.iterations;
            report::write_file(out_path(c, "calibration.json"), j.dump(2) + "\n");
            std::cout << j.dump(2) << "\n";
            return 0;
        }
        if (cmd_report->parsed()) {
            const auto& c = report_args;
            const auto m = report::RunManifest::make("report", c.config_path, c.seed, c.out_dir);
            const auto cfg = load_config(c.config_path);
            ReportBundle bundle;
            bundle.consistency_csv = validate(cfg).to_csv();
            bundle.design = trap_profile_json(cfg);
            bundle.qubit_radius_sweep_csv = sweep_csv(
                inductance::sweep(cfg, inductance::SweepVariable::QubitRadius,
                                  0.2 * cfg.qubit.loop_radius, 3.0 * cfg.qubit.loop_radius, 141),
                m);
            bundle.scale_sweep_csv = sweep_csv(
                inductance::sweep(cfg, inductance::SweepVariable::SystemScale, 0.5, 10.0, 96), m);
            const auto cool_p = cooling::CoolingParams::operating_point(cfg, k::two_pi * 1e4);
            std::vector<double> grid;
            for (int i = 0; i < 46; ++i)
                grid.push_back(std::pow(10.0, 9.0 * double(i) / 45.0));
            bundle.cooling_csv = cooling_csv(cooling::cooling_curve(cool_p, grid), m);
            const auto nb = noise::full_budget(cfg);
            bundle.budget = budget_json(nb);
            const auto rows =
                estimation::wire_radius_sweep(cfg, 0.1 * cfg.ring.wire_radius,
                                              cfg.ring.wire_radius, 46);
            bundle.wire_sweep_ideal_csv = wire_sweep_ideal_csv(rows, m);
            bundle.wire_sweep_full_csv = wire_sweep_full_csv(rows, m);
            bundle.sensitivity = sensitivity_json(estimation::sensitivity(cfg, nb));
            emit_report(bundle, c.out_dir, m);
            if (c.json_stdout) std::cout << bundle.sensitivity->dump(2) << "\n";
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericsError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace qgrav::cli
