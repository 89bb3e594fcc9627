// Command-line front end: one subcommand per pipeline stage.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gsmpc/run.hpp"

namespace fs = std::filesystem;
using namespace gsmpc;

namespace {

struct Common {
    std::string scenario;
    std::string out;
    std::string fidelity;
    std::optional<long> seed;  // accepted everywhere; every subcommand here is deterministic
};

ScenarioConfig load(const Common& c) {
    if (c.scenario.empty()) return desk_scenario();
    std::string text;
    try {
        text = io::read_file(c.scenario);
    } catch (const IoError& e) {
        throw InputError(e.what());
    }
    try {
        return parse_scenario(text);
    } catch (const InputError& e) {
        throw InputError(c.scenario + ": " + e.what());
    }
}

fs::path out_dir(const Common& c, const ScenarioConfig& cfg) { return c.out.empty() ? fs::path(cfg.output_dir) : fs::path(c.out); }

Fidelity fidelity(const Common& c, Fidelity fallback) {
    if (c.fidelity.empty()) return fallback;
    return c.fidelity == "nonlinear" ? Fidelity::nonlinear : Fidelity::linear;
}

void write_json(const fs::path& p, const Json& j) { io::write_atomic(p, j.dump(2) + "\n"); }

Schedule load_schedule(const fs::path& p, const ControlSetup& s) {
    if (!fs::exists(p)) throw InputError("no schedule at " + p.string() + " (run `schedule` first or pass --schedule)");
    Json j;
    try {
        j = Json::parse(io::read_file(p));
    } catch (const Json::parse_error& e) {
        throw InputError(p.string() + ": " + e.what());
    }
    Schedule sc = schedule_from_json(j);
    if (sc.fingerprint != s.fingerprint)
        throw InputError(p.string() + " was computed for a different scenario (fingerprint " + sc.fingerprint +
                         ", scenario " + s.fingerprint + ")");
    return sc;
}

void print_schedule(const Schedule& s) {
    for (std::size_t i = 0; i < s.b.size(); ++i) {
        std::string bits;
        for (int v : s.b[i]) bits += v ? '1' : '0';
        std::printf("  b%zu = %s\n", i + 1, bits.c_str());
    }
    std::printf("  objective %.6g (%s), on-time %d\n", s.objective, to_string(s.status), s.on_time());
}

void print_report(const VerificationReport& r) {
    std::printf("%s: %s", to_string(r.fidelity), r.satisfied() ? "satisfied" : "violated");
    if (r.robustness) std::printf(", robustness %.6g", *r.robustness);
    std::printf("\n");
    for (const auto& m : r.margins) std::printf("  %-16s margin %.6g\n", m.name.c_str(), m.margin);
}

// ---------------------------------------------------------------- commands

int cmd_reduce(const Common& c) {
    const ScenarioConfig cfg = load(c);
    const fs::path dir = out_dir(c, cfg);
    Json out = Json::array();
    for (int i = 0; i < 2; ++i) {
        // The DFIG reduced here: the derive block, else the plant WTG, else defaults.
        DfigParams p;
        OperatingPoint op;
        if (cfg.wtg[i].derive) {
            p = cfg.wtg[i].params;
            op = cfg.wtg[i].op;
        } else if (cfg.plant) {
            p = cfg.plant->wtg[i].params;
            op = cfg.plant->wtg[i].op;
        }
        const Equilibrium eq = equilibrium(op, p);
        const LtiSystem full = linearize(eq, op, p);
        const ReducedWtg r = sma_reduce(full);
        const double nrms = fit_quality(full, r, cfg.milp.u_C, cfg.milp.T);
        Json w = {{"wtg", i + 1},
                  {"source", cfg.wtg[i].derive ? "derive" : cfg.plant ? "plant" : "defaults"},
                  {"operating_point", scenario_detail::op_json(op)},
                  {"equilibrium_residual", eq.residual},
                  {"A_rd", r.A_rd},
                  {"B_rd", r.B_rd},
                  {"C_rd", r.C_rd},
                  {"D_rd", r.D_rd},
                  {"lambda_r", {r.lambda_r->real(), r.lambda_r->imag()}},
                  {"fit_nrms", nrms},
                  {"warnings", r.warnings}};
        if (!cfg.wtg[i].derive) {
            const ReducedWtg& in = cfg.wtg[i].injected;
            w["in_use"] = {{"A_rd", in.A_rd}, {"B_rd", in.B_rd}, {"C_rd", in.C_rd}, {"D_rd", in.D_rd}};
        }
        std::printf("WTG%d (%s): A_rd %.6g  B_rd %.6g  C_rd %.6g  D_rd %.6g  fit %.4f\n", i + 1,
                    w["source"].get<std::string>().c_str(), r.A_rd, r.B_rd, r.C_rd, r.D_rd, nrms);
        for (const auto& m : r.warnings) std::printf("  warning: %s\n", m.c_str());
        out.push_back(w);
    }
    write_json(dir / "reduction.json", {{"version", version}, {"wtg", out}});
    return 0;
}

int cmd_schedule(const Common& c) {
    const ScenarioConfig cfg = load(c);
    const fs::path dir = out_dir(c, cfg);
    const ControlSetup s = make_setup(cfg);
    const ScheduleOutcome o = schedule(s);
    if (!o.schedule) {
        std::fprintf(stderr, "infeasible: %s\n", o.infeasibility->message.c_str());
        write_json(dir / "infeasibility.json", {{"binding_families", o.infeasibility->binding_families},
                                                {"message", o.infeasibility->message}});
        return 2;
    }
    write_json(dir / "schedule.json", to_json(*o.schedule));
    print_schedule(*o.schedule);
    return o.schedule->status == MilpStatus::optimal ? 0 : 3;
}

int cmd_simulate(const Common& c, const std::string& schedule_path, bool verify_only) {
    const ScenarioConfig cfg = load(c);
    const fs::path dir = out_dir(c, cfg);
    const ControlSetup s = make_setup(cfg);
    const Fidelity f = fidelity(c, Fidelity::linear);
    if (f == Fidelity::nonlinear && !s.plant) throw InputError("nonlinear fidelity needs a \"plant\" block in the scenario");
    const Schedule sc = load_schedule(schedule_path.empty() ? dir / "schedule.json" : fs::path(schedule_path), s);
    const ClosedLoopResult r = closed_loop(s, sc, f);
    if (!verify_only) io::write_trace_csv(r.trace, dir / (std::string("trace_") + to_string(f) + ".csv"));
    write_json(dir / (std::string("verification_") + to_string(f) + ".json"), to_json(r.report));
    print_report(r.report);
    return verify_only && !r.report.satisfied() ? 2 : 0;
}

int cmd_case(const Common& c, const std::string& name) {
    const ScenarioConfig cfg = load(c);
    const fs::path dir = c.out.empty() ? fs::path(cfg.output_dir) / name : fs::path(c.out);
    const CaseBundle b = run_case(cfg, name, dir);
    if (b.outcome.schedule) {
        print_schedule(*b.outcome.schedule);
        if (b.linear) print_report(b.linear->report);
        if (b.nonlinear) print_report(b.nonlinear->report);
    } else {
        std::printf("infeasible: %s\n", b.outcome.infeasibility->message.c_str());
    }
    std::printf("artifacts in %s\n", dir.string().c_str());
    return b.exit_code;
}

Json probes_json(const std::vector<EpsilonProbe>& ps) {
    Json a = Json::array();
    for (const auto& p : ps)
        a.push_back({{"eps", p.eps},
                     {"scheduled", p.scheduled},
                     {"robustness", optional_number(p.robustness)},
                     {"on_time", p.on_time},
                     {"success", p.success}});
    return a;
}

int cmd_calibrate(const Common& c, double eps_min, double step, int max_iter) {
    const ScenarioConfig cfg = load(c);
    const fs::path dir = out_dir(c, cfg);
    const ControlSetup s = make_setup(cfg);
    CalibrationOptions opt;
    opt.eps_min = eps_min;
    opt.step = step;
    opt.max_iter = max_iter;
    opt.fidelity = fidelity(c, s.plant ? Fidelity::nonlinear : Fidelity::linear);
    if (opt.fidelity == Fidelity::nonlinear && !s.plant)
        throw InputError("nonlinear fidelity needs a \"plant\" block in the scenario");
    Json j = {{"version", version}, {"fidelity", to_string(opt.fidelity)}, {"eps_min", eps_min}, {"step", step}};
    try {
        const Calibration cal = calibrate_epsilon(s, opt);
        j["eps"] = cal.eps;
        j["probes"] = probes_json(cal.probes);
        write_json(dir / "calibration.json", j);
        write_json(dir / "schedule.json", to_json(*cal.schedule));
        std::printf("eps = %.6g after %zu probes\n", cal.eps, cal.probes.size());
        print_schedule(*cal.schedule);
        return 0;
    } catch (const CalibrationError& e) {
        j["eps"] = nullptr;
        j["probes"] = probes_json(e.probes());
        write_json(dir / "calibration.json", j);
        throw;
    }
}

int cmd_export(const Common& c) {
    const ScenarioConfig cfg = load(c);
    const fs::path dir = out_dir(c, cfg);
    const ControlSetup s = make_setup(cfg);
    const AlignedEncoding a = encode_setup(s);
    io::write_atomic(dir / "model.lp", export_lp(a.enc.model));
    std::printf("%d variables, %d rows -> %s\n", a.enc.model.num_vars(), a.enc.model.num_constraints(),
                (dir / "model.lp").string().c_str());
    return 0;
}

int exit_code(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::input: return 4;
        case ErrorKind::solver_limit: return 3;
        case ErrorKind::spec_violation: return 2;
        default: return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Grid-support scheduling for wind turbines in a diesel/wind microgrid"};
    app.set_version_flag("--version", std::string(version));
    app.require_subcommand(1);
    app.fallthrough();

    Common c;
    app.add_option("--scenario", c.scenario, "Scenario JSON (default: built-in desk scenario)")->check(CLI::ExistingFile);
    app.add_option("--out", c.out, "Output directory (default: the scenario's output_dir)");
    app.add_option("--fidelity", c.fidelity, "Verification plant")->check(CLI::IsMember({"linear", "nonlinear"}));
    app.add_option("--seed", c.seed, "Seed for randomized runs; deterministic subcommands ignore it");

    auto* reduce = app.add_subcommand("reduce", "Equilibrium, linearization and SMA reduction of each WTG");
    auto* sched = app.add_subcommand("schedule", "Solve the scheduling MILP and write schedule.json");
    std::string schedule_path;
    auto* sim = app.add_subcommand("simulate", "Replay schedule.json on the chosen plant and write the trace");
    sim->add_option("--schedule", schedule_path, "Schedule file (default: <out>/schedule.json)");
    auto* ver = app.add_subcommand("verify", "Replay schedule.json and check limits and the formula");
    ver->add_option("--schedule", schedule_path, "Schedule file (default: <out>/schedule.json)");
    std::string case_name;
    auto* cs = app.add_subcommand("case", "Full pipeline for case1, case2, case3 or custom");
    cs->add_option("name", case_name, "Case name")->required()->check(CLI::IsMember({"case1", "case2", "case3", "custom"}));
    double eps_min = -0.05, step = 0.005;
    int max_iter = 16;
    auto* cal = app.add_subcommand("calibrate-eps", "Search the robust factor that makes the formula hold on the plant");
    cal->add_option("--eps-min", eps_min, "Most negative eps tried (Hz)")->capture_default_str();
    cal->add_option("--step", step, "Grid step (Hz)")->capture_default_str();
    cal->add_option("--max-iter", max_iter, "Probe budget")->capture_default_str();
    auto* exp = app.add_subcommand("export-lp", "Write the scheduling MILP in CPLEX LP format");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int r = app.exit(e);
        return r == 0 ? 0 : 4;
    }

    try {
        if (reduce->parsed()) return cmd_reduce(c);
        if (sched->parsed()) return cmd_schedule(c);
        if (sim->parsed()) return cmd_simulate(c, schedule_path, false);
        if (ver->parsed()) return cmd_simulate(c, schedule_path, true);
        if (cs->parsed()) return cmd_case(c, case_name);
        if (cal->parsed()) return cmd_calibrate(c, eps_min, step, max_iter);
        if (exp->parsed()) return cmd_export(c);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
