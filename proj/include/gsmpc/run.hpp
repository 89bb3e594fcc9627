#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "gsmpc/controller.hpp"
#include "gsmpc/io.hpp"
#include "gsmpc/milp_model.hpp"
#include "gsmpc/scenario.hpp"

#ifndef GSMPC_VERSION
#define GSMPC_VERSION "0.1.0"
#endif

namespace gsmpc {

inline constexpr const char* version = GSMPC_VERSION;

inline Json to_json(const Schedule& s) {
    Json b = Json::array();
    for (const auto& bi : s.b) b.push_back(bi);
    return {{"t_s", s.t_s},
            {"dt_u", s.block},
            {"u_C", s.u_C},
            {"t_offset", s.t_offset},
            {"b", b},
            {"objective", s.objective},
            {"status", to_string(s.status)},
            {"gap", s.gap},
            {"fingerprint", s.fingerprint}};
}

inline Schedule schedule_from_json(const Json& j) {
    try {
        Schedule s;
        s.t_s = j.at("t_s").get<double>();
        s.block = j.at("dt_u").get<double>();
        s.u_C = j.at("u_C").get<double>();
        s.t_offset = j.at("t_offset").get<double>();
        s.b = j.at("b").get<std::vector<std::vector<int>>>();
        s.objective = j.at("objective").get<double>();
        const auto st = j.at("status").get<std::string>();
        s.status = st == "optimal" ? MilpStatus::optimal : MilpStatus::limit;
        s.gap = j.at("gap").get<double>();
        s.fingerprint = j.at("fingerprint").get<std::string>();
        s.validate();
        return s;
    } catch (const Json::exception& e) {
        throw InputError(std::string("schedule file: ") + e.what());
    } catch (const DomainError& e) {
        throw InputError(std::string("schedule file: ") + e.what());
    }
}

inline Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline Json to_json(const VerificationReport& r) {
    Json m = Json::object();
    for (const auto& c : r.margins) m[c.name] = c.margin;
    return {{"fidelity", to_string(r.fidelity)},
            {"trigger_index", r.trigger_index ? Json(*r.trigger_index) : Json(nullptr)},
            {"margins", m},
            {"robustness", optional_number(r.robustness)},
            {"robustness_tightened", optional_number(r.robustness_tightened)},
            {"limits_satisfied", r.limits_satisfied},
            {"phi_satisfied", r.phi_satisfied},
            {"verdict", r.satisfied() ? "satisfied" : "violated"}};
}

/// Solver statistics that do not depend on timing.
inline Json solver_json(const ScheduleOutcome& o) {
    const MilpSolution& s = o.solution;
    Json j = {{"status", to_string(s.status)},
              {"nodes", s.nodes},
              {"lp_iterations", s.lp_iterations},
              {"strong_branches", s.strong_branches},
              {"root_bound", s.root_bound},
              {"variables", o.variables},
              {"rows", o.rows},
              {"binaries", o.binaries}};
    if (s.has_incumbent()) j["objective"] = s.objective;
    if (std::isfinite(o.heuristic_objective)) j["heuristic_objective"] = o.heuristic_objective;
    return j;
}

inline Json schedule_summary(const Schedule& s) {
    Json w = Json::array();
    for (const auto& bi : s.b) w.push_back({{"on_time", control_effort(bi)}, {"startups", startup_count(bi)}});
    return {{"objective", s.objective}, {"on_time", s.on_time()}, {"per_wtg", w}};
}

struct CaseBundle {
    ScenarioConfig config;
    ScheduleOutcome outcome;
    std::optional<ClosedLoopResult> linear, nonlinear;
    Json report;
    int exit_code = 0;  // 0 ok, 2 verdict violated, 3 solver limit
};

/// schedule -> closed loop (linear) -> closed loop (nonlinear, when the
/// scenario has plant parameters) -> report. Writes schedule.json,
/// trace_linear.csv, trace_nonlinear.csv, report.json and model.lp into
/// `out_dir` (each only when its content exists).
inline CaseBundle run_case(const ScenarioConfig& base, const std::string& case_name,
                           const std::filesystem::path& out_dir) {
    CaseBundle b;
    b.config = apply_case(base, case_name);
    const ControlSetup setup = make_setup(b.config);

    io::write_atomic(out_dir / "model.lp", export_lp(encode_setup(setup).enc.model));
    b.outcome = schedule(setup);

    Json rep;
    rep["version"] = version;
    rep["case"] = case_name;
    rep["scenario"] = to_json(b.config);
    rep["fingerprint"] = setup.fingerprint;
    rep["solver"] = solver_json(b.outcome);
    rep["predicted_trigger_index"] =
        b.outcome.trigger_index ? Json(*b.outcome.trigger_index) : Json(nullptr);

    if (!b.outcome.schedule) {
        rep["infeasibility"] = {{"binding_families", b.outcome.infeasibility->binding_families},
                                {"message", b.outcome.infeasibility->message}};
        rep["verdict"] = "infeasible";
        b.exit_code = 2;
        b.report = rep;
        io::write_atomic(out_dir / "report.json", rep.dump(2) + "\n");
        return b;
    }
    const Schedule& sc = *b.outcome.schedule;
    io::write_atomic(out_dir / "schedule.json", to_json(sc).dump(2) + "\n");
    rep["schedule"] = schedule_summary(sc);

    b.linear = closed_loop(setup, sc, Fidelity::linear);
    io::write_trace_csv(b.linear->trace, out_dir / "trace_linear.csv");
    rep["verification"]["linear"] = to_json(b.linear->report);
    bool ok = b.linear->report.satisfied();
    if (setup.plant) {
        b.nonlinear = closed_loop(setup, sc, Fidelity::nonlinear);
        io::write_trace_csv(b.nonlinear->trace, out_dir / "trace_nonlinear.csv");
        rep["verification"]["nonlinear"] = to_json(b.nonlinear->report);
        ok = ok && b.nonlinear->report.satisfied();
    }
    rep["verdict"] = ok ? "satisfied" : "violated";
    b.exit_code = sc.status != MilpStatus::optimal ? 3 : ok ? 0 : 2;
    b.report = rep;
    io::write_atomic(out_dir / "report.json", rep.dump(2) + "\n");
    return b;
}

}  // namespace gsmpc
