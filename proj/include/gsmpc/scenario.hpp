#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "gsmpc/afr.hpp"
#include "gsmpc/controller.hpp"
#include "gsmpc/dfig.hpp"
#include "gsmpc/errors.hpp"
#include "gsmpc/io.hpp"
#include "gsmpc/reduction.hpp"
#include "gsmpc/stl.hpp"

namespace gsmpc {

using Json = nlohmann::json;

/// Where a WTG's first-order model comes from.
struct WtgModelConfig {
    bool derive = false;  // false: injected coefficients
    ReducedWtg injected = ReducedWtg::injected(-0.2771, 2.5741, 0.2550, -2.3343);
    DfigParams params;
    OperatingPoint op;
};

struct MilpConfig {
    double t_s = 0.02;      // s
    double T = 4.0;         // s
    double dt_u = 0.1;      // s
    double dP_d = 0.7;      // MW
    double w1 = 1.0;
    double w2 = 10.0;
    double f_d_lim = 0.5;   // Hz
    double f_w_lim = 2.0;   // same unit as the speed states
    double u_C = -0.05;     // pu
    double f_c = 0.45;      // Hz
    double t_a = 1.0;       // s
    double eps = 0.0;       // Hz
};

struct SolverConfig {
    double time_limit_s = 600.0;
    long node_limit = 5'000'000;
    double gap = 0.0;
    std::string branching = "reliability";  // or "most_fractional"
};

struct PlantConfig {
    std::array<WtgPlant, 2> wtg;
    double dt = 1e-3;
    double freq_bias = 0.0;
};

struct ScenarioConfig {
    std::string name;
    DieselParams diesel;
    PowerBases bases;
    std::array<WtgModelConfig, 2> wtg;
    MilpConfig milp;
    std::string formula = "default";  // "default", "none" or formula text
    TriggerConfig trigger;
    SolverConfig solver;
    std::optional<PlantConfig> plant;
    std::string output_dir = "out";
};

namespace scenario_detail {

/// Object reader that tracks its path and rejects unknown keys.
class Obj {
public:
    Obj(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw InputError(where() + ": expected an object");
    }

    void allow(std::initializer_list<const char*> keys) const {
        std::set<std::string> ok(keys.begin(), keys.end());
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!ok.count(it.key())) throw InputError(sub(it.key()) + ": unknown key '" + it.key() + "'");
    }

    bool has(const char* k) const { return j_.contains(k); }

    Obj obj(const char* k) const { return Obj(j_.at(k), sub(k)); }

    void num(const char* k, double& out, std::function<bool(double)> ok = {}, const char* rule = "") const {
        if (!has(k)) return;
        const Json& v = j_.at(k);
        if (!v.is_number()) throw InputError(sub(k) + ": expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw InputError(sub(k) + ": must be finite");
        if (ok && !ok(d)) throw InputError(sub(k) + ": " + rule);
        out = d;
    }

    void integer(const char* k, long& out, long min) const {
        if (!has(k)) return;
        const Json& v = j_.at(k);
        if (!v.is_number_integer()) throw InputError(sub(k) + ": expected an integer");
        out = v.get<long>();
        if (out < min) throw InputError(sub(k) + ": must be at least " + std::to_string(min));
    }

    void str(const char* k, std::string& out) const {
        if (!has(k)) return;
        const Json& v = j_.at(k);
        if (!v.is_string()) throw InputError(sub(k) + ": expected a string");
        out = v.get<std::string>();
    }

    std::string sub(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
    std::string where() const { return path_.empty() ? "<root>" : path_; }

private:
    const Json& j_;
    std::string path_;
};

inline bool positive(double v) { return v > 0; }

inline DfigParams read_dfig(const Obj& o) {
    DfigParams p;
    o.allow({"R_s", "R_r", "L_ls", "L_lr", "L_m", "H_T", "omega_bar", "omega_s", "Psi_s", "omega_c", "K_P_T",
             "K_I_T", "K_P_Q", "K_I_Q", "K_P_C", "K_I_C", "eta"});
    const char* rule = "must be positive";
    o.num("R_s", p.R_s, [](double v) { return v >= 0; }, "must be non-negative");
    o.num("R_r", p.R_r, [](double v) { return v >= 0; }, "must be non-negative");
    o.num("L_ls", p.L_ls, positive, rule);
    o.num("L_lr", p.L_lr, positive, rule);
    o.num("L_m", p.L_m, positive, rule);
    o.num("H_T", p.H_T, positive, "must be positive (s)");
    o.num("omega_bar", p.omega_bar, positive, "must be positive (rad/s)");
    o.num("omega_s", p.omega_s, positive, rule);
    o.num("Psi_s", p.Psi_s, positive, rule);
    o.num("omega_c", p.omega_c, positive, "must be positive (rad/s)");
    o.num("K_P_T", p.K_P_T);
    o.num("K_I_T", p.K_I_T);
    o.num("K_P_Q", p.K_P_Q);
    o.num("K_I_Q", p.K_I_Q);
    o.num("K_P_C", p.K_P_C);
    o.num("K_I_C", p.K_I_C);
    o.num("eta", p.eta, positive, rule);
    try {
        p.validate();
    } catch (const Error& e) {
        throw InputError(o.where() + ": " + e.what());
    }
    return p;
}

inline OperatingPoint read_op(const Obj& o) {
    OperatingPoint op;
    o.allow({"v_wind", "P_g0", "Q_g0", "v_ds", "v_qs", "Q_g_star", "u_ie0"});
    o.num("v_wind", op.v_wind, positive, "must be positive (m/s)");
    o.num("P_g0", op.P_g0);
    o.num("Q_g0", op.Q_g0);
    o.num("v_ds", op.v_ds);
    o.num("v_qs", op.v_qs);
    o.num("Q_g_star", op.Q_g_star);
    o.num("u_ie0", op.u_ie0);
    try {
        op.validate();
    } catch (const Error& e) {
        throw InputError(o.where() + ": " + e.what());
    }
    return op;
}

inline WtgPlant read_plant_wtg(const Obj& o) {
    o.allow({"dfig", "operating_point"});
    WtgPlant w;
    if (o.has("dfig")) w.params = read_dfig(o.obj("dfig"));
    if (o.has("operating_point")) w.op = read_op(o.obj("operating_point"));
    return w;
}

inline WtgModelConfig read_wtg(const Obj& o) {
    WtgModelConfig w;
    std::string model;
    o.str("model", model);
    if (model == "injected") {
        o.allow({"model", "A_rd", "B_rd", "C_rd", "D_rd"});
        for (const char* k : {"A_rd", "B_rd", "C_rd", "D_rd"})
            if (!o.has(k)) throw InputError(o.sub(k) + ": required for an injected model");
        double a = 0, b = 0, c = 0, d = 0;
        o.num("A_rd", a, [](double v) { return v < 0; }, "must be negative (stable mode, 1/s)");
        o.num("B_rd", b);
        o.num("C_rd", c);
        o.num("D_rd", d);
        w.injected = ReducedWtg::injected(a, b, c, d);
    } else if (model == "derive") {
        o.allow({"model", "dfig", "operating_point"});
        w.derive = true;
        if (o.has("dfig")) w.params = read_dfig(o.obj("dfig"));
        if (o.has("operating_point")) w.op = read_op(o.obj("operating_point"));
    } else {
        throw InputError(o.sub("model") + ": expected \"injected\" or \"derive\"");
    }
    return w;
}

inline Json dfig_json(const DfigParams& p) {
    return {{"R_s", p.R_s},         {"R_r", p.R_r},     {"L_ls", p.L_ls},       {"L_lr", p.L_lr},
            {"L_m", p.L_m},         {"H_T", p.H_T},     {"omega_bar", p.omega_bar}, {"omega_s", p.omega_s},
            {"Psi_s", p.Psi_s},     {"omega_c", p.omega_c}, {"K_P_T", p.K_P_T}, {"K_I_T", p.K_I_T},
            {"K_P_Q", p.K_P_Q},     {"K_I_Q", p.K_I_Q}, {"K_P_C", p.K_P_C},     {"K_I_C", p.K_I_C},
            {"eta", p.eta}};
}

inline Json op_json(const OperatingPoint& op) {
    return {{"v_wind", op.v_wind}, {"P_g0", op.P_g0},         {"Q_g0", op.Q_g0}, {"v_ds", op.v_ds},
            {"v_qs", op.v_qs},     {"Q_g_star", op.Q_g_star}, {"u_ie0", op.u_ie0}};
}

}  // namespace scenario_detail

/// Parses a JSON scenario. Missing optional fields take the defaults of the
/// config structs; unknown keys and unit violations are rejected with their
/// path.
inline ScenarioConfig parse_scenario(std::string_view text) {
    using namespace scenario_detail;
    Json j = Json::object();
    try {
        // A blank document counts as an empty object so the error names the required fields.
        if (text.find_first_not_of(" \t\r\n") != std::string_view::npos) j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw InputError(std::string("scenario is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw InputError("scenario must be a JSON object");
    std::string missing;
    for (const char* k : {"name", "wtg1", "wtg2", "milp"})
        if (!j.contains(k)) missing += missing.empty() ? k : std::string(", ") + k;
    if (!missing.empty()) throw InputError("scenario is missing required fields: " + missing);

    const Obj root(j, "");
    root.allow({"name", "diesel", "bases", "wtg1", "wtg2", "milp", "formula", "trigger", "solver", "plant",
                "output_dir"});
    ScenarioConfig c;
    root.str("name", c.name);
    if (c.name.empty()) throw InputError("name: must be a non-empty string");

    if (root.has("diesel")) {
        const Obj o = root.obj("diesel");
        o.allow({"H_d", "tau_d", "tau_g", "R_D", "f_bar"});
        o.num("H_d", c.diesel.H_d, positive, "must be positive (s)");
        o.num("tau_d", c.diesel.tau_d, positive, "must be positive (s)");
        o.num("tau_g", c.diesel.tau_g, positive, "must be positive (s)");
        o.num("R_D", c.diesel.R_D, positive, "must be positive (pu)");
        o.num("f_bar", c.diesel.f_bar, positive, "must be positive (Hz)");
    }
    if (root.has("bases")) {
        const Obj o = root.obj("bases");
        o.allow({"S_d", "S_w1", "S_w2"});
        o.num("S_d", c.bases.S_d, positive, "must be positive (MVA)");
        o.num("S_w1", c.bases.S_w1, positive, "must be positive (MVA)");
        o.num("S_w2", c.bases.S_w2, positive, "must be positive (MVA)");
    }
    c.wtg[0] = read_wtg(root.obj("wtg1"));
    c.wtg[1] = read_wtg(root.obj("wtg2"));

    {
        const Obj o = root.obj("milp");
        o.allow({"t_s", "T", "dt_u", "dP_d", "w1", "w2", "f_d_lim", "f_w_lim", "u_C", "f_c", "t_a", "eps"});
        std::string miss;
        for (const char* k : {"t_s", "T", "dP_d", "u_C"})
            if (!o.has(k)) miss += miss.empty() ? k : std::string(", ") + k;
        if (!miss.empty()) throw InputError("milp: missing required fields: " + miss);
        auto nonneg = [](double v) { return v >= 0; };
        MilpConfig& m = c.milp;
        o.num("t_s", m.t_s, positive, "must be positive (s)");
        o.num("T", m.T, positive, "must be positive (s)");
        o.num("dt_u", m.dt_u, positive, "must be positive (s)");
        o.num("dP_d", m.dP_d);
        o.num("w1", m.w1, nonneg, "must be non-negative");
        o.num("w2", m.w2, nonneg, "must be non-negative");
        o.num("f_d_lim", m.f_d_lim, positive, "must be positive (Hz)");
        o.num("f_w_lim", m.f_w_lim, positive, "must be positive");
        o.num("u_C", m.u_C);
        o.num("f_c", m.f_c, positive, "must be positive (Hz)");
        o.num("t_a", m.t_a, nonneg, "must be non-negative (s)");
        o.num("eps", m.eps, [](double v) { return v <= 0; }, "must be <= 0 (Hz)");
        try {
            (void)integral_ratio(m.T, m.t_s, "T/t_s");
            (void)integral_ratio(m.T, m.dt_u, "T/dt_u");
            (void)integral_ratio(m.dt_u, m.t_s, "dt_u/t_s");
        } catch (const Error& e) {
            throw InputError(std::string("milp: ") + e.what());
        }
    }
    root.str("formula", c.formula);
    if (c.formula.empty()) throw InputError("formula: must not be empty (use \"none\" to drop it)");
    if (c.formula != "default" && c.formula != "none") {
        try {
            (void)stl::parse(c.formula);
        } catch (const ParseError& e) {
            throw InputError(std::string("formula: ") + e.what());
        }
    }
    if (root.has("trigger")) {
        const Obj o = root.obj("trigger");
        o.allow({"threshold", "consecutive", "channel"});
        o.num("threshold", c.trigger.threshold, positive, "must be positive (Hz)");
        long m = c.trigger.consecutive;
        o.integer("consecutive", m, 1);
        c.trigger.consecutive = static_cast<int>(m);
        o.str("channel", c.trigger.channel);
        c.trigger.validate();
    }
    if (root.has("solver")) {
        const Obj o = root.obj("solver");
        o.allow({"time_limit_s", "node_limit", "gap", "branching"});
        o.num("time_limit_s", c.solver.time_limit_s, positive, "must be positive (s)");
        o.integer("node_limit", c.solver.node_limit, 1);
        o.num("gap", c.solver.gap, [](double v) { return v >= 0; }, "must be non-negative");
        o.str("branching", c.solver.branching);
        if (c.solver.branching != "reliability" && c.solver.branching != "most_fractional")
            throw InputError("solver.branching: expected \"reliability\" or \"most_fractional\"");
    }
    if (root.has("plant")) {
        const Obj o = root.obj("plant");
        o.allow({"dt", "freq_bias", "wtg1", "wtg2"});
        PlantConfig p;
        o.num("dt", p.dt, positive, "must be positive (s)");
        o.num("freq_bias", p.freq_bias);
        if (o.has("wtg1")) p.wtg[0] = read_plant_wtg(o.obj("wtg1"));
        if (o.has("wtg2")) p.wtg[1] = read_plant_wtg(o.obj("wtg2"));
        try {
            (void)integral_ratio(c.milp.t_s, p.dt, "t_s/dt");
        } catch (const Error& e) {
            throw InputError(std::string("plant: ") + e.what());
        }
        c.plant = p;
    }
    root.str("output_dir", c.output_dir);
    return c;
}

/// The fully resolved configuration, every default spelled out.
inline Json to_json(const ScenarioConfig& c) {
    using namespace scenario_detail;
    Json j;
    j["name"] = c.name;
    j["diesel"] = {{"H_d", c.diesel.H_d},
                   {"tau_d", c.diesel.tau_d},
                   {"tau_g", c.diesel.tau_g},
                   {"R_D", c.diesel.R_D},
                   {"f_bar", c.diesel.f_bar}};
    j["bases"] = {{"S_d", c.bases.S_d}, {"S_w1", c.bases.S_w1}, {"S_w2", c.bases.S_w2}};
    for (std::size_t i = 0; i < 2; ++i) {
        const auto& w = c.wtg[i];
        Json o;
        if (w.derive) {
            o = {{"model", "derive"}, {"dfig", dfig_json(w.params)}, {"operating_point", op_json(w.op)}};
        } else {
            o = {{"model", "injected"},
                 {"A_rd", w.injected.A_rd},
                 {"B_rd", w.injected.B_rd},
                 {"C_rd", w.injected.C_rd},
                 {"D_rd", w.injected.D_rd}};
        }
        j[i == 0 ? "wtg1" : "wtg2"] = o;
    }
    const MilpConfig& m = c.milp;
    j["milp"] = {{"t_s", m.t_s},         {"T", m.T},     {"dt_u", m.dt_u}, {"dP_d", m.dP_d},
                 {"w1", m.w1},           {"w2", m.w2},   {"f_d_lim", m.f_d_lim}, {"f_w_lim", m.f_w_lim},
                 {"u_C", m.u_C},         {"f_c", m.f_c}, {"t_a", m.t_a},   {"eps", m.eps}};
    j["formula"] = c.formula;
    j["trigger"] = {{"threshold", c.trigger.threshold},
                    {"consecutive", c.trigger.consecutive},
                    {"channel", c.trigger.channel}};
    j["solver"] = {{"time_limit_s", c.solver.time_limit_s},
                   {"node_limit", c.solver.node_limit},
                   {"gap", c.solver.gap},
                   {"branching", c.solver.branching}};
    if (c.plant) {
        Json p = {{"dt", c.plant->dt}, {"freq_bias", c.plant->freq_bias}};
        for (std::size_t i = 0; i < 2; ++i)
            p[i == 0 ? "wtg1" : "wtg2"] = {{"dfig", dfig_json(c.plant->wtg[i].params)},
                                           {"operating_point", op_json(c.plant->wtg[i].op)}};
        j["plant"] = p;
    }
    j["output_dir"] = c.output_dir;
    return j;
}

/// FNV-1a of the canonical resolved configuration.
inline std::string fingerprint(const ScenarioConfig& c) { return io::hex64(io::fnv1a(to_json(c).dump())); }

/// First-order WTG model of a scenario entry (reduces the DFIG when asked to).
inline ReducedWtg wtg_model(const WtgModelConfig& w) {
    if (!w.derive) return w.injected;
    const Equilibrium eq = equilibrium(w.op, w.params);
    return sma_reduce(linearize(eq, w.op, w.params));
}

/// The formula a scenario asks for, untightened; null when removed.
inline stl::FormulaPtr scenario_formula(const ScenarioConfig& c) {
    if (c.formula == "none") return nullptr;
    if (c.formula == "default") return stl::recovery_spec("x1", c.milp.f_c, c.milp.t_a);
    return stl::parse(c.formula);
}

inline ControlSetup make_setup(const ScenarioConfig& c) {
    ControlSetup s;
    s.afr = assemble_afr(c.diesel, wtg_model(c.wtg[0]), wtg_model(c.wtg[1]), c.bases);
    MpcProblem& p = s.problem;
    p.afr = discretize_afr(s.afr, c.milp.t_s);
    p.horizon = c.milp.T;
    p.block = c.milp.dt_u;
    p.dP_d = c.milp.dP_d;
    p.u_C = c.milp.u_C;
    p.w1 = c.milp.w1;
    p.w2 = c.milp.w2;
    p.f_d_lim = c.milp.f_d_lim;
    p.f_w_lim = c.milp.f_w_lim;
    s.phi = scenario_formula(c);
    s.eps = c.milp.eps;
    s.trigger = c.trigger;
    s.milp.time_limit_s = c.solver.time_limit_s;
    s.milp.node_limit = c.solver.node_limit;
    s.milp.gap = c.solver.gap;
    s.milp.branching = c.solver.branching == "most_fractional" ? BranchRule::most_fractional : BranchRule::reliability;
    if (c.plant) {
        NonlinearPlant np;
        np.wtg = c.plant->wtg;
        np.dt = c.plant->dt;
        s.plant = np;
        s.freq_bias = c.plant->freq_bias;
    }
    s.fingerprint = fingerprint(c);
    return s;
}

/// The desk-scale scenario used when no file is given: the reference case on a
/// 0.05 s grid with 0.2 s control intervals, plant WTGs at P_g0 = 0.7 pu.
inline ScenarioConfig desk_scenario() {
    ScenarioConfig c;
    c.name = "desk";
    c.milp.t_s = 0.05;
    c.milp.dt_u = 0.2;
    PlantConfig p;
    for (auto& w : p.wtg) w.op.P_g0 = 0.7;
    c.plant = p;
    c.output_dir = "out/desk";
    return c;
}

/// Case overrides: case1 drops the formula, case2 schedules with eps = 0 and
/// case3 with eps = -0.015 Hz; custom leaves the scenario as written.
inline ScenarioConfig apply_case(ScenarioConfig c, const std::string& name) {
    if (name == "case1") c.formula = "none";
    else if (name == "case2") c.milp.eps = 0.0;
    else if (name == "case3") c.milp.eps = -0.015;
    else if (name != "custom") throw InputError("unknown case '" + name + "' (case1, case2, case3, custom)");
    if ((name == "case2" || name == "case3") && c.formula == "none") c.formula = "default";
    return c;
}

}  // namespace gsmpc
