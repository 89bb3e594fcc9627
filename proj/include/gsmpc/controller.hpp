#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gsmpc/afr.hpp"
#include "gsmpc/dfig.hpp"
#include "gsmpc/encode.hpp"
#include "gsmpc/errors.hpp"
#include "gsmpc/milp_solver.hpp"
#include "gsmpc/stl.hpp"
#include "gsmpc/trace.hpp"

namespace gsmpc {

// ------------------------------------------------------------------ trigger

struct TriggerConfig {
    double threshold = 0.1;  // |df| in Hz
    int consecutive = 2;     // samples in a row above the threshold
    std::string channel = "x1";

    void validate() const {
        if (!(threshold > 0) || !std::isfinite(threshold)) throw InputError("trigger threshold must be positive");
        if (consecutive < 1) throw InputError("trigger needs at least one consecutive sample");
        if (channel.empty()) throw InputError("trigger channel name is empty");
    }
};

/// Streaming debounced threshold detector.
class TriggerDetector {
public:
    explicit TriggerDetector(TriggerConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

    /// Feeds the next sample; returns true on the sample at which the trigger fires.
    bool push(double v) {
        if (fired_) {
            ++k_;
            return false;
        }
        run_ = std::abs(v) >= cfg_.threshold ? run_ + 1 : 0;
        if (run_ >= cfg_.consecutive) {
            fired_ = true;
            index_ = k_;
        }
        ++k_;
        return fired_ && index_ == k_ - 1;
    }

    std::optional<std::size_t> index() const { return fired_ ? std::optional<std::size_t>(index_) : std::nullopt; }

private:
    TriggerConfig cfg_;
    std::size_t k_ = 0, index_ = 0;
    int run_ = 0;
    bool fired_ = false;
};

/// First index at which |v| >= threshold has held for `consecutive` samples.
inline std::optional<std::size_t> detect_trigger(const std::vector<double>& samples, const TriggerConfig& cfg) {
    TriggerDetector d(cfg);
    for (double v : samples)
        if (d.push(v)) break;
    return d.index();
}

// ----------------------------------------------------------------- schedule

struct Schedule {
    double t_s = 0;
    double block = 0;     // control interval (s)
    double u_C = 0;
    double t_offset = 0;  // scheduled time at which the design contingency trips the trigger
    std::vector<std::vector<int>> b;
    double objective = 0;
    MilpStatus status = MilpStatus::optimal;
    double gap = 0;
    std::string fingerprint;

    void validate() const {
        if (b.empty()) throw DomainError("schedule has no WTG sequences");
        for (const auto& bi : b) {
            if (bi.size() != b.front().size()) throw DomainError("schedule sequences differ in length");
            for (int v : bi)
                if (v != 0 && v != 1) throw DomainError("schedule entries must be 0 or 1");
        }
        if (!(t_s > 0) || !(block > 0)) throw DomainError("schedule sample time and block must be positive");
    }

    int on_time() const {
        int s = 0;
        for (const auto& bi : b) s += control_effort(bi);
        return s;
    }
};

/// Everything the two control levels need for one scenario.
struct WtgPlant {
    DfigParams params;
    OperatingPoint op;
};

struct NonlinearPlant {
    std::array<WtgPlant, 2> wtg;
    double dt = 1e-3;  // RK4 step (s)
};

struct ControlSetup {
    AfrModel afr;          // continuous prediction model
    MpcProblem problem;    // discretized model, limits and weights; `phi` is filled per solve
    stl::FormulaPtr phi;   // untightened specification, null when removed
    double eps = 0.0;      // robust factor applied to phi for scheduling
    TriggerConfig trigger;
    MilpOptions milp;
    std::optional<NonlinearPlant> plant;
    double freq_bias = 0.0;  // measurement bias (Hz) along the contingency direction
    std::string fingerprint;

    stl::FormulaPtr scheduled_formula() const { return phi ? stl::tighten(phi, eps) : nullptr; }
};

/// Model-predicted trigger instant of the design contingency, as a sample index.
inline std::optional<std::size_t> predicted_trigger(const MpcProblem& p, const TriggerConfig& trig) {
    const int N = integral_ratio(p.horizon, p.t_s(), "T/t_s");
    const Trace tr = uncontrolled_response(p.afr, p.dP_d, N);
    return detect_trigger(tr.channel(trig.channel), trig);
}

struct AlignedEncoding {
    MpcEncoding enc;
    double t_offset = 0;
    std::optional<std::size_t> trigger_index;
};

/// Encodes the MILP with the formula tightened by eps and with blocks that
/// start before the predicted trigger held at zero.
inline AlignedEncoding encode_setup(const ControlSetup& s) {
    s.trigger.validate();
    MpcProblem p = s.problem;
    p.phi = s.scheduled_formula();
    AlignedEncoding out;
    out.trigger_index = predicted_trigger(p, s.trigger);
    out.t_offset = out.trigger_index ? static_cast<double>(*out.trigger_index) * p.t_s() : 0.0;
    p.freeze_until = out.t_offset;
    out.enc = encode_mpc(p);
    return out;
}

struct InfeasibilityReport {
    std::vector<std::string> binding_families;  // families whose removal alone restores feasibility
    std::string message;
};

struct ScheduleOutcome {
    std::optional<Schedule> schedule;
    std::optional<InfeasibilityReport> infeasibility;
    MilpSolution solution;
    double heuristic_objective = std::numeric_limits<double>::infinity();
    int variables = 0, rows = 0, binaries = 0;
    std::optional<std::size_t> trigger_index;
};

namespace controller_detail {

/// Incumbent from switching every free interval on; the remaining binaries
/// (start-up and formula indicators) are searched with a short budget.
inline std::optional<std::vector<double>> all_on_incumbent(const MpcEncoding& e, const MilpOptions& base) {
    MilpModel h = e.model;
    for (const auto& bi : e.b)
        for (std::size_t j = 0; j < bi.size(); ++j)
            if (static_cast<int>(j) >= e.frozen_blocks) h.set_bounds(bi[j], 1, 1);
    MilpOptions o = base;
    o.time_limit_s = std::min(base.time_limit_s / 4, 30.0);
    o.node_limit = std::min<long>(base.node_limit, 5000);
    o.progress = nullptr;
    const MilpSolution s = solve_milp(h, o);
    if (!s.has_incumbent()) return std::nullopt;
    return s.x;
}

/// Feasibility of a relaxed problem; empty when the probe runs out of budget.
inline std::optional<bool> feasible(const MpcProblem& p, const MilpOptions& base) {
    MilpOptions o = base;
    o.gap = 1e9;  // stop at the first incumbent
    o.time_limit_s = std::min(base.time_limit_s, 60.0);
    o.progress = nullptr;
    const MilpSolution s = solve_milp(encode_mpc(p).model, o);
    if (s.status == MilpStatus::limit && !s.has_incumbent()) return std::nullopt;
    return s.has_incumbent();
}

inline InfeasibilityReport diagnose(const ControlSetup& s, double freeze_until, const MilpOptions& opt) {
    MpcProblem base = s.problem;
    base.phi = s.scheduled_formula();
    base.freeze_until = freeze_until;
    std::vector<std::pair<std::string, MpcProblem>> probes;
    if (base.phi) {
        MpcProblem p = base;
        p.phi = nullptr;
        probes.emplace_back("stl", p);
    }
    {
        MpcProblem p = base;
        p.f_d_lim = std::numeric_limits<double>::infinity();
        probes.emplace_back("freq_limit", p);
    }
    {
        MpcProblem p = base;
        p.f_w_lim = std::numeric_limits<double>::infinity();
        probes.emplace_back("speed_limit", p);
    }
    if (freeze_until > 0) {
        MpcProblem p = base;
        p.freeze_until = 0;
        probes.emplace_back("trigger_alignment", p);
    }
    InfeasibilityReport r;
    std::vector<std::string> unknown;
    for (const auto& [family, p] : probes) {
        const auto f = feasible(p, opt);
        if (!f) unknown.push_back(family);
        else if (*f) r.binding_families.push_back(family);
    }
    if (r.binding_families.empty()) {
        r.message = "infeasible; no single constraint family is responsible";
        for (const auto& f : unknown) r.message += (&f == &unknown.front() ? " (undecided: " : ", ") + f;
        if (!unknown.empty()) r.message += ")";
    } else {
        r.message = "infeasible; dropping any of these families restores feasibility:";
        for (const auto& f : r.binding_families) r.message += " " + f;
    }
    return r;
}

}  // namespace controller_detail

/// Scheduling level: encode, solve and extract the Boolean schedule.
///
/// Throws SolverLimitError when the solver stops without any incumbent. An
/// infeasible model yields an outcome without a schedule and with a report
/// naming the constraint families that make it infeasible.
inline ScheduleOutcome schedule(const ControlSetup& s, bool diagnose_infeasibility = true) {
    const AlignedEncoding a = encode_setup(s);
    const MpcEncoding& e = a.enc;
    ScheduleOutcome out;
    out.variables = e.model.num_vars();
    out.rows = e.model.num_constraints();
    out.binaries = e.model.num_binaries();
    out.trigger_index = a.trigger_index;

    const auto t0 = std::chrono::steady_clock::now();
    const auto start = controller_detail::all_on_incumbent(e, s.milp);
    MilpOptions opt = s.milp;
    opt.time_limit_s = std::max(
        0.0, s.milp.time_limit_s - std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    if (start) out.heuristic_objective = e.model.objective_value(*start);
    out.solution = solve_milp(e.model, opt, start ? &*start : nullptr);
    const MilpSolution& sol = out.solution;

    if (sol.status == MilpStatus::infeasible) {
        out.infeasibility = diagnose_infeasibility ? controller_detail::diagnose(s, a.t_offset, s.milp)
                                                   : InfeasibilityReport{{}, "infeasible"};
        return out;
    }
    if (sol.status == MilpStatus::unbounded) throw NumericalError("scheduling MILP is unbounded");
    if (!sol.has_incumbent()) throw SolverLimitError("solver limit reached without a feasible schedule");

    Schedule sc;
    sc.t_s = s.problem.t_s();
    sc.block = s.problem.block;
    sc.u_C = s.problem.u_C;
    sc.t_offset = a.t_offset;
    sc.b = extract_schedule(e, sol.x);
    sc.objective = sol.objective;
    sc.status = sol.status;
    sc.gap = sol.status == MilpStatus::optimal ? 0.0 : sol.gap;
    sc.fingerprint = s.fingerprint;
    sc.validate();
    out.schedule = std::move(sc);
    return out;
}

// ---------------------------------------------------------------- alignment

/// Scheduled input of WTG i at plant time t, for a trigger at t_trigger
/// (none: the trigger has not fired and the input is zero).
inline double scheduled_input(const Schedule& s, std::size_t i, double t, std::optional<double> t_trigger) {
    if (!t_trigger || t < *t_trigger - 1e-12) return 0.0;
    const double idx = std::floor((t - *t_trigger + s.t_offset) / s.block + 1e-9);
    if (idx < 0 || idx >= static_cast<double>(s.b.at(i).size())) return 0.0;
    return s.b[i][static_cast<std::size_t>(idx)] * s.u_C;
}

/// Inputs (steps x WTGs) on a plant grid of spacing dt for a trigger at sample
/// `trigger_index` of that grid.
inline Matrix apply_schedule(const Schedule& s, std::size_t trigger_index, double dt, std::size_t steps) {
    s.validate();
    Matrix u = Matrix::Zero(static_cast<Eigen::Index>(steps), static_cast<Eigen::Index>(s.b.size()));
    const double t_trig = static_cast<double>(trigger_index) * dt;
    for (std::size_t k = 0; k < steps; ++k)
        for (std::size_t i = 0; i < s.b.size(); ++i)
            u(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) =
                scheduled_input(s, i, static_cast<double>(k) * dt, t_trig);
    return u;
}

// --------------------------------------------------------------- closed loop

enum class Fidelity { linear, nonlinear };

inline const char* to_string(Fidelity f) { return f == Fidelity::linear ? "linear" : "nonlinear"; }

struct ConstraintMargin {
    std::string name;
    double margin = 0;  // worst-case slack; negative means violated
};

struct VerificationReport {
    Fidelity fidelity = Fidelity::linear;
    std::optional<std::size_t> trigger_index;
    std::vector<ConstraintMargin> margins;
    std::optional<double> robustness;            // untightened formula
    std::optional<double> robustness_tightened;  // formula used for scheduling
    bool limits_satisfied = true;
    bool phi_satisfied = true;

    bool satisfied() const { return limits_satisfied && phi_satisfied; }
};

struct ClosedLoopResult {
    Trace trace;
    VerificationReport report;
};

namespace controller_detail {

inline double bias_offset(const ControlSetup& s) {
    // A load increase pulls the frequency down, so the bias deepens the dip.
    return s.problem.dP_d >= 0 ? -s.freq_bias : s.freq_bias;
}

inline VerificationReport verify(const ControlSetup& s, const Trace& tr, Fidelity f,
                                 std::optional<std::size_t> trig) {
    VerificationReport r;
    r.fidelity = f;
    r.trigger_index = trig;
    auto margin = [&](const std::string& ch, double lim) {
        double m = std::numeric_limits<double>::infinity();
        const auto& v = tr.channel(ch);
        for (std::size_t k = 1; k < v.size(); ++k) m = std::min(m, lim - std::abs(v[k]));
        return m;
    };
    if (std::isfinite(s.problem.f_d_lim)) r.margins.push_back({"freq_limit", margin("x1", s.problem.f_d_lim)});
    if (std::isfinite(s.problem.f_w_lim))
        r.margins.push_back({"speed_limit", std::min(margin("x4", s.problem.f_w_lim), margin("x5", s.problem.f_w_lim))});
    for (const auto& m : r.margins) r.limits_satisfied = r.limits_satisfied && m.margin >= 0;
    if (s.phi) {
        r.robustness = stl::robustness(s.phi, tr);
        r.robustness_tightened = stl::robustness(s.scheduled_formula(), tr);
        r.phi_satisfied = *r.robustness >= 0;
    }
    return r;
}

inline Trace linear_loop(const ControlSetup& s, const Schedule& sc, std::optional<std::size_t>& trig) {
    const MpcProblem& p = s.problem;
    const double t_s = p.t_s();
    const int N = integral_ratio(p.horizon, t_s, "T/t_s");
    const auto& sys = p.afr.sys;
    const double bias = bias_offset(s);
    TriggerDetector det(s.trigger);
    std::vector<std::vector<double>> cols(11);
    Vector x = p.x0;
    std::optional<double> t_trig;
    for (int k = 0; k <= N; ++k) {
        const double t = k * t_s;
        const double meas = x[0] + bias;
        if (det.push(meas)) t_trig = t;
        // The final sample holds the last input, as the encoding does.
        Vector u(2);
        if (k == N && N > 0) u << cols[7].back(), cols[8].back();
        else
            for (std::size_t i = 0; i < 2; ++i) u[static_cast<Eigen::Index>(i)] = scheduled_input(sc, i, t, t_trig);
        const Vector y = sys.C * x + sys.D * u;
        cols[0].push_back(meas);
        for (int i = 1; i < 5; ++i) cols[static_cast<std::size_t>(i)].push_back(x[i]);
        cols[5].push_back(y[0]);
        cols[6].push_back(y[1]);
        cols[7].push_back(u[0]);
        cols[8].push_back(u[1]);
        cols[9].push_back(p.dP_d);
        cols[10].push_back(t_trig ? 1.0 : 0.0);
        if (k < N) x = sys.A * x + sys.B * u + p.afr.Bd * p.dP_d;
    }
    trig = det.index();
    Trace tr(t_s);
    const char* names[] = {"x1", "x2", "x3", "x4", "x5", "dP_g1", "dP_g2", "u_s1", "u_s2", "dP_d", "triggered"};
    for (std::size_t i = 0; i < cols.size(); ++i) tr.add_channel(names[i], std::move(cols[i]));
    return tr;
}

/// Diesel frequency model driven by two full DFIG models. The DFIGs see a
/// stiff terminal voltage, so their only coupling to the diesel is through
/// the injected power dP_g = P_g - P_g0 (WTG base).
inline Trace nonlinear_loop(const ControlSetup& s, const Schedule& sc, std::optional<std::size_t>& trig) {
    if (!s.plant) throw DomainError("nonlinear fidelity needs plant parameters");
    const NonlinearPlant& plant = *s.plant;
    const MpcProblem& p = s.problem;
    const DieselParams& dg = s.afr.diesel;
    const PowerBases& bs = s.afr.bases;
    const double t_s = p.t_s();
    const int N = integral_ratio(p.horizon, t_s, "T/t_s");
    const int sub = integral_ratio(t_s, plant.dt, "t_s/dt");
    const double dt = t_s / sub;

    std::array<Equilibrium, 2> eq;
    for (std::size_t i = 0; i < 2; ++i) eq[i] = equilibrium(plant.wtg[i].op, plant.wtg[i].params);

    constexpr int nd = 3, nw = DfigState::size, n = nd + 2 * nw;
    Vector x = Vector::Zero(n);
    x.head(nd) = p.x0.head(nd);
    for (std::size_t i = 0; i < 2; ++i) x.segment(nd + static_cast<Eigen::Index>(i) * nw, nw) = eq[i].state.to_vector();

    const double g = dg.f_bar / (2.0 * dg.H_d);
    const double kw[2] = {bs.k_dw1(), bs.k_dw2()};
    double dPg[2] = {0, 0};
    auto rhs = [&](const Vector& z, const double u[2], double t) -> Vector {
        Vector d(n);
        double pg[2];
        for (std::size_t i = 0; i < 2; ++i) {
            const auto off = nd + static_cast<Eigen::Index>(i) * nw;
            const DfigState st = DfigState::from_vector(z.segment(off, nw));
            DfigAlgebraic al;
            try {
                al = solve_algebraic(st, plant.wtg[i].op, plant.wtg[i].params, u[i], eq[i].alg.T_m);
            } catch (const NumericalError& e) {
                throw SimulationError(e.what(), t);
            }
            pg[i] = al.P_g - plant.wtg[i].op.P_g0;
            d.segment(off, nw) = dfig_rhs(st, al, plant.wtg[i].op, plant.wtg[i].params, u[i]);
        }
        d[0] = g * (z[1] + kw[0] * pg[0] + kw[1] * pg[1] - bs.k_d() * p.dP_d);
        d[1] = (z[2] - z[1]) / dg.tau_d;
        d[2] = (-z[0] / (dg.f_bar * dg.R_D) - z[2]) / dg.tau_g;
        dPg[0] = pg[0];
        dPg[1] = pg[1];
        return d;
    };

    const double bias = bias_offset(s);
    TriggerDetector det(s.trigger);
    std::optional<double> t_trig;
    std::vector<std::vector<double>> cols(11);
    for (int k = 0; k <= N; ++k) {
        const double tk = k * t_s;
        const double meas = x[0] + bias;
        if (det.push(meas)) t_trig = tk;
        double u0[2] = {scheduled_input(sc, 0, tk, t_trig), scheduled_input(sc, 1, tk, t_trig)};
        rhs(x, u0, tk);  // refresh dP_g at the sample
        cols[0].push_back(meas);
        cols[1].push_back(x[1]);
        cols[2].push_back(x[2]);
        cols[3].push_back(x[nd + 4] - eq[0].state.omega_r);
        cols[4].push_back(x[nd + nw + 4] - eq[1].state.omega_r);
        cols[5].push_back(dPg[0]);
        cols[6].push_back(dPg[1]);
        cols[7].push_back(u0[0]);
        cols[8].push_back(u0[1]);
        cols[9].push_back(p.dP_d);
        cols[10].push_back(t_trig ? 1.0 : 0.0);
        if (k == N) break;
        for (int j = 0; j < sub; ++j) {
            const double t = tk + j * dt;
            const double u[2] = {scheduled_input(sc, 0, t, t_trig), scheduled_input(sc, 1, t, t_trig)};
            const Vector k1 = rhs(x, u, t);
            const Vector k2 = rhs(x + 0.5 * dt * k1, u, t);
            const Vector k3 = rhs(x + 0.5 * dt * k2, u, t);
            const Vector k4 = rhs(x + dt * k3, u, t);
            x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (!x.allFinite()) throw SimulationError("non-finite closed-loop state", t + dt);
        }
    }
    trig = det.index();
    Trace tr(t_s);
    const char* names[] = {"x1", "x2", "x3", "x4", "x5", "dP_g1", "dP_g2", "u_s1", "u_s2", "dP_d", "triggered"};
    for (std::size_t i = 0; i < cols.size(); ++i) tr.add_channel(names[i], std::move(cols[i]));
    return tr;
}

}  // namespace controller_detail

/// Triggering level plus plant: the contingency hits at t = 0, the detector
/// watches the (biased) frequency measurement and the schedule is replayed
/// from the trigger on. The trace covers the scheduling horizon on the t_s
/// grid.
inline ClosedLoopResult closed_loop(const ControlSetup& s, const Schedule& sc, Fidelity f) {
    sc.validate();
    std::optional<std::size_t> trig;
    Trace tr = f == Fidelity::linear ? controller_detail::linear_loop(s, sc, trig)
                                     : controller_detail::nonlinear_loop(s, sc, trig);
    VerificationReport r = controller_detail::verify(s, tr, f, trig);
    return {std::move(tr), std::move(r)};
}

/// An all-zero schedule on the problem's grid.
inline Schedule idle_schedule(const ControlSetup& s) {
    Schedule sc;
    sc.t_s = s.problem.t_s();
    sc.block = s.problem.block;
    sc.u_C = s.problem.u_C;
    const int nb = integral_ratio(s.problem.horizon, s.problem.block, "T/dt_u");
    sc.b.assign(2, std::vector<int>(static_cast<std::size_t>(nb), 0));
    sc.fingerprint = s.fingerprint;
    return sc;
}

// -------------------------------------------------------------- calibration

struct EpsilonProbe {
    double eps = 0;
    bool scheduled = false;  // MILP returned a schedule
    std::optional<double> robustness;
    int on_time = 0;
    bool success = false;
};

struct Calibration {
    double eps = 0;
    std::optional<Schedule> schedule;
    std::vector<EpsilonProbe> probes;  // in probe order
};

class CalibrationError : public Error {
public:
    CalibrationError(const std::string& what, EpsilonProbe best, std::vector<EpsilonProbe> probes)
        : Error(ErrorKind::spec_violation, what), best_(best), probes_(std::move(probes)) {}
    const EpsilonProbe& best_probe() const noexcept { return best_; }
    const std::vector<EpsilonProbe>& probes() const noexcept { return probes_; }

private:
    EpsilonProbe best_;
    std::vector<EpsilonProbe> probes_;
};

struct CalibrationOptions {
    double eps_min = -0.05;
    double step = 0.005;
    int max_iter = 16;  // probes, counting the two end points
    Fidelity fidelity = Fidelity::nonlinear;
};

/// Largest eps on the grid {0, -step, ..., eps_min} whose schedule makes the
/// untightened formula hold on the verification plant. Bisection assumes that
/// schedulability and success are both monotone in eps; when the tightest
/// schedulable point fails, grid points towards zero are tried in turn before
/// bisecting. Every probe is reported.
inline Calibration calibrate_epsilon(const ControlSetup& base, const CalibrationOptions& opt = {}) {
    if (!base.phi) throw InputError("calibrate-eps needs a formula");
    if (!(opt.eps_min <= 0) || !(opt.step > 0)) throw InputError("calibrate-eps: need eps_min <= 0 < step");
    const int n = static_cast<int>(std::floor(-opt.eps_min / opt.step + 1e-9));
    Calibration cal;
    std::map<int, std::pair<EpsilonProbe, std::optional<Schedule>>> seen;
    auto probe = [&](int i) -> bool {
        if (auto it = seen.find(i); it != seen.end()) return it->second.first.success;
        ControlSetup s = base;
        s.eps = -i * opt.step;
        EpsilonProbe pr;
        pr.eps = s.eps;
        std::optional<Schedule> sc;
        const ScheduleOutcome o = schedule(s, false);
        if (o.schedule) {
            pr.scheduled = true;
            pr.on_time = o.schedule->on_time();
            const ClosedLoopResult cl = closed_loop(s, *o.schedule, opt.fidelity);
            pr.robustness = cl.report.robustness;
            pr.success = cl.report.phi_satisfied;
            sc = o.schedule;
        }
        cal.probes.push_back(pr);
        seen[i] = {pr, sc};
        return pr.success;
    };
    auto best_probe = [&] {
        EpsilonProbe best;
        best.robustness = -std::numeric_limits<double>::infinity();
        for (const auto& p : cal.probes)
            if (p.robustness && *p.robustness > *best.robustness) best = p;
        return best;
    };

    auto fail = [&] {
        throw CalibrationError("no eps in range satisfies the specification", best_probe(), cal.probes);
    };
    if (probe(0)) {
        cal.eps = 0.0;
        cal.schedule = seen[0].second;
        return cal;
    }
    if (!seen[0].first.scheduled) fail();
    int iter = 1;
    // Tightening can make the MILP infeasible: first find the tightest grid
    // point that still yields a schedule, then bisect on success below it.
    int lo = 0, hi = n;
    probe(n);
    ++iter;
    if (!seen[n].first.scheduled) {
        while (hi - lo > 1 && iter < opt.max_iter) {
            const int mid = (lo + hi) / 2;
            probe(mid);
            ++iter;
            if (seen[mid].first.scheduled) lo = mid;
            else hi = mid;
        }
        hi = lo;
    }
    // Success need not be monotone near the infeasible end; walk back towards
    // zero until some probe succeeds.
    int good = -1;
    for (int i = hi; i > 0 && iter <= opt.max_iter; --i) {
        if (!seen.count(i)) ++iter;
        if (probe(i)) {
            good = i;
            break;
        }
    }
    if (good < 0) fail();
    int bad = 0;
    while (good - bad > 1 && iter < opt.max_iter) {
        const int mid = (good + bad) / 2;
        if (probe(mid)) good = mid;
        else bad = mid;
        ++iter;
    }
    cal.eps = -good * opt.step;
    cal.schedule = seen[good].second;
    return cal;
}

}  // namespace gsmpc
