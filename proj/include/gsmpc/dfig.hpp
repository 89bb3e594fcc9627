#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "gsmpc/errors.hpp"
#include "gsmpc/linalg.hpp"
#include "gsmpc/trace.hpp"

namespace gsmpc {

/// Machine, converter-control and base parameters of one DFIG wind turbine.
/// Everything is per unit on the machine base unless noted.
struct DfigParams {
    double R_s = 0.023;
    double R_r = 0.016;
    double L_ls = 0.18;
    double L_lr = 0.16;
    double L_m = 2.9;
    double H_T = 4.0;                                  // s
    double omega_bar = 2.0 * std::numbers::pi * 60.0;  // rad/s
    double omega_s = 1.0;
    double Psi_s = 1.0;
    double omega_c = 2.0;  // rad/s
    double K_P_T = 8.0;
    double K_I_T = 0.3;
    double K_P_Q = 1.0;
    double K_I_Q = 5.0;
    double K_P_C = 0.3;
    double K_I_C = 8.0;
    double eta = 1.0 / 1.11;  // machine base over turbine base

    double L_s() const { return L_ls + L_m; }
    double L_r() const { return L_lr + L_m; }
    double sigmaL_r() const { return L_r() - L_m * L_m / L_s(); }

    void validate() const {
        const std::array<std::pair<const char*, double>, 17> all{{{"R_s", R_s},
                                                                  {"R_r", R_r},
                                                                  {"L_ls", L_ls},
                                                                  {"L_lr", L_lr},
                                                                  {"L_m", L_m},
                                                                  {"H_T", H_T},
                                                                  {"omega_bar", omega_bar},
                                                                  {"omega_s", omega_s},
                                                                  {"Psi_s", Psi_s},
                                                                  {"omega_c", omega_c},
                                                                  {"K_P_T", K_P_T},
                                                                  {"K_I_T", K_I_T},
                                                                  {"K_P_Q", K_P_Q},
                                                                  {"K_I_Q", K_I_Q},
                                                                  {"K_P_C", K_P_C},
                                                                  {"K_I_C", K_I_C},
                                                                  {"eta", eta}}};
        for (const auto& [name, v] : all)
            if (!std::isfinite(v)) throw DomainError(std::string("DFIG parameter ") + name + " is not finite");
        if (!(L_ls > 0 && L_lr > 0 && L_m > 0)) throw DomainError("DFIG inductances must be positive");
        if (!(sigmaL_r() > 0)) throw DegenerateMachineError("sigmaL_r must be positive");
        if (!(H_T > 0)) throw DomainError("H_T must be positive");
        if (!(eta > 0)) throw DomainError("eta must be positive");
        if (!(omega_bar > 0)) throw DomainError("omega_bar must be positive");
        if (!(Psi_s > 0)) throw DomainError("Psi_s must be positive");
    }
};

/// ODE state in the fixed order used for linearization.
struct DfigState {
    double psi_qs = 0, psi_ds = 0, psi_qr = 0, psi_dr = 0;
    double omega_r = 1, omega_f_star = 1;
    double x1 = 0, x2 = 0, x3 = 0, x4 = 0;

    static constexpr int size = 10;

    static const std::vector<std::string>& names() {
        static const std::vector<std::string> n{"psi_qs", "psi_ds",       "psi_qr", "psi_dr", "omega_r",
                                                "omega_f_star", "x1", "x2",     "x3",     "x4"};
        return n;
    }

    Vector to_vector() const {
        Vector v(size);
        v << psi_qs, psi_ds, psi_qr, psi_dr, omega_r, omega_f_star, x1, x2, x3, x4;
        return v;
    }

    static DfigState from_vector(const Vector& v) {
        if (v.size() != size) throw DomainError("DfigState: expected 10 entries");
        return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9]};
    }
};

struct DfigAlgebraic {
    double i_qs = 0, i_ds = 0, i_qr = 0, i_dr = 0;
    double v_qr = 0, v_dr = 0;
    double P_g = 0, Q_g = 0;
    double i_qr_star = 0, i_dr_star = 0;
    double T_e = 0;
    double T_m = 0;
};

struct OperatingPoint {
    double v_wind = 10.0;  // m/s, informational under the constant-torque model
    double P_g0 = 0.8;
    double Q_g0 = 0.0;
    double v_ds = 0.0;
    double v_qs = 1.0;
    double Q_g_star = 0.0;
    double u_ie0 = 0.0;

    void validate() const {
        if (!(v_qs * v_qs + v_ds * v_ds > 0)) throw DomainError("terminal voltage must be nonzero");
        for (double v : {v_wind, P_g0, Q_g0, v_ds, v_qs, Q_g_star, u_ie0})
            if (!std::isfinite(v)) throw DomainError("operating point contains a non-finite value");
    }
};

/// Polynomial MPPT speed reference, clamped to its validity band [0.8, 1.2].
inline double mppt_speed(double p_scaled) {
    if (!std::isfinite(p_scaled)) throw DomainError("mppt_speed: non-finite power");
    const double raw = -0.67 * p_scaled * p_scaled + 1.42 * p_scaled + 0.51;
    return std::clamp(raw, 0.8, 1.2);
}

/// Motor-convention torque; negative while generating.
inline double electromagnetic_torque(const DfigState& x, const DfigAlgebraic& a, const DfigParams& p) {
    if (!(p.L_s() > 0)) throw DomainError("electromagnetic_torque: L_s must be positive");
    return p.L_m / p.L_s() * (x.psi_qs * a.i_dr - x.psi_ds * a.i_qr);
}

namespace detail {

inline Eigen::Matrix4d flux_current_matrix(const DfigParams& p) {
    Eigen::Matrix4d m;
    const double Ls = p.L_s(), Lr = p.L_r(), Lm = p.L_m;
    m << Ls, 0, Lm, 0,  //
        0, Ls, 0, Lm,   //
        Lm, 0, Lr, 0,   //
        0, Lm, 0, Lr;
    return m;
}

}  // namespace detail

/// Closes the algebraic loop at a given ODE state.
///
/// Order: currents from fluxes, i_qr* from the torque loop, then i_dr* and Q_g
/// together (i_dr* feeds v_dr which feeds Q_g, a scalar linear loop solved in
/// closed form), then v_qr, v_dr, P_g and torque. T_m is passed through.
inline DfigAlgebraic solve_algebraic(const DfigState& x, const OperatingPoint& op, const DfigParams& p,
                                     double u_ie = 0.0, double T_m = 0.0) {
    const double Ls = p.L_s(), Lm = p.L_m;
    const double det_block = p.L_s() * p.L_r() - Lm * Lm;
    if (!(std::abs(det_block) > 1e-12 * p.L_s() * p.L_r())) throw DegenerateMachineError("L_s L_r = L_m^2");
    // The 4x4 system decouples into two identical 2x2 blocks (q and d axes).
    const double inv = 1.0 / det_block;
    DfigAlgebraic a;
    a.i_qs = inv * (p.L_r() * x.psi_qs - Lm * x.psi_qr);
    a.i_qr = inv * (-Lm * x.psi_qs + Ls * x.psi_qr);
    a.i_ds = inv * (p.L_r() * x.psi_ds - Lm * x.psi_dr);
    a.i_dr = inv * (-Lm * x.psi_ds + Ls * x.psi_dr);

    const double slip = p.omega_s - x.omega_r;
    const double sLr = p.sigmaL_r();
    a.i_qr_star = -Ls / (Lm * p.Psi_s) * (x.x1 + p.K_P_T * (x.omega_f_star - x.omega_r + u_ie));
    a.v_qr = x.x3 + p.K_P_C * (a.i_qr_star - a.i_qr) + slip * (sLr * a.i_dr + p.Psi_s * Lm / Ls);

    // Q_g = c0 + c1 * i_dr*
    const double vdr_free = x.x4 - p.K_P_C * a.i_dr - slip * sLr * a.i_qr;
    const double c0 = -(op.v_qs * a.i_ds - op.v_ds * a.i_qs + a.v_qr * a.i_dr - vdr_free * a.i_qr);
    const double c1 = p.K_P_C * a.i_qr;
    const double den = 1.0 + p.K_P_Q * c1;
    if (std::abs(den) < 1e-12) throw DegenerateMachineError("reactive-power loop gain makes the algebraic loop singular");
    a.i_dr_star = (x.x2 + p.K_P_Q * (op.Q_g_star - c0)) / den;
    a.v_dr = vdr_free + p.K_P_C * a.i_dr_star;

    a.P_g = -(op.v_qs * a.i_qs + op.v_ds * a.i_ds + a.v_qr * a.i_qr + a.v_dr * a.i_dr);
    a.Q_g = -(op.v_qs * a.i_ds - op.v_ds * a.i_qs + a.v_qr * a.i_dr - a.v_dr * a.i_qr);
    a.T_e = electromagnetic_torque(x, a, p);
    a.T_m = T_m;
    return a;
}

/// Residuals of the algebraic equations (flux-current, powers, rotor voltages,
/// references) at a candidate solution. Used by tests and sanity checks.
inline Vector algebraic_residuals(const DfigState& x, const DfigAlgebraic& a, const OperatingPoint& op,
                                  const DfigParams& p, double u_ie = 0.0) {
    const double Ls = p.L_s(), Lr = p.L_r(), Lm = p.L_m;
    const double slip = p.omega_s - x.omega_r;
    const double sLr = p.sigmaL_r();
    Vector r(10);
    r[0] = x.psi_qs - (Ls * a.i_qs + Lm * a.i_qr);
    r[1] = x.psi_ds - (Ls * a.i_ds + Lm * a.i_dr);
    r[2] = x.psi_qr - (Lr * a.i_qr + Lm * a.i_qs);
    r[3] = x.psi_dr - (Lr * a.i_dr + Lm * a.i_ds);
    r[4] = a.P_g + (op.v_qs * a.i_qs + op.v_ds * a.i_ds) + (a.v_qr * a.i_qr + a.v_dr * a.i_dr);
    r[5] = a.Q_g + (op.v_qs * a.i_ds - op.v_ds * a.i_qs) + (a.v_qr * a.i_dr - a.v_dr * a.i_qr);
    r[6] = -a.v_qr + x.x3 + p.K_P_C * (a.i_qr_star - a.i_qr) + slip * (sLr * a.i_dr + p.Psi_s * Lm / Ls);
    r[7] = -a.v_dr + x.x4 + p.K_P_C * (a.i_dr_star - a.i_dr) - slip * sLr * a.i_qr;
    r[8] = a.i_qr_star + Ls / (Lm * p.Psi_s) * (x.x1 + p.K_P_T * (x.omega_f_star - x.omega_r + u_ie));
    r[9] = a.i_dr_star - (x.x2 + p.K_P_Q * (op.Q_g_star - a.Q_g));
    return r;
}

/// ODE right-hand side with the algebraic loop closed.
///
/// The swing equation uses d(omega_r)/dt = (T_m + T_e) / (2 H_T): T_e is in
/// motor convention (negative when generating) and T_m is the positive
/// turbine torque, so the balance is a sum.
inline Vector dfig_rhs(const DfigState& x, const DfigAlgebraic& a, const OperatingPoint& op,
                       const DfigParams& p, double u_ie) {
    const double wb = p.omega_bar;
    const double slip = p.omega_s - x.omega_r;
    Vector d(DfigState::size);
    d[0] = wb * (op.v_qs - p.R_s * a.i_qs - p.omega_s * x.psi_ds);
    d[1] = wb * (op.v_ds - p.R_s * a.i_ds + p.omega_s * x.psi_qs);
    d[2] = wb * (a.v_qr - p.R_r * a.i_qr - slip * x.psi_dr);
    d[3] = wb * (a.v_dr - p.R_r * a.i_dr + slip * x.psi_qr);
    d[4] = (a.T_m + a.T_e) / (2.0 * p.H_T);
    d[5] = p.omega_c * (mppt_speed(p.eta * a.P_g) - x.omega_f_star);
    d[6] = p.K_I_T * (x.omega_f_star - x.omega_r + u_ie);
    d[7] = p.K_I_Q * (op.Q_g_star - a.Q_g);
    d[8] = p.K_I_C * (a.i_qr_star - a.i_qr);
    d[9] = p.K_I_C * (a.i_dr_star - a.i_dr);
    return d;
}

inline Vector dfig_rhs(const Vector& xv, const OperatingPoint& op, const DfigParams& p, double T_m,
                       double u_ie) {
    const DfigState x = DfigState::from_vector(xv);
    return dfig_rhs(x, solve_algebraic(x, op, p, u_ie, T_m), op, p, u_ie);
}

struct Equilibrium {
    DfigState state;
    DfigAlgebraic alg;  // alg.T_m is the constant mechanical torque
    double residual = 0;
    int iterations = 0;
};

struct EquilibriumOptions {
    int max_iterations = 50;
    double tolerance = 1e-12;
};

/// Steady state at the operating point: Newton on the ten ODE residuals plus
/// P_g = P_g0, with the mechanical torque as the eleventh unknown.
inline Equilibrium equilibrium(const OperatingPoint& op, const DfigParams& p, EquilibriumOptions opt = {}) {
    p.validate();
    op.validate();
    const double Ls = p.L_s(), Lr = p.L_r(), Lm = p.L_m;
    const double vv = op.v_qs * op.v_qs + op.v_ds * op.v_ds;

    // Analytic starting point: lossless stator, stator currents carrying the
    // scheduled powers, controllers at rest.
    DfigState g;
    g.psi_qs = -op.v_ds / p.omega_s;
    g.psi_ds = op.v_qs / p.omega_s;
    const double i_qs = (-op.P_g0 * op.v_qs + op.Q_g_star * op.v_ds) / vv;
    const double i_ds = (-op.Q_g_star * op.v_qs - op.P_g0 * op.v_ds) / vv;
    const double i_qr = (g.psi_qs - Ls * i_qs) / Lm;
    const double i_dr = (g.psi_ds - Ls * i_ds) / Lm;
    g.psi_qr = Lm * i_qs + Lr * i_qr;
    g.psi_dr = Lm * i_ds + Lr * i_dr;
    g.omega_r = g.omega_f_star = mppt_speed(p.eta * op.P_g0);
    const double slip = p.omega_s - g.omega_r;
    g.x1 = -Lm * p.Psi_s * i_qr / Ls;
    g.x2 = i_dr;
    g.x3 = (p.R_r * i_qr + slip * g.psi_dr) - slip * (p.sigmaL_r() * i_dr + p.Psi_s * Lm / Ls);
    g.x4 = (p.R_r * i_dr - slip * g.psi_qr) + slip * p.sigmaL_r() * i_qr;
    const double T_e0 = Lm / Ls * (g.psi_qs * i_dr - g.psi_ds * i_qr);

    Vector z(11);
    z.head(10) = g.to_vector();
    z[10] = -T_e0;

    auto F = [&](const Vector& zz) -> Vector {
        const DfigState s = DfigState::from_vector(zz.head(10));
        const DfigAlgebraic a = solve_algebraic(s, op, p, op.u_ie0, zz[10]);
        Vector r(11);
        r.head(10) = dfig_rhs(s, a, op, p, op.u_ie0);
        // Scale the fast flux rows back to per-unit voltage so that all rows are
        // comparable in Newton's norm.
        r.head(4) /= p.omega_bar;
        r[10] = a.P_g - op.P_g0;
        return r;
    };

    Vector r = F(z);
    double res = r.cwiseAbs().maxCoeff();
    int it = 0;
    for (; it < opt.max_iterations && !(res <= opt.tolerance); ++it) {
        const Matrix J = jacobian_central(F, z);
        const Vector step = J.fullPivLu().solve(-r);
        if (!step.allFinite()) throw NoEquilibriumError("singular Newton Jacobian", res);
        double alpha = 1.0;
        Vector zn = z + step;
        Vector rn = F(zn);
        while (!(rn.cwiseAbs().maxCoeff() < res) && alpha > 1e-4) {
            alpha *= 0.5;
            zn = z + alpha * step;
            rn = F(zn);
        }
        z = zn;
        r = rn;
        const double prev = res;
        res = r.cwiseAbs().maxCoeff();
        if (!std::isfinite(res)) throw NoEquilibriumError("Newton diverged", prev);
        if (!(res < prev) && res > opt.tolerance) {
            // Stagnation at roundoff level is acceptable; anything else fails.
            if (res > 1e-10) throw NoEquilibriumError("Newton stagnated", res);
            break;
        }
    }
    if (!(res <= 1e-10)) throw NoEquilibriumError("Newton did not converge", res);

    Equilibrium e;
    e.state = DfigState::from_vector(z.head(10));
    e.alg = solve_algebraic(e.state, op, p, op.u_ie0, z[10]);
    e.residual = dfig_rhs(e.state, e.alg, op, p, op.u_ie0).cwiseAbs().maxCoeff();
    e.iterations = it;
    return e;
}

/// Input signal as a function of time; sampled once per integration step.
using Signal = std::function<double(double)>;

inline Signal constant_signal(double value) {
    return [value](double) { return value; };
}

inline Signal step_signal(double t_step, double value) {
    return [t_step, value](double t) { return t >= t_step ? value : 0.0; };
}

/// One classical RK4 step; u_ie is held over the step (zero-order hold).
inline Vector dfig_rk4_step(const Vector& x, const OperatingPoint& op, const DfigParams& p, double T_m,
                            double u_ie, double dt) {
    const Vector k1 = dfig_rhs(x, op, p, T_m, u_ie);
    const Vector k2 = dfig_rhs(x + 0.5 * dt * k1, op, p, T_m, u_ie);
    const Vector k3 = dfig_rhs(x + 0.5 * dt * k2, op, p, T_m, u_ie);
    const Vector k4 = dfig_rhs(x + dt * k3, op, p, T_m, u_ie);
    return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Fixed-step simulation. The trace holds every state plus P_g, Q_g, T_e,
/// dP_g = P_g - P_g0 and the applied u_ie, sampled every dt.
inline Trace simulate_dfig(const DfigState& x0, const OperatingPoint& op, const DfigParams& p, double T_m,
                           const Signal& u_ie, double duration, double dt) {
    p.validate();
    op.validate();
    if (!(dt > 0)) throw DomainError("simulate_dfig: dt must be positive");
    if (!(duration >= dt)) throw DomainError("simulate_dfig: duration must be at least dt");
    const auto steps = static_cast<std::size_t>(std::llround(duration / dt));

    std::vector<std::vector<double>> cols(DfigState::size + 5);
    for (auto& c : cols) c.reserve(steps + 1);
    Vector x = x0.to_vector();
    for (std::size_t k = 0;; ++k) {
        const double t = static_cast<double>(k) * dt;
        const double u = u_ie(t);
        const DfigState s = DfigState::from_vector(x);
        DfigAlgebraic a;
        try {
            a = solve_algebraic(s, op, p, u, T_m);
        } catch (const NumericalError& e) {
            throw SimulationError(e.what(), t);
        }
        if (!x.allFinite() || !std::isfinite(a.P_g)) throw SimulationError("non-finite DFIG state", t);
        if (s.omega_r < 0.5 || s.omega_r > 1.5) throw SimulationError("rotor speed left [0.5, 1.5] pu", t);
        for (int i = 0; i < DfigState::size; ++i) cols[static_cast<std::size_t>(i)].push_back(x[i]);
        cols[10].push_back(a.P_g);
        cols[11].push_back(a.Q_g);
        cols[12].push_back(a.T_e);
        cols[13].push_back(a.P_g - op.P_g0);
        cols[14].push_back(u);
        if (k == steps) break;
        x = dfig_rk4_step(x, op, p, T_m, u, dt);
    }
    Trace tr(dt);
    for (int i = 0; i < DfigState::size; ++i)
        tr.add_channel(DfigState::names()[static_cast<std::size_t>(i)], std::move(cols[static_cast<std::size_t>(i)]));
    tr.add_channel("P_g", std::move(cols[10]));
    tr.add_channel("Q_g", std::move(cols[11]));
    tr.add_channel("T_e", std::move(cols[12]));
    tr.add_channel("dP_g", std::move(cols[13]));
    tr.add_channel("u_ie", std::move(cols[14]));
    return tr;
}

}  // namespace gsmpc
