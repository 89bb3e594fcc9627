#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "gsmpc/errors.hpp"
#include "gsmpc/linalg.hpp"
#include "gsmpc/lti.hpp"
#include "gsmpc/reduction.hpp"

namespace gsmpc {

struct DieselParams {
    double H_d = 4.0;     // s
    double tau_d = 0.1;   // s
    double tau_g = 0.5;   // s
    double R_D = 0.05;    // pu
    double f_bar = 60.0;  // Hz

    void validate() const {
        for (double v : {H_d, tau_d, tau_g, R_D, f_bar})
            if (!(v > 0) || !std::isfinite(v)) throw DomainError("diesel parameters must be positive and finite");
    }
};

/// Power bases in MVA.
struct PowerBases {
    double S_d = 5.0;
    double S_w1 = 1.11;
    double S_w2 = 1.11;

    double k_d() const { return 1.0 / S_d; }
    double k_dw1() const { return S_w1 / S_d; }
    double k_dw2() const { return S_w2 / S_d; }

    void validate() const {
        for (double v : {S_d, S_w1, S_w2})
            if (!(v > 0) || !std::isfinite(v)) throw DomainError("power bases must be positive and finite");
    }
};

/// Augmented frequency response model.
///
/// States x1..x5 are [dw_d (Hz), dP_m, dP_v, dw_r1, dw_r2] (pu), controls are
/// [u_s1, u_s2] and outputs [dP_g1, dP_g2] on the WTG bases. The disturbance
/// enters through its own column `Bd`; its input is the load step in MW, so
/// the column already carries k_d = 1/S_d.
struct AfrModel {
    LtiSystem sys;
    Vector Bd;
    DieselParams diesel;
    PowerBases bases;

    static const std::vector<std::string>& state_names() {
        static const std::vector<std::string> n{"x1", "x2", "x3", "x4", "x5"};
        return n;
    }

    /// Same model with the disturbance as a third input column named "d".
    LtiSystem with_disturbance_input() const {
        LtiSystem s = sys;
        s.B.conservativeResize(Eigen::NoChange, 3);
        s.B.col(2) = Bd;
        s.D.conservativeResize(Eigen::NoChange, 3);
        s.D.col(2).setZero();
        s.input_names.push_back("d");
        return s;
    }
};

inline AfrModel assemble_afr(const DieselParams& dg, const ReducedWtg& w1, const ReducedWtg& w2,
                             const PowerBases& bases) {
    dg.validate();
    bases.validate();
    w1.validate();
    w2.validate();
    const double g = dg.f_bar / (2.0 * dg.H_d);
    AfrModel m;
    m.diesel = dg;
    m.bases = bases;
    Matrix A = Matrix::Zero(5, 5);
    Matrix B = Matrix::Zero(5, 2);
    A(0, 1) = g;
    A(0, 3) = g * bases.k_dw1() * w1.C_rd;
    A(0, 4) = g * bases.k_dw2() * w2.C_rd;
    B(0, 0) = g * bases.k_dw1() * w1.D_rd;
    B(0, 1) = g * bases.k_dw2() * w2.D_rd;
    A(1, 1) = -1.0 / dg.tau_d;
    A(1, 2) = 1.0 / dg.tau_d;
    A(2, 2) = -1.0 / dg.tau_g;
    A(2, 0) = -1.0 / (dg.f_bar * dg.R_D * dg.tau_g);
    A(3, 3) = w1.A_rd;
    B(3, 0) = w1.B_rd;
    A(4, 4) = w2.A_rd;
    B(4, 1) = w2.B_rd;
    m.Bd = Vector::Zero(5);
    m.Bd[0] = -g * bases.k_d();

    Matrix C = Matrix::Zero(2, 5);
    Matrix D = Matrix::Zero(2, 2);
    C(0, 3) = w1.C_rd;
    D(0, 0) = w1.D_rd;
    C(1, 4) = w2.C_rd;
    D(1, 1) = w2.D_rd;
    m.sys = LtiSystem{A, B, C, D, AfrModel::state_names(), {"u_s1", "u_s2"}, {"dP_g1", "dP_g2"}, std::nullopt};
    m.sys.validate();
    return m;
}

/// ZOH-discretized AFR: x(k+1) = A_d x(k) + B_d1 u(k) + B_d2 dP_d.
struct DiscreteAfr {
    LtiSystem sys;  // discrete, inputs u_s1, u_s2
    Vector Bd;      // discrete disturbance column (per MW)
};

inline DiscreteAfr discretize_afr(const AfrModel& m, double t_s) {
    const LtiSystem d = discretize_zoh(m.with_disturbance_input(), t_s);
    DiscreteAfr out;
    out.sys = m.sys;
    out.sys.A = d.A;
    out.sys.B = d.B.leftCols(2);
    out.sys.sample_time = t_s;
    out.Bd = d.B.col(2);
    return out;
}

/// Linear recursion with per-step controls `u` (steps x 2) and per-step
/// disturbance `d` in MW. Returns steps + 1 samples.
inline Trace simulate_afr(const DiscreteAfr& m, const Matrix& u, const Vector& d, const Vector& x0) {
    if (u.rows() != d.size())
        throw DomainError("simulate_afr: control has " + std::to_string(u.rows()) + " steps, disturbance has " +
                          std::to_string(d.size()));
    if (u.cols() != 2) throw DomainError("simulate_afr: control must have two columns");
    LtiSystem s = m.sys;
    s.B.conservativeResize(Eigen::NoChange, 3);
    s.B.col(2) = m.Bd;
    s.D.conservativeResize(Eigen::NoChange, 3);
    s.D.col(2).setZero();
    s.input_names.push_back("d");
    Matrix ud(u.rows(), 3);
    ud.leftCols(2) = u;
    ud.col(2) = d;
    return simulate_linear(s, ud, x0);
}

/// Open-loop response to a held load step of dP_d MW over `steps` samples.
inline Trace uncontrolled_response(const DiscreteAfr& m, double dP_d, Eigen::Index steps) {
    return simulate_afr(m, Matrix::Zero(steps, 2), Vector::Constant(steps, dP_d), Vector::Zero(5));
}

}  // namespace gsmpc
