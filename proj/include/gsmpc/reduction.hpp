#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "gsmpc/dfig.hpp"
#include "gsmpc/errors.hpp"
#include "gsmpc/linalg.hpp"
#include "gsmpc/lti.hpp"

namespace gsmpc {

/// First-order WTG model: d(dw_r)/dt = A_rd dw_r + B_rd u, dP_g = C_rd dw_r + D_rd u.
struct ReducedWtg {
    double A_rd = 0, B_rd = 0, C_rd = 0, D_rd = 0;
    std::optional<std::complex<double>> lambda_r;  // empty: coefficients were given
    std::vector<std::string> warnings;

    bool given() const { return !lambda_r.has_value(); }

    void validate() const {
        for (double v : {A_rd, B_rd, C_rd, D_rd})
            if (!std::isfinite(v)) throw DomainError("reduced WTG coefficients must be finite");
        if (!(A_rd < 0)) throw DomainError("reduced WTG mode must be stable (A_rd < 0)");
    }

    static ReducedWtg injected(double a, double b, double c, double d) {
        ReducedWtg r{a, b, c, d, std::nullopt, {}};
        r.validate();
        return r;
    }

    LtiSystem as_lti() const {
        LtiSystem s;
        s.A = Matrix::Constant(1, 1, A_rd);
        s.B = Matrix::Constant(1, 1, B_rd);
        s.C = Matrix::Constant(1, 1, C_rd);
        s.D = Matrix::Constant(1, 1, D_rd);
        s.state_names = {"omega_r"};
        s.input_names = {"u_ie"};
        s.output_names = {"dP_g"};
        return s;
    }
};

/// Central-difference linearization of x' = f(x, u), y = g(x, u) about (x0, u0).
inline LtiSystem linearize_function(const std::function<Vector(const Vector&, const Vector&)>& f,
                                    const std::function<Vector(const Vector&, const Vector&)>& g,
                                    const Vector& x0, const Vector& u0, std::vector<std::string> state_names,
                                    std::vector<std::string> input_names, std::vector<std::string> output_names,
                                    FdStep step = {}) {
    LtiSystem s;
    s.A = jacobian_central([&](const Vector& x) { return f(x, u0); }, x0, step);
    s.B = jacobian_central([&](const Vector& u) { return f(x0, u); }, u0, step);
    s.C = jacobian_central([&](const Vector& x) { return g(x, u0); }, x0, step);
    s.D = jacobian_central([&](const Vector& u) { return g(x0, u); }, u0, step);
    s.state_names = std::move(state_names);
    s.input_names = std::move(input_names);
    s.output_names = std::move(output_names);
    s.validate();
    return s;
}

/// Linear model of one DFIG about an equilibrium, input u_ie, output dP_g.
inline LtiSystem linearize(const Equilibrium& eq, const OperatingPoint& op, const DfigParams& p,
                           FdStep step = {}) {
    if (!(eq.residual <= 1e-10))
        throw DomainError("linearize: equilibrium residual " + std::to_string(eq.residual) + " exceeds 1e-10");
    const double T_m = eq.alg.T_m;
    auto f = [&](const Vector& x, const Vector& u) { return dfig_rhs(x, op, p, T_m, u[0]); };
    auto g = [&](const Vector& x, const Vector& u) {
        const DfigAlgebraic a = solve_algebraic(DfigState::from_vector(x), op, p, u[0], T_m);
        return Vector(Vector::Constant(1, a.P_g - op.P_g0));
    };
    return linearize_function(f, g, eq.state.to_vector(), Vector::Constant(1, op.u_ie0), DfigState::names(),
                              {"u_ie"}, {"dP_g"}, step);
}

struct ModalAnalysis {
    Eigen::VectorXcd eigenvalues;
    Matrix participation;  // rows: states, columns: modes
};

/// Normalized participation factors |v_ki w_ik| of a diagonalizable matrix.
inline ModalAnalysis participation_factors(const Matrix& A, double condition_cap = 1e10) {
    if (A.rows() != A.cols()) throw DomainError("participation_factors: matrix must be square");
    if (!A.allFinite()) throw DomainError("participation_factors: non-finite entries");
    Eigen::EigenSolver<Matrix> es(A, true);
    if (es.info() != Eigen::Success) throw NumericalError("eigenvalue decomposition failed");
    const Eigen::MatrixXcd V = es.eigenvectors();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(V);
    const auto sv = svd.singularValues();
    const double cond = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
    if (!(cond <= condition_cap))
        throw IllConditionedModesError("eigenvector matrix condition number " + std::to_string(cond) +
                                       " exceeds " + std::to_string(condition_cap));
    const Eigen::MatrixXcd W = V.inverse();
    ModalAnalysis out;
    out.eigenvalues = es.eigenvalues();
    out.participation = (V.array() * W.transpose().array()).abs().matrix();
    for (Eigen::Index j = 0; j < out.participation.cols(); ++j) out.participation.col(j) /= out.participation.col(j).sum();
    return out;
}

namespace detail {

inline void require_invertible(const Matrix& m, const std::string& what) {
    if (m.size() == 0) return;
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto sv = svd.singularValues();
    if (!(sv(sv.size() - 1) > 1e-12 * std::max(1.0, sv(0))))
        throw TimeScaleSeparationError(what + " is singular");
}

}  // namespace detail

/// Selective modal analysis: keep `relevant_state`, fold the other states in
/// through the mode in which that state participates most.
inline ReducedWtg sma_reduce(const LtiSystem& sys, const std::string& relevant_state = "omega_r") {
    sys.validate();
    if (sys.inputs() != 1 || sys.outputs() != 1) throw DomainError("sma_reduce: expects a single-input single-output system");
    const Eigen::Index r = sys.state_index(relevant_state);
    const Eigen::Index n = sys.states();

    const ModalAnalysis modes = participation_factors(sys.A);
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < n; ++j) {
        const double pj = modes.participation(r, j), pb = modes.participation(r, best);
        const auto lj = modes.eigenvalues[j], lb = modes.eigenvalues[best];
        if (pj > pb + 1e-9) {
            best = j;
        } else if (std::abs(pj - pb) <= 1e-9) {
            if (std::abs(lj.real()) < std::abs(lb.real()) - 1e-12 ||
                (std::abs(std::abs(lj.real()) - std::abs(lb.real())) <= 1e-12 && lj.imag() > lb.imag()))
                best = j;
        }
    }
    ReducedWtg out;
    const std::complex<double> lam = modes.eigenvalues[best];
    out.lambda_r = lam;
    if (std::abs(lam.imag()) > 1e-9 * std::max(1.0, std::abs(lam.real())))
        out.warnings.push_back("dominant mode is complex (" + std::to_string(lam.real()) + " +/- " +
                               std::to_string(std::abs(lam.imag())) + "i); using its real part");
    const double lr = lam.real();

    std::vector<Eigen::Index> zi;
    for (Eigen::Index i = 0; i < n; ++i)
        if (i != r) zi.push_back(i);
    const auto m = static_cast<Eigen::Index>(zi.size());
    Matrix A12(1, m), A21(m, 1), A22(m, m), Bz(m, 1), Cz(1, m);
    for (Eigen::Index a = 0; a < m; ++a) {
        A12(0, a) = sys.A(r, zi[static_cast<std::size_t>(a)]);
        A21(a, 0) = sys.A(zi[static_cast<std::size_t>(a)], r);
        Bz(a, 0) = sys.B(zi[static_cast<std::size_t>(a)], 0);
        Cz(0, a) = sys.C(0, zi[static_cast<std::size_t>(a)]);
        for (Eigen::Index b = 0; b < m; ++b)
            A22(a, b) = sys.A(zi[static_cast<std::size_t>(a)], zi[static_cast<std::size_t>(b)]);
    }
    detail::require_invertible(A22, "A22");
    const Matrix shifted = lr * Matrix::Identity(m, m) - A22;
    detail::require_invertible(shifted, "(lambda_r I - A22)");

    if (m > 0) {
        const Matrix M1 = shifted.fullPivLu().solve(A21);
        const Matrix M2 = (-A22).fullPivLu().solve(Bz);
        out.A_rd = sys.A(r, r) + (A12 * M1)(0, 0);
        out.B_rd = sys.B(r, 0) + (A12 * M2)(0, 0);
        out.C_rd = sys.C(0, r) + (Cz * M1)(0, 0);
        out.D_rd = sys.D(0, 0) + (Cz * M2)(0, 0);
        const Eigen::VectorXcd ez = A22.eigenvalues();
        double slowest = INFINITY;
        for (Eigen::Index i = 0; i < ez.size(); ++i) slowest = std::min(slowest, std::abs(ez[i].real()));
        if (std::abs(lr) > 0.2 * slowest)
            out.warnings.push_back("weak time-scale separation: |Re lambda_r| = " + std::to_string(std::abs(lr)) +
                                   ", slowest |Re eig(A22)| = " + std::to_string(slowest));
    } else {
        out.A_rd = sys.A(r, r);
        out.B_rd = sys.B(r, 0);
        out.C_rd = sys.C(0, r);
        out.D_rd = sys.D(0, 0);
    }
    return out;
}

struct StepResponses {
    double dt = 0;
    std::vector<double> full;
    std::vector<double> reduced;
};

/// Output step responses of both models from rest, exact ZOH at dt.
inline StepResponses step_responses(const LtiSystem& full, const ReducedWtg& red, double u_step, double horizon,
                                    double dt = 1e-3) {
    const auto steps = static_cast<Eigen::Index>(std::llround(horizon / dt));
    const Matrix u = Matrix::Constant(steps, 1, u_step);
    const LtiSystem df = discretize_zoh(full, dt);
    const LtiSystem dr = discretize_zoh(red.as_lti(), dt);
    StepResponses out;
    out.dt = dt;
    out.full = simulate_linear(df, u, Vector::Zero(full.states())).channel(full.output_names[0]);
    out.reduced = simulate_linear(dr, u, Vector::Zero(1)).channel("dP_g");
    return out;
}

/// RMS difference of the two step responses divided by the peak of the full one.
inline double fit_quality(const LtiSystem& full, const ReducedWtg& red, double u_step, double horizon,
                          double dt = 1e-3) {
    const auto ev = full.A.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (!(ev[i].real() < 0)) throw DomainError("fit_quality: full system is not stable");
    if (!(red.A_rd < 0)) throw DomainError("fit_quality: reduced system is not stable");
    const StepResponses s = step_responses(full, red, u_step, horizon, dt);
    double peak = 0, sq = 0;
    for (std::size_t k = 0; k < s.full.size(); ++k) {
        peak = std::max(peak, std::abs(s.full[k]));
        const double e = s.full[k] - s.reduced[k];
        sq += e * e;
    }
    if (!(peak > 0)) throw DomainError("fit_quality: full response is identically zero");
    return std::sqrt(sq / static_cast<double>(s.full.size())) / peak;
}

}  // namespace gsmpc
