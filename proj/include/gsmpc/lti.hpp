#pragma once

#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gsmpc/errors.hpp"
#include "gsmpc/linalg.hpp"
#include "gsmpc/trace.hpp"

namespace gsmpc {

/// State-space model x' = Ax + Bu, y = Cx + Du (continuous) or
/// x(k+1) = Ax(k) + Bu(k), y(k) = Cx(k) + Du(k) (discrete, with sample time).
struct LtiSystem {
    Matrix A;
    Matrix B;
    Matrix C;
    Matrix D;
    std::vector<std::string> state_names;
    std::vector<std::string> input_names;
    std::vector<std::string> output_names;
    std::optional<double> sample_time;  // empty: continuous time

    Eigen::Index states() const { return A.rows(); }
    Eigen::Index inputs() const { return B.cols(); }
    Eigen::Index outputs() const { return C.rows(); }
    bool is_discrete() const { return sample_time.has_value(); }

    Eigen::Index state_index(const std::string& name) const {
        for (std::size_t i = 0; i < state_names.size(); ++i)
            if (state_names[i] == name) return static_cast<Eigen::Index>(i);
        throw InputError("unknown state '" + name + "'");
    }

    void validate() const {
        const auto n = A.rows();
        if (A.cols() != n) throw DomainError("LtiSystem: A must be square");
        if (B.rows() != n) throw DomainError("LtiSystem: B row count must match A");
        if (C.cols() != n) throw DomainError("LtiSystem: C column count must match A");
        if (D.rows() != C.rows() || D.cols() != B.cols())
            throw DomainError("LtiSystem: D must be outputs x inputs");
        auto check_labels = [](const std::vector<std::string>& labels, Eigen::Index expected,
                               const char* what) {
            if (static_cast<Eigen::Index>(labels.size()) != expected)
                throw DomainError(std::string("LtiSystem: wrong number of ") + what + " labels");
            std::set<std::string> unique(labels.begin(), labels.end());
            if (unique.size() != labels.size())
                throw DomainError(std::string("LtiSystem: duplicate ") + what + " label");
        };
        check_labels(state_names, n, "state");
        check_labels(input_names, B.cols(), "input");
        check_labels(output_names, C.rows(), "output");
        if (sample_time && !(*sample_time > 0.0))
            throw DomainError("LtiSystem: discrete systems need a positive sample time");
    }
};

/// Exact zero-order-hold discretization via the augmented-matrix exponential
/// exp([[A, B], [0, 0]] t_s) = [[A_d, B_d], [0, I]].
inline LtiSystem discretize_zoh(const LtiSystem& sys, double t_s) {
    sys.validate();
    if (sys.is_discrete()) throw DomainError("discretize_zoh: system is already discrete");
    if (!(t_s > 0.0) || !std::isfinite(t_s)) throw DomainError("discretize_zoh: t_s must be positive");
    if (!sys.A.allFinite() || !sys.B.allFinite())
        throw DomainError("discretize_zoh: non-finite matrix entries");
    const auto n = sys.states();
    const auto m = sys.inputs();
    Matrix aug = Matrix::Zero(n + m, n + m);
    aug.topLeftCorner(n, n) = sys.A * t_s;
    aug.topRightCorner(n, m) = sys.B * t_s;
    const Matrix e = expm(aug);
    LtiSystem out = sys;
    out.A = e.topLeftCorner(n, n);
    out.B = e.topRightCorner(n, m);
    out.sample_time = t_s;
    return out;
}

/// Runs the discrete recursion. `u` holds one row per step (steps x inputs) and
/// the trace has steps + 1 samples: states x(0..N) and outputs evaluated with the
/// input of the same step (the last input is held for the final sample).
inline Trace simulate_linear(const LtiSystem& dsys, const Matrix& u, const Vector& x0) {
    dsys.validate();
    if (!dsys.is_discrete()) throw DomainError("simulate_linear: system must be discrete");
    if (u.cols() != dsys.inputs())
        throw DomainError("simulate_linear: input matrix has " + std::to_string(u.cols()) +
                          " columns, system has " + std::to_string(dsys.inputs()) + " inputs");
    if (x0.size() != dsys.states()) throw DomainError("simulate_linear: x0 length mismatch");
    const auto steps = u.rows();
    const auto n = dsys.states();
    const auto p = dsys.outputs();

    std::vector<std::vector<double>> xs(static_cast<std::size_t>(n)), ys(static_cast<std::size_t>(p));
    for (auto& c : xs) c.reserve(static_cast<std::size_t>(steps + 1));
    for (auto& c : ys) c.reserve(static_cast<std::size_t>(steps + 1));

    Vector x = x0;
    for (Eigen::Index k = 0; k <= steps; ++k) {
        const Vector uk = steps == 0 ? Vector(Vector::Zero(dsys.inputs()))
                                     : Vector(u.row(std::min(k, steps - 1)).transpose());
        const Vector y = dsys.C * x + dsys.D * uk;
        for (Eigen::Index i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)].push_back(x[i]);
        for (Eigen::Index i = 0; i < p; ++i) ys[static_cast<std::size_t>(i)].push_back(y[i]);
        if (k < steps) x = dsys.A * x + dsys.B * uk;
    }
    Trace tr(*dsys.sample_time);
    for (Eigen::Index i = 0; i < n; ++i)
        tr.add_channel(dsys.state_names[static_cast<std::size_t>(i)], std::move(xs[static_cast<std::size_t>(i)]));
    for (Eigen::Index i = 0; i < p; ++i)
        tr.add_channel(dsys.output_names[static_cast<std::size_t>(i)], std::move(ys[static_cast<std::size_t>(i)]));
    return tr;
}

/// Fixed-step RK4 integration of a continuous LtiSystem with inputs held
/// constant over each interval of length t_s (u has one row per interval).
/// Used to cross-check the discrete recursion.
inline Trace simulate_continuous_rk4(const LtiSystem& sys, const Matrix& u, const Vector& x0, double t_s,
                                     int substeps) {
    sys.validate();
    if (sys.is_discrete()) throw DomainError("simulate_continuous_rk4: system must be continuous");
    if (substeps < 1) throw DomainError("simulate_continuous_rk4: substeps must be >= 1");
    if (!(t_s > 0.0)) throw DomainError("simulate_continuous_rk4: t_s must be positive");
    const auto steps = u.rows();
    Matrix states(steps + 1, sys.states());
    Vector x = x0;
    states.row(0) = x.transpose();
    const double h = t_s / substeps;
    for (Eigen::Index k = 0; k < steps; ++k) {
        const Vector bu = sys.B * u.row(k).transpose();
        auto f = [&](const Vector& s) -> Vector { return sys.A * s + bu; };
        for (int s = 0; s < substeps; ++s) {
            const Vector k1 = f(x);
            const Vector k2 = f(x + 0.5 * h * k1);
            const Vector k3 = f(x + 0.5 * h * k2);
            const Vector k4 = f(x + h * k3);
            x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        states.row(k + 1) = x.transpose();
    }
    Trace tr(t_s);
    for (Eigen::Index i = 0; i < sys.states(); ++i) {
        std::vector<double> col(static_cast<std::size_t>(steps + 1));
        for (Eigen::Index k = 0; k <= steps; ++k) col[static_cast<std::size_t>(k)] = states(k, i);
        tr.add_channel(sys.state_names[static_cast<std::size_t>(i)], std::move(col));
    }
    for (Eigen::Index o = 0; o < sys.outputs(); ++o) {
        std::vector<double> col(static_cast<std::size_t>(steps + 1));
        for (Eigen::Index k = 0; k <= steps; ++k) {
            const Vector uk = steps == 0 ? Vector(Vector::Zero(sys.inputs()))
                                         : Vector(u.row(std::min(k, steps - 1)).transpose());
            col[static_cast<std::size_t>(k)] = (sys.C.row(o) * states.row(k).transpose() + sys.D.row(o) * uk)(0);
        }
        tr.add_channel(sys.output_names[static_cast<std::size_t>(o)], std::move(col));
    }
    return tr;
}

}  // namespace gsmpc
