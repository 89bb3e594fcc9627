#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>

#include "gsmpc/errors.hpp"

namespace gsmpc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Finite-difference step used throughout: relative step with an absolute floor.
struct FdStep {
    double relative = 1e-6;
    double absolute = 1e-8;

    double at(double x) const { return std::max(relative * std::abs(x), absolute); }
};

/// Central-difference Jacobian of f at x. Columns are evaluated one at a time.
inline Matrix jacobian_central(const std::function<Vector(const Vector&)>& f, const Vector& x,
                               FdStep step = {}) {
    const Vector f0 = f(x);
    Matrix jac(f0.size(), x.size());
    Vector xp = x;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double h = step.at(x[j]);
        xp[j] = x[j] + h;
        const Vector fp = f(xp);
        xp[j] = x[j] - h;
        const Vector fm = f(xp);
        xp[j] = x[j];
        jac.col(j) = (fp - fm) / (2.0 * h);
    }
    return jac;
}

/// Scalar convenience wrapper around the same kernel.
inline double derivative_central(const std::function<double(double)>& f, double x,
                                 FdStep step = {}) {
    const double h = step.at(x);
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

/// Matrix exponential by scaling and squaring with a diagonal Padé approximant.
///
/// The argument is scaled so that its 1-norm is at most 0.5, where the [8/8]
/// approximant is accurate to well below double-precision roundoff, then
/// squared back up.
inline Matrix expm(const Matrix& a, int pade_order = 8) {
    if (a.rows() != a.cols()) throw DomainError("expm: matrix must be square");
    if (!a.allFinite()) throw DomainError("expm: non-finite matrix entries");
    if (pade_order < 6) throw DomainError("expm: Padé order must be at least 6");
    const Eigen::Index n = a.rows();
    if (n == 0) return a;

    const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    const Matrix scaled = a / std::ldexp(1.0, squarings);

    const Matrix eye = Matrix::Identity(n, n);
    Matrix num = eye;
    Matrix den = eye;
    Matrix power = eye;
    double c = 1.0;
    const int q = pade_order;
    for (int k = 1; k <= q; ++k) {
        c *= static_cast<double>(q - k + 1) / static_cast<double>((2 * q - k + 1) * k);
        power = power * scaled;
        num += c * power;
        den += ((k % 2 == 0) ? c : -c) * power;
    }
    Matrix result = den.partialPivLu().solve(num);
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

}  // namespace gsmpc
