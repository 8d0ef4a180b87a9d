#pragma once

#include "calm/types.hpp"

namespace calm {

template <typename Scalar>
struct ConstraintValue {
    Scalar h{};
    MatrixX<Scalar> grad;
};

/// M^p for p >= 0 by binary exponentiation.
template <typename Derived>
MatrixX<typename Derived::Scalar> matrix_power(const Eigen::MatrixBase<Derived>& m, int p) {
    using Scalar = typename Derived::Scalar;
    MatrixX<Scalar> result = MatrixX<Scalar>::Identity(m.rows(), m.cols());
    MatrixX<Scalar> base = m;
    MatrixX<Scalar> tmp(m.rows(), m.cols());
    bool first = true;
    while (p > 0) {
        if (p & 1) {
            if (first) {
                result = base;
                first = false;
            } else {
                tmp.noalias() = result * base;
                result.swap(tmp);
            }
        }
        p >>= 1;
        if (p > 0) {
            tmp.noalias() = base * base;
            base.swap(tmp);
        }
    }
    return result;
}

/// Polynomial acyclicity function h(A) = Tr((I + A/d)^d) - d for entrywise
/// nonnegative A. Zero iff the support of A is acyclic.
/// Gradient: d/dA Tr((I + A/d)^d) = ((I + A/d)^{d-1})^T.
template <typename Derived>
ConstraintValue<typename Derived::Scalar> h_poly(const Eigen::MatrixBase<Derived>& a) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index d = a.rows();
    require(a.cols() == d, "h_poly: matrix must be square");
    if ((a.array() < Scalar(0)).any()) throw DomainError("h_poly: entries must be nonnegative");
    ConstraintValue<Scalar> out;
    if (d == 0) return out;
    MatrixX<Scalar> m = a / static_cast<Scalar>(d);
    m.diagonal().array() += Scalar(1);
    const MatrixX<Scalar> pow_dm1 = matrix_power(m, static_cast<int>(d - 1));
    // Tr(P M) without forming the product
    out.h = (pow_dm1.array() * m.transpose().array()).sum() - static_cast<Scalar>(d);
    out.grad = pow_dm1.transpose();
    return out;
}

template <typename Derived>
bool h_converged(const Eigen::MatrixBase<Derived>& a, double tol) {
    require(tol > 0.0, "h_converged: tol must be positive");
    return h_poly(a).h < tol;
}

}  // namespace calm
