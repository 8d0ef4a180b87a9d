#pragma once

// Score functions for linear Gaussian SEMs with their analytic gradients.
// All take W = I - B implicitly; B follows the row = parent convention.

#include "calm/simulate.hpp"
#include "calm/types.hpp"

#include <cmath>
#include <optional>
#include <string>

namespace calm {

template <typename Scalar>
struct ObjectiveValue {
    Scalar value{};
    MatrixX<Scalar> grad_b;
    std::optional<VectorX<Scalar>> grad_omega;
};

enum class ObjectiveKind { golem_nv, least_squares, colide_nv };

ObjectiveKind parse_objective(const std::string& name);
std::string to_string(ObjectiveKind kind);

/// Profiled Gaussian negative log-likelihood with nonequal noise variances:
///   1/2 sum_i log(((I-B)^T S (I-B))_ii) - log|det(I-B)|.
/// Gradient: (I-B)^{-T} - S (I-B) diag(1/D).
template <typename DerivedB, typename DerivedS>
ObjectiveValue<typename DerivedB::Scalar> golem_nv_loss(const Eigen::MatrixBase<DerivedB>& b,
                                                        const Eigen::MatrixBase<DerivedS>& sigma) {
    using Scalar = typename DerivedB::Scalar;
    const Eigen::Index d = b.rows();
    require(b.cols() == d && sigma.rows() == d && sigma.cols() == d, "golem_nv_loss: dimension mismatch");
    const MatrixX<Scalar> w = MatrixX<Scalar>::Identity(d, d) - b;
    const MatrixX<Scalar> sw = sigma * w;
    const VectorX<Scalar> diag = (w.array() * sw.array()).colwise().sum().transpose();
    if ((diag.array() <= Scalar(0)).any()) throw DomainError("golem_nv_loss: nonpositive residual variance");

    Eigen::PartialPivLU<MatrixX<Scalar>> lu(w);
    const auto& packed = lu.matrixLU();
    Scalar log_abs_det(0);
    for (Eigen::Index i = 0; i < d; ++i) {
        const Scalar pivot = std::abs(packed(i, i));
        if (!(pivot > Scalar(0))) throw DomainError("golem_nv_loss: I - B is singular");
        log_abs_det += std::log(pivot);
    }

    ObjectiveValue<Scalar> out;
    out.value = Scalar(0.5) * diag.array().log().sum() - log_abs_det;
    out.grad_b = lu.inverse().transpose();
    out.grad_b.noalias() -= sw * diag.cwiseInverse().asDiagonal();
    return out;
}

/// Least-squares score in covariance form, 1/2 Tr((I-B)^T S (I-B)).
/// With S = X^T X / n this is (1/2n) ||X - XB||_F^2.
template <typename DerivedB, typename DerivedS>
ObjectiveValue<typename DerivedB::Scalar> least_squares_loss(const Eigen::MatrixBase<DerivedB>& b,
                                                             const Eigen::MatrixBase<DerivedS>& sigma) {
    using Scalar = typename DerivedB::Scalar;
    const Eigen::Index d = b.rows();
    require(b.cols() == d && sigma.rows() == d && sigma.cols() == d, "least_squares_loss: dimension mismatch");
    const MatrixX<Scalar> w = MatrixX<Scalar>::Identity(d, d) - b;
    const MatrixX<Scalar> sw = sigma * w;
    ObjectiveValue<Scalar> out;
    out.value = Scalar(0.5) * (w.array() * sw.array()).sum();
    out.grad_b = -sw;
    return out;
}

/// Sample form of the least-squares score, (1/2n) ||X - XB||_F^2 on the raw rows of X.
template <typename DerivedB, typename DerivedX>
ObjectiveValue<typename DerivedB::Scalar> least_squares_loss_samples(const Eigen::MatrixBase<DerivedB>& b,
                                                                     const Eigen::MatrixBase<DerivedX>& x) {
    using Scalar = typename DerivedB::Scalar;
    const Eigen::Index d = b.rows();
    require(b.cols() == d && x.cols() == d, "least_squares_loss: dimension mismatch");
    const Scalar n = static_cast<Scalar>(x.rows());
    const MatrixX<Scalar> resid = x - x * b;
    ObjectiveValue<Scalar> out;
    out.value = resid.squaredNorm() / (Scalar(2) * n);
    out.grad_b = -(x.transpose() * resid) / n;
    return out;
}

/// Covariance-input form. A zero-variance column is rejected: the score is
/// degenerate there and no structure can be read from it.
ObjectiveValue<double> least_squares_loss(const WeightedAdjacency& b, const CovarianceInput& input);

/// Non-profiled score with explicit noise variances omega:
///   1/2 Tr(Omega^{-1/2} (I-B)^T S (I-B)) + 1/2 Tr(Omega^{1/2}).
template <typename DerivedB, typename DerivedS, typename DerivedO>
ObjectiveValue<typename DerivedB::Scalar> colide_nv_loss(const Eigen::MatrixBase<DerivedB>& b,
                                                         const Eigen::MatrixBase<DerivedS>& sigma,
                                                         const Eigen::MatrixBase<DerivedO>& omega) {
    using Scalar = typename DerivedB::Scalar;
    const Eigen::Index d = b.rows();
    require(b.cols() == d && sigma.rows() == d && sigma.cols() == d && omega.size() == d,
            "colide_nv_loss: dimension mismatch");
    if ((omega.array() <= Scalar(0)).any()) throw DomainError("colide_nv_loss: noise variances must be positive");
    const MatrixX<Scalar> w = MatrixX<Scalar>::Identity(d, d) - b;
    const MatrixX<Scalar> sw = sigma * w;
    const VectorX<Scalar> diag = (w.array() * sw.array()).colwise().sum().transpose();
    const VectorX<Scalar> sd = omega.array().sqrt();

    ObjectiveValue<Scalar> out;
    out.value = Scalar(0.5) * (diag.array() / sd.array()).sum() + Scalar(0.5) * sd.sum();
    out.grad_b = -(sw * sd.cwiseInverse().asDiagonal());
    // d/d omega_i of D_i / (2 sqrt(omega_i)) + sqrt(omega_i) / 2
    out.grad_omega = (Scalar(0.25) / sd.array() - Scalar(0.25) * diag.array() / (omega.array() * sd.array())).matrix();
    return out;
}

}  // namespace calm
