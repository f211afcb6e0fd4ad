#pragma once

#include <ckb/error.hpp>
#include <ckb/types.hpp>

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>

namespace ckb {

/// Eigenvalues below this fraction of the largest one are treated as zero.
inline constexpr double kEigenClampRelative = 1e-12;

inline double max_abs(const Eigen::Ref<const Matrix>& M) {
    return M.size() == 0 ? 0.0 : M.cwiseAbs().maxCoeff();
}

inline void require_symmetric(const Eigen::Ref<const Matrix>& M, const std::string& who,
                              double rel_tol = 1e-10) {
    if (M.rows() != M.cols())
        throw InputError(who + ": matrix is not square");
    require_finite(M, who);
    if (max_abs(M - M.transpose()) > rel_tol * std::max(1.0, max_abs(M)))
        throw InputError(who + ": matrix is not symmetric");
}

/// Symmetric eigendecomposition with the clamping rule applied: eigenvalues
/// below kEigenClampRelative·λ_max become exactly zero. Throws when the most
/// negative eigenvalue exceeds `neg_tol`·|trace| in magnitude.
struct ClampedEigen {
    Vector values;
    Matrix vectors;
};

inline ClampedEigen clamped_eigen(const Eigen::Ref<const Matrix>& M, const std::string& who,
                                  double neg_tol = 1e-8) {
    require_symmetric(M, who);
    const Matrix S = 0.5 * (M + M.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(S);
    if (es.info() != Eigen::Success)
        throw NumericalError(who + ": eigendecomposition failed");
    ClampedEigen out{es.eigenvalues(), es.eigenvectors()};
    const double trace_scale = std::abs(S.trace());
    if (out.values.size() > 0 && out.values.minCoeff() < -neg_tol * trace_scale)
        throw InputError(who + ": matrix is not positive semidefinite");
    const double top = out.values.size() > 0 ? std::max(out.values.maxCoeff(), 0.0) : 0.0;
    const double floor = kEigenClampRelative * top;
    for (Index i = 0; i < out.values.size(); ++i)
        if (out.values(i) < floor)
            out.values(i) = 0.0;
    return out;
}

/// Unique PSD square root through the clamped eigendecomposition.
inline Matrix psd_sqrt(const Eigen::Ref<const Matrix>& M) {
    const ClampedEigen eig = clamped_eigen(M, "psd_sqrt");
    Matrix R = eig.vectors * eig.values.cwiseSqrt().asDiagonal() * eig.vectors.transpose();
    return 0.5 * (R + R.transpose());
}

/// Sum of singular values.
inline double nuclear_norm(const Eigen::Ref<const Matrix>& M) {
    if (!M.allFinite())
        throw NumericalError("nuclear_norm: non-finite entries");
    if (M.size() == 0)
        return 0.0;
    Eigen::BDCSVD<Matrix> svd(M);
    return svd.singularValues().sum();
}

/// Nuclear norm together with U·Vᵀ restricted to the singular values above
/// `rel_tol`·σ_max, i.e. the gradient wherever the norm is differentiable.
struct NuclearNormWithGradient {
    double value = 0.0;
    Matrix gradient;
    Vector singular_values;
};

inline NuclearNormWithGradient nuclear_norm_with_gradient(const Eigen::Ref<const Matrix>& M,
                                                          double rel_tol = 1e-9) {
    if (!M.allFinite())
        throw NumericalError("nuclear_norm: non-finite entries");
    NuclearNormWithGradient out;
    out.gradient = Matrix::Zero(M.rows(), M.cols());
    if (M.size() == 0)
        return out;
    Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.singular_values = svd.singularValues();
    out.value = out.singular_values.sum();
    const double cut = rel_tol * out.singular_values(0);
    Index rank = 0;
    while (rank < out.singular_values.size() && out.singular_values(rank) > cut)
        ++rank;
    out.gradient = svd.matrixU().leftCols(rank) * svd.matrixV().leftCols(rank).transpose();
    return out;
}

} // namespace ckb
