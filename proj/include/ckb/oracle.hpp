#pragma once

// Primal-side computations with explicit linear feature maps. Nothing here
// goes through Gram matrices, so these routines serve as ground truth for
// the kernel-trick estimators in discrepancy.hpp.

#include <ckb/error.hpp>
#include <ckb/linalg.hpp>
#include <ckb/types.hpp>

#include <cmath>

namespace ckb::oracle {

/// Empirical centered (cross-)covariances and the regularized conditional
/// covariance R_XX − R_XY (R_YY + εI)⁻¹ R_YX.
struct PrimalOperators {
    Matrix R_XX, R_XY, R_YY, R_XX_given_Y;
};

inline PrimalOperators primal_operators(const LabeledDataset& D, double epsilon) {
    if (D.size() < 2)
        throw InputError("primal_operators: need at least two samples");
    if (!(epsilon > 0.0))
        throw InputError("primal_operators: epsilon must be positive");
    const Matrix& Y = D.labels();
    const double p = static_cast<double>(D.size());

    Matrix Xc = D.X;
    Xc.colwise() -= D.X.rowwise().mean();
    Matrix Yc = Y;
    Yc.colwise() -= Y.rowwise().mean();

    PrimalOperators ops;
    ops.R_XX = Xc * Xc.transpose() / p;
    ops.R_XY = Xc * Yc.transpose() / p;
    ops.R_YY = Yc * Yc.transpose() / p;
    Matrix reg = ops.R_YY;
    reg.diagonal().array() += epsilon;
    const Matrix solved = reg.llt().solve(ops.R_XY.transpose());
    ops.R_XX_given_Y = ops.R_XX - ops.R_XY * solved;
    ops.R_XX_given_Y = 0.5 * (ops.R_XX_given_Y + ops.R_XX_given_Y.transpose()).eval();
    return ops;
}

/// tr(Rs + Rt − 2·(√Rs Rt √Rs)^½) on the conditional covariances, with both
/// square roots taken literally.
inline double ckb_sq_primal(const LabeledDataset& Ds, const LabeledDataset& Dt, double epsilon) {
    if (Ds.dim() != Dt.dim())
        throw InputError("ckb_sq_primal: feature dimensions differ");
    if (Ds.num_classes() != Dt.num_classes())
        throw InputError("ckb_sq_primal: label dimensions differ");
    const Matrix Rs = primal_operators(Ds, epsilon).R_XX_given_Y;
    const Matrix Rt = primal_operators(Dt, epsilon).R_XX_given_Y;
    const Matrix root_s = psd_sqrt(Rs);
    const Matrix middle = root_s * Rt * root_s;
    const Matrix cross = psd_sqrt(0.5 * (middle + middle.transpose()));
    return Rs.trace() + Rt.trace() - 2.0 * cross.trace();
}

/// B from its defining expression I − (1/(pε))[G − G(G + εpI)⁻¹G].
inline Matrix b_matrix_by_definition(const Eigen::Ref<const Matrix>& G_Y, double epsilon) {
    if (!(epsilon > 0.0))
        throw InputError("b_matrix_by_definition: epsilon must be positive");
    const Index p = G_Y.rows();
    const double shift = epsilon * static_cast<double>(p);
    Matrix A = G_Y;
    A.diagonal().array() += shift;
    const Matrix inner = G_Y - G_Y * A.partialPivLu().solve(G_Y);
    Matrix B = Matrix::Identity(p, p) - inner / shift;
    return 0.5 * (B + B.transpose());
}

} // namespace ckb::oracle
