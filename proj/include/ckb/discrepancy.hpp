#pragma once

#include <ckb/error.hpp>
#include <ckb/kernels.hpp>
#include <ckb/linalg.hpp>
#include <ckb/types.hpp>

#include <cmath>
#include <optional>
#include <string>

namespace ckb {

/// Regularization of the conditional covariance when none is given.
inline constexpr double kDefaultEpsilon = 1e-2;

enum class MetricKind { bures, kernel_bures, ckb, mmd_label };

inline const char* to_string(MetricKind kind) {
    switch (kind) {
    case MetricKind::bures: return "bures";
    case MetricKind::kernel_bures: return "kernel_bures";
    case MetricKind::ckb: return "ckb";
    case MetricKind::mmd_label: return "mmd_label";
    }
    return "unknown";
}

inline MetricKind metric_kind_from_string(const std::string& s) {
    for (MetricKind k : {MetricKind::bures, MetricKind::kernel_bures, MetricKind::ckb, MetricKind::mmd_label})
        if (s == to_string(k))
            return k;
    throw InputError("unknown metric kind '" + s + "'");
}

/// Every metric here has the shape trace_source + trace_target − 2·cross_term.
struct DiscrepancyReport {
    double trace_source = 0.0;
    double trace_target = 0.0;
    double cross_term = 0.0;
    double value = 0.0;
    MetricKind kind = MetricKind::ckb;
    std::optional<double> epsilon;
    BandwidthLog sigma2;
    Index n = 0, m = 0;

    double trace_scale() const { return trace_source + trace_target; }
};

inline DiscrepancyReport assemble(MetricKind kind, double ts, double tt, double cross, Index n, Index m) {
    DiscrepancyReport r;
    r.kind = kind;
    r.trace_source = ts;
    r.trace_target = tt;
    r.cross_term = cross;
    r.value = ts + tt - 2.0 * cross;
    r.n = n;
    r.m = m;
    return r;
}

/// Squared Bures distance tr(Σs + Σt − 2(√Σs Σt √Σs)^½) between PSD matrices.
/// The cross term is evaluated as ‖√Σt √Σs‖_*, whose singular values are
/// the square roots of the eigenvalues of √Σs Σt √Σs.
inline DiscrepancyReport bures_sq(const Eigen::Ref<const Matrix>& sigma_s,
                                  const Eigen::Ref<const Matrix>& sigma_t) {
    if (sigma_s.rows() != sigma_t.rows() || sigma_s.cols() != sigma_t.cols())
        throw InputError("bures_sq: covariance shapes differ");
    const auto root = [](const Eigen::Ref<const Matrix>& S, const char* who) {
        const ClampedEigen eig = clamped_eigen(S, who, 1e-10);
        return Matrix(eig.vectors * eig.values.cwiseSqrt().asDiagonal() * eig.vectors.transpose());
    };
    const Matrix root_s = root(sigma_s, "bures_sq(source)");
    const Matrix root_t = root(sigma_t, "bures_sq(target)");
    const Index d = sigma_s.rows();
    return assemble(MetricKind::bures, sigma_s.trace(), sigma_t.trace(),
                    nuclear_norm(root_t * root_s), d, d);
}

/// Kernel Bures distance between the feature marginals: centered Gram traces
/// over the sample count, and (nm)^-½‖H_m K_ts H_n‖_* for the cross term.
inline DiscrepancyReport kernel_bures_sq(const LabeledDataset& Ds, const LabeledDataset& Dt,
                                         const KernelSpec& spec_x) {
    if (Ds.size() < 2 || Dt.size() < 2)
        throw InputError("kernel_bures_sq: need at least two samples per domain");
    if (Ds.dim() != Dt.dim())
        throw InputError("kernel_bures_sq: feature dimensions differ");
    const double n = static_cast<double>(Ds.size());
    const double m = static_cast<double>(Dt.size());

    BandwidthLog bw;
    bw.x_source = resolve_bandwidth(spec_x, Ds.X, Ds.X);
    bw.x_target = resolve_bandwidth(spec_x, Dt.X, Dt.X);
    bw.x_cross = resolve_bandwidth(spec_x, Dt.X, Ds.X);
    const Matrix G_s = center(gram(Ds.X, Ds.X, spec_x, bw.x_source.value_or(0.0)));
    const Matrix G_t = center(gram(Dt.X, Dt.X, spec_x, bw.x_target.value_or(0.0)));
    const Matrix K_ts = gram(Dt.X, Ds.X, spec_x, bw.x_cross.value_or(0.0));

    DiscrepancyReport r = assemble(MetricKind::kernel_bures, G_s.trace() / n, G_t.trace() / m,
                                   nuclear_norm(double_center(K_ts)) / std::sqrt(n * m),
                                   Ds.size(), Dt.size());
    r.sigma2 = bw;
    return r;
}

/// B = εp (G_Y + εp I)⁻¹ for a centered p×p label Gram matrix.
inline Matrix b_matrix(const Eigen::Ref<const Matrix>& G_Y, double epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw InputError("b_matrix: epsilon must be positive");
    require_symmetric(G_Y, "b_matrix");
    const Index p = G_Y.rows();
    const double shift = epsilon * static_cast<double>(p);
    Matrix A = G_Y;
    A.diagonal().array() += shift;
    Eigen::LDLT<Matrix> ldlt(A);
    if (ldlt.info() != Eigen::Success)
        throw NumericalError("b_matrix: factorization failed");
    Matrix B = shift * ldlt.solve(Matrix::Identity(p, p));
    return 0.5 * (B + B.transpose());
}

/// C = U√D from the eigendecomposition of B, dropping clamped directions.
inline Matrix c_factor(const Eigen::Ref<const Matrix>& B) {
    const ClampedEigen eig = clamped_eigen(B, "c_factor");
    Index kept = 0;
    for (Index i = 0; i < eig.values.size(); ++i)
        kept += eig.values(i) > 0.0 ? 1 : 0;
    Matrix C(B.rows(), kept);
    Index col = 0;
    // Eigen returns ascending eigenvalues; emit the largest first.
    for (Index i = eig.values.size() - 1; i >= 0; --i)
        if (eig.values(i) > 0.0)
            C.col(col++) = eig.vectors.col(i) * std::sqrt(eig.values(i));
    return C;
}

/// Lower Cholesky factor L of B, so that L Lᵀ = B.
inline Matrix c_factor_cholesky(const Eigen::Ref<const Matrix>& B) {
    require_symmetric(B, "c_factor_cholesky");
    Eigen::LLT<Matrix> llt(0.5 * (B + B.transpose()));
    if (llt.info() != Eigen::Success)
        throw NumericalError("c_factor_cholesky: matrix is not positive definite");
    return llt.matrixL();
}

enum class FactorMethod { evd, cholesky };

inline const char* to_string(FactorMethod f) { return f == FactorMethod::evd ? "evd" : "cholesky"; }

inline FactorMethod factor_method_from_string(const std::string& s) {
    if (s == "evd")
        return FactorMethod::evd;
    if (s == "cholesky")
        return FactorMethod::cholesky;
    throw InputError("unknown factorization '" + s + "' (expected evd or cholesky)");
}

struct CkbOptions {
    double epsilon = kDefaultEpsilon;
    FactorMethod factor = FactorMethod::evd;
};

/// Per-domain pieces of the estimator: B, a factor C with C Cᵀ = B and the
/// trace term ε·tr[G_X(εpI + G_Y)⁻¹] = tr(G_X B)/p.
struct ConditionalSide {
    Matrix B;
    Matrix C;
    bool upper_triangular = false;
    double trace_term = 0.0;
};

inline ConditionalSide conditional_side(const Eigen::Ref<const Matrix>& G_X, const Eigen::Ref<const Matrix>& G_Y,
                                        const CkbOptions& opts) {
    ConditionalSide side;
    if (opts.factor == FactorMethod::evd) {
        side.B = b_matrix(G_Y, opts.epsilon);
        side.C = c_factor(side.B);
    } else {
        // With G_Y + εpI = L Lᵀ, √(εp)·L⁻ᵀ is an upper-triangular factor of B.
        if (!(opts.epsilon > 0.0) || !std::isfinite(opts.epsilon))
            throw InputError("b_matrix: epsilon must be positive");
        require_symmetric(G_Y, "b_matrix");
        const Index p = G_Y.rows();
        const double shift = opts.epsilon * static_cast<double>(p);
        Matrix A = 0.5 * (G_Y + G_Y.transpose());
        A.diagonal().array() += shift;
        Eigen::LLT<Matrix> llt(A);
        if (llt.info() != Eigen::Success)
            throw NumericalError("b_matrix: factorization failed");
        Matrix W = Matrix::Identity(p, p);
        llt.matrixL().solveInPlace(W);
        side.C = std::sqrt(shift) * W.transpose();
        side.C.triangularView<Eigen::StrictlyLower>().setZero();
        side.upper_triangular = true;
        side.B = Matrix::Zero(p, p);
        side.B.selfadjointView<Eigen::Lower>().rankUpdate(side.C);
        side.B.triangularView<Eigen::StrictlyUpper>() = side.B.transpose();
    }
    side.trace_term = G_X.cwiseProduct(side.B).sum() / static_cast<double>(G_X.rows());
    return side;
}

/// Empirical squared CKB distance from a prepared Gram bundle. The cross
/// term uses (H_m C_t)ᵀ K_ts (H_n C_s) = C_tᵀ (H_m K_ts H_n) C_s.
inline DiscrepancyReport ckb_sq(const GramBundle& b, const CkbOptions& opts = {}) {
    if (b.n < 2 || b.m < 2)
        throw InputError("ckb_sq: need at least two samples per domain");
    const ConditionalSide s = conditional_side(b.G_X_s, b.G_Y_s, opts);
    const ConditionalSide t = conditional_side(b.G_X_t, b.G_Y_t, opts);
    const Matrix K = double_center(b.K_ts);
    Matrix right, inner;
    if (s.upper_triangular) {
        right.noalias() = K * s.C.triangularView<Eigen::Upper>();
        inner.noalias() = t.C.transpose().triangularView<Eigen::Lower>() * right;
    } else {
        right.noalias() = K * s.C;
        inner.noalias() = t.C.transpose() * right;
    }
    const double cross = nuclear_norm(inner) / std::sqrt(static_cast<double>(b.n) * static_cast<double>(b.m));
    DiscrepancyReport r = assemble(MetricKind::ckb, s.trace_term, t.trace_term, cross, b.n, b.m);
    r.epsilon = opts.epsilon;
    r.sigma2 = b.sigma2;
    return r;
}

/// One-hot label columns, i.e. hard class labels.
inline bool is_one_hot(const Eigen::Ref<const Matrix>& Y) {
    for (Index j = 0; j < Y.cols(); ++j) {
        int ones = 0;
        for (Index i = 0; i < Y.rows(); ++i) {
            if (Y(i, j) == 1.0)
                ++ones;
            else if (Y(i, j) != 0.0)
                return false;
        }
        if (ones != 1)
            return false;
    }
    return true;
}

/// With hard labels the label Gram has rank at most K: G_Y = M S Mᵀ where
/// M = H Yᵀ and S is the kernel between class indicators. B is the identity
/// minus a rank-K term and √B = I − U diag(shrink) Uᵀ, so neither B nor its
/// factor is ever formed as a dense p×p matrix.
struct LowRankSide {
    Matrix U;      ///< p×K, orthonormal eigenvectors of G_Y
    Vector shrink; ///< 1 − √(εp/(λ+εp)) per column of U
    double trace_term = 0.0;
};

inline LowRankSide low_rank_side(const Eigen::Ref<const Matrix>& G_X, const Eigen::Ref<const Matrix>& Y,
                                 const KernelSpec& spec_y, double s2_y, double epsilon) {
    const Index K = Y.rows(), p = Y.cols();
    Matrix M = Y.transpose();
    M.rowwise() -= M.colwise().mean();
    const Matrix classes = Matrix::Identity(K, K);
    const Matrix S = gram(classes, classes, spec_y, s2_y);
    Eigen::HouseholderQR<Matrix> qr(M);
    const Matrix Q = qr.householderQ() * Matrix::Identity(p, K);
    const Matrix R = qr.matrixQR().topRows(K).triangularView<Eigen::Upper>();
    const Matrix T = R * S * R.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (T + T.transpose()));
    if (es.info() != Eigen::Success)
        throw NumericalError("ckb_sq: label eigendecomposition failed");

    const double shift = epsilon * static_cast<double>(p);
    const Vector lambda = es.eigenvalues().cwiseMax(0.0);
    LowRankSide side;
    side.U = Q * es.eigenvectors();
    side.shrink = (1.0 - (shift / (lambda.array() + shift)).sqrt()).matrix();
    // tr(G_X B) = tr(G_X) − Σ_k λ_k/(λ_k+εp) u_kᵀ G_X u_k
    const Vector drop = (lambda.array() / (lambda.array() + shift)).matrix();
    const Vector quad = side.U.cwiseProduct(G_X * side.U).colwise().sum().transpose();
    side.trace_term = (G_X.trace() - drop.dot(quad)) / static_cast<double>(p);
    return side;
}

/// Same value as ckb_sq(bundle, {ε, evd}) for hard labels, in O(p²K) beyond
/// the final singular values.
inline DiscrepancyReport ckb_sq_hard_labels(const GramBundle& b, const Eigen::Ref<const Matrix>& Ys,
                                            const Eigen::Ref<const Matrix>& Yt, const KernelSpec& spec_y,
                                            const CkbOptions& opts) {
    if (b.n < 2 || b.m < 2)
        throw InputError("ckb_sq: need at least two samples per domain");
    const LowRankSide s = low_rank_side(b.G_X_s, Ys, spec_y, b.sigma2.y_source.value_or(0.0), opts.epsilon);
    const LowRankSide t = low_rank_side(b.G_X_t, Yt, spec_y, b.sigma2.y_target.value_or(0.0), opts.epsilon);
    Matrix inner = double_center(b.K_ts);
    const Matrix KU = inner * s.U;
    inner.noalias() -= KU * s.shrink.asDiagonal() * s.U.transpose();
    const Matrix UtK = t.U.transpose() * inner;
    inner.noalias() -= t.U * t.shrink.asDiagonal() * UtK;
    const double cross = nuclear_norm(inner) / std::sqrt(static_cast<double>(b.n) * static_cast<double>(b.m));
    DiscrepancyReport r = assemble(MetricKind::ckb, s.trace_term, t.trace_term, cross, b.n, b.m);
    r.epsilon = opts.epsilon;
    r.sigma2 = b.sigma2;
    return r;
}

inline DiscrepancyReport ckb_sq(const LabeledDataset& Ds, const LabeledDataset& Dt, const KernelSpec& spec_x,
                                const KernelSpec& spec_y, const CkbOptions& opts = {}) {
    if (!Ds.has_labels() || !Dt.has_labels())
        throw InputError("ckb_sq: missing labels");
    if (!(opts.epsilon > 0.0) || !std::isfinite(opts.epsilon))
        throw InputError("ckb_sq: epsilon must be positive");
    const GramBundle b = build_gram_bundle(Ds, Dt, spec_x, spec_y);
    const Matrix &Ys = *Ds.Y, &Yt = *Dt.Y;
    if (opts.factor == FactorMethod::evd && Ys.rows() < Ys.cols() && Yt.rows() < Yt.cols() && is_one_hot(Ys) &&
        is_one_hot(Yt))
        return ckb_sq_hard_labels(b, Ys, Yt, spec_y, opts);
    return ckb_sq(b, opts);
}

/// Squared MMD between label mean embeddings, reported in the same three-term
/// form: 1ᵀK_s1/n², 1ᵀK_t1/m² and cross 1ᵀK_ts1/(nm).
inline DiscrepancyReport label_mmd_report(const Eigen::Ref<const Matrix>& Ys, const Eigen::Ref<const Matrix>& Yt,
                                          const KernelSpec& spec_y) {
    if (Ys.cols() < 1 || Yt.cols() < 1)
        throw InputError("label_mmd_sq: need at least one sample per domain");
    if (Ys.rows() != Yt.rows())
        throw InputError("label_mmd_sq: label dimensions differ");
    require_probability_columns(Ys, "label_mmd_sq(source)");
    require_probability_columns(Yt, "label_mmd_sq(target)");
    const double n = static_cast<double>(Ys.cols());
    const double m = static_cast<double>(Yt.cols());

    BandwidthLog bw;
    bw.y_source = resolve_bandwidth(spec_y, Ys, Ys);
    bw.y_target = resolve_bandwidth(spec_y, Yt, Yt);
    bw.y_cross = resolve_bandwidth(spec_y, Yt, Ys);
    const double ks = gram(Ys, Ys, spec_y, bw.y_source.value_or(0.0)).sum() / (n * n);
    const double kt = gram(Yt, Yt, spec_y, bw.y_target.value_or(0.0)).sum() / (m * m);
    const double kts = gram(Yt, Ys, spec_y, bw.y_cross.value_or(0.0)).sum() / (n * m);
    DiscrepancyReport r = assemble(MetricKind::mmd_label, ks, kt, kts, Ys.cols(), Yt.cols());
    r.sigma2 = bw;
    return r;
}

inline double label_mmd_sq(const Eigen::Ref<const Matrix>& Ys, const Eigen::Ref<const Matrix>& Yt,
                           const KernelSpec& spec_y) {
    return label_mmd_report(Ys, Yt, spec_y).value;
}

/// Centered sample covariance (1/p)·X H Xᵀ of the columns of X.
inline Matrix sample_covariance(const Eigen::Ref<const Matrix>& X) {
    if (X.cols() < 1)
        throw InputError("sample_covariance: no samples");
    Matrix Xc = X;
    Xc.colwise() -= X.rowwise().mean();
    Matrix S = Xc * Xc.transpose() / static_cast<double>(X.cols());
    return 0.5 * (S + S.transpose());
}

} // namespace ckb
