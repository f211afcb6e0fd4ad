#pragma once

#include <ckb/ckb.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace ckb::test {

inline Matrix random_matrix(Rng& rng, Index rows, Index cols, double scale = 1.0) {
    Matrix M(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i)
            M(i, j) = scale * rng.normal();
    return M;
}

/// A Aᵀ with A of shape p×rank; rank < p gives a singular matrix.
inline Matrix random_psd(Rng& rng, Index p, Index rank) {
    const Matrix A = random_matrix(rng, p, rank);
    Matrix S = A * A.transpose();
    return 0.5 * (S + S.transpose());
}

inline std::vector<int> random_labels(Rng& rng, Index p, int K) {
    std::vector<int> labels(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j)
        labels[static_cast<std::size_t>(j)] = j < K ? static_cast<int>(j) : rng.between(0, K - 1);
    return labels;
}

/// Gaussian features with a class-dependent mean.
inline LabeledDataset random_dataset(Rng& rng, int d, int K, Index p, double separation = 1.5) {
    const std::vector<int> labels = random_labels(rng, p, K);
    const Matrix centers = random_matrix(rng, d, K, separation);
    LabeledDataset D;
    D.X = random_matrix(rng, d, p);
    for (Index j = 0; j < p; ++j)
        D.X.col(j) += centers.col(labels[static_cast<std::size_t>(j)]);
    D.Y = one_hot(labels, K);
    return D;
}

inline LabeledDataset permuted(const LabeledDataset& D, Rng& rng) {
    std::vector<Index> idx(static_cast<std::size_t>(D.size()));
    for (Index j = 0; j < D.size(); ++j)
        idx[static_cast<std::size_t>(j)] = j;
    rng.shuffle(idx);
    LabeledDataset P = D;
    P.X = gather_columns(D.X, idx);
    if (D.Y)
        P.Y = gather_columns(*D.Y, idx);
    return P;
}

inline double rel_diff(double a, double b, double floor = 1.0) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline double rel_frobenius(const Matrix& A, const Matrix& B) {
    return (A - B).norm() / std::max(B.norm(), 1e-300);
}

/// Flat view over the trainable parameters, in the order W_f, b_f, W_c, b_c.
inline double& parameter(AlignmentState& s, Index i) {
    if (i < s.W_f.size())
        return s.W_f.data()[i];
    i -= s.W_f.size();
    if (i < s.b_f.size())
        return s.b_f.data()[i];
    i -= s.b_f.size();
    if (i < s.W_c.size())
        return s.W_c.data()[i];
    return s.b_c.data()[i - s.W_c.size()];
}

inline double gradient_entry(const Gradients& g, Index i) {
    if (i < g.W_f.size())
        return g.W_f.data()[i];
    i -= g.W_f.size();
    if (i < g.b_f.size())
        return g.b_f.data()[i];
    i -= g.b_f.size();
    if (i < g.W_c.size())
        return g.W_c.data()[i];
    return g.b_c.data()[i - g.W_c.size()];
}

inline Index parameter_count(const AlignmentState& s) {
    return s.W_f.size() + s.b_f.size() + s.W_c.size() + s.b_c.size();
}

struct FdCheck {
    double max_rel_error = 0.0;
    Index worst = -1;
};

/// Central differences of the total objective with the step's constants
/// frozen, compared with the analytic gradient on the given coordinates.
/// Relative error uses max(|analytic|, |numeric|, floor) as denominator.
inline FdCheck finite_difference_check(const AlignmentState& state, const Batch& batch, const AlignmentConfig& config,
                                       const std::vector<Index>& coords, double h = 1e-5, double floor = 1e-6) {
    const FrozenContext ctx = capture_context(state, batch, config);
    const Gradients g = gradient(state, batch, config, ctx, config.lambda2);
    FdCheck out;
    for (Index c : coords) {
        AlignmentState plus = state, minus = state;
        parameter(plus, c) += h;
        parameter(minus, c) -= h;
        const double fd = (objective(plus, batch, config, ctx, config.lambda2).total -
                           objective(minus, batch, config, ctx, config.lambda2).total) /
                          (2.0 * h);
        const double a = gradient_entry(g, c);
        const double err = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), floor});
        if (err > out.max_rel_error || out.worst < 0) {
            out.max_rel_error = std::max(out.max_rel_error, err);
            out.worst = c;
        }
    }
    return out;
}

/// Smallest gap between consecutive singular values of the cross-term
/// matrix; small gaps make the nuclear norm locally non-smooth.
inline double singular_gap(const AlignmentState& state, const Batch& batch, const AlignmentConfig& config) {
    const FrozenContext ctx = capture_context(state, batch, config);
    const ForwardResult fs = forward(state, batch.X_s), ft = forward(state, batch.X_t);
    const Matrix Kts = gram(ft.Z, fs.Z, config.kernel_x, ctx.s2_z_cross.value_or(0.0));
    const Matrix inner = ctx.HC_t.transpose() * (Kts * ctx.HC_s);
    const Vector sv = Eigen::BDCSVD<Matrix>(inner).singularValues();
    const double cut = 1e-9 * sv(0);
    double gap = std::numeric_limits<double>::infinity();
    for (Index i = 0; i + 1 < sv.size() && sv(i + 1) > cut; ++i)
        gap = std::min(gap, sv(i) - sv(i + 1));
    return gap;
}

/// Random state and batch for gradient checks, resampled until the
/// cross-term singular values are separated by at least `min_gap`.
inline std::pair<AlignmentState, Batch> random_nondegenerate_point(Rng& rng, const AlignmentConfig& config, int d,
                                                                  int K, Index half, double min_gap = 1e-6) {
    while (true) {
        AlignmentState s = AlignmentState::initialize(d, config.feature_dim_out, K, rng.next_u64());
        s.b_f = random_matrix(rng, s.b_f.size(), 1, 0.1);
        s.b_c = random_matrix(rng, s.b_c.size(), 1, 0.1);
        Batch b;
        const LabeledDataset src = random_dataset(rng, d, K, half);
        b.X_s = src.X;
        b.Y_s = *src.Y;
        b.X_t = random_dataset(rng, d, K, half).X;
        if (singular_gap(s, b, config) >= min_gap)
            return {s, b};
    }
}

} // namespace ckb::test
