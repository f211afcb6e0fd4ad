#pragma once

// Shallow conditional-distribution matching: a linear feature extractor
// z = W_f x + b_f and a softmax classifier ŷ = softmax(W_c z + b_c), trained
// by plain gradient descent on
//
//   L_CE + λ1·L_Ent + λ2·L_CKB                (variant ckb)
//   L_CE + λ1·L_Ent + λ2·(L_CKB + L_MMD)      (variant ckb_plus_mmd)
//
// CE and entropy are batch means. Target pseudo-labels, every adaptive σ²
// and hence the B/C factors are held constant while differentiating; they
// are captured once per step in a FrozenContext.

#include <ckb/discrepancy.hpp>
#include <ckb/error.hpp>
#include <ckb/kernels.hpp>
#include <ckb/linalg.hpp>
#include <ckb/rng.hpp>
#include <ckb/types.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ckb {

inline constexpr double kProbabilityFloor = 1e-12;

enum class AlignVariant { ckb, ckb_plus_mmd };

inline const char* to_string(AlignVariant v) { return v == AlignVariant::ckb ? "ckb" : "ckb+mmd"; }

inline AlignVariant align_variant_from_string(const std::string& s) {
    if (s == "ckb")
        return AlignVariant::ckb;
    if (s == "ckb+mmd" || s == "ckb_plus_mmd")
        return AlignVariant::ckb_plus_mmd;
    throw InputError("unknown variant '" + s + "' (expected ckb or ckb+mmd)");
}

struct AlignmentConfig {
    double lambda1 = 0.5; ///< entropy weight
    double lambda2 = 1.0; ///< alignment weight
    double epsilon = kDefaultEpsilon;
    AlignVariant variant = AlignVariant::ckb;
    int feature_dim_out = 16;
    double learning_rate = 0.1;
    int epochs = 200;
    int batch_size = 32; ///< split evenly between the two domains
    int warmup_epochs = 5;
    std::uint64_t seed = 0;
    KernelSpec kernel_x = KernelSpec::gaussian_adaptive();
    KernelSpec kernel_y = KernelSpec::gaussian_adaptive();

    void validate() const {
        if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0) || !std::isfinite(lambda1) || !std::isfinite(lambda2))
            throw InputError("lambda1 and lambda2 must be nonnegative");
        if (!(epsilon > 0.0) || !std::isfinite(epsilon))
            throw InputError("epsilon must be positive");
        if (feature_dim_out < 1)
            throw InputError("feature_dim_out must be positive");
        if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
            throw InputError("learning_rate must be positive");
        if (epochs < 0)
            throw InputError("epochs must be nonnegative");
        if (batch_size < 4)
            throw InputError("batch_size must be at least 4");
        if (warmup_epochs < 0)
            throw InputError("warmup_epochs must be nonnegative");
        kernel_x.validate();
        kernel_y.validate();
    }
};

/// Loss terms of one step; `total` uses lambda2_effective (0 during warmup).
struct LossRecord {
    long step = 0;
    int epoch = 0;
    double ce = 0.0;
    double entropy = 0.0;
    double ckb = 0.0;
    std::optional<double> mmd;
    double lambda2_effective = 0.0;
    double total = 0.0;
};

struct AlignmentState {
    Matrix W_f; ///< d_out × d_in
    Vector b_f;
    Matrix W_c; ///< K × d_out
    Vector b_c;
    long step = 0;
    std::vector<LossRecord> loss_history;

    Index input_dim() const { return W_f.cols(); }
    Index feature_dim() const { return W_f.rows(); }
    Index num_classes() const { return W_c.rows(); }

    static AlignmentState zeros(Index d_in, Index d_out, Index K) {
        return {Matrix::Zero(d_out, d_in), Vector::Zero(d_out), Matrix::Zero(K, d_out), Vector::Zero(K), 0, {}};
    }

    /// Gaussian weights with variance 1/fan_in, zero biases.
    static AlignmentState initialize(Index d_in, Index d_out, Index K, std::uint64_t seed) {
        AlignmentState s = zeros(d_in, d_out, K);
        Rng rng(seed);
        const double sf = 1.0 / std::sqrt(static_cast<double>(d_in));
        const double sc = 1.0 / std::sqrt(static_cast<double>(d_out));
        for (Index j = 0; j < d_in; ++j)
            for (Index i = 0; i < d_out; ++i)
                s.W_f(i, j) = sf * rng.normal();
        for (Index j = 0; j < d_out; ++j)
            for (Index i = 0; i < K; ++i)
                s.W_c(i, j) = sc * rng.normal();
        return s;
    }
};

/// Column-wise softmax.
inline Matrix softmax(const Eigen::Ref<const Matrix>& logits) {
    Matrix P(logits.rows(), logits.cols());
    for (Index j = 0; j < logits.cols(); ++j) {
        const double top = logits.col(j).maxCoeff();
        P.col(j) = (logits.col(j).array() - top).exp().matrix();
        P.col(j) /= P.col(j).sum();
    }
    return P;
}

struct ForwardResult {
    Matrix Z;    ///< d_out × p
    Matrix Yhat; ///< K × p
};

inline ForwardResult forward(const AlignmentState& state, const Eigen::Ref<const Matrix>& X) {
    if (X.rows() != state.input_dim())
        throw InputError("forward: input dimension " + std::to_string(X.rows()) + " does not match extractor (" +
                         std::to_string(state.input_dim()) + ")");
    ForwardResult out;
    out.Z = state.W_f * X;
    out.Z.colwise() += state.b_f;
    Matrix logits = state.W_c * out.Z;
    logits.colwise() += state.b_c;
    out.Yhat = softmax(logits);
    return out;
}

/// Σ −y log ŷ over all entries, with ŷ floored at 1e-12 inside the log.
inline double loss_ce(const Eigen::Ref<const Matrix>& Yhat, const Eigen::Ref<const Matrix>& Y) {
    if (Yhat.rows() != Y.rows() || Yhat.cols() != Y.cols())
        throw InputError("loss_ce: shape mismatch");
    double s = 0.0;
    for (Index j = 0; j < Y.cols(); ++j)
        for (Index k = 0; k < Y.rows(); ++k)
            if (Y(k, j) != 0.0)
                s -= Y(k, j) * std::log(std::max(Yhat(k, j), kProbabilityFloor));
    return s;
}

/// Σ −ŷ log ŷ over all entries, floored as in loss_ce.
inline double loss_entropy(const Eigen::Ref<const Matrix>& Yhat) {
    double s = 0.0;
    for (Index j = 0; j < Yhat.cols(); ++j)
        for (Index k = 0; k < Yhat.rows(); ++k)
            s -= Yhat(k, j) * std::log(std::max(Yhat(k, j), kProbabilityFloor));
    return s;
}

/// One minibatch: labeled source columns and unlabeled target columns.
struct Batch {
    Matrix X_s;
    Matrix Y_s;
    Matrix X_t;
};

/// Quantities treated as constants when differentiating one step.
struct FrozenContext {
    Matrix pseudo_t; ///< hard one-hot target pseudo-labels
    std::optional<double> s2_z_source, s2_z_target, s2_z_cross;
    std::optional<double> s2_y_source, s2_y_target;
    std::optional<double> s2_mmd_source, s2_mmd_target, s2_mmd_cross;
    Matrix B_s, B_t;   ///< regularized conditioning matrices
    Matrix HC_s, HC_t; ///< centered factors of B
};

inline void check_batch(const AlignmentState& state, const Batch& batch) {
    if (batch.X_s.cols() < 2 || batch.X_t.cols() < 2)
        throw InputError("degenerate batch: need at least two samples per domain");
    if (batch.Y_s.cols() != batch.X_s.cols() || batch.Y_s.rows() != state.num_classes())
        throw InputError("batch: source labels do not match");
}

inline FrozenContext capture_context(const AlignmentState& state, const Batch& batch,
                                     const AlignmentConfig& config) {
    check_batch(state, batch);
    const ForwardResult fs = forward(state, batch.X_s);
    const ForwardResult ft = forward(state, batch.X_t);
    FrozenContext ctx;
    ctx.pseudo_t = harden(ft.Yhat);
    ctx.s2_z_source = resolve_bandwidth(config.kernel_x, fs.Z, fs.Z);
    ctx.s2_z_target = resolve_bandwidth(config.kernel_x, ft.Z, ft.Z);
    ctx.s2_z_cross = resolve_bandwidth(config.kernel_x, ft.Z, fs.Z);
    ctx.s2_y_source = resolve_bandwidth(config.kernel_y, batch.Y_s, batch.Y_s);
    ctx.s2_y_target = resolve_bandwidth(config.kernel_y, ctx.pseudo_t, ctx.pseudo_t);
    if (config.variant == AlignVariant::ckb_plus_mmd) {
        ctx.s2_mmd_source = resolve_bandwidth(config.kernel_y, batch.Y_s, batch.Y_s);
        ctx.s2_mmd_target = resolve_bandwidth(config.kernel_y, ft.Yhat, ft.Yhat);
        ctx.s2_mmd_cross = resolve_bandwidth(config.kernel_y, ft.Yhat, batch.Y_s);
    }
    const CkbOptions opts{config.epsilon, FactorMethod::evd};
    const auto side = [&](const Matrix& Y, const std::optional<double>& s2, Matrix& B, Matrix& HC) {
        B = b_matrix(center(gram(Y, Y, config.kernel_y, s2.value_or(0.0))), opts.epsilon);
        HC = c_factor(B);
        HC.rowwise() -= HC.colwise().mean();
    };
    side(batch.Y_s, ctx.s2_y_source, ctx.B_s, ctx.HC_s);
    side(ctx.pseudo_t, ctx.s2_y_target, ctx.B_t, ctx.HC_t);
    return ctx;
}

namespace detail {

inline GramBundle feature_bundle(const Matrix& Zs, const Matrix& Zt, const Batch& batch, const FrozenContext& ctx,
                                 const AlignmentConfig& config) {
    GramBundle b;
    b.n = Zs.cols();
    b.m = Zt.cols();
    b.G_X_s = center(gram(Zs, Zs, config.kernel_x, ctx.s2_z_source.value_or(0.0)));
    b.G_X_t = center(gram(Zt, Zt, config.kernel_x, ctx.s2_z_target.value_or(0.0)));
    b.K_ts = gram(Zt, Zs, config.kernel_x, ctx.s2_z_cross.value_or(0.0));
    b.G_Y_s = center(gram(batch.Y_s, batch.Y_s, config.kernel_y, ctx.s2_y_source.value_or(0.0)));
    b.G_Y_t = center(gram(ctx.pseudo_t, ctx.pseudo_t, config.kernel_y, ctx.s2_y_target.value_or(0.0)));
    b.sigma2 = {ctx.s2_z_source, ctx.s2_z_target, ctx.s2_z_cross, ctx.s2_y_source, ctx.s2_y_target, std::nullopt};
    return b;
}

inline double soft_label_mmd(const Matrix& Ys, const Matrix& Yt_soft, const FrozenContext& ctx,
                             const AlignmentConfig& config) {
    const double n = static_cast<double>(Ys.cols()), m = static_cast<double>(Yt_soft.cols());
    return gram(Ys, Ys, config.kernel_y, ctx.s2_mmd_source.value_or(0.0)).sum() / (n * n) +
           gram(Yt_soft, Yt_soft, config.kernel_y, ctx.s2_mmd_target.value_or(0.0)).sum() / (m * m) -
           2.0 * gram(Yt_soft, Ys, config.kernel_y, ctx.s2_mmd_cross.value_or(0.0)).sum() / (n * m);
}

/// Adds the gradients of Σ Γ∘K(A, B) with respect to A and B.
inline void kernel_backward(const Matrix& A, const Matrix& B, const Matrix& K, const Matrix& Gamma,
                            const KernelSpec& spec, double sigma2, Matrix* dA, Matrix* dB) {
    if (spec.family == KernelFamily::linear) {
        if (dA)
            *dA += B * Gamma.transpose();
        if (dB)
            *dB += A * Gamma;
        return;
    }
    const Matrix E = Gamma.cwiseProduct(K);
    const double c = 2.0 / sigma2;
    if (dA)
        *dA -= c * (A * E.rowwise().sum().asDiagonal() - B * E.transpose());
    if (dB)
        *dB += c * (A * E - B * E.colwise().sum().transpose().asDiagonal());
}

/// Softmax backward for column-wise probabilities.
inline Matrix softmax_backward(const Matrix& P, const Matrix& dP) {
    Matrix out(P.rows(), P.cols());
    for (Index j = 0; j < P.cols(); ++j) {
        const double inner = P.col(j).dot(dP.col(j));
        out.col(j) = P.col(j).cwiseProduct((dP.col(j).array() - inner).matrix());
    }
    return out;
}

} // namespace detail

/// Evaluates every loss term with the given constants. `lambda2_effective`
/// replaces config.lambda2 in the total (it is 0 during warmup).
inline LossRecord objective(const AlignmentState& state, const Batch& batch, const AlignmentConfig& config,
                            const FrozenContext& ctx, double lambda2_effective) {
    check_batch(state, batch);
    const ForwardResult fs = forward(state, batch.X_s);
    const ForwardResult ft = forward(state, batch.X_t);
    LossRecord rec;
    rec.step = state.step;
    rec.ce = loss_ce(fs.Yhat, batch.Y_s) / static_cast<double>(batch.X_s.cols());
    rec.entropy = loss_entropy(ft.Yhat) / static_cast<double>(batch.X_t.cols());
    rec.ckb = ckb_sq(detail::feature_bundle(fs.Z, ft.Z, batch, ctx, config), {config.epsilon, FactorMethod::evd}).value;
    double alignment = rec.ckb;
    if (config.variant == AlignVariant::ckb_plus_mmd) {
        rec.mmd = detail::soft_label_mmd(batch.Y_s, ft.Yhat, ctx, config);
        alignment += *rec.mmd;
    }
    rec.lambda2_effective = lambda2_effective;
    rec.total = rec.ce + config.lambda1 * rec.entropy + lambda2_effective * alignment;
    return rec;
}

/// Context captured from the current state, then evaluated.
inline LossRecord objective(const AlignmentState& state, const Batch& batch, const AlignmentConfig& config) {
    return objective(state, batch, config, capture_context(state, batch, config), config.lambda2);
}

struct Gradients {
    Matrix W_f;
    Vector b_f;
    Matrix W_c;
    Vector b_c;

    bool all_finite() const { return W_f.allFinite() && b_f.allFinite() && W_c.allFinite() && b_c.allFinite(); }
};

inline Gradients gradient(const AlignmentState& state, const Batch& batch, const AlignmentConfig& config,
                          const FrozenContext& ctx, double lambda2_effective) {
    check_batch(state, batch);
    const ForwardResult fs = forward(state, batch.X_s);
    const ForwardResult ft = forward(state, batch.X_t);
    const double n = static_cast<double>(batch.X_s.cols());
    const double m = static_cast<double>(batch.X_t.cols());
    const Index K = state.num_classes();

    // Gradients with respect to the probabilities.
    Matrix dYs = Matrix::Zero(K, batch.X_s.cols());
    for (Index j = 0; j < dYs.cols(); ++j)
        for (Index k = 0; k < K; ++k)
            if (batch.Y_s(k, j) != 0.0 && fs.Yhat(k, j) > kProbabilityFloor)
                dYs(k, j) = -batch.Y_s(k, j) / fs.Yhat(k, j) / n;
    Matrix dYt(K, batch.X_t.cols());
    for (Index j = 0; j < dYt.cols(); ++j)
        for (Index k = 0; k < K; ++k) {
            const double p = ft.Yhat(k, j);
            dYt(k, j) = config.lambda1 *
                        (p > kProbabilityFloor ? -(std::log(p) + 1.0) : -std::log(kProbabilityFloor)) / m;
        }

    Matrix dZs = Matrix::Zero(fs.Z.rows(), fs.Z.cols());
    Matrix dZt = Matrix::Zero(ft.Z.rows(), ft.Z.cols());

    if (lambda2_effective != 0.0) {
        const double w = lambda2_effective;
        const KernelSpec& kx = config.kernel_x;

        // Trace terms: tr(H K H B)/p = Σ K ∘ (H B H)/p.
        const auto trace_grad = [&](const Matrix& Z, const Matrix& B, const std::optional<double>& s2, Matrix& dZ) {
            const Matrix Kz = gram(Z, Z, kx, s2.value_or(0.0));
            const Matrix Gamma = (w / static_cast<double>(Z.cols())) * center(B);
            detail::kernel_backward(Z, Z, Kz, Gamma, kx, s2.value_or(0.0), &dZ, &dZ);
        };
        trace_grad(fs.Z, ctx.B_s, ctx.s2_z_source, dZs);
        trace_grad(ft.Z, ctx.B_t, ctx.s2_z_target, dZt);

        // Cross term: −2/√(nm)·‖HC_tᵀ K_ts HC_s‖_*, subgradient U Vᵀ.
        const Matrix Kts = gram(ft.Z, fs.Z, kx, ctx.s2_z_cross.value_or(0.0));
        const Matrix inner = ctx.HC_t.transpose() * (Kts * ctx.HC_s);
        const NuclearNormWithGradient nn = nuclear_norm_with_gradient(inner);
        const Matrix Gamma = (-2.0 * w / std::sqrt(n * m)) * (ctx.HC_t * nn.gradient * ctx.HC_s.transpose());
        detail::kernel_backward(ft.Z, fs.Z, Kts, Gamma, kx, ctx.s2_z_cross.value_or(0.0), &dZt, &dZs);

        if (config.variant == AlignVariant::ckb_plus_mmd) {
            const KernelSpec& ky = config.kernel_y;
            const Matrix Ktt = gram(ft.Yhat, ft.Yhat, ky, ctx.s2_mmd_target.value_or(0.0));
            const Matrix Gt = Matrix::Constant(Ktt.rows(), Ktt.cols(), w / (m * m));
            detail::kernel_backward(ft.Yhat, ft.Yhat, Ktt, Gt, ky, ctx.s2_mmd_target.value_or(0.0), &dYt, &dYt);
            const Matrix Kc = gram(ft.Yhat, batch.Y_s, ky, ctx.s2_mmd_cross.value_or(0.0));
            const Matrix Gc = Matrix::Constant(Kc.rows(), Kc.cols(), -2.0 * w / (n * m));
            detail::kernel_backward(ft.Yhat, batch.Y_s, Kc, Gc, ky, ctx.s2_mmd_cross.value_or(0.0), &dYt, nullptr);
        }
    }

    const Matrix dLs = detail::softmax_backward(fs.Yhat, dYs);
    const Matrix dLt = detail::softmax_backward(ft.Yhat, dYt);
    Gradients g;
    g.W_c = dLs * fs.Z.transpose() + dLt * ft.Z.transpose();
    g.b_c = dLs.rowwise().sum() + dLt.rowwise().sum();
    dZs += state.W_c.transpose() * dLs;
    dZt += state.W_c.transpose() * dLt;
    g.W_f = dZs * batch.X_s.transpose() + dZt * batch.X_t.transpose();
    g.b_f = dZs.rowwise().sum() + dZt.rowwise().sum();
    if (!g.all_finite())
        throw NumericalError("non-finite gradient at step " + std::to_string(state.step));
    return g;
}

inline Gradients gradient(const AlignmentState& state, const Batch& batch, const AlignmentConfig& config) {
    return gradient(state, batch, config, capture_context(state, batch, config), config.lambda2);
}

inline std::vector<int> predict(const AlignmentState& state, const Eigen::Ref<const Matrix>& X) {
    return argmax_labels(forward(state, X).Yhat);
}

inline double accuracy(const AlignmentState& state, const Eigen::Ref<const Matrix>& X,
                       const std::vector<int>& labels) {
    if (static_cast<Index>(labels.size()) != X.cols())
        throw InputError("accuracy: label count does not match samples");
    if (labels.empty())
        return 0.0;
    const std::vector<int> pred = predict(state, X);
    std::size_t hits = 0;
    for (std::size_t j = 0; j < labels.size(); ++j)
        hits += pred[j] == labels[j] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(labels.size());
}

struct TrainReport {
    std::vector<LossRecord> history;
    double source_accuracy_before = 0.0, source_accuracy_after = 0.0;
    std::optional<double> target_accuracy_before, target_accuracy_after;
    long steps = 0;
};

struct TrainResult {
    AlignmentState state;
    TrainReport report;
};

/// Stratified source ordering: classes shuffled independently, then dealt
/// round-robin so every window of the ordering is close to class-balanced.
inline std::vector<Index> stratified_order(const std::vector<int>& labels, int K, Rng& rng) {
    std::vector<std::vector<Index>> by_class(static_cast<std::size_t>(K));
    for (std::size_t j = 0; j < labels.size(); ++j)
        by_class[static_cast<std::size_t>(labels[j])].push_back(static_cast<Index>(j));
    for (auto& c : by_class)
        rng.shuffle(c);
    std::vector<Index> order;
    order.reserve(labels.size());
    for (std::size_t r = 0; order.size() < labels.size(); ++r)
        for (auto& c : by_class)
            if (r < c.size())
                order.push_back(c[r]);
    return order;
}

inline Matrix gather_columns(const Eigen::Ref<const Matrix>& M, const std::vector<Index>& idx) {
    Matrix out(M.rows(), static_cast<Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j)
        out.col(static_cast<Index>(j)) = M.col(idx[j]);
    return out;
}

/// Trains on a labeled source and the target features only. Target labels,
/// when supplied, are used for the before/after accuracies and nothing else.
inline TrainResult train(const LabeledDataset& source, const Eigen::Ref<const Matrix>& target_X,
                         const AlignmentConfig& config,
                         const std::optional<std::vector<int>>& target_eval_labels = std::nullopt) {
    config.validate();
    validate(source);
    if (!source.has_labels())
        throw InputError("train: source labels required");
    if (target_X.rows() != source.dim())
        throw InputError("train: source and target feature dimensions differ");
    require_finite(target_X, "target features");
    if (source.size() < 2 || target_X.cols() < 2)
        throw InputError("train: need at least two samples per domain");

    const int K = static_cast<int>(source.num_classes());
    const std::vector<int> source_labels = argmax_labels(*source.Y);
    TrainResult result;
    result.state = AlignmentState::initialize(source.dim(), config.feature_dim_out, K, config.seed);
    AlignmentState& state = result.state;
    TrainReport& report = result.report;

    report.source_accuracy_before = accuracy(state, source.X, source_labels);
    if (target_eval_labels)
        report.target_accuracy_before = accuracy(state, target_X, *target_eval_labels);

    Rng rng(config.seed ^ 0x9E3779B97F4A7C15ULL);
    const Index n_s = source.size(), n_t = target_X.cols();
    const Index half_s = std::min<Index>(config.batch_size / 2, n_s);
    const Index half_t = std::min<Index>(config.batch_size / 2, n_t);
    const Index steps_per_epoch = std::max<Index>(1, n_s / half_s);

    std::vector<Index> target_order(static_cast<std::size_t>(n_t));
    for (Index j = 0; j < n_t; ++j)
        target_order[static_cast<std::size_t>(j)] = j;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const std::vector<Index> source_order = stratified_order(source_labels, K, rng);
        rng.shuffle(target_order);
        const double lambda2_eff = epoch < config.warmup_epochs ? 0.0 : config.lambda2;
        for (Index b = 0; b < steps_per_epoch; ++b) {
            std::vector<Index> is(static_cast<std::size_t>(half_s)), it(static_cast<std::size_t>(half_t));
            for (Index k = 0; k < half_s; ++k)
                is[static_cast<std::size_t>(k)] = source_order[static_cast<std::size_t>((b * half_s + k) % n_s)];
            for (Index k = 0; k < half_t; ++k)
                it[static_cast<std::size_t>(k)] = target_order[static_cast<std::size_t>((b * half_t + k) % n_t)];
            const Batch batch{gather_columns(source.X, is), gather_columns(*source.Y, is),
                              gather_columns(target_X, it)};

            const std::string where = "step " + std::to_string(state.step) + " (epoch " + std::to_string(epoch) + ")";
            LossRecord rec;
            Gradients g;
            try {
                const FrozenContext ctx = capture_context(state, batch, config);
                rec = objective(state, batch, config, ctx, lambda2_eff);
                if (!std::isfinite(rec.total))
                    throw NumericalError("non-finite loss");
                g = gradient(state, batch, config, ctx, lambda2_eff);
                if (!g.all_finite())
                    throw NumericalError("non-finite gradient");
            } catch (const NumericalError& e) {
                throw NumericalError(where + ": " + e.what());
            }
            rec.epoch = epoch;
            state.W_f -= config.learning_rate * g.W_f;
            state.b_f -= config.learning_rate * g.b_f;
            state.W_c -= config.learning_rate * g.W_c;
            state.b_c -= config.learning_rate * g.b_c;
            state.loss_history.push_back(rec);
            ++state.step;
        }
    }

    report.history = state.loss_history;
    report.steps = state.step;
    report.source_accuracy_after = accuracy(state, source.X, source_labels);
    if (target_eval_labels)
        report.target_accuracy_after = accuracy(state, target_X, *target_eval_labels);
    return result;
}

} // namespace ckb
