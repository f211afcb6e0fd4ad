#pragma once

#include <ckb/error.hpp>
#include <ckb/types.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <string>

namespace ckb {

enum class KernelFamily { gaussian, linear };

/// Kernel family plus bandwidth policy. A gaussian kernel either carries a
/// fixed σ² or (when `sigma2` is empty) takes the mean squared pairwise
/// distance of the matrix it populates. Linear kernels ignore the bandwidth.
struct KernelSpec {
    KernelFamily family = KernelFamily::gaussian;
    std::optional<double> sigma2;

    static KernelSpec gaussian_adaptive() { return {KernelFamily::gaussian, std::nullopt}; }

    static KernelSpec gaussian_fixed(double sigma2) {
        KernelSpec spec{KernelFamily::gaussian, sigma2};
        spec.validate();
        return spec;
    }

    static KernelSpec linear() { return {KernelFamily::linear, std::nullopt}; }

    bool adaptive() const { return family == KernelFamily::gaussian && !sigma2; }

    void validate() const {
        if (family == KernelFamily::gaussian && sigma2 && !(*sigma2 > 0.0 && std::isfinite(*sigma2)))
            throw InputError("gaussian bandwidth must be positive and finite");
    }

    /// "gaussian", "gaussian:<sigma2>" or "linear".
    std::string to_string() const {
        if (family == KernelFamily::linear)
            return "linear";
        if (sigma2) {
            char buf[32];
            const auto res = std::to_chars(buf, buf + sizeof(buf), *sigma2);
            return "gaussian:" + std::string(buf, res.ptr);
        }
        return "gaussian";
    }

    static KernelSpec parse(const std::string& text) {
        if (text == "linear")
            return linear();
        if (text == "gaussian" || text == "gaussian:adaptive")
            return gaussian_adaptive();
        if (text.rfind("gaussian:", 0) == 0) {
            const std::string value = text.substr(9);
            std::size_t used = 0;
            double s2 = 0.0;
            try {
                s2 = std::stod(value, &used);
            } catch (const std::exception&) {
                throw InputError("bad kernel bandwidth '" + value + "'");
            }
            if (used != value.size())
                throw InputError("bad kernel bandwidth '" + value + "'");
            return gaussian_fixed(s2);
        }
        throw InputError("unknown kernel '" + text + "' (expected gaussian[:sigma2] or linear)");
    }
};

/// σ² used for the gaussian matrices of one discrepancy evaluation.
/// Empty entries belong to linear kernels or to blocks that were not built.
struct BandwidthLog {
    std::optional<double> x_source, x_target, x_cross;
    std::optional<double> y_source, y_target, y_cross;
};

/// Substituted for an adaptive bandwidth when every distance is zero.
inline constexpr double kDegenerateFallbackSigma2 = 1.0;

inline double kernel_eval(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y,
                          const KernelSpec& spec, double sigma2) {
    if (x.size() != y.size())
        throw InputError("kernel_eval: dimension mismatch");
    if (spec.family == KernelFamily::linear)
        return x.dot(y);
    if (!(sigma2 > 0.0))
        throw InputError("kernel_eval: gaussian bandwidth must be positive");
    return std::exp(-(x - y).squaredNorm() / sigma2);
}

namespace detail {

inline void require_same_dim(const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Matrix>& B,
                             const char* who) {
    if (A.rows() != B.rows())
        throw InputError(std::string(who) + ": feature dimensions differ (" +
                         std::to_string(A.rows()) + " vs " + std::to_string(B.rows()) + ")");
}

inline bool same_storage(const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Matrix>& B) {
    return A.data() == B.data() && A.rows() == B.rows() && A.cols() == B.cols();
}

} // namespace detail

/// Squared Euclidean distances between the columns of A (d×p) and B (d×q).
/// Entries are accumulated coordinate by coordinate, so identical columns
/// give exactly zero.
inline Matrix squared_distances(const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Matrix>& B) {
    detail::require_same_dim(A, B, "squared_distances");
    const Index p = A.cols(), q = B.cols(), d = A.rows();
    Matrix D(p, q);
    if (detail::same_storage(A, B)) {
        for (Index j = 0; j < q; ++j) {
            D(j, j) = 0.0;
            for (Index i = 0; i < j; ++i) {
                double s = 0.0;
                for (Index k = 0; k < d; ++k) {
                    const double t = A(k, i) - A(k, j);
                    s += t * t;
                }
                D(i, j) = s;
                D(j, i) = s;
            }
        }
        return D;
    }
    for (Index j = 0; j < q; ++j)
        for (Index i = 0; i < p; ++i) {
            double s = 0.0;
            for (Index k = 0; k < d; ++k) {
                const double t = A(k, i) - B(k, j);
                s += t * t;
            }
            D(i, j) = s;
        }
    return D;
}

/// Mean of all p·q squared distances between columns of A and B. Pass the
/// same matrix twice for a square kernel matrix; its zero diagonal counts.
inline double adaptive_bandwidth(const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Matrix>& B) {
    detail::require_same_dim(A, B, "adaptive_bandwidth");
    const Index p = A.cols(), q = B.cols();
    if (p == 0 || q == 0 || p + q < 2)
        throw InputError("adaptive_bandwidth: need at least two samples");
    const double mean = squared_distances(A, B).mean();
    if (!(mean > 0.0))
        throw DegenerateBandwidth();
    return mean;
}

/// Bandwidth a kernel matrix between A and B will use: empty for linear,
/// the fixed value, or the adaptive mean (falling back to 1 when degenerate).
inline std::optional<double> resolve_bandwidth(const KernelSpec& spec, const Eigen::Ref<const Matrix>& A,
                                               const Eigen::Ref<const Matrix>& B) {
    spec.validate();
    if (spec.family == KernelFamily::linear)
        return std::nullopt;
    if (spec.sigma2)
        return spec.sigma2;
    try {
        return adaptive_bandwidth(A, B);
    } catch (const DegenerateBandwidth&) {
        return kDegenerateFallbackSigma2;
    }
}

/// p×q kernel matrix with entry (i, j) = k(A_i, B_j).
inline Matrix gram(const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Matrix>& B,
                   const KernelSpec& spec, double sigma2) {
    detail::require_same_dim(A, B, "gram");
    if (spec.family == KernelFamily::linear) {
        Matrix K = A.transpose() * B;
        if (detail::same_storage(A, B))
            K = 0.5 * (K + K.transpose()).eval();
        return K;
    }
    if (!(sigma2 > 0.0))
        throw InputError("gram: gaussian bandwidth must be positive");
    return (-squared_distances(A, B).array() / sigma2).exp().matrix();
}

/// Convenience overload resolving the bandwidth from the spec.
inline Matrix gram(const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Matrix>& B,
                   const KernelSpec& spec) {
    return gram(A, B, spec, resolve_bandwidth(spec, A, B).value_or(0.0));
}

/// H_p K H_q for any shape, computed as row and column mean removal.
inline Matrix double_center(const Eigen::Ref<const Matrix>& K) {
    if (K.size() == 0)
        return Matrix(K.rows(), K.cols());
    const Vector row_mean = K.rowwise().mean();
    const Eigen::RowVectorXd col_mean = K.colwise().mean();
    const double grand = K.mean();
    Matrix G = K;
    G.colwise() -= row_mean;
    G.rowwise() -= col_mean;
    G.array() += grand;
    return G;
}

/// H K H with H = I − 11ᵀ/p.
inline Matrix center(const Eigen::Ref<const Matrix>& K) {
    if (K.rows() != K.cols())
        throw InputError("center: matrix is not square");
    Matrix G = double_center(K);
    return 0.5 * (G + G.transpose());
}

/// Centered Gram blocks of a source/target pair plus the raw cross matrix.
/// K_ts has target samples on rows and source samples on columns.
struct GramBundle {
    Matrix G_X_s, G_Y_s, G_X_t, G_Y_t;
    Matrix K_ts;
    Index n = 0, m = 0;
    BandwidthLog sigma2;
};

inline GramBundle build_gram_bundle(const LabeledDataset& Ds, const LabeledDataset& Dt,
                                    const KernelSpec& spec_x, const KernelSpec& spec_y) {
    if (Ds.size() == 0 || Dt.size() == 0)
        throw InputError("build_gram_bundle: empty dataset");
    if (Ds.size() < 2 || Dt.size() < 2)
        throw InputError("build_gram_bundle: need at least two samples per domain");
    if (Ds.dim() != Dt.dim())
        throw InputError("build_gram_bundle: feature dimensions differ");
    const Matrix& Ys = Ds.labels();
    const Matrix& Yt = Dt.labels();
    if (Ys.rows() != Yt.rows())
        throw InputError("build_gram_bundle: label dimensions differ");

    GramBundle b;
    b.n = Ds.size();
    b.m = Dt.size();
    b.sigma2.x_source = resolve_bandwidth(spec_x, Ds.X, Ds.X);
    b.sigma2.x_target = resolve_bandwidth(spec_x, Dt.X, Dt.X);
    b.sigma2.x_cross = resolve_bandwidth(spec_x, Dt.X, Ds.X);
    b.sigma2.y_source = resolve_bandwidth(spec_y, Ys, Ys);
    b.sigma2.y_target = resolve_bandwidth(spec_y, Yt, Yt);

    b.G_X_s = center(gram(Ds.X, Ds.X, spec_x, b.sigma2.x_source.value_or(0.0)));
    b.G_X_t = center(gram(Dt.X, Dt.X, spec_x, b.sigma2.x_target.value_or(0.0)));
    b.G_Y_s = center(gram(Ys, Ys, spec_y, b.sigma2.y_source.value_or(0.0)));
    b.G_Y_t = center(gram(Yt, Yt, spec_y, b.sigma2.y_target.value_or(0.0)));
    b.K_ts = gram(Dt.X, Ds.X, spec_x, b.sigma2.x_cross.value_or(0.0));
    return b;
}

/// Checks symmetry, centering and PSD-ness of the square blocks. Returns an
/// empty string when everything holds, otherwise a description.
inline std::string bundle_violation(const GramBundle& b) {
    const auto check = [](const Matrix& G, const char* name) -> std::string {
        if (!G.allFinite())
            return std::string(name) + " has non-finite entries";
        if ((G - G.transpose()).cwiseAbs().maxCoeff() > 1e-10)
            return std::string(name) + " is not symmetric";
        const double scale = static_cast<double>(G.rows()) * std::max(G.cwiseAbs().maxCoeff(), 1e-300);
        if (G.rowwise().sum().cwiseAbs().maxCoeff() > 1e-8 * scale)
            return std::string(name) + " is not centered";
        Eigen::SelfAdjointEigenSolver<Matrix> es(G, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-8 * std::max(G.trace(), 0.0) - 1e-300)
            return std::string(name) + " is not PSD";
        return {};
    };
    for (auto [G, name] : {std::pair{&b.G_X_s, "G_X_s"}, std::pair{&b.G_X_t, "G_X_t"},
                           std::pair{&b.G_Y_s, "G_Y_s"}, std::pair{&b.G_Y_t, "G_Y_t"}}) {
        if (std::string why = check(*G, name); !why.empty())
            return why;
    }
    if (b.K_ts.rows() != b.m || b.K_ts.cols() != b.n)
        return "K_ts has the wrong shape";
    return {};
}

} // namespace ckb
