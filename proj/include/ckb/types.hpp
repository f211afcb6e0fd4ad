#pragma once

#include <ckb/error.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace ckb {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Samples stored column-wise: X is d×p, Y (when present) is K×p with one
/// probability vector per column.
struct LabeledDataset {
    Matrix X;
    std::optional<Matrix> Y;
    std::string name;
    /// Labels may only be used to score predictions, never to fit.
    bool labels_eval_only = false;

    Index dim() const { return X.rows(); }
    Index size() const { return X.cols(); }
    Index num_classes() const { return Y ? Y->rows() : 0; }
    bool has_labels() const { return Y.has_value(); }

    const Matrix& labels() const {
        if (!Y)
            throw InputError("dataset '" + name + "' has no labels");
        return *Y;
    }
};

inline void require_finite(const Eigen::Ref<const Matrix>& M, const std::string& what) {
    if (!M.allFinite())
        throw InputError(what + " contains non-finite entries");
}

/// Columns must be probability vectors: entries >= 0 summing to 1 ± 1e-6.
inline void require_probability_columns(const Eigen::Ref<const Matrix>& Y,
                                        const std::string& what) {
    require_finite(Y, what);
    for (Index j = 0; j < Y.cols(); ++j) {
        if ((Y.col(j).array() < 0.0).any())
            throw InputError(what + ": column " + std::to_string(j) + " has negative entries");
        if (std::abs(Y.col(j).sum() - 1.0) > 1e-6)
            throw InputError(what + ": column " + std::to_string(j) + " does not sum to 1");
    }
}

inline void validate(const LabeledDataset& D) {
    if (D.size() == 0)
        throw InputError("dataset '" + D.name + "' is empty");
    require_finite(D.X, "features of '" + D.name + "'");
    if (D.Y) {
        if (D.Y->cols() != D.X.cols())
            throw InputError("dataset '" + D.name + "': label and feature counts differ");
        require_probability_columns(*D.Y, "labels of '" + D.name + "'");
    }
}

inline Matrix one_hot(const std::vector<int>& labels, int num_classes) {
    Matrix Y = Matrix::Zero(num_classes, static_cast<Index>(labels.size()));
    for (std::size_t j = 0; j < labels.size(); ++j) {
        if (labels[j] < 0 || labels[j] >= num_classes)
            throw InputError("label " + std::to_string(labels[j]) + " outside [0, " +
                             std::to_string(num_classes) + ")");
        Y(labels[j], static_cast<Index>(j)) = 1.0;
    }
    return Y;
}

/// Column-wise argmax; ties go to the lowest class index.
inline std::vector<int> argmax_labels(const Eigen::Ref<const Matrix>& Y) {
    std::vector<int> out(static_cast<std::size_t>(Y.cols()));
    for (Index j = 0; j < Y.cols(); ++j) {
        Index best = 0;
        for (Index k = 1; k < Y.rows(); ++k)
            if (Y(k, j) > Y(best, j))
                best = k;
        out[static_cast<std::size_t>(j)] = static_cast<int>(best);
    }
    return out;
}

/// Hard one-hot matrix from the column-wise argmax of Y.
inline Matrix harden(const Eigen::Ref<const Matrix>& Y) {
    return one_hot(argmax_labels(Y), static_cast<int>(Y.rows()));
}

} // namespace ckb
