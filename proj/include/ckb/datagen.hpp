#pragma once

#include <ckb/error.hpp>
#include <ckb/rng.hpp>
#include <ckb/types.hpp>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace ckb {

/// Class-conditional Gaussian source domain and a target domain whose class
/// conditionals are rotated (in the plane of the first two coordinates,
/// about the origin) and then translated per class.
struct ShiftConfig {
    int dim = 2;
    int num_classes = 3;
    std::vector<Vector> means;
    double spread = 1.0; ///< per-coordinate standard deviation
    double rotation_deg = 0.0;
    /// One entry per class, or a single entry shared by all classes, or empty.
    std::vector<Vector> translations;
    int samples_per_class = 100;
    std::uint64_t seed = 0;

    void validate() const {
        if (dim < 1)
            throw InputError("ShiftConfig: dim must be positive");
        if (num_classes < 2)
            throw InputError("ShiftConfig: need at least two classes");
        if (samples_per_class < 2)
            throw InputError("ShiftConfig: need at least two samples per class");
        if (static_cast<int>(means.size()) != num_classes)
            throw InputError("ShiftConfig: one mean per class required");
        for (const Vector& mu : means)
            if (mu.size() != dim || !mu.allFinite())
                throw InputError("ShiftConfig: class mean has wrong dimension");
        if (!(spread > 0.0) || !std::isfinite(spread))
            throw InputError("ShiftConfig: spread must be positive");
        if (!std::isfinite(rotation_deg))
            throw InputError("ShiftConfig: rotation must be finite");
        if (dim < 2 && std::fmod(std::abs(rotation_deg), 360.0) != 0.0)
            throw InputError("ShiftConfig: rotation needs at least two dimensions");
        if (!translations.empty() && translations.size() != 1 &&
            static_cast<int>(translations.size()) != num_classes)
            throw InputError("ShiftConfig: translations must be empty, shared, or per class");
        for (const Vector& t : translations)
            if (t.size() != dim || !t.allFinite())
                throw InputError("ShiftConfig: translation has wrong dimension");
    }

    Vector translation(int k) const {
        if (translations.empty())
            return Vector::Zero(dim);
        return translations.size() == 1 ? translations[0] : translations[static_cast<std::size_t>(k)];
    }

    /// Three classes along the horizontal axis, target rotated by 30° and
    /// moved 2.5 units along the normal of the rotation's bisector. A shared
    /// linear projection onto the bisector aligns the domains exactly.
    static ShiftConfig default_benchmark(std::uint64_t seed = 0) {
        ShiftConfig cfg;
        cfg.dim = 2;
        cfg.num_classes = 3;
        cfg.means = {Vector{{-2.0, 0.0}}, Vector{{0.0, 0.0}}, Vector{{2.0, 0.0}}};
        cfg.spread = 0.5;
        cfg.rotation_deg = 30.0;
        const double normal = (90.0 + 15.0) * std::numbers::pi / 180.0;
        cfg.translations = {Vector{{2.5 * std::cos(normal), 2.5 * std::sin(normal)}}};
        cfg.samples_per_class = 100;
        cfg.seed = seed;
        return cfg;
    }

    /// Two antipodal classes with the target rotated by 180°: the feature
    /// marginal is unchanged while the class conditionals trade places.
    static ShiftConfig swap_benchmark(std::uint64_t seed = 0) {
        ShiftConfig cfg;
        cfg.dim = 2;
        cfg.num_classes = 2;
        cfg.means = {Vector{{2.0, 0.0}}, Vector{{-2.0, 0.0}}};
        cfg.spread = 0.5;
        cfg.rotation_deg = 180.0;
        cfg.samples_per_class = 100;
        cfg.seed = seed;
        return cfg;
    }

    /// Source and target drawn from the same class conditionals.
    static ShiftConfig same_distribution(int samples_per_class, std::uint64_t seed = 0) {
        ShiftConfig cfg;
        cfg.dim = 2;
        cfg.num_classes = 2;
        cfg.means = {Vector{{1.0, 0.0}}, Vector{{-1.0, 0.0}}};
        cfg.spread = 1.0;
        cfg.samples_per_class = samples_per_class;
        cfg.seed = seed;
        return cfg;
    }
};

struct DomainPair {
    LabeledDataset source;
    LabeledDataset target; ///< labels are ground truth, flagged evaluation-only
};

inline Matrix plane_rotation(int dim, double degrees) {
    Matrix R = Matrix::Identity(dim, dim);
    if (dim < 2)
        return R;
    const double a = degrees * std::numbers::pi / 180.0;
    R(0, 0) = std::cos(a);
    R(0, 1) = -std::sin(a);
    R(1, 0) = std::sin(a);
    R(1, 1) = std::cos(a);
    return R;
}

/// Samples are stored class by class, so class proportions are exact.
inline DomainPair synth_conditional_shift(const ShiftConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    const Index per = cfg.samples_per_class;
    const Index total = per * cfg.num_classes;
    std::vector<int> labels(static_cast<std::size_t>(total));
    for (Index j = 0; j < total; ++j)
        labels[static_cast<std::size_t>(j)] = static_cast<int>(j / per);

    const auto draw = [&](const Matrix& R, bool shifted) {
        Matrix X(cfg.dim, total);
        for (Index j = 0; j < total; ++j) {
            const int k = labels[static_cast<std::size_t>(j)];
            Vector x = cfg.means[static_cast<std::size_t>(k)];
            for (int i = 0; i < cfg.dim; ++i)
                x(i) += cfg.spread * rng.normal();
            X.col(j) = shifted ? Vector(R * x + cfg.translation(k)) : x;
        }
        return X;
    };

    const Matrix R = plane_rotation(cfg.dim, cfg.rotation_deg);
    DomainPair pair;
    pair.source.X = draw(R, false);
    pair.source.Y = one_hot(labels, cfg.num_classes);
    pair.source.name = "source";
    pair.target.X = draw(R, true);
    pair.target.Y = one_hot(labels, cfg.num_classes);
    pair.target.name = "target";
    pair.target.labels_eval_only = true;
    return pair;
}

} // namespace ckb
