#include "support.hpp"

#include <gtest/gtest.h>

using namespace ckb;
using ckb::test::random_matrix;

TEST(KernelEval, GaussianAndLinear) {
    const Vector x{{1.0, 2.0}}, y{{3.0, 4.0}};
    const KernelSpec g = KernelSpec::gaussian_fixed(1.0);
    EXPECT_DOUBLE_EQ(kernel_eval(x, x, g, 1.0), 1.0);
    // ‖x − y‖² = 8
    EXPECT_NEAR(kernel_eval(x, y, g, 8.0), std::exp(-1.0), 1e-15);
    EXPECT_NEAR(std::exp(-1.0), 0.367879, 1e-6);
    EXPECT_DOUBLE_EQ(kernel_eval(x, y, KernelSpec::linear(), 0.0), 11.0);
}

TEST(KernelEval, Errors) {
    const Vector x{{1.0, 2.0}}, z{{1.0}};
    EXPECT_THROW(kernel_eval(x, z, KernelSpec::linear(), 0.0), InputError);
    EXPECT_THROW(kernel_eval(x, x, KernelSpec::gaussian_adaptive(), 0.0), InputError);
    EXPECT_THROW(kernel_eval(x, x, KernelSpec::gaussian_adaptive(), -1.0), InputError);
    EXPECT_THROW(KernelSpec::gaussian_fixed(0.0), InputError);
}

TEST(KernelSpec, ParseAndPrint) {
    EXPECT_TRUE(KernelSpec::parse("gaussian").adaptive());
    EXPECT_EQ(KernelSpec::parse("linear").family, KernelFamily::linear);
    const KernelSpec f = KernelSpec::parse("gaussian:0.125");
    ASSERT_TRUE(f.sigma2);
    EXPECT_EQ(*f.sigma2, 0.125);
    EXPECT_EQ(f.to_string(), "gaussian:0.125");
    EXPECT_EQ(KernelSpec::parse(KernelSpec::gaussian_fixed(0.1).to_string()).sigma2, 0.1);
    EXPECT_THROW(KernelSpec::parse("laplace"), InputError);
    EXPECT_THROW(KernelSpec::parse("gaussian:-2"), InputError);
    EXPECT_THROW(KernelSpec::parse("gaussian:2x"), InputError);
}

TEST(AdaptiveBandwidth, Enumerated) {
    const Matrix A{{0.0, 2.0}};
    EXPECT_DOUBLE_EQ(adaptive_bandwidth(A, A), 2.0);
    EXPECT_DOUBLE_EQ(adaptive_bandwidth(Matrix{{0.0}}, Matrix{{3.0}}), 9.0);
}

TEST(AdaptiveBandwidth, StandardNormalCloud) {
    Rng rng(11);
    const Matrix X = random_matrix(rng, 2, 100);
    EXPECT_NEAR(adaptive_bandwidth(X, X), 4.0, 0.5);
}

TEST(AdaptiveBandwidth, Degenerate) {
    const Matrix A = Matrix::Constant(3, 5, 1.5);
    EXPECT_THROW(adaptive_bandwidth(A, A), DegenerateBandwidth);
    try {
        adaptive_bandwidth(A, A);
    } catch (const DegenerateBandwidth& e) {
        EXPECT_STREQ(e.what(), "degenerate bandwidth");
    }
    EXPECT_EQ(resolve_bandwidth(KernelSpec::gaussian_adaptive(), A, A), kDegenerateFallbackSigma2);
    EXPECT_THROW(adaptive_bandwidth(Matrix(2, 0), Matrix(2, 0)), InputError);
}

TEST(AdaptiveBandwidth, TranslationAndScale) {
    Rng rng(3);
    const Matrix A = random_matrix(rng, 3, 12), B = random_matrix(rng, 3, 9);
    const double base = adaptive_bandwidth(A, B);
    Matrix At = A, Bt = B;
    const Vector shift{{5.0, -2.0, 0.25}};
    At.colwise() += shift;
    Bt.colwise() += shift;
    EXPECT_NEAR(adaptive_bandwidth(At, Bt), base, 1e-12 * base);
    EXPECT_NEAR(adaptive_bandwidth(3.0 * A, 3.0 * B), 9.0 * base, 1e-12 * base);
}

TEST(AdaptiveBandwidth, ResolvePolicy) {
    Rng rng(4);
    const Matrix A = random_matrix(rng, 2, 6);
    EXPECT_FALSE(resolve_bandwidth(KernelSpec::linear(), A, A));
    EXPECT_EQ(resolve_bandwidth(KernelSpec::gaussian_fixed(2.5), A, A), 2.5);
    EXPECT_DOUBLE_EQ(*resolve_bandwidth(KernelSpec::gaussian_adaptive(), A, A), adaptive_bandwidth(A, A));
}

TEST(Gram, UnitDiagonalAndIdentity) {
    Rng rng(5);
    const Matrix A = random_matrix(rng, 3, 7);
    const Matrix K = gram(A, A, KernelSpec::gaussian_adaptive());
    for (Index i = 0; i < 7; ++i)
        EXPECT_DOUBLE_EQ(K(i, i), 1.0);
    EXPECT_TRUE(gram(Matrix::Identity(2, 2), Matrix::Identity(2, 2), KernelSpec::linear()).isIdentity(0.0));
}

TEST(Gram, GaussianIsSymmetricPsd) {
    Rng rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix A = random_matrix(rng, 2, 5);
        const Matrix K = gram(A, A, KernelSpec::gaussian_adaptive());
        EXPECT_EQ((K - K.transpose()).cwiseAbs().maxCoeff(), 0.0);
        Eigen::SelfAdjointEigenSolver<Matrix> es(K);
        EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
        EXPECT_LE(K.maxCoeff(), 1.0);
        EXPECT_GT(K.minCoeff(), 0.0);
    }
}

TEST(Gram, CrossShapeAndDimensionMismatch) {
    Rng rng(7);
    const Matrix A = random_matrix(rng, 2, 4), B = random_matrix(rng, 2, 6);
    const Matrix K = gram(A, B, KernelSpec::gaussian_fixed(1.0));
    EXPECT_EQ(K.rows(), 4);
    EXPECT_EQ(K.cols(), 6);
    EXPECT_NEAR(K(1, 3), kernel_eval(A.col(1), B.col(3), KernelSpec::gaussian_fixed(1.0), 1.0), 1e-15);
    EXPECT_THROW(gram(A, random_matrix(rng, 3, 2), KernelSpec::linear()), InputError);
}

TEST(Gram, PermutationEquivariance) {
    Rng rng(8);
    const Matrix A = random_matrix(rng, 3, 9);
    std::vector<Index> perm{4, 2, 8, 0, 1, 7, 3, 6, 5};
    const Matrix PA = gather_columns(A, perm);
    for (const KernelSpec& spec : {KernelSpec::gaussian_adaptive(), KernelSpec::linear()}) {
        const Matrix K = gram(A, A, spec), KP = gram(PA, PA, spec);
        for (Index i = 0; i < 9; ++i)
            for (Index j = 0; j < 9; ++j)
                EXPECT_NEAR(KP(i, j), K(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]), 1e-12);
    }
}

TEST(Center, Examples) {
    EXPECT_EQ(center(Matrix::Constant(1, 1, 3.0))(0, 0), 0.0);
    EXPECT_LE(center(Matrix::Ones(4, 4)).cwiseAbs().maxCoeff(), 1e-15);
    const Matrix C = center(Matrix::Identity(2, 2));
    const Matrix expected{{0.5, -0.5}, {-0.5, 0.5}};
    EXPECT_LE((C - expected).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_THROW(center(Matrix::Ones(2, 3)), InputError);
}

TEST(Center, MatchesExplicitProductAndIsIdempotent) {
    Rng rng(9);
    const Matrix A = random_matrix(rng, 3, 8);
    const Matrix K = gram(A, A, KernelSpec::gaussian_adaptive());
    const Matrix H = Matrix::Identity(8, 8) - Matrix::Constant(8, 8, 1.0 / 8.0);
    const Matrix G = center(K);
    EXPECT_LE((G - H * K * H).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE((center(G) - G).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE(G.rowwise().sum().cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_EQ((G - G.transpose()).cwiseAbs().maxCoeff(), 0.0);

    const Matrix R = random_matrix(rng, 5, 7);
    const Matrix Hm = Matrix::Identity(5, 5) - Matrix::Constant(5, 5, 0.2);
    const Matrix Hn = Matrix::Identity(7, 7) - Matrix::Constant(7, 7, 1.0 / 7.0);
    EXPECT_LE((double_center(R) - Hm * R * Hn).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(GramBundle, IdenticalDomains) {
    Rng rng(10);
    const LabeledDataset D = test::random_dataset(rng, 3, 3, 20);
    const GramBundle b = build_gram_bundle(D, D, KernelSpec::gaussian_adaptive(), KernelSpec::gaussian_adaptive());
    EXPECT_EQ(b.G_X_s, b.G_X_t);
    EXPECT_LE((b.K_ts - b.K_ts.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(bundle_violation(b), "");
}

TEST(GramBundle, OneHotLinearLabelKernel) {
    Rng rng(12);
    const LabeledDataset D = test::random_dataset(rng, 2, 3, 15);
    const std::vector<int> labels = argmax_labels(*D.Y);
    const Matrix K = gram(*D.Y, *D.Y, KernelSpec::linear());
    for (Index i = 0; i < 15; ++i)
        for (Index j = 0; j < 15; ++j)
            EXPECT_EQ(K(i, j), labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)] ? 1.0 : 0.0);
}

TEST(GramBundle, RandomInvariantsAndShapes) {
    Rng rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        const LabeledDataset Ds = test::random_dataset(rng, 4, 3, 10 + trial);
        const LabeledDataset Dt = test::random_dataset(rng, 4, 3, 25 - trial);
        for (const KernelSpec& spec : {KernelSpec::gaussian_adaptive(), KernelSpec::linear()}) {
            const GramBundle b = build_gram_bundle(Ds, Dt, spec, spec);
            EXPECT_EQ(bundle_violation(b), "");
            EXPECT_EQ(b.K_ts.rows(), Dt.size());
            EXPECT_EQ(b.K_ts.cols(), Ds.size());
            EXPECT_EQ(b.sigma2.x_cross.has_value(), spec.adaptive());
        }
    }
}

TEST(GramBundle, Errors) {
    Rng rng(14);
    LabeledDataset Ds = test::random_dataset(rng, 2, 2, 10);
    LabeledDataset tiny = test::random_dataset(rng, 2, 2, 10);
    tiny.X = tiny.X.leftCols(1).eval();
    tiny.Y = tiny.Y->leftCols(1).eval();
    const KernelSpec g = KernelSpec::gaussian_adaptive();
    EXPECT_THROW(build_gram_bundle(Ds, tiny, g, g), InputError);
    LabeledDataset wide = test::random_dataset(rng, 3, 2, 10);
    EXPECT_THROW(build_gram_bundle(Ds, wide, g, g), InputError);
    LabeledDataset unlabeled = Ds;
    unlabeled.Y.reset();
    EXPECT_THROW(build_gram_bundle(Ds, unlabeled, g, g), InputError);
    LabeledDataset more_classes = test::random_dataset(rng, 2, 3, 10);
    EXPECT_THROW(build_gram_bundle(Ds, more_classes, g, g), InputError);
}
