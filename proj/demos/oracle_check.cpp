// Kernel-side CKB estimate against the explicit-feature computation for
// linear kernels. The two should agree to rounding.

#include <ckb/ckb.hpp>

#include <cmath>
#include <cstdio>

int main() {
    ckb::Rng rng(7);
    const int d = 4, K = 3;
    const auto draw = [&](int p, double shift) {
        std::vector<int> labels(static_cast<std::size_t>(p));
        ckb::LabeledDataset D;
        D.X.resize(d, p);
        for (int j = 0; j < p; ++j) {
            labels[static_cast<std::size_t>(j)] = j % K;
            for (int i = 0; i < d; ++i)
                D.X(i, j) = shift * labels[static_cast<std::size_t>(j)] + rng.normal();
        }
        D.Y = ckb::one_hot(labels, K);
        return D;
    };
    const ckb::LabeledDataset Ds = draw(60, 1.0), Dt = draw(45, -0.5);

    std::printf("epsilon      kernel          primal          rel. diff\n");
    for (double eps : {1e-3, 1e-2, 1e-1}) {
        const double a =
            ckb::ckb_sq(Ds, Dt, ckb::KernelSpec::linear(), ckb::KernelSpec::linear(), {eps}).value;
        const double b = ckb::oracle::ckb_sq_primal(Ds, Dt, eps);
        std::printf("%-12g %-15.10f %-15.10f %.2e\n", eps, a, b, std::abs(a - b) / std::max(1.0, std::abs(b)));
    }
    return 0;
}
