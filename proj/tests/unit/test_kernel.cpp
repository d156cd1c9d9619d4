#include <cmath>

#include <gtest/gtest.h>

#include "twave/kernel.hpp"
#include "twave/models.hpp"

using namespace twave;

TEST(CharRoots, FactorableExample) {
    // 2 l^2 - l - 3 = (2l - 3)(l + 1)
    const auto [l1, l2] = char_roots(2.0, 1.0, 3.0);
    EXPECT_DOUBLE_EQ(l1, -1.0);
    EXPECT_DOUBLE_EQ(l2, 1.5);
}

TEST(CharRoots, IrrationalExample) {
    const auto [l1, l2] = char_roots(1.0, 2.0, 1.0);
    EXPECT_NEAR(l1, 2.0 - 2.0 * std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(l2, 2.0 + 2.0 * std::sqrt(2.0), 1e-14);
}

TEST(CharRoots, SmallRootKeepsRelativeAccuracy) {
    // Large c: l1 ~ -beta, where 1 - sqrt(1 + eps) would cancel.
    const auto [l1, l2] = char_roots(0.1, 1e4, 0.5);
    const double a = 0.1 / 1e8;
    EXPECT_LT(std::fabs(a * l1 * l1 - l1 - 0.5) / 0.5, 1e-15);
    EXPECT_GT(l2, 0.0);
}

TEST(CharRoots, RejectsBadParameters) {
    for (auto args : {std::array<double, 3>{0, 1, 1}, {1, 0, 1}, {1, 1, 0}, {1, -2, 1}}) {
        try {
            char_roots(args[0], args[1], args[2]);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::parameter);
        }
    }
}

TEST(Kernel, ScaleNormalisesTheKernelMass) {
    const auto k = make_component_kernel(1.5, 2.5, 0.8);
    // scale * (1/(-l1) + 1/l2) = 1/beta
    EXPECT_NEAR(k.scale * (1.0 / -k.lambda1 + 1.0 / k.lambda2), 1.0 / 0.8, 1e-14);
}

TEST(Kernel, ConstantForcingGivesGammaOverBeta) {
    const auto k = make_component_kernel(1.0, 3.0, 2.0);
    std::vector<double> g(4001, 0.9);
    for (double v : apply_green(k, 0.05, g, 0.9, 0.9)) EXPECT_NEAR(v, 0.45, 1e-13);
}

TEST(Kernel, LinearForcingIsIntegratedExactly) {
    // phi' - (d/c^2) phi'' + beta phi = t has phi = t/beta - 1/beta^2; the
    // constant tails are too far away to matter at the centre.
    const double d = 1.0, c = 2.0, beta = 1.0, T = 40, h = 0.1;
    const auto k = make_component_kernel(d, c, beta);
    const std::size_t N = static_cast<std::size_t>(std::lround(2 * T / h));
    std::vector<double> g(N + 1);
    for (std::size_t j = 0; j <= N; ++j) g[j] = -T + h * static_cast<double>(j);
    const auto out = apply_green(k, h, g, g.front(), g.back());
    const std::size_t mid = N / 2;
    EXPECT_NEAR(out[mid], -1.0, 1e-10);
    EXPECT_NEAR(out[mid + 50], 4.0, 1e-10);
}

TEST(Kernel, CellWeightBranchesAgree) {
    const double h = 0.05;
    // Series inside |lambda h| < 0.5, closed form outside; compare with long-double closed forms
    // where those are themselves accurate.
    for (double x : {0.49, 0.51, -0.49, -0.51, 3.0, -7.0}) {
        const double lam = x / h;
        const auto w = detail::cell_weights(lam, h);
        const long double L = lam, H = h, e = std::expm1(static_cast<long double>(x));
        const long double a0 = e / L, a1 = (H * (e + 1) - e / L) / L;
        EXPECT_NEAR(w.a0 / h, static_cast<double>(a0 / H), 1e-15);
        EXPECT_NEAR(w.a1 / (h * h), static_cast<double>(a1 / (H * H)), 1e-14);
    }
    // Tiny rates: a1 / h^2 = 1/2 + x/3 + x^2/8 + ...
    const auto t = detail::cell_weights(1e-6 / h, h);
    EXPECT_NEAR(t.a1 / (h * h), 0.5 + 1e-6 / 3 + 1e-12 / 8, 2e-16);
    const auto z = detail::cell_weights(0.0, h);
    EXPECT_DOUBLE_EQ(z.a0, h);
    EXPECT_DOUBLE_EQ(z.a1, h * h / 2);
}

TEST(ApplyF, EquilibriaAreFixed) {
    for (bool lv : {false, true}) {
        const auto m = lv ? lv_build(LVParams{}, 3.0) : bz_build(BZParams{}, 3.0);
        for (const auto& s : {m.spec.zero_state, m.spec.k_state}) {
            const auto p = constant_profile(50.0, 0.05, s);
            EXPECT_LT(sup_distance(apply_F(m.spec, m.kernel, p), p), 1e-10);
        }
    }
}

TEST(ApplyF, RejectsProfilesOutsideTheBox) {
    const auto m = bz_build(BZParams{}, 3.0);
    auto p = constant_profile(10.0, 0.1, {0.5, 0.5});
    p.at(3, 1) = 1.1;
    try {
        apply_F(m.spec, m.kernel, p);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::domain);
    }
}
