#include <cmath>

#include <gtest/gtest.h>

#include "twave/iterate.hpp"
#include "twave/models.hpp"

using namespace twave;

namespace {

BuiltModel small_bz() {
    BuildOptions o;
    o.T = 60;
    o.h = 0.1;
    return bz_build(BZParams{}, 3.0, o);
}

} // namespace

TEST(Sweep, KeepsTheChainOrdered) {
    const auto m = small_bz();
    CandidatePair cur = m.pair;
    for (int s = 0; s < 10; ++s) {
        const auto out = sweep_with_violation(m.spec, m.kernel, cur);
        EXPECT_LE(out.violation, 1e-12);
        EXPECT_LE(detail::ordering_excess(out.pair.upper, cur.upper), 1e-12);
        EXPECT_LE(detail::ordering_excess(cur.lower, out.pair.lower), 1e-12);
        cur = out.pair;
    }
    EXPECT_EQ(cur.family, "sweep");
    EXPECT_FALSE(cur.has_analytic());
}

TEST(Sweep, ConstantEquilibriumPairIsFixed) {
    const auto m = small_bz();
    const auto pair = constant_pair(20.0, 0.1, m.spec.zero_state, m.spec.k_state, PairKind::ordered);
    const auto out = coupled_sweep(m.spec, m.kernel, pair);
    EXPECT_LT(sup_distance(out.upper, pair.upper), 1e-12);
    EXPECT_LT(sup_distance(out.lower, pair.lower), 1e-12);
}

TEST(Sweep, RejectsAnUnorderedPair) {
    const auto m = small_bz();
    const auto pair = constant_pair(20.0, 0.1, m.spec.k_state, m.spec.zero_state, PairKind::ordered);
    try {
        coupled_sweep(m.spec, m.kernel, pair);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::integrity);
    }
}

TEST(Sweep, SmoothPairNeedsAQuasiPair) {
    const auto m = small_bz();
    const auto flat = constant_pair(20.0, 0.1, m.spec.zero_state, m.spec.k_state, PairKind::ordered);
    EXPECT_THROW(smooth_pair(m.spec, m.kernel, flat), Error);
    ASSERT_EQ(m.pair.smoothness, Smoothness::quasi);
    const auto s = smooth_pair(m.spec, m.kernel, m.pair);
    EXPECT_EQ(s.smoothness, Smoothness::classical);
    EXPECT_EQ(s.family, "smoothed");
}

TEST(Solve, SmallBZConverges) {
    const auto m = small_bz();
    const auto r = solve_wave(m.spec, m.kernel, m.pair);
    ASSERT_TRUE(r.report.converged);
    EXPECT_LE(r.report.fixed_point_residual, 1e-6);
    EXPECT_LE(monotonicity_defect(r.profile), 1e-6);
    EXPECT_EQ(r.report.iterations, r.report.sweeps + r.report.picard_steps);
    // The upper member settles long before the lower pulse stops travelling.
    EXPECT_EQ(r.report.phase, "sweep");
    EXPECT_EQ(r.report.picard_steps, 0);
    EXPECT_EQ(r.report.sweeps, 64);
    // Between the final bracket.
    EXPECT_LE(detail::ordering_excess(r.profile, r.bracket.upper), 1e-9);
    EXPECT_LE(detail::ordering_excess(r.bracket.lower, r.profile), 1e-9);
    // Level 0.5 of u sits near t = 0 where the candidates are anchored.
    std::size_t j = 0;
    while (r.profile.at(j, 0) < 0.5) ++j;
    EXPECT_LT(std::fabs(r.profile.t(j)), 10.0);
}

TEST(Solve, IterationCapIsHonoured) {
    const auto m = small_bz();
    SolveOptions o;
    o.max_iter = 5;
    const auto r = solve_wave(m.spec, m.kernel, m.pair, o);
    EXPECT_FALSE(r.report.converged);
    EXPECT_EQ(r.report.iterations, 5);
}

TEST(Solve, OptionChecks) {
    const auto m = small_bz();
    SolveOptions o;
    o.tol = 0;
    EXPECT_THROW(solve_wave(m.spec, m.kernel, m.pair, o), Error);
    o = {};
    o.omega = 1.5;
    EXPECT_THROW(solve_wave(m.spec, m.kernel, m.pair, o), Error);
    o = {};
    o.max_iter = 0;
    EXPECT_THROW(solve_wave(m.spec, m.kernel, m.pair, o), Error);
}

namespace {

SystemSpec inert(double K) {
    SystemSpec s;
    s.n = 1;
    s.diffusion = {1};
    s.delays = {0};
    s.zero_state = {0};
    s.k_state = {K};
    s.lipschitz = {1};
    s.split = QuasimonotoneSplit::all_increasing(1);
    s.reaction = polynomial_reaction(1, {});
    return s;
}

} // namespace

TEST(Solve, InertReactionWithEquilibriumBracketUsesPicard) {
    // f = 0: both constant members are fixed, the gap never closes, and Picard starts at K/2.
    const auto s = inert(2.0);
    const auto kp = make_kernel(s, 2.0);
    const auto pair = constant_pair(10.0, 0.1, {0.0}, {2.0}, PairKind::ordered);
    const auto r = solve_wave(s, kp, pair);
    EXPECT_TRUE(r.report.converged);
    EXPECT_EQ(r.report.phase, "picard");
    EXPECT_EQ(r.report.sweeps, 11);
    EXPECT_NEAR(norm_sup(r.profile), 1.0, 1e-12);
}

TEST(Solve, CollapsedBracketReturnsAtOnce) {
    const auto s = inert(2.0);
    const auto kp = make_kernel(s, 2.0);
    const auto r = solve_wave(s, kp, constant_pair(10.0, 0.1, {2.0}, {2.0}, PairKind::ordered));
    EXPECT_TRUE(r.report.converged);
    EXPECT_EQ(r.report.iterations, 1);
    EXPECT_NEAR(r.profile.at(7, 0), 2.0, 1e-12);
}

TEST(Diagnostics, OdeResidualOfAnEquilibriumIsZero) {
    const auto m = small_bz();
    const auto k = constant_profile(10.0, 0.1, m.spec.k_state);
    EXPECT_EQ(norm_sup(ode_residual(m.spec, m.kernel, k)), 0.0);
}

TEST(Diagnostics, MonotonicityDefect) {
    auto g = make_grid(1.0, 0.5, 1);
    for (std::size_t j = 0; j < g.nodes(); ++j) g.at(j, 0) = static_cast<double>(j);
    EXPECT_DOUBLE_EQ(monotonicity_defect(g), -1.0);
    g.at(2, 0) = 5.0;
    EXPECT_DOUBLE_EQ(monotonicity_defect(g), 2.0);
}
