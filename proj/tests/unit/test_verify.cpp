#include <gtest/gtest.h>

#include "twave/models.hpp"
#include "twave/verify.hpp"

using namespace twave;

TEST(Verify, DefaultBZCandidatesPass) {
    for (double c : {2.1, 3.0}) {
        const auto m = bz_build(BZParams{}, c);
        const auto r = verify_pair(m.spec, m.kernel, m.pair, m.mode, DerivMode::analytic);
        EXPECT_TRUE(r.verdict) << "c = " << c;
        EXPECT_TRUE(r.margins_ok);
        EXPECT_TRUE(r.ordering_ok);
        EXPECT_TRUE(r.box_ok);
        EXPECT_EQ(r.margins.size(), 4u);
        for (const auto& mr : r.margins) EXPECT_GE(mr.min_margin, -1e-8) << mr.name;
    }
}

TEST(Verify, DefaultLVCandidatesPass) {
    const auto m = lv_build(LVParams{}, 3.0);
    EXPECT_TRUE(verify_pair(m.spec, m.kernel, m.pair, m.mode, DerivMode::analytic).verdict);
    EXPECT_TRUE(verify_pair(m.spec, m.kernel, m.pair, m.mode, DerivMode::finite_difference).verdict);
}

TEST(Verify, PaperLowerCandidateJumpsAtZero) {
    BuildOptions o;
    o.family = CandidateFamily::paper;
    const auto m = bz_build(BZParams{}, 3.0, o);
    for (auto d : {DerivMode::analytic, DerivMode::finite_difference}) {
        const auto r = verify_pair(m.spec, m.kernel, m.pair, m.mode, d);
        if (d == DerivMode::analytic) {
            EXPECT_TRUE(r.margins_ok);
        }
        EXPECT_FALSE(r.kinks_ok);
        EXPECT_FALSE(r.verdict);
    }
}

TEST(Verify, LiteralBZFails) {
    BZParams p;
    p.variant = BZVariant::literal;
    BuildOptions o;
    o.family = CandidateFamily::paper;
    const auto m = bz_build(p, 3.0, o);
    const auto r = verify_pair(m.spec, m.kernel, m.pair, m.mode, DerivMode::analytic);
    EXPECT_FALSE(r.verdict);
    EXPECT_FALSE(r.failures.empty());
}

TEST(Verify, AnalyticModeNeedsFormulas) {
    const auto m = bz_build(BZParams{}, 3.0);
    auto pair = m.pair;
    pair.upper_fn.reset();
    try {
        verify_pair(m.spec, m.kernel, pair, m.mode, DerivMode::analytic);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::config);
    }
}

TEST(Limits, TrivialBracketIsNotEnough) {
    const auto m = bz_build(BZParams{}, 3.0);
    const auto pair = constant_pair(20.0, 0.1, m.spec.zero_state, m.spec.k_state, PairKind::ordered);
    const auto r = check_limits(pair, m.spec, BoundaryMode::bracket_nontrivial);
    EXPECT_TRUE(r.ordering_ok);
    EXPECT_TRUE(r.box_ok);
    EXPECT_FALSE(r.lower_nonzero);
    EXPECT_FALSE(r.upper_not_k);
    EXPECT_FALSE(r.pass);
    EXPECT_TRUE(check_limits(pair, m.spec, BoundaryMode::none).pass);
    // upper(-T) = K and lower(+T) = 0: both strict limits are off by 1.
    const auto s = check_limits(pair, m.spec, BoundaryMode::strict_limits);
    EXPECT_FALSE(s.pass);
    EXPECT_DOUBLE_EQ(s.upper_left_gap[0], 1.0);
    EXPECT_DOUBLE_EQ(s.lower_right_gap[1], 1.0);
}

TEST(HStar, LogisticHasNoInteriorEquilibrium) {
    SystemSpec s;
    s.n = 1;
    s.diffusion = {1};
    s.delays = {0};
    s.zero_state = {0};
    s.k_state = {1};
    s.lipschitz = {1};
    s.split = QuasimonotoneSplit::all_increasing(1);
    s.reaction = polynomial_reaction(1, {{0, 1.0, {1}, {0}}, {0, -1.0, {2}, {0}}});
    EXPECT_TRUE(check_hstar(s, 8).pass);
    // Bistable u (1 - u)(u - 1/2) vanishes at 1/2, a lattice point for resolution 4.
    s.reaction = polynomial_reaction(1, {{0, -0.5, {1}, {0}}, {0, 1.5, {2}, {0}}, {0, -1.0, {3}, {0}}});
    const auto r = check_hstar(s, 4);
    EXPECT_FALSE(r.pass);
    ASSERT_EQ(r.interior_equilibria.size(), 1u);
    EXPECT_DOUBLE_EQ(r.interior_equilibria[0][0], 0.5);
    EXPECT_EQ(r.points_checked, 3);
    // u (1 - u)(2 - u) on [0, 2] vanishes at the interior state 1.
    s.k_state = {2};
    s.reaction = polynomial_reaction(1, {{0, 2.0, {1}, {0}}, {0, -3.0, {2}, {0}}, {0, 1.0, {3}, {0}}});
    const auto d = check_hstar(s, 4);
    ASSERT_EQ(d.interior_equilibria.size(), 1u);
    EXPECT_DOUBLE_EQ(d.interior_equilibria[0][0], 1.0);
}

TEST(HStar, BuiltInModelsPass) {
    EXPECT_TRUE(check_hstar(bz_system(BZParams{}), 16).pass);
    EXPECT_TRUE(check_hstar(lv_system(LVParams{}), 16).pass);
}

TEST(MarginDiscrepancy, ShrinksUnderRefinement) {
    double prev = 0;
    for (double h : {0.1, 0.05}) {
        BuildOptions o;
        o.T = 40;
        o.h = h;
        const auto m = bz_build(BZParams{}, 3.0, o);
        const double e = margin_discrepancy(m.spec, m.kernel, m.pair, m.mode, 0.1, 0.3);
        if (prev > 0) {
            EXPECT_GT(prev / e, 3.0);
        }
        prev = e;
    }
}
