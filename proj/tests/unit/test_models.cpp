#include <cmath>
#include <string>

#include <gtest/gtest.h>

#include "twave/models.hpp"
#include "twave/system.hpp"

using namespace twave;

TEST(Models, BZConstants) {
    const auto s = bz_system(BZParams{});
    EXPECT_EQ(s.name, "bz-transformed");
    EXPECT_EQ(s.lipschitz, (std::vector<double>{2.0, 2.0}));
    EXPECT_EQ(s.k_state, (std::vector<double>{1.0, 1.0}));
    const double u[2] = {0.25, 0.5}, ud[2] = {0.75, 0.125};
    const auto f = s.eval(u, ud);
    EXPECT_DOUBLE_EQ(f[0], 0.25 * (1 - 0.5 - 0.25 + 0.5 * 0.125));
    EXPECT_DOUBLE_EQ(f[1], 0.75 * 0.5);
}

TEST(Models, BZCriticalSpeedIsTwo) {
    for (double b : {0.1, 1.0, 10.0})
        for (double tau : {0.0, 3.0}) EXPECT_EQ(critical_speed(BZParams{0.5, b, tau, tau}), 2.0);
    EXPECT_EQ(critical_speed("bz-literal", BZParams{}, LVParams{}), 2.0);
}

TEST(Models, BZRejectsSubcriticalSpeed) {
    try {
        bz_build(BZParams{}, 1.9);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::subcritical);
        EXPECT_NE(std::string(e.what()).find("1.9"), std::string::npos);
    }
}

TEST(Models, LVEquilibriumAndConstants) {
    const auto [us, vs] = lv_equilibrium(LVParams{});
    EXPECT_DOUBLE_EQ(us, 1.0);
    EXPECT_DOUBLE_EQ(vs, 1.0);
    const auto s = lv_system(LVParams{});
    EXPECT_EQ(s.lipschitz, (std::vector<double>{6.0, 3.0}));
    EXPECT_EQ(s.delays, (std::vector<double>{0.5, 0.0}));
    EXPECT_TRUE(validate_system(s).pass);
}

TEST(Models, LVCriticalSpeed) {
    EXPECT_DOUBLE_EQ(critical_speed(LVParams{}), 2.0);
    LVParams p;
    p.a1 = 8.0;  // sqrt(1 + 8 - 1) = 2.828... beats 2
    EXPECT_DOUBLE_EQ(critical_speed(p), std::sqrt(8.0));
}

TEST(Models, LVReversedConditionIsDiagnosed) {
    LVParams p;
    p.a1 = 0.5;
    try {
        lv_build(p, 3.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::equilibrium);
        EXPECT_NE(std::string(e.what()).find("a2 > a1*b2"), std::string::npos);
    }
}

TEST(Models, UnknownModelId) {
    try {
        critical_speed("nonsense", BZParams{}, LVParams{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::config);
    }
}

TEST(Models, BuiltPairsRespectTheBox) {
    for (auto fam : {CandidateFamily::envelope, CandidateFamily::paper}) {
        BuildOptions o;
        o.family = fam;
        o.T = 30;
        o.h = 0.1;
        for (const auto& m : {bz_build(BZParams{}, 3.0, o), lv_build(LVParams{}, 3.0, o)}) {
            EXPECT_EQ(m.pair.upper.N, 600u);
            EXPECT_TRUE(m.pair.has_analytic());
            for (std::size_t j = 0; j < m.pair.upper.nodes(); ++j)
                for (int i = 0; i < 2; ++i) {
                    EXPECT_GE(m.pair.lower.at(j, i), -1e-12);
                    EXPECT_LE(m.pair.lower.at(j, i), m.pair.upper.at(j, i) + 1e-12);
                    EXPECT_LE(m.pair.upper.at(j, i), m.spec.k_state[static_cast<std::size_t>(i)] + 1e-12);
                }
        }
    }
}

TEST(Models, BuildersAreDeterministic) {
    const auto a = bz_build(BZParams{}, 2.5), b = bz_build(BZParams{}, 2.5);
    EXPECT_EQ(a.pair.upper.values, b.pair.upper.values);
    EXPECT_EQ(a.pair.lower.values, b.pair.lower.values);
}

TEST(Models, GridOptionsAreChecked) {
    BuildOptions o;
    o.h = -1;
    EXPECT_THROW(bz_build(BZParams{}, 3.0, o), Error);
}

TEST(Polynomial, EvaluatesTerms) {
    // f1 = 2 u1 v_tau^2 - v, f2 = 3
    const auto f = polynomial_reaction(2, {{0, 2.0, {1, 0}, {0, 2}}, {0, -1.0, {0, 1}, {0, 0}}, {1, 3.0, {0, 0}, {0, 0}}});
    const double u[2] = {0.5, 0.25}, ud[2] = {0.0, 3.0};
    double out[2] = {7, 7};
    f(u, ud, out);
    EXPECT_DOUBLE_EQ(out[0], 2 * 0.5 * 9 - 0.25);
    EXPECT_DOUBLE_EQ(out[1], 3.0);
}

TEST(Polynomial, RejectsMalformedTerms) {
    EXPECT_THROW(polynomial_reaction(2, {{2, 1.0, {0, 0}, {0, 0}}}), Error);
    EXPECT_THROW(polynomial_reaction(2, {{0, 1.0, {0}, {0, 0}}}), Error);
    EXPECT_THROW(polynomial_reaction(1, {{0, 1.0, {-1}, {0}}}), Error);
}

TEST(Models, PaperFamilyRateAtSpeedThree) {
    BuildOptions o;
    o.family = CandidateFamily::paper;
    const auto m = bz_build(BZParams{}, 3.0, o);
    EXPECT_NEAR(m.params.lambda1, (9.0 - 3.0 * std::sqrt(5.0)) / 2.0, 1e-14);
    EXPECT_NEAR(m.params.lambda1 - m.params.lambda1 * m.params.lambda1 / 9.0 - 1.0, 0.0, 1e-14);
}

TEST(Models, CriticalSpeedWarnsAtEquality) {
    const auto m = bz_build(BZParams{}, 2.0);
    ASSERT_FALSE(m.warnings.empty());
    EXPECT_NE(m.warnings.front().find("critical speed"), std::string::npos);
}

TEST(Models, LVCriticalSpeedExamples) {
    LVParams p;
    p.r = 1;
    p.d1 = 4;
    p.a1 = p.a2 = p.b2 = 1;  // a1 b2 = a2 sits on the boundary; only the speed formula is used
    EXPECT_DOUBLE_EQ(critical_speed(p), 4.0);
    p = LVParams{};
    p.r = 1e-12;
    p.d1 = 1;
    p.a1 = 2;
    p.a2 = p.b2 = 1;
    EXPECT_NEAR(critical_speed(p), 1.0, 1e-6);
}
