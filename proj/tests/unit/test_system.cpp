#include <gtest/gtest.h>

#include "twave/models.hpp"
#include "twave/system.hpp"

using namespace twave;

namespace {

SystemSpec logistic() {
    SystemSpec s;
    s.name = "logistic";
    s.n = 1;
    s.diffusion = {1.0};
    s.delays = {0.0};
    s.zero_state = {0.0};
    s.k_state = {1.0};
    s.lipschitz = {1.0};
    s.reaction = polynomial_reaction(1, {{0, 1.0, {1}, {0}}, {0, -1.0, {2}, {0}}});
    s.split = QuasimonotoneSplit::all_increasing(1);
    return s;
}

} // namespace

TEST(ValidateSystem, TransformedBZPassesWithZeroResiduals) {
    const auto rep = validate_system(bz_system(BZParams{}));
    EXPECT_TRUE(rep.pass);
    EXPECT_TRUE(rep.split_ok);
    for (double v : rep.residual_zero) EXPECT_EQ(v, 0.0);
    for (double v : rep.residual_k) EXPECT_EQ(v, 0.0);
}

TEST(ValidateSystem, LiteralBZFailsAtK) {
    BZParams p;
    p.variant = BZVariant::literal;
    const auto rep = validate_system(bz_system(p));
    EXPECT_FALSE(rep.pass);
    EXPECT_TRUE(rep.split_ok);
    EXPECT_DOUBLE_EQ(rep.residual_k[0], 0.5);  // 1 * (1 - 1 - 0.5)
    EXPECT_DOUBLE_EQ(rep.residual_k[1], 1.0);  // b * 1 * 1
}

TEST(ValidateSystem, ScalarLogisticPasses) {
    EXPECT_TRUE(validate_system(logistic()).pass);
}

TEST(ValidateSystem, BadPartitionIsReported) {
    auto s = bz_system(BZParams{});
    s.split.dec_delayed[0] = {1};  // 1 now sits in both delayed sets
    const auto rep = validate_system(s);
    EXPECT_FALSE(rep.split_ok);
    EXPECT_FALSE(rep.pass);
    EXPECT_FALSE(rep.split_messages.empty());
}

TEST(ValidateSystem, OrderedFlag) {
    EXPECT_TRUE(bz_system(BZParams{}).split.ordered());
    BZParams p;
    p.variant = BZVariant::literal;
    EXPECT_FALSE(bz_system(p).split.ordered());
}

TEST(ValidateSystem, StructuralAndParameterErrors) {
    auto s = logistic();
    s.diffusion = {1.0, 2.0};
    try {
        validate_system(s);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::structural);
    }
    s = logistic();
    s.diffusion = {-1.0};
    try {
        validate_system(s);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::parameter);
    }
    s = logistic();
    s.lipschitz = {0.0};
    EXPECT_THROW(validate_system(s), Error);
}

TEST(Quasimonotone, BuiltInModelsAreConsistent) {
    EXPECT_TRUE(check_quasimonotone(lv_system(LVParams{}), 1000, 1).pass());
    EXPECT_TRUE(check_quasimonotone(bz_system(BZParams{}), 1000, 2).pass());
    BZParams p;
    p.variant = BZVariant::literal;
    EXPECT_TRUE(check_quasimonotone(bz_system(p), 1000, 3).pass());
}

TEST(Quasimonotone, ScalarSystemIsVacuous) {
    const auto rep = check_quasimonotone(logistic(), 10, 4);
    EXPECT_TRUE(rep.pass());
    EXPECT_EQ(rep.samples, 10);
}

TEST(Quasimonotone, MislabelledSplitIsFlagged) {
    auto s = lv_system(LVParams{});
    // f1 = r u (1 - a1 u + b1 v) grows with v; declaring it decreasing must be caught.
    s.split.inc_now[0] = {};
    s.split.dec_now[0] = {1};
    const auto rep = check_quasimonotone(s, 200, 5);
    ASSERT_FALSE(rep.pass());
    EXPECT_EQ(rep.flags.front().component, 0);
    EXPECT_EQ(rep.flags.front().argument, 1);
    EXPECT_FALSE(rep.flags.front().delayed);
    EXPECT_GT(rep.flags.front().difference, 0.0);
}

TEST(Quasimonotone, NeedsSamples) {
    EXPECT_THROW(check_quasimonotone(logistic(), 0, 1), Error);
}

TEST(Quasimonotone, SeedDeterminesSamples) {
    auto s = lv_system(LVParams{});
    s.split.inc_now[0] = {};
    s.split.dec_now[0] = {1};
    const auto a = check_quasimonotone(s, 50, 11), b = check_quasimonotone(s, 50, 11);
    ASSERT_EQ(a.flags.size(), b.flags.size());
    for (std::size_t k = 0; k < a.flags.size(); ++k) EXPECT_EQ(a.flags[k].u, b.flags[k].u);
}

TEST(Lipschitz, SampledQuotientStaysBelowBuiltInBeta) {
    for (const auto& s : {bz_system(BZParams{}), lv_system(LVParams{})}) {
        const auto q = sample_lipschitz(s, 2000, 9);
        for (int i = 0; i < s.n; ++i) EXPECT_LE(q[static_cast<std::size_t>(i)], s.lipschitz[static_cast<std::size_t>(i)]);
    }
}

TEST(Rng, MersenneStreamIsFixed) {
    // First draw of mt19937_64 with the default seed 5489 is 14514284786278117030.
    Rng r(5489);
    EXPECT_DOUBLE_EQ(r.uniform(), static_cast<double>(14514284786278117030ULL >> 11) * 0x1.0p-53);
}
