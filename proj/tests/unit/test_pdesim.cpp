#include <cmath>

#include <gtest/gtest.h>

#include "twave/models.hpp"
#include "twave/pdesim.hpp"

using namespace twave;

namespace {

SystemSpec scalar(std::vector<PolynomialTerm> terms, double tau = 0.0) {
    SystemSpec s;
    s.n = 1;
    s.diffusion = {1};
    s.delays = {tau};
    s.zero_state = {0};
    s.k_state = {1};
    s.lipschitz = {1};
    s.split = QuasimonotoneSplit::all_increasing(1);
    s.reaction = polynomial_reaction(1, std::move(terms));
    return s;
}

SimConfig small() {
    SimConfig c;
    c.x_min = 0;
    c.x_max = 10;
    c.nx = 11;
    c.t_end = 2;
    c.x_seed = 5;
    return c;
}

} // namespace

TEST(Simulate, StableStep) {
    EXPECT_DOUBLE_EQ(stable_dt(scalar({}), small()), 0.2);
}

TEST(Simulate, ConfigErrors) {
    const auto s = scalar({}, 0.5);
    auto c = small();
    c.dt = 0.5;
    EXPECT_THROW(simulate(s, c, step_seed(s, 5)), Error);
    c = small();
    c.t_end = 0.4;
    EXPECT_THROW(simulate(s, c, step_seed(s, 5)), Error);
    c = small();
    c.nx = 2;
    EXPECT_THROW(simulate(s, c, step_seed(s, 5)), Error);
}

TEST(Simulate, PureDiffusionConservesMass) {
    const auto s = scalar({});
    const auto rec = simulate(s, small(), step_seed(s, 5));
    ASSERT_GE(rec.times.size(), 3u);
    EXPECT_DOUBLE_EQ(rec.times.front(), 0.0);
    const double m0 = mass(rec, 0, 0);
    EXPECT_DOUBLE_EQ(m0, 5.5);  // trapezoid of the sampled step, node x = 5 included
    for (std::size_t k = 1; k < rec.times.size(); ++k) EXPECT_NEAR(mass(rec, k, 0), m0, 1e-12);
}

TEST(Simulate, EquilibriumStaysPut) {
    const auto s = scalar({{0, 1.0, {1}, {0}}, {0, -1.0, {1}, {1}}}, 0.3);  // u (1 - u_tau)
    const auto rec = simulate(s, small(), [](int, double, double) { return 1.0; });
    for (const auto& f : rec.fields)
        for (double v : f) EXPECT_EQ(v, 1.0);
}

TEST(Simulate, LogisticInvadesFromTheStep) {
    const auto s = scalar({{0, 1.0, {1}, {0}}, {0, -1.0, {2}, {0}}});
    auto c = small();
    c.x_max = 40;
    c.nx = 401;
    c.x_seed = 30;
    c.t_end = 4;
    const auto rec = simulate(s, c, step_seed(s, c.x_seed));
    const auto pos = front_position(rec, 0, 0.5);
    ASSERT_TRUE(pos.front() && pos.back());
    EXPECT_LT(*pos.back(), *pos.front() - 3.0);  // the front moves left at close to speed 2
}

TEST(Front, LinearRampCrossesAtFive) {
    SpaceTimeRecord rec;
    rec.n = 1;
    for (int j = 0; j <= 10; ++j) rec.x.push_back(j);
    rec.times = {0.0, 1.0};
    std::vector<double> ramp, flat(11, 0.2);
    for (double x : rec.x) ramp.push_back(x / 10);
    rec.fields = {ramp, flat};
    const auto pos = front_position(rec, 0, 0.5);
    ASSERT_TRUE(pos[0].has_value());
    EXPECT_DOUBLE_EQ(*pos[0], 5.0);
    EXPECT_FALSE(pos[1].has_value());
}

TEST(Front, LeastSquaresSlope) {
    EXPECT_DOUBLE_EQ(least_squares_slope({0, 1, 2, 3}, {1, 4, 7, 10}), 3.0);
}

TEST(CrossValidate, DomainTooSmall) {
    BuildOptions o;
    o.T = 50;
    o.h = 0.1;
    const auto m = bz_build(BZParams{}, 3.0, o);
    SimConfig c;
    c.x_max = 100;
    c.nx = 1001;
    c.x_seed = 20;
    c.t_end = 10;  // the front leaves through x = 0 long before t = 10
    try {
        crossvalidate(m.spec, m.pair.upper, 3.0, c);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::domain_too_small);
    }
}
