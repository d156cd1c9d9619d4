#include <cmath>
#include <string>

#include <gtest/gtest.h>

#include "twave/report.hpp"

using namespace twave;

TEST(Json, SeventeenDigits) {
    Json j;
    j["x"] = 0.1;
    j["n"] = 3;
    EXPECT_EQ(to_text(j), "{\n  \"x\": 0.10000000000000001,\n  \"n\": 3\n}\n");
}

TEST(Json, NonFiniteBecomesNull) {
    Json j = Json::array({1.5, NAN, INFINITY});
    EXPECT_EQ(to_text(j), "[1.5, null, null]\n");
}

TEST(Json, NestedLayout) {
    Json j;
    j["a"] = Json::array({Json{{"b", true}}});
    j["s"] = "q\"x\n";
    j["e"] = Json::object();
    EXPECT_EQ(to_text(j), "{\n  \"a\": [\n    {\n      \"b\": true\n    }\n  ],\n  \"s\": \"q\\\"x\\n\",\n  \"e\": {}\n}\n");
}

TEST(Json, RoundTripsThroughTheParser) {
    Json j;
    j["v"] = Json::array({1.0 / 3.0, -2.5e-300, 12345678.901234567});
    const auto back = Json::parse(to_text(j));
    for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(back["v"][k].get<double>(), j["v"][k].get<double>());
}

TEST(Json, ReportsCarryVerdicts) {
    const auto m = bz_build(BZParams{}, 3.0);
    const auto r = verify_pair(m.spec, m.kernel, m.pair, m.mode, DerivMode::analytic);
    const auto j = to_json(r);
    EXPECT_TRUE(j.at("verdict").get<bool>());
    EXPECT_EQ(to_text(j), to_text(to_json(verify_pair(m.spec, m.kernel, m.pair, m.mode, DerivMode::analytic))));
    EXPECT_EQ(model_json(m).at("critical_speed").get<double>(), 2.0);
}
