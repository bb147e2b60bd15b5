#include "fracslice/io.hpp"
#include "fracslice/presets.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace fracslice;

TEST(Format, SeventeenDigitsRoundTrip)
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 2000; ++i) {
        const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
        EXPECT_EQ(parse_double(format_double(x)), x);
    }
    EXPECT_EQ(format_double(0.5), "0.5");
    EXPECT_THROW(parse_double("1.5x"), ValidationError);
    EXPECT_THROW(parse_double(""), ValidationError);
}

TEST(IfsJson, FloatSystemRoundTrips)
{
    const IFS ifs = presets::four_corner(0.35);
    const IFS back = parse_ifs(ifs_to_json(ifs).dump());
    EXPECT_EQ(back, ifs);
}

TEST(IfsJson, RandomSystemsRoundTripBitForBit)
{
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> r(0.01, 0.6), t(-3, 3);
    for (int i = 0; i < 100; ++i) {
        std::vector<Similitude> maps;
        for (int j = 0; j < 3; ++j)
            maps.emplace_back(r(rng), Vec2{t(rng), t(rng)});
        const IFS ifs(maps);
        EXPECT_EQ(parse_ifs(ifs_to_json(ifs).dump()), ifs);
    }
}

TEST(IfsJson, ExactSystemRoundTrips)
{
    const IFS ifs = presets::four_corner(make_rational(2, 7));
    const json doc = ifs_to_json(ifs);
    EXPECT_EQ(doc["maps"][1]["translation"][0]["num"], 5);
    EXPECT_EQ(doc["maps"][1]["translation"][0]["den"], 7);
    const IFS back = parse_ifs(doc.dump());
    ASSERT_TRUE(back.is_exact());
    EXPECT_EQ(back, ifs);
}

TEST(IfsJson, HugeRationalsUseStrings)
{
    const Rational big(BigInt("123456789012345678901234567890"), BigInt("246913578024691357802469135781"));
    const IFS ifs({Similitude::from_exact(big, 0, 0), Similitude::from_exact(make_rational(1, 3), 1, 1)});
    const json doc = ifs_to_json(ifs);
    EXPECT_TRUE(doc["maps"][0]["ratio"]["num"].is_string());
    EXPECT_EQ(parse_ifs(doc.dump()), ifs);
}

TEST(IfsJson, AcceptsPlainNumbers)
{
    const IFS ifs = parse_ifs(R"({"maps":[{"ratio":0.5,"translation":[0,0]},{"ratio":"0.5","translation":[0.5,"0"]}]})");
    EXPECT_EQ(ifs.size(), 2u);
    EXPECT_NEAR(ifs.dimension(), 1.0, 1e-12);
    EXPECT_FALSE(ifs.is_exact());
}

TEST(IfsJson, MixedExactnessFallsBackToFloats)
{
    const IFS ifs = parse_ifs(
        R"({"maps":[{"ratio":{"num":1,"den":2},"translation":[0,0]},{"ratio":{"num":1,"den":2},"translation":[{"num":1,"den":2},{"num":0,"den":1}]}]})");
    EXPECT_FALSE(ifs.is_exact());
    EXPECT_EQ(ifs.maps()[1].translation.x, 0.5);
}

TEST(IfsJson, MalformedInputsAreValidationErrors)
{
    for (const char* bad : {"", "{", "[]", R"({"maps":3})", R"({"maps":[{"ratio":0.5}]})",
                            R"({"maps":[{"ratio":0.5,"translation":[0]}]})",
                            R"({"maps":[{"ratio":"abc","translation":[0,0]},{"ratio":0.5,"translation":[1,1]}]})",
                            R"({"maps":[{"ratio":{"num":1,"den":0},"translation":[0,0]},{"ratio":0.5,"translation":[1,1]}]})",
                            R"({"maps":[{"ratio":{"num":1.5,"den":2},"translation":[0,0]},{"ratio":0.5,"translation":[1,1]}]})",
                            R"({"maps":[{"ratio":0.5,"translation":[0,0]}]})",
                            R"({"maps":[{"ratio":1.5,"translation":[0,0]},{"ratio":0.5,"translation":[1,1]}]})"}) {
        EXPECT_THROW(parse_ifs(bad), ValidationError) << bad;
    }
}

TEST(Scenario, ParsesAllSections)
{
    const auto sf = parse_scenario(R"(
[ifs]
preset = "product_cantor"
rho = 0.4
[direction]
vector = [1.0, 1.0]
[grid]
count = 20
weighting = "uniform"
seed = 5
[ladder]
deltas = [0.1, 0.05, 0.02, 0.01]
r_divisor = 16
[output]
dir = "out/x"
)");
    EXPECT_EQ(sf.scenario.t_count, 20u);
    EXPECT_EQ(sf.scenario.weighting, GridWeighting::Uniform);
    EXPECT_EQ(sf.scenario.seed, 5u);
    EXPECT_EQ(sf.scenario.deltas.size(), 4u);
    EXPECT_EQ(sf.scenario.r_divisor, 16.0);
    EXPECT_NEAR(sf.scenario.direction.theta, std::numbers::pi / 4, 1e-15);
    EXPECT_EQ(sf.output_dir, "out/x");
    EXPECT_EQ(sf.scenario.ifs, presets::product_cantor(0.4, 0.6));
}

TEST(Scenario, DyadicLadder)
{
    const auto sf = parse_scenario("[ifs]\npreset = \"four_corner\"\n[ladder]\ndyadic = [4, 8]\n");
    EXPECT_EQ(sf.scenario.deltas, (std::vector<double>{1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256}));
}

TEST(Scenario, Errors)
{
    EXPECT_THROW(parse_scenario("[ifs]\npreset = \"nope\"\n[ladder]\ndyadic = [4, 8]\n"), ValidationError);
    EXPECT_THROW(parse_scenario("[ifs]\n[ladder]\ndyadic = [4, 8]\n"), ValidationError);
    EXPECT_THROW(parse_scenario("[ifs]\npreset = \"four_corner\"\n[ladder]\ndeltas = [0.1]\n"), ValidationError);
    EXPECT_THROW(parse_scenario("[ifs\n"), ValidationError);
    EXPECT_THROW(parse_scenario("[ifs]\npreset = \"four_corner\"\n[grid]\nweighting = \"x\"\n[ladder]\ndyadic = [4, 8]\n"),
                 ValidationError);
    EXPECT_THROW(parse_scenario("[ifs]\npreset = \"four_corner\"\n[ladder]\ndyadic = [4, 8]\n[direction]\ntheta = \"a\"\n"),
                 ValidationError);
}

TEST(Csv, ResultsHeaderAndRows)
{
    TrendReport rep;
    rep.rows.push_back({0.25, 0.0625, 1.5, 3});
    EXPECT_EQ(results_csv(rep), "t,delta,premeasure,items\n0.25,0.0625,1.5,3\n");
}
