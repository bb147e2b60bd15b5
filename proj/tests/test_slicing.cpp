#include "fracslice/presets.hpp"
#include "fracslice/slicing.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace fracslice;

TEST(SliceCover, ProductCantorAxisSliceIsTheCantorSet)
{
    // K_0 for theta = 0 is {0} x C; the fiber coordinate is y
    const IFS ifs = presets::product_cantor();
    for (int n = 2; n <= 7; ++n) {
        const auto cover = slice_cover(ifs, Direction::from_angle(0.0), 0.0, std::pow(0.4, n));
        const auto want = oracle::cantor_level(0.4, n);
        ASSERT_EQ(cover.intervals.size(), want.size()) << "n=" << n;
        for (std::size_t i = 0; i < want.size(); ++i) {
            EXPECT_NEAR(cover.intervals[i].lo, want[i].lo, 1e-12);
            EXPECT_NEAR(cover.intervals[i].hi, want[i].hi, 1e-12);
        }
    }
}

TEST(SliceCover, ContainsSampledPointsOnTheFiber)
{
    // a sampled point of K lies in the cover of its own slice
    const IFS ifs = presets::four_corner(0.35);
    const Direction d = Direction::from_angle(1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const Vec2 x = sample_natural_measure(ifs, 1, 100 + trial).front();
        const double t = dot(x, d.unit);
        const double y = dot(x, d.normal());
        const auto cover = slice_cover(ifs, d, t, 1e-3);
        bool inside = false;
        for (const auto& iv : cover.intervals)
            inside = inside || (iv.lo - 1e-12 <= y && y <= iv.hi + 1e-12);
        EXPECT_TRUE(inside);
    }
}

TEST(SliceCover, ShrinksUnderRefinement)
{
    const IFS ifs = presets::four_corner(0.35);
    const Direction d = Direction::from_angle(1.0);
    const double t = 0.7;
    double prev = 1e9;
    for (double r : {0.1, 0.01, 0.001}) {
        const auto c = slice_cover(ifs, d, t, r);
        double len = 0.0;
        for (const auto& iv : c.intervals)
            len += iv.length();
        EXPECT_LE(len, prev + 1e-12);
        prev = len;
    }
}

TEST(SliceCover, OutsideExtentIsEmpty)
{
    const IFS ifs = presets::four_corner(0.35);
    const auto c = slice_cover(ifs, Direction::from_angle(1.0), -5.0, 0.01);
    EXPECT_TRUE(c.empty());
    EXPECT_EQ(c.components(), 0u);
}

TEST(SliceCover, MatchesBruteForceFiberCount)
{
    const IFS ifs = presets::four_corner(0.35);
    const Direction d = Direction::from_angle(1.0);
    const double t = attractor_extent(project_ifs(ifs, d)).mid();
    const auto a = slice_cover(ifs, d, t, 0.01);
    const auto b = slice_cover(ifs, d, t, 0.01);
    EXPECT_EQ(a.words, b.words);

    // every partition word, boxed by composing the maps by hand
    const IFS frame = rotate_to_frame(ifs, d);
    const Rect box = oracle::hull_bbox(frame);
    std::vector<Word> hit;
    std::vector<std::pair<double, double>> ys;
    for (const Word& w : oracle::partition_bfs(ifs, 0.01)) {
        double rho = 1.0;
        Vec2 shift{0.0, 0.0};
        for (auto l : w.letters) {
            const auto& m = frame.maps()[l - 1];
            shift = shift + rho * m.translation;
            rho *= m.ratio;
        }
        const double x0 = shift.x + rho * box.x0, x1 = shift.x + rho * box.x1;
        if (x0 - 1e-9 <= t && t <= x1 + 1e-9) {
            hit.push_back(w);
            ys.emplace_back(shift.y + rho * box.y0, shift.y + rho * box.y1);
        }
    }
    std::ranges::sort(ys);
    std::size_t components = 0;
    double reach = -1e300;
    for (const auto& [lo, hi] : ys) {
        components += lo > reach ? 1 : 0;
        reach = std::max(reach, hi);
    }
    EXPECT_EQ(a.words, hit);
    EXPECT_EQ(a.components(), components);
    EXPECT_GT(components, 1u);
}

TEST(Packing, DynamicProgramIsOptimal)
{
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<double> centers(7);
        for (auto& c : centers)
            c = u(rng);
        std::ranges::sort(centers);
        const std::vector<double> rungs{0.25, 0.125, 0.0625};
        const double e = 0.3 + 0.5 * u(rng);
        double got = 0.0;
        for (const auto& it : detail::best_rung_packing(centers, rungs, e))
            got += std::pow(it.diameter, e);
        EXPECT_NEAR(got, oracle::best_packing_brute(centers, rungs, e), 1e-12);
    }
}

TEST(Packing, ValidAndMonotoneInDelta)
{
    const IFS ifs = presets::four_corner(0.35);
    const Direction d = Direction::from_angle(1.0);
    const auto cover = slice_cover(ifs, d, 0.8, 1e-4);
    double prev = 0.0;
    for (double delta : {1.0 / 256, 1.0 / 128, 1.0 / 64, 1.0 / 32, 1.0 / 16}) {
        const Packing p = pack_premeasure(cover, delta, ifs.dimension());
        EXPECT_TRUE(packing_is_valid(p, cover));
        EXPECT_GE(p.value, prev);
        prev = p.value;
        std::size_t total = 0;
        for (auto n : p.rung_counts)
            total += n;
        EXPECT_EQ(total, p.items.size());
    }
}

TEST(Packing, EmptyCoverHasZeroValue)
{
    const IFS ifs = presets::four_corner(0.35);
    const auto cover = slice_cover(ifs, Direction::from_angle(1.0), -5.0, 0.01);
    EXPECT_EQ(pack_premeasure(cover, 0.1, ifs.dimension()).value, 0.0);
}

TEST(Packing, RejectsBadArguments)
{
    const IFS ifs = presets::four_corner(0.35);
    const auto cover = slice_cover(ifs, Direction::from_angle(1.0), 0.8, 0.01);
    EXPECT_THROW(pack_premeasure(cover, 0.0, ifs.dimension()), ValidationError);
    EXPECT_THROW(pack_premeasure(cover, 0.1, 1.0), ValidationError);
}

TEST(Packing, AtMostOneBallPerComponent)
{
    // centers are component midpoints, so at most one ball per component
    const IFS ifs = presets::product_cantor();
    const auto cover = slice_cover(ifs, Direction::from_angle(0.0), 0.0, std::pow(0.4, 6));
    const Packing p = pack_premeasure(cover, 1.0 / 8, ifs.dimension());
    EXPECT_TRUE(packing_is_valid(p, cover));
    EXPECT_LE(p.items.size(), cover.components());
    EXPECT_GT(p.value, 0.0);
}

TEST(SliceDimension, ProductCantorAxisSlope)
{
    const IFS ifs = presets::product_cantor();
    std::vector<double> ladder;
    for (int n = 3; n <= 10; ++n)
        ladder.push_back(std::pow(0.4, n));
    const auto d = box_dimension_slice(ifs, Direction::from_angle(0.0), 0.0, ladder);
    EXPECT_NEAR(d.slope, std::log(2.0) / std::log(2.5), 1e-9);
    EXPECT_LT(d.residual, 1e-9);
    for (std::size_t i = 0; i < ladder.size(); ++i)
        EXPECT_EQ(d.counts[i], std::size_t{1} << (i + 3));
}

TEST(SliceDimension, LadderValidation)
{
    const IFS ifs = presets::product_cantor();
    const Direction d = Direction::from_angle(0.0);
    EXPECT_THROW(box_dimension_slice(ifs, d, 0.0, {0.1, 0.01, 0.001}), ValidationError);
    EXPECT_THROW(box_dimension_slice(ifs, d, 0.0, {0.1, 0.2, 0.01, 0.001}), ValidationError);
    EXPECT_THROW(box_dimension_slice(ifs, d, 0.0, {1.5, 0.1, 0.01, 0.001}), ValidationError);
}

TEST(SliceDimension, EmptySliceHasZeroCounts)
{
    const IFS ifs = presets::product_cantor();
    // t = 0.5 falls in the first gap of C
    const auto d = box_dimension_slice(ifs, Direction::from_angle(0.0), 0.5, {0.1, 0.05, 0.01, 0.005});
    for (auto c : d.counts)
        EXPECT_EQ(c, 0u);
    EXPECT_EQ(d.slope, 0.0);
}

TEST(HausdorffContent, CantorSliceContentIsBoundedBelow)
{
    // sum of 2^n lengths 0.4^n to the power dim C equals 1 at every level
    const IFS ifs = presets::product_cantor();
    const double dimc = std::log(2.0) / std::log(2.5);
    for (int n = 3; n <= 8; ++n) {
        const auto cover = slice_cover(ifs, Direction::from_angle(0.0), 0.0, std::pow(0.4, n));
        EXPECT_NEAR(hausdorff_content_slice(cover, dimc), 1.0, 1e-9);
    }
}
