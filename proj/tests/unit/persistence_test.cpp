#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "densfilt/persistence.hpp"
#include "oracles.hpp"

using namespace densfilt;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

using Bars = std::vector<std::tuple<std::size_t, double, double>>;

FilteredComplex hollow_triangle()
{
    return FilteredComplex({{{0}, 0.0}, {{1}, 0.0}, {{2}, 0.0}, {{0, 1}, 1.0}, {{1, 2}, 2.0}, {{0, 2}, 3.0}});
}

} // namespace

TEST(Persistence, PathMergesComponents)
{
    const FilteredComplex y({{{0}, 0.0}, {{1}, 0.0}, {{2}, 0.0}, {{0, 1}, 1.0}, {{1, 2}, 2.0}});
    EXPECT_EQ(oracle::as_tuples(compute_persistence(y, 1)), (Bars{{0, 0.0, 1.0}, {0, 0.0, 2.0}, {0, 0.0, inf}}));
}

TEST(Persistence, HollowTriangleHasEssentialLoop)
{
    const auto bc = compute_persistence(hollow_triangle(), 1);
    EXPECT_EQ(oracle::as_tuples(bc), (Bars{{0, 0.0, 1.0}, {0, 0.0, 2.0}, {0, 0.0, inf}, {1, 3.0, inf}}));
    EXPECT_EQ(bc.count(0), 3u);
    EXPECT_EQ(bc.count(1), 1u);
}

TEST(Persistence, FilledTriangleKillsLoop)
{
    auto s = hollow_triangle().simplices();
    s.push_back({{0, 1, 2}, 4.0});
    const auto bc = compute_persistence(FilteredComplex(s), 1);
    EXPECT_EQ(oracle::as_tuples(bc), (Bars{{0, 0.0, 1.0}, {0, 0.0, 2.0}, {0, 0.0, inf}, {1, 3.0, 4.0}}));
}

TEST(Persistence, ZeroLengthBarsAreKeptThenDroppable)
{
    // the edge enters with its second vertex
    const FilteredComplex y({{{0}, 0.0}, {{1}, 1.0}, {{0, 1}, 1.0}});
    const auto bc = compute_persistence(y, 0);
    ASSERT_EQ(bc.intervals.size(), 2u);
    EXPECT_EQ(drop_zero_length(bc).intervals.size(), 1u);
    EXPECT_TRUE(drop_zero_length(bc).intervals[0].essential());
}

TEST(Persistence, MaxDimLimitsReportedBars)
{
    auto s = hollow_triangle().simplices();
    s.push_back({{0, 1, 2}, 4.0});
    const auto bc = compute_persistence(FilteredComplex(s), 0);
    EXPECT_EQ(bc.max_dim(), 0u);
    EXPECT_EQ(bc.count(0), 3u);
}

TEST(Persistence, BettiAt)
{
    const auto bc = compute_persistence(hollow_triangle(), 1);
    EXPECT_EQ(betti_at(bc, -1.0), (std::vector<std::size_t>{0, 0}));
    EXPECT_EQ(betti_at(bc, 0.0), (std::vector<std::size_t>{3, 0}));
    EXPECT_EQ(betti_at(bc, 1.5), (std::vector<std::size_t>{2, 0}));
    EXPECT_EQ(betti_at(bc, 3.0), (std::vector<std::size_t>{1, 1}));
    EXPECT_EQ(betti_at(Barcode{}, 0.0), (std::vector<std::size_t>{0}));
    EXPECT_EQ(betti_at(Barcode{}, 0.0, 2), (std::vector<std::size_t>{0, 0, 0}));
}

TEST(Persistence, FilterBars)
{
    const auto bc = compute_persistence(hollow_triangle(), 1);
    EXPECT_EQ(oracle::as_tuples(filter_bars(bc, 0.0)), oracle::as_tuples(bc));
    // essential bars survive any length without a horizon
    const auto huge = filter_bars(bc, 1e300);
    ASSERT_EQ(huge.intervals.size(), 2u);
    for (const auto& i : huge.intervals) EXPECT_TRUE(i.essential());
    EXPECT_EQ(filter_bars(bc, 1.5).intervals.size(), 3u);
    // with a horizon of 4 the loop spans 1
    EXPECT_EQ(filter_bars(bc, 1.5, 4.0).count(1), 0u);
    EXPECT_EQ(filter_bars(bc, 1.0, 4.0).count(1), 1u);
    EXPECT_THROW(filter_bars(bc, -1.0), InputError);
    EXPECT_EQ(long_bar_counts(bc, 1.5, 4.0, 1), (std::vector<std::size_t>{2, 0}));
}

TEST(Persistence, ReductionIsIdempotent)
{
    std::mt19937_64 rng(3);
    const auto y = oracle::random_filtered(rng, 8, 60);
    EXPECT_EQ(reduce_boundary(y, y.max_dim()), reduce_boundary(y, y.max_dim()));
}

TEST(Persistence, InputOrderOfTiesDoesNotMatter)
{
    std::mt19937_64 rng(5);
    for (int t = 0; t < 20; ++t) {
        const auto y = oracle::random_filtered(rng, 7, 50);
        auto s = y.simplices();
        std::shuffle(s.begin(), s.end(), rng);
        const auto a = compute_persistence(y, 2);
        const auto b = compute_persistence(FilteredComplex(s), 2);
        ASSERT_EQ(a.intervals.size(), b.intervals.size());
        for (std::size_t i = 0; i < a.intervals.size(); ++i) {
            EXPECT_EQ(a.intervals[i].dim, b.intervals[i].dim);
            EXPECT_EQ(a.intervals[i].birth, b.intervals[i].birth);
            EXPECT_EQ(a.intervals[i].death, b.intervals[i].death);
            EXPECT_EQ(a.intervals[i].birth_simplex, b.intervals[i].birth_simplex);
        }
    }
}

TEST(Persistence, MatchesRankOracle)
{
    std::mt19937_64 rng(7);
    std::size_t bars = 0;
    for (int t = 0; t < 60; ++t) {
        const auto y = oracle::random_filtered(rng, 7, 40);
        const auto want = oracle::rank_barcode(y);
        EXPECT_EQ(oracle::as_tuples(compute_persistence(y, y.max_dim())), want) << "trial " << t;
        bars += want.size();
    }
    EXPECT_GT(bars, 100u);
}

TEST(Persistence, EulerCharacteristicFromBars)
{
    std::mt19937_64 rng(11);
    for (int t = 0; t < 20; ++t) {
        const auto y = oracle::random_filtered(rng, 8, 60);
        const auto bc = compute_persistence(y, y.max_dim());
        long chi = 0;
        for (const auto& s : y.simplices()) chi += s.dim() % 2 ? -1 : 1;
        long ess = 0;
        for (const auto& i : bc.intervals)
            if (i.essential()) ess += i.dim % 2 ? -1 : 1;
        EXPECT_EQ(chi, ess);
    }
}

TEST(Persistence, RejectsNonClosedComplex)
{
    const FilteredComplex y({{{0}, 0.0}, {{0, 1}, 1.0}});
    EXPECT_THROW(compute_persistence(y, 1), InputError);
    EXPECT_THROW(reduce_boundary(y, 1), InputError);
}
