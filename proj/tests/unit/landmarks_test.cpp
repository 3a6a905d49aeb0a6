#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "densfilt/landmarks.hpp"
#include "fixtures.hpp"

using namespace densfilt;

TEST(Superlevel, LowCutoffKeepsEverything)
{
    const auto f = fixture::geyser_mixture();
    const auto dens = evaluate_batch(f, f.centers());
    const double lowest = *std::min_element(dens.begin(), dens.end());
    const auto ref = superlevel_reference(f, f.centers(), DensityCutoff::from_density(lowest / 2));
    EXPECT_EQ(ref.points.size(), f.size());
    EXPECT_EQ(ref.source, ReferenceSource::data_superlevel);
    EXPECT_EQ(ref.points.matrix(), f.centers().matrix());
}

TEST(Superlevel, EmptyResultIsReported)
{
    const GaussianMixture f(fixture::line({0.0}), {1.0}, 1.0);
    EXPECT_THROW(superlevel_reference(f, f.centers(), DensityCutoff::from_density(2.0)), EmptyReferenceError);
    EXPECT_THROW(DensityCutoff::from_density(0.0), InputError);
}

TEST(Superlevel, GeyserCountMatchesDirectFilter)
{
    const auto f = fixture::geyser_mixture();
    const auto& x = f.centers();
    std::size_t expected = 0;
    std::vector<double> kept;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double d = x.point(i)[0] - x.point(j)[0];
            s += std::exp(-d * d / (2 * 0.05 * 0.05)) / 272.0;
        }
        if (s >= 0.03) {
            ++expected;
            kept.push_back(x.point(i)[0]);
        }
    }
    const auto ref = superlevel_reference(f, x, DensityCutoff::from_density(0.03));
    ASSERT_EQ(ref.points.size(), expected);
    for (std::size_t i = 0; i < expected; ++i) EXPECT_EQ(ref.points.point(i)[0], kept[i]);
}

TEST(Landmarks, SingleGaussianGivesOneExactLandmark)
{
    const GaussianMixture f(fixture::rows({{0.2, -0.4}}), {0.7}, 0.5);
    const ReferenceSet ref{fixture::rows({{0.0, 0.0}, {1.0, 1.0}, {-0.5, 0.3}, {2.0, -1.0}})};
    for (double s : {0.1, 0.5, 0.9}) {
        const auto g = select_landmarks(f, ref, CoverParams{s});
        ASSERT_EQ(g.size(), 1u);
        EXPECT_NEAR(g.coefficients()[0], 0.7, 1e-14);
        EXPECT_NEAR(g.landmarks().point(0)[0], 0.2, 1e-14);
        EXPECT_NEAR(g.landmarks().point(0)[1], -0.4, 1e-14);
    }
}

TEST(Landmarks, WellSeparatedPairGivesTwoLandmarksAtCenters)
{
    const double h = 0.3;
    const GaussianMixture f(fixture::line({0.0, 20 * h}), {1.0, 1.0}, h);
    const auto g = select_landmarks(f, ReferenceSet{f.centers()}, CoverParams{0.5});
    ASSERT_EQ(g.size(), 2u);
    EXPECT_NEAR(g.landmarks().point(0)[0], 0.0, 1e-12);
    EXPECT_NEAR(g.landmarks().point(1)[0], 20 * h, 1e-12);
    EXPECT_NEAR(g.coefficients()[0], 1.0, 1e-12);
    EXPECT_NEAR(g.coefficients()[1], 1.0, 1e-12);
}

TEST(Landmarks, GeyserGridGivesAboutTwentySixLandmarks)
{
    const auto f = fixture::geyser_mixture();
    const auto ref = fixture::geyser_grid(f);
    EXPECT_EQ(ref.source, ReferenceSource::grid);
    EXPECT_NEAR(static_cast<double>(ref.points.size()), 10000.0, 300.0);
    const auto g = select_landmarks(f, ref, CoverParams{0.5});
    EXPECT_GE(g.size(), 22u);
    EXPECT_LE(g.size(), 30u);
}

TEST(Landmarks, SandwichHoldsAndOrderIsByDensity)
{
    const auto f = fixture::geyser_mixture();
    const auto ref = superlevel_reference(f, f.centers(), DensityCutoff::from_density(0.03));
    for (auto rule : {SelectionRule::densest, SelectionRule::greedy_ratio}) {
        const auto g = select_landmarks(f, ref, CoverParams{0.5, rule});
        const auto rep = verify_cover(f, g, ref, 0.5);
        EXPECT_TRUE(rep.ok());
        EXPECT_GE(rep.lower_margin, -1e-10);
        EXPECT_GE(rep.upper_margin, -1e-10);
        EXPECT_LE(g.size(), ref.points.size());
        ASSERT_TRUE(g.provenance());
        if (rule != SelectionRule::densest) continue;
        for (std::size_t i = 1; i < g.size(); ++i)
            EXPECT_LE(f.evaluate(g.provenance()->point(i)), f.evaluate(g.provenance()->point(i - 1)));
    }
}

TEST(Landmarks, EveryTermIsDominatedOffReference)
{
    const auto f = fixture::geyser_mixture();
    const auto g = select_landmarks(f, fixture::geyser_grid(f), CoverParams{0.5});
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.5, 6.0);
    for (int k = 0; k < 2000; ++k) {
        const std::vector<double> x{u(rng)};
        EXPECT_LE(g.evaluate(x).value, f.evaluate(x) * (1 + 1e-12));
    }
}

TEST(Landmarks, Deterministic)
{
    const auto f = fixture::geyser_mixture();
    const auto ref = fixture::geyser_grid(f);
    const auto a = select_landmarks(f, ref, CoverParams{0.5}, {}, 1);
    const auto b = select_landmarks(f, ref, CoverParams{0.5}, {}, 4);
    EXPECT_EQ(a.coefficients(), b.coefficients());
    EXPECT_EQ(a.landmarks().matrix(), b.landmarks().matrix());
}

TEST(Landmarks, InvalidParameter)
{
    const auto f = fixture::geyser_mixture();
    const ReferenceSet ref{f.centers()};
    EXPECT_THROW(select_landmarks(f, ref, CoverParams{1.0}), InputError);
    EXPECT_THROW(select_landmarks(f, ref, CoverParams{0.0}), InputError);
}

TEST(VerifyCover, InflatedCoefficientBreaksLowerBound)
{
    const auto f = fixture::geyser_mixture();
    const auto ref = fixture::geyser_grid(f);
    const auto g = select_landmarks(f, ref, CoverParams{0.5});
    auto b = g.coefficients();
    b[3] *= 2.0;
    const MaxGaussianCover bad(g.landmarks(), b, g.scale());
    const auto rep = verify_cover(f, bad, ref, 0.5);
    EXPECT_GT(rep.lower_violations, 0u);
    EXPECT_LT(rep.lower_margin, 0.0);
    EXPECT_TRUE(rep.worst_point.has_value());
}

TEST(VerifyCover, SmallerParameterStillHolds)
{
    const auto f = fixture::geyser_mixture();
    const auto ref = fixture::geyser_grid(f);
    const auto g = select_landmarks(f, ref, CoverParams{0.5});
    EXPECT_TRUE(verify_cover(f, g, ref, 0.3).ok());
}

TEST(Nested, EqualCutoffsGiveIdenticalCovers)
{
    const auto f = fixture::geyser_mixture();
    const auto grid = fixture::geyser_grid(f);
    const auto rep = nested_reference_property(f, grid, 0.05, 0.05, 0.5, grid.points);
    EXPECT_TRUE(rep.ok());
    EXPECT_EQ(rep.coarse_landmarks, rep.fine_landmarks);
}

TEST(Nested, GeyserPrefixProperty)
{
    const auto f = fixture::geyser_mixture();
    const auto grid = fixture::geyser_grid(f);
    const auto rep = nested_reference_property(f, grid, 0.05, 0.03, 0.5, grid.points);
    EXPECT_TRUE(rep.prefix);
    EXPECT_EQ(rep.pointwise_violations, 0u);
    EXPECT_LE(rep.coarse_landmarks, rep.fine_landmarks);
}

TEST(Nested, SingleGaussianSameLandmark)
{
    const GaussianMixture f(fixture::line({0.0}), {1.0}, 1.0);
    const ReferenceSet ref{fixture::line({-1.0, -0.5, 0.0, 0.5, 1.0})};
    const auto rep = nested_reference_property(f, ref, 0.8, 0.5, 0.5, ref.points);
    EXPECT_TRUE(rep.ok());
    EXPECT_EQ(rep.coarse_landmarks, 1u);
    EXPECT_EQ(rep.fine_landmarks, 1u);
}

TEST(GridReference, RejectsHighDimensionAndEmpty)
{
    const GaussianMixture f(fixture::rows({{0, 0, 0, 0}}), {1.0}, 1.0);
    Vector lo = Vector::Constant(4, -1), hi = Vector::Constant(4, 1);
    EXPECT_THROW(grid_reference(f, lo, hi, DensityCutoff::from_density(0.5), 100), InputError);
    const GaussianMixture f1(fixture::line({0.0}), {1.0}, 1.0);
    Vector lo1 = Vector::Constant(1, -1), hi1 = Vector::Constant(1, 1);
    EXPECT_THROW(grid_reference(f1, lo1, hi1, DensityCutoff::from_density(5.0), 100), EmptyReferenceError);
}
