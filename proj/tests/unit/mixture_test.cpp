#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "densfilt/mixture.hpp"
#include "fixtures.hpp"

using namespace densfilt;

namespace {

std::vector<double> v(std::initializer_list<double> x) { return x; }

GaussianMixture random_mixture(std::mt19937_64& rng, std::size_t n, std::size_t m)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.05, 1.0), hs(0.3, 1.2);
    RowMatrix c(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = u(rng);
    std::vector<double> a(n);
    for (auto& x : a) x = pos(rng);
    return GaussianMixture(PointCloud(std::move(c)), std::move(a), hs(rng));
}

} // namespace

TEST(Mixture, KernelAtCenterIsCoefficient)
{
    const GaussianMixture f(fixture::line({0.0}), {1.0}, 1.0);
    EXPECT_DOUBLE_EQ(f.evaluate(v({0.0})), 1.0);
    EXPECT_DOUBLE_EQ(f.evaluate_log(v({0.0})), 0.0);
}

TEST(Mixture, DirectFormulaAtDistanceSqrt2)
{
    const GaussianMixture f(fixture::rows({{0.0, 0.0}}), {1.0}, 1.0);
    EXPECT_NEAR(f.evaluate(v({1.0, 1.0})), std::exp(-1.0), 1e-15);
    EXPECT_NEAR(f.evaluate(v({1.0, 1.0})), 0.3678794, 1e-7);
}

TEST(Mixture, GeyserMatchesDoubleLoop)
{
    const auto pts = fixture::geyser_points();
    const auto f = GaussianMixture::uniform(pts, 0.05);
    ASSERT_EQ(pts.size(), 272u);
    double ref = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double d = 2.0 - pts.point(i)[0];
        ref += std::exp(-d * d / (2 * 0.05 * 0.05)) / 272.0;
    }
    EXPECT_NEAR(f.evaluate(v({2.0})), ref, 1e-12 * ref);
}

TEST(Mixture, LogOfFarPointIsExactQuadratic)
{
    const GaussianMixture f(fixture::line({0.0}), {1.0}, 1.0);
    // |x - c|^2 / (2h^2) = 200 at |x| = 20h
    EXPECT_NEAR(f.evaluate_log(v({20.0})), 200.0, 1e-12);
    // far enough that the plain sum underflows
    EXPECT_NEAR(f.evaluate_log(v({60.0})), 1800.0, 1e-9);
    EXPECT_TRUE(std::isfinite(f.evaluate_log(v({1e3}))));
}

TEST(Mixture, LogAndValueAgree)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 200; ++trial) {
        const auto f = random_mixture(rng, 1 + trial % 9, 1 + trial % 4);
        std::vector<double> x(f.dim());
        for (auto& c : x) c = u(rng);
        const double val = f.evaluate(x);
        if (val <= 1e-300) continue;
        EXPECT_NEAR(std::exp(-f.evaluate_log(x)), val, 1e-10 * val);
    }
}

TEST(Mixture, DimensionMismatchIsInputError)
{
    const GaussianMixture f(fixture::rows({{0.0, 0.0}}), {1.0}, 1.0);
    EXPECT_THROW(f.evaluate(v({1.0})), InputError);
    EXPECT_THROW(f.evaluate_log(v({1.0, 2.0, 3.0})), InputError);
    EXPECT_THROW(f.gradient(v({1.0})), InputError);
    EXPECT_THROW(gaussfit(f, v({1.0})), InputError);
}

TEST(Mixture, ConstructionValidates)
{
    EXPECT_THROW(GaussianMixture(fixture::line({0.0, 1.0}), {1.0}, 1.0), InputError);
    EXPECT_THROW(GaussianMixture(fixture::line({0.0}), {0.0}, 1.0), InputError);
    EXPECT_THROW(GaussianMixture(fixture::line({0.0}), {1.0}, 0.0), InputError);
    EXPECT_THROW(PointCloud(RowMatrix(0, 2)), InputError);
    EXPECT_THROW(PointCloud::from_rows({{1.0, 2.0}, {3.0}}), InputError);
}

TEST(Mixture, GradientSymmetricPairVanishes)
{
    const GaussianMixture f(fixture::line({-1.0, 1.0}), {0.5, 0.5}, 1.0);
    EXPECT_NEAR(f.gradient(v({0.0}))[0], 0.0, 1e-16);
}

TEST(Mixture, GradientSingleTerm)
{
    const double h = 0.7;
    const GaussianMixture f(fixture::rows({{0.3, -0.2}}), {2.0}, h);
    const auto x = v({1.0, 0.5});
    const double rho = std::exp(-((0.7 * 0.7) + (0.7 * 0.7)) / (2 * h * h));
    const Vector g = f.gradient(x);
    EXPECT_NEAR(g[0], 2.0 * rho * (0.3 - 1.0) / (h * h), 1e-14);
    EXPECT_NEAR(g[1], 2.0 * rho * (-0.2 - 0.5) / (h * h), 1e-14);
}

TEST(Mixture, GradientMatchesFiniteDifferences)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int trial = 0; trial < 50; ++trial) {
        const auto f = random_mixture(rng, 6, 3);
        std::vector<double> x(3);
        for (auto& c : x) c = u(rng);
        const Vector g = f.gradient(x);
        for (std::size_t k = 0; k < 3; ++k) {
            auto xp = x, xm = x;
            xp[k] += 1e-5;
            xm[k] -= 1e-5;
            EXPECT_NEAR(g[static_cast<Eigen::Index>(k)], (f.evaluate(xp) - f.evaluate(xm)) / 2e-5, 1e-6);
        }
    }
}

TEST(Mixture, TranslationEquivariance)
{
    std::mt19937_64 rng(3);
    const auto f = random_mixture(rng, 5, 2);
    const auto shift = v({0.4, -1.3});
    const auto g = f.translated(shift);
    const auto x = v({0.2, 0.1});
    const auto xs = v({0.6, -1.2});
    EXPECT_NEAR(g.evaluate(xs), f.evaluate(x), 1e-12 * f.evaluate(x));
    const auto a = gaussfit(f, x);
    const auto b = gaussfit(g, xs);
    EXPECT_NEAR(b.b, a.b, 1e-12 * a.b);
    EXPECT_NEAR(b.z[0], a.z[0] + shift[0], 1e-12);
    EXPECT_NEAR(b.z[1], a.z[1] + shift[1], 1e-12);
}

TEST(GaussFit, SingleCenterRecoversItself)
{
    const GaussianMixture f(fixture::rows({{0.5, 2.0}}), {0.3}, 0.8);
    const auto fit = gaussfit(f, v({-1.0, 4.0}));
    EXPECT_NEAR(fit.b, 0.3, 1e-14);
    EXPECT_NEAR(fit.z[0], 0.5, 1e-14);
    EXPECT_NEAR(fit.z[1], 2.0, 1e-14);
}

TEST(GaussFit, SymmetricPair)
{
    const GaussianMixture f(fixture::line({-1.0, 1.0}), {0.5, 0.5}, 1.0);
    const auto fit = gaussfit(f, v({0.0}));
    EXPECT_NEAR(fit.z[0], 0.0, 1e-15);
    EXPECT_NEAR(fit.b, std::exp(-0.5), 1e-15);
    EXPECT_NEAR(fit.b, 0.6065307, 1e-7);
}

TEST(GaussFit, AsymmetricPairIsTangentAndBelow)
{
    const GaussianMixture f(fixture::line({0.0, 2.0}), {0.5, 0.5}, 1.0);
    const auto fit = gaussfit(f, v({0.0}));
    // t = (1, e^-2) / (1 + e^-2), z = 2 t_2; b = c e^{z^2/2}
    const double e2 = std::exp(-2.0);
    const double z = 2.0 * e2 / (1.0 + e2);
    const double b = 0.5 * (1.0 + e2) * std::exp(z * z / 2.0);
    EXPECT_NEAR(fit.z[0], z, 1e-15);
    EXPECT_NEAR(fit.z[0], 0.2384058, 1e-7);
    EXPECT_NEAR(fit.b, b, 1e-15);
    EXPECT_NEAR(fit.b, 0.5840, 5e-5);

    auto g = [&](double x) { return fit.b * std::exp(-(x - fit.z[0]) * (x - fit.z[0]) / 2.0); };
    EXPECT_NEAR(g(0.0), f.evaluate(v({0.0})), 1e-15);
    const double dg = fit.b * std::exp(-fit.z[0] * fit.z[0] / 2.0) * fit.z[0];
    EXPECT_NEAR(dg, f.gradient(v({0.0}))[0], 1e-15);
    for (int k = 0; k <= 10000; ++k) {
        const double x = -6.0 + 14.0 * k / 10000.0;
        EXPECT_LE(g(x), f.evaluate(v({x})) * (1 + 1e-12)) << "x=" << x;
    }
}

TEST(GaussFit, RandomTangencyDominationAndConvexity)
{
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t m = 1 + static_cast<std::size_t>(trial % 6);
        const auto f = random_mixture(rng, 1 + static_cast<std::size_t>(rng() % 10), m);
        std::vector<double> y(m), x(m);
        for (auto& c : y) c = u(rng);
        for (auto& c : x) c = u(rng);
        const auto fit = gaussfit(f, y);
        const double h2 = f.scale() * f.scale();
        auto g = [&](std::span<const double> p) { return fit.b * std::exp(-squared_distance(p, as_span(fit.z)) / (2 * h2)); };

        const double fy = f.evaluate(y);
        EXPECT_NEAR(g(y), fy, 1e-10 * fy);
        Vector gg(static_cast<Eigen::Index>(m));
        for (std::size_t k = 0; k < m; ++k) gg[static_cast<Eigen::Index>(k)] = g(y) * (fit.z[static_cast<Eigen::Index>(k)] - y[k]) / h2;
        const Vector fg = f.gradient(y);
        EXPECT_LE((gg - fg).norm(), 1e-8 * (1 + fg.norm()));
        EXPECT_LE(g(x), f.evaluate(x) * (1 + 1e-12));

        double sum = 0.0;
        for (double t : fit.weights) {
            EXPECT_GT(t, 0.0);
            sum += t;
        }
        EXPECT_NEAR(sum, 1.0, 1e-12);
    }
}

TEST(Cover, OneLandmarkIsItsKernel)
{
    const MaxGaussianCover g(fixture::line({1.0}), {0.4}, 0.5);
    const auto r = g.evaluate(v({1.5}));
    EXPECT_NEAR(r.value, 0.4 * std::exp(-0.25 / 0.5), 1e-15);
    EXPECT_EQ(r.index, 0u);
}

TEST(Cover, DominatedDuplicateLoses)
{
    const MaxGaussianCover g(fixture::line({0.0, 0.0}), {1.0, 2.0}, 1.0);
    for (double x : {-3.0, 0.0, 0.7, 5.0}) {
        const auto r = g.evaluate(v({x}));
        EXPECT_EQ(r.index, 1u);
        EXPECT_NEAR(r.value, 2.0 * std::exp(-x * x / 2.0), 1e-15);
    }
}

TEST(Cover, TiesGoToLowestIndex)
{
    const MaxGaussianCover g(fixture::line({-1.0, 1.0}), {1.0, 1.0}, 1.0);
    EXPECT_EQ(g.evaluate(v({0.0})).index, 0u);
}

TEST(Cover, GeyserMatchesBruteForceMax)
{
    const auto f = fixture::geyser_mixture();
    const auto g = select_landmarks(f, fixture::geyser_grid(f), CoverParams{0.5});
    const auto x = v({2.0});
    double best = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double d = 2.0 - g.landmarks().point(i)[0];
        best = std::max(best, g.coefficients()[i] * std::exp(-d * d / (2 * 0.05 * 0.05)));
    }
    EXPECT_NEAR(g.evaluate(x).value, best, 1e-12 * best);
}
