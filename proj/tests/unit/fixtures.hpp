#pragma once

#include <string>

#include "densfilt/io.hpp"
#include "densfilt/landmarks.hpp"

namespace fixture {

inline densfilt::PointCloud geyser_points()
{
    return densfilt::io::read_cloud(std::string(DENSFILT_TEST_DATA) + "/faithful_eruptions.csv").points;
}

inline densfilt::GaussianMixture geyser_mixture() { return densfilt::GaussianMixture::uniform(geyser_points(), 0.05); }

/// Grid reference over f >= 0.03 with about 10000 points, as in the eruption example.
inline densfilt::ReferenceSet geyser_grid(const densfilt::GaussianMixture& f)
{
    densfilt::Vector lo(1), hi(1);
    lo << f.centers().matrix().minCoeff() - 0.2;
    hi << f.centers().matrix().maxCoeff() + 0.2;
    return densfilt::grid_reference(f, lo, hi, densfilt::DensityCutoff::from_density(0.03), 10000, 1);
}

inline densfilt::PointCloud line(std::initializer_list<double> xs)
{
    densfilt::RowMatrix m(static_cast<Eigen::Index>(xs.size()), 1);
    Eigen::Index i = 0;
    for (double x : xs) m(i++, 0) = x;
    return densfilt::PointCloud(std::move(m));
}

inline densfilt::PointCloud rows(std::initializer_list<std::initializer_list<double>> r)
{
    std::vector<std::vector<double>> v;
    for (const auto& row : r) v.emplace_back(row);
    return densfilt::PointCloud::from_rows(v);
}

} // namespace fixture
