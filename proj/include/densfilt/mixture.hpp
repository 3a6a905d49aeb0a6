#pragma once

// Sums and maxes of equal-scale Gaussian kernels.
//
// Densities here carry no (2*pi)^(-m/2) volume factor: f(x) depends only on
// distances within the data set, so it is not a probability density.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "densfilt/common.hpp"

namespace densfilt {

inline std::span<const double> as_span(const Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

inline double squared_distance(std::span<const double> a, std::span<const double> b)
{
    double d2 = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        d2 += d * d;
    }
    return d2;
}

/// Nonempty collection of points sharing one dimension. Rows of a row-major
/// matrix, so point(i) is contiguous.
class PointCloud {
public:
    explicit PointCloud(RowMatrix points) : points_(std::move(points))
    {
        if (points_.rows() == 0) throw InputError("point cloud is empty");
        if (points_.cols() == 0) throw InputError("point cloud has dimension 0");
        if (!points_.allFinite()) throw InputError("point cloud contains non-finite coordinates");
    }

    static PointCloud from_rows(const std::vector<std::vector<double>>& rows)
    {
        if (rows.empty()) throw InputError("point cloud is empty");
        const std::size_t m = rows.front().size();
        RowMatrix pts(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != m)
                throw InputError("point " + std::to_string(i) + " has dimension " + std::to_string(rows[i].size()) +
                                 ", expected " + std::to_string(m));
            for (std::size_t k = 0; k < m; ++k) pts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
        }
        return PointCloud(std::move(pts));
    }

    std::size_t size() const { return static_cast<std::size_t>(points_.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(points_.cols()); }

    std::span<const double> point(std::size_t i) const
    {
        return {points_.data() + i * dim(), dim()};
    }
    Vector vector(std::size_t i) const { return points_.row(static_cast<Eigen::Index>(i)).transpose(); }

    const RowMatrix& matrix() const { return points_; }

    PointCloud subset(std::span<const std::size_t> indices) const
    {
        RowMatrix out(static_cast<Eigen::Index>(indices.size()), points_.cols());
        for (std::size_t r = 0; r < indices.size(); ++r)
            out.row(static_cast<Eigen::Index>(r)) = points_.row(static_cast<Eigen::Index>(indices[r]));
        return PointCloud(std::move(out));
    }

private:
    RowMatrix points_;
};

/// Density threshold d0 together with its filtration value a0 = -log(d0).
struct DensityCutoff {
    double d0;
    double a0;

    static DensityCutoff from_density(double d0)
    {
        if (!(d0 > 0.0) || !std::isfinite(d0)) throw InputError("density cutoff must be positive and finite");
        return {d0, -std::log(d0)};
    }
    static DensityCutoff from_level(double a0) { return {std::exp(-a0), a0}; }
};

/// f(x) = sum_i a_i exp(-|x - x_i|^2 / (2 h^2)) with every a_i > 0.
class GaussianMixture {
public:
    GaussianMixture(PointCloud centers, std::vector<double> coefficients, double scale)
        : centers_(std::move(centers)), coefficients_(std::move(coefficients)), scale_(scale)
    {
        if (coefficients_.size() != centers_.size())
            throw InputError("coefficient count " + std::to_string(coefficients_.size()) + " does not match center count " +
                             std::to_string(centers_.size()));
        if (!(scale_ > 0.0) || !std::isfinite(scale_)) throw InputError("scale parameter h must be positive");
        log_coefficients_.reserve(coefficients_.size());
        for (double a : coefficients_) {
            if (!(a > 0.0) || !std::isfinite(a)) throw InputError("mixture coefficients must be positive and finite");
            log_coefficients_.push_back(std::log(a));
        }
        inv_two_h2_ = 1.0 / (2.0 * scale_ * scale_);
    }

    /// Uniform coefficients 1/N, the default estimator for a data set.
    static GaussianMixture uniform(PointCloud centers, double scale)
    {
        std::vector<double> a(centers.size(), 1.0 / static_cast<double>(centers.size()));
        return GaussianMixture(std::move(centers), std::move(a), scale);
    }

    const PointCloud& centers() const { return centers_; }
    const std::vector<double>& coefficients() const { return coefficients_; }
    double scale() const { return scale_; }
    std::size_t dim() const { return centers_.dim(); }
    std::size_t size() const { return centers_.size(); }

    void check_dim(std::span<const double> x) const
    {
        if (x.size() != dim())
            throw InputError("point has dimension " + std::to_string(x.size()) + ", mixture has " + std::to_string(dim()));
    }

    /// Kernel rho(x, y) = exp(-|x-y|^2 / (2h^2)).
    double kernel(std::span<const double> x, std::span<const double> y) const
    {
        return std::exp(-squared_distance(x, y) * inv_two_h2_);
    }

    double evaluate(std::span<const double> x) const
    {
        check_dim(x);
        double sum = 0.0;
        for (std::size_t i = 0; i < size(); ++i)
            sum += coefficients_[i] * std::exp(-squared_distance(x, centers_.point(i)) * inv_two_h2_);
        if (sum >= 1e-300) return sum;
        return std::exp(-evaluate_log(x));
    }

    /// -log f(x) by a streaming log-sum-exp, finite for every finite x.
    double evaluate_log(std::span<const double> x) const
    {
        check_dim(x);
        double top = -std::numeric_limits<double>::infinity();
        double acc = 0.0;
        for (std::size_t i = 0; i < size(); ++i) {
            const double e = log_coefficients_[i] - squared_distance(x, centers_.point(i)) * inv_two_h2_;
            if (e > top) {
                acc = acc * std::exp(top - e) + 1.0;
                top = e;
            } else {
                acc += std::exp(e - top);
            }
        }
        return -(top + std::log(acc));
    }

    Vector gradient(std::span<const double> x) const
    {
        check_dim(x);
        Vector g = Vector::Zero(static_cast<Eigen::Index>(dim()));
        const double inv_h2 = 2.0 * inv_two_h2_;
        for (std::size_t i = 0; i < size(); ++i) {
            const auto c = centers_.point(i);
            const double w = coefficients_[i] * std::exp(-squared_distance(x, c) * inv_two_h2_) * inv_h2;
            for (std::size_t k = 0; k < dim(); ++k) g[static_cast<Eigen::Index>(k)] += w * (c[k] - x[k]);
        }
        return g;
    }

    double inv_two_h2() const { return inv_two_h2_; }
    const std::vector<double>& log_coefficients() const { return log_coefficients_; }

    /// Same mixture with every center shifted by v.
    GaussianMixture translated(std::span<const double> v) const
    {
        RowMatrix pts = centers_.matrix();
        for (Eigen::Index i = 0; i < pts.rows(); ++i)
            for (Eigen::Index k = 0; k < pts.cols(); ++k) pts(i, k) += v[static_cast<std::size_t>(k)];
        return GaussianMixture(PointCloud(std::move(pts)), coefficients_, scale_);
    }

private:
    PointCloud centers_;
    std::vector<double> coefficients_;
    std::vector<double> log_coefficients_;
    double scale_;
    double inv_two_h2_;
};

inline std::vector<double> evaluate_batch(const GaussianMixture& f, const PointCloud& xs, unsigned threads = 0)
{
    std::vector<double> out(xs.size());
    parallel_for(xs.size(), threads, [&](std::size_t i) { out[i] = f.evaluate(xs.point(i)); });
    return out;
}

inline std::vector<double> evaluate_log_batch(const GaussianMixture& f, const PointCloud& xs, unsigned threads = 0)
{
    std::vector<double> out(xs.size());
    parallel_for(xs.size(), threads, [&](std::size_t i) { out[i] = f.evaluate_log(xs.point(i)); });
    return out;
}

/// Single Gaussian b * rho(z, .) tangent to f at the fit point.
struct GaussianFit {
    double b;
    double log_b;
    Vector z;
    /// Convex weights t_i = a_i rho(y, x_i) / c with z = sum_i t_i x_i.
    std::vector<double> weights;
};

/// Fits f to first order at y. The result touches f at y and lies below f
/// everywhere; z is a convex combination of the centers.
inline GaussianFit gaussfit(const GaussianMixture& f, std::span<const double> y)
{
    f.check_dim(y);
    const std::size_t n = f.size();
    const std::size_t m = f.dim();
    std::vector<double> e(n);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        e[i] = f.log_coefficients()[i] - squared_distance(y, f.centers().point(i)) * f.inv_two_h2();
        top = std::max(top, e[i]);
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        e[i] = std::exp(e[i] - top);
        total += e[i];
    }
    const double log_c = top + std::log(total);
    Vector z = Vector::Zero(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < n; ++i) {
        e[i] /= total;
        const auto c = f.centers().point(i);
        for (std::size_t k = 0; k < m; ++k) z[static_cast<Eigen::Index>(k)] += e[i] * c[k];
    }
    const double log_b = log_c + squared_distance(as_span(z), y) * f.inv_two_h2();
    return {std::exp(log_b), log_b, std::move(z), std::move(e)};
}

/// g(x) = max_i b_i rho(x, z_i); the lower envelope produced by landmark selection.
class MaxGaussianCover {
public:
    MaxGaussianCover(PointCloud landmarks, std::vector<double> coefficients, double scale,
                     std::optional<PointCloud> provenance = std::nullopt)
        : landmarks_(std::move(landmarks)), coefficients_(std::move(coefficients)), scale_(scale),
          provenance_(std::move(provenance))
    {
        if (coefficients_.size() != landmarks_.size()) throw InputError("cover coefficient count does not match landmark count");
        if (!(scale_ > 0.0)) throw InputError("cover scale must be positive");
        for (double b : coefficients_) {
            if (!(b > 0.0) || !std::isfinite(b)) throw InputError("cover coefficients must be positive and finite");
            log_coefficients_.push_back(std::log(b));
        }
        if (provenance_ && provenance_->size() != landmarks_.size())
            throw InputError("cover provenance count does not match landmark count");
        inv_two_h2_ = 1.0 / (2.0 * scale_ * scale_);
    }

    const PointCloud& landmarks() const { return landmarks_; }
    const std::vector<double>& coefficients() const { return coefficients_; }
    const std::vector<double>& log_coefficients() const { return log_coefficients_; }
    double scale() const { return scale_; }
    std::size_t size() const { return landmarks_.size(); }
    std::size_t dim() const { return landmarks_.dim(); }
    const std::optional<PointCloud>& provenance() const { return provenance_; }

    struct Value {
        double value;
        std::size_t index;
    };

    /// Maximum kernel term and the lowest index attaining it.
    Value evaluate(std::span<const double> x) const
    {
        const auto best = evaluate_log(x);
        return {std::exp(-best.value), best.index};
    }

    /// -log g(x) = min_i (|x - z_i|^2 / (2h^2) - log b_i), lowest index on ties.
    Value evaluate_log(std::span<const double> x) const
    {
        if (x.size() != dim()) throw InputError("point dimension does not match cover dimension");
        Value best{std::numeric_limits<double>::infinity(), 0};
        for (std::size_t i = 0; i < size(); ++i) {
            const double v = squared_distance(x, landmarks_.point(i)) * inv_two_h2_ - log_coefficients_[i];
            if (v < best.value) best = {v, i};
        }
        return best;
    }

private:
    PointCloud landmarks_;
    std::vector<double> coefficients_;
    std::vector<double> log_coefficients_;
    double scale_;
    double inv_two_h2_ = 0.0;
    std::optional<PointCloud> provenance_;
};

} // namespace densfilt
