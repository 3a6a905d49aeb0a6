#pragma once

// Max-of-Gaussians landmark selection.
//
// Starting from g = 0, repeatedly take the densest reference point y that is
// not yet covered (g(y) < s f(y)), fit a Gaussian tangent to f at y and set
// g <- max(g, fit). On termination g <= f <= g / s on the reference set.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "densfilt/mixture.hpp"

namespace densfilt {

enum class ReferenceSource { data_superlevel, explicit_points, grid };

inline std::string to_string(ReferenceSource s)
{
    switch (s) {
    case ReferenceSource::data_superlevel: return "data-superlevel";
    case ReferenceSource::explicit_points: return "explicit";
    case ReferenceSource::grid: return "grid";
    }
    return "unknown";
}

/// Finite set on which the cover inequality is certified.
struct ReferenceSet {
    PointCloud points;
    ReferenceSource source = ReferenceSource::explicit_points;
};

enum class SelectionRule {
    densest,      ///< argmax f over uncovered points; gives nested covers across cutoffs
    greedy_ratio, ///< argmin g/f over uncovered points
};

struct CoverParams {
    double s;
    SelectionRule rule = SelectionRule::densest;

    double epsilon() const { return -std::log(s); }

    void validate() const
    {
        if (!(s > 0.0 && s < 1.0)) throw InputError("cover parameter s must lie in (0, 1)");
    }
};

/// Data points whose density is at least d0, in input order.
inline ReferenceSet superlevel_reference(const GaussianMixture& f, const PointCloud& data, const DensityCutoff& cutoff,
                                         unsigned threads = 0)
{
    if (!(cutoff.d0 > 0.0)) throw InputError("density cutoff must be positive");
    if (data.dim() != f.dim()) throw InputError("data dimension does not match mixture dimension");
    const auto neg_log = evaluate_log_batch(f, data, threads);
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < data.size(); ++i)
        if (neg_log[i] <= cutoff.a0) keep.push_back(i);
    if (keep.empty())
        throw EmptyReferenceError("no data point has density >= " + std::to_string(cutoff.d0));
    return {data.subset(keep), ReferenceSource::data_superlevel};
}

/// Regular grid over an axis-aligned box, restricted to f >= d0. The grid
/// spacing is chosen so that roughly `target` points survive the cutoff.
inline ReferenceSet grid_reference(const GaussianMixture& f, const Vector& lo, const Vector& hi, const DensityCutoff& cutoff,
                                   std::size_t target, unsigned threads = 0)
{
    const std::size_t m = f.dim();
    if (static_cast<std::size_t>(lo.size()) != m || static_cast<std::size_t>(hi.size()) != m)
        throw InputError("grid bounds do not match mixture dimension");
    if (m > 3) throw InputError("grid reference sets are limited to dimension <= 3");
    if (target == 0) throw InputError("grid target count must be positive");

    auto build = [&](std::size_t per_axis) {
        std::size_t total = 1;
        for (std::size_t k = 0; k < m; ++k) total *= per_axis;
        RowMatrix pts(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(m));
        for (std::size_t idx = 0; idx < total; ++idx) {
            std::size_t rest = idx;
            for (std::size_t k = 0; k < m; ++k) {
                const std::size_t c = rest % per_axis;
                rest /= per_axis;
                const double t = per_axis == 1 ? 0.5 : static_cast<double>(c) / static_cast<double>(per_axis - 1);
                const auto kk = static_cast<Eigen::Index>(k);
                pts(static_cast<Eigen::Index>(idx), kk) = lo[kk] + t * (hi[kk] - lo[kk]);
            }
        }
        PointCloud cloud(std::move(pts));
        const auto neg_log = evaluate_log_batch(f, cloud, threads);
        std::vector<std::size_t> keep;
        for (std::size_t i = 0; i < cloud.size(); ++i)
            if (neg_log[i] <= cutoff.a0) keep.push_back(i);
        return std::pair{cloud, keep};
    };

    // pilot pass estimates the fraction of the box above the cutoff
    const std::size_t pilot_axis = m == 1 ? 4096 : (m == 2 ? 128 : 32);
    auto [pilot, pilot_keep] = build(pilot_axis);
    if (pilot_keep.empty()) throw EmptyReferenceError("no grid point has density >= " + std::to_string(cutoff.d0));
    const double frac = static_cast<double>(pilot_keep.size()) / static_cast<double>(pilot.size());
    const double wanted_total = static_cast<double>(target) / frac;
    const auto per_axis = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::llround(std::pow(wanted_total, 1.0 / static_cast<double>(m)))));
    auto [cloud, keep] = build(per_axis);
    if (keep.empty()) throw EmptyReferenceError("no grid point has density >= " + std::to_string(cutoff.d0));
    return {cloud.subset(keep), ReferenceSource::grid};
}

/// Runs the max-of-Gaussians selection. `neg_log_f`, when given, must hold
/// -log f at each reference point.
inline MaxGaussianCover select_landmarks(const GaussianMixture& f, const ReferenceSet& reference, const CoverParams& params,
                                         std::span<const double> neg_log_f = {}, unsigned threads = 0)
{
    params.validate();
    const PointCloud& pts = reference.points;
    if (pts.dim() != f.dim()) throw InputError("reference dimension does not match mixture dimension");
    const std::size_t n = pts.size();
    std::vector<double> fneg;
    if (neg_log_f.size() == n) {
        fneg.assign(neg_log_f.begin(), neg_log_f.end());
    } else {
        fneg = evaluate_log_batch(f, pts, threads);
    }
    const double eps = params.epsilon();

    // -log g at each reference point; +inf while g = 0
    std::vector<double> gneg(n, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> remaining(n);
    std::iota(remaining.begin(), remaining.end(), std::size_t{0});

    const std::size_t m = f.dim();
    std::vector<double> z_rows;
    std::vector<double> y_rows;
    std::vector<double> coeffs;
    const double inv_two_h2 = f.inv_two_h2();

    while (!remaining.empty()) {
        // remaining stays in ascending index order, so strict comparisons
        // break ties toward the lowest index
        std::size_t pick = remaining.front();
        if (params.rule == SelectionRule::densest) {
            for (std::size_t j : remaining)
                if (fneg[j] < fneg[pick]) pick = j;
        } else {
            // largest -log(g/f) = gneg - fneg; infinite while uncovered by any term
            for (std::size_t j : remaining) {
                const double rj = gneg[j] - fneg[j];
                const double rp = gneg[pick] - fneg[pick];
                if (rj > rp || (rj == rp && fneg[j] < fneg[pick])) pick = j;
            }
        }
        const auto fit = gaussfit(f, pts.point(pick));
        for (std::size_t k = 0; k < m; ++k) {
            z_rows.push_back(fit.z[static_cast<Eigen::Index>(k)]);
            y_rows.push_back(pts.point(pick)[k]);
        }
        coeffs.push_back(fit.b);

        parallel_for(remaining.size(), remaining.size() > 4096 ? threads : 1u, [&](std::size_t r) {
            const std::size_t j = remaining[r];
            const double v = squared_distance(pts.point(j), as_span(fit.z)) * inv_two_h2 - fit.log_b;
            if (v < gneg[j]) gneg[j] = v;
        });
        gneg[pick] = std::min(gneg[pick], fneg[pick]);
        std::erase_if(remaining, [&](std::size_t j) { return gneg[j] <= fneg[j] + eps; });
    }

    const auto count = static_cast<Eigen::Index>(coeffs.size());
    const auto dim = static_cast<Eigen::Index>(m);
    RowMatrix z = Eigen::Map<const RowMatrix>(z_rows.data(), count, dim);
    RowMatrix y = Eigen::Map<const RowMatrix>(y_rows.data(), count, dim);
    return MaxGaussianCover(PointCloud(std::move(z)), std::move(coeffs), f.scale(), PointCloud(std::move(y)));
}

struct CoverReport {
    /// min over the reference set of (f - g) / f; should be >= -tolerance
    double lower_margin = std::numeric_limits<double>::infinity();
    /// min over the reference set of (g/s - f) / f; should be >= -tolerance
    double upper_margin = std::numeric_limits<double>::infinity();
    std::size_t lower_violations = 0;
    std::size_t upper_violations = 0;
    std::optional<std::size_t> worst_point;

    bool ok() const { return lower_violations == 0 && upper_violations == 0; }
};

/// Checks g <= f <= g/s pointwise on the reference set, relative tolerance rel_tol.
inline CoverReport verify_cover(const GaussianMixture& f, const MaxGaussianCover& g, const ReferenceSet& reference, double s,
                                double rel_tol = 1e-10, unsigned threads = 0)
{
    if (g.dim() != f.dim() || reference.points.dim() != f.dim()) throw InputError("dimension mismatch in verify_cover");
    if (std::abs(g.scale() - f.scale()) > 1e-12 * f.scale()) throw InputError("cover scale does not match mixture scale");
    const PointCloud& pts = reference.points;
    std::vector<double> lower(pts.size()), upper(pts.size());
    parallel_for(pts.size(), threads, [&](std::size_t j) {
        const double fneg = f.evaluate_log(pts.point(j));
        const double gneg = g.evaluate_log(pts.point(j)).value;
        // ratios in log space: g/f = exp(fneg - gneg)
        const double ratio = std::exp(fneg - gneg);
        lower[j] = 1.0 - ratio;
        upper[j] = ratio / s - 1.0;
    });
    CoverReport rep;
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < pts.size(); ++j) {
        rep.lower_margin = std::min(rep.lower_margin, lower[j]);
        rep.upper_margin = std::min(rep.upper_margin, upper[j]);
        if (lower[j] < -rel_tol) ++rep.lower_violations;
        if (upper[j] < -rel_tol) ++rep.upper_violations;
        const double w = std::min(lower[j], upper[j]);
        if (w < -rel_tol && w < worst) {
            worst = w;
            rep.worst_point = j;
        }
    }
    return rep;
}

struct NestedReport {
    std::size_t coarse_landmarks = 0;
    std::size_t fine_landmarks = 0;
    bool prefix = false;
    std::size_t pointwise_violations = 0;

    bool ok() const { return prefix && pointwise_violations == 0; }
};

/// Runs selection on the reference points with density >= d and >= d_fine
/// (d >= d_fine) and checks that the first cover is a prefix of the second and
/// lies below it on `samples`.
inline NestedReport nested_reference_property(const GaussianMixture& f, const ReferenceSet& reference, double d,
                                              double d_fine, double s, const PointCloud& samples, unsigned threads = 0)
{
    if (!(d >= d_fine && d_fine > 0.0)) throw InputError("nested reference check needs d >= d_fine > 0");
    const auto coarse = superlevel_reference(f, reference.points, DensityCutoff::from_density(d), threads);
    const auto fine = superlevel_reference(f, reference.points, DensityCutoff::from_density(d_fine), threads);
    const CoverParams params{s};
    const auto g_coarse = select_landmarks(f, coarse, params, {}, threads);
    const auto g_fine = select_landmarks(f, fine, params, {}, threads);

    NestedReport rep;
    rep.coarse_landmarks = g_coarse.size();
    rep.fine_landmarks = g_fine.size();
    rep.prefix = g_coarse.size() <= g_fine.size();
    for (std::size_t i = 0; rep.prefix && i < g_coarse.size(); ++i) {
        if (g_coarse.coefficients()[i] != g_fine.coefficients()[i]) rep.prefix = false;
        for (std::size_t k = 0; k < f.dim(); ++k)
            if (g_coarse.landmarks().point(i)[k] != g_fine.landmarks().point(i)[k]) rep.prefix = false;
    }
    for (std::size_t j = 0; j < samples.size(); ++j) {
        const double a = g_coarse.evaluate_log(samples.point(j)).value;
        const double b = g_fine.evaluate_log(samples.point(j)).value;
        // g_coarse <= g_fine  <=>  -log g_coarse >= -log g_fine
        if (a < b - 1e-12 * (1.0 + std::abs(b))) ++rep.pointwise_violations;
    }
    return rep;
}

} // namespace densfilt
