#pragma once

// Density weights on an alpha complex and the containment checks that tie
// them to the cover's alpha weights.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "densfilt/alpha.hpp"
#include "densfilt/mixture.hpp"
#include "densfilt/simplex.hpp"

namespace densfilt {

struct FilteredSimplex {
    VertexSet vertices;
    double weight;

    std::size_t dim() const { return simplex_dim(vertices); }
};

/// Simplices in filtration order: weight, then dimension, then vertices.
/// Weights are -log density.
class FilteredComplex {
public:
    FilteredComplex() = default;
    explicit FilteredComplex(std::vector<FilteredSimplex> simplices) : simplices_(std::move(simplices))
    {
        for (auto& s : simplices_) {
            if (s.vertices.empty()) throw InputError("filtered complex contains an empty simplex");
            if (!std::is_sorted(s.vertices.begin(), s.vertices.end()) ||
                std::adjacent_find(s.vertices.begin(), s.vertices.end()) != s.vertices.end())
                throw InputError("simplex vertices must be strictly increasing");
            if (std::isnan(s.weight)) throw InputError("simplex weight is NaN");
        }
        std::stable_sort(simplices_.begin(), simplices_.end(), order);
    }

    static bool order(const FilteredSimplex& a, const FilteredSimplex& b)
    {
        if (a.weight != b.weight) return a.weight < b.weight;
        return dim_lex_less(a.vertices, b.vertices);
    }

    const std::vector<FilteredSimplex>& simplices() const { return simplices_; }
    std::size_t size() const { return simplices_.size(); }
    const FilteredSimplex& operator[](std::size_t i) const { return simplices_[i]; }
    static constexpr const char* units = "neg_log_density";

    SimplexIndex index() const
    {
        SimplexIndex idx;
        idx.reserve(simplices_.size());
        for (std::size_t i = 0; i < simplices_.size(); ++i) idx.emplace(simplices_[i].vertices, i);
        return idx;
    }

    /// Weight of each vertex set, in filtration order.
    double weight_of(const VertexSet& v, const SimplexIndex& idx) const { return simplices_[idx.at(v)].weight; }

    std::size_t max_dim() const
    {
        std::size_t d = 0;
        for (const auto& s : simplices_) d = std::max(d, s.dim());
        return d;
    }

    /// Throws InputError unless every facet precedes its simplex with a
    /// weight no larger, and no vertex set repeats.
    void validate() const
    {
        SimplexIndex seen;
        seen.reserve(simplices_.size());
        for (std::size_t i = 0; i < simplices_.size(); ++i) {
            const auto& s = simplices_[i];
            for (const auto& f : facets(s.vertices)) {
                auto it = seen.find(f);
                if (it == seen.end())
                    throw InputError("facet of simplex " + std::to_string(i) + " is missing or appears after it");
                if (simplices_[it->second].weight > s.weight)
                    throw InputError("simplex " + std::to_string(i) + " has a smaller weight than one of its facets");
            }
            if (!seen.emplace(s.vertices, i).second) throw InputError("duplicate simplex in filtered complex");
        }
    }

private:
    std::vector<FilteredSimplex> simplices_;
};

/// The alpha weights themselves as a filtration.
inline FilteredComplex alpha_filtration(const AlphaComplex& x)
{
    std::vector<FilteredSimplex> out;
    out.reserve(x.simplices.size());
    for (const auto& s : x.simplices) out.push_back({s.vertices, s.alpha_weight});
    return FilteredComplex(std::move(out));
}

/// w(sigma) = max over faces tau of -log f(q_tau). Relies on the complex
/// listing faces before cofaces (build_alpha order).
inline FilteredComplex denswit_weights(const GaussianMixture& f, const AlphaComplex& x, unsigned threads = 0)
{
    const auto& sx = x.simplices;
    std::vector<double> own(sx.size());
    parallel_for(sx.size(), threads, [&](std::size_t i) { own[i] = f.evaluate_log(as_span(sx[i].barycenter)); });

    SimplexIndex idx;
    idx.reserve(sx.size());
    std::vector<double> w(sx.size());
    for (std::size_t i = 0; i < sx.size(); ++i) {
        double v = own[i];
        for (const auto& fc : facets(sx[i].vertices)) {
            auto it = idx.find(fc);
            if (it == idx.end()) throw InputError("alpha complex is not face-closed or not in face order");
            v = std::max(v, w[it->second]);
        }
        w[i] = v;
        idx.emplace(sx[i].vertices, i);
    }
    std::vector<FilteredSimplex> out;
    out.reserve(sx.size());
    for (std::size_t i = 0; i < sx.size(); ++i) out.push_back({sx[i].vertices, w[i]});
    return FilteredComplex(std::move(out));
}

namespace detail {

/// Compositions of r into `parts` nonnegative integers.
inline void compositions(std::size_t r, std::size_t parts, std::vector<std::size_t>& cur,
                         std::vector<std::vector<std::size_t>>& out)
{
    if (cur.size() + 1 == parts) {
        cur.push_back(r);
        out.push_back(cur);
        cur.pop_back();
        return;
    }
    for (std::size_t k = 0; k <= r; ++k) {
        cur.push_back(k);
        compositions(r - k, parts, cur, out);
        cur.pop_back();
    }
}

} // namespace detail

/// Samples max of -log f(phi(x)) over |sigma|, where phi is linear on the
/// barycentric subdivision with value q_tau at the barycenter of tau. Every
/// flag tau_0 < ... < tau_k = sigma spans one simplex of the subdivision; we
/// evaluate on the union of its barycentric grids of resolution 1..r.
inline FilteredComplex subdens_weight_sampled(const GaussianMixture& f, const AlphaComplex& x, std::size_t resolution,
                                              unsigned threads = 0)
{
    if (resolution < 1) throw InputError("subdens resolution must be at least 1");
    const auto& sx = x.simplices;
    const auto idx = x.index();
    const std::size_t m = x.diagram.landmarks.dim();

    std::vector<double> w(sx.size());
    parallel_for(sx.size(), threads, [&](std::size_t i) {
        const VertexSet& sigma = sx[i].vertices;
        const std::size_t k = sigma.size();
        std::vector<std::vector<std::vector<std::size_t>>> grids(resolution + 1);
        for (std::size_t r = 1; r <= resolution; ++r) {
            std::vector<std::size_t> cur;
            detail::compositions(r, k, cur, grids[r]);
        }
        double best = -std::numeric_limits<double>::infinity();
        std::vector<std::size_t> perm(k);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::vector<const Vector*> q(k);
        Vector y(static_cast<Eigen::Index>(m));
        do {
            // flag: tau_j = first j+1 vertices of the permutation
            for (std::size_t j = 0; j < k; ++j) {
                VertexSet tau(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(j + 1));
                for (auto& t : tau) t = sigma[t];
                std::sort(tau.begin(), tau.end());
                q[j] = &sx[idx.at(tau)].barycenter;
            }
            for (std::size_t r = 1; r <= resolution; ++r) {
                for (const auto& c : grids[r]) {
                    y.setZero();
                    for (std::size_t j = 0; j < k; ++j)
                        if (c[j]) y += (static_cast<double>(c[j]) / static_cast<double>(r)) * *q[j];
                    best = std::max(best, f.evaluate_log(as_span(y)));
                }
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        w[i] = best;
    });
    std::vector<FilteredSimplex> out;
    out.reserve(sx.size());
    for (std::size_t i = 0; i < sx.size(); ++i) out.push_back({sx[i].vertices, w[i]});
    return FilteredComplex(std::move(out));
}

struct InterleavingViolation {
    VertexSet simplex;
    std::string detail;
};

struct InterleavingReport {
    double epsilon = 0.0;
    /// max over simplices of w_X - w_Y
    double max_weight_gap = 0.0;
    std::vector<InterleavingViolation> violations;
    std::size_t sample_containment_failures = 0;
    std::size_t unconditional_checked = 0;
    std::size_t conditional_checked = 0;
    std::size_t samples_checked = 0;

    bool ok() const { return violations.empty() && sample_containment_failures == 0; }
};

/// X carries alpha weights, Y the density weights on the same simplices.
/// Unconditional: w_Y <= w_X. Conditional, wherever f(q_sigma) <= g(q_sigma)/s
/// holds: w_X - eps <= w_Y. On samples with -log f(x) <= a0:
/// -log g(x) <= -log f(x) + eps.
inline InterleavingReport check_interleaving(const GaussianMixture& f, const MaxGaussianCover& g, const AlphaComplex& x,
                                             const FilteredComplex& y, double a0, const PointCloud* samples, double s,
                                             double tol = 1e-9, unsigned threads = 0)
{
    if (!(s > 0.0 && s <= 1.0)) throw InputError("cover parameter s must lie in (0, 1]");
    InterleavingReport rep;
    rep.epsilon = -std::log(s);
    const double eps = rep.epsilon;
    const auto yidx = y.index();
    if (yidx.size() != x.simplices.size()) throw InputError("filtered complexes do not share their simplices");

    const auto& sx = x.simplices;
    std::vector<double> logf(sx.size()), logg(sx.size());
    parallel_for(sx.size(), threads, [&](std::size_t i) {
        logf[i] = f.evaluate_log(as_span(sx[i].barycenter));
        logg[i] = g.evaluate_log(as_span(sx[i].barycenter)).value;
    });
    rep.max_weight_gap = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < sx.size(); ++i) {
        auto it = yidx.find(sx[i].vertices);
        if (it == yidx.end()) throw InputError("filtered complexes do not share their simplices");
        const double wx = sx[i].alpha_weight;
        const double wy = y[it->second].weight;
        const double slack = tol * std::max(1.0, std::abs(wx));
        rep.max_weight_gap = std::max(rep.max_weight_gap, wx - wy);
        ++rep.unconditional_checked;
        if (wy > wx + slack)
            rep.violations.push_back({sx[i].vertices, "density weight " + std::to_string(wy) + " exceeds alpha weight " +
                                                          std::to_string(wx)});
        if (logf[i] >= logg[i] - eps - slack) {
            ++rep.conditional_checked;
            if (wx - eps > wy + slack)
                rep.violations.push_back({sx[i].vertices, "alpha weight " + std::to_string(wx) +
                                                              " exceeds density weight plus epsilon " +
                                                              std::to_string(wy + eps)});
        }
    }
    if (sx.empty()) rep.max_weight_gap = 0.0;

    if (samples) {
        std::vector<char> fail(samples->size(), 0), used(samples->size(), 0);
        parallel_for(samples->size(), threads, [&](std::size_t i) {
            const double lf = f.evaluate_log(samples->point(i));
            if (lf > a0) return;
            used[i] = 1;
            const double lg = g.evaluate_log(samples->point(i)).value;
            fail[i] = lg > lf + eps + tol * std::max(1.0, std::abs(lf));
        });
        for (std::size_t i = 0; i < samples->size(); ++i) {
            rep.samples_checked += static_cast<std::size_t>(used[i]);
            rep.sample_containment_failures += static_cast<std::size_t>(fail[i]);
        }
    }
    return rep;
}

} // namespace densfilt
