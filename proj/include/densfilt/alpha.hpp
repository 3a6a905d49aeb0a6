#pragma once

// Power diagram of a max-of-Gaussians cover and its weighted alpha complex.
//
// With p_i = 2 h^2 log b_i the power distance satisfies
//   min_i (|x - z_i|^2 - p_i) = -2 h^2 log g(x),
// so alpha weights divided by 2h^2 are in -log density units.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "densfilt/mixture.hpp"
#include "densfilt/qp.hpp"
#include "densfilt/simplex.hpp"

namespace densfilt {

struct PowerDiagram {
    PointCloud landmarks;
    std::vector<double> powers;
    double scale;

    PowerDiagram(PointCloud z, std::vector<double> p, double h) : landmarks(std::move(z)), powers(std::move(p)), scale(h)
    {
        if (powers.size() != landmarks.size()) throw InputError("power count does not match landmark count");
        if (!(scale > 0.0)) throw InputError("power diagram scale must be positive");
    }

    double two_h2() const { return 2.0 * scale * scale; }

    /// min_i (|x - z_i|^2 - p_i) together with the lowest minimising index.
    std::pair<double, std::size_t> weight(std::span<const double> x) const
    {
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t i = 0; i < landmarks.size(); ++i) {
            const double w = squared_distance(x, landmarks.point(i)) - powers[i];
            if (w < best) {
                best = w;
                arg = i;
            }
        }
        return {best, arg};
    }
};

inline PowerDiagram power_from_cover(const MaxGaussianCover& g)
{
    const double two_h2 = 2.0 * g.scale() * g.scale();
    std::vector<double> p;
    p.reserve(g.size());
    for (double lb : g.log_coefficients()) p.push_back(two_h2 * lb);
    return PowerDiagram(g.landmarks(), std::move(p), g.scale());
}

struct SimplexRecord {
    VertexSet vertices;
    /// -log density units: power_objective / (2h^2)
    double alpha_weight;
    /// minimiser q_sigma of the power distance on the cell intersection
    Vector barycenter;
    /// squared-distance units
    double power_objective;

    std::size_t dim() const { return simplex_dim(vertices); }
};

struct AlphaComplex {
    PowerDiagram diagram;
    /// sorted by dimension, then lexicographically
    std::vector<SimplexRecord> simplices;
    std::size_t max_dim = 0;
    std::optional<double> level_cap;

    SimplexIndex index() const
    {
        SimplexIndex idx;
        idx.reserve(simplices.size());
        for (std::size_t i = 0; i < simplices.size(); ++i) idx.emplace(simplices[i].vertices, i);
        return idx;
    }

    std::vector<std::size_t> counts() const
    {
        std::vector<std::size_t> c(max_dim + 1, 0);
        for (const auto& s : simplices) ++c[s.dim()];
        return c;
    }
};

struct AlphaOptions {
    std::size_t max_dim = 3;
    /// keep simplices with alpha_weight <= level_cap (-log density units)
    std::optional<double> level_cap;
    /// skip vertex pairs whose weighted balls at the cap cannot meet
    bool edge_prefilter = false;
    QpOptions qp;
    unsigned threads = 0;
};

namespace detail {

inline std::string describe(const VertexSet& v)
{
    std::string s = "{";
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + std::to_string(v[k]);
    return s + "}";
}

/// Candidates of dimension k: every facet already present.
inline std::vector<VertexSet> next_candidates(const std::vector<VertexSet>& lower, const SimplexIndex& present,
                                              const std::vector<std::vector<std::size_t>>& neighbours)
{
    std::vector<VertexSet> out;
    for (const auto& tau : lower) {
        // common neighbours of every vertex of tau, larger than its last vertex
        std::vector<std::size_t> common;
        const auto& first = neighbours[tau.front()];
        for (std::size_t v : first) {
            if (v <= tau.back()) continue;
            bool ok = true;
            for (std::size_t k = 1; k < tau.size() && ok; ++k)
                ok = std::binary_search(neighbours[tau[k]].begin(), neighbours[tau[k]].end(), v);
            if (ok) common.push_back(v);
        }
        for (std::size_t v : common) {
            VertexSet sigma = tau;
            sigma.push_back(v);
            bool all = true;
            if (sigma.size() > 2) {
                for (const auto& f : facets(sigma))
                    if (!present.contains(f)) {
                        all = false;
                        break;
                    }
            }
            if (all) out.push_back(std::move(sigma));
        }
    }
    return out;
}

} // namespace detail

/// Enumerates the nerve of the power cells (clipped at the level cap) up to
/// dimension max_dim. A k-simplex is only tested when all of its facets are
/// present.
inline AlphaComplex build_alpha(const PowerDiagram& pd, const AlphaOptions& opt = {})
{
    const std::size_t n = pd.landmarks.size();
    const GramSystem sys = GramSystem::from_points(pd.landmarks, pd.powers);
    const double two_h2 = pd.two_h2();
    QpOptions qp = opt.qp;
    if (opt.level_cap) qp.objective_cap = *opt.level_cap * two_h2;

    AlphaComplex cx{pd, {}, opt.max_dim, opt.level_cap};

    auto solve_all = [&](const std::vector<VertexSet>& cands) {
        std::vector<std::optional<SimplexRecord>> out(cands.size());
        parallel_for(cands.size(), opt.threads, [&](std::size_t c) {
            const auto problem = CellProblem::for_simplex(sys, cands[c]);
            QpSolution sol;
            try {
                sol = solve_cell(problem, qp);
            } catch (const SolverError& e) {
                throw SolverError(std::string(e.what()) + " while solving simplex " + detail::describe(cands[c]));
            }
            if (!sol.feasible()) return;
            const double w = sol.objective / two_h2;
            if (opt.level_cap && w > *opt.level_cap) return;
            out[c] = SimplexRecord{cands[c], w, sol.point(pd.landmarks), sol.objective};
        });
        return out;
    };

    SimplexIndex present;
    std::vector<VertexSet> level;
    {
        std::vector<VertexSet> cands;
        for (std::size_t i = 0; i < n; ++i) cands.push_back({i});
        auto solved = solve_all(cands);
        for (auto& r : solved)
            if (r) {
                level.push_back(r->vertices);
                present.emplace(r->vertices, cx.simplices.size());
                cx.simplices.push_back(std::move(*r));
            }
    }

    std::vector<std::vector<std::size_t>> neighbours(n);
    double max_power = -std::numeric_limits<double>::infinity();
    for (double p : pd.powers) max_power = std::max(max_power, p);

    for (std::size_t k = 1; k <= opt.max_dim && !level.empty(); ++k) {
        std::vector<VertexSet> cands;
        if (k == 1) {
            const bool prefilter = opt.edge_prefilter && opt.level_cap;
            const double reach = prefilter ? 4.0 * (*opt.level_cap * two_h2 + max_power) : 0.0;
            for (std::size_t a = 0; a < level.size(); ++a)
                for (std::size_t b = a + 1; b < level.size(); ++b) {
                    const std::size_t i = level[a][0], j = level[b][0];
                    if (prefilter && squared_distance(pd.landmarks.point(i), pd.landmarks.point(j)) > reach) continue;
                    cands.push_back({i, j});
                }
        } else {
            cands = detail::next_candidates(level, present, neighbours);
        }
        auto solved = solve_all(cands);
        level.clear();
        for (auto& r : solved) {
            if (!r) continue;
            // facet weights are lower bounds; absorb rounding-level inversions
            for (const auto& f : facets(r->vertices)) {
                const auto& fw = cx.simplices[present.at(f)];
                if (fw.alpha_weight > r->alpha_weight) r->alpha_weight = fw.alpha_weight;
            }
            if (k == 1) {
                neighbours[r->vertices[0]].push_back(r->vertices[1]);
                neighbours[r->vertices[1]].push_back(r->vertices[0]);
            }
            level.push_back(r->vertices);
            present.emplace(r->vertices, cx.simplices.size());
            cx.simplices.push_back(std::move(*r));
        }
        if (k == 1)
            for (auto& nb : neighbours) std::sort(nb.begin(), nb.end());
    }
    return cx;
}

enum class PositionMode { landmarks, barycenters };

/// Coordinates for drawing: landmark mode gives one row per landmark index,
/// barycenter mode one row per simplex (q_sigma, in complex order).
inline RowMatrix vertex_positions(const AlphaComplex& cx, PositionMode mode)
{
    if (mode == PositionMode::landmarks) return cx.diagram.landmarks.matrix();
    RowMatrix out(static_cast<Eigen::Index>(cx.simplices.size()), static_cast<Eigen::Index>(cx.diagram.landmarks.dim()));
    for (std::size_t i = 0; i < cx.simplices.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = cx.simplices[i].barycenter.transpose();
    return out;
}

} // namespace densfilt
