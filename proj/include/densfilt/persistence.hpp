#pragma once

// Barcodes of sublevel-set filtrations over Z/2 by column reduction.

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <optional>
#include <vector>

#include "densfilt/filtration.hpp"

namespace densfilt {

struct Interval {
    std::size_t dim;
    double birth;
    double death; // +inf for essential classes
    std::size_t birth_simplex = 0;

    bool essential() const { return std::isinf(death); }
    bool zero_length() const { return death == birth; }
    double length() const { return death - birth; }
    /// death - birth, with essential bars measured up to `horizon`.
    double span(double horizon) const { return (essential() ? horizon : death) - birth; }
};

struct Barcode {
    std::vector<Interval> intervals;

    std::size_t count(std::size_t dim) const
    {
        return static_cast<std::size_t>(
            std::count_if(intervals.begin(), intervals.end(), [&](const Interval& i) { return i.dim == dim; }));
    }
    std::size_t max_dim() const
    {
        std::size_t d = 0;
        for (const auto& i : intervals) d = std::max(d, i.dim);
        return d;
    }
};

namespace detail {

using Column = std::vector<std::size_t>; // sorted ascending, Z/2

inline void add_into(Column& a, const Column& b, Column& scratch)
{
    scratch.clear();
    std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(scratch));
    a.swap(scratch);
}

} // namespace detail

/// Pairing of a reduced boundary matrix, indexed by filtration position.
struct Reduction {
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
    /// column j -> lowest row after reduction, or npos if the column is zero
    std::vector<std::size_t> low;
    /// row i -> column whose low is i, or npos
    std::vector<std::size_t> killer;

    bool operator==(const Reduction&) const = default;
};

/// Reduces the boundary matrix of simplices of dimension <= top_dim, processing
/// dimensions from the top down so that pivot rows can be cleared.
inline Reduction reduce_boundary(const FilteredComplex& y, std::size_t top_dim)
{
    const auto& sx = y.simplices();
    const std::size_t n = sx.size();
    SimplexIndex idx;
    idx.reserve(n);
    for (std::size_t i = 0; i < n; ++i) idx.emplace(sx[i].vertices, i);

    Reduction red;
    red.low.assign(n, Reduction::npos);
    red.killer.assign(n, Reduction::npos);
    std::vector<char> cleared(n, 0);
    std::vector<detail::Column> reduced(n);
    detail::Column scratch;

    for (std::size_t d = top_dim; d >= 1; --d) {
        for (std::size_t j = 0; j < n; ++j) {
            if (sx[j].dim() != d || cleared[j]) continue;
            detail::Column col;
            col.reserve(d + 1);
            for (const auto& f : facets(sx[j].vertices)) {
                auto it = idx.find(f);
                if (it == idx.end() || it->second >= j)
                    throw InputError("filtered complex is not face-closed or not in filtration order");
                col.push_back(it->second);
            }
            std::sort(col.begin(), col.end());
            while (!col.empty()) {
                const std::size_t other = red.killer[col.back()];
                if (other == Reduction::npos) break;
                detail::add_into(col, reduced[other], scratch);
            }
            if (col.empty()) continue;
            const std::size_t low = col.back();
            red.low[j] = low;
            red.killer[low] = j;
            // the paired row creates a class, so its own column reduces to zero
            cleared[low] = 1;
            reduced[j] = std::move(col);
        }
        if (d == 1) break;
    }
    return red;
}

/// Barcode of the sublevel filtration of `y` in dimensions 0..max_dim.
/// Simplices up to dimension max_dim+1 take part so that the top reported
/// dimension has its deaths.
inline Barcode compute_persistence(const FilteredComplex& y, std::size_t max_dim)
{
    y.validate();
    const auto& sx = y.simplices();
    std::vector<FilteredSimplex> kept;
    kept.reserve(sx.size());
    for (const auto& s : sx)
        if (s.dim() <= max_dim + 1) kept.push_back(s);
    const FilteredComplex sub(std::move(kept));
    const auto& ss = sub.simplices();
    const Reduction red = reduce_boundary(sub, max_dim + 1);

    Barcode bc;
    std::vector<std::size_t> simplices_by_dim(max_dim + 2, 0), births(max_dim + 2, 0), deaths(max_dim + 2, 0);
    for (std::size_t i = 0; i < ss.size(); ++i) {
        const std::size_t d = ss[i].dim();
        ++simplices_by_dim[d];
        if (red.low[i] != Reduction::npos) {
            ++deaths[d];
            continue;
        }
        ++births[d];
        if (d > max_dim) continue;
        const std::size_t k = red.killer[i];
        const double death = k == Reduction::npos ? std::numeric_limits<double>::infinity() : ss[k].weight;
        bc.intervals.push_back({d, ss[i].weight, death, i});
    }
    // every simplex either creates a class or kills one of the dimension below
    for (std::size_t d = 0; d <= max_dim + 1; ++d) {
        if (births[d] + deaths[d] != simplices_by_dim[d])
            throw StateError("persistence bookkeeping failed in dimension " + std::to_string(d));
        if (d > 0 && deaths[d] > births[d - 1]) throw StateError("more deaths than births in dimension " + std::to_string(d - 1));
    }
    std::stable_sort(bc.intervals.begin(), bc.intervals.end(), [](const Interval& a, const Interval& b) {
        if (a.dim != b.dim) return a.dim < b.dim;
        if (a.birth != b.birth) return a.birth < b.birth;
        return a.death < b.death;
    });
    return bc;
}

/// Betti numbers of the sublevel complex at level a, dimensions 0..max_dim.
inline std::vector<std::size_t> betti_at(const Barcode& bc, double a, std::optional<std::size_t> max_dim = std::nullopt)
{
    const std::size_t top = max_dim ? *max_dim : bc.max_dim();
    std::vector<std::size_t> b(top + 1, 0);
    for (const auto& i : bc.intervals)
        if (i.dim <= top && i.birth <= a && a < i.death) ++b[i.dim];
    return b;
}

/// Keeps bars of length >= min_length. Essential bars are always kept unless a
/// horizon is given, in which case they are measured up to it.
inline Barcode filter_bars(const Barcode& bc, double min_length, std::optional<double> horizon = std::nullopt)
{
    if (!(min_length >= 0.0)) throw InputError("minimum bar length must be nonnegative");
    Barcode out;
    for (const auto& i : bc.intervals) {
        const bool keep = i.essential() ? (!horizon || i.span(*horizon) >= min_length) : i.length() >= min_length;
        if (keep) out.intervals.push_back(i);
    }
    return out;
}

inline Barcode drop_zero_length(const Barcode& bc)
{
    Barcode out;
    for (const auto& i : bc.intervals)
        if (!i.zero_length()) out.intervals.push_back(i);
    return out;
}

/// Per-dimension counts of bars whose span reaches min_span.
inline std::vector<std::size_t> long_bar_counts(const Barcode& bc, double min_span, double horizon, std::size_t max_dim)
{
    std::vector<std::size_t> c(max_dim + 1, 0);
    for (const auto& i : bc.intervals)
        if (i.dim <= max_dim && i.span(horizon) >= min_span) ++c[i.dim];
    return c;
}

} // namespace densfilt
