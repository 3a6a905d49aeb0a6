#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

namespace densfilt {

/// Sorted vertex indices of an abstract simplex.
using VertexSet = std::vector<std::size_t>;

struct VertexSetHash {
    std::size_t operator()(const VertexSet& v) const noexcept
    {
        std::size_t h = 0x9e3779b97f4a7c15ULL ^ v.size();
        for (std::size_t x : v) h ^= std::hash<std::size_t>{}(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return h;
    }
};

/// Lookup from vertex set to position in some simplex array.
using SimplexIndex = std::unordered_map<VertexSet, std::size_t, VertexSetHash>;

inline std::size_t simplex_dim(const VertexSet& v) { return v.empty() ? 0 : v.size() - 1; }

/// The codimension-one faces of `v`, each sorted.
inline std::vector<VertexSet> facets(const VertexSet& v)
{
    std::vector<VertexSet> out;
    if (v.size() < 2) return out;
    out.reserve(v.size());
    for (std::size_t skip = 0; skip < v.size(); ++skip) {
        VertexSet f;
        f.reserve(v.size() - 1);
        for (std::size_t k = 0; k < v.size(); ++k)
            if (k != skip) f.push_back(v[k]);
        out.push_back(std::move(f));
    }
    return out;
}

/// Every nonempty face of `v`, including `v` itself.
inline std::vector<VertexSet> all_faces(const VertexSet& v)
{
    std::vector<VertexSet> out;
    const std::size_t n = v.size();
    for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
        VertexSet f;
        for (std::size_t k = 0; k < n; ++k)
            if (mask & (std::size_t{1} << k)) f.push_back(v[k]);
        out.push_back(std::move(f));
    }
    return out;
}

/// Orders by dimension, then lexicographically.
inline bool dim_lex_less(const VertexSet& a, const VertexSet& b)
{
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
}

} // namespace densfilt
