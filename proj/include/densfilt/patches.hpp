#pragma once

// Image patches in a discrete Hermite basis.
//
// Inner products weight pixel i (0-based) of a length-l side by
// C(l-1, i) / 2^(l-1), so constant vectors have unit norm. The 2D weight is
// the product of two 1D weights.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "densfilt/common.hpp"

namespace densfilt {

inline std::vector<double> binomial_weights(std::size_t l)
{
    if (l == 0) throw InputError("patch side must be positive");
    std::vector<double> w(l);
    const double n = static_cast<double>(l - 1);
    for (std::size_t i = 0; i < l; ++i) {
        const double k = static_cast<double>(i);
        w[i] = std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) - n * std::log(2.0));
    }
    return w;
}

inline double binomial_inner_product_1d(const Vector& u, const Vector& v)
{
    if (u.size() != v.size()) throw InputError("vector sizes differ");
    const auto w = binomial_weights(static_cast<std::size_t>(u.size()));
    double s = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) s += w[static_cast<std::size_t>(i)] * u[i] * v[i];
    return s;
}

/// 2^{-2(l-1)} sum_ij C(l-1,i) C(l-1,j) A_ij B_ij.
inline double binomial_inner_product(const RowMatrix& a, const RowMatrix& b)
{
    if (a.rows() != a.cols() || a.rows() != b.rows() || a.cols() != b.cols())
        throw InputError("patches must be square and of equal size");
    const auto w = binomial_weights(static_cast<std::size_t>(a.rows()));
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            s += w[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(j)] * a(i, j) * b(i, j);
    return s;
}

struct HermiteBasis {
    std::size_t l;
    std::vector<Vector> one_d; // H_0 .. H_{l-1}

    /// H_{a,b}(i, j) = H_a(i) H_b(j).
    RowMatrix two_d(std::size_t a, std::size_t b) const
    {
        if (a >= l || b >= l) throw InputError("Hermite index out of range");
        return one_d[a] * one_d[b].transpose();
    }
};

/// Gram-Schmidt on the monomials i^a, a = 0..l-1. The monomials are taken in a
/// centered variable, which spans the same flags and keeps the leading
/// coefficient positive while staying well conditioned.
inline HermiteBasis hermite_basis(std::size_t l)
{
    if (l < 2) throw InputError("Hermite basis needs l >= 2");
    const auto n = static_cast<Eigen::Index>(l);
    const double mid = 0.5 * static_cast<double>(l + 1);
    HermiteBasis hb{l, {}};
    for (std::size_t a = 0; a < l; ++a) {
        Vector v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = std::pow(static_cast<double>(i + 1) - mid, static_cast<double>(a));
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& h : hb.one_d) v -= binomial_inner_product_1d(v, h) * h;
        const double nrm = std::sqrt(binomial_inner_product_1d(v, v));
        if (!(nrm > 0.0)) throw SolverError("Hermite basis lost rank");
        hb.one_d.push_back(v / nrm);
    }
    return hb;
}

enum class IntensityMode { full_gradient, quadratic_only };

struct PatchConfig {
    std::size_t l = 11;
    double r = 0.3;
    IntensityMode mode = IntensityMode::full_gradient;
    std::vector<std::pair<std::size_t, std::size_t>> components{{1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};

    void validate() const
    {
        if (l < 2) throw InputError("patch side must be at least 2");
        if (!(r > 0.0)) throw InputError("intensity threshold must be positive");
        if (components.empty()) throw InputError("no basis components selected");
        for (auto [a, b] : components)
            if (a >= l || b >= l) throw InputError("basis component out of range");
    }
};

/// One l x l window centred on every pixel, zeros outside the image, so a
/// w x w image gives w^2 patches. For even l the extra row and column lie
/// below and to the right. Rows are flattened row-major.
inline RowMatrix extract_patches(const std::vector<RowMatrix>& images, std::size_t l)
{
    if (l == 0) throw InputError("patch side must be positive");
    std::size_t total = 0;
    for (const auto& im : images) total += static_cast<std::size_t>(im.rows() * im.cols());
    RowMatrix out = RowMatrix::Zero(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(l * l));
    const auto half = static_cast<Eigen::Index>((l - 1) / 2);
    const auto L = static_cast<Eigen::Index>(l);
    Eigen::Index row = 0;
    for (const auto& im : images) {
        for (Eigen::Index r = 0; r < im.rows(); ++r)
            for (Eigen::Index c = 0; c < im.cols(); ++c, ++row)
                for (Eigen::Index i = 0; i < L; ++i) {
                    const Eigen::Index rr = r - half + i;
                    if (rr < 0 || rr >= im.rows()) continue;
                    for (Eigen::Index j = 0; j < L; ++j) {
                        const Eigen::Index cc = c - half + j;
                        if (cc >= 0 && cc < im.cols()) out(row, i * L + j) = im(rr, cc);
                    }
                }
    }
    return out;
}

struct ProjectedPatches {
    RowMatrix points;                     // one row per retained patch
    std::vector<std::size_t> source_rows; // index into the patch matrix
    std::size_t total = 0;

    double retained_fraction() const { return total ? static_cast<double>(source_rows.size()) / static_cast<double>(total) : 0.0; }
};

/// Coefficients of each patch on the configured basis elements.
inline RowMatrix hermite_coefficients(const RowMatrix& patches, const HermiteBasis& basis,
                                      const std::vector<std::pair<std::size_t, std::size_t>>& components)
{
    const std::size_t l = basis.l;
    if (static_cast<std::size_t>(patches.cols()) != l * l) throw InputError("patch width does not match basis size");
    const auto w = binomial_weights(l);
    // weighted basis matrix: column k holds w_i w_j H_{a,b}(i,j) flattened
    Matrix wb(static_cast<Eigen::Index>(l * l), static_cast<Eigen::Index>(components.size()));
    for (std::size_t k = 0; k < components.size(); ++k) {
        const RowMatrix h = basis.two_d(components[k].first, components[k].second);
        for (std::size_t i = 0; i < l; ++i)
            for (std::size_t j = 0; j < l; ++j)
                wb(static_cast<Eigen::Index>(i * l + j), static_cast<Eigen::Index>(k)) =
                    w[i] * w[j] * h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    return patches * wb;
}

/// Keeps patches whose intensity reaches r and rescales them. Full-gradient
/// mode: intensity is the norm of all coefficients and kept rows are unit
/// vectors. Quadratic-only: intensity is the norm of the degree-2
/// coefficients and the whole vector is divided by it.
inline ProjectedPatches project_and_filter(const RowMatrix& patches, const HermiteBasis& basis, const PatchConfig& cfg)
{
    cfg.validate();
    if (cfg.l != basis.l) throw InputError("patch config and basis disagree on l");
    const RowMatrix c = hermite_coefficients(patches, basis, cfg.components);
    std::vector<Eigen::Index> quad;
    for (std::size_t k = 0; k < cfg.components.size(); ++k)
        if (cfg.components[k].first + cfg.components[k].second == 2) quad.push_back(static_cast<Eigen::Index>(k));
    if (cfg.mode == IntensityMode::quadratic_only && quad.empty())
        throw InputError("quadratic-only intensity needs a degree-2 component");

    ProjectedPatches out;
    out.total = static_cast<std::size_t>(patches.rows());
    std::vector<double> scale;
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
        double intensity = 0.0;
        if (cfg.mode == IntensityMode::full_gradient) {
            intensity = c.row(i).norm();
        } else {
            for (auto k : quad) intensity += c(i, k) * c(i, k);
            intensity = std::sqrt(intensity);
        }
        if (intensity >= cfg.r) {
            out.source_rows.push_back(static_cast<std::size_t>(i));
            scale.push_back(intensity);
        }
    }
    out.points.resize(static_cast<Eigen::Index>(out.source_rows.size()), c.cols());
    for (std::size_t k = 0; k < out.source_rows.size(); ++k)
        out.points.row(static_cast<Eigen::Index>(k)) = c.row(static_cast<Eigen::Index>(out.source_rows[k])) / scale[k];
    return out;
}

// ---------------------------------------------------------------- IDX files

namespace detail {

inline std::uint32_t read_be32(std::istream& in, const std::string& path)
{
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw InputError("truncated IDX header in " + path);
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
}

} // namespace detail

/// IDX3 unsigned-byte images scaled to [0, 1].
inline std::vector<RowMatrix> read_idx_images(const std::string& path, std::size_t limit = 0)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    if (detail::read_be32(in, path) != 0x00000803u) throw InputError("bad IDX image magic in " + path);
    std::size_t n = detail::read_be32(in, path);
    const auto rows = static_cast<Eigen::Index>(detail::read_be32(in, path));
    const auto cols = static_cast<Eigen::Index>(detail::read_be32(in, path));
    if (limit) n = std::min(n, limit);
    std::vector<RowMatrix> out;
    out.reserve(n);
    std::vector<unsigned char> buf(static_cast<std::size_t>(rows * cols));
    for (std::size_t k = 0; k < n; ++k) {
        if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
            throw InputError("truncated IDX image data in " + path);
        RowMatrix im(rows, cols);
        for (Eigen::Index i = 0; i < rows * cols; ++i) im.data()[i] = buf[static_cast<std::size_t>(i)] / 255.0;
        out.push_back(std::move(im));
    }
    return out;
}

inline std::vector<int> read_idx_labels(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    if (detail::read_be32(in, path) != 0x00000801u) throw InputError("bad IDX label magic in " + path);
    const std::size_t n = detail::read_be32(in, path);
    std::vector<unsigned char> buf(n);
    if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n)))
        throw InputError("truncated IDX label data in " + path);
    return {buf.begin(), buf.end()};
}

/// Indices of the first `per_label` images of each label 0..9, by label then order.
inline std::vector<std::size_t> first_per_label(const std::vector<int>& labels, std::size_t per_label)
{
    std::vector<std::vector<std::size_t>> by(10);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int d = labels[i];
        if (d >= 0 && d < 10 && by[static_cast<std::size_t>(d)].size() < per_label) by[static_cast<std::size_t>(d)].push_back(i);
    }
    std::vector<std::size_t> out;
    for (const auto& v : by) out.insert(out.end(), v.begin(), v.end());
    return out;
}

} // namespace densfilt
