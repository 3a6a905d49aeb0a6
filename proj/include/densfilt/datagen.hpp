#pragma once

// Synthetic data: noisy torus, ordered configurations of three points in the
// plane, and Ising states on small graphs with Laplacian diffusion.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "densfilt/mixture.hpp"

namespace densfilt {

/// SplitMix64 evaluated at (key, counter): stateless mixing of a 64-bit
/// counter, so streams can be split by key without sharing state.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) : key_(mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL))) {}

    static std::uint64_t mix(std::uint64_t z)
    {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t next() { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n).
    std::size_t below(std::size_t n)
    {
        // Lemire's multiply-shift with rejection
        std::uint64_t x = next();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        std::uint64_t l = static_cast<std::uint64_t>(m);
        if (l < n) {
            const std::uint64_t t = (0 - static_cast<std::uint64_t>(n)) % n;
            while (l < t) {
                x = next();
                m = static_cast<__uint128_t>(x) * n;
                l = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::size_t>(m >> 64);
    }

    /// Standard normal by Box-Muller.
    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u = uniform();
        while (u <= 0.0) u = uniform();
        const double v = uniform();
        const double r = std::sqrt(-2.0 * std::log(u));
        spare_ = r * std::sin(2.0 * std::numbers::pi * v);
        has_spare_ = true;
        return r * std::cos(2.0 * std::numbers::pi * v);
    }

    Rng split(std::uint64_t stream) const { return Rng(key_, stream); }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// (cos t1 (1 + .5 cos t2), sin t1 (1 + .5 cos t2), .5 sin t2) plus isotropic noise.
inline PointCloud gen_torus(std::size_t n, double noise_sd, std::uint64_t seed)
{
    if (n == 0) throw InputError("torus sample size must be positive");
    if (!(noise_sd >= 0.0)) throw InputError("noise standard deviation must be nonnegative");
    Rng rng(seed, 1);
    RowMatrix pts(static_cast<Eigen::Index>(n), 3);
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        const double t1 = 2.0 * std::numbers::pi * rng.uniform();
        const double t2 = 2.0 * std::numbers::pi * rng.uniform();
        const double r = 1.0 + 0.5 * std::cos(t2);
        pts(i, 0) = std::cos(t1) * r;
        pts(i, 1) = std::sin(t1) * r;
        pts(i, 2) = 0.5 * std::sin(t2);
        if (noise_sd > 0.0)
            for (Eigen::Index k = 0; k < 3; ++k) pts(i, k) += noise_sd * rng.normal();
    }
    return PointCloud(std::move(pts));
}

/// a_i = |x_i| / N.
inline std::vector<double> radial_weights(const PointCloud& cloud)
{
    std::vector<double> a(cloud.size());
    const double n = static_cast<double>(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) a[i] = cloud.matrix().row(static_cast<Eigen::Index>(i)).norm() / n;
    return a;
}

/// Three planar points p1 = 0, p2 = p1 + e(t1), p3 = p2 + e(t2), centered and
/// relabelled by `perm` (perm[k] is the source point placed in slot k).
inline std::array<double, 6> conf3_point(double t1, double t2, const std::array<std::size_t, 3>& perm)
{
    std::array<double, 6> p{0.0, 0.0, std::cos(t1), std::sin(t1), 0.0, 0.0};
    p[4] = p[2] + std::cos(t2);
    p[5] = p[3] + std::sin(t2);
    const double mx = (p[0] + p[2] + p[4]) / 3.0;
    const double my = (p[1] + p[3] + p[5]) / 3.0;
    std::array<double, 6> out{};
    for (std::size_t k = 0; k < 3; ++k) {
        out[2 * k] = p[2 * perm[k]] - mx;
        out[2 * k + 1] = p[2 * perm[k] + 1] - my;
    }
    return out;
}

/// Closing distance |p3 - p1| of the unit-step chain.
inline double conf3_closing(double t1, double t2) { return std::hypot(std::cos(t1) + std::cos(t2), std::sin(t1) + std::sin(t2)); }

inline PointCloud gen_conf3(std::size_t n, std::uint64_t seed)
{
    if (n == 0) throw InputError("configuration sample size must be positive");
    static constexpr std::array<std::array<std::size_t, 3>, 6> perms{
        {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
    Rng rng(seed, 2);
    RowMatrix pts(static_cast<Eigen::Index>(n), 6);
    for (Eigen::Index i = 0; i < pts.rows();) {
        const double t1 = 2.0 * std::numbers::pi * rng.uniform();
        const double t2 = 2.0 * std::numbers::pi * rng.uniform();
        if (conf3_closing(t1, t2) < 1.0) continue;
        const auto p = conf3_point(t1, t2, perms[rng.below(6)]);
        for (Eigen::Index k = 0; k < 6; ++k) pts(i, k) = p[static_cast<std::size_t>(k)];
        ++i;
    }
    return PointCloud(std::move(pts));
}

// ---------------------------------------------------------------- graphs

enum class GraphKind { interval, circle, flares };

struct GraphSpec {
    GraphKind kind;
    std::size_t m;
    std::vector<std::pair<std::size_t, std::size_t>> edges; // i < j
    Matrix adjacency;                                        // symmetric 0/1, zero diagonal

    std::vector<std::size_t> degrees() const
    {
        std::vector<std::size_t> d(m, 0);
        for (auto [i, j] : edges) {
            ++d[i];
            ++d[j];
        }
        return d;
    }

    static GraphSpec from_edges(GraphKind kind, std::size_t m, std::vector<std::pair<std::size_t, std::size_t>> edges)
    {
        Matrix a = Matrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
        for (auto& [i, j] : edges) {
            if (i == j || i >= m || j >= m) throw InputError("invalid graph edge");
            if (i > j) std::swap(i, j);
            a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
            a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = 1.0;
        }
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        return {kind, m, std::move(edges), std::move(a)};
    }

    static GraphSpec interval(std::size_t m)
    {
        if (m < 2) throw InputError("interval graph needs at least 2 vertices");
        std::vector<std::pair<std::size_t, std::size_t>> e;
        for (std::size_t i = 0; i + 1 < m; ++i) e.emplace_back(i, i + 1);
        return from_edges(GraphKind::interval, m, std::move(e));
    }

    static GraphSpec circle(std::size_t m)
    {
        if (m < 3) throw InputError("circle graph needs at least 3 vertices");
        std::vector<std::pair<std::size_t, std::size_t>> e;
        for (std::size_t i = 0; i < m; ++i) e.emplace_back(std::min(i, (i + 1) % m), std::max(i, (i + 1) % m));
        return from_edges(GraphKind::circle, m, std::move(e));
    }

    /// Vertex 0 is the center; arm r occupies 1 + r*arm_length ... (r+1)*arm_length.
    static GraphSpec flares(std::size_t arms = 3, std::size_t arm_length = 14)
    {
        if (arms == 0 || arm_length == 0) throw InputError("flares graph needs positive arm count and length");
        const std::size_t m = 1 + arms * arm_length;
        std::vector<std::pair<std::size_t, std::size_t>> e;
        for (std::size_t r = 0; r < arms; ++r) {
            const std::size_t base = 1 + r * arm_length;
            e.emplace_back(0, base);
            for (std::size_t k = 0; k + 1 < arm_length; ++k) e.emplace_back(base + k, base + k + 1);
        }
        return from_edges(GraphKind::flares, m, std::move(e));
    }

    bool connected() const
    {
        std::vector<std::vector<std::size_t>> nb(m);
        for (auto [i, j] : edges) {
            nb[i].push_back(j);
            nb[j].push_back(i);
        }
        std::vector<char> seen(m, 0);
        std::vector<std::size_t> stack{0};
        seen[0] = 1;
        std::size_t count = 1;
        while (!stack.empty()) {
            const std::size_t v = stack.back();
            stack.pop_back();
            for (std::size_t w : nb[v])
                if (!seen[w]) {
                    seen[w] = 1;
                    ++count;
                    stack.push_back(w);
                }
        }
        return count == m;
    }
};

inline std::string to_string(GraphKind k)
{
    switch (k) {
    case GraphKind::interval: return "interval";
    case GraphKind::circle: return "circle";
    case GraphKind::flares: return "flares";
    }
    return "unknown";
}

// ---------------------------------------------------------------- Ising

using SpinMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline void check_spins(const GraphSpec& g, std::span<const int> s)
{
    if (s.size() != g.m) throw InputError("spin vector length does not match graph size");
    for (int v : s)
        if (v != 1 && v != -1) throw InputError("spin entries must be +1 or -1");
}

/// Number of edges whose endpoints disagree.
inline std::size_t transition_count(const GraphSpec& g, std::span<const int> s)
{
    check_spins(g, s);
    std::size_t t = 0;
    for (auto [i, j] : g.edges) t += s[i] != s[j];
    return t;
}

/// H = -sum over edges {i,j} of s_i s_j, each unordered edge once, so that
/// H = -|E| + 2 * transitions.
inline double hamiltonian(const GraphSpec& g, std::span<const int> s)
{
    check_spins(g, s);
    double h = 0.0;
    for (auto [i, j] : g.edges) h -= static_cast<double>(s[i] * s[j]);
    return h;
}

inline double hamiltonian_min(const GraphSpec& g) { return -static_cast<double>(g.edges.size()); }

struct IsingParams {
    double beta = 1.5;
    std::size_t trials = 20000;
    std::size_t sweeps_per_trial = 2;
    std::size_t burn_in = 1000;
    std::uint64_t seed = 0;

    void validate() const
    {
        // at beta = 0 every flip is accepted and a sweep of m flips preserves the
        // parity of the number of down spins, so the chain is not ergodic
        if (!(beta > 0.0) || !std::isfinite(beta)) throw InputError("inverse temperature must be positive");
        if (trials == 0) throw InputError("trial count must be positive");
        if (sweeps_per_trial == 0) throw InputError("sweeps per trial must be positive");
    }
};

struct SpinSample {
    SpinMatrix states; // trials x m, entries +-1
    std::vector<double> energies;
    std::vector<std::size_t> transitions;

    std::size_t size() const { return static_cast<std::size_t>(states.rows()); }
    std::span<const int> state(std::size_t i) const
    {
        return {states.data() + i * static_cast<std::size_t>(states.cols()), static_cast<std::size_t>(states.cols())};
    }

    std::vector<std::size_t> histogram() const
    {
        std::vector<std::size_t> h;
        for (std::size_t t : transitions) {
            if (t >= h.size()) h.resize(t + 1, 0);
            ++h[t];
        }
        return h;
    }

    RowMatrix as_real() const { return states.cast<double>(); }
};

/// Single-site Metropolis chain. A sweep is m uniformly chosen site updates.
inline SpinSample ising_sample(const GraphSpec& g, const IsingParams& p)
{
    p.validate();
    const std::size_t m = g.m;
    std::vector<std::vector<std::size_t>> nb(m);
    std::size_t max_deg = 0;
    for (auto [i, j] : g.edges) {
        nb[i].push_back(j);
        nb[j].push_back(i);
    }
    for (const auto& v : nb) max_deg = std::max(max_deg, v.size());
    // acceptance for dH = 2 * k, k = s_i * sum of neighbours in [-max_deg, max_deg]
    std::vector<double> accept(2 * max_deg + 1);
    for (std::size_t k = 0; k < accept.size(); ++k) {
        const double dh = 2.0 * (static_cast<double>(k) - static_cast<double>(max_deg));
        accept[k] = std::min(1.0, std::exp(-p.beta * dh));
    }

    Rng rng(p.seed, 3);
    std::vector<int> s(m);
    for (auto& v : s) v = rng.uniform() < 0.5 ? -1 : 1;
    auto sweep = [&] {
        for (std::size_t step = 0; step < m; ++step) {
            const std::size_t i = rng.below(m);
            int field = 0;
            for (std::size_t j : nb[i]) field += s[j];
            const double a = accept[static_cast<std::size_t>(s[i] * field + static_cast<int>(max_deg))];
            if (a >= 1.0 || rng.uniform() < a) s[i] = -s[i];
        }
    };
    for (std::size_t k = 0; k < p.burn_in; ++k) sweep();

    SpinSample out;
    out.states.resize(static_cast<Eigen::Index>(p.trials), static_cast<Eigen::Index>(m));
    out.energies.reserve(p.trials);
    out.transitions.reserve(p.trials);
    for (std::size_t t = 0; t < p.trials; ++t) {
        for (std::size_t k = 0; k < p.sweeps_per_trial; ++k) sweep();
        for (std::size_t i = 0; i < m; ++i) out.states(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) = s[i];
        out.energies.push_back(hamiltonian(g, s));
        out.transitions.push_back(transition_count(g, s));
    }
    return out;
}

/// Relative weight C(m-1, k) e^{-2 beta k} of k transitions on the interval graph.
inline double predicted_transitions(std::size_t m, double beta, std::size_t k)
{
    if (m == 0 || k > m - 1) throw InputError("transition count out of range for interval graph");
    const double n = static_cast<double>(m - 1);
    const double kk = static_cast<double>(k);
    const double log_binom = std::lgamma(n + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(n - kk + 1.0);
    return std::exp(log_binom - 2.0 * beta * kk);
}

inline SpinSample filter_by_transitions(const SpinSample& sample, std::size_t max_k)
{
    std::vector<Eigen::Index> keep;
    for (std::size_t i = 0; i < sample.size(); ++i)
        if (sample.transitions[i] <= max_k) keep.push_back(static_cast<Eigen::Index>(i));
    SpinSample out;
    out.states.resize(static_cast<Eigen::Index>(keep.size()), sample.states.cols());
    for (std::size_t r = 0; r < keep.size(); ++r) {
        out.states.row(static_cast<Eigen::Index>(r)) = sample.states.row(keep[r]);
        out.energies.push_back(sample.energies[static_cast<std::size_t>(keep[r])]);
        out.transitions.push_back(sample.transitions[static_cast<std::size_t>(keep[r])]);
    }
    return out;
}

// ---------------------------------------------------------------- Laplacian

/// L = I - D^{-1} A with A = J + diag(degree) and D = diag(row sums of A).
/// Held through the symmetric S = D^{1/2} L D^{-1/2} = U diag(lambda) U^T.
struct Laplacian {
    Matrix a;
    Vector d;
    Matrix l;
    Vector eigenvalues;   // of L, ascending
    Matrix eigenvectors;  // columns v_j = D^{-1/2} u_j: L v_j = lambda_j v_j, V^T D V = I

    explicit Laplacian(const GraphSpec& g)
    {
        if (!g.connected()) throw InputError("graph must be connected");
        const auto n = static_cast<Eigen::Index>(g.m);
        a = g.adjacency;
        const auto deg = g.degrees();
        for (Eigen::Index i = 0; i < n; ++i) a(i, i) = static_cast<double>(deg[static_cast<std::size_t>(i)]);
        d = a.rowwise().sum();
        l = Matrix::Identity(n, n) - d.cwiseInverse().asDiagonal() * a;
        const Vector sq = d.cwiseSqrt();
        const Vector isq = sq.cwiseInverse();
        Matrix s = Matrix::Identity(n, n) - isq.asDiagonal() * a * isq.asDiagonal();
        s = 0.5 * (s + s.transpose());
        Eigen::SelfAdjointEigenSolver<Matrix> es(s);
        if (es.info() != Eigen::Success) throw SolverError("Laplacian eigendecomposition failed");
        eigenvalues = es.eigenvalues();
        eigenvectors = isq.asDiagonal() * es.eigenvectors();
        // deterministic signs: largest-magnitude entry positive, first index on ties
        for (Eigen::Index j = 0; j < n; ++j) {
            Eigen::Index arg = 0;
            for (Eigen::Index i = 1; i < n; ++i)
                if (std::abs(eigenvectors(i, j)) > std::abs(eigenvectors(arg, j)) + 1e-12) arg = i;
            if (eigenvectors(arg, j) < 0.0) eigenvectors.col(j) *= -1.0;
        }
    }

    std::size_t size() const { return static_cast<std::size_t>(d.size()); }

    /// Spectrum of the walk operator D^{-1} A = I - L, descending.
    Vector walk_eigenvalues() const { return (Vector::Ones(eigenvalues.size()) - eigenvalues); }

    /// Spectrum of exp(-t L), descending.
    Vector diffusion_eigenvalues(double t) const { return (-t * eigenvalues).array().exp().matrix(); }

    /// exp(-t L) = V e^{-t Lambda} V^T D.
    Matrix exp_minus(double t) const
    {
        return eigenvectors * diffusion_eigenvalues(t).asDiagonal() * eigenvectors.transpose() * d.asDiagonal();
    }

    /// Rows of `x` times exp(-t L^T).
    RowMatrix diffuse(const RowMatrix& x, double t) const
    {
        if (!(t >= 0.0)) throw InputError("diffusion time must be nonnegative");
        if (static_cast<std::size_t>(x.cols()) != size()) throw InputError("data width does not match graph size");
        return x * exp_minus(t).transpose();
    }

    /// Coordinates of each row in the first k D-orthonormal eigenvectors:
    /// c_j = sum_i D_ii x_i v_j(i).
    RowMatrix spectral_projection(const RowMatrix& x, std::size_t k) const
    {
        if (k == 0 || k > size()) throw InputError("projection rank must lie in [1, m]");
        if (static_cast<std::size_t>(x.cols()) != size()) throw InputError("data width does not match graph size");
        return x * d.asDiagonal() * eigenvectors.leftCols(static_cast<Eigen::Index>(k));
    }
};

} // namespace densfilt
