#pragma once

// data -> KDE -> reference set -> cover -> power diagram -> alpha complex
// -> density weights -> barcode, with per-stage timings.

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "densfilt/io.hpp"
#include "densfilt/landmarks.hpp"

namespace densfilt {

inline constexpr const char* version = "0.1.0";

enum class ReferenceMode { data, grid };

struct PipelineConfig {
    double h = 0.3;
    double d0 = 0.005;
    double s = 0.6;
    std::size_t max_dim = 3;
    /// -log density; defaults to a0 + eps
    std::optional<double> level_cap;
    SelectionRule rule = SelectionRule::densest;
    ReferenceMode reference = ReferenceMode::data;
    std::size_t grid_target = 10000;
    bool edge_prefilter = false;
    unsigned threads = 0;

    DensityCutoff cutoff() const { return DensityCutoff::from_density(d0); }
    double epsilon() const { return -std::log(s); }
    double resolved_cap() const { return level_cap.value_or(cutoff().a0 + epsilon()); }

    void validate() const
    {
        if (!(h > 0.0) || !std::isfinite(h)) throw InputError("h must be positive");
        if (!(d0 > 0.0) || !std::isfinite(d0)) throw InputError("d0 must be positive");
        CoverParams{s, rule}.validate();
    }

    io::json to_json() const
    {
        return {{"h", h},
                {"d0", d0},
                {"a0", cutoff().a0},
                {"s", s},
                {"epsilon", epsilon()},
                {"max_dim", max_dim},
                {"level_cap", resolved_cap()},
                {"rule", rule == SelectionRule::densest ? "densest" : "greedy"},
                {"reference", reference == ReferenceMode::data ? "data" : "grid"},
                {"grid_target", grid_target},
                {"edge_prefilter", edge_prefilter},
                {"threads", threads}};
    }
};

struct StageTiming {
    std::string stage;
    double seconds;
};

struct PipelineResult {
    GaussianMixture f;
    ReferenceSet reference;
    MaxGaussianCover cover;
    AlphaComplex complex;
    FilteredComplex filtration;
    Barcode barcode;
    std::vector<StageTiming> timings;
};

/// Error raised inside a named stage; keeps the original category.
template <typename E>
[[noreturn]] void rethrow_in_stage(const std::string& stage, const E& e)
{
    throw E("stage " + stage + ": " + e.what());
}

namespace detail {

template <typename Fn>
auto timed(std::vector<StageTiming>& log, const std::string& stage, Fn&& fn)
{
    const auto t0 = std::chrono::steady_clock::now();
    auto finish = [&] {
        log.push_back({stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()});
    };
    try {
        auto out = fn();
        finish();
        return out;
    } catch (const EmptyReferenceError& e) {
        rethrow_in_stage(stage, e);
    } catch (const InputError& e) {
        rethrow_in_stage(stage, e);
    } catch (const SolverError& e) {
        rethrow_in_stage(stage, e);
    } catch (const StateError& e) {
        rethrow_in_stage(stage, e);
    }
}

inline std::pair<Vector, Vector> padded_bounds(const PointCloud& data, double pad)
{
    Vector lo = data.matrix().colwise().minCoeff().transpose();
    Vector hi = data.matrix().colwise().maxCoeff().transpose();
    lo.array() -= pad;
    hi.array() += pad;
    return {lo, hi};
}

} // namespace detail

/// Runs every stage. `weights` are the mixture coefficients (uniform 1/N when
/// absent).
inline PipelineResult run_pipeline(const PointCloud& data, const std::optional<std::vector<double>>& weights,
                                   const PipelineConfig& cfg)
{
    cfg.validate();
    std::vector<StageTiming> log;
    const auto cutoff = cfg.cutoff();
    auto f = detail::timed(log, "mixture", [&] {
        return weights ? GaussianMixture(data, *weights, cfg.h) : GaussianMixture::uniform(data, cfg.h);
    });
    auto ref = detail::timed(log, "reference", [&] {
        if (cfg.reference == ReferenceMode::grid) {
            const auto [lo, hi] = detail::padded_bounds(data, 4.0 * cfg.h);
            return grid_reference(f, lo, hi, cutoff, cfg.grid_target, cfg.threads);
        }
        return superlevel_reference(f, data, cutoff, cfg.threads);
    });
    auto cover = detail::timed(log, "landmarks",
                               [&] { return select_landmarks(f, ref, CoverParams{cfg.s, cfg.rule}, {}, cfg.threads); });
    auto cx = detail::timed(log, "complex", [&] {
        AlphaOptions o;
        o.max_dim = cfg.max_dim;
        o.level_cap = cfg.resolved_cap();
        o.edge_prefilter = cfg.edge_prefilter;
        o.threads = cfg.threads;
        return build_alpha(power_from_cover(cover), o);
    });
    auto y = detail::timed(log, "filtration", [&] { return denswit_weights(f, cx, cfg.threads); });
    auto bc = detail::timed(log, "persistence", [&] { return compute_persistence(y, cfg.max_dim); });
    return {std::move(f), std::move(ref), std::move(cover), std::move(cx), std::move(y), std::move(bc), std::move(log)};
}

inline io::json manifest(const PipelineConfig& cfg, const PipelineResult& r, const io::json& input)
{
    io::json timings = io::json::object();
    for (const auto& t : r.timings) timings[t.stage] = t.seconds;
    return {{"version", version},
            {"config", cfg.to_json()},
            {"input", input},
            {"reference_points", r.reference.points.size()},
            {"landmarks", r.cover.size()},
            {"complex_sizes", r.complex.counts()},
            {"bars", r.barcode.intervals.size()},
            {"timings_seconds", timings}};
}

} // namespace densfilt
