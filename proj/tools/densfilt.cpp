// densfilt: command-line front end.
//
// Exit codes: 0 ok, 2 input error, 3 solver failure, 4 failed check.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "densfilt/datagen.hpp"
#include "densfilt/io.hpp"
#include "densfilt/patches.hpp"
#include "densfilt/pipeline.hpp"
#include "densfilt/svg.hpp"

namespace fs = std::filesystem;
using namespace densfilt;
using io::json;

namespace {

struct CheckFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    unsigned threads = 0;
};

std::vector<double> resolve_weights(const std::string& mode, const io::WeightedCloud& wc)
{
    if (mode == "radial") return radial_weights(wc.points);
    if (mode == "file") {
        if (!wc.weights) throw InputError("--weights file needs a JSON input with a \"weights\" array");
        return *wc.weights;
    }
    if (mode == "uniform") return std::vector<double>(wc.points.size(), 1.0 / static_cast<double>(wc.points.size()));
    throw InputError("unknown weights mode " + mode);
}

SelectionRule parse_rule(const std::string& r)
{
    if (r == "densest") return SelectionRule::densest;
    if (r == "greedy") return SelectionRule::greedy_ratio;
    throw InputError("unknown selection rule " + r);
}

void write_json(const std::string& path, const json& j) { io::write_text(path, j.dump(1) + "\n"); }

json load_json(const std::string& path) { return io::parse_json(io::read_text(path), path); }

// ---------------------------------------------------------------- gen

void write_gen_manifest(const std::string& out, const std::string& kind, json params)
{
    write_json(out + ".manifest.json", {{"version", version}, {"generator", kind}, {"params", std::move(params)}, {"output", out}});
}

void add_gen(CLI::App& app, Common& common)
{
    auto* gen = app.add_subcommand("gen", "Generate synthetic data sets");
    gen->require_subcommand(1);

    struct TorusOpts {
        std::size_t n = 3000;
        double noise = 0.1;
        std::uint64_t seed = 0;
        bool radial = false;
        std::string out = "torus.csv";
    };
    auto t = std::make_shared<TorusOpts>();
    auto* torus = gen->add_subcommand("torus", "Noisy torus in R^3");
    torus->add_option("--n", t->n, "sample size")->capture_default_str();
    torus->add_option("--noise", t->noise, "noise standard deviation")->capture_default_str();
    torus->add_option("--seed", t->seed)->capture_default_str();
    torus->add_flag("--radial-weights", t->radial, "store a_i = |x_i|/N (JSON output only)");
    torus->add_option("--out", t->out, ".csv or .json")->capture_default_str();
    torus->callback([t] {
        const auto pc = gen_torus(t->n, t->noise, t->seed);
        std::optional<std::vector<double>> w;
        if (t->radial) w = radial_weights(pc);
        io::write_cloud(t->out, pc, w);
        write_gen_manifest(t->out, "torus", {{"n", t->n}, {"noise", t->noise}, {"seed", t->seed}, {"radial_weights", t->radial}});
    });

    struct ConfOpts {
        std::size_t n = 20000;
        std::uint64_t seed = 0;
        std::string out = "conf3.csv";
    };
    auto c = std::make_shared<ConfOpts>();
    auto* conf = gen->add_subcommand("conf3", "Ordered configurations of 3 points in the plane, in R^6");
    conf->add_option("--n", c->n)->capture_default_str();
    conf->add_option("--seed", c->seed)->capture_default_str();
    conf->add_option("--out", c->out)->capture_default_str();
    conf->callback([c] {
        io::write_cloud(c->out, gen_conf3(c->n, c->seed));
        write_gen_manifest(c->out, "conf3", {{"n", c->n}, {"seed", c->seed}});
    });

    struct IsingOpts {
        std::string graph = "interval:30";
        IsingParams p;
        std::string out = "spins.csv";
        std::string json_out;
        std::string histogram;
        std::string cloud;
        double diffuse = 10.0;
        long max_transitions = -1;
    };
    auto o = std::make_shared<IsingOpts>();
    auto* ising = gen->add_subcommand("ising", "Metropolis samples of the Ising model on a graph");
    ising->add_option("--graph", o->graph, "interval:M, circle:M, flares or flares:AxL")->capture_default_str();
    ising->add_option("--beta", o->p.beta)->capture_default_str();
    ising->add_option("--trials", o->p.trials)->capture_default_str();
    ising->add_option("--sweeps", o->p.sweeps_per_trial, "sweeps between recorded states")->capture_default_str();
    ising->add_option("--burn-in", o->p.burn_in, "sweeps discarded at the start")->capture_default_str();
    ising->add_option("--seed", o->p.seed)->capture_default_str();
    ising->add_option("--out", o->out, "spin CSV, one state per row")->capture_default_str();
    ising->add_option("--json", o->json_out, "spin sample JSON");
    ising->add_option("--histogram", o->histogram, "transition histogram CSV");
    ising->add_option("--max-transitions", o->max_transitions, "keep states with at most this many transitions");
    ising->add_option("--cloud", o->cloud, "write diffused states as a point cloud");
    ising->add_option("--diffuse", o->diffuse, "diffusion time t for --cloud")->capture_default_str();
    ising->callback([o] {
        const auto g = io::parse_graph(o->graph);
        auto sample = ising_sample(g, o->p);
        if (!o->histogram.empty()) {
            std::string h = "transitions,count\n";
            const auto hist = sample.histogram();
            for (std::size_t k = 0; k < hist.size(); ++k) h += std::to_string(k) + "," + std::to_string(hist[k]) + "\n";
            io::write_text(o->histogram, h);
        }
        if (o->max_transitions >= 0) sample = filter_by_transitions(sample, static_cast<std::size_t>(o->max_transitions));
        io::write_text(o->out, io::spins_to_csv(sample));
        if (!o->json_out.empty()) write_json(o->json_out, io::spins_to_json(sample, g, o->p));
        if (!o->cloud.empty()) {
            if (sample.size() == 0) throw InputError("no states left to write as a cloud");
            const Laplacian lap(g);
            io::write_cloud(o->cloud, PointCloud(lap.diffuse(sample.as_real(), o->diffuse)));
        }
        write_gen_manifest(o->out, "ising",
                           {{"graph", o->graph}, {"beta", o->p.beta}, {"trials", o->p.trials},
                            {"sweeps", o->p.sweeps_per_trial}, {"burn_in", o->p.burn_in}, {"seed", o->p.seed},
                            {"max_transitions", o->max_transitions}, {"diffuse", o->diffuse}});
    });
    (void)common;
}

// ---------------------------------------------------------------- landmarks / complex / persist

struct KdeOpts {
    std::string input;
    std::string weights = "uniform";
    double h = 0.3;
    double d0 = 0.005;
    double s = 0.6;
    std::string rule = "densest";
    std::string reference = "data";
    std::size_t grid_target = 10000;
};

void add_kde_flags(CLI::App* sub, KdeOpts& k, bool need_input = true)
{
    auto* in = sub->add_option("--input", k.input, "point cloud (.csv or .json)");
    if (need_input) in->required();
    sub->add_option("--weights", k.weights, "uniform, radial, or file (JSON weights)")->capture_default_str();
    sub->add_option("--h", k.h, "kernel scale")->capture_default_str();
    sub->add_option("--d0", k.d0, "density cutoff (linear density)")->capture_default_str();
    sub->add_option("--s", k.s, "cover parameter in (0,1)")->capture_default_str();
    sub->add_option("--rule", k.rule, "densest or greedy")->capture_default_str();
    sub->add_option("--reference", k.reference, "data or grid")->capture_default_str();
    sub->add_option("--grid-target", k.grid_target, "grid points above the cutoff")->capture_default_str();
}

PipelineConfig config_from(const KdeOpts& k, unsigned threads)
{
    PipelineConfig cfg;
    cfg.h = k.h;
    cfg.d0 = k.d0;
    cfg.s = k.s;
    cfg.rule = parse_rule(k.rule);
    if (k.reference == "data") {
        cfg.reference = ReferenceMode::data;
    } else if (k.reference == "grid") {
        cfg.reference = ReferenceMode::grid;
    } else {
        throw InputError("unknown reference mode " + k.reference);
    }
    cfg.grid_target = k.grid_target;
    cfg.threads = threads;
    cfg.validate();
    return cfg;
}

ReferenceSet build_reference(const GaussianMixture& f, const PointCloud& data, const PipelineConfig& cfg)
{
    if (cfg.reference == ReferenceMode::grid) {
        Vector lo = data.matrix().colwise().minCoeff().transpose(), hi = data.matrix().colwise().maxCoeff().transpose();
        lo.array() -= 4.0 * cfg.h;
        hi.array() += 4.0 * cfg.h;
        return grid_reference(f, lo, hi, cfg.cutoff(), cfg.grid_target, cfg.threads);
    }
    return superlevel_reference(f, data, cfg.cutoff(), cfg.threads);
}

PipelineConfig config_from_json(const json& j)
{
    const std::string what = "manifest config";
    PipelineConfig cfg;
    cfg.h = io::field<double>(j, "h", what);
    cfg.d0 = io::field<double>(j, "d0", what);
    cfg.s = io::field<double>(j, "s", what);
    cfg.max_dim = io::field<std::size_t>(j, "max_dim", what);
    cfg.level_cap = io::field<double>(j, "level_cap", what);
    cfg.rule = parse_rule(io::field<std::string>(j, "rule", what));
    const auto ref = io::field<std::string>(j, "reference", what);
    if (ref != "data" && ref != "grid") throw InputError(what + ": unknown reference mode " + ref);
    cfg.reference = ref == "grid" ? ReferenceMode::grid : ReferenceMode::data;
    cfg.grid_target = io::field<std::size_t>(j, "grid_target", what);
    cfg.edge_prefilter = io::field<bool>(j, "edge_prefilter", what);
    cfg.threads = io::field<unsigned>(j, "threads", what);
    cfg.validate();
    return cfg;
}

void add_landmarks(CLI::App& app, Common& common)
{
    struct Opts {
        KdeOpts k;
        std::string out = "cover.json";
        std::string mixture_out;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("landmarks", "Select max-of-Gaussians landmarks");
    add_kde_flags(sub, o->k);
    sub->add_option("--out", o->out, "cover JSON")->capture_default_str();
    sub->add_option("--mixture-out", o->mixture_out, "also write the KDE as mixture JSON");
    sub->callback([o, &common] {
        const auto cfg = config_from(o->k, common.threads);
        const auto wc = io::read_cloud(o->k.input);
        const GaussianMixture f(wc.points, resolve_weights(o->k.weights, wc), cfg.h);
        const auto ref = build_reference(f, wc.points, cfg);
        const auto g = select_landmarks(f, ref, CoverParams{cfg.s, cfg.rule}, {}, cfg.threads);
        write_json(o->out, io::cover_to_json(g));
        if (!o->mixture_out.empty()) write_json(o->mixture_out, io::mixture_to_json(f));
        std::cout << "landmarks: " << g.size() << " from " << ref.points.size() << " reference points\n";
    });
}

void add_complex(CLI::App& app, Common& common)
{
    struct Opts {
        std::string cover;
        std::size_t max_dim = 3;
        double d0 = 0.005;
        double s = 0.6;
        double cap_density = 0.0;
        bool prefilter = false;
        std::string out = "complex.json";
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("complex", "Build the weighted alpha complex of a cover");
    sub->add_option("--cover", o->cover, "cover JSON")->required();
    sub->add_option("--max-dim", o->max_dim)->capture_default_str();
    sub->add_option("--d0", o->d0, "density cutoff; the cap defaults to density d0*s")->capture_default_str();
    sub->add_option("--s", o->s)->capture_default_str();
    sub->add_option("--cap-density", o->cap_density, "explicit lowest density to include (overrides d0*s)");
    sub->add_flag("--edge-prefilter", o->prefilter, "skip landmark pairs too far apart to meet below the cap");
    sub->add_option("--out", o->out)->capture_default_str();
    sub->callback([o, &common] {
        const auto g = io::cover_from_json(load_json(o->cover), o->cover);
        AlphaOptions ao;
        ao.max_dim = o->max_dim;
        if (o->cap_density > 0.0) {
            ao.level_cap = -std::log(o->cap_density);
        } else {
            PipelineConfig cfg;
            cfg.d0 = o->d0;
            cfg.s = o->s;
            cfg.h = g.scale();
            cfg.validate();
            ao.level_cap = cfg.resolved_cap();
        }
        ao.edge_prefilter = o->prefilter;
        ao.threads = common.threads;
        const auto cx = build_alpha(power_from_cover(g), ao);
        write_json(o->out, io::complex_to_json(cx));
        std::cout << "simplices per dimension:";
        for (auto c : cx.counts()) std::cout << ' ' << c;
        std::cout << '\n';
    });
}

void add_persist(CLI::App& app, Common& common)
{
    struct Opts {
        std::string complex;
        std::string mixture;
        std::size_t max_dim = 3;
        std::string out = "barcode.csv";
        std::string filtration_out;
        bool keep_zero = false;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("persist", "Density weights and persistence barcode of a complex");
    sub->add_option("--complex", o->complex, "complex JSON")->required();
    sub->add_option("--mixture", o->mixture, "mixture JSON used for the density weights")->required();
    sub->add_option("--max-dim", o->max_dim)->capture_default_str();
    sub->add_option("--out", o->out, "barcode CSV")->capture_default_str();
    sub->add_option("--filtration-out", o->filtration_out, "filtered complex JSON");
    sub->add_flag("--keep-zero-length", o->keep_zero, "keep zero-length bars in the CSV");
    sub->callback([o, &common] {
        const auto cx = io::complex_from_json(load_json(o->complex), o->complex);
        const auto f = io::mixture_from_json(load_json(o->mixture), o->mixture);
        const auto y = denswit_weights(f, cx, common.threads);
        auto bc = compute_persistence(y, o->max_dim);
        if (!o->keep_zero) bc = drop_zero_length(bc);
        io::write_text(o->out, io::barcode_to_csv(bc));
        if (!o->filtration_out.empty()) write_json(o->filtration_out, io::filtered_to_json(y));
    });
}

// ---------------------------------------------------------------- pipeline

void add_pipeline(CLI::App& app, Common& common)
{
    struct Opts {
        KdeOpts k;
        std::size_t max_dim = 3;
        double cap_density = 0.0;
        bool prefilter = false;
        std::string out_dir = "run";
        bool keep_zero = false;
        std::string replay;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("pipeline", "Run every stage and write all artifacts");
    add_kde_flags(sub, o->k, false);
    sub->add_option("--from-manifest", o->replay, "rerun with the settings recorded in a manifest");
    sub->add_option("--max-dim", o->max_dim)->capture_default_str();
    sub->add_option("--cap-density", o->cap_density, "explicit lowest density to include (default d0*s)");
    sub->add_flag("--edge-prefilter", o->prefilter);
    sub->add_option("--out-dir", o->out_dir)->capture_default_str();
    sub->add_flag("--keep-zero-length", o->keep_zero);
    sub->callback([o, &common] {
        PipelineConfig cfg;
        if (!o->replay.empty()) {
            const auto m = load_json(o->replay);
            cfg = config_from_json(io::field<json>(m, "config", o->replay));
            const auto in = io::field<json>(m, "input", o->replay);
            o->k.input = io::field<std::string>(in, "path", o->replay);
            o->k.weights = io::field<std::string>(in, "weights", o->replay);
            o->keep_zero = in.value("keep_zero_length", false);
            if (common.threads) cfg.threads = common.threads;
        } else {
            if (o->k.input.empty()) throw InputError("--input is required");
            cfg = config_from(o->k, common.threads);
            cfg.max_dim = o->max_dim;
            if (o->cap_density > 0.0) cfg.level_cap = -std::log(o->cap_density);
            cfg.edge_prefilter = o->prefilter;
        }
        const auto wc = io::read_cloud(o->k.input);
        const fs::path dir(o->out_dir);
        fs::create_directories(dir);
        const std::vector<std::string> names{"mixture.json", "cover.json",  "complex.json",
                                             "filtration.json", "barcode.csv", "manifest.json"};
        try {
            const auto r = run_pipeline(wc.points, resolve_weights(o->k.weights, wc), cfg);
            write_json((dir / "mixture.json").string(), io::mixture_to_json(r.f));
            write_json((dir / "cover.json").string(), io::cover_to_json(r.cover));
            write_json((dir / "complex.json").string(), io::complex_to_json(r.complex));
            write_json((dir / "filtration.json").string(), io::filtered_to_json(r.filtration));
            io::write_text((dir / "barcode.csv").string(), io::barcode_to_csv(o->keep_zero ? r.barcode : drop_zero_length(r.barcode)));
            const json input{{"path", o->k.input}, {"points", wc.points.size()}, {"dim", wc.points.dim()}, {"weights", o->k.weights},
                             {"keep_zero_length", o->keep_zero}};
            write_json((dir / "manifest.json").string(), manifest(cfg, r, input));
            std::cout << "landmarks " << r.cover.size() << ", simplices";
            for (auto c : r.complex.counts()) std::cout << ' ' << c;
            std::cout << ", bars " << r.barcode.intervals.size() << '\n';
        } catch (...) {
            for (const auto& n : names) fs::remove(dir / n);
            throw;
        }
    });
}

// ---------------------------------------------------------------- plots

RowMatrix read_matrix_csv(const std::string& path)
{
    auto rows = io::parse_csv_rows(io::read_text(path), path);
    if (rows.empty()) throw InputError(path + ": empty matrix");
    return PointCloud::from_rows(rows).matrix();
}

void add_plot(CLI::App& app, Common&)
{
    struct Opts {
        std::string complex;
        std::string coords = "landmarks";
        std::string projection;
        std::string color = "weight";
        std::string vertex_values;
        bool no_fill = false;
        std::string out = "complex.svg";
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("plot", "SVG of a complex's 1- and 2-skeleton");
    sub->add_option("--complex", o->complex)->required();
    sub->add_option("--coords", o->coords, "landmarks or spectral:GRAPH (Ising runs)")->capture_default_str();
    sub->add_option("--projection", o->projection, "CSV matrix m x 2 applied to the coordinates");
    sub->add_option("--color", o->color, "weight or vertex")->capture_default_str();
    sub->add_option("--vertex-values", o->vertex_values, "CSV with one scalar per landmark (for --color vertex)");
    sub->add_flag("--no-fill", o->no_fill, "do not fill 2-simplices");
    sub->add_option("--out", o->out)->capture_default_str();
    sub->callback([o] {
        const auto cx = io::complex_from_json(load_json(o->complex), o->complex);
        RowMatrix coords = vertex_positions(cx, PositionMode::landmarks);
        if (o->coords.rfind("spectral:", 0) == 0) {
            const Laplacian lap(io::parse_graph(o->coords.substr(9)));
            coords = lap.spectral_projection(coords, 3);
        } else if (o->coords != "landmarks") {
            throw InputError("unknown coordinate mode " + o->coords);
        }
        if (!o->projection.empty()) {
            const RowMatrix p = read_matrix_csv(o->projection);
            if (p.rows() != coords.cols() || p.cols() != 2) throw InputError("projection must be an m x 2 matrix");
            coords = coords * p;
        } else if (coords.cols() > 3) {
            throw InputError("complex lives in dimension " + std::to_string(coords.cols()) +
                             "; pass --projection, or --coords spectral:GRAPH for spin data");
        }
        svg::ComplexPlotOptions po;
        po.fill_triangles = !o->no_fill;
        if (o->color == "vertex") {
            if (o->vertex_values.empty()) throw InputError("--color vertex needs --vertex-values");
            const RowMatrix v = read_matrix_csv(o->vertex_values);
            po.vertex_values = std::vector<double>(v.data(), v.data() + v.size());
        } else if (o->color != "weight") {
            throw InputError("unknown colour mode " + o->color);
        }
        io::write_text(o->out, svg::plot_complex(cx, coords, po));
    });
}

void add_barcode_plot(CLI::App& app, Common&)
{
    struct Opts {
        std::string barcode;
        std::string out = "barcode.svg";
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("barcode-plot", "SVG of a barcode CSV");
    sub->add_option("--barcode", o->barcode)->required();
    sub->add_option("--out", o->out)->capture_default_str();
    sub->callback([o] {
        const auto bc = io::barcode_from_csv(io::read_text(o->barcode), o->barcode);
        io::write_text(o->out, svg::plot_barcode(bc));
    });
}

// ---------------------------------------------------------------- patches

void add_patches(CLI::App& app, Common&)
{
    struct Opts {
        std::string images;
        std::string labels;
        std::size_t per_digit = 50;
        int digit = -1;
        PatchConfig cfg;
        std::string mode = "full";
        std::string out = "patches.csv";
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("patches", "Hermite projections of image patches (IDX input)");
    sub->add_option("--images", o->images, "IDX3 ubyte image file")->required();
    sub->add_option("--labels", o->labels, "IDX1 ubyte label file")->required();
    sub->add_option("--per-digit", o->per_digit)->capture_default_str();
    sub->add_option("--digit", o->digit, "restrict to one digit (default all)");
    sub->add_option("--l", o->cfg.l, "patch side")->capture_default_str();
    sub->add_option("--r", o->cfg.r, "intensity threshold")->capture_default_str();
    sub->add_option("--mode", o->mode, "full or quadratic")->capture_default_str();
    sub->add_option("--out", o->out)->capture_default_str();
    sub->callback([o] {
        if (o->mode == "full") {
            o->cfg.mode = IntensityMode::full_gradient;
        } else if (o->mode == "quadratic") {
            o->cfg.mode = IntensityMode::quadratic_only;
        } else {
            throw InputError("unknown intensity mode " + o->mode);
        }
        const auto labels = read_idx_labels(o->labels);
        const auto all = read_idx_images(o->images);
        if (all.size() != labels.size()) throw InputError("image and label counts differ");
        std::vector<RowMatrix> chosen;
        for (std::size_t i : first_per_label(labels, o->per_digit))
            if (o->digit < 0 || labels[i] == o->digit) chosen.push_back(all[i]);
        const auto basis = hermite_basis(o->cfg.l);
        const auto pr = project_and_filter(extract_patches(chosen, o->cfg.l), basis, o->cfg);
        if (pr.points.rows() == 0) throw InputError("no patch passed the intensity threshold");
        io::write_cloud(o->out, PointCloud(pr.points));
        std::cout << "retained " << pr.source_rows.size() << " of " << pr.total << " patches\n";
    });
}

// ---------------------------------------------------------------- check

void add_check(CLI::App& app, Common& common)
{
    struct Opts {
        std::string mixture;
        std::string cover;
        std::string complex;
        std::string filtration;
        std::string reference;
        std::string samples;
        double d0 = 0.005;
        double s = 0.6;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("check", "Verify cover, interleaving and complex invariants of saved artifacts");
    sub->add_option("--mixture", o->mixture)->required();
    sub->add_option("--cover", o->cover)->required();
    sub->add_option("--complex", o->complex);
    sub->add_option("--filtration", o->filtration);
    sub->add_option("--reference", o->reference, "reference points (default: mixture centers above d0)");
    sub->add_option("--samples", o->samples, "extra points for the pointwise containment check");
    sub->add_option("--d0", o->d0)->capture_default_str();
    sub->add_option("--s", o->s)->capture_default_str();
    sub->callback([o, &common] {
        const auto f = io::mixture_from_json(load_json(o->mixture), o->mixture);
        const auto g = io::cover_from_json(load_json(o->cover), o->cover);
        const auto cut = DensityCutoff::from_density(o->d0);
        std::vector<std::string> failures;

        const ReferenceSet ref = o->reference.empty() ? superlevel_reference(f, f.centers(), cut, common.threads)
                                                      : ReferenceSet{io::read_cloud(o->reference).points, ReferenceSource::explicit_points};
        const auto cr = verify_cover(f, g, ref, o->s, 1e-10, common.threads);
        std::cout << "cover: " << ref.points.size() << " reference points, lower margin " << cr.lower_margin
                  << ", upper margin " << cr.upper_margin << (cr.ok() ? " ok" : " FAILED") << '\n';
        if (!cr.ok()) failures.push_back("cover sandwich");

        if (!o->complex.empty()) {
            const auto cx = io::complex_from_json(load_json(o->complex), o->complex);
            const auto idx = cx.index();
            std::size_t bad = 0;
            for (const auto& sx : cx.simplices)
                for (const auto& fc : facets(sx.vertices)) {
                    auto it = idx.find(fc);
                    if (it == idx.end() || cx.simplices[it->second].alpha_weight > sx.alpha_weight) ++bad;
                }
            std::cout << "complex: " << cx.simplices.size() << " simplices, " << bad << " closure/monotonicity violations\n";
            if (bad) failures.push_back("complex invariants");

            const FilteredComplex y = o->filtration.empty() ? denswit_weights(f, cx, common.threads)
                                                            : io::filtered_from_json(load_json(o->filtration), o->filtration);
            try {
                y.validate();
            } catch (const InputError& e) {
                failures.push_back(std::string("filtration order: ") + e.what());
            }
            std::optional<PointCloud> samples;
            if (!o->samples.empty()) samples = io::read_cloud(o->samples).points;
            const auto rep = check_interleaving(f, g, cx, y, cut.a0, samples ? &*samples : nullptr, o->s, 1e-9, common.threads);
            std::cout << "interleaving: " << rep.unconditional_checked << " unconditional, " << rep.conditional_checked
                      << " conditional checks, " << rep.violations.size() << " violations; " << rep.samples_checked
                      << " samples, " << rep.sample_containment_failures << " containment failures\n";
            for (std::size_t k = 0; k < std::min<std::size_t>(rep.violations.size(), 5); ++k)
                std::cout << "  " << rep.violations[k].detail << '\n';
            if (!rep.ok()) failures.push_back("interleaving");
        }
        if (!failures.empty()) {
            std::string msg = "failed checks:";
            for (const auto& f2 : failures) msg += " [" + f2 + "]";
            throw CheckFailed(msg);
        }
        std::cout << "all checks passed\n";
    });
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Density-filtered simplicial complexes from Gaussian kernel density estimates"};
    app.set_version_flag("--version", std::string(densfilt::version));
    // -h is taken by the kernel scale
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);
    app.fallthrough();
    Common common;
    app.add_option("--threads", common.threads, "worker threads (0 = all available)")->capture_default_str();
    add_gen(app, common);
    add_landmarks(app, common);
    add_complex(app, common);
    add_persist(app, common);
    add_pipeline(app, common);
    add_plot(app, common);
    add_barcode_plot(app, common);
    add_patches(app, common);
    add_check(app, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const CheckFailed& e) {
        std::cerr << "check failed: " << e.what() << '\n';
        return 4;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return 3;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const StateError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
