#pragma once

// File formats: point clouds (CSV/JSON), mixtures, covers, complexes,
// filtrations, barcodes, spin samples and graphs.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "densfilt/alpha.hpp"
#include "densfilt/datagen.hpp"
#include "densfilt/filtration.hpp"
#include "densfilt/persistence.hpp"

namespace densfilt::io {

using json = nlohmann::json;

inline std::string fmt(double x)
{
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string read_text(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out << text;
    if (!out) throw InputError("failed writing " + path);
}

inline json parse_json(const std::string& text, const std::string& what)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError("malformed JSON in " + what + ": " + e.what());
    }
}

template <typename T>
T field(const json& j, const char* key, const std::string& what)
{
    if (!j.contains(key)) throw InputError(what + " is missing \"" + key + "\"");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InputError(what + " has a malformed \"" + key + "\": " + e.what());
    }
}

// ---------------------------------------------------------------- CSV

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    for (auto& s : out) {
        const auto a = s.find_first_not_of(" \t");
        const auto b = s.find_last_not_of(" \t");
        s = a == std::string::npos ? "" : s.substr(a, b - a + 1);
    }
    return out;
}

inline bool parse_double(const std::string& s, double& out)
{
    if (s == "inf" || s == "Inf" || s == "+inf") {
        out = std::numeric_limits<double>::infinity();
        return true;
    }
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end && *end == '\0';
}

} // namespace detail

/// Numeric rows; '#' comments, blank lines and one leading non-numeric header
/// row are skipped.
inline std::vector<std::vector<double>> parse_csv_rows(const std::string& text, const std::string& what)
{
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    bool header_allowed = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = detail::split_csv(line);
        std::vector<double> row;
        row.reserve(cells.size());
        bool numeric = true;
        for (const auto& c : cells) {
            double v;
            if (!detail::parse_double(c, v)) {
                numeric = false;
                break;
            }
            row.push_back(v);
        }
        if (!numeric) {
            if (header_allowed) {
                header_allowed = false;
                continue;
            }
            throw InputError(what + ": non-numeric value on line " + std::to_string(lineno));
        }
        header_allowed = false;
        if (!rows.empty() && row.size() != rows.front().size())
            throw InputError(what + ": line " + std::to_string(lineno) + " has " + std::to_string(row.size()) +
                             " columns, expected " + std::to_string(rows.front().size()));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::string points_to_csv(const RowMatrix& m)
{
    std::string out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            if (k) out += ',';
            out += fmt(m(i, k));
        }
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------- point clouds

struct WeightedCloud {
    PointCloud points;
    std::optional<std::vector<double>> weights;
};

inline json matrix_json(const RowMatrix& m)
{
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) r.push_back(m(i, k));
        rows.push_back(std::move(r));
    }
    return rows;
}

inline json vector_json(const Vector& v)
{
    json r = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) r.push_back(v[k]);
    return r;
}

inline PointCloud cloud_from_json(const json& j, const std::string& what)
{
    try {
        return PointCloud::from_rows(j.get<std::vector<std::vector<double>>>());
    } catch (const json::exception& e) {
        throw InputError(what + ": points must be an array of numeric arrays (" + e.what() + ")");
    }
}

/// {"dimension": m, "points": [[...]], "weights": [...]} (weights optional).
inline json cloud_to_json(const PointCloud& pc, const std::optional<std::vector<double>>& weights = std::nullopt)
{
    json j{{"dimension", pc.dim()}, {"points", matrix_json(pc.matrix())}};
    if (weights) j["weights"] = *weights;
    return j;
}

/// Reads .json ({"points", "weights"}) or CSV (one point per row).
inline WeightedCloud read_cloud(const std::string& path)
{
    const std::string text = read_text(path);
    const bool is_json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
    if (is_json) {
        const json j = parse_json(text, path);
        WeightedCloud wc{cloud_from_json(j.contains("points") ? j.at("points") : j, path), std::nullopt};
        if (j.is_object() && j.contains("dimension") && field<std::size_t>(j, "dimension", path) != wc.points.dim())
            throw InputError(path + ": declared dimension does not match the points");
        if (j.is_object() && j.contains("weights")) {
            wc.weights = field<std::vector<double>>(j, "weights", path);
            if (wc.weights->size() != wc.points.size()) throw InputError(path + ": weight count does not match point count");
        }
        return wc;
    }
    auto rows = parse_csv_rows(text, path);
    if (rows.empty()) throw InputError(path + ": no data rows");
    return {PointCloud::from_rows(rows), std::nullopt};
}

inline void write_cloud(const std::string& path, const PointCloud& pc,
                        const std::optional<std::vector<double>>& weights = std::nullopt)
{
    const bool is_json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
    if (is_json) {
        write_text(path, cloud_to_json(pc, weights).dump(1) + "\n");
    } else {
        write_text(path, points_to_csv(pc.matrix()));
    }
}

// ---------------------------------------------------------------- mixture, cover

inline json mixture_to_json(const GaussianMixture& f)
{
    return {{"h", f.scale()}, {"centers", matrix_json(f.centers().matrix())}, {"coefficients", f.coefficients()}};
}

inline GaussianMixture mixture_from_json(const json& j, const std::string& what = "mixture")
{
    return GaussianMixture(cloud_from_json(j.at("centers"), what), field<std::vector<double>>(j, "coefficients", what),
                           field<double>(j, "h", what));
}

inline json cover_to_json(const MaxGaussianCover& g)
{
    json j{{"h", g.scale()}, {"landmarks", matrix_json(g.landmarks().matrix())}, {"coefficients", g.coefficients()}};
    j["provenance"] = g.provenance() ? matrix_json(g.provenance()->matrix()) : json::array();
    return j;
}

inline MaxGaussianCover cover_from_json(const json& j, const std::string& what = "cover")
{
    if (!j.contains("landmarks")) throw InputError(what + " is missing \"landmarks\"");
    std::optional<PointCloud> prov;
    if (j.contains("provenance") && !j.at("provenance").empty()) prov = cloud_from_json(j.at("provenance"), what);
    return MaxGaussianCover(cloud_from_json(j.at("landmarks"), what), field<std::vector<double>>(j, "coefficients", what),
                            field<double>(j, "h", what), std::move(prov));
}

// ---------------------------------------------------------------- complexes

inline json complex_to_json(const AlphaComplex& cx)
{
    json j{{"h", cx.diagram.scale},
           {"landmarks", matrix_json(cx.diagram.landmarks.matrix())},
           {"powers", cx.diagram.powers},
           {"max_dim", cx.max_dim}};
    j["level_cap"] = cx.level_cap ? json(*cx.level_cap) : json(nullptr);
    json sx = json::array();
    for (const auto& s : cx.simplices)
        sx.push_back({{"v", s.vertices}, {"w", s.alpha_weight}, {"q", vector_json(s.barycenter)}});
    j["simplices"] = std::move(sx);
    return j;
}

inline AlphaComplex complex_from_json(const json& j, const std::string& what = "complex")
{
    PowerDiagram pd(cloud_from_json(j.at("landmarks"), what), field<std::vector<double>>(j, "powers", what),
                    field<double>(j, "h", what));
    AlphaComplex cx{pd, {}, 0, std::nullopt};
    if (j.contains("level_cap") && !j.at("level_cap").is_null()) cx.level_cap = j.at("level_cap").get<double>();
    const double two_h2 = pd.two_h2();
    for (const auto& s : field<json>(j, "simplices", what)) {
        SimplexRecord r;
        r.vertices = field<VertexSet>(s, "v", what);
        r.alpha_weight = field<double>(s, "w", what);
        r.power_objective = r.alpha_weight * two_h2;
        const auto q = field<std::vector<double>>(s, "q", what);
        r.barycenter = Eigen::Map<const Vector>(q.data(), static_cast<Eigen::Index>(q.size()));
        if (static_cast<std::size_t>(r.barycenter.size()) != pd.landmarks.dim())
            throw InputError(what + ": barycenter dimension does not match landmarks");
        for (auto v : r.vertices)
            if (v >= pd.landmarks.size()) throw InputError(what + ": simplex vertex out of range");
        cx.max_dim = std::max(cx.max_dim, r.dim());
        cx.simplices.push_back(std::move(r));
    }
    std::stable_sort(cx.simplices.begin(), cx.simplices.end(),
                     [](const SimplexRecord& a, const SimplexRecord& b) { return dim_lex_less(a.vertices, b.vertices); });
    if (j.contains("max_dim")) cx.max_dim = j.at("max_dim").get<std::size_t>();
    return cx;
}

inline json filtered_to_json(const FilteredComplex& y)
{
    json sx = json::array();
    for (const auto& s : y.simplices()) sx.push_back({{"v", s.vertices}, {"w", s.weight}});
    return {{"simplices", std::move(sx)}, {"units", FilteredComplex::units}};
}

inline FilteredComplex filtered_from_json(const json& j, const std::string& what = "filtration")
{
    if (j.contains("units") && j.at("units") != FilteredComplex::units)
        throw InputError(what + ": unsupported units " + j.at("units").dump());
    std::vector<FilteredSimplex> out;
    for (const auto& s : field<json>(j, "simplices", what)) out.push_back({field<VertexSet>(s, "v", what), field<double>(s, "w", what)});
    return FilteredComplex(std::move(out));
}

/// Problem and solution dump for regression fixtures.
inline json qp_dump(const CellProblem& p, const QpSolution& sol)
{
    json gram = json::array();
    const auto& g = p.system->gram();
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index k = 0; k < g.cols(); ++k) r.push_back(g(i, k));
        gram.push_back(std::move(r));
    }
    json minimizer = json::array();
    for (const auto& t : sol.minimizer) minimizer.push_back({{"index", t.index}, {"weight", t.weight}});
    return {{"problem",
             {{"gram", std::move(gram)},
              {"powers", p.system->powers()},
              {"base", p.base},
              {"equalities", p.equalities},
              {"inequalities", p.inequalities}}},
            {"solution",
             {{"status", to_string(sol.status)},
              {"objective", std::isfinite(sol.objective) ? json(sol.objective) : json(nullptr)},
              {"minimizer", std::move(minimizer)},
              {"active_set", sol.active_set},
              {"multipliers", sol.multipliers},
              {"kkt_residual", sol.kkt_residual},
              {"iterations", sol.iterations}}}};
}

// ---------------------------------------------------------------- barcodes

inline std::string barcode_to_csv(const Barcode& bc)
{
    std::string out = "dim,birth,death\n";
    for (const auto& i : bc.intervals) out += std::to_string(i.dim) + "," + fmt(i.birth) + "," + fmt(i.death) + "\n";
    return out;
}

inline Barcode barcode_from_csv(const std::string& text, const std::string& what = "barcode")
{
    Barcode bc;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (lineno == 1 && line.rfind("dim", 0) == 0) continue;
        const auto cells = detail::split_csv(line);
        double d, b, e;
        if (cells.size() != 3 || !detail::parse_double(cells[0], d) || !detail::parse_double(cells[1], b) ||
            !detail::parse_double(cells[2], e) || d < 0 || d != std::floor(d) || !(b <= e))
            throw InputError(what + ": malformed interval on line " + std::to_string(lineno));
        bc.intervals.push_back({static_cast<std::size_t>(d), b, e});
    }
    return bc;
}

// ---------------------------------------------------------------- graphs, spins

inline json graph_to_json(const GraphSpec& g)
{
    json adj = json::array();
    for (auto [i, j] : g.edges) adj.push_back({i, j});
    return {{"kind", to_string(g.kind)}, {"m", g.m}, {"adjacency", std::move(adj)}};
}

inline GraphKind graph_kind_from_string(const std::string& s)
{
    if (s == "interval") return GraphKind::interval;
    if (s == "circle") return GraphKind::circle;
    if (s == "flares") return GraphKind::flares;
    throw InputError("unknown graph kind " + s);
}

inline GraphSpec graph_from_json(const json& j, const std::string& what = "graph")
{
    const auto kind = graph_kind_from_string(field<std::string>(j, "kind", what));
    const auto m = field<std::size_t>(j, "m", what);
    return GraphSpec::from_edges(kind, m, field<std::vector<std::pair<std::size_t, std::size_t>>>(j, "adjacency", what));
}

/// "interval:30", "circle:30", "flares" or "flares:3x14".
inline GraphSpec parse_graph(const std::string& spec)
{
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    try {
        if (kind == "interval") return GraphSpec::interval(arg.empty() ? 30 : std::stoul(arg));
        if (kind == "circle") return GraphSpec::circle(arg.empty() ? 30 : std::stoul(arg));
        if (kind == "flares") {
            if (arg.empty()) return GraphSpec::flares();
            const auto x = arg.find('x');
            if (x == std::string::npos) throw InputError("flares graph spec must look like flares:3x14");
            return GraphSpec::flares(std::stoul(arg.substr(0, x)), std::stoul(arg.substr(x + 1)));
        }
    } catch (const std::logic_error&) {
        throw InputError("malformed graph spec " + spec);
    }
    throw InputError("unknown graph kind in " + spec);
}

inline std::string spins_to_csv(const SpinSample& s)
{
    std::string out;
    for (Eigen::Index i = 0; i < s.states.rows(); ++i) {
        for (Eigen::Index k = 0; k < s.states.cols(); ++k) {
            if (k) out += ',';
            out += s.states(i, k) > 0 ? "1" : "-1";
        }
        out += '\n';
    }
    return out;
}

inline json spins_to_json(const SpinSample& s, const GraphSpec& g, const IsingParams& p)
{
    json states = json::array();
    for (Eigen::Index i = 0; i < s.states.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index k = 0; k < s.states.cols(); ++k) r.push_back(s.states(i, k));
        states.push_back(std::move(r));
    }
    return {{"graph", graph_to_json(g)},
            {"beta", p.beta},
            {"trials", p.trials},
            {"sweeps_per_trial", p.sweeps_per_trial},
            {"burn_in", p.burn_in},
            {"seed", p.seed},
            {"states", std::move(states)},
            {"energies", s.energies},
            {"transitions", s.transitions}};
}

inline SpinSample spins_from_json(const json& j, const GraphSpec& g, const std::string& what = "spins")
{
    const auto rows = field<std::vector<std::vector<int>>>(j, "states", what);
    SpinSample s;
    s.states.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(g.m));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        check_spins(g, rows[i]);
        for (std::size_t k = 0; k < g.m; ++k) s.states(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
        s.energies.push_back(hamiltonian(g, rows[i]));
        s.transitions.push_back(transition_count(g, rows[i]));
    }
    return s;
}

} // namespace densfilt::io
