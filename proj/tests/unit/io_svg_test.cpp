#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "densfilt/io.hpp"
#include "densfilt/landmarks.hpp"
#include "densfilt/svg.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace densfilt;

namespace {

std::string temp_path(const std::string& name)
{
    return (std::filesystem::temp_directory_path() / ("densfilt_io_" + name)).string();
}

std::size_t occurrences(const std::string& s, const std::string& what)
{
    std::size_t n = 0;
    for (auto p = s.find(what); p != std::string::npos; p = s.find(what, p + 1)) ++n;
    return n;
}

template <typename F>
std::string error_of(F&& f)
{
    try {
        f();
    } catch (const InputError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST(Csv, HeaderCommentsAndBlankLinesAreSkipped)
{
    const auto rows = io::parse_csv_rows("x,y\n# note\n\n1, 2\n3 ,4e-1\r\n", "t");
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[1], (std::vector<double>{3.0, 0.4}));
}

TEST(Csv, ErrorsNameTheLine)
{
    EXPECT_NE(error_of([] { io::parse_csv_rows("1,2\n3,4\n5\n", "t"); }).find("line 3"), std::string::npos);
    EXPECT_NE(error_of([] { io::parse_csv_rows("a,b\n1,2\n1,x\n", "t"); }).find("line 3"), std::string::npos);
    EXPECT_NE(error_of([] { io::parse_csv_rows("1,2\n,2\n", "t"); }).find("line 2"), std::string::npos);
}

TEST(Csv, CloudRoundTripIsExact)
{
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nrm;
    std::vector<std::vector<double>> r;
    for (int i = 0; i < 20; ++i) r.push_back({nrm(rng), nrm(rng), 1e-300 * nrm(rng)});
    const auto pc = PointCloud::from_rows(r);
    for (const char* name : {"cloud.csv", "cloud.json"}) {
        const auto path = temp_path(name);
        io::write_cloud(path, pc, std::vector<double>(20, 0.5));
        const auto back = io::read_cloud(path);
        EXPECT_EQ(back.points.matrix(), pc.matrix()) << name;
        std::filesystem::remove(path);
    }
}

TEST(Csv, ReadCloudRejectsBadFiles)
{
    EXPECT_THROW(io::read_cloud(temp_path("absent.csv")), InputError);
    const auto path = temp_path("empty.csv");
    io::write_text(path, "x,y\n");
    EXPECT_THROW(io::read_cloud(path), InputError);
    const auto jpath = temp_path("bad.json");
    io::write_text(jpath, R"({"points": [[1,2],[3,4]], "weights": [1]})");
    EXPECT_THROW(io::read_cloud(jpath), InputError);
    io::write_text(jpath, R"({"points": [[1,2],[3,4]], "dimension": 3})");
    EXPECT_THROW(io::read_cloud(jpath), InputError);
    io::write_text(jpath, "{\"points\": [[1,2],");
    EXPECT_THROW(io::read_cloud(jpath), InputError);
    std::filesystem::remove(path);
    std::filesystem::remove(jpath);
}

TEST(BarcodeCsv, RoundTripKeepsInfinity)
{
    Barcode bc;
    bc.intervals = {{0, -1.25, 0.1}, {0, 0.0, std::numeric_limits<double>::infinity()}, {1, 0.3, 2.0 / 3.0}};
    const auto back = io::barcode_from_csv(io::barcode_to_csv(bc));
    EXPECT_EQ(oracle::as_tuples(back), oracle::as_tuples(bc));
}

TEST(BarcodeCsv, MalformedLinesAreReported)
{
    EXPECT_NE(error_of([] { io::barcode_from_csv("dim,birth,death\n0,1,2\n0,3,1\n"); }).find("line 3"), std::string::npos);
    EXPECT_NE(error_of([] { io::barcode_from_csv("0,1\n"); }).find("line 1"), std::string::npos);
    EXPECT_THROW(io::barcode_from_csv("1.5,0,1\n"), InputError);
    EXPECT_THROW(io::barcode_from_csv("-1,0,1\n"), InputError);
}

TEST(Json, MixtureAndCoverRoundTrip)
{
    const auto f = fixture::geyser_mixture();
    const auto f2 = io::mixture_from_json(io::parse_json(io::mixture_to_json(f).dump(), "t"));
    EXPECT_EQ(f2.centers().matrix(), f.centers().matrix());
    EXPECT_EQ(f2.coefficients(), f.coefficients());
    EXPECT_EQ(f2.scale(), f.scale());

    const auto g = select_landmarks(f, fixture::geyser_grid(f), CoverParams{0.5});
    const auto g2 = io::cover_from_json(io::parse_json(io::cover_to_json(g).dump(), "t"));
    EXPECT_EQ(g2.landmarks().matrix(), g.landmarks().matrix());
    EXPECT_EQ(g2.coefficients(), g.coefficients());
    EXPECT_EQ(g2.provenance().has_value(), g.provenance().has_value());
    EXPECT_THROW(io::cover_from_json(io::json{{"h", 1.0}}), InputError);
}

TEST(Json, ComplexAndFiltrationRoundTrip)
{
    const auto f = fixture::geyser_mixture();
    const auto g = select_landmarks(f, fixture::geyser_grid(f), CoverParams{0.5});
    const auto cx = build_alpha(power_from_cover(g));
    const auto cx2 = io::complex_from_json(io::parse_json(io::complex_to_json(cx).dump(), "t"));
    ASSERT_EQ(cx2.simplices.size(), cx.simplices.size());
    EXPECT_EQ(cx2.max_dim, cx.max_dim);
    for (std::size_t i = 0; i < cx.simplices.size(); ++i) {
        EXPECT_EQ(cx2.simplices[i].vertices, cx.simplices[i].vertices);
        EXPECT_EQ(cx2.simplices[i].alpha_weight, cx.simplices[i].alpha_weight);
        EXPECT_EQ(cx2.simplices[i].barycenter, cx.simplices[i].barycenter);
    }

    const auto y = alpha_filtration(cx);
    const auto y2 = io::filtered_from_json(io::parse_json(io::filtered_to_json(y).dump(), "t"));
    ASSERT_EQ(y2.size(), y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        EXPECT_EQ(y2[i].vertices, y[i].vertices);
        EXPECT_EQ(y2[i].weight, y[i].weight);
    }
    auto j = io::filtered_to_json(y);
    j["units"] = "density";
    EXPECT_THROW(io::filtered_from_json(j), InputError);
}

TEST(Json, ComplexRejectsOutOfRangeVertex)
{
    const PowerDiagram pd(fixture::line({0.0, 1.0}), {0.0, 0.0}, 1.0);
    auto j = io::complex_to_json(build_alpha(pd));
    j["simplices"][2]["v"] = {0, 5};
    EXPECT_THROW(io::complex_from_json(j), InputError);
    j = io::complex_to_json(build_alpha(pd));
    j["simplices"][0]["q"] = {0.0, 0.0};
    EXPECT_THROW(io::complex_from_json(j), InputError);
}

TEST(Json, MalformedTextIsInputError)
{
    EXPECT_THROW(io::parse_json("{", "t"), InputError);
    EXPECT_THROW(io::mixture_from_json(io::json{{"h", "x"}, {"centers", {{0.0}}}, {"coefficients", {1.0}}}), InputError);
}

TEST(Graphs, ParseAndRoundTrip)
{
    EXPECT_EQ(io::parse_graph("interval:5").edges.size(), 4u);
    EXPECT_EQ(io::parse_graph("circle:5").edges.size(), 5u);
    EXPECT_EQ(io::parse_graph("interval").m, 30u);
    const auto g = io::parse_graph("flares:3x4");
    const auto g2 = io::graph_from_json(io::graph_to_json(g));
    EXPECT_EQ(g2.kind, g.kind);
    EXPECT_EQ(g2.m, g.m);
    EXPECT_EQ(g2.edges, g.edges);
    EXPECT_THROW(io::parse_graph("flares:3"), InputError);
    EXPECT_THROW(io::parse_graph("ring:4"), InputError);
    EXPECT_THROW(io::parse_graph("circle:x"), InputError);
}

TEST(Spins, JsonRoundTripRecomputesSummaries)
{
    const auto g = GraphSpec::circle(6);
    IsingParams p;
    p.trials = 30;
    p.seed = 4;
    const auto s = ising_sample(g, p);
    const auto s2 = io::spins_from_json(io::parse_json(io::spins_to_json(s, g, p).dump(), "t"), g);
    EXPECT_EQ(s2.states, s.states);
    EXPECT_EQ(s2.energies, s.energies);
    EXPECT_EQ(s2.transitions, s.transitions);
    EXPECT_EQ(occurrences(io::spins_to_csv(s), "\n"), 30u);
    auto j = io::spins_to_json(s, g, p);
    j["states"][0][0] = 0;
    EXPECT_THROW(io::spins_from_json(j, g), InputError);
}

TEST(Svg, TwoLandmarksDrawTwoVerticesAndOneEdge)
{
    const PowerDiagram pd(fixture::rows({{0.0, 0.0}, {1.0, 2.0}}), {0.0, 0.0}, 0.5);
    const auto cx = build_alpha(pd);
    const auto out = svg::plot_complex(cx, pd.landmarks.matrix());
    EXPECT_EQ(out.rfind("<svg", 0), 0u);
    EXPECT_EQ(occurrences(out, "<circle"), 2u);
    EXPECT_EQ(occurrences(out, "<line"), 1u);
    EXPECT_EQ(occurrences(out, "<polygon"), 0u);
    EXPECT_NE(out.find("</svg>"), std::string::npos);
    EXPECT_EQ(out, svg::plot_complex(cx, pd.landmarks.matrix()));
}

TEST(Svg, TriangleIsFilledUnlessDisabled)
{
    const PowerDiagram pd(fixture::rows({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}), {0.0, 0.0, 0.0}, 1.0);
    const auto cx = build_alpha(pd);
    EXPECT_EQ(occurrences(svg::plot_complex(cx, pd.landmarks.matrix()), "<polygon"), 1u);
    svg::ComplexPlotOptions o;
    o.fill_triangles = false;
    EXPECT_EQ(occurrences(svg::plot_complex(cx, pd.landmarks.matrix(), o), "<polygon"), 0u);
}

TEST(Svg, ComplexInputChecks)
{
    const PowerDiagram pd(fixture::rows({{0.0, 0.0}, {1.0, 2.0}}), {0.0, 0.0}, 0.5);
    const auto cx = build_alpha(pd);
    EXPECT_THROW(svg::plot_complex(cx, RowMatrix::Zero(2, 1)), InputError);
    EXPECT_THROW(svg::plot_complex(cx, RowMatrix::Zero(3, 2)), InputError);
    svg::ComplexPlotOptions o;
    o.vertex_values = std::vector<double>{1.0};
    EXPECT_THROW(svg::plot_complex(cx, pd.landmarks.matrix(), o), InputError);
    o.vertex_values.reset();
    o.simplex_values = std::vector<double>{1.0};
    EXPECT_THROW(svg::plot_complex(cx, pd.landmarks.matrix(), o), InputError);
}

TEST(Svg, EmptyBarcodeDrawsOnlyTheAxis)
{
    const auto out = svg::plot_barcode(Barcode{});
    EXPECT_EQ(occurrences(out, "class=\"bar"), 0u);
    EXPECT_EQ(occurrences(out, "class=\"axis\""), 1u);
}

TEST(Svg, EssentialBarsEndInArrows)
{
    const FilteredComplex y({{{0}, 0.0}, {{1}, 0.0}, {{2}, 0.0}, {{0, 1}, 1.0}, {{1, 2}, 2.0}, {{0, 2}, 3.0}});
    const auto out = svg::plot_barcode(compute_persistence(y, 1));
    EXPECT_EQ(occurrences(out, "class=\"bar dim0\""), 3u);
    EXPECT_EQ(occurrences(out, "class=\"bar dim1\""), 1u);
    EXPECT_EQ(occurrences(out, "marker-end=\"url(#arrow)\""), 2u);
    EXPECT_NE(out.find(">H1<"), std::string::npos);
}
