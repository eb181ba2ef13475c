#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>

#include "qrect/pointset.hpp"

using namespace qrect;

namespace {

GeneratorSpec spec_for(Family f, double h) {
    GeneratorSpec g;
    g.family = f;
    g.h = h;
    return g;
}

double brute_diameter(const WeightedPointCloud& c) {
    double best = 0.0;
    for (Index i = 0; i < c.size(); ++i)
        for (Index j = 0; j < c.size(); ++j) best = std::max(best, dist(c.metric, c.points.col(i), c.points.col(j)));
    return best;
}

}  // namespace

TEST_CASE("every family generates a valid cloud") {
    for (Family f : {Family::segment, Family::kplane_patch, Family::circle, Family::parallel_lines,
                     Family::lipschitz_graph, Family::turning_curve, Family::heis_horizontal_line, Family::heis_lift}) {
        CAPTURE(family_name(f));
        GeneratorSpec g = spec_for(f, 0.02);
        g.generations = 4;
        const auto c = generate(g);
        CHECK_NOTHROW(c.validate());
        CHECK(c.size() > 10);
        CHECK(parse_family(family_name(f)) == f);
    }
    CHECK_THROWS_AS(parse_family("sphere"), InvalidParameter);
}

TEST_CASE("segment sampling and mass") {
    GeneratorSpec g = spec_for(Family::segment, 0.01);
    g.length = 2.0;
    const auto c = generate(g);
    CHECK(c.size() == 201);
    CHECK(c.total_mass() == doctest::Approx(2.01));
    CHECK(diameter(c).value == doctest::Approx(2.0));
    CHECK(diameter(c).exact);
}

TEST_CASE("parallel lines: two rows at height 0 and eps r") {
    GeneratorSpec g = spec_for(Family::parallel_lines, 1e-3);
    g.eps = 0.01;
    g.r = 1.0;
    const auto c = generate(g);
    CHECK(c.size() == 2 * 2001);
    int low = 0, high = 0;
    for (Index i = 0; i < c.size(); ++i) {
        const double y = c.points(1, i);
        if (y == 0.0) ++low;
        if (y == doctest::Approx(0.01)) ++high;
        CHECK(std::abs(c.points(0, i)) <= 1.0 + 1e-12);
    }
    CHECK(low == 2001);
    CHECK(high == 2001);
    g.eps = 2.0;
    CHECK_THROWS_AS(generate(g), InvalidParameter);
}

TEST_CASE("horizontal Heisenberg line is isometric to a segment") {
    GeneratorSpec g = spec_for(Family::heis_horizontal_line, 0.05);
    g.n = 2;
    g.seed = 11;
    const auto c = generate(g);
    for (Index i = 0; i < c.size(); i += 3)
        for (Index j = 0; j < c.size(); j += 5) {
            const double horiz = (c.points.col(i).head(4) - c.points.col(j).head(4)).norm();
            CHECK(dist(c.metric, c.points.col(i), c.points.col(j)) == doctest::Approx(horiz).epsilon(1e-12));
        }
}

TEST_CASE("lifted circle accumulates the enclosed area") {
    GeneratorSpec g = spec_for(Family::heis_lift, 1e-3);
    g.n = 1;
    g.radius = 0.5;
    const auto c = generate(g);
    const double final_t = c.points(2, c.size() - 1);
    // Inscribed polygon area converges to pi R^2.
    CHECK(final_t == doctest::Approx(std::numbers::pi * 0.25).epsilon(1e-5));
    g.curve = "spiral";
    CHECK_THROWS_AS(generate(g), InvalidParameter);
}

TEST_CASE("lipschitz graph slope stays within the bound") {
    GeneratorSpec g = spec_for(Family::lipschitz_graph, 1e-3);
    g.lipschitz = 0.2;
    g.seed = 3;
    const auto c = generate(g);
    for (Index i = 0; i + 1 < c.size(); ++i) {
        const double slope = (c.points(1, i + 1) - c.points(1, i)) / (c.points(0, i + 1) - c.points(0, i));
        CHECK(std::abs(slope) <= 0.2 + 1e-9);
    }
}

TEST_CASE("diameter: exact matches brute force, large clouds flagged") {
    GeneratorSpec g = spec_for(Family::heis_lift, 0.05);
    g.n = 2;
    const auto c = generate(g);
    CHECK(diameter(c).value == doctest::Approx(brute_diameter(c)).epsilon(1e-15));
    GeneratorSpec big = spec_for(Family::circle, 1e-3);
    const auto cb = generate(big);
    const Diameter d = diameter(cb);
    CHECK_FALSE(d.exact);
    CHECK(d.value <= 2.0 + 1e-12);
    CHECK(d.value > 1.99);
}

TEST_CASE("rescaling respects the dilation structure") {
    GeneratorSpec g = spec_for(Family::heis_lift, 0.05);
    g.n = 1;
    const auto c = generate(g);
    const auto r = rescaled(c, 2.0);
    CHECK(diameter(r).value == doctest::Approx(2.0 * diameter(c).value));
    CHECK(r.total_mass() == doctest::Approx(2.0 * c.total_mass()));
    CHECK(r.h == doctest::Approx(2.0 * c.h));
    CHECK_THROWS_AS(rescaled(c, 0.0), InvalidParameter);
}

TEST_CASE("regularity of a segment") {
    const auto c = generate(spec_for(Family::segment, 1e-3));
    const auto rep = estimate_regularity(c, 200, 5);
    CHECK(rep.samples == 200);
    CHECK(rep.C_lower >= 0.9);
    CHECK(rep.C_upper <= 2.1);
    CHECK_FALSE(rep.flagged);
    CHECK_THROWS_AS(estimate_regularity(c, 10, 5, 10.0, 5e-3), ScaleBelowResolution);
}

TEST_CASE("embeddings are isometric") {
    GeneratorSpec g = spec_for(Family::heis_lift, 0.1);
    g.n = 1;
    const auto h1 = generate(g);
    const auto e1 = embed_iota1(h1, 3);
    CHECK(e1.metric == MetricSpec::heisenberg(3));
    const auto planar = generate(spec_for(Family::circle, 0.1));
    const auto e2 = embed_iota2(planar, 2);
    for (Index i = 0; i < h1.size(); i += 2)
        for (Index j = 1; j < h1.size(); j += 3)
            CHECK(dist(e1.metric, e1.points.col(i), e1.points.col(j)) ==
                  doctest::Approx(dist(h1.metric, h1.points.col(i), h1.points.col(j))).epsilon(1e-14));
    for (Index i = 0; i < planar.size(); i += 2)
        for (Index j = 1; j < planar.size(); j += 3)
            CHECK(dist(e2.metric, e2.points.col(i), e2.points.col(j)) ==
                  doctest::Approx((planar.points.col(i) - planar.points.col(j)).norm()).epsilon(1e-14));
    CHECK_THROWS_AS(embed_iota1(planar, 3), DimensionMismatch);
    CHECK_THROWS_AS(embed_iota2(h1, 3), DimensionMismatch);
    CHECK_THROWS_AS(embed_iota2(planar, 1), IsometryViolation);
}

TEST_CASE("CSV round trip is bit exact") {
    GeneratorSpec g = spec_for(Family::lipschitz_graph, 0.01);
    g.seed = 9;
    const auto c = generate(g);
    std::stringstream ss;
    write_cloud_csv(c, ss);
    const auto back = parse_cloud_csv(ss);
    CHECK(back.metric == c.metric);
    CHECK(back.h == c.h);
    CHECK(back.s == c.s);
    CHECK((back.points.array() == c.points.array()).all());
    CHECK((back.weights.array() == c.weights.array()).all());
}

TEST_CASE("JSON file round trip") {
    GeneratorSpec g = spec_for(Family::heis_lift, 0.05);
    g.n = 2;
    const auto c = generate(g);
    const auto path = std::filesystem::temp_directory_path() / "qrect_roundtrip.json";
    write_cloud(c, path);
    const auto back = read_cloud(path);
    std::filesystem::remove(path);
    CHECK(back.metric == c.metric);
    CHECK((back.points.array() == c.points.array()).all());
    CHECK((back.weights.array() == c.weights.array()).all());
}

TEST_CASE("malformed CSV input is rejected with its line") {
    std::istringstream bad_number("# metric,euclidean,2,s,1,h,0.1,weights,quadrature\nc1,c2,weight\n0,0,1\n1,x,1\n");
    try {
        parse_cloud_csv(bad_number);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 4);
    }
    std::istringstream no_weight("# metric,euclidean,2,s,1,h,0.1,weights,quadrature\nc1,c2\n0,0\n");
    CHECK_THROWS_AS(parse_cloud_csv(no_weight), SchemaError);
    std::istringstream wrong_cols("# metric,heisenberg,1,s,1,h,0.1,weights,quadrature\nc1,c2,weight\n0,0,1\n");
    CHECK_THROWS_AS(parse_cloud_csv(wrong_cols), SchemaError);
    std::istringstream no_header("c1,c2,weight\n0,0,1\n");
    CHECK_THROWS_AS(parse_cloud_csv(no_header), SchemaError);
    CHECK_THROWS(read_cloud("/nonexistent/cloud.csv"));
}

TEST_CASE("validation catches bad clouds") {
    WeightedPointCloud c;
    c.metric = MetricSpec::euclidean(2);
    c.points = Mat::Random(2, 5);
    c.weights = Vec::Ones(5);
    c.h = 1e-3;
    CHECK_NOTHROW(c.validate());
    c.weights(2) = -1.0;
    CHECK_THROWS_AS(c.validate(), InvalidParameter);
    c.weights = Vec::Ones(4);
    CHECK_THROWS_AS(c.validate(), DimensionMismatch);
}
