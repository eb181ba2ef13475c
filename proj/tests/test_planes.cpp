#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "qrect/cubes.hpp"
#include "qrect/planes.hpp"

using namespace qrect;

namespace {

Mat orthonormal(std::mt19937_64& rng, int rows, int cols) {
    std::normal_distribution<double> g;
    Mat m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
    Eigen::HouseholderQR<Mat> qr(m);
    return qr.householderQ() * Mat::Identity(rows, cols);
}

// Infimum over a dense grid along a horizontal line, then golden refinement.
double brute_heis_line_distance(const HeisPoint& p, const HorizontalPlane& V) {
    auto f = [&](double s) {
        HeisPoint q{V.basis.col(0) * s, 0.0};
        return koranyi_dist(p, heis_mul(V.base, q));
    };
    const double span = 4.0 * (1.0 + p.x.norm() + std::sqrt(std::abs(p.t)) + V.base.x.norm());
    const int n = 200000;
    double best_s = 0.0;
    double best = f(0.0);
    for (int i = 0; i <= n; ++i) {
        const double s = -span + 2.0 * span * i / n;
        const double v = f(s);
        if (v < best) best = v, best_s = s;
    }
    double a = best_s - 2.0 * span / n, b = best_s + 2.0 * span / n;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 200; ++it) {
        const double c = b - g * (b - a), d = a + g * (b - a);
        if (f(c) < f(d)) b = d;
        else a = c;
    }
    return std::min(best, f(0.5 * (a + b)));
}

}  // namespace

TEST_CASE("subspace angle of planted rotations") {
    std::mt19937_64 rng(3);
    for (double theta : {0.0, 0.01, 0.3, 1.2}) {
        const Mat f = orthonormal(rng, 5, 3);
        Mat B1 = f.leftCols(2);
        Mat B2 = B1;
        B2.col(0) = std::cos(theta) * f.col(0) + std::sin(theta) * f.col(2);
        CHECK(subspace_angle(B1, B2) == doctest::Approx(std::sin(theta)).epsilon(1e-10));
        CHECK(subspace_angle(B2, B1) == doctest::Approx(std::sin(theta)).epsilon(1e-10));
    }
    const Mat f = orthonormal(rng, 4, 2);
    CHECK(subspace_angle(f, f * Eigen::Rotation2Dd(0.7).toRotationMatrix()) < 1e-12);
}

TEST_CASE("plane fit recovers flat data exactly") {
    std::mt19937_64 rng(5);
    const Mat frame = orthonormal(rng, 4, 2);
    Vec base(4);
    base << 0.3, -1.0, 2.0, 0.5;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    WeightedPointCloud c;
    c.metric = MetricSpec::euclidean(4);
    c.points.resize(4, 60);
    c.weights = Vec::Constant(60, 1.0 / 60.0);
    for (Index i = 0; i < 60; ++i) c.points.col(i) = base + frame * Eigen::Vector2d(u(rng), u(rng));
    std::vector<Index> all(60);
    for (Index i = 0; i < 60; ++i) all[static_cast<std::size_t>(i)] = i;
    for (double p : {1.0, 2.0, 3.0}) {
        const PlaneFit fit = fit_plane(c, all, 2, p, 2, 1);
        CHECK(fit.beta < 1e-8);
        CHECK(subspace_angle(fit.plane.basis, frame) < 1e-6);
        CHECK(dist_eucl(fit.plane, base) < 1e-8);
    }
}

TEST_CASE("isotropic frames and projection") {
    for (int n : {1, 2, 3}) {
        for (int k = 1; k <= n; ++k) {
            const Mat f = random_isotropic_frame(n, k, 11u + static_cast<unsigned>(n * 7 + k));
            CHECK((f.transpose() * f - Mat::Identity(k, k)).norm() < 1e-12);
            CHECK(max_isotropy_defect(f) < 1e-12);
        }
    }
    std::mt19937_64 rng(2);
    const Mat raw = orthonormal(rng, 4, 2);
    const Mat iso = isotropize(raw);
    CHECK(max_isotropy_defect(iso) < 1e-12);
    CHECK((iso.transpose() * iso - Mat::Identity(2, 2)).norm() < 1e-12);

    Vec bx(4);
    bx << 0.5, -0.2, 0.1, 0.7;
    const HorizontalPlane V = random_isotropic(2, 2, 9, HeisPoint{bx, 0.3});
    std::normal_distribution<double> g;
    for (int t = 0; t < 20; ++t) {
        HeisPoint p{Vec(4), g(rng)};
        for (Index i = 0; i < 4; ++i) p.x[i] = g(rng);
        const HeisPoint q = horiz_project(V, p);
        const HeisPoint qq = horiz_project(V, q);
        CHECK((q.coords() - qq.coords()).norm() < 1e-12);
        CHECK(heis_plane_distance(q.coords().data(), V) < 1e-6);
    }
}

TEST_CASE("Heisenberg distance to a horizontal line matches brute force") {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> g;
    for (int t = 0; t < 25; ++t) {
        const HorizontalPlane V = random_isotropic(1, 1, 100u + static_cast<unsigned>(t),
                                                   HeisPoint{Eigen::Vector2d(g(rng), g(rng)), g(rng)});
        const HeisPoint p{Eigen::Vector2d(2.0 * g(rng), 2.0 * g(rng)), 3.0 * g(rng)};
        const double want = brute_heis_line_distance(p, V);
        CHECK(heis_plane_distance(p.coords().data(), V) == doctest::Approx(want).epsilon(1e-7));
        const HeisPlaneDistance d = heis_dist_to_plane(p, V);
        CHECK(d.bracket_low <= d.inf_estimate * (1.0 + 1e-9));
        CHECK(d.inf_estimate <= d.bracket_high * (1.0 + 1e-12));
    }
}

TEST_CASE("projection bracket and Pythagoras checks") {
    const auto br = projection_bracket_check(400, 3);
    CHECK(br.violations == 0);
    CHECK(br.trials == 400);
    const auto eu = pythagoras_check(PythagorasKind::eucl_two_plane, 500, 7);
    CHECK(eu.violations == 0);
    CHECK(eu.trials == 500);
    const auto h1 = pythagoras_check(PythagorasKind::heis_one_plane, 300, 7);
    CHECK(std::isfinite(h1.fitted_constant));
    CHECK(h1.fitted_constant > 0.0);
    CHECK(to_json(eu).find("\"eucl_two_plane\"") != std::string::npos);
}

TEST_CASE("simplex volumes") {
    for (int d = 1; d <= 5; ++d) {
        Mat v = Mat::Zero(d, d + 1);
        for (int i = 0; i < d; ++i) v(i, i + 1) = 1.0;
        CHECK(simplex_volume(v) == doctest::Approx(1.0 / std::tgamma(d + 1.0)).epsilon(1e-12));
    }
    Mat tri(3, 3);
    tri << 0, 2, 0,
           0, 0, 3,
           1, 1, 1;
    CHECK(simplex_volume(tri) == doctest::Approx(3.0));

    std::mt19937_64 rng(21);
    std::normal_distribution<double> g;
    for (int t = 0; t < 200; ++t) {
        const int d = 2 + t % 4;
        const int k = 1 + t % (d - 1);
        Mat s(d, k + 1);
        for (Index i = 0; i < s.size(); ++i) s.data()[i] = g(rng);
        Vec z(d);
        for (Index i = 0; i < d; ++i) z[i] = g(rng);
        const Mat e = s.rightCols(k).colwise() - s.col(0);
        const Vec r = z - s.col(0);
        const Vec resid = r - e * e.colPivHouseholderQr().solve(r);
        CHECK(dist_via_volumes(z, s) == doctest::Approx(resid.norm()).epsilon(1e-8));
    }
    Mat flat(3, 3);
    flat << 0, 1, 2,
            0, 1, 2,
            0, 1, 2;
    CHECK_THROWS_AS(dist_via_volumes(Eigen::Vector3d(1, 0, 0), flat), DegenerateSimplex);
}

TEST_CASE("small angle check on planted rotations") {
    for (double theta : {0.01, 0.05, 0.1}) {
        const auto r = small_angle_suite(theta, 100, 4);
        CHECK(r.trials == 100);
        CHECK(r.violations == 0);
        CHECK(r.fitted_constant > 0.5);
        CHECK(r.fitted_constant < 10.0);
    }
    Eigen::Matrix<double, 3, 2> pts;
    pts << 0, 1,
           0, 0,
           0, 0;
    const AffinePlane V1{Eigen::Vector3d::Zero(), Eigen::Vector3d(1, 0, 0)};
    const double th = 0.02;
    const AffinePlane V2{Eigen::Vector3d::Zero(), Eigen::Vector3d(std::cos(th), std::sin(th), 0)};
    const auto res = small_angle_check(pts, V1, V2, 0.1);
    CHECK(res.angle == doctest::Approx(std::sin(th)));
    CHECK(res.epsilon_measured == doctest::Approx(std::tan(th)));
}

TEST_CASE("plane JSON round trip and validation") {
    std::mt19937_64 rng(8);
    const AffinePlane a{Eigen::Vector3d(1, 2, 3), orthonormal(rng, 3, 2)};
    std::stringstream s1;
    write_plane_json(a, s1);
    const Plane a2 = read_plane_json(s1);
    REQUIRE(std::holds_alternative<AffinePlane>(a2));
    CHECK((std::get<AffinePlane>(a2).basis - a.basis).norm() == 0.0);

    const HorizontalPlane h = random_isotropic(2, 2, 4, HeisPoint::origin(2));
    std::stringstream s2;
    write_plane_json(h, s2);
    const Plane h2 = read_plane_json(s2);
    REQUIRE(std::holds_alternative<HorizontalPlane>(h2));
    CHECK((std::get<HorizontalPlane>(h2).basis - h.basis).norm() == 0.0);

    std::stringstream bad(R"({"base":[0,0,0,0],"vertical":0,"basis":[[1,0,0,0],[0,0,1,0]]})");
    CHECK_THROWS_AS(read_plane_json(bad), NonIsotropicPlane);
    std::stringstream junk("{not json");
    CHECK_THROWS_AS(read_plane_json(junk), ParseError);
}

TEST_CASE("independent points certificate") {
    GeneratorSpec g;
    g.family = Family::kplane_patch;
    g.n = 3;
    g.k = 2;
    g.h = 0.01;
    const auto tree = build_tree(generate(g), 3);
    const auto& c = tree.cloud();
    for (const Cube& q : tree.cubes()) {
        if (q.members.size() < 20) continue;
        const IndependentPoints ip = independent_points(tree, q.id, 2);
        REQUIRE(ip.indices.size() == 3);
        Mat v(3, 3);
        for (int i = 0; i < 3; ++i) v.col(i) = c.points.col(ip.indices[static_cast<std::size_t>(i)]);
        CHECK(simplex_volume(v) == doctest::Approx(ip.volume).epsilon(1e-9));
        CHECK(ip.certificate == doctest::Approx(ip.volume / (q.diam * q.diam)).epsilon(1e-9));
        CHECK(ip.certificate > 0.01);
    }
    GeneratorSpec seg;
    seg.family = Family::segment;
    seg.n = 3;
    const auto t2 = build_tree(generate(seg), 2);
    CHECK_THROWS_AS(independent_points(t2, 0, 2), DegenerateCube);
}

TEST_CASE("plane embeddings preserve isotropy") {
    const HorizontalPlane V = random_isotropic(1, 1, 3, HeisPoint::origin(1));
    const HorizontalPlane W = embed_plane_iota1(V, 3);
    CHECK(W.n() == 3);
    CHECK(max_isotropy_defect(W.basis) < 1e-14);
    const AffinePlane L{Eigen::Vector2d(0.1, 0.2), Eigen::Vector2d(0.6, 0.8)};
    CHECK(embed_plane_iota2(L, 2).n() == 2);
    CHECK_THROWS_AS(embed_plane_iota2(L, 1), IsometryViolation);
}

TEST_CASE("distance from a vertical point to the horizontal axis") {
    const HorizontalPlane V{HeisPoint::origin(1), Eigen::Vector2d(1, 0)};
    const HeisPoint p{Eigen::Vector2d::Zero(), 1.0};
    const HeisPlaneDistance d = heis_dist_to_plane(p, V);
    CHECK(d.bracket_high == doctest::Approx(2.0));
    CHECK(d.inf_estimate <= 2.0);
    CHECK(d.inf_estimate >= std::pow(2.0, -1.25) * 2.0);
    CHECK(d.inf_estimate == doctest::Approx(brute_heis_line_distance(p, V)).epsilon(1e-7));
    const HeisPlaneDistance on = heis_dist_to_plane(HeisPoint{Eigen::Vector2d(0.7, 0.0), 0.0}, V);
    CHECK(on.inf_estimate == 0.0);
    CHECK(on.bracket_high == 0.0);
}

TEST_CASE("simplex volume hand values") {
    Mat tri(2, 3);
    tri << 0, 1, 0,
           0, 0, 1;
    CHECK(simplex_volume(tri) == doctest::Approx(0.5));
    Mat line(2, 3);
    line << 0, 1, 2,
            0, 1, 2;
    CHECK(simplex_volume(line) == 0.0);
    Mat s(3, 3);
    s << 0, 1, 0,
         0, 0, 1,
         0, 0, 0;
    CHECK(dist_via_volumes(Eigen::Vector3d(0, 0, 2), s) == doctest::Approx(2.0));
    CHECK(dist_via_volumes(Eigen::Vector3d(0.2, 0.3, 0), s) <= 1e-7);

    std::mt19937_64 rng(31);
    const Mat R = orthonormal(rng, 4, 4);
    Mat v = Mat::Random(4, 4);
    const Mat moved = (R * v).colwise() + Eigen::Vector4d(1, -2, 3, 0.5);
    CHECK(simplex_volume(moved) == doctest::Approx(simplex_volume(v)).epsilon(1e-10));
}

TEST_CASE("small angle edge cases") {
    Mat pts(3, 3);
    pts << 0, 1, 0,
           0, 0, 1,
           0, 0, 0;
    const Mat B = Mat::Identity(3, 2);
    const AffinePlane V{Eigen::Vector3d::Zero(), B};
    const auto same = small_angle_check(pts, V, V, 0.1);
    CHECK(same.epsilon_measured == 0.0);
    CHECK(same.angle == 0.0);
    Mat thin(3, 3);
    thin << 0, 1, 0.5,
            0, 0, 1e-3,
            0, 0, 0;
    CHECK_THROWS_AS(small_angle_check(thin, V, V, 0.3), PointsNotIndependent);
}

TEST_CASE("independent points on a segment are well separated") {
    GeneratorSpec g;
    g.family = Family::segment;
    g.h = 1e-3;
    const auto tree = build_tree(generate(g), 5);
    const auto& c = tree.cloud();
    for (const Cube& q : tree.cubes()) {
        if (q.members.size() < 2) continue;
        const auto ip = independent_points(tree, q.id, 1);
        REQUIRE(ip.indices.size() == 2);
        double spread = 0.0;
        for (Index a : q.members)
            for (Index b : q.members) spread = std::max(spread, (c.points.col(a) - c.points.col(b)).norm());
        CHECK((c.points.col(ip.indices[0]) - c.points.col(ip.indices[1])).norm() >= 0.5 * spread);
    }
}
