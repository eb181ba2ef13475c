#include <cmath>
#include <json.hpp>
#include <random>

#include "qrect/coefficients.hpp"
#include "qrect/util.hpp"

namespace qrect {

namespace {

WeightedPointCloud random_near_plane(std::mt19937_64& rng, const Plane& V, int m, double spread) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    WeightedPointCloud c;
    c.h = 1e-12;
    c.weights.resize(m);
    if (const auto* a = std::get_if<AffinePlane>(&V)) {
        c.metric = MetricSpec::euclidean(a->ambient());
        c.points.resize(a->ambient(), m);
        for (int i = 0; i < m; ++i) {
            Vec on = a->base + a->basis * Vec::NullaryExpr(a->k(), [&] { return U(rng); });
            c.points.col(i) = on + spread * Vec::NullaryExpr(a->ambient(), [&] { return U(rng); });
        }
    } else {
        const auto& h = std::get<HorizontalPlane>(V);
        const int n = h.n();
        c.metric = MetricSpec::heisenberg(n);
        c.points.resize(2 * n + 1, m);
        for (int i = 0; i < m; ++i) {
            const HeisPoint on = heis_mul(h.base, HeisPoint{h.basis * Vec::NullaryExpr(h.k(), [&] { return U(rng); }), 0.0});
            const HeisPoint off{spread * Vec::NullaryExpr(2 * n, [&] { return U(rng); }), spread * spread * U(rng)};
            c.points.col(i) = heis_mul(on, off).coords();
        }
    }
    for (int i = 0; i < m; ++i) c.weights(i) = 1.0 + 0.9 * U(rng);
    return c;
}

Plane random_plane_for(std::mt19937_64& rng, bool heis) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    if (heis) {
        const int n = 1 + static_cast<int>(rng() % 2);
        const int k = 1 + static_cast<int>(rng() % static_cast<unsigned>(n));
        return random_isotropic(n, k, rng(), HeisPoint{Vec::NullaryExpr(2 * n, [&] { return U(rng); }), U(rng)});
    }
    const int d = 2 + static_cast<int>(rng() % 3);
    const int k = 1 + static_cast<int>(rng() % static_cast<unsigned>(d - 1));
    Eigen::HouseholderQR<Mat> qr(gaussian_matrix(rng, d, k));
    AffinePlane a;
    a.base = Vec::NullaryExpr(d, [&] { return U(rng); });
    a.basis = qr.householderQ() * Mat::Identity(d, k);
    return a;
}

}  // namespace

VerificationReport iota_beta_check(std::size_t trials, std::uint64_t seed, double rel_tol) {
    VerificationReport rep;
    rep.name = "iota_beta";
    rep.tolerance = rel_tol;
    nlohmann::json worst = nlohmann::json::object();
    const double exponents[] = {1.0, 1.5, 2.0, 3.0};
    for (std::size_t t = 0; t < trials; ++t) {
        std::mt19937_64 rng(derive_seed(seed, t));
        const bool heis = t % 2 == 1;
        const Plane V = random_plane_for(rng, heis);
        const int m = 3 + static_cast<int>(rng() % 48);
        const double spread = std::pow(10.0, -3.0 + 3.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng));
        const WeightedPointCloud cloud = random_near_plane(rng, V, m, spread);
        const double p = exponents[rng() % 4];
        const PointSubset S = PointSubset::all(cloud);
        ++rep.trials;
        const double beta = beta_p_V(S, V, p);
        const double iota = iota_p_V(S, V, p, 0).value;
        const double ratio = beta > 0.0 ? iota / beta : (iota > 0.0 ? INFINITY : 0.0);
        if (iota > 2.0 * beta * (1.0 + rel_tol)) ++rep.violations;
        if (ratio > rep.fitted_constant || worst.empty()) {
            rep.fitted_constant = std::max(rep.fitted_constant, ratio);
            worst = {{"trial", t}, {"metric", cloud.metric.kind_name()}, {"n", cloud.metric.n}, {"points", m},
                     {"p", p}, {"beta", beta}, {"iota", iota}, {"ratio", ratio}};
        }
    }
    rep.worst_case = worst.dump();
    return rep;
}

EmbeddingReport embedding_check(std::size_t sets, std::uint64_t seed, int n, int starts) {
    if (n < 2) throw InvalidParameter("n", "embedding target needs n >= 2");
    EmbeddingReport rep;
    rep.heis_line.report.name = "embedding_heis_line";
    rep.planar_line.report.name = "embedding_planar_line";
    const double tol = 1e-12;
    rep.heis_line.report.tolerance = tol;
    rep.planar_line.report.tolerance = tol;
    nlohmann::json worst1 = nlohmann::json::object(), worst2 = nlohmann::json::object();

    auto record = [&](EmbeddingComparison& cmp, nlohmann::json& worst, std::size_t t, double src, double tgt) {
        ++cmp.report.trials;
        if (tgt > src * (1.0 + tol)) ++cmp.report.violations;
        const double up = tgt > 0.0 ? src / tgt : (src > 0.0 ? INFINITY : 1.0);
        const double down = src > 0.0 ? tgt / src : (tgt > 0.0 ? INFINITY : 1.0);
        cmp.target_over_source = std::max(cmp.target_over_source, down);
        if (up > cmp.source_over_target || worst.empty()) {
            cmp.source_over_target = std::max(cmp.source_over_target, up);
            worst = {{"set", t}, {"source", src}, {"target", tgt}};
        }
        cmp.report.fitted_constant = cmp.source_over_target;
    };

    for (std::size_t t = 0; t < sets; ++t) {
        std::mt19937_64 rng(derive_seed(seed, t));
        std::uniform_real_distribution<double> U(-1.0, 1.0);
        const int m = 4 + static_cast<int>(rng() % 21);
        const double spread = std::pow(10.0, -3.0 + 3.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng));
        const std::uint64_t sub = derive_seed(seed, t + sets);

        const Plane L = random_isotropic(1, 1, rng(), HeisPoint{Vec::NullaryExpr(2, [&] { return U(rng); }), U(rng)});
        const WeightedPointCloud h1 = random_near_plane(rng, L, m, spread);
        const PointSubset S1 = PointSubset::all(h1);
        const CoefficientRecord src1 = beta_inf(S1, 1, starts, sub);
        const WeightedPointCloud e1 = embed_iota1(h1, n);
        const std::vector<Plane> init1{embed_plane_iota1(std::get<HorizontalPlane>(*src1.plane), n)};
        const CoefficientRecord tgt1 = beta_inf(PointSubset::all(e1), 1, starts, sub, init1);
        record(rep.heis_line, worst1, t, src1.value, tgt1.value);

        AffinePlane line;
        line.base = Vec::NullaryExpr(2, [&] { return U(rng); });
        line.basis = Vec::NullaryExpr(2, [&] { return U(rng); }).normalized();
        const WeightedPointCloud r2 = random_near_plane(rng, line, m, spread);
        const PointSubset S2 = PointSubset::all(r2);
        const CoefficientRecord src2 = beta_inf(S2, 1, starts, sub);
        const WeightedPointCloud e2 = embed_iota2(r2, n);
        const std::vector<Plane> init2{embed_plane_iota2(std::get<AffinePlane>(*src2.plane), n)};
        const CoefficientRecord tgt2 = beta_inf(PointSubset::all(e2), 1, starts, sub, init2);
        record(rep.planar_line, worst2, t, src2.value, tgt2.value);
    }
    rep.heis_line.report.worst_case = worst1.dump();
    rep.planar_line.report.worst_case = worst2.dump();
    return rep;
}

}  // namespace qrect
