#include <cmath>

#include "coefficient_detail.hpp"
#include "plane_param.hpp"
#include "qrect/coefficients.hpp"

namespace qrect {

using namespace detail;

namespace {

double map_objective(const PairList& pairs, const Mat& F, double p) {
    double sum = 0.0;
    for (std::size_t s = 0; s < pairs.a.size(); ++s) {
        const double r = pairs.d[s] - (F.col(pairs.a[s]) - F.col(pairs.b[s])).norm();
        sum += pairs.w[s] * std::pow(std::abs(r), p);
    }
    return sum;
}

}  // namespace

CoefficientRecord iota_map_eucl(const PointSubset& S, int k, double p, int iters, std::uint64_t seed,
                                std::uint64_t pair_budget) {
    if (S.cloud().metric.is_heisenberg()) throw MetricUnsupported("iota_map_eucl needs a Euclidean cloud");
    if (iters < 0) throw InvalidParameter("iters", "must be >= 0");
    CoefficientRecord rec = iota_p(S, k, p, 2, seed, pair_budget);
    const PairList pairs = make_pairs(S, pair_budget, seed);
    const double diam = S.diam().value;
    const Index m = S.size();
    const Mat& frame = plane_frame(*rec.plane);
    Mat F = frame.transpose() * horizontal_coords(S) / diam;
    double value = map_objective(pairs, F, p);
    const double floor = 1e-9;

    Mat num(F.rows(), m);
    Vec den(m);
    for (int it = 0; it < iters; ++it) {
        num.setZero();
        den.setZero();
        for (std::size_t s = 0; s < pairs.a.size(); ++s) {
            const Index a = pairs.a[s], b = pairs.b[s];
            if (a == b) continue;
            const Vec diff = F.col(a) - F.col(b);
            const double len = diff.norm();
            const double r = std::abs(pairs.d[s] - len);
            const double v = pairs.w[s] * (p == 2.0 ? 1.0 : std::pow(std::max(r, floor), p - 2.0));
            const Vec target = len > 0.0 ? Vec(pairs.d[s] * diff / len) : Vec::Zero(F.rows());
            num.col(a) += v * (F.col(b) + target);
            num.col(b) += v * (F.col(a) - target);
            den(a) += v;
            den(b) += v;
        }
        Mat proposal = F;
        for (Index i = 0; i < m; ++i)
            if (den(i) > 0.0) proposal.col(i) = num.col(i) / den(i);
        bool accepted = false;
        for (double alpha = 1.0; alpha >= 1.0 / 64.0; alpha *= 0.5) {
            const Mat trial = F + alpha * (proposal - F);
            const double v = map_objective(pairs, trial, p);
            if (v < value) {
                F = trial;
                value = v;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    const double mapped = std::min(std::pow(value, 1.0 / p), 1.0);
    if (mapped < rec.value) rec.value = mapped;
    rec.kind = CoefficientKind::iota_map;
    rec.upper_bound = true;
    rec.optimizer = "stress_majorization";
    return rec;
}

}  // namespace qrect
