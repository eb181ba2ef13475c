#include "qrect/pointset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "qrect/util.hpp"

namespace qrect {

void WeightedPointCloud::validate() const {
    if (points.rows() != metric.dim())
        throw DimensionMismatch("cloud coordinates do not match the metric dimension");
    if (size() < 2) throw InvalidParameter("points", "at least two points are required");
    if (weights.size() != size()) throw DimensionMismatch("one weight per point is required");
    if (!(weights.array() > 0.0).all()) throw InvalidParameter("weights", "must be positive");
    if (!points.allFinite() || !weights.allFinite())
        throw InvalidParameter("points", "non-finite value");
    if (!(s > 0.0)) throw InvalidParameter("s", "must be positive");
    if (!(h > 0.0)) throw InvalidParameter("h", "must be positive");
    if (!(h < diameter(*this).value)) throw InvalidParameter("h", "must be below the diameter");
}

namespace {

Diameter diameter_impl(const WeightedPointCloud& cloud, std::span<const Index> idx) {
    const Metric d(cloud.metric);
    const Index m = static_cast<Index>(idx.size());
    const double* base = cloud.points.data();
    const Index dim = cloud.points.rows();
    auto at = [&](Index i) { return base + idx[i] * dim; };
    if (m < 2) return {0.0, true};
    if (m <= kExactDiameterLimit) {
        double best = 0.0;
        for (Index i = 0; i < m; ++i)
            for (Index j = i + 1; j < m; ++j) best = std::max(best, d(at(i), at(j)));
        return {best, true};
    }
    double best = 0.0;
    Index from = 0;
    for (int round = 0; round < 4; ++round) {
        Index far = from;
        double far_d = -1.0;
        for (Index i = 0; i < m; ++i) {
            const double v = d(at(from), at(i));
            if (v > far_d) {
                far_d = v;
                far = i;
            }
        }
        best = std::max(best, far_d);
        from = far;
    }
    return {best, false};
}

}  // namespace

Diameter diameter(const WeightedPointCloud& cloud) {
    std::vector<Index> all(cloud.size());
    std::iota(all.begin(), all.end(), Index{0});
    return diameter_impl(cloud, all);
}

Diameter diameter(const WeightedPointCloud& cloud, std::span<const Index> subset) {
    return diameter_impl(cloud, subset);
}

WeightedPointCloud rescaled(const WeightedPointCloud& cloud, double factor) {
    if (!(factor > 0.0)) throw InvalidParameter("factor", "must be positive");
    WeightedPointCloud out = cloud;
    if (cloud.metric.is_heisenberg()) {
        const Index m = cloud.metric.horizontal_dim();
        out.points.topRows(m) *= factor;
        out.points.row(m) *= factor * factor;
    } else {
        out.points *= factor;
    }
    out.weights *= std::pow(factor, cloud.s);
    out.h *= factor;
    return out;
}

WeightedPointCloud subset_cloud(const WeightedPointCloud& cloud, std::span<const Index> subset) {
    WeightedPointCloud out;
    out.metric = cloud.metric;
    out.s = cloud.s;
    out.h = cloud.h;
    out.weight_convention = cloud.weight_convention;
    out.points.resize(cloud.points.rows(), static_cast<Index>(subset.size()));
    out.weights.resize(static_cast<Index>(subset.size()));
    for (std::size_t i = 0; i < subset.size(); ++i) {
        out.points.col(static_cast<Index>(i)) = cloud.points.col(subset[i]);
        out.weights(static_cast<Index>(i)) = cloud.weights(subset[i]);
    }
    return out;
}

RegularityReport estimate_regularity(const WeightedPointCloud& cloud, int trials, std::uint64_t seed,
                                     double spread_bound, double r_min) {
    if (trials < 1) throw InvalidParameter("trials", "must be >= 1");
    if (r_min > 0.0 && r_min < 10.0 * cloud.h)
        throw ScaleBelowResolution("requested radius below 10h");
    const double diam = diameter(cloud).value;
    const double lo = std::max(10.0 * cloud.h, r_min);
    const double hi = diam / 2.0;
    if (!(lo < hi)) throw ScaleBelowResolution("no radius between 10h and diam/2");

    std::mt19937_64 rng(seed);
    std::discrete_distribution<Index> pick(cloud.weights.data(), cloud.weights.data() + cloud.size());
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    const Metric d(cloud.metric);
    const Index dim = cloud.points.rows();
    const double* base = cloud.points.data();

    RegularityReport rep;
    rep.C_lower = std::numeric_limits<double>::infinity();
    rep.r_min = lo;
    rep.r_max = hi;
    for (int t = 0; t < trials; ++t) {
        const Index x = pick(rng);
        const double r = std::exp(u(rng));
        double mass = 0.0;
        for (Index i = 0; i < cloud.size(); ++i)
            if (d(base + x * dim, base + i * dim) <= r) mass += cloud.weights(i);
        const double ratio = mass / std::pow(r, cloud.s);
        rep.C_lower = std::min(rep.C_lower, ratio);
        rep.C_upper = std::max(rep.C_upper, ratio);
        ++rep.samples;
    }
    rep.spread = rep.C_upper / rep.C_lower;
    rep.flagged = !(rep.spread <= spread_bound);
    return rep;
}

WeightedPointCloud embed_iota1(const WeightedPointCloud& cloud, int n) {
    if (!cloud.metric.is_heisenberg() || cloud.metric.n != 1)
        throw DimensionMismatch("embed_iota1 expects a cloud in the first Heisenberg group");
    if (n < 2) throw DimensionMismatch("embed_iota1 target must have n > 1");
    WeightedPointCloud out = cloud;
    out.metric = MetricSpec::heisenberg(n);
    out.points = Mat::Zero(2 * n + 1, cloud.size());
    out.points.row(0) = cloud.points.row(0);
    out.points.row(n) = cloud.points.row(1);
    out.points.row(2 * n) = cloud.points.row(2);
    return out;
}

WeightedPointCloud embed_iota2(const WeightedPointCloud& cloud, int n) {
    if (cloud.metric != MetricSpec::euclidean(2))
        throw DimensionMismatch("embed_iota2 expects a planar Euclidean cloud");
    if (n < 2) throw IsometryViolation("the coordinate plane is not isotropic for n = 1");
    WeightedPointCloud out = cloud;
    out.metric = MetricSpec::heisenberg(n);
    out.points = Mat::Zero(2 * n + 1, cloud.size());
    out.points.topRows(2) = cloud.points;
    return out;
}

}  // namespace qrect
