#include "qrect/spatial_grid.hpp"

#include <algorithm>
#include <numeric>

namespace qrect {

SpatialGrid::SpatialGrid(const WeightedPointCloud& cloud, double cell) {
    std::vector<Index> all(cloud.size());
    std::iota(all.begin(), all.end(), Index{0});
    build(cloud, all, cell);
}

SpatialGrid::SpatialGrid(const WeightedPointCloud& cloud, std::span<const Index> subset, double cell) {
    build(cloud, subset, cell);
}

void SpatialGrid::build(const WeightedPointCloud& cloud, std::span<const Index> subset, double cell) {
    cloud_ = &cloud;
    axes_ = std::min(3, cloud.metric.horizontal_dim());
    const Index dim = cloud.points.rows();
    std::array<double, 3> lo{}, hi{};
    lo.fill(std::numeric_limits<double>::infinity());
    hi.fill(-std::numeric_limits<double>::infinity());
    for (Index i : subset)
        for (int a = 0; a < axes_; ++a) {
            lo[a] = std::min(lo[a], cloud.points(a, i));
            hi[a] = std::max(hi[a], cloud.points(a, i));
        }
    double extent = 0.0;
    for (int a = 0; a < axes_; ++a) extent = std::max(extent, hi[a] - lo[a]);
    cell_ = std::max(cell, extent / double(1 << 19));
    if (!(cell_ > 0.0)) cell_ = 1.0;
    origin_ = lo;
    if (subset.empty()) return;

    std::vector<std::pair<Key, Index>> keyed;
    keyed.reserve(subset.size());
    for (Index i : subset) keyed.emplace_back(key_of(cell_of(cloud.points.data() + i * dim)), i);
    std::sort(keyed.begin(), keyed.end());
    order_.resize(keyed.size());
    for (std::size_t i = 0; i < keyed.size(); ++i) {
        order_[i] = keyed[i].second;
        auto& b = buckets_[keyed[i].first];
        if (i == 0 || keyed[i - 1].first != keyed[i].first) b.begin = static_cast<std::uint32_t>(i);
        b.end = static_cast<std::uint32_t>(i + 1);
    }
}

std::array<std::int64_t, 3> SpatialGrid::cell_of(const double* q) const {
    std::array<std::int64_t, 3> c{};
    for (int a = 0; a < axes_; ++a)
        c[a] = static_cast<std::int64_t>(std::floor((q[a] - origin_[a]) / cell_));
    return c;
}

SpatialGrid::Key SpatialGrid::key_of(const std::array<std::int64_t, 3>& c) const {
    Key k = 0;
    for (int a = 0; a < 3; ++a) k = (k << 21) | ((c[a] + (1 << 20)) & ((1 << 21) - 1));
    return k;
}

void SpatialGrid::radius_query(const double* q, double r, std::vector<Index>& out) const {
    if (order_.empty()) return;
    const Metric d(cloud_->metric);
    const Index dim = cloud_->points.rows();
    std::array<std::int64_t, 3> lo{}, hi{};
    for (int a = 0; a < axes_; ++a) {
        lo[a] = static_cast<std::int64_t>(std::floor((q[a] - r - origin_[a]) / cell_));
        hi[a] = static_cast<std::int64_t>(std::floor((q[a] + r - origin_[a]) / cell_));
    }
    visit_box(lo, hi, [&](const Bucket& b) {
        for (auto i = b.begin; i < b.end; ++i) {
            const Index idx = order_[i];
            if (d(q, cloud_->points.data() + idx * dim) <= r) out.push_back(idx);
        }
    });
}

bool SpatialGrid::any_within(const double* q, double r) const {
    if (order_.empty()) return false;
    const Metric d(cloud_->metric);
    const Index dim = cloud_->points.rows();
    std::array<std::int64_t, 3> lo{}, hi{};
    for (int a = 0; a < axes_; ++a) {
        lo[a] = static_cast<std::int64_t>(std::floor((q[a] - r - origin_[a]) / cell_));
        hi[a] = static_cast<std::int64_t>(std::floor((q[a] + r - origin_[a]) / cell_));
    }
    bool found = false;
    visit_box(lo, hi, [&](const Bucket& b) {
        for (auto i = b.begin; i < b.end && !found; ++i)
            if (d(q, cloud_->points.data() + order_[i] * dim) <= r) found = true;
    });
    return found;
}

}  // namespace qrect
