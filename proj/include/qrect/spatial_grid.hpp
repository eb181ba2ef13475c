#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <unordered_map>
#include <vector>

#include "qrect/pointset.hpp"

namespace qrect {

// Uniform bucket grid over the first (at most three) horizontal coordinates.
// Both metrics dominate the difference of any single horizontal coordinate,
// so cell distances give valid lower bounds for exact metric checks.
class SpatialGrid {
public:
    SpatialGrid() = default;
    SpatialGrid(const WeightedPointCloud& cloud, double cell);
    SpatialGrid(const WeightedPointCloud& cloud, std::span<const Index> subset, double cell);

    // Appends every indexed point within distance r of q (inclusive).
    void radius_query(const double* q, double r, std::vector<Index>& out) const;
    bool any_within(const double* q, double r) const;
    // Distance to the nearest indexed point satisfying keep(index); +inf if none.
    template <class Keep>
    double nearest(const double* q, Keep&& keep) const;

    double cell() const noexcept { return cell_; }
    std::size_t size() const noexcept { return order_.size(); }

private:
    struct Bucket {
        std::uint32_t begin = 0;
        std::uint32_t end = 0;
    };
    using Key = std::int64_t;

    void build(const WeightedPointCloud& cloud, std::span<const Index> subset, double cell);
    std::array<std::int64_t, 3> cell_of(const double* q) const;
    Key key_of(const std::array<std::int64_t, 3>& c) const;
    template <class Visit>
    void visit_box(const std::array<std::int64_t, 3>& lo, const std::array<std::int64_t, 3>& hi, Visit&& v) const;

    const WeightedPointCloud* cloud_ = nullptr;
    int axes_ = 0;
    double cell_ = 1.0;
    std::array<double, 3> origin_{};
    std::vector<Index> order_;
    std::unordered_map<Key, Bucket> buckets_;
};

template <class Visit>
void SpatialGrid::visit_box(const std::array<std::int64_t, 3>& lo, const std::array<std::int64_t, 3>& hi,
                            Visit&& v) const {
    double box = 1.0;
    for (int a = 0; a < axes_; ++a) box *= static_cast<double>(hi[a] - lo[a] + 1);
    if (box > static_cast<double>(buckets_.size())) {
        for (const auto& [key, b] : buckets_) {
            const Index first = order_[b.begin];
            const auto c = cell_of(cloud_->points.data() + first * cloud_->points.rows());
            bool inside = true;
            for (int a = 0; a < axes_; ++a) inside = inside && c[a] >= lo[a] && c[a] <= hi[a];
            if (inside) v(b);
        }
        return;
    }
    std::array<std::int64_t, 3> c = lo;
    for (;;) {
        auto it = buckets_.find(key_of(c));
        if (it != buckets_.end()) v(it->second);
        int a = 0;
        for (; a < axes_; ++a) {
            if (++c[a] <= hi[a]) break;
            c[a] = lo[a];
        }
        if (a == axes_) break;
    }
}

template <class Keep>
double SpatialGrid::nearest(const double* q, Keep&& keep) const {
    const Metric d(cloud_->metric);
    const Index dim = cloud_->points.rows();
    const auto center = cell_of(q);
    double best = std::numeric_limits<double>::infinity();
    auto scan = [&](const Bucket& b) {
        for (auto i = b.begin; i < b.end; ++i) {
            const Index idx = order_[i];
            if (!keep(idx)) continue;
            best = std::min(best, d(q, cloud_->points.data() + idx * dim));
        }
    };
    for (std::int64_t ring = 0;; ++ring) {
        std::array<std::int64_t, 3> lo{}, hi{};
        for (int a = 0; a < axes_; ++a) {
            lo[a] = center[a] - ring;
            hi[a] = center[a] + ring;
        }
        double shell = std::pow(2.0 * ring + 1.0, axes_);
        if (shell > 4.0 * static_cast<double>(buckets_.size())) {
            best = std::numeric_limits<double>::infinity();
            for (const auto& [key, b] : buckets_) scan(b);
            return best;
        }
        visit_box(lo, hi, [&](const Bucket& b) {
            const Index first = order_[b.begin];
            const auto c = cell_of(cloud_->points.data() + first * dim);
            std::int64_t cheb = 0;
            for (int a = 0; a < axes_; ++a) cheb = std::max(cheb, std::abs(c[a] - center[a]));
            if (cheb == ring) scan(b);
        });
        if (best <= static_cast<double>(ring) * cell_) return best;
    }
}

}  // namespace qrect
