#include "qrect/geom.hpp"

namespace qrect {

MetricSpec MetricSpec::euclidean(int n) {
    if (n < 1) throw InvalidParameter("n", "must be >= 1");
    return {MetricKind::Euclidean, n};
}

MetricSpec MetricSpec::heisenberg(int n) {
    if (n < 1) throw InvalidParameter("n", "must be >= 1");
    return {MetricKind::Heisenberg, n};
}

std::string MetricSpec::kind_name() const {
    return is_heisenberg() ? "heisenberg" : "euclidean";
}

HeisPoint HeisPoint::origin(int n) {
    return {Vec::Zero(2 * n), 0.0};
}

HeisPoint HeisPoint::from_coords(VecRef coords) {
    if (coords.size() < 3 || coords.size() % 2 == 0)
        throw DimensionMismatch("Heisenberg point needs 2n+1 coordinates");
    const Index m = coords.size() - 1;
    return {coords.head(m), coords(m)};
}

Vec HeisPoint::coords() const {
    Vec c(x.size() + 1);
    c.head(x.size()) = x;
    c(x.size()) = t;
    return c;
}

double omega(VecRef x, VecRef y) {
    if (x.size() != y.size() || x.size() % 2 != 0)
        throw DimensionMismatch("omega expects vectors of equal even length");
    return detail::omega_raw(x.data(), y.data(), static_cast<int>(x.size() / 2));
}

HeisPoint heis_mul(const HeisPoint& p, const HeisPoint& q) {
    if (p.x.size() != q.x.size()) throw DimensionMismatch("heis_mul: dimension mismatch");
    return {p.x + q.x, p.t + q.t + omega(p.x, q.x)};
}

HeisPoint heis_inv(const HeisPoint& p) { return {-p.x, -p.t}; }

HeisPoint dilate(const HeisPoint& p, double lambda) {
    return {lambda * p.x, lambda * lambda * p.t};
}

double koranyi_norm(VecRef x, double t) {
    const double scale = std::max(x.cwiseAbs().maxCoeff(), std::sqrt(std::abs(t)));
    if (!(scale > 1e100)) return detail::quartic_root_sum(x.squaredNorm(), 4.0 * std::abs(t));
    return scale * detail::quartic_root_sum((x / scale).squaredNorm(), 4.0 * std::abs(t) / scale / scale);
}

double koranyi_dist(const HeisPoint& p, const HeisPoint& q) {
    if (p.x.size() != q.x.size() || p.x.size() % 2 != 0)
        throw DimensionMismatch("koranyi_dist: dimension mismatch");
    const Vec dx = q.x - p.x;
    const double dt = q.t - p.t - omega(p.x, q.x);
    return koranyi_norm(dx, dt);
}

double dist(const MetricSpec& m, VecRef p, VecRef q) {
    if (p.size() != m.dim() || q.size() != m.dim())
        throw DimensionMismatch("dist: coordinates do not match metric");
    return Metric(m)(p.data(), q.data());
}

}  // namespace qrect
