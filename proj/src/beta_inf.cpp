#include <algorithm>
#include <array>
#include <cmath>

#include "coefficient_detail.hpp"
#include "qrect/coefficients.hpp"
#include "qrect/util.hpp"

namespace qrect {

using namespace detail;

namespace {

using P2 = std::array<double, 2>;

double cross(const P2& o, const P2& a, const P2& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

std::vector<P2> convex_hull(std::vector<P2> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;
    std::vector<P2> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

// Mid-line of the thinnest strip containing the planar set.
AffinePlane thinnest_strip(const PointSubset& S) {
    std::vector<P2> pts;
    pts.reserve(static_cast<std::size_t>(S.size()));
    for (Index i = 0; i < S.size(); ++i) pts.push_back({S.point(i)[0], S.point(i)[1]});
    const auto hull = convex_hull(std::move(pts));
    AffinePlane best;
    best.basis = Mat(2, 1);
    if (hull.size() < 3) {
        const P2 a = hull.front(), b = hull.back();
        Vec u(2);
        u << b[0] - a[0], b[1] - a[1];
        best.base = Vec(2);
        best.base << a[0], a[1];
        best.basis.col(0) = u / u.norm();
        return best;
    }
    double width = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < hull.size(); ++e) {
        const P2& a = hull[e];
        const P2& b = hull[(e + 1) % hull.size()];
        Vec u(2);
        u << b[0] - a[0], b[1] - a[1];
        u.normalize();
        Vec nrm(2);
        nrm << -u(1), u(0);
        double far = 0.0;
        for (const auto& q : hull) far = std::max(far, std::abs(nrm(0) * (q[0] - a[0]) + nrm(1) * (q[1] - a[1])));
        if (far < width) {
            width = far;
            double side = 0.0;
            for (const auto& q : hull) side += nrm(0) * (q[0] - a[0]) + nrm(1) * (q[1] - a[1]);
            Vec base(2);
            base << a[0], a[1];
            best.base = base + (side >= 0.0 ? 0.5 : -0.5) * far * nrm;
            best.basis.col(0) = u;
        }
    }
    return best;
}

}  // namespace

CoefficientRecord beta_inf(const PointSubset& S, int k, int starts, std::uint64_t seed, std::span<const Plane> initial) {
    const MetricSpec& m = S.cloud().metric;
    if (k < 1 || k > (m.is_heisenberg() ? m.n : m.dim() - 1)) throw InvalidParameter("k", "plane dimension out of range");
    S.require_usable(k + 1);
    CoefficientRecord rec;
    rec.kind = CoefficientKind::beta_inf;
    rec.p = std::numeric_limits<double>::infinity();
    rec.diam_exact = S.diam().exact;

    if (!m.is_heisenberg() && m.n == 2 && k == 1) {
        const Plane V = thinnest_strip(S);
        rec.plane = V;
        rec.value = std::min(beta_inf_V(S, V), 1.0);
        rec.optimizer = "convex_hull_width";
        for (const Plane& W : initial) {
            const double v = beta_inf_V(S, W);
            if (v < rec.value) {
                rec.value = v;
                rec.plane = W;
            }
        }
        return rec;
    }

    std::vector<Plane> candidates(initial.begin(), initial.end());
    candidates.push_back(initial_plane(S, k));
    for (int s = 1; s < starts; ++s)
        candidates.push_back(random_plane(S, k, derive_seed(seed, static_cast<std::uint64_t>(s))));
    const auto res = search_plane(S, candidates, [&](const Plane& V) { return beta_inf_V(S, V); }, 4);
    rec.value = std::min(res.value, 1.0);
    rec.plane = res.plane;
    rec.upper_bound = true;
    rec.optimizer = "multistart_nelder_mead";
    return rec;
}

}  // namespace qrect
