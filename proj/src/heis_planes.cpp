#include <cmath>
#include <complex>
#include <random>

#include "qrect/planes.hpp"
#include "qrect/util.hpp"

namespace qrect {

namespace {

Vec complex_structure(VecRef v) {
    const Index n = v.size() / 2;
    Vec j(v.size());
    j.head(n) = -v.tail(n);
    j.tail(n) = v.head(n);
    return j;
}

}  // namespace

double max_isotropy_defect(MatRef frame) {
    double worst = 0.0;
    for (Index i = 0; i < frame.cols(); ++i)
        for (Index j = i + 1; j < frame.cols(); ++j)
            worst = std::max(worst, std::abs(omega(frame.col(i), frame.col(j))));
    return worst;
}

void HorizontalPlane::validate() const {
    if (base.x.size() < 2 || base.x.size() % 2 != 0)
        throw DimensionMismatch("horizontal plane base needs an even horizontal part");
    if (basis.rows() != base.x.size()) throw DimensionMismatch("basis does not match the base point");
    if (k() < 1 || k() > n()) throw InvalidParameter("k", "must satisfy 1 <= k <= n");
    const Mat g = basis.transpose() * basis;
    if ((g - Mat::Identity(k(), k())).cwiseAbs().maxCoeff() > 1e-10)
        throw InvalidParameter("basis", "not orthonormal");
    if (max_isotropy_defect(basis) > 1e-10) throw NonIsotropicPlane("direction subspace is not isotropic");
}

Mat random_isotropic_frame(int n, int k, std::uint64_t seed) {
    if (n < 1) throw InvalidParameter("n", "must be >= 1");
    if (k < 1 || k > n) throw InvalidParameter("k", "must satisfy 1 <= k <= n");
    std::mt19937_64 rng(seed);
    const Mat re = gaussian_matrix(rng, n, n);
    const Mat im = gaussian_matrix(rng, n, n);
    Eigen::MatrixXcd z(n, n);
    z.real() = re;
    z.imag() = im;
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
    const Eigen::MatrixXcd u = qr.householderQ() * Eigen::MatrixXcd::Identity(n, n);
    Mat frame(2 * n, k);
    for (int j = 0; j < k; ++j) {
        frame.col(j).head(n) = u.col(j).real();
        frame.col(j).tail(n) = u.col(j).imag();
    }
    return frame;
}

HorizontalPlane random_isotropic(int n, int k, std::uint64_t seed, const HeisPoint& base) {
    if (base.x.size() != 2 * n) throw DimensionMismatch("base point does not match n");
    return {base, random_isotropic_frame(n, k, seed)};
}

Mat isotropize(MatRef frame, double tol) {
    std::vector<Vec> out;
    std::vector<Vec> taken;  // u_i and J u_i
    for (Index c = 0; c < frame.cols(); ++c) {
        Vec v = frame.col(c);
        const double scale = v.norm();
        if (!(scale > 0.0)) continue;
        for (int pass = 0; pass < 2; ++pass)
            for (const Vec& t : taken) v -= t.dot(v) * t;
        if (v.norm() <= tol * scale) continue;
        v.normalize();
        taken.push_back(v);
        taken.push_back(complex_structure(v));
        out.push_back(v);
    }
    Mat m(frame.rows(), static_cast<Index>(out.size()));
    for (std::size_t i = 0; i < out.size(); ++i) m.col(static_cast<Index>(i)) = out[i];
    return m;
}

HeisPoint horiz_project(const HorizontalPlane& V, const HeisPoint& p) {
    if (p.x.size() != V.base.x.size()) throw DimensionMismatch("horiz_project: dimension mismatch");
    if (max_isotropy_defect(V.basis) > 1e-10) throw NonIsotropicPlane("direction subspace is not isotropic");
    const Vec v = V.basis * (V.basis.transpose() * (p.x - V.base.x));
    return {V.base.x + v, V.base.t + omega(V.base.x, v)};
}

HorizontalPlane embed_plane_iota1(const HorizontalPlane& V, int n) {
    if (V.n() != 1) throw DimensionMismatch("embed_plane_iota1 expects a plane in the first Heisenberg group");
    if (n < 2) throw DimensionMismatch("embed_plane_iota1 target must have n > 1");
    HorizontalPlane out;
    out.base.x = Vec::Zero(2 * n);
    out.base.x(0) = V.base.x(0);
    out.base.x(n) = V.base.x(1);
    out.base.t = V.base.t;
    out.basis = Mat::Zero(2 * n, V.k());
    out.basis.row(0) = V.basis.row(0);
    out.basis.row(n) = V.basis.row(1);
    return out;
}

HorizontalPlane embed_plane_iota2(const AffinePlane& V, int n) {
    if (V.ambient() != 2) throw DimensionMismatch("embed_plane_iota2 expects a planar line");
    if (n < 2) throw IsometryViolation("the coordinate plane is not isotropic for n = 1");
    HorizontalPlane out;
    out.base.x = Vec::Zero(2 * n);
    out.base.x.head(2) = V.base;
    out.basis = Mat::Zero(2 * n, V.k());
    out.basis.topRows(2) = V.basis;
    return out;
}

double heis_plane_distance(const double* p, const HorizontalPlane& V) {
    const int n = V.n();
    const Eigen::Map<const Vec> px(p, 2 * n);
    const double pt = p[2 * n];
    const Vec& q = V.base.x;
    const Vec r = q - px;
    const Vec coef = V.basis.transpose() * r;
    const Vec r_par = V.basis * coef;
    const Vec r_perp = r - r_par;
    const double rho2 = r_perp.squaredNorm();
    const double tau = V.base.t - pt - detail::omega_raw(px.data(), q.data(), n) -
                       detail::omega_raw(r_perp.data(), r_par.data(), n);
    double g2 = 0.0;
    for (Index i = 0; i < V.basis.cols(); ++i) {
        const double gi = detail::omega_raw(r_perp.data(), V.basis.col(i).data(), n);
        g2 += gi * gi;
    }
    const double g = std::sqrt(g2);
    const double a = std::abs(tau);
    double s = 0.0;
    if (g > 0.0 && a > 0.0) {
        // Root of s^3 + (rho2 + 8 g^2) s - 8 g a, approached from above.
        const double lin = rho2 + 8.0 * g2;
        const double rhs = 8.0 * g * a;
        s = std::min({a / g, std::cbrt(rhs), rhs / lin});
        for (int it = 0; it < 100; ++it) {
            const double f = s * s * s + lin * s - rhs;
            const double next = s - f / (3.0 * s * s + lin);
            if (!(next < s) || next < 0.0) break;
            s = next;
        }
    }
    return detail::quartic_root_sum(rho2 + s * s, 4.0 * std::max(a - g * s, 0.0));
}

HeisPlaneDistance heis_dist_to_plane(const HeisPoint& p, const HorizontalPlane& V) {
    if (p.x.size() != V.base.x.size()) throw DimensionMismatch("heis_dist_to_plane: dimension mismatch");
    if (max_isotropy_defect(V.basis) > 1e-10) throw NonIsotropicPlane("direction subspace is not isotropic");
    HeisPlaneDistance out;
    out.bracket_high = koranyi_dist(p, horiz_project(V, p));
    out.bracket_low = std::pow(2.0, -1.25) * out.bracket_high;
    const Vec c = p.coords();
    out.inf_estimate = std::min(heis_plane_distance(c.data(), V), out.bracket_high);
    return out;
}

}  // namespace qrect
