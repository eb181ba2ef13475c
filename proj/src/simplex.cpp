#include <cmath>
#include <limits>

#include "qrect/planes.hpp"

namespace qrect {

namespace {

using LMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

// Gram determinant of the edge vectors from the first vertex; equals the
// Cayley-Menger determinant up to the factor (-1)^{d+1} 2^d.
long double gram_determinant(MatRef v) {
    const Index d = v.cols() - 1;
    if (d <= 0) return 1.0L;
    LMat e(v.rows(), d);
    for (Index j = 0; j < d; ++j)
        for (Index i = 0; i < v.rows(); ++i)
            e(i, j) = static_cast<long double>(v(i, j + 1)) - static_cast<long double>(v(i, 0));
    const LMat g = e.transpose() * e;
    return Eigen::PartialPivLU<LMat>(g).determinant();
}

long double factorial(Index d) {
    long double f = 1.0L;
    for (Index i = 2; i <= d; ++i) f *= static_cast<long double>(i);
    return f;
}

long double volume_l(MatRef v) {
    const long double det = gram_determinant(v);
    return std::sqrt(std::max(det, 0.0L)) / factorial(v.cols() - 1);
}

}  // namespace

double simplex_volume(MatRef vertices) {
    if (vertices.cols() < 1) throw DimensionMismatch("simplex needs at least one vertex");
    if (vertices.cols() - 1 > vertices.rows()) return 0.0;
    return static_cast<double>(volume_l(vertices));
}

double dist_via_volumes(VecRef z, MatRef simplex) {
    if (z.size() != simplex.rows()) throw DimensionMismatch("point and simplex dimensions differ");
    const Index d = simplex.cols() - 1;
    if (d < 0) throw DimensionMismatch("empty simplex");
    double edge = 0.0;
    for (Index j = 1; j <= d; ++j) edge = std::max(edge, (simplex.col(j) - simplex.col(0)).norm());
    const long double base = volume_l(simplex);
    if (d > 0 && !(base > 1e-12L * std::pow(static_cast<long double>(edge), d) / factorial(d)))
        throw DegenerateSimplex("simplex is degenerate");
    if (d + 1 > simplex.rows()) return 0.0;
    Mat ext(simplex.rows(), d + 2);
    ext.leftCols(d + 1) = simplex;
    ext.col(d + 1) = z;
    const long double top = volume_l(ext);
    return static_cast<double>(static_cast<long double>(d + 1) * top / base);
}

double simplex_min_width(MatRef v) {
    const Index m = v.cols();
    if (m < 2) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    // Vertex 0 always sits in the first group; the mask picks the rest.
    const Index masks = Index{1} << (m - 1);
    for (Index mask = 0; mask < masks - 1; ++mask) {
        std::vector<Index> a{0}, b;
        for (Index i = 1; i < m; ++i) ((mask >> (i - 1)) & 1 ? a : b).push_back(i);
        if (b.empty()) continue;
        const Index cols = static_cast<Index>(a.size() + b.size()) - 2;
        const Vec rhs = v.col(b[0]) - v.col(a[0]);
        double dist = rhs.norm();
        if (cols > 0) {
            Mat M(v.rows(), cols);
            Index c = 0;
            for (std::size_t i = 1; i < a.size(); ++i) M.col(c++) = v.col(a[i]) - v.col(a[0]);
            for (std::size_t i = 1; i < b.size(); ++i) M.col(c++) = -(v.col(b[i]) - v.col(b[0]));
            const Vec x = M.completeOrthogonalDecomposition().solve(rhs);
            dist = (rhs - M * x).norm();
        }
        best = std::min(best, dist);
    }
    return best;
}

SmallAngleResult small_angle_check(MatRef points, const AffinePlane& V1, const AffinePlane& V2, double c) {
    if (V1.k() != V2.k() || V1.ambient() != V2.ambient())
        throw DimensionMismatch("planes of different dimension");
    if (points.rows() != V1.ambient() || points.cols() != V1.k() + 1)
        throw DimensionMismatch("small_angle_check expects k+1 points on V1");
    if (!(c > 0.0)) throw InvalidParameter("c", "must be positive");
    double r = 0.0;
    for (Index i = 0; i < points.cols(); ++i)
        for (Index j = i + 1; j < points.cols(); ++j) r = std::max(r, (points.col(i) - points.col(j)).norm());
    if (!(r > 0.0)) throw PointsNotIndependent("points coincide");
    for (Index i = 0; i < points.cols(); ++i)
        if (dist_eucl(V1, points.col(i)) > 1e-9 * r) throw InvalidParameter("points", "must lie on V1");

    SmallAngleResult out;
    out.independence = 0.5 * simplex_min_width(points) / r;
    if (!(out.independence > c)) throw PointsNotIndependent("points are not sufficiently independent");

    double eps2 = 0.0;
    for (Index i = 0; i < points.cols(); ++i)
        for (Index j = i + 1; j < points.cols(); ++j) {
            const Vec dy = points.col(j) - points.col(i);
            const Vec proj = V2.basis * (V2.basis.transpose() * dy);
            const double den = proj.squaredNorm();
            if (!(den > 0.0)) {
                eps2 = std::numeric_limits<double>::infinity();
                continue;
            }
            eps2 = std::max(eps2, dy.squaredNorm() / den - 1.0);
        }
    out.epsilon_measured = std::sqrt(eps2);
    out.angle = angle_eucl(V1, V2);
    if (out.epsilon_measured > 0.0) out.ratio = out.angle / out.epsilon_measured;
    else out.ratio = out.angle > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return out;
}

IndependentPoints independent_points(const DyadicTree& tree, CubeId id, int k) {
    const Cube& q = tree.cube(id);
    const auto& cloud = tree.cloud();
    const bool heis = cloud.metric.is_heisenberg();
    if (k < 1) throw InvalidParameter("k", "must be >= 1");
    if (heis && k > cloud.metric.n) throw InvalidParameter("k", "must not exceed n for horizontal planes");
    if (!heis && k > cloud.metric.n) throw InvalidParameter("k", "must not exceed the ambient dimension");
    if (static_cast<Index>(q.members.size()) < k + 1) throw TooFewPoints("cube has fewer than k+1 points");
    if (!(q.diam > 0.0)) throw DegenerateCube("cube has zero diameter");

    const Index hd = cloud.metric.horizontal_dim();
    IndependentPoints out;
    out.indices.push_back(q.center);
    const Vec x0 = cloud.points.col(q.center);
    Mat dirs(hd, 0);
    for (int step = 1; step <= k; ++step) {
        double best = -1.0;
        Index pick = -1;
        HorizontalPlane hp;
        if (heis && step > 1) hp = {HeisPoint::from_coords(x0), isotropize(dirs)};
        for (Index i : q.members) {
            double dd = 0.0;
            if (!heis) {
                const Vec r = cloud.points.col(i) - x0;
                dd = (r - dirs * (dirs.transpose() * r)).norm();
            } else if (step == 1) {
                dd = Metric(cloud.metric)(x0.data(), cloud.points.col(i).data());
            } else {
                dd = heis_plane_distance(cloud.points.col(i).data(), hp);
            }
            if (dd > best) {
                best = dd;
                pick = i;
            }
        }
        out.indices.push_back(pick);
        Vec r = cloud.points.col(pick).head(hd) - x0.head(hd);
        for (Index c = 0; c < dirs.cols(); ++c) r -= dirs.col(c).dot(r) * dirs.col(c);
        const double norm = r.norm();
        if (!(norm > 1e-14 * q.diam)) throw DegenerateCube("cube is effectively lower-dimensional");
        dirs.conservativeResize(Eigen::NoChange, dirs.cols() + 1);
        dirs.col(dirs.cols() - 1) = r / norm;
    }
    Mat verts(hd, k + 1);
    for (int i = 0; i <= k; ++i) verts.col(i) = cloud.points.col(out.indices[i]).head(hd);
    out.volume = simplex_volume(verts);
    out.certificate = out.volume / std::pow(q.diam, k);
    if (out.certificate < 1e-12) throw DegenerateCube("independence certificate below 1e-12");
    return out;
}

}  // namespace qrect
