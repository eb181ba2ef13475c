#include "qrect/planes.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>

#include <json.hpp>

#include "qrect/util.hpp"

namespace qrect {

void AffinePlane::validate() const {
    if (basis.rows() != base.size()) throw DimensionMismatch("plane basis does not match the base point");
    if (basis.cols() < 1 || basis.cols() >= basis.rows())
        throw InvalidParameter("k", "plane dimension must satisfy 1 <= k < ambient");
    const Mat g = basis.transpose() * basis;
    if ((g - Mat::Identity(k(), k())).cwiseAbs().maxCoeff() > 1e-10)
        throw InvalidParameter("basis", "not orthonormal");
}

Vec project_eucl(const AffinePlane& V, VecRef x) {
    if (x.size() != V.base.size()) throw DimensionMismatch("project_eucl: dimension mismatch");
    return V.base + V.basis * (V.basis.transpose() * (x - V.base));
}

double dist_eucl(const AffinePlane& V, VecRef x) {
    if (x.size() != V.base.size()) throw DimensionMismatch("dist_eucl: dimension mismatch");
    const Vec r = x - V.base;
    return (r - V.basis * (V.basis.transpose() * r)).norm();
}

double subspace_angle(MatRef B1, MatRef B2) {
    if (B1.rows() != B2.rows() || B1.cols() != B2.cols())
        throw DimensionMismatch("angle between planes of different dimension");
    auto one_side = [](MatRef a, MatRef b) {
        const Mat m = a - b * (b.transpose() * a);
        Eigen::JacobiSVD<Mat> svd(m);
        return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    };
    return std::clamp(std::max(one_side(B1, B2), one_side(B2, B1)), 0.0, 1.0);
}

double angle_eucl(const AffinePlane& V1, const AffinePlane& V2) { return subspace_angle(V1.basis, V2.basis); }

double angle_heis(const HorizontalPlane& V1, const HorizontalPlane& V2) {
    return subspace_angle(V1.basis, V2.basis);
}

namespace {

struct Frame {
    Vec center;
    Mat basis;
};

Frame weighted_pca(const Mat& X, const Vec& u, int k) {
    const double total = u.sum();
    Frame f;
    f.center = X * u / total;
    const Mat Y = X.colwise() - f.center;
    const Mat C = Y * u.asDiagonal() * Y.transpose();
    Eigen::SelfAdjointEigenSolver<Mat> eig(C);
    f.basis = eig.eigenvectors().rightCols(k).rowwise().reverse();
    return f;
}

Vec residuals(const Mat& X, const Frame& f) {
    const Mat Y = X.colwise() - f.center;
    const Mat R = Y - f.basis * (f.basis.transpose() * Y);
    return R.colwise().norm().transpose();
}

double power_mean(const Vec& d, const Vec& w, double p, double diam) {
    double s = 0.0;
    for (Index i = 0; i < d.size(); ++i) s += w(i) * std::pow(d(i) / diam, p);
    return std::pow(s / w.sum(), 1.0 / p);
}

Mat orthonormalize(const Mat& m) {
    Eigen::HouseholderQR<Mat> qr(m);
    return qr.householderQ() * Mat::Identity(m.rows(), m.cols());
}

}  // namespace

PlaneFit fit_plane(const WeightedPointCloud& cloud, std::span<const Index> subset, int k, double p, int starts,
                   std::uint64_t seed) {
    if (cloud.metric.is_heisenberg()) throw MetricUnsupported("fit_plane works on Euclidean clouds");
    if (k < 1 || k >= cloud.metric.dim()) throw InvalidParameter("k", "must satisfy 1 <= k < ambient");
    if (!(p >= 1.0)) throw InvalidParameter("p", "must be >= 1");
    if (static_cast<Index>(subset.size()) < k + 1) throw TooFewPoints("fit_plane needs at least k+1 points");
    const Index m = static_cast<Index>(subset.size());
    Mat X(cloud.points.rows(), m);
    Vec w(m);
    for (Index i = 0; i < m; ++i) {
        X.col(i) = cloud.points.col(subset[i]);
        w(i) = cloud.weights(subset[i]);
    }
    const double diam = diameter(cloud, subset).value;
    if (!(diam > 0.0)) throw DegenerateDiameter("subset has zero diameter");

    const Frame pca = weighted_pca(X, w, k);
    PlaneFit best;
    best.plane = {pca.center, pca.basis};
    best.beta = power_mean(residuals(X, pca), w, p, diam);
    if (p == 2.0) return best;

    const double clip = 1e-9 * diam;
    best.converged = false;
    for (int s = 0; s < std::max(starts, 1); ++s) {
        Frame f = pca;
        if (s > 0) {
            std::mt19937_64 local(derive_seed(seed, static_cast<std::uint64_t>(s)));
            f.basis = orthonormalize(pca.basis + 0.5 * gaussian_matrix(local, pca.basis.rows(), k));
        }
        Vec d = residuals(X, f);
        double value = power_mean(d, w, p, diam);
        Frame keep = f;
        double keep_value = value;
        bool converged = false;
        int it = 0;
        for (; it < 100; ++it) {
            Vec u(m);
            for (Index i = 0; i < m; ++i) u(i) = w(i) * std::pow(std::max(d(i), clip), p - 2.0);
            f = weighted_pca(X, u, k);
            d = residuals(X, f);
            const double next = power_mean(d, w, p, diam);
            if (next < keep_value) {
                keep = f;
                keep_value = next;
            }
            const bool small = std::abs(value - next) <= 1e-8 * std::max(value, 1e-300);
            value = next;
            if (small) {
                converged = true;
                break;
            }
        }
        best.iterations += it;
        if (keep_value < best.beta) {
            best.plane = {keep.center, keep.basis};
            best.beta = keep_value;
            best.converged = converged;
        } else if (s == 0) {
            best.converged = converged;
        }
        best.starts = s + 1;
    }
    return best;
}

void write_plane_json(const Plane& plane, std::ostream& out) {
    nlohmann::json j;
    auto cols = [](const Mat& b) {
        std::vector<std::vector<double>> c;
        for (Index i = 0; i < b.cols(); ++i) c.emplace_back(b.col(i).data(), b.col(i).data() + b.rows());
        return c;
    };
    if (const auto* a = std::get_if<AffinePlane>(&plane)) {
        j["base"] = std::vector<double>(a->base.data(), a->base.data() + a->base.size());
        j["basis"] = cols(a->basis);
    } else {
        const auto& h = std::get<HorizontalPlane>(plane);
        j["base"] = std::vector<double>(h.base.x.data(), h.base.x.data() + h.base.x.size());
        j["vertical"] = h.base.t;
        j["basis"] = cols(h.basis);
    }
    out << j.dump() << '\n';
}

Plane read_plane_json(std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(0, e.what());
    }
    try {
        const auto base = j.at("base").get<std::vector<double>>();
        const auto basis = j.at("basis").get<std::vector<std::vector<double>>>();
        Mat B(static_cast<Index>(base.size()), static_cast<Index>(basis.size()));
        for (std::size_t c = 0; c < basis.size(); ++c) {
            if (basis[c].size() != base.size()) throw SchemaError("basis vector length differs from base");
            for (std::size_t r = 0; r < base.size(); ++r) B(static_cast<Index>(r), static_cast<Index>(c)) = basis[c][r];
        }
        const Vec b = Eigen::Map<const Vec>(base.data(), static_cast<Index>(base.size()));
        if (j.contains("vertical")) {
            HorizontalPlane h{HeisPoint{b, j["vertical"].get<double>()}, B};
            h.validate();
            return h;
        }
        AffinePlane a{b, B};
        a.validate();
        return a;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(e.what());
    }
}

}  // namespace qrect
