#include "qrect/coefficients.hpp"

#include <cmath>
#include <json.hpp>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "coefficient_detail.hpp"
#include "plane_param.hpp"
#include "qrect/optim.hpp"
#include "qrect/util.hpp"

namespace qrect {

PointSubset::PointSubset(const WeightedPointCloud& cloud, std::vector<Index> indices)
    : cloud_(&cloud), indices_(std::move(indices)) {
    for (Index i : indices_) {
        if (i < 0 || i >= cloud.size()) throw InvalidParameter("subset", "index out of range");
        mass_ += cloud.weights(i);
    }
    diam_ = indices_.size() >= 2 ? diameter(cloud, indices_) : Diameter{0.0, true};
}

PointSubset PointSubset::all(const WeightedPointCloud& cloud) {
    std::vector<Index> idx(static_cast<std::size_t>(cloud.size()));
    for (Index i = 0; i < cloud.size(); ++i) idx[static_cast<std::size_t>(i)] = i;
    return PointSubset(cloud, std::move(idx));
}

void PointSubset::require_usable(Index min_points) const {
    if (size() < std::max<Index>(min_points, 2)) throw TooFewPoints("subset has too few points");
    if (!(diam_.value > 0.0)) throw DegenerateDiameter("subset has zero diameter");
    if (diam_.value < 10.0 * cloud_->h) throw ScaleBelowResolution("subset diameter is below 10h");
}

std::string kind_name(CoefficientKind kind) {
    switch (kind) {
        case CoefficientKind::beta_p: return "beta_p";
        case CoefficientKind::beta_inf: return "beta_inf";
        case CoefficientKind::iota_p: return "iota_p";
        case CoefficientKind::iota_map: return "iota_map";
    }
    return "beta_p";
}

CoefficientKind parse_kind(const std::string& name) {
    for (auto k : {CoefficientKind::beta_p, CoefficientKind::beta_inf, CoefficientKind::iota_p,
                   CoefficientKind::iota_map})
        if (kind_name(k) == name) return k;
    throw InvalidParameter("kind", "unknown coefficient kind '" + name + "'");
}

namespace {

void check_plane(const PointSubset& S, const Plane& V) {
    const MetricSpec& m = S.cloud().metric;
    if (const auto* a = std::get_if<AffinePlane>(&V)) {
        if (m.is_heisenberg() || a->ambient() != m.dim()) throw DimensionMismatch("plane does not match the cloud");
    } else {
        const auto& h = std::get<HorizontalPlane>(V);
        if (!m.is_heisenberg() || h.n() != m.n) throw DimensionMismatch("plane does not match the cloud");
    }
}

void check_p(double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw InvalidParameter("p", "must be a finite value >= 1");
}

}  // namespace

double point_plane_distance(const Plane& V, const double* x, HeisDistance mode) {
    if (const auto* a = std::get_if<AffinePlane>(&V)) {
        const Eigen::Map<const Vec> px(x, a->ambient());
        const Vec r = px - a->base;
        return (r - a->basis * (a->basis.transpose() * r)).norm();
    }
    const auto& h = std::get<HorizontalPlane>(V);
    if (mode == HeisDistance::infimum) return heis_plane_distance(x, h);
    const HeisPoint p = HeisPoint::from_coords(Eigen::Map<const Vec>(x, 2 * h.n() + 1));
    return koranyi_dist(p, horiz_project(h, p));
}

double beta_p_V(const PointSubset& S, const Plane& V, double p, HeisDistance mode) {
    check_p(p);
    check_plane(S, V);
    S.require_usable();
    const double diam = S.diam().value;
    double acc = 0.0;
    for (Index i = 0; i < S.size(); ++i) acc += S.weight(i) * std::pow(point_plane_distance(V, S.point(i), mode) / diam, p);
    return std::pow(acc / S.mass(), 1.0 / p);
}

double beta_inf_V(const PointSubset& S, const Plane& V, HeisDistance mode) {
    check_plane(S, V);
    S.require_usable();
    double worst = 0.0;
    for (Index i = 0; i < S.size(); ++i) worst = std::max(worst, point_plane_distance(V, S.point(i), mode));
    return worst / S.diam().value;
}

namespace detail {

Mat horizontal_coords(const PointSubset& S) {
    const int rows = S.cloud().metric.horizontal_dim();
    Mat X(rows, S.size());
    for (Index i = 0; i < S.size(); ++i) X.col(i) = Eigen::Map<const Vec>(S.point(i), rows);
    return X;
}

Vec weights_of(const PointSubset& S) {
    Vec w(S.size());
    for (Index i = 0; i < S.size(); ++i) w(i) = S.weight(i);
    return w;
}

Plane initial_plane(const PointSubset& S, int k) {
    const MetricSpec& m = S.cloud().metric;
    const Mat X = horizontal_coords(S);
    const Vec w = weights_of(S);
    const Vec center = X * w / w.sum();
    const Mat C = (X.colwise() - center) * w.cwiseSqrt().asDiagonal();
    Eigen::JacobiSVD<Mat> svd(C, Eigen::ComputeThinU);
    Mat frame = svd.matrixU().leftCols(std::min<Index>(svd.matrixU().cols(), 2 * k));
    if (!m.is_heisenberg()) {
        AffinePlane a;
        a.base = center;
        a.basis = frame.leftCols(k);
        return a;
    }
    Mat iso = isotropize(frame);
    if (iso.cols() < k) {
        Mat padded(frame.rows(), iso.cols() + k);
        padded << iso, random_isotropic_frame(m.n, k, 0);
        iso = isotropize(padded);
    }
    HorizontalPlane h;
    h.base.x = center;
    double t = 0.0;
    for (Index i = 0; i < S.size(); ++i) t += w(i) * S.point(i)[2 * m.n];
    h.base.t = t / w.sum();
    h.basis = iso.leftCols(k);
    return h;
}

Plane random_plane(const PointSubset& S, int k, std::uint64_t seed) {
    Plane V = initial_plane(S, k);
    const MetricSpec& m = S.cloud().metric;
    if (auto* h = std::get_if<HorizontalPlane>(&V)) {
        h->basis = random_isotropic_frame(m.n, k, seed);
    } else {
        auto& a = std::get<AffinePlane>(V);
        std::mt19937_64 rng(seed);
        Eigen::HouseholderQR<Mat> qr(gaussian_matrix(rng, m.dim(), k));
        a.basis = qr.householderQ() * Mat::Identity(m.dim(), k);
    }
    return V;
}

PlaneSearch search_plane(const PointSubset& S, const std::vector<Plane>& starts,
                         const std::function<double(const Plane&)>& objective, int rounds) {
    const double diam = S.diam().value;
    const bool heis = S.cloud().metric.is_heisenberg();
    PlaneSearch best;
    best.value = std::numeric_limits<double>::infinity();
    for (const Plane& start : starts) {
        Plane current = start;
        double current_value = objective(current);
        for (int round = 0; round < rounds; ++round) {
            const PlaneChart chart(current, true);
            const Index hd = plane_frame(current).rows();
            auto to_chart = [&](const Vec& u) {
                Vec z = u;
                z.head(hd) *= diam;
                if (heis) z(hd) *= diam * diam;
                return z;
            };
            auto f = [&](const Vec& u) { return objective(chart.at(to_chart(u))); };
            const auto res = nelder_mead(f, Vec::Zero(chart.size()), 0.1 / (round + 1),
                                         static_cast<int>(150 * chart.size()), 1e-10);
            best.evaluations += res.evaluations;
            if (res.value < current_value) {
                current = chart.at(to_chart(res.x));
                current_value = res.value;
            } else {
                break;
            }
        }
        if (current_value < best.value) {
            best.value = current_value;
            best.plane = current;
        }
    }
    return best;
}

PairList make_pairs(const PointSubset& S, std::uint64_t budget, std::uint64_t seed) {
    const Index m = S.size();
    const Metric metric(S.cloud().metric);
    const double diam = S.diam().value;
    const double all = static_cast<double>(m) * static_cast<double>(m);
    PairList out;
    out.seed = seed;
    if (budget == 0 || all <= static_cast<double>(budget)) {
        const double unordered = 0.5 * static_cast<double>(m) * static_cast<double>(m - 1);
        if (unordered > 2.5e7) throw InvalidParameter("pair_budget", "exact pair list too large for a search");
        out.exact = true;
        const double mu2 = S.mass() * S.mass();
        out.a.reserve(static_cast<std::size_t>(unordered));
        for (Index i = 0; i < m; ++i)
            for (Index j = i + 1; j < m; ++j) {
                out.a.push_back(static_cast<std::uint32_t>(i));
                out.b.push_back(static_cast<std::uint32_t>(j));
                out.w.push_back(2.0 * S.weight(i) * S.weight(j) / mu2);
                out.d.push_back(metric(S.point(i), S.point(j)) / diam);
            }
        return out;
    }
    out.exact = false;
    std::mt19937_64 rng(seed);
    const Vec w = weights_of(S);
    std::discrete_distribution<Index> pick(w.data(), w.data() + w.size());
    const double each = 1.0 / static_cast<double>(budget);
    out.a.resize(budget);
    out.b.resize(budget);
    out.w.assign(budget, each);
    out.d.resize(budget);
    for (std::uint64_t s = 0; s < budget; ++s) {
        const Index i = pick(rng), j = pick(rng);
        out.a[s] = static_cast<std::uint32_t>(i);
        out.b[s] = static_cast<std::uint32_t>(j);
        out.d[s] = metric(S.point(i), S.point(j)) / diam;
    }
    return out;
}

PairStats pair_objective(const PairList& pairs, const Mat& Y, double p, double diam) {
    PairStats st;
    double sum = 0.0, sq = 0.0;
    const Index k = Y.rows();
    for (std::size_t s = 0; s < pairs.a.size(); ++s) {
        const double* ya = Y.col(pairs.a[s]).data();
        const double* yb = Y.col(pairs.b[s]).data();
        double e = 0.0;
        for (Index c = 0; c < k; ++c) e += (ya[c] - yb[c]) * (ya[c] - yb[c]);
        const double f = std::pow(std::abs(pairs.d[s] - std::sqrt(e) / diam), p);
        sum += pairs.w[s] * f;
        sq += f * f;
    }
    st.mean = sum;
    if (!pairs.exact && !pairs.a.empty()) {
        const double n = static_cast<double>(pairs.a.size());
        const double var = std::max(sq / n - sum * sum, 0.0) * n / std::max(n - 1.0, 1.0);
        st.std_error = std::sqrt(var / n);
    }
    return st;
}

}  // namespace detail

using namespace detail;

CoefficientRecord beta_p(const PointSubset& S, int k, double p, int starts, std::uint64_t seed) {
    check_p(p);
    const MetricSpec& m = S.cloud().metric;
    if (k < 1 || k > (m.is_heisenberg() ? m.n : m.dim() - 1)) throw InvalidParameter("k", "plane dimension out of range");
    S.require_usable(k + 1);
    CoefficientRecord rec;
    rec.kind = CoefficientKind::beta_p;
    rec.p = p;
    rec.diam_exact = S.diam().exact;
    if (!m.is_heisenberg()) {
        const PlaneFit fit = fit_plane(S.cloud(), S.indices(), k, p, starts, seed);
        rec.value = std::min(fit.beta, 1.0);
        rec.plane = fit.plane;
        rec.upper_bound = p != 2.0;
        rec.optimizer = p == 2.0 ? "weighted_pca" : "irls";
        if (p != 2.0) {
            const auto polish = search_plane(S, {Plane(fit.plane)}, [&](const Plane& V) { return beta_p_V(S, V, p); }, 2);
            if (polish.value < fit.beta) {
                rec.value = std::min(polish.value, 1.0);
                rec.plane = polish.plane;
                rec.optimizer = "irls_nelder_mead";
            }
        }
        return rec;
    }
    std::vector<Plane> candidates{initial_plane(S, k)};
    for (int s = 1; s < starts; ++s)
        candidates.push_back(random_plane(S, k, derive_seed(seed, static_cast<std::uint64_t>(s))));
    const auto res = search_plane(S, candidates, [&](const Plane& V) { return beta_p_V(S, V, p); }, 3);
    rec.value = std::min(res.value, 1.0);
    rec.plane = res.plane;
    rec.upper_bound = true;
    rec.optimizer = "multistart_nelder_mead";
    return rec;
}

CoefficientRecord iota_p_V(const PointSubset& S, const Plane& V, double p, std::uint64_t pair_budget,
                           std::uint64_t seed, int threads) {
    check_p(p);
    check_plane(S, V);
    S.require_usable();
    const Index m = S.size();
    const Metric metric(S.cloud().metric);
    const double diam = S.diam().value;
    const Mat Y = plane_frame(V).transpose() * horizontal_coords(S);
    const Index k = Y.rows();
    auto term = [&](Index i, Index j) {
        const double* ya = Y.col(i).data();
        const double* yb = Y.col(j).data();
        double e = 0.0;
        for (Index c = 0; c < k; ++c) e += (ya[c] - yb[c]) * (ya[c] - yb[c]);
        return std::pow(std::abs(metric(S.point(i), S.point(j)) - std::sqrt(e)) / diam, p);
    };

    CoefficientRecord rec;
    rec.kind = CoefficientKind::iota_p;
    rec.p = p;
    rec.plane = V;
    rec.diam_exact = S.diam().exact;
    rec.optimizer = "fixed_plane";
    const double all = static_cast<double>(m) * static_cast<double>(m);
    if (pair_budget == 0 || all <= static_cast<double>(pair_budget)) {
        std::vector<double> rows(static_cast<std::size_t>(m), 0.0);
        parallel_for(static_cast<std::size_t>(m), threads, [&](std::size_t r) {
            const Index i = static_cast<Index>(r);
            double acc = 0.0;
            for (Index j = i + 1; j < m; ++j) acc += S.weight(j) * term(i, j);
            rows[r] = S.weight(i) * acc;
        });
        double total = 0.0;
        for (double r : rows) total += r;
        rec.value = std::min(std::pow(2.0 * total / (S.mass() * S.mass()), 1.0 / p), 1.0);
        rec.estimator = {true, static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(m - 1) / 2, 0, 0.0};
        return rec;
    }
    std::mt19937_64 rng(seed);
    const Vec w = weights_of(S);
    std::discrete_distribution<Index> pick(w.data(), w.data() + w.size());
    double sum = 0.0, sq = 0.0;
    for (std::uint64_t s = 0; s < pair_budget; ++s) {
        const Index i = pick(rng), j = pick(rng);
        const double f = i == j ? 0.0 : term(i, j);
        sum += f;
        sq += f * f;
    }
    const double n = static_cast<double>(pair_budget);
    const double mean = sum / n;
    const double var = std::max(sq / n - mean * mean, 0.0) * n / std::max(n - 1.0, 1.0);
    rec.value = std::min(std::pow(mean, 1.0 / p), 1.0);
    rec.estimator = {false, pair_budget, seed, std::sqrt(var / n)};
    return rec;
}

CoefficientRecord iota_p(const PointSubset& S, int k, double p, int starts, std::uint64_t seed,
                         std::uint64_t pair_budget) {
    check_p(p);
    const MetricSpec& m = S.cloud().metric;
    if (k < 1 || k > (m.is_heisenberg() ? m.n : m.dim() - 1)) throw InvalidParameter("k", "plane dimension out of range");
    S.require_usable(k + 1);
    const double diam = S.diam().value;
    const PairList pairs = make_pairs(S, pair_budget, seed);
    const Mat X = horizontal_coords(S);

    Plane base = m.is_heisenberg() ? initial_plane(S, k) : Plane(fit_plane(S.cloud(), S.indices(), k, 2.0, 1, seed).plane);
    std::vector<Plane> candidates{base};
    for (int s = 1; s < starts; ++s)
        candidates.push_back(random_plane(S, k, derive_seed(seed, static_cast<std::uint64_t>(s))));

    auto eval = [&](const Mat& frame) { return pair_objective(pairs, frame.transpose() * X, p, diam).mean; };
    Mat best_frame = plane_frame(base);
    double best = std::numeric_limits<double>::infinity();
    int evaluations = 0;
    for (const Plane& start : candidates) {
        Plane current = start;
        double value = eval(plane_frame(current));
        ++evaluations;
        double step = 0.1;
        while (step >= 5e-4 && evaluations < 4000) {
            const PlaneChart chart(current, false);
            Vec z = Vec::Zero(chart.size());
            bool moved = false;
            for (Index c = 0; c < chart.size() && !moved; ++c)
                for (double sign : {1.0, -1.0}) {
                    z.setZero();
                    z(c) = sign * step;
                    const Mat f = chart.frame_at(z.data());
                    const double v = eval(f);
                    ++evaluations;
                    if (v < value) {
                        value = v;
                        current = chart.at(z);
                        moved = true;
                        break;
                    }
                }
            if (!moved) step *= 0.5;
        }
        if (value < best) {
            best = value;
            best_frame = plane_frame(current);
        }
    }

    CoefficientRecord rec;
    rec.kind = CoefficientKind::iota_p;
    rec.p = p;
    rec.diam_exact = S.diam().exact;
    rec.upper_bound = true;
    rec.optimizer = "grassmann_compass_search";
    const PairStats st = pair_objective(pairs, best_frame.transpose() * X, p, diam);
    rec.value = std::min(std::pow(st.mean, 1.0 / p), 1.0);
    rec.estimator = {pairs.exact, static_cast<std::uint64_t>(pairs.a.size()), pairs.exact ? 0 : seed, st.std_error};
    if (auto* h = std::get_if<HorizontalPlane>(&base)) {
        h->basis = best_frame;
    } else {
        std::get<AffinePlane>(base).basis = best_frame;
    }
    rec.plane = base;
    return rec;
}

namespace {

std::string plane_json(const Plane& V) {
    std::ostringstream os;
    write_plane_json(V, os);
    return os.str();
}

}  // namespace

void write_records_csv(std::span<const CoefficientRecord> records, std::ostream& out) {
    out << "cube_id,kind,p,value,estimator,pairs,seed,diam_method\n";
    char buf[64];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof buf, "%.17g", r.value);
        out << r.cube_id << ',' << kind_name(r.kind) << ',';
        if (r.kind == CoefficientKind::beta_inf) {
            out << "inf";
        } else {
            out << r.p;
        }
        out << ',' << buf << ',' << (r.estimator.exact ? "exact_pairs" : "sampled") << ',' << r.estimator.pairs << ','
            << r.estimator.seed << ',' << (r.diam_exact ? "exact" : "approximate") << '\n';
    }
}

void write_planes_json(std::span<const CoefficientRecord> records, std::ostream& out) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : records) {
        if (!r.plane) continue;
        arr.push_back({{"cube_id", r.cube_id},
                       {"kind", kind_name(r.kind)},
                       {"p", r.p},
                       {"optimizer", r.optimizer},
                       {"upper_bound", r.upper_bound},
                       {"plane", nlohmann::json::parse(plane_json(*r.plane))}});
    }
    out << arr.dump(1) << '\n';
}

}  // namespace qrect
