#include <cmath>
#include <limits>
#include <random>

#include <json.hpp>

#include "qrect/planes.hpp"
#include "qrect/util.hpp"

namespace qrect {

std::string to_json(const VerificationReport& r) {
    nlohmann::json j;
    j["name"] = r.name;
    j["trials"] = r.trials;
    j["violations"] = r.violations;
    j["skipped"] = r.skipped;
    j["tolerance"] = r.tolerance;
    j["fitted_constant"] = std::isfinite(r.fitted_constant) ? nlohmann::json(r.fitted_constant)
                                                             : nlohmann::json("inf");
    j["worst_case"] = nlohmann::json::parse(r.worst_case);
    return j.dump();
}

namespace {

Mat random_frame(std::mt19937_64& rng, Index ambient, Index k) {
    Eigen::HouseholderQR<Mat> qr(gaussian_matrix(rng, ambient, k));
    return qr.householderQ() * Mat::Identity(ambient, k);
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    return std::exp(u(rng));
}

std::string vec_json(const Vec& v) { return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size())).dump(); }

VerificationReport eucl_two_plane(std::size_t trials, std::uint64_t seed, const PythagorasConfig& cfg) {
    VerificationReport rep;
    rep.name = "eucl_two_plane";
    rep.tolerance = cfg.tolerance;
    rep.fitted_constant = -std::numeric_limits<double>::infinity();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick_k(cfg.k_min, std::min(cfg.k_max, cfg.ambient - 1));
    std::uniform_int_distribution<int> mode(0, 2);
    std::normal_distribution<double> g(0.0, 1.0);
    const Index N = cfg.ambient;
    for (std::size_t t = 0; t < trials; ++t) {
        const int k = pick_k(rng);
        AffinePlane V1{gaussian_matrix(rng, N, 1).col(0), random_frame(rng, N, k)};
        AffinePlane V2 = V1;
        const int m = mode(rng);
        if (m == 1) {
            const double delta = log_uniform(rng, 1e-8, 1e-1);
            Eigen::HouseholderQR<Mat> qr(V1.basis + delta * gaussian_matrix(rng, N, k));
            V2.basis = qr.householderQ() * Mat::Identity(N, k);
            V2.base += delta * gaussian_matrix(rng, N, 1).col(0);
        } else if (m == 2) {
            V2 = {gaussian_matrix(rng, N, 1).col(0), random_frame(rng, N, k)};
        }
        auto sample = [&] {
            const Vec raw = 2.0 * gaussian_matrix(rng, N, 1).col(0);
            const double sigma = mode(rng) == 0 ? 0.0 : log_uniform(rng, 1e-9, 2.0);
            return Vec(project_eucl(V1, raw) + sigma * gaussian_matrix(rng, N, 1).col(0));
        };
        const Vec x = sample();
        const Vec y = sample();
        const double dxy = (x - y).norm();
        const double lhs = dxy * dxy;
        const double proj = (project_eucl(V2, x) - project_eucl(V2, y)).squaredNorm();
        const double tilt = dxy * angle_eucl(V1, V2) + dist_eucl(V1, x) + dist_eucl(V1, y);
        const double excess = lhs - (proj + tilt * tilt);
        ++rep.trials;
        if (excess > cfg.tolerance) ++rep.violations;
        if (excess > rep.fitted_constant) {
            rep.fitted_constant = excess;
            rep.worst_case = "{\"k\":" + std::to_string(k) + ",\"excess\":" + nlohmann::json(excess).dump() +
                             ",\"x\":" + vec_json(x) + ",\"y\":" + vec_json(y) + "}";
        }
    }
    rep.fitted_constant = std::max(rep.fitted_constant, 0.0);
    return rep;
}

HorizontalPlane random_horizontal(std::mt19937_64& rng, int n, int k) {
    HeisPoint base{gaussian_matrix(rng, 2 * n, 1).col(0), std::normal_distribution<double>(0.0, 1.0)(rng)};
    return random_isotropic(n, k, rng(), base);
}

// q.(v,0).(y,s) with v in V', y orthogonal to V' at scale sigma, s at sigma^2.
HeisPoint near_plane_point(std::mt19937_64& rng, const HorizontalPlane& V, double spread, double sigma) {
    const int n = V.n();
    const Vec v = V.basis * (spread * gaussian_matrix(rng, V.k(), 1).col(0));
    Vec y = gaussian_matrix(rng, 2 * n, 1).col(0);
    y -= V.basis * (V.basis.transpose() * y);
    if (y.norm() > 0.0) y *= sigma / y.norm();
    const double s = sigma * sigma * std::normal_distribution<double>(0.0, 1.0)(rng);
    return heis_mul(heis_mul(V.base, HeisPoint{v, 0.0}), HeisPoint{y, s});
}

HorizontalPlane perturbed(std::mt19937_64& rng, const HorizontalPlane& V, double delta) {
    for (int attempt = 0; attempt < 8; ++attempt) {
        Mat f = isotropize(V.basis + delta * gaussian_matrix(rng, V.basis.rows(), V.k()));
        if (f.cols() == V.k()) {
            HeisPoint base{V.base.x + delta * gaussian_matrix(rng, V.basis.rows(), 1).col(0),
                           V.base.t + delta * std::normal_distribution<double>(0.0, 1.0)(rng)};
            return {base, f};
        }
    }
    return V;
}

VerificationReport heis_pythagoras(bool two_plane, std::size_t trials, std::uint64_t seed,
                                   const PythagorasConfig& cfg) {
    VerificationReport rep;
    rep.name = two_plane ? "heis_two_plane" : "heis_one_plane";
    rep.tolerance = cfg.tolerance;
    std::mt19937_64 rng(seed);
    const int n = cfg.heis_n;
    std::uniform_int_distribution<int> pick_k(1, n);
    std::uniform_int_distribution<int> coin(0, 1);
    double best = 0.0;
    std::size_t attempts = 0;
    while (rep.trials < trials && attempts < 20 * trials + 100) {
        ++attempts;
        const int k = pick_k(rng);
        const HorizontalPlane V = random_horizontal(rng, n, k);
        const double spread = log_uniform(rng, 1e-3, 2.0);
        const HeisPoint x = near_plane_point(rng, V, spread, log_uniform(rng, 1e-6, 2.0) * spread);
        const HeisPoint y = near_plane_point(rng, V, spread, log_uniform(rng, 1e-6, 2.0) * spread);
        const double d = koranyi_dist(x, y);
        if (!(d > 0.0)) continue;
        const double dx = heis_plane_distance(x.coords().data(), V);
        const double dy = heis_plane_distance(y.coords().data(), V);
        const double c = std::max(dx, dy) / d;
        if (c > cfg.c_max) {
            ++rep.skipped;
            continue;
        }
        ++rep.trials;
        double ratio = 0.0;
        if (!two_plane) {
            const double dp = koranyi_dist(horiz_project(V, x), horiz_project(V, y));
            const double excess = d * d - dp * dp;
            const double den = (1.0 + c * c) * (dx + dy) * (dx + dy);
            if (den > 0.0) ratio = excess / den;
            else if (excess > cfg.tolerance * d * d) ratio = std::numeric_limits<double>::infinity();
        } else {
            const HorizontalPlane W =
                coin(rng) ? perturbed(rng, V, log_uniform(rng, 1e-6, 0.5)) : random_horizontal(rng, n, k);
            const double dp = koranyi_dist(horiz_project(W, x), horiz_project(W, y));
            const double gap = std::sqrt(std::max(d * d - dp * dp, 0.0)) / d - angle_heis(V, W);
            const double den = (1.0 + c) * (dx + dy) / d;
            if (den > 0.0) ratio = gap / den;
            else if (gap > cfg.tolerance) ratio = std::numeric_limits<double>::infinity();
        }
        if (!std::isfinite(ratio)) ++rep.violations;
        if (ratio > best) {
            best = ratio;
            rep.worst_case = "{\"k\":" + std::to_string(k) + ",\"c\":" + nlohmann::json(c).dump() +
                             ",\"d\":" + nlohmann::json(d).dump() + ",\"dx\":" + nlohmann::json(dx).dump() +
                             ",\"dy\":" + nlohmann::json(dy).dump() + "}";
        }
    }
    rep.fitted_constant = best;
    return rep;
}

}  // namespace

VerificationReport pythagoras_check(PythagorasKind kind, std::size_t trials, std::uint64_t seed,
                                    const PythagorasConfig& cfg) {
    switch (kind) {
        case PythagorasKind::eucl_two_plane: return eucl_two_plane(trials, seed, cfg);
        case PythagorasKind::heis_one_plane: return heis_pythagoras(false, trials, seed, cfg);
        case PythagorasKind::heis_two_plane: return heis_pythagoras(true, trials, seed, cfg);
    }
    return {};
}

VerificationReport projection_bracket_check(std::size_t trials, std::uint64_t seed, int n, double rel_tol) {
    VerificationReport rep;
    rep.name = "projection_bracket";
    rep.tolerance = rel_tol;
    rep.fitted_constant = std::numeric_limits<double>::infinity();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick_k(1, n);
    for (std::size_t t = 0; t < trials; ++t) {
        const HorizontalPlane V = random_horizontal(rng, n, pick_k(rng));
        const double spread = log_uniform(rng, 1e-3, 3.0);
        const HeisPoint p = near_plane_point(rng, V, spread, log_uniform(rng, 1e-4, 3.0) * spread);
        const HeisPlaneDistance b = heis_dist_to_plane(p, V);
        ++rep.trials;
        const double scale = std::max(b.bracket_high, std::numeric_limits<double>::min());
        if (b.inf_estimate < b.bracket_low - rel_tol * scale || b.inf_estimate > b.bracket_high + rel_tol * scale)
            ++rep.violations;
        if (b.bracket_high > 0.0) {
            const double ratio = b.inf_estimate / b.bracket_high;
            if (ratio < rep.fitted_constant) {
                rep.fitted_constant = ratio;
                rep.worst_case = "{\"inf\":" + nlohmann::json(b.inf_estimate).dump() +
                                 ",\"high\":" + nlohmann::json(b.bracket_high).dump() + "}";
            }
        }
    }
    return rep;
}

namespace {

Mat regular_simplex(int k) {
    // Vertices of the standard simplex in R^{k+1}, expressed in a basis of
    // the sum-zero hyperplane; unit edge length.
    Mat centered = Mat::Identity(k + 1, k + 1);
    centered.array() -= 1.0 / (k + 1);
    Eigen::HouseholderQR<Mat> qr(centered.leftCols(k));
    const Mat q = qr.householderQ() * Mat::Identity(k + 1, k);
    return (q.transpose() * centered) / std::sqrt(2.0);
}

}  // namespace

VerificationReport small_angle_suite(double theta, std::size_t trials, std::uint64_t seed, double c, int ambient) {
    VerificationReport rep;
    rep.name = "small_angle";
    rep.tolerance = 0.0;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick_k(1, std::min(3, ambient - 1));
    std::size_t attempts = 0;
    while (rep.trials < trials && attempts < 50 * trials + 100) {
        ++attempts;
        const int k = pick_k(rng);
        const Mat frame = random_frame(rng, ambient, k + 1);
        AffinePlane V1{gaussian_matrix(rng, ambient, 1).col(0), frame.leftCols(k)};
        Vec u = V1.basis * gaussian_matrix(rng, k, 1).col(0);
        u.normalize();
        Vec w = gaussian_matrix(rng, ambient, 1).col(0);
        w -= V1.basis * (V1.basis.transpose() * w);
        w.normalize();
        const Mat rot = Mat::Identity(ambient, ambient) + (std::cos(theta) - 1.0) * (u * u.transpose() + w * w.transpose()) +
                        std::sin(theta) * (w * u.transpose() - u * w.transpose());
        AffinePlane V2{V1.base, rot * V1.basis};

        const Mat in_plane = random_frame(rng, k, k) * regular_simplex(k) + 0.05 * gaussian_matrix(rng, k, k + 1);
        const Mat pts = (V1.basis * in_plane).colwise() + V1.base;
        try {
            const SmallAngleResult r = small_angle_check(pts, V1, V2, c);
            ++rep.trials;
            if (!std::isfinite(r.ratio)) ++rep.violations;
            if (r.ratio > rep.fitted_constant) {
                rep.fitted_constant = r.ratio;
                rep.worst_case = "{\"k\":" + std::to_string(k) + ",\"angle\":" + nlohmann::json(r.angle).dump() +
                                 ",\"epsilon\":" + nlohmann::json(r.epsilon_measured).dump() + "}";
            }
        } catch (const PointsNotIndependent&) {
            ++rep.skipped;
        }
    }
    return rep;
}

}  // namespace qrect
