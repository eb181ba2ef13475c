#include <cmath>
#include <numbers>
#include <random>

#include "qrect/pointset.hpp"
#include "qrect/util.hpp"

namespace qrect {

namespace {

struct Entry {
    Family family;
    const char* name;
};

constexpr Entry kFamilies[] = {
    {Family::segment, "segment"},
    {Family::kplane_patch, "kplane_patch"},
    {Family::circle, "circle"},
    {Family::parallel_lines, "parallel_lines"},
    {Family::lipschitz_graph, "lipschitz_graph"},
    {Family::turning_curve, "turning_curve"},
    {Family::heis_horizontal_line, "heis_horizontal_line"},
    {Family::heis_lift, "heis_lift"},
};

WeightedPointCloud make_cloud(MetricSpec metric, std::vector<Vec> pts, std::vector<double> w, double s,
                              double h) {
    WeightedPointCloud c;
    c.metric = metric;
    c.points.resize(metric.dim(), static_cast<Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) c.points.col(static_cast<Index>(i)) = pts[i];
    c.weights = Eigen::Map<const Vec>(w.data(), static_cast<Index>(w.size()));
    c.s = s;
    c.h = h;
    return c;
}

// Uniform samples of a planar polyline with spacing close to h; weights are
// the arc length each sample represents.
void resample_polyline(const std::vector<Eigen::Vector2d>& poly, double h, std::vector<Vec>& pts,
                       std::vector<double>& w) {
    std::vector<double> acc(poly.size(), 0.0);
    for (std::size_t i = 1; i < poly.size(); ++i) acc[i] = acc[i - 1] + (poly[i] - poly[i - 1]).norm();
    const double total = acc.back();
    const auto m = static_cast<std::size_t>(std::ceil(total / h));
    const double step = total / static_cast<double>(m);
    std::size_t seg = 1;
    for (std::size_t i = 0; i <= m; ++i) {
        const double a = (i == m) ? total : step * static_cast<double>(i);
        while (seg + 1 < poly.size() && acc[seg] < a) ++seg;
        const double len = acc[seg] - acc[seg - 1];
        const double f = len > 0.0 ? std::clamp((a - acc[seg - 1]) / len, 0.0, 1.0) : 0.0;
        const Eigen::Vector2d p = poly[seg - 1] + f * (poly[seg] - poly[seg - 1]);
        pts.push_back(Vec(p));
        w.push_back((i == 0 || i == m) ? step / 2.0 : step);
    }
}

void require(bool ok, const char* field, const char* what) {
    if (!ok) throw InvalidParameter(field, what);
}

WeightedPointCloud gen_segment(const GeneratorSpec& g) {
    require(g.length > 0.0, "length", "must be positive");
    require(g.n >= 1, "n", "must be >= 1");
    const auto m = static_cast<Index>(std::llround(g.length / g.h));
    require(m >= 1, "h", "must be below the length");
    std::vector<Vec> pts;
    std::vector<double> w;
    for (Index i = 0; i <= m; ++i) {
        Vec p = Vec::Zero(g.n);
        p(0) = g.length * static_cast<double>(i) / static_cast<double>(m);
        pts.push_back(p);
        w.push_back(g.h);
    }
    return make_cloud(MetricSpec::euclidean(g.n), std::move(pts), std::move(w), 1.0, g.h);
}

WeightedPointCloud gen_patch(const GeneratorSpec& g) {
    require(g.k >= 1, "k", "must be >= 1");
    require(g.n >= g.k, "n", "must be >= k");
    require(g.length > 0.0, "length", "must be positive");
    const auto m = static_cast<Index>(std::llround(g.length / g.h));
    require(m >= 1, "h", "must be below the side length");
    Index count = 1;
    for (int i = 0; i < g.k; ++i) {
        count *= (m + 1);
        require(count <= 50'000'000, "h", "patch too fine");
    }
    std::vector<Vec> pts;
    std::vector<double> w;
    const double wt = std::pow(g.h, g.k);
    std::vector<Index> digit(g.k, 0);
    for (Index c = 0; c < count; ++c) {
        Vec p = Vec::Zero(g.n);
        for (int i = 0; i < g.k; ++i) p(i) = g.length * static_cast<double>(digit[i]) / static_cast<double>(m);
        pts.push_back(p);
        w.push_back(wt);
        for (int i = 0; i < g.k; ++i) {
            if (++digit[i] <= m) break;
            digit[i] = 0;
        }
    }
    return make_cloud(MetricSpec::euclidean(g.n), std::move(pts), std::move(w), g.k, g.h);
}

WeightedPointCloud gen_circle(const GeneratorSpec& g) {
    require(g.radius > 0.0, "radius", "must be positive");
    const auto m = static_cast<Index>(std::ceil(2.0 * std::numbers::pi * g.radius / g.h));
    require(m >= 3, "h", "too coarse for the radius");
    const double arc = 2.0 * std::numbers::pi * g.radius / static_cast<double>(m);
    std::vector<Vec> pts;
    std::vector<double> w;
    for (Index i = 0; i < m; ++i) {
        const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(m);
        pts.push_back(Eigen::Vector2d(g.radius * std::cos(a), g.radius * std::sin(a)));
        w.push_back(arc);
    }
    return make_cloud(MetricSpec::euclidean(2), std::move(pts), std::move(w), 1.0, arc);
}

WeightedPointCloud gen_parallel_lines(const GeneratorSpec& g) {
    require(g.eps > 0.0 && g.eps < 1.0, "eps", "must lie in (0,1)");
    require(g.r > 0.0, "r", "must be positive");
    const auto m = static_cast<Index>(std::llround(g.r / g.h));
    require(m >= 1, "h", "must be below r");
    const double step = g.r / static_cast<double>(m);
    std::vector<Vec> pts;
    std::vector<double> w;
    for (double y : {0.0, g.eps * g.r}) {
        for (Index i = -m; i <= m; ++i) {
            pts.push_back(Eigen::Vector2d(step * static_cast<double>(i), y));
            w.push_back(step);
        }
    }
    return make_cloud(MetricSpec::euclidean(2), std::move(pts), std::move(w), 1.0, step);
}

WeightedPointCloud gen_lipschitz(const GeneratorSpec& g) {
    require(g.lipschitz >= 0.0, "lipschitz", "must be >= 0");
    require(g.terms >= 1 && g.terms <= 30, "terms", "must lie in [1,30]");
    require(g.length > 0.0, "length", "must be positive");
    std::mt19937_64 rng(g.seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::vector<double> freq(g.terms), amp(g.terms), ph(g.terms);
    for (int i = 0; i < g.terms; ++i) {
        freq[i] = std::numbers::pi * std::ldexp(1.0, i + 1) / g.length;
        amp[i] = g.lipschitz / (g.terms * freq[i]);
        ph[i] = phase(rng);
    }
    const auto m = static_cast<Index>(std::llround(g.length / g.h));
    require(m >= 1, "h", "must be below the length");
    const double step = g.length / static_cast<double>(m);
    std::vector<Vec> pts;
    std::vector<double> w;
    for (Index i = 0; i <= m; ++i) {
        const double x = step * static_cast<double>(i);
        double y = 0.0, dy = 0.0;
        for (int t = 0; t < g.terms; ++t) {
            y += amp[t] * std::sin(freq[t] * x + ph[t]);
            dy += amp[t] * freq[t] * std::cos(freq[t] * x + ph[t]);
        }
        pts.push_back(Eigen::Vector2d(x, y));
        const double end = (i == 0 || i == m) ? 0.5 : 1.0;
        w.push_back(end * step * std::sqrt(1.0 + dy * dy));
    }
    return make_cloud(MetricSpec::euclidean(2), std::move(pts), std::move(w), 1.0,
                      step * std::sqrt(1.0 + g.lipschitz * g.lipschitz));
}

std::vector<double> turning_angles(const GeneratorSpec& g) {
    if (!g.angles.empty()) {
        for (double a : g.angles) require(std::abs(a) < 1.2, "angles", "each angle must satisfy |a| < 1.2");
        return g.angles;
    }
    require(g.generations >= 0 && g.generations <= 24, "generations", "must lie in [0,24]");
    require(g.turn_p > 0.0, "turn_p", "must be positive");
    require(g.turn_c >= 0.0 && g.turn_c < 1.2, "turn_c", "must lie in [0,1.2)");
    std::vector<double> a;
    for (int i = 1; i <= g.generations; ++i) a.push_back(g.turn_c * std::pow(i, -1.0 / g.turn_p));
    return a;
}

WeightedPointCloud gen_turning(const GeneratorSpec& g) {
    const std::vector<double> angles = turning_angles(g);
    std::vector<Eigen::Vector2d> poly = {{0.0, 0.0}, {1.0, 0.0}};
    for (double a : angles) {
        std::vector<Eigen::Vector2d> next;
        next.reserve(2 * poly.size());
        const double lift = std::tan(a) / 2.0;
        for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
            const Eigen::Vector2d d = poly[i + 1] - poly[i];
            const Eigen::Vector2d normal(-d.y(), d.x());
            next.push_back(poly[i]);
            next.push_back(poly[i] + 0.5 * d + lift * normal);
        }
        next.push_back(poly.back());
        poly = std::move(next);
    }
    std::vector<Vec> pts;
    std::vector<double> w;
    resample_polyline(poly, g.h, pts, w);
    return make_cloud(MetricSpec::euclidean(2), std::move(pts), std::move(w), 1.0, g.h);
}

Vec random_isotropic_direction(int n, std::uint64_t seed) {
    // A unit vector is always isotropic.
    std::mt19937_64 rng(seed);
    Vec v = gaussian_matrix(rng, 2 * n, 1).col(0);
    return v / v.norm();
}

WeightedPointCloud gen_heis_line(const GeneratorSpec& g) {
    require(g.n >= 1, "n", "must be >= 1");
    require(g.length > 0.0, "length", "must be positive");
    const auto m = static_cast<Index>(std::llround(g.length / g.h));
    require(m >= 1, "h", "must be below the length");
    Vec dir = Vec::Zero(2 * g.n);
    if (g.seed == 0) dir(0) = 1.0;
    else dir = random_isotropic_direction(g.n, g.seed);
    std::vector<Vec> pts;
    std::vector<double> w;
    const double step = g.length / static_cast<double>(m);
    for (Index i = 0; i <= m; ++i) {
        Vec p = Vec::Zero(2 * g.n + 1);
        p.head(2 * g.n) = step * static_cast<double>(i) * dir;
        pts.push_back(p);
        w.push_back(step);
    }
    return make_cloud(MetricSpec::heisenberg(g.n), std::move(pts), std::move(w), 1.0, step);
}

WeightedPointCloud gen_heis_lift(const GeneratorSpec& g) {
    require(g.n >= 1, "n", "must be >= 1");
    std::vector<Eigen::Vector2d> planar;
    std::vector<double> seg_len;
    if (g.curve == "circle") {
        require(g.radius > 0.0, "radius", "must be positive");
        const auto m = static_cast<Index>(std::ceil(2.0 * std::numbers::pi * g.radius / g.h));
        require(m >= 3, "h", "too coarse for the radius");
        for (Index i = 0; i <= m; ++i) {
            const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(m);
            planar.emplace_back(g.radius * std::cos(a), g.radius * std::sin(a));
        }
    } else if (g.curve == "segment") {
        require(g.length > 0.0, "length", "must be positive");
        const auto m = static_cast<Index>(std::llround(g.length / g.h));
        require(m >= 1, "h", "must be below the length");
        for (Index i = 0; i <= m; ++i)
            planar.emplace_back(g.length * static_cast<double>(i) / static_cast<double>(m), 0.5);
    } else {
        throw InvalidParameter("curve", "expected circle or segment");
    }
    std::vector<Vec> pts;
    std::vector<double> w;
    double t = 0.0;
    double max_step = 0.0;
    for (std::size_t i = 0; i < planar.size(); ++i) {
        if (i > 0) {
            const Eigen::Vector2d& a = planar[i - 1];
            const Eigen::Vector2d& b = planar[i];
            t += 0.5 * (a.x() * b.y() - a.y() * b.x());
        }
        Vec p = Vec::Zero(2 * g.n + 1);
        p(0) = planar[i].x();
        p(g.n) = planar[i].y();
        p(2 * g.n) = t;
        pts.push_back(p);
        const double before = i > 0 ? (planar[i] - planar[i - 1]).norm() : 0.0;
        const double after = i + 1 < planar.size() ? (planar[i + 1] - planar[i]).norm() : 0.0;
        max_step = std::max(max_step, after);
        w.push_back(0.5 * (before + after));
    }
    return make_cloud(MetricSpec::heisenberg(g.n), std::move(pts), std::move(w), 1.0, max_step);
}

}  // namespace

std::string family_name(Family f) {
    for (const auto& e : kFamilies)
        if (e.family == f) return e.name;
    return "unknown";
}

Family parse_family(const std::string& name) {
    for (const auto& e : kFamilies)
        if (name == e.name) return e.family;
    throw InvalidParameter("family", "unknown family '" + name + "'");
}

WeightedPointCloud generate(const GeneratorSpec& spec) {
    require(spec.h > 0.0 && std::isfinite(spec.h), "h", "must be positive");
    WeightedPointCloud c;
    switch (spec.family) {
        case Family::segment: c = gen_segment(spec); break;
        case Family::kplane_patch: c = gen_patch(spec); break;
        case Family::circle: c = gen_circle(spec); break;
        case Family::parallel_lines: c = gen_parallel_lines(spec); break;
        case Family::lipschitz_graph: c = gen_lipschitz(spec); break;
        case Family::turning_curve: c = gen_turning(spec); break;
        case Family::heis_horizontal_line: c = gen_heis_line(spec); break;
        case Family::heis_lift: c = gen_heis_lift(spec); break;
    }
    c.validate();
    return c;
}

}  // namespace qrect
