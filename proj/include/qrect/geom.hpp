#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>

#include "qrect/error.hpp"

namespace qrect {

using Index = std::ptrdiff_t;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using VecRef = Eigen::Ref<const Eigen::VectorXd>;
using MatRef = Eigen::Ref<const Eigen::MatrixXd>;

enum class MetricKind { Euclidean, Heisenberg };

struct MetricSpec {
    MetricKind kind = MetricKind::Euclidean;
    int n = 2;

    static MetricSpec euclidean(int n);
    static MetricSpec heisenberg(int n);

    bool is_heisenberg() const noexcept { return kind == MetricKind::Heisenberg; }
    // Number of stored coordinates per point: n, or 2n+1.
    int dim() const noexcept { return is_heisenberg() ? 2 * n + 1 : n; }
    // Number of horizontal coordinates: n, or 2n.
    int horizontal_dim() const noexcept { return is_heisenberg() ? 2 * n : n; }
    std::string kind_name() const;

    friend bool operator==(const MetricSpec&, const MetricSpec&) = default;
};

struct HeisPoint {
    Vec x;
    double t = 0.0;

    static HeisPoint origin(int n);
    static HeisPoint from_coords(VecRef coords);
    int n() const noexcept { return static_cast<int>(x.size() / 2); }
    Vec coords() const;
};

double omega(VecRef x, VecRef y);
HeisPoint heis_mul(const HeisPoint& p, const HeisPoint& q);
HeisPoint heis_inv(const HeisPoint& p);
HeisPoint dilate(const HeisPoint& p, double lambda);
double koranyi_norm(VecRef x, double t);
double koranyi_dist(const HeisPoint& p, const HeisPoint& q);
double dist(const MetricSpec& m, VecRef p, VecRef q);

namespace detail {

inline double quartic_root_sum(double a, double b) {
    // (a^2 + b^2)^{1/4} for a, b >= 0
    constexpr double big = 1e150;
    if (a < big && b < big) return std::sqrt(std::sqrt(a * a + b * b));
    return std::sqrt(std::hypot(a, b));
}

inline double omega_raw(const double* x, const double* y, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += x[i] * y[n + i] - x[n + i] * y[i];
    return 0.5 * s;
}

inline double euclid_raw(const double* p, const double* q, int d) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
        const double e = q[i] - p[i];
        s += e * e;
    }
    return std::sqrt(s);
}

inline double koranyi_raw(const double* p, const double* q, int n) {
    double a = 0.0;
    double w = 0.0;
    for (int i = 0; i < 2 * n; ++i) {
        const double e = q[i] - p[i];
        a += e * e;
    }
    for (int i = 0; i < n; ++i) w += p[i] * q[n + i] - p[n + i] * q[i];
    const double dt = q[2 * n] - p[2 * n] - 0.5 * w;
    return quartic_root_sum(a, 4.0 * std::abs(dt));
}

}  // namespace detail

// Distance kernel on raw coordinate arrays, used in hot loops.
struct Metric {
    MetricSpec spec;

    explicit Metric(MetricSpec s) : spec(s) {}
    double operator()(const double* p, const double* q) const {
        return spec.is_heisenberg() ? detail::koranyi_raw(p, q, spec.n)
                                    : detail::euclid_raw(p, q, spec.n);
    }
};

}  // namespace qrect
