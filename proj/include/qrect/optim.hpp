#pragma once

#include <algorithm>
#include <functional>
#include <numeric>
#include <vector>

#include "qrect/geom.hpp"

namespace qrect {

struct MinimizeResult {
    Vec x;
    double value = 0.0;
    int evaluations = 0;
    bool converged = false;
};

// Nelder-Mead with the standard reflection/expansion/contraction/shrink
// coefficients; the initial simplex uses one step per coordinate.
inline MinimizeResult nelder_mead(const std::function<double(const Vec&)>& f, const Vec& start, double step,
                                  int max_evals, double ftol = 1e-12) {
    const Index n = start.size();
    std::vector<Vec> pts(n + 1, start);
    std::vector<double> val(n + 1);
    MinimizeResult res;
    for (Index i = 0; i < n; ++i) pts[i + 1](i) += step;
    for (Index i = 0; i <= n; ++i) val[i] = f(pts[i]);
    res.evaluations = static_cast<int>(n + 1);
    std::vector<Index> ord(n + 1);
    while (res.evaluations < max_evals) {
        std::iota(ord.begin(), ord.end(), Index{0});
        std::stable_sort(ord.begin(), ord.end(), [&](Index a, Index b) { return val[a] < val[b]; });
        const Index best = ord.front(), worst = ord.back(), second = ord[n - 1];
        if (std::abs(val[worst] - val[best]) <= ftol * (std::abs(val[best]) + ftol)) {
            res.converged = true;
            break;
        }
        Vec centroid = Vec::Zero(n);
        for (Index i = 0; i <= n; ++i)
            if (i != worst) centroid += pts[i];
        centroid /= static_cast<double>(n);
        const Vec xr = centroid + (centroid - pts[worst]);
        const double fr = f(xr);
        ++res.evaluations;
        if (fr < val[best]) {
            const Vec xe = centroid + 2.0 * (centroid - pts[worst]);
            const double fe = f(xe);
            ++res.evaluations;
            if (fe < fr) {
                pts[worst] = xe;
                val[worst] = fe;
            } else {
                pts[worst] = xr;
                val[worst] = fr;
            }
        } else if (fr < val[second]) {
            pts[worst] = xr;
            val[worst] = fr;
        } else {
            const bool outside = fr < val[worst];
            const Vec xc = outside ? Vec(centroid + 0.5 * (xr - centroid)) : Vec(centroid + 0.5 * (pts[worst] - centroid));
            const double fc = f(xc);
            ++res.evaluations;
            if (fc < (outside ? fr : val[worst])) {
                pts[worst] = xc;
                val[worst] = fc;
            } else {
                for (Index i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
                    val[i] = f(pts[i]);
                    ++res.evaluations;
                }
            }
        }
    }
    const auto it = std::min_element(val.begin(), val.end());
    res.x = pts[static_cast<std::size_t>(it - val.begin())];
    res.value = *it;
    return res;
}

}  // namespace qrect
