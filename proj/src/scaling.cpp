#include <chrono>
#include <cmath>

#include "qrect/carleson.hpp"

namespace qrect {

std::vector<ScalingRow> scaling_experiment(std::span<const double> eps_list, double q, std::uint64_t pair_budget,
                                           std::uint64_t seed, int threads, bool with_infimum) {
    for (double eps : eps_list)
        if (!(eps > 0.0 && eps <= 0.2)) throw InvalidParameter("eps", "must lie in (0, 0.2]");
    std::vector<ScalingRow> rows;
    for (double eps : eps_list) {
        const auto start = std::chrono::steady_clock::now();
        GeneratorSpec g;
        g.family = Family::parallel_lines;
        g.eps = eps;
        g.r = 1.0;
        g.h = eps / 20.0;
        g.seed = seed;
        const WeightedPointCloud cloud = generate(g);
        std::vector<Index> ball;
        for (Index i = 0; i < cloud.size(); ++i)
            if (cloud.points.col(i).norm() <= 1.0 + 1e-12) ball.push_back(i);
        const PointSubset S(cloud, std::move(ball));
        AffinePlane lower;
        lower.base = Vec::Zero(2);
        lower.basis = Mat::Zero(2, 1);
        lower.basis(0, 0) = 1.0;

        ScalingRow row;
        row.eps = eps;
        row.points = static_cast<std::size_t>(S.size());
        row.beta = beta_p_V(S, lower, q);
        row.iota = iota_p_V(S, lower, q, 0, seed, threads).value;
        row.iota_norm = row.iota / (eps * eps * std::log(1.0 / eps));
        row.beta_norm = row.beta / eps;
        if (with_infimum) {
            row.beta_inf_estimate = beta_p(S, 1, q, 4, seed).value;
            row.iota_inf_estimate = iota_p(S, 1, q, 1, seed, pair_budget).value;
        }
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        rows.push_back(row);
    }
    return rows;
}

}  // namespace qrect
