#pragma once

#include <functional>
#include <vector>

#include "qrect/coefficients.hpp"

namespace qrect::detail {

Mat horizontal_coords(const PointSubset& S);
Vec weights_of(const PointSubset& S);
// Weighted centroid with the leading principal frame (isotropized in the Heisenberg case).
Plane initial_plane(const PointSubset& S, int k);
Plane random_plane(const PointSubset& S, int k, std::uint64_t seed);

struct PlaneSearch {
    Plane plane;
    double value = 0.0;
    int evaluations = 0;
};
// Nelder-Mead over base and direction from each start; never worse than the best start.
PlaneSearch search_plane(const PointSubset& S, const std::vector<Plane>& starts,
                         const std::function<double(const Plane&)>& objective, int rounds);

// Pairs with normalized distances; exact lists hold each unordered pair once
// with weight 2 w_a w_b / mu^2, sampled lists hold ordered draws of weight 1/n.
struct PairList {
    std::vector<std::uint32_t> a, b;
    std::vector<double> w, d;
    bool exact = true;
    std::uint64_t seed = 0;
};
PairList make_pairs(const PointSubset& S, std::uint64_t budget, std::uint64_t seed);

struct PairStats {
    double mean = 0.0;  // normalized p-th power mean
    double std_error = 0.0;
};
PairStats pair_objective(const PairList& pairs, const Mat& Y, double p, double diam);

}  // namespace qrect::detail
