#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "qrect/pointset.hpp"
#include "qrect/spatial_grid.hpp"

namespace qrect {

using CubeId = std::int32_t;
inline constexpr CubeId kNoCube = -1;

struct Cube {
    CubeId id = kNoCube;
    int level = 0;
    Index center = 0;
    std::vector<Index> members;  // ascending point indices
    CubeId parent = kNoCube;
    std::vector<CubeId> children;  // ascending ids
    double side = 1.0;
    double mass = 0.0;
    double diam = 0.0;
    bool diam_exact = true;
};

class DyadicTree {
public:
    // Coordinates are rescaled by a power of two so the diameter lies in [1,2).
    static DyadicTree build(const WeightedPointCloud& cloud, int depth, std::uint64_t seed = 0);

    const WeightedPointCloud& cloud() const noexcept { return *cloud_; }
    // Factor applied to input distances.
    double scale() const noexcept { return scale_; }
    int depth() const noexcept { return static_cast<int>(levels_.size()) - 1; }
    std::span<const CubeId> level(int j) const;
    std::span<const CubeId> roots() const { return level(0); }
    std::span<const Cube> cubes() const noexcept { return cubes_; }
    const Cube& cube(CubeId id) const;
    CubeId cube_of(int level, Index point) const;
    double measured_c0() const noexcept { return measured_c0_; }
    const SpatialGrid& grid(int level) const;

    // Copy of this tree with a replaced cube list; used to inject faults.
    DyadicTree with_cubes(std::vector<Cube> cubes) const;

private:
    DyadicTree() = default;
    void index_cubes();

    std::shared_ptr<const WeightedPointCloud> cloud_;
    double scale_ = 1.0;
    std::vector<Cube> cubes_;
    std::vector<std::vector<CubeId>> levels_;
    std::vector<std::vector<CubeId>> point_cube_;
    std::shared_ptr<const std::vector<SpatialGrid>> grids_;
    double measured_c0_ = 0.0;
};

inline DyadicTree build_tree(const WeightedPointCloud& cloud, int depth, std::uint64_t seed = 0) {
    return DyadicTree::build(cloud, depth, seed);
}

// KQ = {x : dist(x, Q) <= (K-1) diam(Q)}, ascending indices.
std::vector<Index> enlarge(const DyadicTree& tree, CubeId q, double K);
std::vector<CubeId> descendants(const DyadicTree& tree, CubeId q, int j);
// Mass of F_j(Q) accumulated in tree order (children in id order, recursively).
double sum_of_parts(const DyadicTree& tree, CubeId q, int j);

struct CubePatch {
    int m = 0;        // same-level cubes meeting 2Q
    double K0 = 1.0;  // those cubes lie inside K0 Q
};
CubePatch cube_patch(const DyadicTree& tree, CubeId q);
std::vector<CubeId> patch_cover(const DyadicTree& tree, CubeId q);

struct AxiomReport {
    bool partition_ok = false;
    bool nesting_ok = false;
    bool unique_ancestor_ok = false;
    bool sum_of_parts_ok = false;
    double diam_bound_c0 = 0.0;
    double center_ball_c0 = 0.0;
    double measured_c0 = 0.0;
    double mass_lower = 0.0;  // min mu(Q) / side^s
    double mass_upper = 0.0;  // max mu(Q) / side^s
    double descendant_constant = 0.0;  // max card F_j(Q) / 2^{s j}
    int patch_m = 0;
    double patch_K0 = 1.0;
    double flat_sum_deviation = 0.0;  // relative, for index-order summation
    bool diam_exact = true;
};

AxiomReport verify_axioms(const DyadicTree& tree, bool with_patch = true);

void write_tree_json(const DyadicTree& tree, std::ostream& out);

}  // namespace qrect
