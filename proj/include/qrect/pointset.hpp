#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "qrect/geom.hpp"

namespace qrect {

struct WeightedPointCloud {
    MetricSpec metric;
    Mat points;  // one column per point, metric.dim() rows
    Vec weights;
    double s = 1.0;
    double h = 1e-3;
    std::string weight_convention = "quadrature";

    Index size() const noexcept { return points.cols(); }
    double total_mass() const { return weights.sum(); }
    // Throws InvalidParameter / DimensionMismatch when invariants fail.
    void validate() const;
};

struct Diameter {
    double value = 0.0;
    bool exact = true;
};

inline constexpr Index kExactDiameterLimit = 4096;

Diameter diameter(const WeightedPointCloud& cloud);
Diameter diameter(const WeightedPointCloud& cloud, std::span<const Index> subset);

// Scales distances by `factor` (Euclidean scaling or Heisenberg dilation);
// weights scale by factor^s and h by factor.
WeightedPointCloud rescaled(const WeightedPointCloud& cloud, double factor);
WeightedPointCloud subset_cloud(const WeightedPointCloud& cloud, std::span<const Index> subset);

enum class Family {
    segment,
    kplane_patch,
    circle,
    parallel_lines,
    lipschitz_graph,
    turning_curve,
    heis_horizontal_line,
    heis_lift,
};

std::string family_name(Family f);
Family parse_family(const std::string& name);

struct GeneratorSpec {
    Family family = Family::segment;
    double h = 1e-3;
    int n = 2;              // ambient dimension (Euclidean n, or Heisenberg n)
    int k = 1;              // patch dimension
    double length = 1.0;    // segment, patch side, horizontal line
    double radius = 1.0;    // circle and circular lift
    double eps = 0.1;       // parallel lines gap factor
    double r = 1.0;         // parallel lines half-length
    double lipschitz = 0.2;
    int terms = 6;          // sinusoid count of the Lipschitz graph
    double turn_c = 0.5;    // turning angles c * m^(-1/turn_p)
    double turn_p = 2.0;
    int generations = 10;
    std::vector<double> angles;  // explicit turning angles; overrides the preset
    std::string curve = "circle";  // lifted planar curve: circle | segment
    std::uint64_t seed = 0;
};

WeightedPointCloud generate(const GeneratorSpec& spec);

struct RegularityReport {
    double C_lower = 0.0;
    double C_upper = 0.0;
    std::size_t samples = 0;
    double spread = 0.0;
    bool flagged = false;
    double r_min = 0.0;
    double r_max = 0.0;
};

// Samples balls with centers drawn by mass and log-uniform radii in
// [max(10h, r_min), diam/2]. An explicit r_min below 10h is refused.
RegularityReport estimate_regularity(const WeightedPointCloud& cloud, int trials, std::uint64_t seed,
                                     double spread_bound = 10.0, double r_min = 0.0);

WeightedPointCloud embed_iota1(const WeightedPointCloud& cloud, int n);
WeightedPointCloud embed_iota2(const WeightedPointCloud& cloud, int n);

// CSV by default, JSON when the extension is ".json".
WeightedPointCloud read_cloud(const std::filesystem::path& path);
void write_cloud(const WeightedPointCloud& cloud, const std::filesystem::path& path);
WeightedPointCloud parse_cloud_csv(std::istream& in);
void write_cloud_csv(const WeightedPointCloud& cloud, std::ostream& out);

}  // namespace qrect
