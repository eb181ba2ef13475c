#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qrect/cubes.hpp"
#include "qrect/geom.hpp"
#include "qrect/pointset.hpp"

namespace qrect {

struct AffinePlane {
    Vec base;
    Mat basis;  // ambient x k, orthonormal columns

    int ambient() const noexcept { return static_cast<int>(base.size()); }
    int k() const noexcept { return static_cast<int>(basis.cols()); }
    void validate() const;
};

struct HorizontalPlane {
    HeisPoint base;
    Mat basis;  // 2n x k, orthonormal and isotropic columns

    int n() const noexcept { return base.n(); }
    int k() const noexcept { return static_cast<int>(basis.cols()); }
    // Throws DimensionMismatch, InvalidParameter or NonIsotropicPlane.
    void validate() const;
};

using Plane = std::variant<AffinePlane, HorizontalPlane>;

Vec project_eucl(const AffinePlane& V, VecRef x);
double dist_eucl(const AffinePlane& V, VecRef x);
// Largest singular value of (I - B2 B2^T) B1, symmetrized; frames orthonormal.
double subspace_angle(MatRef B1, MatRef B2);
double angle_eucl(const AffinePlane& V1, const AffinePlane& V2);
double angle_heis(const HorizontalPlane& V1, const HorizontalPlane& V2);

struct PlaneFit {
    AffinePlane plane;
    double beta = 0.0;
    int iterations = 0;
    bool converged = true;
    int starts = 1;
};

// Weighted L^p plane fit on the given subset; p = 2 is exact weighted PCA,
// other exponents run IRLS from PCA plus perturbed starts.
PlaneFit fit_plane(const WeightedPointCloud& cloud, std::span<const Index> subset, int k, double p,
                   int starts = 8, std::uint64_t seed = 0);

// Applies U in U(n) to the model frame e_1..e_k of C^n = R^{2n}.
Mat random_isotropic_frame(int n, int k, std::uint64_t seed);
HorizontalPlane random_isotropic(int n, int k, std::uint64_t seed, const HeisPoint& base);
// Orthonormal, omega-orthogonal frame spanning (close to) the input columns.
Mat isotropize(MatRef frame, double tol = 1e-12);
double max_isotropy_defect(MatRef frame);

HeisPoint horiz_project(const HorizontalPlane& V, const HeisPoint& p);

// Images of planes under the coordinate embeddings of pointset.hpp.
HorizontalPlane embed_plane_iota1(const HorizontalPlane& V, int n);
HorizontalPlane embed_plane_iota2(const AffinePlane& V, int n);

struct HeisPlaneDistance {
    double inf_estimate = 0.0;
    double bracket_low = 0.0;
    double bracket_high = 0.0;
};
HeisPlaneDistance heis_dist_to_plane(const HeisPoint& p, const HorizontalPlane& V);
// Exact infimum only, on raw coordinates (2n+1 entries).
double heis_plane_distance(const double* p, const HorizontalPlane& V);

struct IndependentPoints {
    std::vector<Index> indices;
    double volume = 0.0;
    double certificate = 0.0;  // volume / diam(Q)^k
};
IndependentPoints independent_points(const DyadicTree& tree, CubeId q, int k);

// Volume of the simplex spanned by the columns (k+1 columns give a k-volume).
double simplex_volume(MatRef vertices);
double dist_via_volumes(VecRef z, MatRef simplex);
// Minimal width of the simplex within its affine hull.
double simplex_min_width(MatRef vertices);

struct SmallAngleResult {
    double epsilon_measured = 0.0;
    double angle = 0.0;
    double ratio = 0.0;
    double independence = 0.0;  // half minimal width over r
};
// Columns of `points` are y_0..y_k on V1.
SmallAngleResult small_angle_check(MatRef points, const AffinePlane& V1, const AffinePlane& V2, double c);

struct VerificationReport {
    std::string name;
    std::size_t trials = 0;
    std::size_t violations = 0;
    std::size_t skipped = 0;
    double tolerance = 0.0;
    double fitted_constant = 0.0;
    std::string worst_case = "{}";  // JSON object
};

std::string to_json(const VerificationReport& r);

enum class PythagorasKind { eucl_two_plane, heis_one_plane, heis_two_plane };

struct PythagorasConfig {
    int ambient = 4;  // Euclidean dimension
    int heis_n = 2;
    int k_min = 1;
    int k_max = 3;
    double c_max = 1.0;
    double tolerance = 1e-12;
};

VerificationReport pythagoras_check(PythagorasKind kind, std::size_t trials, std::uint64_t seed,
                                    const PythagorasConfig& cfg = {});
// Checks the projection bracket of heis_dist_to_plane on random inputs.
VerificationReport projection_bracket_check(std::size_t trials, std::uint64_t seed, int n = 2,
                                            double rel_tol = 1e-6);
// Planted rotations by theta of well-spread simplices; fitted D = max ratio.
VerificationReport small_angle_suite(double theta, std::size_t trials, std::uint64_t seed, double c = 0.3,
                                     int ambient = 5);

void write_plane_json(const Plane& plane, std::ostream& out);
Plane read_plane_json(std::istream& in);

}  // namespace qrect
