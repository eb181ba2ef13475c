#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qrect/cubes.hpp"
#include "qrect/planes.hpp"
#include "qrect/pointset.hpp"

namespace qrect {

inline constexpr std::uint64_t kDefaultPairBudget = 2'000'000;

// Weighted subset of a cloud. The cloud must outlive the subset.
class PointSubset {
public:
    PointSubset(const WeightedPointCloud& cloud, std::vector<Index> indices);
    static PointSubset all(const WeightedPointCloud& cloud);

    const WeightedPointCloud& cloud() const noexcept { return *cloud_; }
    std::span<const Index> indices() const noexcept { return indices_; }
    Index size() const noexcept { return static_cast<Index>(indices_.size()); }
    double mass() const noexcept { return mass_; }
    const Diameter& diam() const noexcept { return diam_; }
    const double* point(Index i) const { return cloud_->points.col(indices_[static_cast<std::size_t>(i)]).data(); }
    double weight(Index i) const { return cloud_->weights(indices_[static_cast<std::size_t>(i)]); }
    // Throws TooFewPoints, DegenerateDiameter or ScaleBelowResolution.
    void require_usable(Index min_points = 2) const;

private:
    const WeightedPointCloud* cloud_;
    std::vector<Index> indices_;
    double mass_ = 0.0;
    Diameter diam_;
};

enum class CoefficientKind { beta_p, beta_inf, iota_p, iota_map };
std::string kind_name(CoefficientKind kind);
CoefficientKind parse_kind(const std::string& name);

struct Estimator {
    bool exact = true;
    std::uint64_t pairs = 0;
    std::uint64_t seed = 0;
    double std_error = 0.0;  // of the normalized p-th power mean, sampled only
};

struct CoefficientRecord {
    CubeId cube_id = kNoCube;
    CoefficientKind kind = CoefficientKind::beta_p;
    double p = 2.0;
    double value = 0.0;
    std::optional<Plane> plane;
    Estimator estimator;
    bool diam_exact = true;
    bool upper_bound = false;  // infimum estimators
    std::string optimizer;
};

// Heisenberg distance to a plane: exact infimum, or distance to the horizontal projection.
enum class HeisDistance { infimum, projection };

double point_plane_distance(const Plane& V, const double* x, HeisDistance mode = HeisDistance::infimum);

double beta_p_V(const PointSubset& S, const Plane& V, double p, HeisDistance mode = HeisDistance::infimum);
double beta_inf_V(const PointSubset& S, const Plane& V, HeisDistance mode = HeisDistance::infimum);

CoefficientRecord beta_p(const PointSubset& S, int k, double p, int starts = 8, std::uint64_t seed = 0);

// Exact when |S|^2 <= pair_budget or pair_budget == 0; otherwise Monte Carlo.
CoefficientRecord iota_p_V(const PointSubset& S, const Plane& V, double p,
                           std::uint64_t pair_budget = kDefaultPairBudget, std::uint64_t seed = 0,
                           int threads = 1);
// Direction-only search started from the beta_2 optimal frame.
CoefficientRecord iota_p(const PointSubset& S, int k, double p, int starts = 2, std::uint64_t seed = 0,
                         std::uint64_t pair_budget = kDefaultPairBudget);
CoefficientRecord iota_map_eucl(const PointSubset& S, int k, double p, int iters = 200, std::uint64_t seed = 0,
                                std::uint64_t pair_budget = kDefaultPairBudget);

// inf over k-planes of sup distance; extra initial planes are always tried.
CoefficientRecord beta_inf(const PointSubset& S, int k, int starts = 8, std::uint64_t seed = 0,
                           std::span<const Plane> initial = {});

// Exact checks of iota_{p,V} <= 2 beta_{p,V} on random instances of both metrics.
VerificationReport iota_beta_check(std::size_t trials, std::uint64_t seed, double rel_tol = 1e-9);

struct EmbeddingComparison {
    VerificationReport report;  // violations: target beta exceeds source beta
    double source_over_target = 0.0;
    double target_over_source = 0.0;
};

struct EmbeddingReport {
    EmbeddingComparison heis_line;    // first Heisenberg group into H^n
    EmbeddingComparison planar_line;  // the plane into H^n
};

// beta_inf for lines before and after the coordinate embeddings into H^n.
EmbeddingReport embedding_check(std::size_t sets, std::uint64_t seed, int n = 3, int starts = 8);

void write_records_csv(std::span<const CoefficientRecord> records, std::ostream& out);
void write_planes_json(std::span<const CoefficientRecord> records, std::ostream& out);

}  // namespace qrect
