#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "qrect/coefficients.hpp"
#include "qrect/cubes.hpp"
#include "qrect/planes.hpp"

namespace qrect {

struct CoefficientSpec {
    CoefficientKind kind = CoefficientKind::beta_p;
    double q = 2.0;     // exponent inside the coefficient
    int k = 1;
    double K = 2.0;     // enlargement of each cube
    int starts = 1;
    std::uint64_t pair_budget = kDefaultPairBudget;
    std::uint64_t seed = 0;
};

// One record per cube id; skipped cubes carry value 0 and skipped[id] = true.
struct CubeCoefficients {
    CoefficientSpec spec;
    std::vector<CoefficientRecord> records;
    std::vector<char> skipped;
    std::vector<char> evaluated;
    std::size_t skipped_count = 0;

    double value(CubeId id) const { return records[static_cast<std::size_t>(id)].value; }
};

// Evaluates the coefficient on K Q for every cube with level <= max_level (all when negative).
CubeCoefficients evaluate_cubes(const DyadicTree& tree, const CoefficientSpec& spec, int threads = 1,
                                int max_level = -1);

struct CarlesonRow {
    CubeId root = kNoCube;
    double sum = 0.0;
    double mass = 0.0;
    double ratio = 0.0;
};

struct CarlesonReport {
    CoefficientKind kind = CoefficientKind::beta_p;
    double q = 2.0;
    double p = 2.0;
    int depth = 0;
    std::vector<CarlesonRow> rows;  // every cube with level <= depth, in id order
    double M_estimate = 0.0;
    CubeId witness = kNoCube;
    std::vector<double> level_sums;  // sum over level-j cubes of h(2Q)^p mu(Q)
    double root_ratio = 0.0;         // level-0 sums over level-0 mass
    std::size_t skipped = 0;
};

// Sum over descendants of q down to max_level (tree depth when negative).
CarlesonRow glem_sum(const DyadicTree& tree, const CubeCoefficients& h, double p, CubeId q, int max_level = -1);
CarlesonReport glem_constant(const DyadicTree& tree, const CubeCoefficients& h, double p, int max_level = -1);

struct ComparisonRow {
    CubeId id = kNoCube;
    int level = 0;
    double beta2 = 0.0;
    double iota1 = 0.0;
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    double fitted_C = 0.0;  // max beta2^2 / iota1
    CubeId C_witness = kNoCube;
    double max_pointwise_ratio = 0.0;  // max iota1 / beta2^2
    CubeId ratio_witness = kNoCube;
    double M_beta = 0.0;
    double M_iota = 0.0;
    std::size_t flat_skipped = 0;
};

// Cubes with beta2^2 below flat_floor are skipped in both ratios.
ComparisonReport compare_beta_iota(const DyadicTree& tree, const CubeCoefficients& beta2,
                                   const CubeCoefficients& iota1, int max_level = -1, double flat_floor = 1e-14);
ComparisonReport compare_beta_iota(const DyadicTree& tree, int threads = 1, std::uint64_t seed = 0,
                                   std::uint64_t pair_budget = kDefaultPairBudget);

struct PackingRow {
    CubeId root = kNoCube;
    double lhs = 0.0;
    double rhs_sum = 0.0;
    double fitted_Cbar = 0.0;
    CubePatch patch;
    bool violation = false;
};

// iota holds iota_p on 2Q, beta holds beta_{2p} on K0 Q; sums stop at max_level.
PackingRow weighted_packing_check(const DyadicTree& tree, CubeId q0, double p, const CubeCoefficients& iota,
                                  const CubeCoefficients& beta, int max_level = -1, double floor = 1e-12);

struct PackingReport {
    double K0 = 1.0;
    int max_level = 0;
    std::vector<PackingRow> rows;
    double fitted_Cbar = 0.0;
    CubeId witness = kNoCube;
    std::size_t violations = 0;
};

// Largest measured patch constant over cubes with level <= max_level.
double global_patch_constant(const DyadicTree& tree, int max_level = -1);
// Roots are cubes at least three generations above max_level.
PackingReport packing_report(const DyadicTree& tree, double p, const CubeCoefficients& iota,
                             const CubeCoefficients& beta, int max_level = -1);

struct TiltingOptions {
    double p = 1.0;
    int k = 1;
    double lambda0 = 4.0;
    double lambda1 = 2.0;
    int starts = 1;
    std::uint64_t seed = 0;
    int threads = 1;
    int max_level = -1;
    double angle_tol = 1e-6;
};

struct TiltingReport {
    VerificationReport summary;
    std::vector<double> level_constants;  // max ratio per level of the smaller cube
    std::size_t pairs = 0;
};

TiltingReport tilting_check(const DyadicTree& tree, const TiltingOptions& opt);

struct ScalingRow {
    double eps = 0.0;
    std::size_t points = 0;
    double beta = 0.0;      // at the lower line, exact
    double iota = 0.0;      // at the lower line, exact pair sum
    double iota_norm = 0.0;  // iota / (eps^2 ln(1/eps))
    double beta_norm = 0.0;  // beta / eps
    double beta_inf_estimate = 0.0;
    double iota_inf_estimate = 0.0;
    double seconds = 0.0;
};

std::vector<ScalingRow> scaling_experiment(std::span<const double> eps_list, double q,
                                           std::uint64_t pair_budget = kDefaultPairBudget, std::uint64_t seed = 0,
                                           int threads = 1, bool with_infimum = true);

void write_carleson_csv(const CarlesonReport& report, std::ostream& out);
void write_carleson_meta(const CarlesonReport& report, std::uint64_t seed, std::ostream& out);
void write_scaling_csv(std::span<const ScalingRow> rows, std::ostream& out);

}  // namespace qrect
