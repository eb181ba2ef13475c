#include "qrect/carleson.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <limits>
#include <ostream>

#include "qrect/util.hpp"

namespace qrect {

namespace {

int resolve_level(const DyadicTree& tree, int max_level) {
    if (max_level < 0 || max_level > tree.depth()) return tree.depth();
    return max_level;
}

double h_value(const CubeCoefficients& h, CubeId id) {
    const auto i = static_cast<std::size_t>(id);
    if (i >= h.records.size() || !h.evaluated[i]) throw InvalidParameter("coefficients", "cube was not evaluated");
    return h.skipped[i] ? 0.0 : h.records[i].value;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

CubeCoefficients evaluate_cubes(const DyadicTree& tree, const CoefficientSpec& spec, int threads, int max_level) {
    const int top = resolve_level(tree, max_level);
    const auto cubes = tree.cubes();
    CubeCoefficients out;
    out.spec = spec;
    out.records.resize(cubes.size());
    out.skipped.assign(cubes.size(), 0);
    out.evaluated.assign(cubes.size(), 0);
    std::vector<CubeId> work;
    for (const Cube& c : cubes)
        if (c.level <= top) work.push_back(c.id);

    const WeightedPointCloud& cloud = tree.cloud();
    parallel_for(work.size(), threads, [&](std::size_t w) {
        const CubeId id = work[w];
        const auto slot = static_cast<std::size_t>(id);
        out.evaluated[slot] = 1;
        CoefficientRecord& rec = out.records[slot];
        rec.cube_id = id;
        rec.kind = spec.kind;
        rec.p = spec.q;
        PointSubset S(cloud, enlarge(tree, id, spec.K));
        if (S.size() < spec.k + 2 || !(S.diam().value >= 10.0 * cloud.h)) {
            out.skipped[slot] = 1;
            return;
        }
        const std::uint64_t seed = derive_seed(spec.seed, static_cast<std::uint64_t>(id));
        switch (spec.kind) {
            case CoefficientKind::beta_p: rec = beta_p(S, spec.k, spec.q, spec.starts, seed); break;
            case CoefficientKind::beta_inf: rec = beta_inf(S, spec.k, spec.starts, seed); break;
            case CoefficientKind::iota_p: rec = iota_p(S, spec.k, spec.q, spec.starts, seed, spec.pair_budget); break;
            case CoefficientKind::iota_map: rec = iota_map_eucl(S, spec.k, spec.q, 200, seed, spec.pair_budget); break;
        }
        rec.cube_id = id;
    });
    out.skipped_count = static_cast<std::size_t>(std::count(out.skipped.begin(), out.skipped.end(), 1));
    return out;
}

CarlesonRow glem_sum(const DyadicTree& tree, const CubeCoefficients& h, double p, CubeId q, int max_level) {
    const int top = resolve_level(tree, max_level);
    const Cube& root = tree.cube(q);
    if (root.level > top) throw InvalidParameter("max_level", "root lies below the truncation level");
    auto rec = [&](auto&& self, CubeId id) -> double {
        const Cube& c = tree.cube(id);
        double s = std::pow(h_value(h, id), p) * c.mass;
        if (c.level < top)
            for (CubeId ch : c.children) s += self(self, ch);
        return s;
    };
    CarlesonRow row;
    row.root = q;
    row.sum = rec(rec, q);
    row.mass = root.mass;
    row.ratio = root.mass > 0.0 ? row.sum / root.mass : 0.0;
    return row;
}

CarlesonReport glem_constant(const DyadicTree& tree, const CubeCoefficients& h, double p, int max_level) {
    const int top = resolve_level(tree, max_level);
    const auto cubes = tree.cubes();
    std::vector<double> sums(cubes.size(), 0.0);
    CarlesonReport rep;
    rep.kind = h.spec.kind;
    rep.q = h.spec.q;
    rep.p = p;
    rep.depth = top;
    rep.level_sums.assign(static_cast<std::size_t>(top) + 1, 0.0);
    for (int j = top; j >= 0; --j) {
        for (CubeId id : tree.level(j)) {
            const Cube& c = tree.cube(id);
            const double own = std::pow(h_value(h, id), p) * c.mass;
            double s = own;
            if (j < top)
                for (CubeId ch : c.children) s += sums[static_cast<std::size_t>(ch)];
            sums[static_cast<std::size_t>(id)] = s;
        }
    }
    for (int j = 0; j <= top; ++j)
        for (CubeId id : tree.level(j)) {
            rep.level_sums[static_cast<std::size_t>(j)] += std::pow(h_value(h, id), p) * tree.cube(id).mass;
            if (h.skipped[static_cast<std::size_t>(id)]) ++rep.skipped;
        }
    double root_sum = 0.0, root_mass = 0.0;
    for (const Cube& c : cubes) {
        if (c.level > top) continue;
        CarlesonRow row{c.id, sums[static_cast<std::size_t>(c.id)], c.mass, 0.0};
        row.ratio = c.mass > 0.0 ? row.sum / c.mass : 0.0;
        if (row.ratio > rep.M_estimate || rep.witness == kNoCube) {
            rep.M_estimate = std::max(rep.M_estimate, row.ratio);
            rep.witness = c.id;
        }
        if (c.level == 0) {
            root_sum += row.sum;
            root_mass += c.mass;
        }
        rep.rows.push_back(row);
    }
    rep.root_ratio = root_mass > 0.0 ? root_sum / root_mass : 0.0;
    return rep;
}

ComparisonReport compare_beta_iota(const DyadicTree& tree, const CubeCoefficients& beta2, const CubeCoefficients& iota1,
                                   int max_level, double flat_floor) {
    const int top = resolve_level(tree, max_level);
    ComparisonReport rep;
    for (const Cube& c : tree.cubes()) {
        if (c.level > top) continue;
        const auto i = static_cast<std::size_t>(c.id);
        if (beta2.skipped[i] || iota1.skipped[i]) continue;
        const double b = h_value(beta2, c.id), io = h_value(iota1, c.id);
        rep.rows.push_back({c.id, c.level, b, io});
        const double b2 = b * b;
        if (b2 <= flat_floor) {
            ++rep.flat_skipped;
            continue;
        }
        const double C = io > 0.0 ? b2 / io : std::numeric_limits<double>::infinity();
        if (C > rep.fitted_C || rep.C_witness == kNoCube) {
            rep.fitted_C = std::max(rep.fitted_C, C);
            rep.C_witness = c.id;
        }
        const double r = io / b2;
        if (r > rep.max_pointwise_ratio || rep.ratio_witness == kNoCube) {
            rep.max_pointwise_ratio = std::max(rep.max_pointwise_ratio, r);
            rep.ratio_witness = c.id;
        }
    }
    rep.M_beta = glem_constant(tree, beta2, 2.0, top).M_estimate;
    rep.M_iota = glem_constant(tree, iota1, 1.0, top).M_estimate;
    return rep;
}

ComparisonReport compare_beta_iota(const DyadicTree& tree, int threads, std::uint64_t seed, std::uint64_t pair_budget) {
    if (tree.cloud().metric.is_heisenberg()) throw MetricUnsupported("compare_beta_iota needs a Euclidean tree");
    CoefficientSpec b{CoefficientKind::beta_p, 2.0, 1, 2.0, 1, pair_budget, seed};
    CoefficientSpec i{CoefficientKind::iota_p, 1.0, 1, 2.0, 1, pair_budget, seed};
    const auto beta2 = evaluate_cubes(tree, b, threads);
    const auto iota1 = evaluate_cubes(tree, i, threads);
    return compare_beta_iota(tree, beta2, iota1);
}

double global_patch_constant(const DyadicTree& tree, int max_level) {
    const int top = resolve_level(tree, max_level);
    double K0 = 1.0;
    for (const Cube& c : tree.cubes())
        if (c.level <= top) K0 = std::max(K0, cube_patch(tree, c.id).K0);
    return K0;
}

PackingRow weighted_packing_check(const DyadicTree& tree, CubeId q0, double p, const CubeCoefficients& iota,
                                  const CubeCoefficients& beta, int max_level, double floor) {
    const int top = resolve_level(tree, max_level);
    const Cube& root = tree.cube(q0);
    if (root.level + 3 > top) throw DepthExceeded("packing root needs three generations below it");
    const double s = tree.cloud().s;
    PackingRow row;
    row.root = q0;
    row.patch = cube_patch(tree, q0);
    row.lhs = root.mass * std::pow(h_value(iota, q0), p);
    if (row.lhs <= floor * root.mass) row.lhs = 0.0;

    auto accumulate = [&](auto&& self, CubeId id, int gen) -> double {
        const Cube& c = tree.cube(id);
        double acc = std::pow(2.0, -s * gen) * c.mass * std::pow(h_value(beta, id), 2.0 * p);
        if (c.level < top)
            for (CubeId ch : c.children) acc += self(self, ch, gen + 1);
        return acc;
    };
    for (CubeId cover : patch_cover(tree, q0)) row.rhs_sum += accumulate(accumulate, cover, 0);

    if (row.rhs_sum > 0.0) {
        row.fitted_Cbar = row.lhs / row.rhs_sum;
    } else if (row.lhs > 0.0) {
        row.fitted_Cbar = std::numeric_limits<double>::infinity();
        row.violation = true;
    }
    return row;
}

PackingReport packing_report(const DyadicTree& tree, double p, const CubeCoefficients& iota,
                             const CubeCoefficients& beta, int max_level) {
    const int top = resolve_level(tree, max_level);
    PackingReport rep;
    rep.K0 = beta.spec.K;
    rep.max_level = top;
    for (const Cube& c : tree.cubes()) {
        if (c.level + 3 > top) continue;
        PackingRow row = weighted_packing_check(tree, c.id, p, iota, beta, top);
        if (row.violation) ++rep.violations;
        if (row.fitted_Cbar > rep.fitted_Cbar || rep.witness == kNoCube) {
            rep.fitted_Cbar = std::max(rep.fitted_Cbar, row.fitted_Cbar);
            rep.witness = c.id;
        }
        rep.rows.push_back(row);
    }
    return rep;
}

TiltingReport tilting_check(const DyadicTree& tree, const TiltingOptions& opt) {
    const int top = resolve_level(tree, opt.max_level);
    CoefficientSpec spec{CoefficientKind::beta_p, opt.p, opt.k, opt.lambda0, opt.starts, kDefaultPairBudget, opt.seed};
    const auto big = evaluate_cubes(tree, spec, opt.threads, top);
    spec.K = opt.lambda1;
    const auto small = evaluate_cubes(tree, spec, opt.threads, top);
    const bool heis = tree.cloud().metric.is_heisenberg();

    std::vector<std::vector<Index>> set0(tree.cubes().size()), set1(tree.cubes().size());
    for (const Cube& c : tree.cubes()) {
        if (c.level > top) continue;
        set0[static_cast<std::size_t>(c.id)] = enlarge(tree, c.id, opt.lambda0);
        set1[static_cast<std::size_t>(c.id)] = enlarge(tree, c.id, opt.lambda1);
    }

    TiltingReport rep;
    rep.summary.name = "tilting";
    rep.level_constants.assign(static_cast<std::size_t>(top) + 1, 0.0);
    nlohmann::json worst = nlohmann::json::object();
    const double scale = std::pow(opt.lambda0, opt.k + 1);
    auto consider = [&](CubeId a, CubeId b) {
        const auto ia = static_cast<std::size_t>(a), ib = static_cast<std::size_t>(b);
        if (!std::includes(set0[ia].begin(), set0[ia].end(), set1[ib].begin(), set1[ib].end())) return;
        ++rep.pairs;
        ++rep.summary.trials;
        if (big.skipped[ia] || small.skipped[ib]) {
            ++rep.summary.skipped;
            return;
        }
        const Plane& V0 = *big.records[ia].plane;
        const Plane& V1 = *small.records[ib].plane;
        const double angle = heis ? angle_heis(std::get<HorizontalPlane>(V0), std::get<HorizontalPlane>(V1))
                                  : angle_eucl(std::get<AffinePlane>(V0), std::get<AffinePlane>(V1));
        const double denom = scale * (big.records[ia].value + small.records[ib].value);
        if (denom < 1e-12 && angle <= opt.angle_tol) {
            ++rep.summary.skipped;
            return;
        }
        const double ratio = denom > 0.0 ? angle / denom : std::numeric_limits<double>::infinity();
        auto& lc = rep.level_constants[static_cast<std::size_t>(tree.cube(b).level)];
        lc = std::max(lc, ratio);
        if (ratio > rep.summary.fitted_constant || worst.empty()) {
            rep.summary.fitted_constant = std::max(rep.summary.fitted_constant, ratio);
            worst = {{"cube0", a}, {"cube1", b}, {"angle", angle}, {"denominator", denom}, {"ratio", ratio}};
        }
    };
    for (const Cube& c : tree.cubes()) {
        if (c.level > top) continue;
        if (c.level < top)
            for (CubeId ch : c.children) consider(c.id, ch);
        for (CubeId x : c.children)
            for (CubeId y : c.children)
                if (x != y && c.level < top) consider(x, y);
    }
    rep.summary.worst_case = worst.dump();
    return rep;
}

void write_carleson_csv(const CarlesonReport& report, std::ostream& out) {
    out << "root_id,sum,mass,ratio\n";
    for (const auto& r : report.rows) out << r.root << ',' << fmt(r.sum) << ',' << fmt(r.mass) << ',' << fmt(r.ratio) << '\n';
}

void write_carleson_meta(const CarlesonReport& report, std::uint64_t seed, std::ostream& out) {
    nlohmann::json j{{"kind", kind_name(report.kind)},
                     {"q", report.q},
                     {"p", report.p},
                     {"depth", report.depth},
                     {"skipped_cubes", report.skipped},
                     {"seed", seed},
                     {"M_estimate", report.M_estimate},
                     {"witness_root", report.witness},
                     {"root_ratio", report.root_ratio},
                     {"level_sums", report.level_sums}};
    out << j.dump(1) << '\n';
}

void write_scaling_csv(std::span<const ScalingRow> rows, std::ostream& out) {
    out << "eps,beta,iota,iota_norm,beta_norm\n";
    for (const auto& r : rows)
        out << fmt(r.eps) << ',' << fmt(r.beta) << ',' << fmt(r.iota) << ',' << fmt(r.iota_norm) << ','
            << fmt(r.beta_norm) << '\n';
}

}  // namespace qrect
