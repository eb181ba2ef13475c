#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "qrect/carleson.hpp"

using namespace qrect;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int threads() {
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

double spread_of(const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
}

// A dataset with its tree and the per-cube coefficients used by several criteria.
struct Dataset {
    std::string name;
    std::unique_ptr<WeightedPointCloud> cloud;
    std::unique_ptr<DyadicTree> tree;
    std::unique_ptr<CubeCoefficients> beta2;
    std::unique_ptr<CubeCoefficients> iota1;
    std::unique_ptr<CubeCoefficients> beta_packing;
    double K0 = 1.0;
    double build_seconds = 0.0;
};

Dataset make_dataset(const std::string& name, const GeneratorSpec& g, int depth, int k, bool with_iota,
                     std::uint64_t pair_budget) {
    const auto t0 = Clock::now();
    Dataset d;
    d.name = name;
    d.cloud = std::make_unique<WeightedPointCloud>(generate(g));
    d.tree = std::make_unique<DyadicTree>(build_tree(*d.cloud, depth, 0));
    CoefficientSpec b;
    b.kind = CoefficientKind::beta_p;
    b.q = 2.0;
    b.k = k;
    d.beta2 = std::make_unique<CubeCoefficients>(evaluate_cubes(*d.tree, b, threads()));
    if (with_iota) {
        CoefficientSpec i;
        i.kind = CoefficientKind::iota_p;
        i.q = 1.0;
        i.k = k;
        i.pair_budget = pair_budget;
        d.iota1 = std::make_unique<CubeCoefficients>(evaluate_cubes(*d.tree, i, threads()));
    }
    d.build_seconds = seconds_since(t0);
    return d;
}

void ensure_packing_beta(Dataset& d, int k) {
    if (d.beta_packing) return;
    d.K0 = global_patch_constant(*d.tree);
    CoefficientSpec b;
    b.kind = CoefficientKind::beta_p;
    b.q = 2.0;
    b.k = k;
    b.K = d.K0;
    d.beta_packing = std::make_unique<CubeCoefficients>(evaluate_cubes(*d.tree, b, threads()));
}

GeneratorSpec lipschitz_spec() {
    GeneratorSpec g;
    g.family = Family::lipschitz_graph;
    g.lipschitz = 0.2;
    g.h = 1.5e-4;
    return g;
}

GeneratorSpec lines_spec() {
    GeneratorSpec g;
    g.family = Family::parallel_lines;
    g.eps = 0.01;
    g.r = 1.0;
    g.h = 5e-4;
    return g;
}

Dataset& lipschitz() {
    static Dataset d = make_dataset("lipschitz_graph", lipschitz_spec(), 9, 1, true, 200000);
    return d;
}

Dataset& lines() {
    static Dataset d = make_dataset("parallel_lines", lines_spec(), 8, 1, true, 200000);
    return d;
}

Outcome scaling_law() {
    const std::vector<double> eps{1e-1, 3e-2, 1e-2, 3e-3};
    const auto t0 = Clock::now();
    const auto rows = scaling_experiment(eps, 1.0, 2'000'000, 0, threads(), false);
    const double secs = seconds_since(t0);
    bool ok = secs <= 120.0;
    std::vector<double> norms;
    std::string detail;
    double prev_ratio = 0.0;
    for (const auto& r : rows) {
        const double ratio = r.iota / (r.beta * r.beta);
        ok = ok && r.beta_norm >= 0.1 && r.beta_norm <= 1.0 && r.iota_norm >= 0.05 && ratio > prev_ratio;
        prev_ratio = ratio;
        norms.push_back(r.iota_norm);
        detail += fmt("eps=%g", r.eps) + fmt(" beta/eps=%.4f", r.beta_norm) + fmt(" iota_norm=%.4f", r.iota_norm) +
                  fmt(" iota/beta^2=%.3f; ", ratio);
    }
    ok = ok && spread_of(norms) <= 4.0;
    return {ok, detail + fmt("spread=%.3f", spread_of(norms))};
}

Outcome iota_two_beta() {
    const auto rep = iota_beta_check(1000, 1, 1e-9);
    return {rep.trials == 1000 && rep.violations == 0,
            "trials=" + std::to_string(rep.trials) + " violations=" + std::to_string(rep.violations) +
                fmt(" max iota/beta=%.4f", rep.fitted_constant)};
}

Outcome dyadic_axioms() {
    struct Case {
        Family family;
        double h;
        int n;
        int k;
    };
    const std::vector<Case> cases{{Family::segment, 1e-4, 2, 1},           {Family::kplane_patch, 8e-3, 3, 2},
                                  {Family::circle, 5e-4, 2, 1},            {Family::parallel_lines, 2.5e-4, 2, 1},
                                  {Family::lipschitz_graph, 1e-4, 2, 1},   {Family::turning_curve, 1e-4, 2, 1},
                                  {Family::heis_horizontal_line, 1e-4, 1, 1}, {Family::heis_lift, 5e-4, 1, 1}};
    bool ok = true;
    std::string detail;
    for (const auto& c : cases) {
        const auto t0 = Clock::now();
        GeneratorSpec g;
        g.family = c.family;
        g.h = c.h;
        g.n = c.n;
        g.k = c.k;
        const auto cloud = generate(g);
        int depth = 10;
        try {
            (void)build_tree(cloud, depth, 0);
        } catch (const ScaleBelowResolution& e) {
            depth = e.level() - 1;
        }
        const auto tree = build_tree(cloud, depth, 0);
        const auto ax = verify_axioms(tree);
        const double secs = seconds_since(t0);
        const bool good = cloud.size() <= 20000 && ax.partition_ok && ax.nesting_ok && ax.unique_ancestor_ok &&
                          ax.sum_of_parts_ok && ax.measured_c0 > 0.0 && secs <= 60.0;
        ok = ok && good;
        detail += family_name(c.family) + "(N=" + std::to_string(cloud.size()) + ",depth=" + std::to_string(depth) +
                  fmt(",c0=%.3g", ax.measured_c0) + fmt(",%.1fs)", secs) + (good ? " " : "! ");
    }
    return {ok, detail};
}

Outcome eucl_pythagoras() {
    const auto t0 = Clock::now();
    PythagorasConfig cfg;
    cfg.ambient = 4;
    cfg.tolerance = 1e-12;
    const auto rep = pythagoras_check(PythagorasKind::eucl_two_plane, 10000, 4, cfg);
    const double secs = seconds_since(t0);
    return {rep.trials == 10000 && rep.violations == 0 && secs <= 10.0,
            "trials=" + std::to_string(rep.trials) + " violations=" + std::to_string(rep.violations) +
                fmt(" max excess=%.3g", rep.fitted_constant)};
}

Outcome projection_bracket() {
    const auto t0 = Clock::now();
    const auto rep = projection_bracket_check(1000, 5, 2, 1e-6);
    const double secs = seconds_since(t0);
    return {rep.trials == 1000 && rep.violations == 0 && secs <= 30.0,
            "trials=" + std::to_string(rep.trials) + " violations=" + std::to_string(rep.violations) +
                fmt(" min inf/proj=%.4f", rep.fitted_constant)};
}

Outcome heis_pythagoras() {
    const auto t0 = Clock::now();
    PythagorasConfig cfg;
    cfg.heis_n = 2;
    cfg.c_max = 1.0;
    bool ok = true;
    std::string detail;
    for (auto kind : {PythagorasKind::heis_one_plane, PythagorasKind::heis_two_plane}) {
        const auto a = pythagoras_check(kind, 5000, 11, cfg);
        const auto b = pythagoras_check(kind, 5000, 12, cfg);
        const double fitted = std::max(a.fitted_constant, b.fitted_constant);
        const double ratio = std::max(a.fitted_constant, b.fitted_constant) /
                             std::min(a.fitted_constant, b.fitted_constant);
        ok = ok && std::isfinite(fitted) && fitted <= 100.0 && ratio <= 2.0 && a.violations == 0 &&
             b.violations == 0;
        detail += a.name + fmt(": N=%.4f", fitted) + fmt(" batches %.4f", a.fitted_constant) +
                  fmt("/%.4f; ", b.fitted_constant);
    }
    const double secs = seconds_since(t0);
    return {ok && secs <= 60.0, detail + fmt("%.1fs", secs)};
}

Outcome carleson_dichotomy() {
    bool ok = true;
    std::string detail;

    {
        const auto t0 = Clock::now();
        GeneratorSpec g;
        g.family = Family::kplane_patch;
        g.n = 3;
        g.k = 2;
        g.h = 0.01;
        Dataset flat = make_dataset("kplane_patch", g, 3, 2, true, 200000);
        const double mb = glem_constant(*flat.tree, *flat.beta2, 2.0).M_estimate;
        const double mi = glem_constant(*flat.tree, *flat.iota1, 1.0).M_estimate;
        const double secs = seconds_since(t0);
        const bool good = mb <= 1e-6 && mi <= 1e-6 && secs <= 300.0;
        ok = ok && good;
        detail += fmt("patch: M_beta=%.2g", mb) + fmt(" M_iota=%.2g", mi) + fmt(" (%.1fs); ", secs);
    }
    {
        Dataset& lip = lipschitz();
        const auto b6 = glem_constant(*lip.tree, *lip.beta2, 2.0, 6).M_estimate;
        const auto b9 = glem_constant(*lip.tree, *lip.beta2, 2.0, 9).M_estimate;
        const auto i6 = glem_constant(*lip.tree, *lip.iota1, 1.0, 6).M_estimate;
        const auto i9 = glem_constant(*lip.tree, *lip.iota1, 1.0, 9).M_estimate;
        const bool good = std::isfinite(b9) && std::isfinite(i9) && b6 > 0.0 && i6 > 0.0 && b9 / b6 <= 2.0 &&
                          i9 / i6 <= 2.0 && lip.build_seconds <= 300.0;
        ok = ok && good;
        detail += fmt("lipschitz: M_beta %.3g", b6) + fmt("->%.3g", b9) + fmt(" M_iota %.3g", i6) +
                  fmt("->%.3g", i9) + fmt(" (%.1fs); ", lip.build_seconds);
    }
    {
        const auto t0 = Clock::now();
        GeneratorSpec g;
        g.family = Family::turning_curve;
        g.turn_c = 0.5;
        g.turn_p = 2.0;
        g.h = 1e-4;
        Dataset turn = make_dataset("turning_curve", g, 9, 1, false, 0);
        std::vector<double> ratios;
        for (int d = 4; d <= 9; ++d) ratios.push_back(glem_constant(*turn.tree, *turn.beta2, 2.0, d).root_ratio);
        bool increasing = true;
        for (std::size_t i = 1; i < ratios.size(); ++i) increasing = increasing && ratios[i] > ratios[i - 1];
        const double secs = seconds_since(t0);
        ok = ok && increasing && secs <= 300.0;
        detail += "turning: root ratio";
        for (double r : ratios) detail += fmt(" %.5f", r);
        detail += fmt(" (%.1fs)", secs);
    }
    return {ok, detail};
}

Outcome converse_inequality() {
    const auto t0 = Clock::now();
    bool ok = true;
    std::string detail;
    auto per_depth = [&](Dataset& d, int lo, int hi) {
        std::vector<double> c;
        for (int j = lo; j <= hi; ++j) c.push_back(compare_beta_iota(*d.tree, *d.beta2, *d.iota1, j).fitted_C);
        const bool good = std::all_of(c.begin(), c.end(), [](double x) { return std::isfinite(x) && x > 0.0; }) &&
                          spread_of(c) <= 4.0;
        ok = ok && good;
        detail += d.name + ": C";
        for (double x : c) detail += fmt(" %.3f", x);
        detail += "; ";
    };
    per_depth(lipschitz(), 4, 9);
    per_depth(lines(), 4, 8);
    {
        GeneratorSpec g;
        g.family = Family::turning_curve;
        g.h = 5e-4;
        Dataset turn = make_dataset("turning_curve", g, 7, 1, true, 200000);
        per_depth(turn, 3, 7);
    }
    {
        GeneratorSpec g;
        g.family = Family::circle;
        g.h = 5e-4;
        Dataset circ = make_dataset("circle", g, 6, 1, true, 200000);
        per_depth(circ, 3, 6);
    }
    {
        GeneratorSpec g;
        g.family = Family::segment;
        g.h = 5e-4;
        Dataset seg = make_dataset("segment", g, 6, 1, true, 200000);
        const auto cmp = compare_beta_iota(*seg.tree, *seg.beta2, *seg.iota1);
        ok = ok && std::isfinite(cmp.fitted_C);
        detail += fmt("segment: C=%.3g", cmp.fitted_C) + " (flat cubes " + std::to_string(cmp.flat_skipped) + ")";
    }
    const double secs = seconds_since(t0);
    return {ok && secs <= 300.0, detail + fmt(" %.1fs", secs)};
}

Outcome cayley_menger() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g;
    std::uniform_int_distribution<int> pick(1, 4);
    double worst = 0.0;
    for (int t = 0; t < 10000; ++t) {
        const int d = pick(rng);
        Mat s(5, d + 1);
        for (Index i = 0; i < s.size(); ++i) s.data()[i] = g(rng);
        Vec z(5);
        for (Index i = 0; i < 5; ++i) z[i] = g(rng);
        const Mat e = s.rightCols(d).colwise() - s.col(0);
        const Vec r = z - s.col(0);
        const double direct = (r - e * e.colPivHouseholderQr().solve(r)).norm();
        worst = std::max(worst, std::abs(dist_via_volumes(z, s) - direct) / direct);
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-10 && secs <= 5.0, fmt("max rel err=%.3g", worst) + fmt(" (%.2fs)", secs)};
}

Outcome small_angle() {
    const auto t0 = Clock::now();
    double D = 0.0;
    bool ok = true;
    std::string detail;
    for (double th : {0.01, 0.05, 0.1}) {
        const auto rep = small_angle_suite(th, 1000, 21, 0.3, 5);
        ok = ok && rep.trials == 1000 && rep.violations == 0 && std::isfinite(rep.fitted_constant);
        D = std::max(D, rep.fitted_constant);
        detail += fmt("theta=%g", th) + fmt(" max=%.4f; ", rep.fitted_constant);
    }
    const double secs = seconds_since(t0);
    return {ok && std::isfinite(D) && secs <= 30.0, detail + fmt("D=%.4f", D)};
}

Outcome weighted_packing() {
    const auto t0 = Clock::now();
    bool ok = true;
    std::string detail;
    for (Dataset* d : {&lines(), &lipschitz()}) {
        ensure_packing_beta(*d, 1);
        std::vector<double> c;
        std::size_t violations = 0;
        for (int j = 4; j <= 8; ++j) {
            const auto rep = packing_report(*d->tree, 1.0, *d->iota1, *d->beta_packing, j);
            violations += rep.violations;
            c.push_back(rep.fitted_Cbar);
        }
        const bool good = violations == 0 &&
                          std::all_of(c.begin(), c.end(), [](double x) { return std::isfinite(x) && x > 0.0; }) &&
                          spread_of(c) <= 4.0;
        ok = ok && good;
        detail += d->name + fmt(" (K0=%.2f): C", d->K0);
        for (double x : c) detail += fmt(" %.3g", x);
        detail += fmt(" spread %.2f; ", spread_of(c));
    }
    const double secs = seconds_since(t0);
    return {ok && secs <= 300.0, detail + fmt("%.1fs", secs)};
}

Outcome embedding() {
    const auto t0 = Clock::now();
    const auto rep = embedding_check(100, 13, 3, 8);
    const double secs = seconds_since(t0);
    bool ok = secs <= 120.0;
    std::string detail;
    for (const auto* c : {&rep.heis_line, &rep.planar_line}) {
        ok = ok && c->report.trials == 100 && c->report.violations == 0 && c->source_over_target <= 20.0 &&
             c->target_over_source <= 1.0 + 1e-12;
        detail += c->report.name + fmt(": source/target=%.4f", c->source_over_target) +
                  fmt(" target/source=%.6f; ", c->target_over_source);
    }
    return {ok, detail + fmt("%.1fs", secs)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"parallel-lines scaling law", scaling_law},
        {"iota at most twice beta", iota_two_beta},
        {"dyadic cube axioms", dyadic_axioms},
        {"Euclidean two-plane Pythagoras", eucl_pythagoras},
        {"Heisenberg projection bracket", projection_bracket},
        {"Heisenberg Pythagoras constants", heis_pythagoras},
        {"Carleson dichotomy", carleson_dichotomy},
        {"converse beta-iota inequality", converse_inequality},
        {"Cayley-Menger distance identity", cayley_menger},
        {"small-angle criterion", small_angle},
        {"weighted packing", weighted_packing},
        {"embedding comparability", embedding},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = Clock::now();
        Outcome out;
        try {
            out = criteria[i].second();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        if (!out.pass) ++failed;
        std::printf("[%s] %zu %s (%.1fs): %s\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    seconds_since(t0), out.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
    return failed == 0 ? 0 : 1;
}
