#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>

#include "qrect/carleson.hpp"
#include "qrect/coefficients.hpp"
#include "qrect/cubes.hpp"
#include "qrect/planes.hpp"
#include "qrect/svg.hpp"

namespace qrect::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0, kIo = 1, kConfig = 2, kResolution = 3, kViolation = 4;

void emit(const json& j) { std::cout << j.dump() << std::endl; }

int guarded(const std::string& command, const std::function<int()>& body) {
    auto fail = [&](int code, const std::string& what, json extra = json::object()) {
        json j{{"command", command}, {"status", "error"}, {"exit_code", code}, {"message", what}};
        j.update(extra);
        emit(j);
        std::cerr << "error: " << what << '\n';
        return code;
    };
    try {
        return body();
    } catch (const ScaleBelowResolution& e) {
        return fail(kResolution, e.what(), {{"level", e.level()}});
    } catch (const ParseError& e) {
        return fail(kIo, e.what(), {{"line", e.line()}});
    } catch (const SchemaError& e) {
        return fail(kIo, e.what());
    } catch (const Error& e) {
        return fail(kConfig, e.what());
    } catch (const std::ios_base::failure& e) {
        return fail(kIo, e.what());
    } catch (const fs::filesystem_error& e) {
        return fail(kIo, e.what());
    }
}

fs::path resolve(const RunConfig& cfg, const fs::path& p) { return p.is_absolute() ? p : cfg.out_dir / p; }

std::ofstream open_out(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out) throw std::ios_base::failure("cannot write " + p.string());
    return out;
}

std::string tag(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

WeightedPointCloud load_or_default(const RunConfig& cfg) {
    if (!cfg.input.empty()) return read_cloud(cfg.input);
    GeneratorSpec g;
    g.family = Family::lipschitz_graph;
    g.h = 1e-3;
    g.seed = cfg.seed;
    return generate(g);
}

json report_json(const VerificationReport& r) { return json::parse(to_json(r)); }

}  // namespace

int cmd_gen(const RunConfig& cfg) {
    return guarded("gen", [&] {
        GeneratorSpec g = cfg.generator;
        g.family = parse_family(cfg.family);
        g.seed = cfg.seed;
        const WeightedPointCloud cloud = generate(g);
        const fs::path out = resolve(cfg, cfg.output);
        if (out.has_parent_path()) fs::create_directories(out.parent_path());
        write_cloud(cloud, out);
        const Diameter d = diameter(cloud);
        emit({{"command", "gen"}, {"status", "ok"}, {"family", family_name(g.family)},
              {"metric", cloud.metric.kind_name()}, {"n", cloud.metric.n}, {"N", cloud.size()},
              {"diam", d.value}, {"diam_exact", d.exact}, {"mass", cloud.total_mass()}, {"h", cloud.h},
              {"output", out.string()}});
        return kOk;
    });
}

int cmd_cubes(const RunConfig& cfg) {
    return guarded("cubes", [&] {
        const WeightedPointCloud cloud = read_cloud(cfg.input);
        const DyadicTree tree = build_tree(cloud, cfg.depth, cfg.seed);
        const AxiomReport ax = verify_axioms(tree);
        const fs::path out = resolve(cfg, cfg.output.empty() ? fs::path("tree.json") : cfg.output);
        auto os = open_out(out);
        write_tree_json(tree, os);
        const bool ok = ax.partition_ok && ax.nesting_ok && ax.unique_ancestor_ok && ax.sum_of_parts_ok;
        emit({{"command", "cubes"}, {"status", "ok"}, {"cubes", tree.cubes().size()}, {"depth", tree.depth()},
              {"scale", tree.scale()}, {"measured_c0", ax.measured_c0}, {"partition_ok", ax.partition_ok},
              {"nesting_ok", ax.nesting_ok}, {"unique_ancestor_ok", ax.unique_ancestor_ok},
              {"sum_of_parts_ok", ax.sum_of_parts_ok}, {"patch_m", ax.patch_m}, {"patch_K0", ax.patch_K0},
              {"output", out.string()}});
        return ok ? kOk : kViolation;
    });
}

int cmd_analyze(const RunConfig& cfg) {
    return guarded("analyze", [&] {
        struct Request {
            CoefficientKind kind;
            double q, p;
        };
        std::vector<Request> requests;
        for (const std::string& text : cfg.coefficients) {
            std::vector<std::string> parts;
            std::size_t start = 0;
            for (std::size_t pos; (pos = text.find(':', start)) != std::string::npos; start = pos + 1)
                parts.push_back(text.substr(start, pos - start));
            parts.push_back(text.substr(start));
            if (parts.size() > 3) throw InvalidParameter("coef", "expected KIND[:q[:p]]");
            Request r{parse_kind(parts[0]), 2.0, 0.0};
            if (r.kind == CoefficientKind::iota_p || r.kind == CoefficientKind::iota_map) r.q = 1.0;
            try {
                if (parts.size() > 1) r.q = std::stod(parts[1]);
                r.p = parts.size() > 2 ? std::stod(parts[2]) : (r.kind == CoefficientKind::beta_inf ? 2.0 : r.q);
            } catch (const std::logic_error&) {
                throw InvalidParameter("coef", "bad exponent in '" + text + "'");
            }
            if (!(r.q >= 1.0) || !(r.p > 0.0)) throw InvalidParameter("coef", "exponents out of range in '" + text + "'");
            requests.push_back(r);
        }
        if (cfg.k < 1) throw InvalidParameter("k", "must be >= 1");

        const WeightedPointCloud cloud = read_cloud(cfg.input);
        const DyadicTree tree = build_tree(cloud, cfg.depth, cfg.seed);
        json reports = json::array();
        for (const Request& r : requests) {
            CoefficientSpec spec{r.kind, r.q, cfg.k, 2.0, cfg.starts, cfg.pair_budget, cfg.seed};
            const CubeCoefficients coefs = evaluate_cubes(tree, spec, cfg.threads);
            const CarlesonReport rep = glem_constant(tree, coefs, r.p);
            const std::string stem = kind_name(r.kind) + "_q" + tag(r.q) + "_p" + tag(r.p);
            {
                auto os = open_out(cfg.out_dir / (stem + "_report.csv"));
                write_carleson_csv(rep, os);
            }
            {
                auto os = open_out(cfg.out_dir / (stem + "_meta.json"));
                write_carleson_meta(rep, cfg.seed, os);
            }
            {
                auto os = open_out(cfg.out_dir / (stem + "_records.csv"));
                write_records_csv(coefs.records, os);
            }
            {
                auto os = open_out(cfg.out_dir / (stem + "_planes.json"));
                write_planes_json(coefs.records, os);
            }
            if (cfg.emit_svg) {
                PlotSeries m_series{"M estimate", {}, {}}, root_series{"root ratio", {}, {}};
                PlotSeries coef_series{"mean coefficient", {}, {}};
                for (int d = 0; d <= tree.depth(); ++d) {
                    const CarlesonReport part = glem_constant(tree, coefs, r.p, d);
                    m_series.x.push_back(d);
                    m_series.y.push_back(part.M_estimate);
                    root_series.x.push_back(d);
                    root_series.y.push_back(part.root_ratio);
                    double acc = 0.0;
                    std::size_t used = 0;
                    for (CubeId id : tree.level(d))
                        if (!coefs.skipped[static_cast<std::size_t>(id)]) {
                            acc += coefs.value(id);
                            ++used;
                        }
                    if (used > 0) {
                        coef_series.x.push_back(std::ldexp(1.0, -d) / tree.scale());
                        coef_series.y.push_back(acc / static_cast<double>(used));
                    }
                }
                const std::vector<PlotSeries> by_depth{m_series, root_series};
                auto os = open_out(cfg.out_dir / (stem + "_depth.svg"));
                write_svg_plot(by_depth, {"Carleson ratio by depth", "depth", "ratio", false, false}, os);
                const std::vector<PlotSeries> by_scale{coef_series};
                auto os2 = open_out(cfg.out_dir / (stem + "_scale.svg"));
                write_svg_plot(by_scale, {"Coefficient by scale", "cube side", kind_name(r.kind), true, true}, os2);
            }
            reports.push_back({{"kind", kind_name(r.kind)}, {"q", r.q}, {"p", r.p}, {"M_estimate", rep.M_estimate},
                               {"witness_root", rep.witness}, {"root_ratio", rep.root_ratio},
                               {"skipped_cubes", rep.skipped}, {"report", (cfg.out_dir / (stem + "_report.csv")).string()}});
        }
        emit({{"command", "analyze"}, {"status", "ok"}, {"N", cloud.size()}, {"cubes", tree.cubes().size()},
              {"depth", tree.depth()}, {"reports", reports}});
        return kOk;
    });
}

int cmd_verify(const RunConfig& cfg) {
    return guarded("verify", [&] {
        static const std::vector<std::string> suites{"pythagoras", "bracket",  "small_angle", "iota_beta",
                                                     "tilting",    "packing",  "embedding",   "all"};
        if (std::find(suites.begin(), suites.end(), cfg.suite) == suites.end())
            throw InvalidParameter("suite", "unknown suite '" + cfg.suite + "'");
        auto wants = [&](const std::string& s) { return cfg.suite == s || cfg.suite == "all"; };
        auto trials = [&](std::size_t fallback) { return cfg.trials > 0 ? cfg.trials : fallback; };
        json results = json::array();
        bool hard_failure = false;
        auto add = [&](const VerificationReport& r, bool hard) {
            auto os = open_out(cfg.out_dir / ("verify_" + r.name + ".json"));
            os << to_json(r) << '\n';
            json j = report_json(r);
            j["hard"] = hard;
            results.push_back(j);
            if (hard && r.violations > 0) hard_failure = true;
        };

        if (wants("pythagoras")) {
            add(pythagoras_check(PythagorasKind::eucl_two_plane, trials(10000), cfg.seed), true);
            add(pythagoras_check(PythagorasKind::heis_one_plane, trials(10000), cfg.seed), false);
            add(pythagoras_check(PythagorasKind::heis_two_plane, trials(10000), cfg.seed), false);
        }
        if (wants("pythagoras") || wants("bracket")) add(projection_bracket_check(trials(1000), cfg.seed), true);
        if (wants("small_angle"))
            for (double theta : {0.01, 0.05, 0.1}) {
                VerificationReport r = small_angle_suite(theta, trials(1000), cfg.seed);
                r.name += "_" + tag(theta);
                add(r, false);
            }
        if (wants("iota_beta")) add(iota_beta_check(trials(1000), cfg.seed), true);
        if (wants("tilting") || wants("packing")) {
            const WeightedPointCloud cloud = load_or_default(cfg);
            const DyadicTree tree = build_tree(cloud, cfg.depth, cfg.seed);
            if (wants("tilting")) {
                TiltingOptions opt;
                opt.p = cfg.p;
                opt.seed = cfg.seed;
                opt.threads = cfg.threads;
                const TiltingReport t = tilting_check(tree, opt);
                add(t.summary, false);
                results.back()["level_constants"] = t.level_constants;
            }
            if (wants("packing")) {
                if (tree.depth() < 3) throw InvalidParameter("depth", "packing needs depth >= 3");
                CoefficientSpec io{CoefficientKind::iota_p, cfg.p, 1, 2.0, 1, cfg.pair_budget, cfg.seed};
                CoefficientSpec be{CoefficientKind::beta_p, 2.0 * cfg.p, 1, global_patch_constant(tree), 1,
                                   cfg.pair_budget, cfg.seed};
                const auto iota = evaluate_cubes(tree, io, cfg.threads);
                const auto beta = evaluate_cubes(tree, be, cfg.threads);
                const PackingReport pr = packing_report(tree, cfg.p, iota, beta);
                auto os = open_out(cfg.out_dir / "packing.csv");
                os << "root_id,lhs,rhs_sum,fitted_Cbar,m,K0\n";
                for (const auto& row : pr.rows)
                    os << row.root << ',' << row.lhs << ',' << row.rhs_sum << ',' << row.fitted_Cbar << ','
                       << row.patch.m << ',' << row.patch.K0 << '\n';
                VerificationReport r;
                r.name = "packing";
                r.trials = pr.rows.size();
                r.violations = pr.violations;
                r.fitted_constant = pr.fitted_Cbar;
                r.worst_case = json{{"root", pr.witness}, {"K0", pr.K0}}.dump();
                add(r, false);
            }
        }
        if (wants("embedding")) {
            const EmbeddingReport e = embedding_check(trials(100), cfg.seed, cfg.heis_n);
            add(e.heis_line.report, false);
            results.back()["target_over_source"] = e.heis_line.target_over_source;
            add(e.planar_line.report, false);
            results.back()["target_over_source"] = e.planar_line.target_over_source;
        }
        emit({{"command", "verify"}, {"status", hard_failure ? "violation" : "ok"}, {"suite", cfg.suite},
              {"reports", results}});
        return hard_failure ? kViolation : kOk;
    });
}

int cmd_scaling(const RunConfig& cfg) {
    return guarded("scaling", [&] {
        const auto rows = scaling_experiment(cfg.eps_list, cfg.q, cfg.pair_budget, cfg.seed, cfg.threads);
        {
            auto os = open_out(cfg.out_dir / "scaling.csv");
            write_scaling_csv(rows, os);
        }
        json table = json::array();
        PlotSeries iota{"iota / (eps^2 ln(1/eps))", {}, {}}, beta{"beta / eps", {}, {}};
        for (const auto& r : rows) {
            table.push_back({{"eps", r.eps}, {"points", r.points}, {"beta", r.beta}, {"iota", r.iota},
                             {"iota_norm", r.iota_norm}, {"beta_norm", r.beta_norm},
                             {"beta_inf_estimate", r.beta_inf_estimate}, {"iota_inf_estimate", r.iota_inf_estimate}});
            iota.x.push_back(r.eps);
            iota.y.push_back(r.iota_norm);
            beta.x.push_back(r.eps);
            beta.y.push_back(r.beta_norm);
        }
        if (cfg.emit_svg) {
            const std::vector<PlotSeries> series{iota, beta};
            auto os = open_out(cfg.out_dir / "scaling.svg");
            write_svg_plot(series, {"Parallel lines scaling", "eps", "normalized value", true, true}, os);
        }
        emit({{"command", "scaling"}, {"status", "ok"}, {"rows", table},
              {"output", (cfg.out_dir / "scaling.csv").string()}});
        return kOk;
    });
}

}  // namespace qrect::cli
